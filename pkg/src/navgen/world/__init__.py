from navgen.world.agent import (
    STOP,
    STOP_ORIENTATION,
    Action,
    ActionEmbedding,
    AgentState,
    action_embedding,
    available_actions,
    heading_elevation,
    step,
)
from navgen.world.generator import LANDMARKS, ROOM_LABELS, WorldParams, generate_world, make_world_params
from navgen.world.graph import EnvGraph, Node, path_length, shortest_path
from navgen.world.io import WORLD_SCHEMA, load_world, save_world, world_from_dict, world_to_dict
