import math
from typing import List, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from navgen.errors import DataError
from navgen.instructions.vocab import BOS, COUNT_WORDS, DEFAULT_VOCAB, EOS, Vocab
from navgen.utils import content_hash
from navgen.world.agent import heading_elevation
from navgen.world.graph import EnvGraph


STYLES = ("terse", "landmark", "verbose")
Style = Literal["terse", "landmark", "verbose"]

L_MAX = 32
# |heading change| below this reads as "straight"
STRAIGHT_TOLERANCE = math.pi / 6


class Instruction(BaseModel):
    model_config = ConfigDict(frozen=True)

    token_ids: List[int]
    text: str
    style: Style

    @field_validator("token_ids")
    @classmethod
    def _framed(cls, ids):
        if len(ids) < 2 or ids[0] != BOS or ids[-1] != EOS:
            raise ValueError("instruction must start with BOS and end with EOS")
        if BOS in ids[1:-1] or EOS in ids[1:-1]:
            raise ValueError("instruction has an interior BOS/EOS")
        return ids

    def __len__(self):
        return len(self.token_ids)


def signed_turn(previous_heading: float, heading: float) -> float:
    """Heading change wrapped to (-pi, pi]; positive is a left turn."""
    delta = math.remainder(heading - previous_heading, 2 * math.pi)
    return math.pi if delta == -math.pi else delta


def turn_word(delta: float) -> str:
    if abs(delta) < STRAIGHT_TOLERANCE:
        return "straight"
    return "left" if delta > 0 else "right"


class _Clause:
    """Mandatory tokens plus optional mentions that can be dropped to fit the length budget."""

    def __init__(self, core: List[str], landmark: List[str] = None, room: List[str] = None, droppable=True):
        self.core = core
        self.landmark = landmark or []
        self.room = room or []
        self.droppable = droppable

    def tokens(self) -> List[str]:
        return self.core + self.room + self.landmark


def _moves(graph: EnvGraph, path: Sequence[int]):
    """Per move: (target node, direction word)."""
    moves = []
    previous = None
    for u, v in zip(path[:-1], path[1:]):
        heading, _ = heading_elevation(graph, u, v)
        direction = "forward" if previous is None else turn_word(signed_turn(previous, heading))
        moves.append((v, direction))
        previous = heading
    return moves


def _stop_clause(graph: EnvGraph, goal: int, style: str, rng) -> List[str]:
    node = graph.node(goal)
    if style == "landmark" and node.landmarks:
        return ["stop", "next", "to", "the", str(rng.choice(node.landmarks)), "."]
    return ["stop", "in", "the", node.room_label, "."]


def _room_change(graph, u, v) -> List[str]:
    room = graph.node(v).room_label
    return ["into", "the", room] if room != graph.node(u).room_label else []


def _terse(graph, path, rng) -> List[_Clause]:
    clauses = []
    previous_direction = None
    for (v, direction), u in zip(_moves(graph, path), path[:-1]):
        if direction == "straight" and previous_direction == "straight":
            continue
        verb = str(rng.choice(["go", "head"]))
        clauses.append(_Clause([verb, direction], room=_room_change(graph, u, v)))
        previous_direction = direction
    return clauses


def _landmark(graph, path, rng) -> List[_Clause]:
    clauses = []
    for (v, direction), u in zip(_moves(graph, path), path[:-1]):
        if direction in ("left", "right"):
            core = ["turn", direction]
        else:
            core = [str(rng.choice(["walk", "move"])), direction]
        landmarks = graph.node(v).landmarks
        mention = ["past", "the", str(rng.choice(landmarks))] if landmarks else []
        clauses.append(_Clause(["and"] + core if clauses else core, landmark=mention, room=_room_change(graph, u, v)))
    return clauses


def _verbose(graph, path, rng) -> List[_Clause]:
    groups = []
    for (v, direction), u in zip(_moves(graph, path), path[:-1]):
        if groups and direction == "straight" and groups[-1]["count"] < len(COUNT_WORDS):
            groups[-1]["end"] = v
            groups[-1]["count"] += 1
        else:
            groups.append({"direction": direction, "start": u, "end": v, "count": 1})
    clauses = []
    for i, group in enumerate(groups):
        if i == 0:
            lead = ["first", ","]
        elif i == len(groups) - 1:
            lead = ["finally", ","]
        else:
            lead = [str(rng.choice(["then", "next"])), ","]
        if group["direction"] in ("left", "right"):
            core = lead + ["turn", group["direction"], "and", "walk"]
        else:
            core = lead + ["walk", group["direction"]]
        count = group["count"]
        core += ["for", COUNT_WORDS[count - 1], "step" if count == 1 else "steps"]
        landmarks = graph.node(group["end"]).landmarks
        mention = ["past", "the", str(rng.choice(landmarks))] if landmarks else []
        room = _room_change(graph, group["start"], group["end"])
        clauses.append(_Clause(core, landmark=mention, room=room, droppable=i > 0))
    return clauses


_BUILDERS = {"terse": _terse, "landmark": _landmark, "verbose": _verbose}


def _fit(clauses: List[_Clause], stop: List[str], budget: int) -> List[str]:
    def total():
        return sum(len(c.tokens()) for c in clauses) + len(stop)

    for part in ("landmark", "room"):
        for clause in clauses:
            if total() <= budget:
                break
            setattr(clause, part, [])
    while total() > budget:
        middle = [i for i, c in enumerate(clauses[:-1]) if c.droppable and i > 0]
        if not middle:
            raise DataError(f"instruction cannot fit in {budget + 2} tokens")
        del clauses[middle[len(middle) // 2]]
    tokens = []
    for clause in clauses:
        tokens += clause.tokens()
    return tokens + stop


def generate_instruction(
    graph: EnvGraph,
    path: Sequence[int],
    style: str,
    seed: int,
    max_len: int = L_MAX,
    vocab: Optional[Vocab] = None,
) -> Instruction:
    if style not in STYLES:
        raise DataError(f"unknown paraphrase style {style!r}; expected one of {STYLES}")
    if not path:
        raise DataError("cannot describe an empty path")
    for node in path:
        graph.check_node(node)
    vocab = vocab or DEFAULT_VOCAB
    rng = np.random.default_rng([seed, STYLES.index(style), int(content_hash(list(path)), 16) % (2**32)])

    clauses = _BUILDERS[style](graph, list(path), rng)
    stop = _stop_clause(graph, path[-1], style, rng)
    words = _fit(clauses, stop, max_len - 2)
    text = " ".join(words)
    return Instruction(token_ids=vocab.encode(text), text=text, style=style)


def join_instructions(first: Instruction, second: Instruction) -> Instruction:
    """Concatenate two instructions of the same style, dropping the inner EOS/BOS."""
    if first.style != second.style:
        raise DataError(f"cannot join styles {first.style} and {second.style}")
    return Instruction(
        token_ids=first.token_ids[:-1] + second.token_ids[1:],
        text=f"{first.text} {second.text}",
        style=first.style,
    )
