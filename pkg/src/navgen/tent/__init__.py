from navgen.tent.entropy import TentStep, tent_step, tent_trace, token_entropy
from navgen.tent.render import TICK, render_tent, tent_frame
