from pathlib import Path
from typing import List, Sequence

import matplotlib.pyplot as plt
import pandas as pd

from navgen import logger
from navgen.tent.entropy import TentStep
from navgen.utils import PathLike


TICK = 0.05


def tent_frame(profile: Sequence[TentStep], episode_id: str = "") -> pd.DataFrame:
    rows = []
    for step in profile:
        for k, (token, s) in enumerate(zip(step.tokens, step.entropy)):
            rows.append(
                {"episode_id": episode_id, "t": step.t, "k": k, "token": token, "S": float(s), "1-S": 1.0 - float(s)}
            )
    return pd.DataFrame(rows, columns=["episode_id", "t", "k", "token", "S", "1-S"])


def render_tent(profiles: Sequence[TentStep], out_path: PathLike, episode_id: str = "") -> List[Path]:
    """Write ``tent.csv`` and ``tent.svg`` into ``out_path``.

    Each step is drawn at height t + (1 - S) / 0.05 so one vertical tick is 0.05 of 1 - S.
    """
    if not profiles:
        logger.warning(f"empty TENT profile for {episode_id or 'episode'}; nothing written")
        return []
    out = Path(out_path)
    out.mkdir(parents=True, exist_ok=True)
    frame = tent_frame(profiles, episode_id)
    frame.to_csv(out / "tent.csv", index=False, float_format="%.6f")

    plt.rcParams["svg.hashsalt"] = "navgen-tent"
    tokens = profiles[0].tokens
    fig, ax = plt.subplots(figsize=(max(6.0, 0.35 * len(tokens)), 1.0 + 0.6 * len(profiles)))
    cmap = plt.get_cmap("viridis")
    for i, step in enumerate(profiles):
        offset = step.t + (1.0 / TICK) * (1.0 - step.entropy)
        color = cmap(i / max(len(profiles) - 1, 1))
        ax.plot(range(len(step.tokens)), offset, color=color, linewidth=1.2, label=f"t={step.t}")
    ax.set_xticks(range(len(tokens)))
    ax.set_xticklabels(tokens, rotation=60, fontsize=7)
    ax.set_ylabel("t + (1 - S) / 0.05")
    ax.set_title(episode_id)
    fig.tight_layout()
    fig.savefig(out / "tent.svg", format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"TENT written to {out}")
    return [out / "tent.csv", out / "tent.svg"]
