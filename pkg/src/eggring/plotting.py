"""Log-log figures of sweep bounds, written to image files."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sweep import ExponentFit, SweepRecord  # noqa: E402

STYLE = {
    ("caratheodory", "exact"): dict(color="tab:green", marker="o", ls="-"),
    ("sibony", "lower"): dict(color="tab:blue", marker="v", ls="-"),
    ("sibony", "upper"): dict(color="tab:blue", marker="^", ls="--"),
    ("sibony", "exact"): dict(color="tab:blue", marker="s", ls="-"),
    ("kobayashi", "lower"): dict(color="tab:red", marker="v", ls=":"),
    ("kobayashi", "upper"): dict(color="tab:red", marker="^", ls="-"),
    ("kobayashi", "exact"): dict(color="tab:red", marker="s", ls="-"),
}


def plot_sweep(records: Sequence[SweepRecord], fits: Sequence[ExponentFit], path, title: str = "") -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 5))
    slopes = {(f.metric, f.kind, f.direction): f for f in fits}
    groups: dict[tuple, list[SweepRecord]] = {}
    for r in records:
        if not r.failed and r.value > 0:
            groups.setdefault((r.metric, r.kind, r.direction), []).append(r)
    for key in sorted(groups, key=lambda k: (k[0], k[1])):
        rs = sorted(groups[key], key=lambda r: r.delta)
        x = np.array([r.delta for r in rs])
        y = np.array([r.value for r in rs])
        label = f"{key[0]} {key[1]}"
        fit = slopes.get(key)
        if fit is not None:
            label += f"  slope {fit.slope:+.3f} (target {fit.theoretical_slope:+.3f})"
        ax.loglog(x, y, ms=4, lw=1.2, label=label, **STYLE.get(key[:2], {}))
    ax.set_xlabel(r"distance to inner boundary $\delta$")
    ax.set_ylabel("metric bound")
    ax.grid(True, which="both", alpha=0.3)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="upper right")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
