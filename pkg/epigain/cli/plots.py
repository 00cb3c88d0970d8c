"""
SVG figures for the CLI.

Figures are written as SVG with a fixed hash salt and no
date metadata, so identical inputs produce byte-identical files.
"""

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from epigain.errors import ExportError  # noqa: E402
from epigain.inquiry.cycle import InquiryTrace, emotion_cuts  # noqa: E402
from epigain.numerics.gains import GainPoint  # noqa: E402
from epigain.sweep.grid import SweepGrid  # noqa: E402

plt.rcParams["svg.hashsalt"] = "epigain"
plt.rcParams["svg.fonttype"] = "none"

_GAIN_STYLES = (("ig", "IG", "-"), ("kld", "KLD", "--"), ("bs", "BS", ":"))


def _save(fig: plt.Figure, path: Path) -> None:
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise ExportError(path, str(e)) from e
    finally:
        plt.close(fig)


def plot_gain_curves(points: List[GainPoint], path: Path) -> None:
    """Information gains against prediction error and against surprise."""
    fig, (by_delta, by_surprise) = plt.subplots(1, 2, figsize=(10, 4))
    deltas = [p.delta for p in points]
    surprises = [p.surprise for p in points]
    for field, label, style in _GAIN_STYLES:
        values = [getattr(p, field) for p in points]
        by_delta.plot(deltas, values, style, label=label)
        by_surprise.plot(surprises, values, style, label=label)
    by_delta.set_xlabel("prediction error δ")
    by_surprise.set_xlabel("surprise")
    for ax in (by_delta, by_surprise):
        ax.set_ylabel("information gain")
        ax.legend()
    fig.tight_layout()
    _save(fig, path)


def plot_heatmap(grid: SweepGrid, field: str, path: Path) -> None:
    """One OptimaRecord field over the (s_p, s_l) grid."""
    surface = grid.surface(field)
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(
        np.asarray(grid.s_p_values),
        np.asarray(grid.s_l_values),
        surface,
        shading="nearest",
        cmap="viridis",
    )
    fig.colorbar(mesh, ax=ax, label=field)
    ax.set_xlabel("prior variance s_p")
    ax.set_ylabel("likelihood variance s_l")
    ax.set_title(field)
    fig.tight_layout()
    _save(fig, path)


def plot_trace(trace: InquiryTrace, path: Path) -> None:
    """Surprise per step with the optimal band [S_KLD, S_BS] shaded."""
    optima = trace.optima
    boredom, confusion = emotion_cuts(optima, trace.config.label_thresholds)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.axhspan(optima.s_kld, optima.s_bs, color="tab:green", alpha=0.2, label="optimal band")
    ax.axhline(boredom, color="tab:blue", lw=0.8, ls="--", label="boredom limit")
    ax.axhline(confusion, color="tab:red", lw=0.8, ls="--", label="confusion limit")
    ax.plot([s.index for s in trace.steps], [s.surprise for s in trace.steps], "o-", color="black")
    ax.set_xlabel("step")
    ax.set_ylabel("surprise")
    ax.legend(loc="best")
    fig.tight_layout()
    _save(fig, path)
