"""Figures written next to the delimited benchmark / curve output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .tonemap import CurveSpec, apply_curve, make_curve  # noqa: E402


def plot_benchmark(rows, path) -> None:
    """Seconds against megapixels, one line per window size."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for win in sorted({r.window for r in rows}):
        pts = sorted((r.megapixels, r.seconds) for r in rows if r.window == win)
        ax.plot(*zip(*pts), marker="o", label=f"{win}x{win}")
    ax.set_xlabel("image size (MP)")
    ax.set_ylabel("seconds")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.legend(title="window", frameon=False)
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_curves(specs: dict[str, CurveSpec], path, samples: int = 801) -> None:
    fig, axes = plt.subplots(1, len(specs), figsize=(3.2 * len(specs), 3.2), squeeze=False)
    for ax, (name, spec) in zip(axes[0], specs.items()):
        lo, hi = (0.0, 1.0) if spec.domain == "base" else (-1.0, 1.0)
        t = np.linspace(lo, hi, samples)
        ax.plot(t, t, color="0.7", lw=0.8, ls="--")
        ax.plot(t, apply_curve(make_curve(spec), t), lw=1.6)
        ax.set_title(f"{name}: {spec.family}", fontsize=9)
        ax.set_aspect("equal")
        ax.set_xlim(lo, hi)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
