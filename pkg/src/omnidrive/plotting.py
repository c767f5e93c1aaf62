"""SVG line plots with a CSV sidecar holding the plotted series."""
from __future__ import annotations

import io
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .formats import atomic_write  # noqa: E402


def emit_plot(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    path,
    xlabel: str = "",
    ylabel: str = "",
    title: str = "",
    equal_axes: bool = False,
    styles: Mapping[str, str] | None = None,
) -> tuple[Path, Path]:
    """Plot named ``(x, y)`` series to ``path`` (SVG) and ``path.csv``.

    The sidecar is long-format ``series,x,y``.  Returns both paths.
    """
    if not series:
        raise ValueError("nothing to plot")
    path = Path(path).with_suffix(".svg")
    styles = styles or {}
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, (x, y) in series.items():
        ax.plot(np.asarray(x), np.asarray(y), styles.get(name, "-"), label=name, linewidth=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if equal_axes:
        ax.set_aspect("equal", adjustable="datalim")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()

    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "omnidrive"}):
        fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write(path, buf.getvalue())

    side = io.StringIO()
    side.write("series,x,y\n")
    for name, (x, y) in series.items():
        for xi, yi in zip(np.asarray(x, dtype=float), np.asarray(y, dtype=float)):
            side.write(f"{name},{xi!r},{yi!r}\n")
    sidecar = atomic_write(path.with_suffix(".csv"), side.getvalue())
    return path, sidecar
