"""SVG figures for run reports.

Output is deterministic: the SVG id salt and the date stamp are fixed so the
same data gives the same bytes.
"""
from __future__ import annotations

import io
import re
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .fieldgrid import ComplexField, RealField  # noqa: E402

_RC = {"svg.hashsalt": "causalwave", "svg.fonttype": "path", "svg.image_inline": True}


def _render(fig) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context(_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def _magnitude(field):
    vals = np.asarray(field.values)
    return np.abs(vals) if np.iscomplexobj(vals) else vals


def plot_svg(field: RealField | ComplexField | None = None, trajectories: Sequence = (),
             title: str = "", label: str = "value", xlabel: str = "x", ylabel: str = "y",
             units: str = "") -> str:
    """Line plot for a 1D field, raster heat map for 2D, with optional trajectory overlay.

    Complex fields are drawn as ``|psi|``.  In 1D trajectories are drawn in the
    ``(t, x)`` plane; in 2D as curves in the ``(x, y)`` plane over the map.
    """
    if field is not None and field.grid.dim > 2:
        raise ValueError(f"cannot plot {field.grid.dim}D data; select a 1D or 2D slice first "
                         "(e.g. values[:, :, k])")
    for tr in trajectories:
        if tr.positions.shape[1] > 2:
            raise ValueError("trajectories with more than two coordinates need a projection")
    suffix = f" [{units}]" if units else ""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if field is not None and field.grid.dim == 1:
        x = field.grid.axes()[0]
        if trajectories:
            # a 1D field and trajectories share x; trajectories go on a twin axis in t
            ax.plot(x, _magnitude(field), color="0.6", lw=1.0)
            ax.set_xlabel(xlabel + suffix)
            ax.set_ylabel(label)
            ax2 = ax.twinx()
            for tr in trajectories:
                ax2.plot(tr.positions[:, 0], tr.times, lw=0.8)
            ax2.set_ylabel("t")
        else:
            ax.plot(x, _magnitude(field), lw=1.2)
            ax.set_xlabel(xlabel + suffix)
            ax.set_ylabel(label)
    elif field is not None:
        g = field.grid
        xa, ya = g.axes()
        extent = (xa[0] - 0.5 * g.dx[0], xa[-1] + 0.5 * g.dx[0],
                  ya[0] - 0.5 * g.dx[1], ya[-1] + 0.5 * g.dx[1])
        im = ax.imshow(_magnitude(field).T, origin="lower", extent=extent, aspect="auto",
                       cmap="viridis", interpolation="nearest")
        fig.colorbar(im, ax=ax, label=label)
        for tr in trajectories:
            ax.plot(tr.positions[:, 0], tr.positions[:, 1], color="w", lw=0.8)
        ax.set_xlabel(xlabel + suffix)
        ax.set_ylabel(ylabel + suffix)
    else:
        for tr in trajectories:
            if tr.positions.shape[1] == 1:
                ax.plot(tr.times, tr.positions[:, 0], lw=0.8)
            else:
                ax.plot(tr.positions[:, 0], tr.positions[:, 1], lw=0.8)
        two = any(tr.positions.shape[1] == 2 for tr in trajectories)
        ax.set_xlabel((xlabel if two else "t") + suffix)
        ax.set_ylabel((ylabel if two else xlabel) + suffix)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _render(fig)


def plot_series(x: np.ndarray, ys: dict, xlabel: str = "x", ylabel: str = "", logy: bool = False,
                title: str = "") -> str:
    """Several named curves against one abscissa."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, y in ys.items():
        ax.plot(x, y, lw=1.0, label=name)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(ys) > 1:
        ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _render(fig)


_FLOAT = re.compile(r"-?\d+\.\d+(?:e[-+]?\d+)?")


def normalize_svg(svg: str, digits: int = 3) -> str:
    """Round every decimal number so SVGs can be compared across library versions."""
    return _FLOAT.sub(lambda m: f"{float(m.group()):.{digits}f}", svg)
