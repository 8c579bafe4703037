"""Delimited output and figures for the CLI report path.

CSV cells are formatted with %.12g so reruns with the same seed are
byte-identical. Figures are rendered headlessly (Agg) next to the CSVs;
they are a convenience view of the same data, never the data itself.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % float(v)
    return str(v)


def write_csv(path, header, rows) -> Path:
    p = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def line_figure(path, x, series: dict, xlabel: str, ylabel: str,
                logx: bool = False, logy: bool = False, title: str = ""):
    """One PNG with a labeled curve per entry of series {label: y}."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in series.items():
        ax.plot(x, y, marker=".", label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(series) > 1:
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def raster_figure(path, s, title: str = ""):
    """Occupancy image: the plane itself in 2D, the densest axial slice
    plus a projection in 3D."""
    cells = np.asarray(s.cells, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 5))
    if cells.ndim == 2:
        img = cells
    else:
        k = int(np.argmax(cells.sum(axis=(0, 1))))
        img = cells[:, :, k] + 0.35 * (cells.max(axis=2) - cells[:, :, k])
    ax.imshow(img.T, origin="lower", cmap="viridis", interpolation="nearest")
    ax.set_xlabel("i")
    ax.set_ylabel("j")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def trace_figure(path, trace, title: str = "energy trace"):
    """P/V/E curves over optimizer snapshots (a list of breakdowns)."""
    xs = np.arange(len(trace))
    series = {"E": [b.E for b in trace],
              "P": [b.P for b in trace],
              "V": [b.V for b in trace]}
    return line_figure(path, xs, series, "snapshot", "energy", title=title)


def field_figure(path, field: np.ndarray, title: str = ""):
    """Scalar-field image: the plane in 2D, the central slice in 3D."""
    arr = np.asarray(field, dtype=float)
    img = arr if arr.ndim == 2 else arr[:, :, arr.shape[2] // 2]
    fig, ax = plt.subplots(figsize=(5, 5))
    im = ax.imshow(img.T, origin="lower", cmap="magma",
                   interpolation="nearest")
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_xlabel("i")
    ax.set_ylabel("j")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
