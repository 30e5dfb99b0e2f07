"""
Static hex-map renderings of a trained map: neuron counts and relevance
weights, one hexagon per neuron in the map's own layout.
"""

from pathlib import Path
from typing import Sequence

import math
import re

import matplotlib
import numpy as np
import svgwrite
from matplotlib.colors import LogNorm, Normalize, to_hex

from .artifacts import atomic_write_text
from .errors import DimensionMismatch
from .grid import MapGrid
from .train import TrainedMap

HEX_RADIUS = 20.0
MARGIN = 10.0
LEGEND_HEIGHT = 30.0
COLORMAP = "viridis"


def _hexagon(cx: float, cy: float, radius: float) -> list[tuple[float, float]]:
    # pointy-top: first vertex straight up
    angles = [math.radians(60 * k - 90) for k in range(6)]
    return [(round(cx + radius * math.cos(a), 3), round(cy + radius * math.sin(a), 3)) for a in angles]


def render_hex_map(grid: MapGrid, values: Sequence[float] | np.ndarray, title: str, log_scale: bool = False) -> str:
    """SVG text of one hexagon per neuron coloured by `values`."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.size,):
        raise DimensionMismatch(f"{values.size} values for a map of {grid.size} neurons")
    lo, hi = float(values.min()), float(values.max())
    if log_scale:
        norm: Normalize = LogNorm(vmin=lo, vmax=hi if hi > lo else lo * 1.0001)
    else:
        norm = Normalize(vmin=lo, vmax=hi if hi > lo else lo + 1.0)
    cmap = matplotlib.colormaps[COLORMAP]

    # neighbouring centres are one unit apart in grid coordinates
    unit = HEX_RADIUS * math.sqrt(3)
    positions = grid.positions * unit + np.array([MARGIN + unit / 2, MARGIN + HEX_RADIUS + LEGEND_HEIGHT])
    width = MARGIN * 2 + unit * (grid.cols + 0.5)
    height = LEGEND_HEIGHT + MARGIN * 2 + HEX_RADIUS * 2 + (grid.rows - 1) * unit * math.sqrt(3) / 2

    dwg = svgwrite.Drawing(size=(f"{width:.1f}", f"{height:.1f}"), profile="tiny")
    dwg.add(dwg.text(title, insert=(MARGIN, MARGIN + 12), font_size=12, font_family="sans-serif"))
    legend = f"min {lo:.4g}  max {hi:.4g}" + ("  (log scale)" if log_scale else "")
    dwg.add(dwg.text(legend, insert=(MARGIN, MARGIN + 26), font_size=10, font_family="sans-serif"))
    for m, (x, y) in enumerate(positions):
        color = to_hex(cmap(float(norm(values[m]))))
        dwg.add(dwg.polygon(_hexagon(float(x), float(y), HEX_RADIUS), fill=color, stroke="#ffffff", stroke_width=1))
        dwg.add(
            dwg.text(
                f"{values[m]:.3g}",
                insert=(round(float(x), 3), round(float(y) + 4, 3)),
                font_size=9,
                font_family="sans-serif",
                text_anchor="middle",
            )
        )
    return dwg.tostring()


def weight_maps(trained: TrainedMap) -> dict[str, np.ndarray]:
    """
    Per-neuron weight vectors by file stem: `weights-<var>` for variable
    schemes, `weights-<var>-mean` and `weights-<var>-dispersion` for
    component schemes. Global schemes give a constant map.
    """
    w = trained.weights
    lam_m, lam_v = w.component_weights(trained.grid.size)
    maps = {}
    for j, variable in enumerate(trained.variables):
        name = re.sub(r"[^A-Za-z0-9_.-]+", "_", variable)
        if w.per_component:
            maps[f"weights-{name}-mean"] = lam_m[:, j]
            maps[f"weights-{name}-dispersion"] = lam_v[:, j]
        else:
            maps[f"weights-{name}"] = lam_m[:, j]
    return maps


def write_svgs(directory: Path | str, trained: TrainedMap) -> list[Path]:
    directory = Path(directory)
    written = []
    path = directory / "counts.svg"
    atomic_write_text(path, render_hex_map(trained.grid, trained.counts(), "objects per neuron"))
    written.append(path)
    if trained.weights.scheme is not None:
        for stem, values in weight_maps(trained).items():
            path = directory / f"{stem}.svg"
            atomic_write_text(path, render_hex_map(trained.grid, values, stem, log_scale=True))
            written.append(path)
    return written
