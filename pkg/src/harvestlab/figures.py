"""Preset parameter tables for the published figure families.

Each preset is a one-dimensional scan: a fixed abscissa grid of 256 points
and one column per curve.  Ordinates are per squared coupling; only the
shapes (monotonicity, peaks, asymptotes) are meaningful for comparison.

Figure kinds:

``vs_l``        quantity against L at fixed dz, one curve per gap ratio
``vs_dz``       quantity against dz at fixed L, one curve per gap ratio plus
                the boundaryless value of each (constant columns)
``vs_ratio``    quantity against delta_omega / omega_a, one curve per dz plus
                the boundaryless curve
``gap_curve``   optimal delta_omega / omega_a against dz, one curve per L
``difference``  vertical minus parallel value against dz, one curve per ratio
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import partial

import numpy as np

from ._parallel import parallel_map
from .model import Alignment, DetectorPair, Geometry, evaluate
from .measures import concurrence, mutual_information
from .optimize import FlatObjectiveWarning, Quantity, optimal_gap

__all__ = ["FigurePreset", "PRESETS", "GRID_POINTS", "get_preset", "figure_table", "column_names"]

GRID_POINTS = 256


def _dz_grid() -> tuple[float, ...]:
    # dz = 0 plus a log grid reaching far enough out to show the asymptote
    return (0.0,) + tuple(float(x) for x in np.geomspace(1e-2, 50.0, GRID_POINTS - 1))


def _linear(lo: float, hi: float) -> tuple[float, ...]:
    return tuple(float(x) for x in np.linspace(lo, hi, GRID_POINTS))


@dataclass(frozen=True)
class FigurePreset:
    fig_id: str
    kind: str
    quantity: Quantity
    alignment: Alignment
    omega_a: float
    abscissa: str
    grid: tuple[float, ...]
    ratios: tuple[float, ...] = ()
    L: tuple[float, ...] = ()
    dz: tuple[float, ...] = ()
    bound: float = 20.0
    grid_label: str = ""

    def metadata(self) -> list[tuple[str, str]]:
        """Ordered ``(key, value)`` pairs describing the run."""
        def fmt(values):
            return ",".join(f"{v:g}" for v in values)

        meta = [
            ("command", "reproduce"),
            ("figure", self.fig_id),
            ("kind", self.kind),
            ("quantity", self.quantity.value),
            ("alignment", self.alignment.value),
            ("omega_a", f"{self.omega_a:g}"),
            ("abscissa", self.abscissa),
            ("grid", self.grid_label),
            ("points", str(len(self.grid))),
        ]
        if self.ratios:
            meta.append(("delta_omega_ratios", fmt(self.ratios)))
        if self.L:
            meta.append(("L", fmt(self.L)))
        if self.dz:
            meta.append(("dz", fmt(self.dz)))
        if self.kind == "gap_curve":
            meta.append(("bound", f"{self.bound:g}"))
        return meta


def _value(quantity: Quantity, omega_a: float, ratio: float, geom: Geometry) -> float:
    state = evaluate(DetectorPair.from_ratios(omega_a, ratio), geom)
    if quantity is Quantity.CONCURRENCE:
        return concurrence(state)
    if quantity is Quantity.MUTUAL_INFO:
        return mutual_information(state)
    raise ValueError(f"figures plot concurrence or mutual_info, not {quantity.value}")


def column_names(preset: FigurePreset) -> list[str]:
    q = preset.quantity.value
    names = [preset.abscissa]
    if preset.kind == "vs_l":
        names += [f"{q}_ratio{r:g}" for r in preset.ratios]
    elif preset.kind == "vs_dz":
        names += [f"{q}_ratio{r:g}" for r in preset.ratios]
        names += [f"{q}_ratio{r:g}_boundaryless" for r in preset.ratios]
    elif preset.kind == "vs_ratio":
        names += [f"{q}_dz{z:g}" for z in preset.dz] + [f"{q}_boundaryless"]
    elif preset.kind == "gap_curve":
        names += [f"ratio_star_L{L:g}" for L in preset.L]
    elif preset.kind == "difference":
        names += [f"delta_{q}_ratio{r:g}" for r in preset.ratios]
    else:
        raise ValueError(f"unknown figure kind {preset.kind!r}")
    return names


def _cells(x: float, preset: FigurePreset) -> list[float]:
    q, oa, al = preset.quantity, preset.omega_a, preset.alignment
    kind = preset.kind
    if kind == "vs_l":
        (dz,) = preset.dz
        return [_value(q, oa, r, Geometry(al, x, dz)) for r in preset.ratios]
    if kind == "vs_dz":
        (L,) = preset.L
        row = [_value(q, oa, r, Geometry(al, L, x)) for r in preset.ratios]
        return row + [_value(q, oa, r, Geometry(Alignment.BOUNDARYLESS, L)) for r in preset.ratios]
    if kind == "vs_ratio":
        (L,) = preset.L
        row = [_value(q, oa, x, Geometry(al, L, dz)) for dz in preset.dz]
        return row + [_value(q, oa, x, Geometry(Alignment.BOUNDARYLESS, L))]
    if kind == "gap_curve":
        row = []
        for L in preset.L:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", FlatObjectiveWarning)
                res = optimal_gap(oa, Geometry(al, L, x), q, preset.bound)
            row.append(res.delta_omega_star / oa)
        return row
    # difference: vertical minus parallel
    (L,) = preset.L
    return [
        _value(q, oa, r, Geometry(Alignment.VERTICAL, L, x))
        - _value(q, oa, r, Geometry(Alignment.PARALLEL, L, x))
        for r in preset.ratios
    ]


def _row(x: float, preset: FigurePreset) -> list[float]:
    n = len(column_names(preset)) - 1
    try:
        cells = _cells(x, preset)
    except (ValueError, ArithmeticError):
        cells = [math.nan] * n
    return [x] + cells


def figure_table(preset: FigurePreset, workers: int | None = None) -> tuple[list[str], list[list[float]]]:
    """Column names and rows (abscissa first) for ``preset``."""
    rows = parallel_map(partial(_row, preset=preset), list(preset.grid), workers)
    return column_names(preset), rows


def _build() -> dict[str, FigurePreset]:
    C, I = Quantity.CONCURRENCE, Quantity.MUTUAL_INFO
    P, V = Alignment.PARALLEL, Alignment.VERTICAL
    small = (0.1, (0.0, 0.8, 10.0))
    large = (1.1, (0.0, 0.5, 1.1))
    dz_grid, dz_label = _dz_grid(), "0 then log(0.01, 50, 255)"
    l_grid, l_label = _linear(0.01, 10.0), "linear(0.01, 10, 256)"
    r_grid, r_label = _linear(0.0, 15.0), "linear(0, 15, 256)"
    g_grid, g_label = _linear(0.02, 5.0), "linear(0.02, 5, 256)"
    d_grid, d_label = _linear(0.1, 3.0), "linear(0.1, 3, 256)"
    out = {}

    def add(p: FigurePreset):
        out[p.fig_id] = p

    for q, (fa, fb) in ((C, ("fig2a", "fig2b")), (I, ("fig6a", "fig6b"))):
        for fid, (oa, ratios) in zip((fa, fb), (small, large)):
            add(FigurePreset(fid, "vs_l", q, P, oa, "L", l_grid, ratios=ratios, dz=(1.0,),
                             grid_label=l_label))
    for q, (fa, fb) in ((C, ("fig3a", "fig3b")), (I, ("fig7a", "fig7b"))):
        for fid, (oa, ratios) in zip((fa, fb), (small, large)):
            add(FigurePreset(fid, "vs_dz", q, P, oa, "dz", dz_grid, ratios=ratios, L=(0.5,),
                             grid_label=dz_label))
    for q, (fa, fb) in ((C, ("fig4a", "fig4b")), (I, ("fig8a", "fig8b"))):
        for fid, L in zip((fa, fb), (0.1, 1.5 if q is C else 5.0)):
            add(FigurePreset(fid, "vs_ratio", q, P, 0.1, "delta_omega_ratio", r_grid,
                             L=(L,), dz=(0.5, 1.0, 2.0), grid_label=r_label))
    for fid, q, al, Ls in (
        ("fig5", C, P, (0.1, 3.0, 4.0, 5.0)),
        ("fig9", I, P, (0.1, 3.0, 5.0, 7.0)),
        ("fig13", C, V, (0.1, 3.0, 4.0, 5.0)),
        ("fig14", I, V, (0.1, 3.0, 5.0, 7.0)),
    ):
        add(FigurePreset(fid, "gap_curve", q, al, 0.1, "dz", g_grid, L=Ls, grid_label=g_label))
    for q, (fa, fb) in ((C, ("fig11a", "fig11b")), (I, ("fig12a", "fig12b"))):
        for fid, L in zip((fa, fb), (0.5, 3.0)):
            add(FigurePreset(fid, "difference", q, V, 0.5, "dz", d_grid, ratios=(0.0, 0.8, 3.0),
                             L=(L,), grid_label=d_label))
    return dict(sorted(out.items(), key=lambda kv: (int(kv[0][3:].rstrip("ab")), kv[0])))


PRESETS = _build()


def get_preset(fig_id: str) -> FigurePreset:
    try:
        return PRESETS[fig_id]
    except KeyError:
        raise ValueError(f"unknown figure {fig_id!r}; valid ids: {', '.join(PRESETS)}") from None
