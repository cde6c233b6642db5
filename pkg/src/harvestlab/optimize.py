"""Optimal gap differences and parameter sweeps."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from ._parallel import parallel_map
from .measures import concurrence, mutual_information
from .model import Alignment, DetectorPair, Geometry, evaluate

__all__ = [
    "Quantity",
    "SweepVariable",
    "Spacing",
    "FlatObjectiveWarning",
    "PointParams",
    "OptimizeResult",
    "CurveRow",
    "SweepSpec",
    "quantity_value",
    "optimal_gap",
    "optimal_gap_curve",
    "sweep",
]

SCAN_POINTS = 64
SCAN_FLOOR = 1e-3
DEFAULT_BOUND = 20.0
GOLDEN_REL_WIDTH = 1e-6
# absolute width floor for brackets collapsing onto delta_omega = 0
GOLDEN_ABS_WIDTH = 1e-12
FLAT_THRESHOLD = 1e-14
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class Quantity(str, enum.Enum):
    CONCURRENCE = "concurrence"
    MUTUAL_INFO = "mutual_info"
    P_A = "p_a"
    P_B = "p_b"
    ABS_C = "abs_c"
    ABS_X = "abs_x"


class SweepVariable(str, enum.Enum):
    L = "L"
    DZ = "dz"
    DELTA_OMEGA = "delta_omega"
    OMEGA_A = "omega_a"


class Spacing(str, enum.Enum):
    LINEAR = "linear"
    LOG = "log"


class FlatObjectiveWarning(UserWarning):
    """The objective barely varies over the scan (e.g. no harvesting at all)."""


@dataclass(frozen=True)
class PointParams:
    """One parameter point in units of sigma (sigma = 1)."""

    alignment: Alignment
    omega_a: float
    delta_omega: float
    L: float
    dz: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "alignment", Alignment(self.alignment))

    @property
    def pair(self) -> DetectorPair:
        return DetectorPair(self.omega_a, self.omega_a + self.delta_omega)

    @property
    def geometry(self) -> Geometry:
        return Geometry(self.alignment, self.L, self.dz)

    def with_value(self, variable: SweepVariable, value: float) -> "PointParams":
        return replace(self, **{SweepVariable(variable).value: value})


def quantity_value(params: PointParams, quantity: Quantity | str, coupling: float = 1.0) -> float:
    """Evaluate one harvested quantity at ``params`` (including ``coupling**2``)."""
    quantity = Quantity(quantity)
    state = evaluate(params.pair, params.geometry)
    if quantity is Quantity.CONCURRENCE:
        v = concurrence(state)
    elif quantity is Quantity.MUTUAL_INFO:
        v = mutual_information(state)
    elif quantity is Quantity.P_A:
        v = state.p_a
    elif quantity is Quantity.P_B:
        v = state.p_b
    elif quantity is Quantity.ABS_C:
        v = abs(state.c)
    else:
        v = abs(state.x)
    return coupling * coupling * v


# ---------------------------------------------------------------------------
# optimal gap


@dataclass(frozen=True)
class OptimizeResult:
    delta_omega_star: float
    value_at_star: float
    at_lower_bound: bool
    bracket: tuple[float, float]
    flat: bool = False


def _scan_grid(bound: float) -> np.ndarray:
    if bound <= SCAN_FLOOR:
        return np.linspace(0.0, bound, SCAN_POINTS)
    return np.concatenate([[0.0], np.geomspace(SCAN_FLOOR, bound, SCAN_POINTS - 1)])


def _golden_max(f, lo: float, hi: float, f_cache: dict):
    def fx(x):
        if x not in f_cache:
            f_cache[x] = f(x)
        return f_cache[x]

    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fx(c), fx(d)
    for _ in range(200):
        if b - a <= max(GOLDEN_REL_WIDTH * max(abs(a), abs(b)), GOLDEN_ABS_WIDTH):
            break
        if fc >= fd:
            # ties keep the lower half: smallest maximiser wins
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fx(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fx(d)
    return (c, fc) if fc >= fd else (d, fd), (a, b)


def optimal_gap(omega_a: float, geom: Geometry, quantity: Quantity | str,
                bound: float = DEFAULT_BOUND, coupling: float = 1.0) -> OptimizeResult:
    """Maximise ``quantity`` over ``delta_omega`` in ``[0, bound]``.

    A 64-point scan (``delta_omega = 0`` and log-spaced points from 1e-3 to
    ``bound``) locates the best sample; golden-section search then refines the
    bracket formed by its two neighbours.  The optimum is reported at exactly
    0 when no refined point beats ``delta_omega = 0``.
    """
    quantity = Quantity(quantity)
    if quantity not in (Quantity.CONCURRENCE, Quantity.MUTUAL_INFO):
        raise ValueError(f"optimal_gap maximises concurrence or mutual_info, not {quantity.value}")
    if not (bound > 0 and math.isfinite(bound)):
        raise ValueError(f"bound must be finite and > 0, got {bound}")
    base = PointParams(geom.alignment, omega_a, 0.0, geom.separation, geom.dz)

    def f(dw: float) -> float:
        return quantity_value(base.with_value(SweepVariable.DELTA_OMEGA, dw), quantity, coupling)

    grid = _scan_grid(bound)
    values = [f(float(x)) for x in grid]
    cache = dict(zip((float(x) for x in grid), values))
    best = int(np.argmax(values))  # first index of the maximum: ties go to the smallest gap
    flat = max(values) - min(values) < FLAT_THRESHOLD
    if flat:
        warnings.warn(
            f"{quantity.value} varies by less than {FLAT_THRESHOLD:g} over [0, {bound}]",
            FlatObjectiveWarning,
            stacklevel=2,
        )
        return OptimizeResult(0.0, values[0], True, (0.0, float(grid[1])), True)
    lo = float(grid[max(best - 1, 0)])
    hi = float(grid[min(best + 1, len(grid) - 1)])
    (x_star, f_star), bracket = _golden_max(f, lo, hi, cache)
    scan_x, scan_f = float(grid[best]), values[best]
    if scan_f >= f_star:
        x_star, f_star = scan_x, scan_f
    if x_star != 0.0 and values[0] >= f_star:
        x_star, f_star = 0.0, values[0]
    if x_star == 0.0:
        bracket = (0.0, bracket[1])
    return OptimizeResult(x_star, f_star, x_star == 0.0, bracket)


@dataclass(frozen=True)
class CurveRow:
    dz: float
    result: OptimizeResult | None
    error: str = ""


def _curve_row(dz: float, omega_a: float, L: float, alignment: Alignment,
               quantity: Quantity, bound: float) -> CurveRow:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FlatObjectiveWarning)
            res = optimal_gap(omega_a, Geometry(alignment, L, dz), quantity, bound)
        return CurveRow(dz, res)
    except (ValueError, ArithmeticError) as exc:
        return CurveRow(dz, None, f"{type(exc).__name__}: {exc}")


def optimal_gap_curve(omega_a: float, L: float, dz_grid, alignment: Alignment | str,
                      quantity: Quantity | str, bound: float = DEFAULT_BOUND,
                      workers: int | None = None) -> list[CurveRow]:
    """One :class:`OptimizeResult` per ``dz``; failures are recorded per row."""
    dz_grid = [float(z) for z in dz_grid]
    if any(b < a for a, b in zip(dz_grid, dz_grid[1:])):
        raise ValueError("dz_grid must be sorted ascending")
    job = partial(_curve_row, omega_a=omega_a, L=L, alignment=Alignment(alignment),
                  quantity=Quantity(quantity), bound=bound)
    return parallel_map(job, dz_grid, workers)


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    variable: SweepVariable
    lo: float
    hi: float
    n_points: int
    fixed: PointParams
    spacing: Spacing = Spacing.LINEAR
    quantities: tuple[Quantity, ...] = (Quantity.CONCURRENCE, Quantity.MUTUAL_INFO)
    coupling: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "variable", SweepVariable(self.variable))
        object.__setattr__(self, "spacing", Spacing(self.spacing))
        object.__setattr__(self, "quantities", tuple(Quantity(q) for q in self.quantities))
        if not self.lo < self.hi:
            raise ValueError(f"sweep needs lo < hi, got {self.lo}, {self.hi}")
        if self.n_points < 2:
            raise ValueError(f"sweep needs n_points >= 2, got {self.n_points}")
        if self.spacing is Spacing.LOG and self.lo <= 0:
            raise ValueError("log spacing needs lo > 0")
        if not self.quantities:
            raise ValueError("sweep needs at least one quantity")

    def abscissae(self) -> np.ndarray:
        if self.spacing is Spacing.LOG:
            return np.geomspace(self.lo, self.hi, self.n_points)
        return np.linspace(self.lo, self.hi, self.n_points)


def _sweep_row(x: float, spec: SweepSpec) -> dict:
    row = {spec.variable.value: x}
    try:
        params = spec.fixed.with_value(spec.variable, x)
        state = evaluate(params.pair, params.geometry)
        k = spec.coupling**2
        full = {
            Quantity.CONCURRENCE: concurrence(state),
            Quantity.MUTUAL_INFO: mutual_information(state),
            Quantity.P_A: state.p_a,
            Quantity.P_B: state.p_b,
            Quantity.ABS_C: abs(state.c),
            Quantity.ABS_X: abs(state.x),
        }
        for q in spec.quantities:
            row[q.value] = k * full[q]
        row["error"] = ""
    except (ValueError, ArithmeticError) as exc:
        for q in spec.quantities:
            row[q.value] = math.nan
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(spec: SweepSpec, workers: int | None = None) -> list[dict]:
    """Evaluate ``spec.quantities`` along the sweep; one dict per point, in order.

    Rows that fail carry NaN values and a message in their ``error`` column.
    """
    xs = [float(x) for x in spec.abscissae()]
    return parallel_map(partial(_sweep_row, spec=spec), xs, workers)
