"""Brute-force quadrature route to p_a, p_b, c and x.

After the elementary Gaussian integral over the mean time, every entry of the
state is a single integral over the time difference ``s`` of a Gaussian times
the vacuum two-point function, whose ``i epsilon`` prescription puts poles at
``s = +-D`` (``D`` = direct or image distance).  Here those integrals are
done numerically and independently of :mod:`harvestlab.specfun`:

* simple poles: symmetric pole subtraction for the principal value, plus the
  delta-function term of ``1/(x - i0) = P(1/x) + i pi delta(x)`` in closed
  form;
* the double pole of the direct term of ``p_D`` at ``s = 0``: the integral is
  evaluated at finite ``epsilon`` along a ladder and extrapolated to zero.

The quadrature routines use only :mod:`math` and :mod:`numpy`; the closed
forms are imported solely to be compared against in :func:`certify_point`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from ._parallel import parallel_map
from .model import (
    Alignment,
    DetectorPair,
    Geometry,
    correlation_c,
    correlation_x,
    image_distance,
    transition_probability,
)

__all__ = [
    "QuadratureSpec",
    "OracleValue",
    "WightmanSpec",
    "ConvergenceError",
    "ExtrapolationError",
    "DegenerateGeometryError",
    "integrate",
    "richardson_zero",
    "pv_half_line",
    "pv_correlation_c",
    "pv_correlation_x",
    "eps_transition_probability",
    "CertificationGrid",
    "CertificationRecord",
    "certify_point",
    "certify",
]

SQRT_PI = math.sqrt(math.pi)
# e^{-s^2/4} < 1e-174 beyond this many sigma past the last feature
_TAIL = 40.0
# quadrature runs in x87 extended precision where available (64-bit mantissa
# on x86-64; identical to float64 elsewhere); the closed forms it certifies can
# be ~1e-4 of the individual direct and image integrals
_REAL = np.longdouble
_PI = _REAL("3.14159265358979323846264338327950288")


class ConvergenceError(ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""


class ExtrapolationError(ArithmeticError):
    """Successive epsilon extrapolants fail to settle."""


class DegenerateGeometryError(ValueError):
    """Detectors on the mirror (dz = 0) or coincident (L = 0)."""


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-15
    rel_tol: float = 1e-12
    pv_window: float = 0.5
    eps_ladder: tuple[float, ...] = tuple(0.2 / 2**k for k in range(8))
    max_subdivisions: int = 2000
    # fail on unmet tolerance rather than reporting the achieved error
    strict: bool = True

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.pv_window > 0):
            raise ValueError("tolerances and pv_window must be > 0")
        ladder = tuple(float(e) for e in self.eps_ladder)
        object.__setattr__(self, "eps_ladder", ladder)
        if len(ladder) < 2 or any(e <= 0 for e in ladder):
            raise ValueError("eps_ladder needs at least two positive values")
        if any(b >= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("eps_ladder must be strictly decreasing")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class OracleValue:
    """Oracle estimate with its achieved absolute error bound."""

    value: complex
    error: float
    parts: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class WightmanSpec:
    """Pole locations of the two-point function between the detectors.

    The function is the direct term minus the image term; ``spatial_gap_image`` is
    ``inf`` without a boundary.
    """

    spatial_gap_direct: float
    spatial_gap_image: float

    @classmethod
    def for_geometry(cls, geom: Geometry) -> "WightmanSpec":
        return cls(geom.separation, image_distance(geom))

    def __post_init__(self):
        if not self.spatial_gap_direct > 0:
            raise DegenerateGeometryError("direct pole distance must be > 0")
        if not self.spatial_gap_image >= self.spatial_gap_direct:
            raise DegenerateGeometryError("image pole must not be nearer than the direct pole")


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod (7, 15)

_XGK = np.array([
    "0.991455371120812639206854697526329",
    "0.949107912342758524526189684047851",
    "0.864864423359769072789712788640926",
    "0.741531185599394439863864773280788",
    "0.586087235467691130294144845693013",
    "0.405845151377397166906606412076961",
    "0.207784955007898467600689403773245",
    "0.0",
], dtype=_REAL)
_WGK = np.array([
    "0.022935322010529224963732008058970",
    "0.063092092629978553290700663189204",
    "0.104790010322250183839876322541518",
    "0.140653259715525918745189590510238",
    "0.169004726639267902826583426598550",
    "0.190350578064785409913256402421014",
    "0.204432940075298892414161999234649",
    "0.209482141084727828012999174891714",
], dtype=_REAL)
_WG = np.array([
    "0.129484966168869693270611432679082",
    "0.279705391489276667901467771423780",
    "0.381830050505118944950369775488975",
    "0.417959183673469387755102040816327",
], dtype=_REAL)
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes, ascending
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15, dtype=_REAL)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[9, 11, 13]] = _WG[2::-1]
_GW[7] = _WG[3]


def _gk15(f, a: float, b: float):
    half = (b - a) / 2
    center = (a + b) / 2
    y = f(center + half * _NODES)
    k = half * np.dot(_KW, y)
    g = half * np.dot(_GW, y)
    return k, abs(k - g)


def integrate(f, breakpoints, abs_tol: float, rel_tol: float, max_subdivisions: int,
              strict: bool = True):
    """Globally adaptive Gauss-Kronrod quadrature.

    ``f`` maps a numpy array of abscissae to real or complex values.  The
    interval with the largest error estimate is bisected until the summed
    estimate meets ``max(abs_tol, rel_tol * |I|)``.

    Returns ``(integral, error_estimate)``.
    """
    pts = [_REAL(p) for p in breakpoints]
    heap = []
    total = _REAL(0)
    err = _REAL(0)
    for a, b in zip(pts, pts[1:]):
        if b <= a:
            continue
        val, e = _gk15(f, a, b)
        total += val
        err += e
        heapq.heappush(heap, (-e, a, b, val))
    n = len(heap)
    while err > max(abs_tol, rel_tol * abs(total)):
        if n >= max_subdivisions:
            if strict:
                raise ConvergenceError(
                    f"quadrature error {err:.3e} above tolerance after {n} subintervals"
                )
            break
        neg_e, a, b, val = heapq.heappop(heap)
        mid = (a + b) / 2
        v1, e1 = _gk15(f, a, mid)
        v2, e2 = _gk15(f, mid, b)
        total += v1 + v2 - val
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
        n += 1
    # re-sum to shed accumulated rounding from the running updates
    total = sum(item[3] for item in heap)
    err = sum(-item[0] for item in heap)
    return total, err


def richardson_zero(steps, values):
    """Polynomial (Neville) extrapolation of ``values(steps)`` to ``step = 0``.

    Returns the extrapolant using all points and the list of extrapolants
    built from the first 2, 3, ... points.
    """
    h = [_REAL(s) for s in steps]
    table = list(values)
    diag = [table[0]]
    n = len(h)
    for m in range(1, n):
        for i in range(n - m):
            # p_{i..i+m}(0) from p_{i..i+m-1}(0) and p_{i+1..i+m}(0)
            table[i] = (h[i] * table[i + 1] - h[i + m] * table[i]) / (h[i] - h[i + m])
        diag.append(table[0])
    return diag[-1], diag


# ---------------------------------------------------------------------------
# principal values


def pv_half_line(kappa: float, distance: float, quad: QuadratureSpec):
    """``P int_0^inf exp(-s^2/4) cos(kappa s) / (s^2 - D^2) ds``.

    The pole at ``s = D`` is removed over a symmetric window
    ``[D - w, D + w]``: there the integrand ``phi(s)/(s - D)`` is replaced by
    ``(phi(s) - phi(D))/(s - D)``; the subtracted pole term integrates to zero
    over a symmetric window.
    """
    d = _REAL(distance)
    w = min(_REAL(quad.pv_window), d)
    kappa = _REAL(kappa)

    def raw(s):
        return np.exp(-s * s / 4) * np.cos(kappa * s) / (s * s - d * d)

    phi_d = np.exp(-d * d / 4) * np.cos(kappa * d) / (2 * d)

    def subtracted(s):
        phi = np.exp(-s * s / 4) * np.cos(kappa * s) / (s + d)
        return (phi - phi_d) / (s - d)

    tol = dict(abs_tol=quad.abs_tol, rel_tol=quad.rel_tol,
               max_subdivisions=quad.max_subdivisions, strict=quad.strict)
    total = _REAL(0)
    err = _REAL(0)
    if d - w > 0:
        v, e = integrate(raw, [0, d - w], **tol)
        total += v
        err += e
    v, e = integrate(subtracted, [d - w, d, d + w], **tol)
    total += v
    err += e
    v, e = integrate(raw, [d + w, d + w + _TAIL], **tol)
    return total + v, err + e


def _c_single(beta: float, distance: float, quad: QuadratureSpec):
    """``int exp(-s^2/4 - i beta s) / ((s - i0)^2 - D^2) ds`` over the real line.

    The integrand's odd part drops out, leaving twice the half-line principal
    value plus the delta contributions at ``s = +-D``:
    ``(i pi / 2D) e^{-D^2/4} (e^{-i beta D} - e^{i beta D}) = (pi/D) e^{-D^2/4} sin(beta D)``.
    """
    pv, err = pv_half_line(beta, distance, quad)
    d = _REAL(distance)
    delta = _PI / d * np.exp(-d * d / 4) * np.sin(_REAL(beta) * d)
    return 2 * pv + delta, 2 * err


def _check_geometry(geom: Geometry) -> Geometry:
    if not geom.separation > 0:
        raise DegenerateGeometryError("coincident detectors: separation must be > 0")
    if geom.alignment is not Alignment.BOUNDARYLESS and geom.dz == 0.0:
        raise DegenerateGeometryError("dz = 0 places the detectors on the mirror")
    return geom


def _finite_image(poles: WightmanSpec) -> bool:
    return math.isfinite(poles.spatial_gap_image)


def pv_correlation_c(pair: DetectorPair, geom: Geometry,
                     quad: QuadratureSpec = QuadratureSpec()) -> OracleValue:
    """Local correlation ``c`` (per squared coupling) by quadrature."""
    geom = _check_geometry(geom.scaled(pair.sigma))
    poles = WightmanSpec.for_geometry(geom)
    omega_a, omega_b = (_REAL(g) for g in pair.gaps)
    beta = (omega_a + omega_b) / 2
    delta = omega_b - omega_a
    # sqrt(pi) e^{-delta^2/4} from the mean-time integral, W = -(1/4 pi^2)[...]
    pref = -np.sqrt(_PI) * np.exp(-delta * delta / 4) / (4 * _PI**2)
    direct, e1 = _c_single(beta, poles.spatial_gap_direct, quad)
    image, e2 = _REAL(0), _REAL(0)
    if _finite_image(poles):
        image, e2 = _c_single(beta, poles.spatial_gap_image, quad)
    value = float(pref * (direct - image))
    return OracleValue(complex(value), float(abs(pref) * (e1 + e2)),
                       {"direct": float(pref * direct), "image": float(-pref * image)})


def pv_correlation_x(pair: DetectorPair, geom: Geometry,
                     quad: QuadratureSpec = QuadratureSpec()) -> OracleValue:
    """Nonlocal correlation ``x`` (per squared coupling) by quadrature."""
    geom = _check_geometry(geom.scaled(pair.sigma))
    poles = WightmanSpec.for_geometry(geom)
    omega_a, omega_b = (_REAL(g) for g in pair.gaps)
    total = omega_a + omega_b
    kappa = (omega_b - omega_a) / 2
    # -sqrt(pi) e^{-total^2/4} * 2 (cosine from both orderings) * (-1/4 pi^2)
    pref = np.exp(-total * total / 4) / (2 * _PI * np.sqrt(_PI))
    pv_d, e1 = pv_half_line(kappa, poles.spatial_gap_direct, quad)
    delta_d = _PI / (2 * _REAL(poles.spatial_gap_direct)) * np.exp(-_REAL(poles.spatial_gap_direct) ** 2 / 4) * np.cos(kappa * _REAL(poles.spatial_gap_direct))
    pv_i, delta_i, e2 = _REAL(0), _REAL(0), _REAL(0)
    if _finite_image(poles):
        d = _REAL(poles.spatial_gap_image)
        pv_i, e2 = pv_half_line(kappa, poles.spatial_gap_image, quad)
        delta_i = _PI / (2 * d) * np.exp(-d * d / 4) * np.cos(kappa * d)
    # 1/(s + i0 - D) = P 1/(s - D) - i pi delta(s - D)
    value = complex(float(pref * (pv_d - pv_i)), -float(pref * (delta_d - delta_i)))
    return OracleValue(value, float(abs(pref) * (e1 + e2)),
                       {"direct": complex(float(pref * pv_d), -float(pref * delta_d)),
                        "image": complex(-float(pref * pv_i), float(pref * delta_i))})


# ---------------------------------------------------------------------------
# transition probability


def _direct_eps_integral(omega: float, eps: float, quad: QuadratureSpec):
    """``int exp(-s^2/4 - i omega s) / (s - i eps)^2 ds`` (real by symmetry).

    The even numerator is taken relative to its value at ``s = 0``: the
    subtracted piece ``(s^2 - eps^2)/(s^2 + eps^2)^2`` has antiderivative
    ``-s/(s^2 + eps^2)`` and integrates to zero on the half line, which removes
    the ``1/eps`` cancellation near the origin.
    """

    omega = _REAL(omega)
    eps = _REAL(eps)

    def integrand(s):
        s2 = s * s
        gauss = np.exp(-s2 / 4)
        even = np.expm1(-s2 / 4) * np.cos(omega * s) - 2 * np.sin(omega * s / 2) ** 2
        return 2 * (even * (s2 - eps * eps) + 2 * eps * s * gauss * np.sin(omega * s)) / (
            (s2 + eps * eps) ** 2
        )

    cuts = [_REAL(0)]
    edge = eps
    while edge < 2:
        cuts.append(edge)
        edge *= 4
    end = max(edge, _REAL(2)) + _TAIL
    cuts += [max(edge, _REAL(2)), end]
    value, err = integrate(integrand, cuts, abs_tol=quad.abs_tol, rel_tol=quad.rel_tol,
                           max_subdivisions=quad.max_subdivisions, strict=quad.strict)
    # beyond ``end`` only the subtracted -1 survives
    return value - 2 * end / (end * end + eps * eps), err


def _lebesgue_at_zero(steps) -> float:
    # sum of |Lagrange basis at 0|: worst-case amplification of input errors
    total = 0.0
    for i, hi in enumerate(steps):
        weight = 1.0
        for j, hj in enumerate(steps):
            if j != i:
                weight *= hj / (hj - hi)
        total += abs(weight)
    return total


def _direct_probability(omega: float, quad: QuadratureSpec):
    values = []
    qerr = 0.0
    for eps in quad.eps_ladder:
        v, e = _direct_eps_integral(omega, eps, quad)
        values.append(v)
        qerr = max(qerr, e)
    best, diag = richardson_zero(quad.eps_ladder, values)
    dropped, _ = richardson_zero(quad.eps_ladder[1:], values[1:])
    steps = [abs(b - a) for a, b in zip(diag, diag[1:])]
    spread = abs(best - dropped)
    if len(steps) >= 2 and steps[-1] > steps[0] and spread > quad.rel_tol * abs(best):
        raise ExtrapolationError(
            f"epsilon extrapolation diverges for omega={omega}: successive changes {steps}"
        )
    err = spread + qerr * _lebesgue_at_zero(quad.eps_ladder)
    return best, err


def eps_transition_probability(gap: float, dz: float,
                               quad: QuadratureSpec = QuadratureSpec()) -> OracleValue:
    """Excitation probability (per squared coupling) by quadrature.

    The image term is a simple-pole integral at ``s = 2 dz`` (principal value
    plus delta term); the direct term is extrapolated along ``quad.eps_ladder``.
    """
    if gap < 0:
        raise ValueError(f"gap must be >= 0, got {gap}")
    if not dz > 0:
        raise DegenerateGeometryError("dz must be > 0")
    direct, e1 = _direct_probability(gap, quad)
    image, e2 = _REAL(0), _REAL(0)
    if math.isfinite(dz):
        image, e2 = _c_single(gap, 2.0 * dz, quad)
    pref = np.sqrt(_PI) / (4 * _PI**2)
    return OracleValue(float(-pref * (direct - image)), float(pref * (e1 + e2)),
                       {"direct": float(-pref * direct), "image": float(pref * image)})


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class CertificationGrid:
    """Cartesian product of parameter values; every point uses both alignments."""

    omega_a: tuple[float, ...] = (0.0, 0.1, 0.5, 1.1, 2.0)
    delta_omega: tuple[float, ...] = (0.0, 0.08, 0.5, 1.0)
    separation: tuple[float, ...] = (0.1, 0.5, 1.5, 5.0)
    dz: tuple[float, ...] = (0.05, 0.5, 1.0, 3.0, 10.0)
    alignments: tuple[Alignment, ...] = (Alignment.PARALLEL, Alignment.VERTICAL)

    def points(self):
        for al in self.alignments:
            for oa in self.omega_a:
                for do in self.delta_omega:
                    for L in self.separation:
                        for dz in self.dz:
                            yield DetectorPair(oa, oa + do), Geometry(al, L, dz)

    def __len__(self) -> int:
        return (len(self.omega_a) * len(self.delta_omega) * len(self.separation)
                * len(self.dz) * len(self.alignments))


@dataclass(frozen=True)
class CertificationRecord:
    pair: DetectorPair
    geometry: Geometry
    # quantity -> (closed form, oracle, oracle error bound, relative difference)
    entries: dict

    @property
    def worst(self) -> float:
        return max(e[3] for e in self.entries.values())


def _relative(closed: complex, ref: complex) -> float:
    diff = abs(closed - ref)
    if diff == 0.0:
        return 0.0
    return diff / max(abs(closed), abs(ref))


def certify_point(pair: DetectorPair, geom: Geometry,
                  quad: QuadratureSpec = QuadratureSpec()) -> CertificationRecord:
    """Compare every closed-form entry of the state with its oracle value."""
    scaled = geom.scaled(pair.sigma)
    omega_a, omega_b = pair.gaps
    dz_b = scaled.dz + scaled.separation if scaled.alignment is Alignment.VERTICAL else scaled.dz
    entries = {}
    for name, gap, dz in (("p_a", omega_a, scaled.dz), ("p_b", omega_b, dz_b)):
        ref = eps_transition_probability(gap, dz, quad)
        closed = transition_probability(gap, dz)
        entries[name] = (closed, ref.value.real, ref.error, _relative(closed, ref.value.real))
    ref = pv_correlation_c(pair, geom, quad)
    closed = correlation_c(pair, geom)
    entries["c"] = (closed, ref.value, ref.error, _relative(closed, ref.value))
    ref = pv_correlation_x(pair, geom, quad)
    closed = correlation_x(pair, geom)
    entries["x"] = (closed, ref.value, ref.error, _relative(closed, ref.value))
    return CertificationRecord(pair, geom, entries)


def certify(grid: CertificationGrid = CertificationGrid(),
            quad: QuadratureSpec = QuadratureSpec(), workers: int | None = None) -> list[CertificationRecord]:
    """Run :func:`certify_point` over ``grid`` (order preserved)."""
    points = list(grid.points())
    if not points:
        raise ValueError("empty grid")
    return parallel_map(partial(_certify_pair, quad=quad), points, workers)


def _certify_pair(point, quad: QuadratureSpec) -> CertificationRecord:
    return certify_point(point[0], point[1], quad)
