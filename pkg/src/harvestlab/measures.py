"""Concurrence and mutual information of the leading-order two-detector state."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .model import TwoDetectorState

__all__ = [
    "CorrelationReport",
    "concurrence",
    "mutual_information",
    "eigenvalue_pair",
    "report",
    "rescale_report",
]

PERTURBATIVE_LIMIT = 0.1
# t = r/s below which the series form of the entropy difference is used
_SERIES_T = 1e-2
_SERIES_TERMS = 10


@dataclass(frozen=True)
class CorrelationReport:
    concurrence: float
    mutual_info: float
    l_plus: float
    l_minus: float
    perturbative_ok: bool


def concurrence(state: TwoDetectorState) -> float:
    """``2 max(0, |x| - sqrt(p_a p_b))``."""
    return 2.0 * max(0.0, abs(state.x) - math.sqrt(state.p_a * state.p_b))


def eigenvalue_pair(state: TwoDetectorState) -> tuple[float, float]:
    """Nonzero eigenvalues ``(L+, L-)`` of the single-excitation block."""
    p_a, p_b = state.p_a, state.p_b
    s = p_a + p_b
    r = math.hypot(p_a - p_b, 2.0 * abs(state.c))
    l_plus = 0.5 * (s + r)
    # (s^2 - r^2) = 4 (p_a p_b - |c|^2), free of the s - r cancellation
    l_minus = 0.0 if s + r == 0.0 else max(2.0 * (p_a * p_b - abs(state.c) ** 2) / (s + r), 0.0)
    return l_plus, min(l_minus, l_plus)


def _chi(u: float) -> float:
    # psi(t) = t^2 chi(t^2), chi(u) = sum_k u^(k-1) / (k (2k-1))
    total = 0.0
    for k in range(_SERIES_TERMS, 0, -1):
        total = total * u + 1.0 / (k * (2 * k - 1))
    return total


def _chi_divided_difference(u1: float, u2: float) -> float:
    # (chi(u1) - chi(u2)) / (u1 - u2) via complete homogeneous sums
    total = 0.0
    h = 1.0  # h_{j} = sum_{i=0}^{j} u1^i u2^(j-i)
    p1 = 1.0
    for k in range(2, _SERIES_TERMS + 1):
        total += h / (k * (2 * k - 1))
        p1 *= u1
        h = h * u2 + p1
    return total


def mutual_information(state: TwoDetectorState) -> float:
    """Mutual information of the state, ``sum L+- ln L+- - sum p ln p``.

    Written as ``m [psi(r/s) - psi(q/s)]`` with ``psi(t) = (1+t) ln(1+t) +
    (1-t) ln(1-t)``, ``s = p_a + p_b``, ``m = s/2``, ``q = |p_a - p_b|`` and
    ``r = sqrt(q^2 + 4|c|^2)``.  The difference is taken term by term from
    the exactly known ``r/s - q/s`` (or by series when both are small), so
    the four ``x ln x`` terms never cancel numerically.
    """
    p_a, p_b = state.p_a, state.p_b
    if state.c == 0.0 or p_a <= 0.0 or p_b <= 0.0:
        return 0.0
    s = p_a + p_b
    m = 0.5 * s
    # work in units of s so that |c|^2 is never formed at subnormal size
    a, b = p_a / s, p_b / s
    k2 = (abs(state.c) / s) ** 2
    tq = abs(a - b)
    tr = min(math.hypot(tq, 2.0 * math.sqrt(k2)), 1.0)
    if tr < _SERIES_T:
        u_r, u_q = tr * tr, tq * tq
        # psi(tr) - psi(tq) = (u_r - u_q) chi(u_r) + u_q (chi(u_r) - chi(u_q)),
        # with u_r - u_q = 4|c|^2 / s^2 exactly
        du = 4.0 * k2
        return m * du * (_chi(u_r) + u_q * _chi_divided_difference(u_r, u_q))
    gap = 4.0 * k2 / (tr + tq)  # tr - tq without cancellation
    one_minus_tq = 2.0 * min(a, b)
    one_minus_tr = 4.0 * (a * b - k2) / (1.0 + tr)
    upper = _xlogx_step(1.0 + tq, 1.0 + tr, gap)
    lower = _xlogx_step(one_minus_tq, max(one_minus_tr, 0.0), -gap)
    return max(m * (upper + lower), 0.0)


def _xlogx_step(x0: float, x1: float, dx: float) -> float:
    # x1 ln x1 - x0 ln x0 with dx = x1 - x0 known to full precision
    if abs(dx) > 0.5 * x0:
        # large relative step: nothing to cancel
        return (x1 * math.log(x1) if x1 > 0.0 else 0.0) - x0 * math.log(x0)
    return dx * math.log(x1) + x0 * math.log1p(dx / x0)


def report(state: TwoDetectorState) -> CorrelationReport:
    l_plus, l_minus = eigenvalue_pair(state)
    return CorrelationReport(
        concurrence=concurrence(state),
        mutual_info=mutual_information(state),
        l_plus=l_plus,
        l_minus=l_minus,
        perturbative_ok=state.p_a + state.p_b < PERTURBATIVE_LIMIT,
    )


def rescale_report(rep: CorrelationReport, coupling: float) -> CorrelationReport:
    """Restore the ``coupling**2`` factor dropped by the per-coupling convention.

    Both measures are exactly homogeneous of degree one in the state: the
    ``ln coupling^2`` pieces of the entropy terms cancel because
    ``L+ + L- = p_a + p_b``.  The perturbative flag is re-evaluated on the
    physical probabilities.
    """
    if not coupling > 0:
        raise ValueError(f"coupling must be > 0, got {coupling}")
    k = coupling * coupling
    return replace(
        rep,
        concurrence=k * rep.concurrence,
        mutual_info=k * rep.mutual_info,
        l_plus=k * rep.l_plus,
        l_minus=k * rep.l_minus,
        perturbative_ok=k * (rep.l_plus + rep.l_minus) < PERTURBATIVE_LIMIT,
    )
