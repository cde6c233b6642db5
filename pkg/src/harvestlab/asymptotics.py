"""Leading-order limits of the harvested quantities for identical detectors.

All functions take ``omega = Omega sigma``, ``L/sigma`` and ``dz/sigma`` and
return values per squared coupling.  A :class:`Regime` names the corner of
parameter space a formula belongs to:

=========  ===============  ===================
axis       class            condition
=========  ===============  ===================
gap        SMALL / LARGE    omega << 1 / omega >> 1
zone       NEAR / FAR       dz << 1 / dz >> 1
sep        SMALL / LARGE    L << 1 / L >> 1
=========  ===============  ===================

plus the ordering ``dz << L`` for (near, small L) and ``L << dz`` for (far,
large L).  "a << b" is read as ``a <= b / 10``; for the large-gap class
``omega >= 2`` already puts ``exp(-omega^2)`` below 2%.  A violation by at most
a factor of two emits :class:`RegimeWarning`, anything beyond raises
:class:`RegimeMismatchError` (pass ``check=False`` to skip the test).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from .model import Alignment

__all__ = [
    "GapClass",
    "Zone",
    "SepClass",
    "Regime",
    "RegimeWarning",
    "RegimeMismatchError",
    "classify",
    "regime_violation",
    "approx_probability_near",
    "approx_abs_x_near",
    "approx_correlation_c_near",
    "approx_concurrence",
    "approx_mutual_info",
]

SQRT_PI = math.sqrt(math.pi)
LN2 = math.log(2.0)

# "a << b" means a <= b / MUCH
MUCH = 10.0
LARGE_GAP = 2.0
# tolerated violation factor before a mismatch becomes an error
WARN_FACTOR = 2.0


class GapClass(str, enum.Enum):
    SMALL = "small_gap"
    LARGE = "large_gap"


class Zone(str, enum.Enum):
    NEAR = "near"
    FAR = "far"


class SepClass(str, enum.Enum):
    SMALL = "small_l"
    LARGE = "large_l"


class RegimeWarning(UserWarning):
    """Parameters sit slightly outside the declared asymptotic corner."""


class RegimeMismatchError(ValueError):
    """Parameters are far outside the declared asymptotic corner."""


@dataclass(frozen=True)
class Regime:
    gap_class: GapClass
    zone: Zone
    sep_class: SepClass

    def __post_init__(self):
        object.__setattr__(self, "gap_class", GapClass(self.gap_class))
        object.__setattr__(self, "zone", Zone(self.zone))
        object.__setattr__(self, "sep_class", SepClass(self.sep_class))

    def __str__(self) -> str:
        return f"{self.gap_class.value}/{self.zone.value}/{self.sep_class.value}"


def classify(omega: float, L: float, dz: float) -> Regime:
    """Nearest regime by simple thresholds at one (two for the gap)."""
    gap = GapClass.LARGE if omega >= 1.0 else GapClass.SMALL
    zone = Zone.FAR if dz >= 1.0 else Zone.NEAR
    sep = SepClass.LARGE if L >= 1.0 else SepClass.SMALL
    return Regime(gap, zone, sep)


def _much_less(a: float, b: float) -> float:
    # violation factor of a << b, <= 1 when satisfied
    if a <= 0.0:
        return 0.0
    if b <= 0.0 or math.isinf(a):
        return math.inf
    return a * MUCH / b


def regime_violation(regime: Regime, omega: float, L: float, dz: float) -> float:
    """Largest factor by which the regime's orderings are violated (<= 1: inside)."""
    factors = []
    if regime.gap_class is GapClass.SMALL:
        factors.append(_much_less(omega, 1.0))
    else:
        factors.append(LARGE_GAP / omega if omega > 0 else math.inf)
    if regime.zone is Zone.NEAR:
        factors.append(_much_less(dz, 1.0))
    else:
        factors.append(_much_less(1.0, dz))
    if regime.sep_class is SepClass.SMALL:
        factors.append(_much_less(L, 1.0))
        if regime.zone is Zone.NEAR:
            factors.append(_much_less(dz, L))
    else:
        factors.append(_much_less(1.0, L))
        if regime.zone is Zone.FAR:
            factors.append(_much_less(L, dz))
    return max(factors)


def _check(regime: Regime, omega: float, L: float, dz: float, check: bool) -> None:
    if not check:
        return
    factor = regime_violation(regime, omega, L, dz)
    if factor > WARN_FACTOR:
        raise RegimeMismatchError(
            f"omega={omega}, L={L}, dz={dz} violate regime {regime} by a factor {factor:.3g}"
        )
    if factor > 1.0:
        warnings.warn(
            f"omega={omega}, L={L}, dz={dz} sit outside regime {regime} by a factor {factor:.3g}",
            RegimeWarning,
            stacklevel=3,
        )


def _validate(omega: float, L: float, dz: float) -> None:
    if not (omega >= 0 and L > 0 and dz >= 0):
        raise ValueError(f"need omega >= 0, L > 0, dz >= 0; got {omega}, {L}, {dz}")


def _unsupported(kind: str, alignment: Alignment, regime: Regime):
    return RegimeMismatchError(f"no {kind} limit for {alignment.value} alignment in regime {regime}")


# ---------------------------------------------------------------------------
# local quantities


def approx_probability_near(gap: float, dz: float) -> float:
    """Excitation probability close to the mirror (dz << 1)."""
    return dz * dz / (2.0 * math.pi) * (1.0 / 3.0 - SQRT_PI * gap / 2.0)


def approx_abs_x_near(omega: float, L: float, dz: float, sep_class: SepClass | str | None = None) -> float:
    """``|x|`` for a parallel pair close to the mirror, small gap."""
    sep = SepClass(sep_class) if sep_class is not None else (SepClass.SMALL if L < 1.0 else SepClass.LARGE)
    if sep is SepClass.SMALL:
        return dz * dz * (1.0 - omega * omega) / (2.0 * L**3 * SQRT_PI)
    return 2.0 * dz * dz * (1.0 - omega * omega) / (math.pi * L**4)


def approx_correlation_c_near(omega: float, L: float, dz: float,
                              sep_class: SepClass | str | None = None, check: bool = True) -> float:
    """Local correlation ``c`` for a parallel pair close to the mirror, small gap."""
    _validate(omega, L, dz)
    sep = SepClass(sep_class) if sep_class is not None else (SepClass.SMALL if L < 1.0 else SepClass.LARGE)
    _check(Regime(GapClass.SMALL, Zone.NEAR, sep), omega, L, dz, check)
    if sep is SepClass.SMALL:
        return dz * dz / (2.0 * math.pi) * (1.0 / 3.0 - L * L / 15.0 - SQRT_PI * omega / 2.0)
    return dz * dz / math.pi * (2.0 / L**4 - SQRT_PI * omega / 4.0 * math.exp(-L * L / 4.0))


# ---------------------------------------------------------------------------
# concurrence


def _far_concurrence(omega: float, L: float, dz: float) -> float:
    # same form for both alignments
    return (1.0 / L - 1.0 / SQRT_PI + 1.0 / (2.0 * SQRT_PI * dz * dz) + omega) / (2.0 * SQRT_PI)


def approx_concurrence(regime: Regime, alignment: Alignment | str, omega: float, L: float,
                       dz: float, check: bool = True) -> float:
    """Leading-order concurrence of identical detectors in ``regime``."""
    alignment = Alignment(alignment)
    _validate(omega, L, dz)
    _check(regime, omega, L, dz, check)
    small_gap = regime.gap_class is GapClass.SMALL
    near = regime.zone is Zone.NEAR
    small_l = regime.sep_class is SepClass.SMALL
    if alignment is Alignment.PARALLEL:
        if small_gap and near and small_l:
            return dz * dz / SQRT_PI * (1.0 / L**3 + 1.0 / (4.0 * L) - 1.0 / (3.0 * SQRT_PI) + omega / 2.0)
        if small_gap and not small_l:
            return 0.0
        if small_gap:
            return _far_concurrence(omega, L, dz)
        if near and small_l:
            return math.exp(-omega * omega) * dz * dz / (L**3 * SQRT_PI)
    elif alignment is Alignment.VERTICAL:
        if small_gap and near and small_l:
            return dz / SQRT_PI * (1.0 / L**2 + 0.25 - L / (3.0 * SQRT_PI) + L * omega / 2.0)
        if small_gap and not small_l:
            return 0.0
        if small_gap:
            return _far_concurrence(omega, L, dz)
        if near and small_l:
            return math.exp(-omega * omega) * dz / (L * L * SQRT_PI)
    raise _unsupported("concurrence", alignment, regime)


# ---------------------------------------------------------------------------
# mutual information


def _far_mutual_info(omega: float, L: float, dz: float, small_l: bool) -> float:
    # same form for both alignments
    if small_l:
        return (LN2 + L * L / 6.0 * math.log(L) - LN2 / (2.0 * dz * dz) - SQRT_PI * omega * LN2) / (
            2.0 * math.pi
        )
    return (1.0 / L**2 - 1.0 / (2.0 * dz * dz) + SQRT_PI * omega / L**2) / (math.pi * L * L)


def approx_mutual_info(regime: Regime, alignment: Alignment | str, omega: float, L: float,
                       dz: float, check: bool = True) -> float:
    """Leading-order mutual information of identical detectors in ``regime``."""
    alignment = Alignment(alignment)
    _validate(omega, L, dz)
    _check(regime, omega, L, dz, check)
    small_gap = regime.gap_class is GapClass.SMALL
    near = regime.zone is Zone.NEAR
    small_l = regime.sep_class is SepClass.SMALL
    if small_gap and not near:
        if alignment in (Alignment.PARALLEL, Alignment.VERTICAL):
            return _far_mutual_info(omega, L, dz, small_l)
    elif alignment is Alignment.PARALLEL:
        if small_gap and small_l:
            dz2 = dz * dz
            return (LN2 / 3.0 * dz2 / math.pi + L * L * dz2 * math.log(L) / (15.0 * math.pi)
                    - LN2 / 2.0 * omega * dz2 / SQRT_PI)
        if small_gap:
            return 12.0 * dz * dz * (2.0 + 3.0 * SQRT_PI * omega) / (math.pi * L**8)
        if small_l:
            return (math.exp(-omega * omega) * dz * dz / (8.0 * math.pi * omega**6)
                    * (2.0 * omega * omega * LN2 - L * L * math.log(omega)))
    elif alignment is Alignment.VERTICAL:
        if small_gap and small_l:
            return (2.0 - 3.0 * SQRT_PI * omega) * dz * dz / (6.0 * math.pi) * math.log(L / dz)
        if small_gap:
            return 32.0 * (1.0 + SQRT_PI * omega) * dz * dz * math.log(1.0 / dz) / (math.pi * L**6)
        if small_l:
            return math.exp(-omega * omega) * dz * dz * math.log(L / dz) / (4.0 * math.pi * omega**4)
    raise _unsupported("mutual information", alignment, regime)
