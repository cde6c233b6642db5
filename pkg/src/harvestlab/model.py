"""Closed-form leading-order state of two detectors near a reflecting plane.

Everything here is in units of the switching width (sigma = 1 internally) and
every returned quantity is divided by the squared coupling.  The state of the
pair is fixed by four numbers: the two excitation probabilities ``p_a``,
``p_b``, the local correlation ``c`` and the nonlocal correlation ``x``.

The boundary enters through the method of images: each correlation is a
difference between a direct term at distance ``L`` and an image term at the
distance to the mirrored partner (``sqrt(L^2 + 4 dz^2)`` for a pair parallel
to the plane, ``L + 2 dz`` for a pair along its normal).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .specfun import boundary_kernel, faddeeva

__all__ = [
    "Alignment",
    "ProbabilityMode",
    "DetectorPair",
    "Geometry",
    "TwoDetectorState",
    "PositivityError",
    "transition_probability",
    "aux_f",
    "aux_g",
    "aux_f_difference",
    "aux_g_difference",
    "image_distance",
    "image_offset",
    "correlation_c",
    "correlation_x",
    "evaluate",
]

SQRT_PI = math.sqrt(math.pi)
_TWO_I_OVER_SQRT_PI = 2j / SQRT_PI

# below this L the (1/L) prefactor of f and g is handled by Taylor expansion
SMALL_L = 1e-4
# below this distance P_D is summed from its Taylor remainder (no cancellation)
SMALL_DZ = 0.05
POSITIVITY_SLACK = 1e-12


class Alignment(str, enum.Enum):
    PARALLEL = "parallel"
    VERTICAL = "vertical"
    BOUNDARYLESS = "boundaryless"


class ProbabilityMode(str, enum.Enum):
    WITH_BOUNDARY = "with_boundary"
    BOUNDARYLESS = "boundaryless"


class PositivityError(ArithmeticError):
    """Raised when a computed state violates p_a * p_b >= |c|^2."""


@dataclass(frozen=True)
class DetectorPair:
    """Two detectors with gaps ``omega_a <= omega_b``.

    ``sigma`` sets the unit of time; gaps are in the same (arbitrary) units
    and are converted to ``omega * sigma`` before any evaluation.
    ``coupling`` only matters when a report is rescaled for display.
    """

    omega_a: float
    omega_b: float
    coupling: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("omega_a", "omega_b", "coupling", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.omega_a < 0:
            raise ValueError(f"omega_a must be >= 0, got {self.omega_a}")
        if self.omega_b < self.omega_a:
            raise ValueError(
                f"omega_b ({self.omega_b}) must not be below omega_a ({self.omega_a})"
            )
        if self.coupling <= 0:
            raise ValueError(f"coupling must be > 0, got {self.coupling}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @classmethod
    def from_ratios(cls, omega_a: float, delta_ratio: float, coupling: float = 1.0):
        """Build from ``omega_a * sigma`` and ``delta_omega / omega_a``."""
        return cls(omega_a, omega_a * (1.0 + delta_ratio), coupling)

    @property
    def delta_omega(self) -> float:
        return self.omega_b - self.omega_a

    @property
    def gaps(self) -> tuple[float, float]:
        """Dimensionless gaps ``(omega_a * sigma, omega_b * sigma)``."""
        return self.omega_a * self.sigma, self.omega_b * self.sigma


@dataclass(frozen=True)
class Geometry:
    alignment: Alignment
    separation: float
    dz: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "alignment", Alignment(self.alignment))
        if not math.isfinite(self.separation) or self.separation < 0:
            raise ValueError(f"separation must be finite and >= 0, got {self.separation}")
        if self.alignment is not Alignment.BOUNDARYLESS:
            if math.isnan(self.dz) or self.dz < 0:
                raise ValueError(f"dz must be >= 0, got {self.dz}")

    def scaled(self, sigma: float) -> "Geometry":
        if sigma == 1.0:
            return self
        return replace(self, separation=self.separation / sigma, dz=self.dz / sigma)


@dataclass(frozen=True)
class TwoDetectorState:
    """Leading-order density-matrix content, per squared coupling."""

    p_a: float
    p_b: float
    c: complex
    x: complex

    def scaled(self, coupling: float) -> "TwoDetectorState":
        """The same state with the coupling factor ``coupling**2`` restored."""
        k = coupling * coupling
        return TwoDetectorState(k * self.p_a, k * self.p_b, k * self.c, k * self.x)

    def density_matrix(self, coupling: float = 1.0) -> np.ndarray:
        """4x4 matrix in the basis |00>, |01>, |10>, |11> (A first)."""
        s = self.scaled(coupling)
        return np.array(
            [
                [1.0 - s.p_a - s.p_b, 0, 0, s.x],
                [0, s.p_b, s.c, 0],
                [0, np.conj(s.c), s.p_a, 0],
                [np.conj(s.x), 0, 0, 0],
            ],
            dtype=complex,
        )


# ---------------------------------------------------------------------------
# transition probability


def _flat_bracket(omega: float) -> float:
    """``exp(-w^2) - sqrt(pi) w erfc(w)`` without cancellation at large w."""
    if omega < 3.0:
        return math.exp(-omega * omega) - SQRT_PI * omega * math.erfc(omega)
    # erfcx(w) = 1 / (sqrt(pi) U), U = w + (1/2)/(w + 1/(w + (3/2)/(w + ...)))
    tail = omega
    for k in range(80, 1, -1):
        tail = omega + 0.5 * k / tail
    q = 0.5 / tail
    return math.exp(-omega * omega) * q / (omega + q)


@lru_cache(maxsize=64)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _kernel_third_derivative(a: float, b: float) -> float:
    """d^3/da^3 of boundary_kernel(a, b), from w''' = (12z - 8z^3) w + (4z^2 - 4) 2i/sqrt(pi)."""
    z = complex(-a, b)
    w = faddeeva(z)
    w3 = (12.0 * z - 8.0 * z**3) * w + (4.0 * z * z - 4.0) * _TWO_I_OVER_SQRT_PI
    return math.exp(-b * b) * w3.imag


def _boundary_probability_small(omega: float, dz: float) -> float:
    # P = -(K(a)/a - K'(0)) / (8 sqrt(pi)) and, K being odd in a,
    # K(a)/a - K'(0) = (1/2a) int_0^a (a - t)^2 K'''(t) dt
    nodes, weights = _legendre(10)
    t = 0.5 * dz * (nodes + 1.0)
    integrand = [(dz - ti) ** 2 * _kernel_third_derivative(ti, omega) for ti in t]
    integral = 0.5 * dz * float(np.dot(weights, integrand))
    return -(integral / (2.0 * dz)) / (8.0 * SQRT_PI)


def transition_probability(
    gap: float, dz: float = math.inf, mode: ProbabilityMode | str = ProbabilityMode.WITH_BOUNDARY
) -> float:
    """Excitation probability of one static detector, per squared coupling.

    Parameters
    ----------
    gap : float
        Energy gap in units of 1/sigma.
    dz : float
        Distance to the mirror in units of sigma; ``0`` gives the on-boundary
        limit (exactly zero) and ``inf`` the free-space value.
    mode : ProbabilityMode
        ``BOUNDARYLESS`` ignores ``dz`` and returns the free-space value.
    """
    mode = ProbabilityMode(mode)
    if not (gap >= 0 and math.isfinite(gap)):
        raise ValueError(f"gap must be finite and >= 0, got {gap}")
    flat = _flat_bracket(gap) / (4.0 * math.pi)
    if mode is ProbabilityMode.BOUNDARYLESS:
        return flat
    if math.isnan(dz) or dz < 0:
        raise ValueError(f"dz must be >= 0, got {dz}")
    if dz == 0.0:
        return 0.0
    if math.isinf(dz):
        return flat
    if dz < SMALL_DZ:
        return max(_boundary_probability_small(gap, dz), 0.0)
    image = boundary_kernel(dz, gap) / (8.0 * SQRT_PI * dz)
    return max(flat - image, 0.0)


# ---------------------------------------------------------------------------
# auxiliary functions


def _kernel_taylor(b: float) -> tuple[float, float, float]:
    """Coefficients k1, k3, k5 with boundary_kernel(a, b) = k1 a + k3 a^3 + k5 a^5 + ..."""
    z = complex(0.0, b)
    d = [faddeeva(z)]
    d.append(-2.0 * z * d[0] + _TWO_I_OVER_SQRT_PI)
    for n in range(1, 5):
        d.append(-2.0 * z * d[n] - 2.0 * n * d[n - 1])
    e = math.exp(-b * b)
    return e * d[1].imag, e * d[3].imag / 6.0, e * d[5].imag / 120.0


def _kernel_over_length(length: float, b: float) -> float:
    """boundary_kernel(length/2, b) / length."""
    if length < SMALL_L:
        k1, k3, k5 = _kernel_taylor(b)
        return 0.5 * k1 + k3 * length**2 / 8.0 + k5 * length**4 / 32.0
    return boundary_kernel(0.5 * length, b) / length


def aux_f(L: float, omega_a: float, delta_omega: float) -> float:
    """Direct/image profile of the local correlation ``c`` at distance ``L``."""
    if not L > 0:
        raise ValueError(f"aux_f requires L > 0, got {L}")
    if math.isinf(L):
        return 0.0
    return _kernel_over_length(L, omega_a + 0.5 * delta_omega)


def aux_g(L: float, delta_omega: float) -> complex:
    """Direct/image profile of the nonlocal correlation ``x`` at distance ``L``."""
    if not L > 0:
        raise ValueError(f"aux_g requires L > 0, got {L}")
    if math.isinf(L):
        return 0j
    b = 0.5 * delta_omega
    gauss = math.exp(-0.25 * L * L)
    # sin(L b) / L written through sinc to stay exact as L -> 0
    lb = L * b
    sin_over_l = b * (math.sin(lb) / lb if lb != 0.0 else 1.0)
    re = _kernel_over_length(L, b) + gauss * sin_over_l
    im = gauss * math.cos(lb) / L
    return complex(re, im)


# f(L) - f(d) and g(L) - g(d) lose about log10(L / (d - L)) digits when the
# image distance is close to L (dz << L in parallel alignment), and up to
# log10(1 / d^2) digits when both points sit near the origin where f and the
# real part of g are flat; there the difference is integrated from the
# derivative instead.
_CLOSE_IMAGE = 0.5
_FLAT_CORE = 1.0


def _kernel_second_derivative(a: float, b: float) -> float:
    """d^2/da^2 of boundary_kernel(a, b)."""
    z = complex(-a, b)
    w = faddeeva(z)
    w1 = -2.0 * z * w + _TWO_I_OVER_SQRT_PI
    w2 = -2.0 * w - 2.0 * z * w1
    return -math.exp(-b * b) * w2.imag


def _kernel_over_length_slope(t: float, b: float) -> float:
    """d/dt of boundary_kernel(t/2, b) / t."""
    a = 0.5 * t
    if a > 0.25:
        z = complex(-a, b)
        w = faddeeva(z)
        e = math.exp(-b * b)
        k = -e * w.imag
        k1 = e * (-2.0 * z * w + _TWO_I_OVER_SQRT_PI).imag
        return (a * k1 - k) / (4.0 * a * a)
    # a K' - K = int_0^a s K''(s) ds, free of the leading-order cancellation
    nodes, weights = _legendre(16)
    s = 0.5 * a * (nodes + 1.0)
    vals = [si * _kernel_second_derivative(si, b) for si in s]
    return 0.5 * a * float(np.dot(weights, vals)) / (4.0 * a * a)


def _sin_profile_slope(t: float, b: float) -> float:
    """d/dt of exp(-t^2/4) sin(b t) / t."""
    x = b * t
    if abs(x) < 0.1:
        # (x cos x - sin x) / x^2 = sum_n (-1)^n 2n x^(2n-1) / (2n+1)!
        ratio = -x / 3.0 + x**3 / 30.0 - x**5 / 840.0 + x**7 / 45360.0
    else:
        ratio = (x * math.cos(x) - math.sin(x)) / (x * x)
    return math.exp(-0.25 * t * t) * (b * b * ratio - 0.5 * math.sin(x))


def _cos_profile_slope(t: float, b: float) -> float:
    """d/dt of exp(-t^2/4) cos(b t) / t."""
    x = b * t
    return -math.exp(-0.25 * t * t) * (
        math.cos(x) / (t * t) + b * math.sin(x) / t + 0.5 * math.cos(x)
    )


def _profile_difference(value, slope, L: float, d: float, flat_core: bool = True,
                        gap: float | None = None) -> float:
    """value(L) - value(d) for d > L, via -int_L^d slope where they nearly cancel.

    ``flat_core`` marks profiles that are smooth and even about t = 0 (so the
    integral route is also safe and needed for small ``d``).  ``gap`` is
    ``d - L`` when the caller knows it more accurately than the subtraction.
    """
    if math.isinf(d):
        return value(L)
    if gap is None:
        gap = d - L
    if gap > _CLOSE_IMAGE * L and not (flat_core and d <= _FLAT_CORE):
        return value(L) - value(d)
    nodes, weights = _legendre(12)
    t = L + 0.5 * gap * (nodes + 1.0)
    return -0.5 * gap * float(np.dot(weights, [slope(ti) for ti in t]))


def _check_difference_args(L: float, d: float, gap: float | None) -> None:
    if not (L > 0 and d >= L):
        raise ValueError(f"need 0 < L <= d, got L={L}, d={d}")
    if gap is not None and not gap >= 0:
        raise ValueError(f"gap must be >= 0, got {gap}")


def aux_f_difference(L: float, d: float, omega_a: float, delta_omega: float,
                     gap: float | None = None) -> float:
    """``aux_f(L) - aux_f(d)`` for ``d >= L``, accurate when ``d`` is close to ``L``.

    Pass ``gap = d - L`` if it is known to better than the rounding of ``d``.
    """
    _check_difference_args(L, d, gap)
    b = omega_a + 0.5 * delta_omega
    return _profile_difference(
        lambda t: aux_f(t, omega_a, delta_omega),
        lambda t: _kernel_over_length_slope(t, b),
        L, d, gap=gap,
    )


def aux_g_difference(L: float, d: float, delta_omega: float, gap: float | None = None) -> complex:
    """``aux_g(L) - aux_g(d)`` for ``d >= L``, accurate when ``d`` is close to ``L``."""
    _check_difference_args(L, d, gap)
    b = 0.5 * delta_omega
    re = _profile_difference(
        lambda t: aux_g(t, delta_omega).real,
        lambda t: _kernel_over_length_slope(t, b) + _sin_profile_slope(t, b),
        L, d, gap=gap,
    )
    im = _profile_difference(
        lambda t: aux_g(t, delta_omega).imag,
        lambda t: _cos_profile_slope(t, b),
        L, d, flat_core=False, gap=gap,
    )
    return complex(re, im)


def image_distance(geom: Geometry) -> float:
    """Distance from detector A to the mirror image of detector B."""
    if geom.alignment is Alignment.PARALLEL:
        return math.hypot(geom.separation, 2.0 * geom.dz)
    if geom.alignment is Alignment.VERTICAL:
        return geom.separation + 2.0 * geom.dz
    return math.inf


def image_offset(geom: Geometry) -> float:
    """``image_distance(geom) - separation`` without cancellation.

    For dz << L the parallel offset 2 dz^2 / L drops below the spacing of
    doubles near L, so it cannot be recovered from the rounded distance.
    """
    if geom.alignment is Alignment.PARALLEL:
        h = 2.0 * geom.dz
        return h * h / (math.hypot(geom.separation, h) + geom.separation)
    if geom.alignment is Alignment.VERTICAL:
        return 2.0 * geom.dz
    return math.inf


def _check_pair_geometry(geom: Geometry) -> None:
    if not geom.separation > 0:
        raise ValueError("coincident detectors: separation must be > 0")


def _on_boundary(geom: Geometry) -> bool:
    return geom.alignment is not Alignment.BOUNDARYLESS and geom.dz == 0.0


def correlation_c(pair: DetectorPair, geom: Geometry) -> complex:
    """Local correlation ``c`` per squared coupling (real for static detectors)."""
    geom = geom.scaled(pair.sigma)
    _check_pair_geometry(geom)
    if _on_boundary(geom):
        return 0j
    omega_a, omega_b = pair.gaps
    delta = omega_b - omega_a
    value = aux_f_difference(geom.separation, image_distance(geom), omega_a, delta, image_offset(geom))
    return complex(math.exp(-0.25 * delta * delta) * value / (4.0 * SQRT_PI), 0.0)


def correlation_x(pair: DetectorPair, geom: Geometry) -> complex:
    """Nonlocal correlation ``x`` per squared coupling."""
    geom = geom.scaled(pair.sigma)
    _check_pair_geometry(geom)
    if _on_boundary(geom):
        return 0j
    omega_a, omega_b = pair.gaps
    delta = omega_b - omega_a
    total = omega_a + omega_b
    value = aux_g_difference(geom.separation, image_distance(geom), delta, image_offset(geom))
    return -math.exp(-0.25 * total * total) * value / (4.0 * SQRT_PI)


def _probabilities(pair: DetectorPair, geom: Geometry) -> tuple[float, float]:
    omega_a, omega_b = pair.gaps
    if geom.alignment is Alignment.BOUNDARYLESS:
        mode = ProbabilityMode.BOUNDARYLESS
        return (
            transition_probability(omega_a, mode=mode),
            transition_probability(omega_b, mode=mode),
        )
    dz_b = geom.dz + geom.separation if geom.alignment is Alignment.VERTICAL else geom.dz
    return transition_probability(omega_a, geom.dz), transition_probability(omega_b, dz_b)


def evaluate(pair: DetectorPair, geom: Geometry) -> TwoDetectorState:
    """Assemble the full two-detector state."""
    scaled = geom.scaled(pair.sigma)
    _check_pair_geometry(scaled)
    p_a, p_b = _probabilities(pair, scaled)
    c = correlation_c(pair, geom)
    x = correlation_x(pair, geom)
    if p_a * p_b - abs(c) ** 2 < -POSITIVITY_SLACK:
        raise PositivityError(
            f"p_a*p_b={p_a * p_b:.3e} < |c|^2={abs(c) ** 2:.3e} for {pair}, {geom}"
        )
    return TwoDetectorState(p_a, p_b, c, x)
