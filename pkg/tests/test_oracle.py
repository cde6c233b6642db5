import math
from dataclasses import replace
from types import SimpleNamespace

import numpy as np
import pytest

from harvestlab.model import (
    Alignment,
    DetectorPair,
    Geometry,
    aux_g,
    correlation_c,
    correlation_x,
    transition_probability,
)
from harvestlab.oracle import (
    CertificationGrid,
    ConvergenceError,
    DegenerateGeometryError,
    QuadratureSpec,
    WightmanSpec,
    certify,
    certify_point,
    eps_transition_probability,
    integrate,
    pv_correlation_c,
    pv_correlation_x,
    pv_half_line,
    richardson_zero,
)

from conftest import rel_err

Q = QuadratureSpec()
PAR = Alignment.PARALLEL
VER = Alignment.VERTICAL


def test_gk_integrates_smooth_function():
    val, err = integrate(np.exp, [0.0, 1.0], 1e-15, 1e-14, 100)
    assert float(val) == pytest.approx(math.e - 1, rel=1e-15)
    assert err < 1e-14


def test_gk_budget_exhaustion():
    # an integrable spike the rule cannot resolve in a handful of panels
    def f(s):
        return 1.0 / np.sqrt(np.abs(s - 0.3) + 1e-12)

    with pytest.raises(ConvergenceError):
        integrate(f, [0.0, 1.0], 1e-15, 1e-14, 4)
    val, err = integrate(f, [0.0, 1.0], 1e-15, 1e-14, 4, strict=False)
    assert err > 0 and math.isfinite(float(val))


def test_richardson_recovers_polynomial():
    hs = [0.4, 0.2, 0.1, 0.05]
    vals = [3.0 - 2.0 * h + 5.0 * h**2 - h**3 for h in hs]
    est, diag = richardson_zero(hs, vals)
    assert float(est) == pytest.approx(3.0, abs=1e-14)
    assert len(diag) == len(hs)


@pytest.mark.parametrize("kw", [
    dict(abs_tol=0.0),
    dict(rel_tol=-1.0),
    dict(pv_window=0.0),
    dict(eps_ladder=(0.1,)),
    dict(eps_ladder=(0.1, 0.2)),
    dict(eps_ladder=(0.1, -0.05)),
    dict(max_subdivisions=0),
])
def test_quadrature_spec_validation(kw):
    with pytest.raises(ValueError):
        QuadratureSpec(**kw)


def test_wightman_spec_ordering():
    spec = WightmanSpec.for_geometry(Geometry(PAR, 1.0, 1.0))
    assert spec.spatial_gap_image == pytest.approx(math.sqrt(5.0))
    with pytest.raises(DegenerateGeometryError):
        WightmanSpec(2.0, 1.0)
    with pytest.raises(DegenerateGeometryError):
        WightmanSpec(0.0, 1.0)


def test_pv_half_line_against_mpmath(mp):
    kappa, d = 0.3, 1.7
    got, _ = pv_half_line(kappa, d, Q)

    def g(s):
        return mp.exp(-s * s / 4) * mp.cos(kappa * s)

    # PV via the odd/even split around the pole: (g(s) - g(d)) / (s^2 - d^2) is regular,
    # and PV int_0^inf ds / (s^2 - d^2) = 0
    ref = mp.quad(lambda s: (g(s) - g(d)) / (s * s - d * d), [0, d, 2 * d, mp.inf])
    assert rel_err(float(got), float(ref)) <= 1e-12


@pytest.mark.parametrize("fn", [pv_correlation_c, pv_correlation_x])
def test_degenerate_geometry(fn):
    pair = DetectorPair(0.1, 0.1)
    with pytest.raises(DegenerateGeometryError):
        fn(pair, Geometry(PAR, 0.5, 0.0), Q)
    with pytest.raises(DegenerateGeometryError):
        fn(pair, Geometry(PAR, 0.0, 1.0), Q)


def test_degenerate_probability():
    with pytest.raises(DegenerateGeometryError):
        eps_transition_probability(0.1, 0.0, Q)
    with pytest.raises(ValueError):
        eps_transition_probability(-0.1, 1.0, Q)


def test_correlation_c_matches_closed_form():
    pair, geom = DetectorPair(0.1, 0.1), Geometry(PAR, 0.5, 1.0)
    assert rel_err(pv_correlation_c(pair, geom, Q).value, correlation_c(pair, geom)) <= 1e-7


def test_correlation_c_large_detuning_suppressed():
    geom = Geometry(PAR, 0.5, 1.0)
    ref = abs(pv_correlation_c(DetectorPair(0.1, 0.1), geom, Q).value)
    big = abs(pv_correlation_c(DetectorPair(0.1, 8.1), geom, Q).value)
    assert big < 1e-8 * ref


def test_correlation_c_gap_swap():
    # the oracle only reads sigma and the gap tuple; feed it both orderings
    geom = Geometry(VER, 0.7, 0.8)
    ab = SimpleNamespace(sigma=1.0, gaps=(0.3, 1.1))
    ba = SimpleNamespace(sigma=1.0, gaps=(1.1, 0.3))
    c_ab = pv_correlation_c(ab, geom, Q).value
    c_ba = pv_correlation_c(ba, geom, Q).value
    assert abs(abs(c_ab) - abs(c_ba)) <= 1e-13 * abs(c_ab)


def test_correlation_x_matches_closed_form():
    pair, geom = DetectorPair(1.1, 1.1), Geometry(PAR, 1.0, 1.0)
    assert rel_err(pv_correlation_x(pair, geom, Q).value, correlation_x(pair, geom)) <= 1e-7


def test_correlation_x_gaussian_suppression():
    # 2 omega_a + delta = 12
    pair = DetectorPair(5.0, 7.0)
    assert abs(pv_correlation_x(pair, Geometry(PAR, 1.0, 1.0), Q).value) < 1e-12


def test_correlation_x_boundaryless():
    oa, do, L = 0.1, 0.08, 0.5
    pair = DetectorPair(oa, oa + do)
    got = pv_correlation_x(pair, Geometry(Alignment.BOUNDARYLESS, L), Q).value
    ref = -math.exp(-((2 * oa + do) ** 2) / 4) * aux_g(L, do) / (4 * math.sqrt(math.pi))
    assert rel_err(got, ref) <= 1e-7


def test_probability_matches_closed_form():
    got = eps_transition_probability(0.1, 1.0, Q)
    assert rel_err(got.value.real, transition_probability(0.1, 1.0)) <= 1e-6


def test_probability_far_from_mirror():
    got = eps_transition_probability(0.0, 50.0, Q).value.real
    assert abs(got - 1 / (4 * math.pi)) <= 1e-6


def test_probability_large_gap():
    got = eps_transition_probability(3.0, 1.0, Q).value.real
    assert 0 < got < 1e-4


@pytest.mark.parametrize("pair,geom", [
    (DetectorPair(0.1, 0.18), Geometry(PAR, 0.5, 1.0)),
    (DetectorPair(1.1, 1.1), Geometry(VER, 1.0, 1.0)),
    (DetectorPair(0.0, 1.0), Geometry(PAR, 5.0, 3.0)),
])
@pytest.mark.parametrize("fn", [pv_correlation_c, pv_correlation_x])
def test_pv_window_invariance(fn, pair, geom):
    full = fn(pair, geom, Q)
    half = fn(pair, geom, replace(Q, pv_window=Q.pv_window / 2))
    assert abs(full.value - half.value) <= full.error


@pytest.mark.parametrize("gap,dz", [(0.1, 1.0), (0.0, 0.05), (2.0, 3.0), (1.1, 0.5)])
def test_eps_ladder_invariance(gap, dz):
    full = eps_transition_probability(gap, dz, Q).value
    short = eps_transition_probability(gap, dz, replace(Q, eps_ladder=Q.eps_ladder[1:])).value
    assert rel_err(full, short) < Q.rel_tol


def test_certify_point_entries():
    rec = certify_point(DetectorPair(0.1, 0.18), Geometry(PAR, 1.0, 1.0))
    assert set(rec.entries) == {"p_a", "p_b", "c", "x"}
    assert rec.worst <= 1e-7


def test_certify_small_grid_in_order():
    grid = CertificationGrid(omega_a=(0.5,), delta_omega=(0.0, 0.5), separation=(1.5,), dz=(0.5,))
    recs = certify(grid, workers=1)
    assert len(recs) == len(grid) == 4
    assert [r.geometry.alignment for r in recs] == [PAR, PAR, VER, VER]
    assert max(r.worst for r in recs) <= 1e-6


def test_certify_empty_grid():
    with pytest.raises(ValueError, match="empty grid"):
        certify(CertificationGrid(dz=()))
