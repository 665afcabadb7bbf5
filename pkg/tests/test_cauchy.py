import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kfeller.cauchy import (
    cdf,
    closed_form_gamma_solution,
    convolution_integral,
    mean,
    second_moment,
    solve,
    transported_term,
    variance,
)
from kfeller.green import green_regular, stationary_density
from kfeller.initial import DiracAt, GammaLike, GaussLike, PiecewisePoly
from kfeller.params import ModelError, ModelParams
from kfeller.quadrature import integrate_function

# Convolution of the raw double-sum Green's function with the initial density,
# integrated in 30-digit arithmetic: (alpha, k, t, x) -> P(t, x) for phi = x e^{-x}.
GAMMA_REFERENCE = [
    ((1.5, 0.2, 1.0, 0.5), 0.256008488083849836),
    ((1.5, 1.0, 1.0, 3.0), 0.115826785283820808),
    ((0.5, 1.0, 0.5, 1.0), 0.485448171450604686),
]
# same oracle, phi = 0.5 on [0, 2), alpha = 2, k = 0.2, t = 1, x = 1.5
STEP_REFERENCE = 0.0885637069850060962

PHI = GammaLike(1.0, 1.0)


@pytest.mark.parametrize("args,ref", GAMMA_REFERENCE)
def test_quadrature_path_matches_reference(args, ref):
    a, k, t, x = args
    v = solve(ModelParams.from_alpha(a, 1.0, k), PHI, t, np.array([x])).regular_values[0]
    assert v == pytest.approx(ref, rel=1e-9)


def test_step_data_matches_reference():
    phi = PiecewisePoly.constant([0, 2], [0.5])
    sol = solve(ModelParams.from_alpha(2.0, 1.0, 0.2), phi, 1.0, np.array([1.5]))
    assert sol.regular_values[0] == pytest.approx(STEP_REFERENCE, rel=1e-9)
    assert sol.discontinuities == [pytest.approx(2 * math.exp(-1))]
    assert sol.jump_sizes == [pytest.approx(-0.5 * math.exp(-1))]


def test_dirac_returns_green_function():
    p = ModelParams.from_alpha(1.7, 1.0, 0.5)
    x = np.linspace(0, 10, 21)
    sol = solve(p, DiracAt(2.0), 1.2, x)
    assert np.array_equal(sol.regular_values, green_regular(p, 1.2, x, 2.0))
    assert sol.atoms == [(pytest.approx(2 * math.exp(-1.2)), pytest.approx(math.exp(-1.7 * 1.2)))]


def test_atom_semigroup():
    p = ModelParams.from_alpha(1.7, 0.8, 0.5)
    a = solve(p, DiracAt(3.0), 1.1, np.array([1.0])).atoms[0]
    b = solve(p, DiracAt(3.0 * math.exp(-0.8 * 0.6)), 0.5, np.array([1.0])).atoms[0]
    assert a[0] == pytest.approx(b[0], rel=1e-14)


def test_total_mass_on_grid():
    p = ModelParams.from_alpha(2.0, 1.0, 0.2)
    sol = solve(p, PHI, 1.0, np.linspace(0, 300, 300001))
    assert sol.total_mass() == pytest.approx(1.0, abs=1e-6)
    # with Dirac data the atom is counted exactly; the trapezoid only sees the regular part
    sol = solve(p, DiracAt(1.0), 1.0, np.linspace(0, 300, 30001))
    assert sol.atoms[0][1] == pytest.approx(math.exp(-2.0))
    assert sol.total_mass() == pytest.approx(1.0, abs=1e-3)


def test_identity_at_t0():
    x = np.linspace(0, 5, 11)
    sol = solve(ModelParams.from_alpha(2.0, 1.0, 0.2), PHI, 0.0, x)
    assert np.array_equal(sol.regular_values, PHI.pdf(x))


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("a,b", [(1.0, 1.0), (0.0, 0.5), (2.0, 3.0), (1.0, 0.2)])
def test_closed_form_matches_quadrature(n, a, b):
    # (a=1, b=0.2) with k=0.2 puts the closed form at its resonant point c=0 for t -> 0
    p = ModelParams.from_alpha(float(n), 1.0, 0.2)
    phi = GammaLike(a, b)
    x = np.linspace(0, 40, 37)
    for t in (0.3, 1.0, 4.0):
        c = closed_form_gamma_solution(p, phi, t, x)
        q = solve(p, phi, t, x, method="quadrature").regular_values
        assert np.allclose(c, q, rtol=1e-8, atol=1e-12)


def test_closed_form_resonance_is_continuous():
    # c = b e^{beta t} - k changes sign at t* = log(k / b); the value is smooth through it
    p = ModelParams.from_alpha(2.0, 1.0, 1.0)
    phi = GammaLike(1.0, 0.5)
    ts = math.log(2.0) + np.array([-1e-9, 0.0, 1e-9])
    v = [closed_form_gamma_solution(p, phi, t, 3.0) for t in ts]
    assert max(v) - min(v) < 1e-8


def test_closed_form_preconditions():
    with pytest.raises(ModelError):
        closed_form_gamma_solution(ModelParams.from_alpha(1.5), PHI, 1.0, 1.0)
    with pytest.raises(ModelError):
        closed_form_gamma_solution(ModelParams.from_alpha(1.0), GammaLike(0.5, 1.0), 1.0, 1.0)


def test_fig1_long_time_alpha1():
    p = ModelParams.from_alpha(1.0, 1.0, 0.2)
    x = np.linspace(0, 40, 2048)
    v = solve(p, PHI, 10.0, x).regular_values
    # away from the boundary layer of width ~e^{-10} at the origin
    sel = x > 1e-3
    assert np.max(np.abs(v[sel] - stationary_density(p, x[sel]))) < 1e-3


@given(st.floats(0.2, 4.0), st.floats(0.1, 2.0), st.floats(0.05, 3.0))
def test_mass_conserved(alpha, k, t):
    p = ModelParams.from_alpha(alpha, 1.0, k)
    up = (alpha + 60) / k + 40
    r = integrate_function(lambda u: solve(p, PHI, t, u).regular_values, 0.0, up,
                           atol=1e-10, rtol=1e-9)
    assert r.value[0] == pytest.approx(1.0, abs=1e-7)


@given(st.floats(0.2, 4.0), st.floats(0.1, 2.0), st.floats(0.05, 3.0))
def test_mean_matches_density(alpha, k, t):
    p = ModelParams.from_alpha(alpha, 1.0, k)
    up = (alpha + 60) / k + 40
    r = integrate_function(lambda u: u * solve(p, PHI, t, u).regular_values, 0.0, up,
                           atol=1e-10, rtol=1e-9)
    assert r.value[0] == pytest.approx(mean(p, PHI, t), rel=1e-7)


def test_moment_examples():
    p = ModelParams.from_alpha(2.0, 1.0, 0.2)
    assert mean(p, DiracAt(0.0), 1.0) == pytest.approx(10 * (1 - math.exp(-1)), rel=1e-14)
    assert mean(p, PHI, 0.0) == pytest.approx(2.0)
    assert mean(p, PHI, 60.0) == pytest.approx(10.0)
    assert variance(p, PHI, 60.0) == pytest.approx(2.0 / 0.04, rel=1e-12)
    assert second_moment(p, PHI, 0.0) == pytest.approx(PHI.second_moment())


def test_cdf_dirac_jump_and_limits():
    p = ModelParams.from_alpha(1.3, 1.0, 0.5)
    t, y = 0.7, 2.0
    loc = y * math.exp(-t)
    below = cdf(p, DiracAt(y), t, np.nextafter(loc, 0))
    at = cdf(p, DiracAt(y), t, loc)
    assert below == 0.0
    assert at == pytest.approx(math.exp(-1.3 * t))
    assert cdf(p, DiracAt(y), t, 500.0) == pytest.approx(1.0, abs=1e-12)


def test_cdf_smooth_data():
    p = ModelParams.from_alpha(1.5, 1.0, 0.4)
    x = np.array([0.0, 1.0, 5.0, 20.0, 300.0])
    c = cdf(p, PHI, 1.1, x)
    assert c[0] == 0.0
    assert np.all(np.diff(c) > 0)
    assert c[-1] == pytest.approx(1.0, abs=1e-8)
    r = integrate_function(lambda u: solve(p, PHI, 1.1, u).regular_values, 0.0, 5.0,
                           atol=1e-12, rtol=1e-11)
    assert c[2] == pytest.approx(r.value[0], rel=1e-8)


def test_gauss_data_runs_through_quadrature():
    p = ModelParams.from_alpha(1.5, 1.0, 1.0)
    sol = solve(p, GaussLike(1.0, 1.0), 0.5, np.linspace(0, 6, 7))
    assert sol.method == "quadrature"
    assert np.all(sol.regular_values >= 0)


def test_transported_term_log_space():
    p = ModelParams.from_alpha(1.0, 1.0, 1.0)
    v = transported_term(p, PHI, 800.0, np.array([0.0, 1.0]))
    assert np.all(np.isfinite(v)) and v[1] == 0.0


def test_convolution_reports_errors():
    p = ModelParams.from_alpha(1.5, 1.0, 1.0)
    v, err, ok = convolution_integral(p, PHI, 1.0, np.array([1.0, 2.0]))
    assert ok and np.all(err < 1e-9)


def test_rejects_bad_grid():
    p = ModelParams.from_alpha(1.5)
    with pytest.raises(ModelError):
        solve(p, PHI, 1.0, np.array([1.0, -0.5]))
    with pytest.raises(ModelError):
        solve(p, PHI, -1.0, np.array([1.0]))
    with pytest.raises(ModelError):
        solve(p, PHI, 1.0, np.array([1.0]), method="bogus")
