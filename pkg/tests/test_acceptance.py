"""Acceptance gate: one test and one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import math
import time

import numpy as np
import pytest

from kfeller.cauchy import solve
from kfeller.green import (
    green_regular_closed,
    green_regular_series,
    mixture_weights,
    singular_amplitude,
    stationary_mode,
)
from kfeller.initial import GammaLike, PiecewisePoly, cell_averages
from kfeller.params import ModelParams
from kfeller.pde import GridConfig, analytic_field, hyperbolic_residual, solve_pde
from kfeller.quadrature import integrate_function
from kfeller.validation import laplace, monte_carlo, pde

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


def report(n: int, name: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {name} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def local_maxima(v: np.ndarray, floor: float = 1e-6) -> np.ndarray:
    """Interior strict-left local maxima above ``floor * max``."""
    i = np.where((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    return i[v[i] > floor * v.max()]


def test_1_normalization():
    t0 = time.perf_counter()
    worst = 0.0
    for a in (0.5, 1.0, 2.0, 3.7):
        for k in (0.2, 1.0):
            for t in (0.1, 1.0, 5.0):
                p = ModelParams.from_alpha(a, 1.0, k)
                # the series path on purpose, also for integer alpha
                r = integrate_function(lambda u: green_regular_series(p, t, u), 0.0,
                                       (a + 80.0) / k, atol=1e-12, rtol=1e-10)
                worst = max(worst, abs(singular_amplitude(p, t) + r.value[0] - 1.0))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 10
    report(1, "normalization", ok, f"max |mass-1| = {worst:.2e} (tol 1e-8), {dt:.1f} s (< 10 s)")
    assert ok


def test_2_closed_form_cross_check():
    worst = 0.0
    ts = np.linspace(0.05, 10.0, 10)
    for n in (1, 2, 3, 5):
        for k in (0.2, 1.0):
            p = ModelParams.from_alpha(float(n), 1.0, k)
            xb = np.linspace(0.0, 20.0 / k, 10)
            for t in ts:
                c = green_regular_closed(p, t, xb)
                s = green_regular_series(p, t, xb)
                worst = max(worst, float(np.max(np.abs(c - s) / (1.0 + np.abs(c)))))
    # second order: the atom-free mixture splits into k e^{-k xbar} and k^2 xbar e^{-k xbar}
    k, beta = 0.2, 1.0
    p2 = ModelParams.from_alpha(2.0, beta, k)
    term_err = 0.0
    for t in (0.3, 1.0, 4.0):
        r = math.exp(-beta * t)
        w = mixture_weights(p2, t)
        xb = np.linspace(0, 30, 31)
        first = w[1] * k * np.exp(-k * xb)
        second = w[2] * k * k * xb * np.exp(-k * xb)
        term_err = max(term_err,
                       float(np.max(np.abs(first - 2 * k * r * (1 - r) * np.exp(-k * xb)))),
                       float(np.max(np.abs(second - k * k * (1 - r) ** 2 * xb * np.exp(-k * xb)))),
                       float(np.max(np.abs(first + second - green_regular_closed(p2, t, xb)))))
    # first order: only the density with the factor k carries the missing mass
    p1 = ModelParams.from_alpha(1.0, 1.0, 0.2)
    t = 1.0
    mass_k = singular_amplitude(p1, t) + integrate_function(
        lambda u: green_regular_closed(p1, t, u), 0, 400, atol=1e-14).value[0]
    mass_no_k = singular_amplitude(p1, t) + (1 - math.exp(-t)) / 0.2
    ok = worst <= 1e-12 and term_err <= 1e-15 and abs(mass_k - 1) < 1e-10 and abs(mass_no_k - 1) > 1
    report(2, "closed form vs series", ok,
           f"max |closed-series|/(1+|G|) = {worst:.2e} (tol 1e-12); second-order terms {term_err:.1e}; "
           f"first-order mass with k {mass_k:.12f}, without k {mass_no_k:.3f}")
    assert ok


def test_3_laplace_oracle():
    rep = laplace(alphas=(1.0, 1.5, 2.0), ks=(0.2, 1.0), ts=(0.5, 2.0), n_x=6,
                  tol=1e-6, doubling_tol=1e-8)
    ser = max(c.value for c in rep.checks if c.name.endswith("series"))
    dbl = max(c.value for c in rep.checks if c.name.endswith("doubling"))
    ok = rep.passed and rep.runtime_s < 30
    report(3, "Laplace oracle", ok, f"max rel diff {ser:.2e} (tol 1e-6), node doubling {dbl:.2e} "
           f"(tol 1e-8), {rep.runtime_s:.1f} s (< 30 s)")
    assert ok


def test_4_monte_carlo():
    rep = monte_carlo(ModelParams(beta=1.0, lam=2.0, k=0.2), y=1.0, t=2.0,
                      n_paths=1_000_000, seed=12345)
    v = {c.name: c.value for c in rep.checks}
    ok = rep.passed and rep.runtime_s < 60
    report(4, "Monte Carlo", ok, f"KS {v['ks']:.2e} (<= 2e-3), atom z {v['atom_z']:.2f} (<= 4), "
           f"mean z {v['mean_z']:.2f} (<= 3), {rep.runtime_s:.1f} s (< 60 s)")
    assert ok


def test_5_pde_refinement():
    rep = pde(alphas=(1, 2), k=0.2, t=2.0, cells=(512, 1024, 2048), t_long=10.0,
              stationary_tol=5e-3)
    orders = [c.value for c in rep.checks if "order" in c.name]
    st = [c.value for c in rep.checks if "stationary" in c.name]
    ok = rep.passed and rep.runtime_s < 120
    report(5, "PDE refinement", ok, f"orders {', '.join(f'{o:.3f}' for o in orders)} (in [0.7, 1.3]); "
           f"t=10 L1 to stationary {', '.join(f'{s:.2e}' for s in st)} (<= 5e-3), "
           f"{rep.runtime_s:.1f} s (< 120 s)")
    assert ok


def test_6_fig1_reproduction():
    x = np.linspace(0.0, 40.0, 2048)
    h = x[1] - x[0]
    phi = GammaLike(1.0, 1.0)
    p1 = ModelParams.from_alpha(1.0, 1.0, 0.2)
    am = [x[np.argmax(solve(p1, phi, t, x).regular_values)] for t in (0.0, 1.0, 2.0, 10.0)]
    # the density vanishes at x = 0 for every t (phi(0) = 0), so the origin is reached
    # when the maximum sits in the first cell
    left_ok = all(b <= a for a, b in zip(am, am[1:])) and am[-1] <= h
    p2 = ModelParams.from_alpha(2.0, 1.0, 0.2)
    two = []
    for t in np.round(np.arange(0.1, 10.0 + 1e-9, 0.1), 10):
        if len(local_maxima(solve(p2, phi, t, x).regular_values)) >= 2:
            two.append(float(t))
    mode10 = x[np.argmax(solve(p2, phi, 10.0, x).regular_values)]
    right_ok = bool(two) and abs(mode10 - stationary_mode(p2)) <= h
    ok = left_ok and right_ok
    window = f"[{min(two):.1f}, {max(two):.1f}]" if two else "none"
    report(6, "relaxation curves (fig1 presets)", ok,
           f"alpha=1 argmax {', '.join(f'{a:.4f}' for a in am)} (cell {h:.4f}); "
           f"alpha=2 two maxima for t in {window}, t=10 argmax {mode10:.4f} vs 5")
    assert ok


def test_7_hyperbolic_residual():
    p = ModelParams.from_alpha(2.0, 1.0, 1.0)
    res = []
    for m in range(5):
        h, dt = 0.2 / 2**m, 0.1 / 2**m
        xs = np.arange(0.5, 5.0 + 1e-12, h)
        hist = [analytic_field(p, 1.0 + i * dt, xs) for i in range(3)]
        res.append(hyperbolic_residual(hist, p))
    ratios = [a / b for a, b in zip(res, res[1:])]
    ok = all(3.5 <= r <= 4.5 for r in ratios)
    report(7, "hyperbolic residual", ok,
           f"residuals {', '.join(f'{r:.2e}' for r in res)}; ratios "
           f"{', '.join(f'{r:.3f}' for r in ratios)} (~4)")
    assert ok


def test_8_discontinuity_transport():
    # jump amplitude scales as exp((1 - alpha) beta t): it decays for alpha > 1
    p = ModelParams.from_alpha(2.0, 1.0, 0.2)
    phi = PiecewisePoly.constant([0.0, 2.0], [0.5])
    ts = (0.5, 1.0, 2.0)
    amps, locs_ok, pde_ok, details = [], True, True, []
    for t in ts:
        loc = 2.0 * math.exp(-t)
        sol = solve(p, phi, t, np.array([loc * (1 - 1e-12), loc * (1 + 1e-12)]))
        left, right = sol.regular_values
        amps.append(left - right)
        locs_ok &= sol.discontinuities == [loc] and abs(amps[-1] + sol.jump_sizes[0]) < 1e-9
        g = GridConfig.for_params(p, 2048, t)
        st = solve_pde(p, cell_averages(phi, g.edges), g)
        c, v = g.centers, st.values
        i = int(np.argmin(np.diff(v) / np.diff(c)))
        steep = 0.5 * (c[i] + c[i + 1])
        # smearing width: extent of the band where the scheme is off by > 5% of the jump
        near = np.abs(c - loc) < 0.5
        exact = solve(p, phi, t, c[near]).regular_values
        off = c[near][np.abs(v[near] - exact) > 0.05 * amps[-1]]
        width = float(np.max(np.abs(off - loc))) if off.size else float(np.diff(g.edges).max())
        pde_ok &= abs(steep - loc) <= width
        details.append(f"t={t}: jump {amps[-1]:.4f}, PDE front {steep:.4f} vs {loc:.4f} "
                       f"(width {width:.3f})")
    decreasing = all(b < a for a, b in zip(amps, amps[1:]))
    ok = locs_ok and pde_ok and decreasing
    report(8, "discontinuity transport", ok, "; ".join(details))
    assert ok


if __name__ == "__main__":
    pytest.main([__file__, "-q"])
