"""Cauchy problem by convolution of the initial density with the Green's function.

The atom of the Green's function moves along the characteristic
``x = y exp(-beta t)``.  Convolved with an absolutely continuous initial
density it becomes the transported term
``exp((1-alpha) beta t) phi(x exp(beta t))`` in the regular field; convolved
with a Dirac it stays an atom.  The rest is ``int G_reg(t, x - y rho) phi(y) dy``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .green import (
    atom_location,
    green_regular,
    green_regular_cdf,
    mixture_weights,
    singular_amplitude,
)
from .initial import DiracAt, GammaLike
from .params import DEFAULT_SERIES, ModelError, ModelParams, SeriesConfig
from .quadrature import integrate

QUAD_ATOL = 1e-10
QUAD_RTOL = 1e-8


@dataclass
class DensitySolution:
    t: float
    grid: np.ndarray
    regular_values: np.ndarray
    atoms: list = field(default_factory=list)
    discontinuities: list = field(default_factory=list)
    jump_sizes: list = field(default_factory=list)
    quad_error: float = 0.0
    method: str = "quadrature"

    def total_mass(self) -> float:
        """Atom masses plus the trapezoid integral of the regular part on the (sorted) grid."""
        return sum(m for _, m in self.atoms) + float(np.trapezoid(self.regular_values, self.grid))


def _check(t, grid=None):
    if not t >= 0:
        raise ModelError(f"t must be >= 0, got {t}")
    if grid is not None:
        g = np.asarray(grid, dtype=float)
        if g.ndim != 1 or np.any(g < 0):
            raise ModelError("grid must be a 1-D array of nonnegative values")
        return g
    return None


def transported_term(params: ModelParams, phi, t: float, x):
    """Contribution of the Green's function atom for a density ``phi``.

    Evaluated in log space: ``x exp(beta t)`` runs far into phi's tail at large t.
    """
    x = np.asarray(x, dtype=float)
    bt = params.beta * t
    with np.errstate(over="ignore"):
        y = x * math.exp(bt) if bt < 700 else np.where(x > 0, np.inf, 0.0)
    if hasattr(phi, "log_pdf"):
        lp = phi.log_pdf(y)
    else:
        with np.errstate(divide="ignore"):
            lp = np.log(phi.pdf(y))
    # every supported density vanishes at infinity
    lp = np.where(np.isinf(y), -np.inf, lp)
    with np.errstate(over="ignore"):
        return np.exp((1.0 - params.alpha) * bt + lp)


def convolution_integral(params: ModelParams, phi, t: float, x, cfg: SeriesConfig = DEFAULT_SERIES,
                         atol: float = QUAD_ATOL, rtol: float = QUAD_RTOL,
                         kernel=None):
    """``int_0^{x e^{beta t}} K(x - y rho) phi(y) dy`` for every x by adaptive quadrature.

    ``K`` defaults to the regular Green's function; panels are forced to break
    at phi's breakpoints and the integration range is clipped to phi's support.
    Returns ``(values, error_estimates, converged)``.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if kernel is None:
        def kernel(xb):
            return green_regular(params, t, xb, 0.0, cfg)
    rho = math.exp(-params.beta * t)
    upper = np.minimum(x / rho, phi.support_max())
    upper = np.maximum(upper, 0.0)
    bps = phi.breakpoints

    def f(y, owner):
        xb = np.maximum(x[owner] - y * rho, 0.0)
        return kernel(xb) * phi.pdf(y)

    pts = [bps] * x.size if bps.size else None
    res = integrate(f, np.zeros_like(x), upper, points=pts, atol=atol, rtol=rtol)
    return res.value, res.error, res.converged


def solve(params: ModelParams, phi, t: float, grid, cfg: SeriesConfig = DEFAULT_SERIES,
          method: str = "auto") -> DensitySolution:
    """Density at time t on ``grid`` for initial data ``phi``.

    ``method``: ``"quadrature"`` always convolves numerically; ``"closed"``
    requires integer alpha and GammaLike data with integer exponent; ``"auto"``
    picks the closed form when it applies.
    """
    grid = _check(t, grid)
    amp = singular_amplitude(params, t)
    rho = math.exp(-params.beta * t)

    if isinstance(phi, DiracAt):
        reg = np.asarray(green_regular(params, t, grid, phi.y, cfg), dtype=float)
        return DensitySolution(t, grid, np.atleast_1d(reg),
                               atoms=[(atom_location(params, t, phi.y), amp)],
                               method="green")

    discont = [b * rho for b, _ in phi.jumps]
    jumps = [j * math.exp((1.0 - params.alpha) * params.beta * t) for _, j in phi.jumps]
    if t == 0:
        return DensitySolution(t, grid, np.asarray(phi.pdf(grid), dtype=float),
                               discontinuities=discont, jump_sizes=jumps, method="identity")

    use_closed = method == "closed" or (method == "auto" and closed_form_applies(params, phi))
    if use_closed:
        vals = closed_form_gamma_solution(params, phi, t, grid)
        return DensitySolution(t, grid, np.asarray(vals), discontinuities=discont,
                               jump_sizes=jumps, method="closed")
    if method not in ("auto", "quadrature"):
        raise ModelError(f"unknown method {method!r}")
    conv, err, ok = convolution_integral(params, phi, t, grid, cfg)
    if not ok:
        raise ModelError(f"convolution quadrature failed, achieved error {err.max():.3g}")
    vals = transported_term(params, phi, t, grid) + conv
    return DensitySolution(t, grid, vals, discontinuities=discont, jump_sizes=jumps,
                           quad_error=float(err.max(initial=0.0)), method="quadrature")


def closed_form_applies(params: ModelParams, phi) -> bool:
    return (params.integer_alpha is not None and isinstance(phi, GammaLike)
            and float(phi.a).is_integer())


def _exp_weighted_moment(p: int, c: float, k: float, x: np.ndarray) -> np.ndarray:
    """``exp(-k x) int_0^x u^p exp(-c u) du`` for integer p >= 0, any real c.

    Three branches keep every sum free of cancellation: the complementary
    form for ``c x > p + 1``, the upper-tail exponential series for small
    ``c x >= 0`` (this covers the resonant c = 0 case continuously), and a
    positive log-space series for ``c < 0``.
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    xv = x[pos]
    z = c * xv
    res = np.empty_like(xv)
    lfact = math.lgamma(p + 1)

    big = z > p + 1
    if np.any(big):
        zb = z[big]
        head = np.zeros_like(zb)
        lz = np.log(zb)
        for j in range(p + 1):
            head += np.exp(-zb + j * lz - math.lgamma(j + 1))
        res[big] = np.exp(lfact - (p + 1) * math.log(c) - k * xv[big]) * (1.0 - head)

    small = (~big) & (z >= 0)
    if np.any(small):
        zs = z[small]
        xs = xv[small]
        term = np.full_like(zs, 1.0 / math.factorial(p + 1))
        acc = term.copy()
        for j in range(p + 2, p + 200):
            term = term * zs / j
            acc += term
            if np.all(term <= 1e-17 * acc):
                break
        res[small] = math.factorial(p) * np.exp((p + 1) * np.log(xs) - zs - k * xs) * acc

    neg = z < 0
    if np.any(neg):
        xn = xv[neg]
        lw = np.log(-z[neg])
        base = (p + 1) * np.log(xn) - k * xn
        acc = np.zeros_like(xn)
        j = 0
        while True:
            term = np.exp(base + j * lw - math.lgamma(j + 1)) / (p + 1 + j)
            acc += term
            j += 1
            if j > (-z[neg]).max() + 20 and np.all(term <= 1e-17 * acc):
                break
        res[neg] = acc
    out[pos] = res
    return out


def closed_form_gamma_solution(params: ModelParams, phi: GammaLike, t: float, x):
    """Exact solution for integer alpha = n and ``phi = A y^a e^{-b y}`` with integer a.

    With ``c = b e^{beta t} - k`` each mixture component is
    ``A rho^{-(a+1)} k^s/(s-1)! e^{-kx} sum_m C(s-1,m) (-1)^m x^{s-1-m}
    int_0^x u^{a+m} e^{-c u} du``.
    """
    n = params.integer_alpha
    if n is None:
        raise ModelError("closed form requires integer alpha")
    if not isinstance(phi, GammaLike) or not float(phi.a).is_integer():
        raise ModelError("closed form requires GammaLike data with integer exponent a")
    if not t >= 0:
        raise ModelError("t must be >= 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ModelError("x must be nonnegative")
    a = int(phi.a)
    k = params.k
    bt = params.beta * t
    out = np.asarray(transported_term(params, phi, t, x), dtype=float).copy()
    if t == 0:
        return out[()] if out.ndim == 0 else out
    c = phi.b * math.exp(bt) - k
    w = mixture_weights(params, t)
    lpref = phi.log_norm + (a + 1) * bt
    xs = np.atleast_1d(x)
    acc = np.zeros_like(xs)
    with np.errstate(divide="ignore"):
        logx = np.log(xs)
    for s in range(1, n + 1):
        if w[s] == 0.0:
            continue
        inner = np.zeros_like(xs)
        for m in range(s):
            sign = -1.0 if m % 2 else 1.0
            pw = np.exp((s - 1 - m) * logx) if s - 1 - m else 1.0
            inner += sign * math.comb(s - 1, m) * pw * _exp_weighted_moment(a + m, c, k, xs)
        acc += w[s] * math.exp(lpref + s * math.log(k) - math.lgamma(s)) * inner
    out = out + (acc if x.ndim else acc[0])
    return out[()] if np.ndim(out) == 0 else out


def mean(params: ModelParams, phi, t: float) -> float:
    """First moment ``(m1(0) - alpha/k) e^{-beta t} + alpha/k``."""
    _check(t)
    mu = params.alpha / params.k
    return (phi.mean() - mu) * math.exp(-params.beta * t) + mu


def second_moment(params: ModelParams, phi, t: float) -> float:
    """Second moment from ``m2' = -2 beta m2 + lambda (2 m1 / k + 2 / k^2)``."""
    _check(t)
    b, lam, k = params.beta, params.lam, params.k
    rho = math.exp(-b * t)
    mu = params.alpha / k
    d = phi.mean() - mu
    one_m_rho2 = -math.expm1(-2 * b * t)
    return (phi.second_moment() * rho * rho
            + lam * (2 * mu / k + 2 / k**2) * one_m_rho2 / (2 * b)
            + lam * 2 * d / k * (rho - rho * rho) / b)


def variance(params: ModelParams, phi, t: float) -> float:
    m1 = mean(params, phi, t)
    return second_moment(params, phi, t) - m1 * m1


def cdf(params: ModelParams, phi, t: float, x, cfg: SeriesConfig = DEFAULT_SERIES):
    """``P(X_t <= x)``: atoms at or below x plus the regular mass on ``[0, x]``."""
    _check(t)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ModelError("x must be nonnegative")
    rho = math.exp(-params.beta * t)
    amp = singular_amplitude(params, t)
    if isinstance(phi, DiracAt):
        loc = atom_location(params, t, phi.y)
        xb = x - loc
        out = np.where(xb >= 0, amp, 0.0) + np.where(
            xb > 0, green_regular_cdf(params, t, np.maximum(xb, 0.0), cfg), 0.0)
        return out[()] if out.ndim == 0 else out
    xs = np.atleast_1d(x)
    base = amp * phi.cdf(xs / rho)
    if t == 0:
        out = base
    else:
        conv, err, ok = convolution_integral(
            params, phi, t, xs, cfg,
            kernel=lambda xb: green_regular_cdf(params, t, xb, cfg))
        if not ok:
            raise ModelError(f"cdf quadrature failed, achieved error {err.max():.3g}")
        out = base + conv
    return out if x.ndim else out[0]
