"""Green's function of the bursting Kolmogorov-Feller equation.

For a start point ``y`` the Green's function splits into an atom of mass
``exp(-alpha beta t)`` sitting at ``y exp(-beta t)`` and a regular density in
the shifted variable ``xbar = x - y exp(-beta t)``.  The regular part is the
binomial series

    G_reg = exp(-k xbar) sum_{i>=1} C(alpha, i) q^i sum_{s=1}^{i} C(i, s) (-1)^s
            k^s xbar^(s-1) / (s-1)!,        q = exp(-beta t) - 1.

The inner sum equals ``-k L^{(1)}_{i-1}(k xbar)`` (generalized Laguerre), which
is what the series path evaluates, by the three-term recurrence in the degree.
For integer alpha the sum is finite and regroups into a binomial mixture of
gamma densities, which is what the closed-form path evaluates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .params import (
    DEFAULT_SERIES,
    ModelError,
    ModelParams,
    SeriesConfig,
    SeriesConvergenceError,
)

_EPS = np.finfo(float).eps


def binom_real(alpha: float, i: int) -> float:
    """Generalized binomial coefficient ``alpha (alpha-1) ... (alpha-i+1) / i!``."""
    if i < 0:
        raise ModelError("i must be nonnegative")
    c = 1.0
    for j in range(1, i + 1):
        c *= (alpha - (j - 1)) / j
        if c == 0.0:
            break
    return c


def psi(s: int, k: float, xbar):
    """Gamma(s, k) density ``k^s xbar^(s-1) exp(-k xbar) / (s-1)!``."""
    if s < 1:
        raise ModelError("s must be a positive integer")
    xbar = np.asarray(xbar, dtype=float)
    if np.any(xbar < 0):
        raise ModelError("psi requires xbar >= 0; clamp to the causal region first")
    with np.errstate(divide="ignore", invalid="ignore"):
        logv = s * math.log(k) + (s - 1) * np.log(xbar) - k * xbar - math.lgamma(s)
    out = np.exp(logv)
    if s == 1:
        out = np.where(xbar == 0, k, out)
    else:
        out = np.where(xbar == 0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def _check_t(t: float) -> None:
    if not t >= 0:
        raise ModelError(f"t must be >= 0, got {t}")


def singular_amplitude(params: ModelParams, t: float) -> float:
    """Mass of the atom: the probability that no burst occurred by time t."""
    _check_t(t)
    return math.exp(-params.alpha * params.beta * t)


def atom_location(params: ModelParams, t: float, y: float) -> float:
    return y * math.exp(-params.beta * t)


def _xbar(params, t, x, y):
    _check_t(t)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or y < 0:
        raise ModelError("x and y must be nonnegative")
    return x - atom_location(params, t, y)


def laguerre_series(alpha: float, q: float, z, a: int, shift: int, cfg: SeriesConfig):
    """Sum ``S(z) = sum_{i>=1} C(alpha,i) q^i exp(-z/2) L^{(a)}_{i-1+shift}(z)``.

    The Laguerre values are carried scaled by ``exp(-z/2)`` so that they stay
    bounded by ``C(n+a, n)`` for every degree (a in {0, 1}); the tail after
    term i is then bounded by ``|C(alpha,i+1) q^(i+1)| B_{i+shift} / (1-|q|)``
    once ``i >= alpha``.  Returns ``(S, terms_used)``.
    """
    z = np.asarray(z, dtype=float)
    s = np.zeros_like(z)
    comp = np.zeros_like(z)
    absum = np.zeros_like(z)
    if q == 0.0 or z.size == 0:
        return s, 0
    r = abs(q)
    half = np.exp(-0.5 * z)
    # scaled L_0 and L_1
    lm1 = half
    l0 = (1.0 + a - z) * half
    n = 1  # degree held in l0
    while n < shift:
        l_next = ((2 * n + 1 + a - z) * l0 - (n + a) * lm1) / (n + 1)
        lm1, l0 = l0, l_next
        n += 1
    # now degree shift-1 in lm1, degree shift in l0 (shift 0: lm1 is L_0)
    if shift == 0:
        cur, nxt, deg = lm1, l0, 0
    else:
        cur, nxt, deg = l0, ((2 * n + 1 + a - z) * l0 - (n + a) * lm1) / (n + 1), n

    c = 1.0
    qi = 1.0
    i = 0
    while True:
        i += 1
        if i > cfg.max_terms:
            raise SeriesConvergenceError(
                f"series not converged after {cfg.max_terms} terms "
                f"(alpha={alpha}, |q|={r})",
                terms=cfg.max_terms,
                tail_bound=tail,
            )
        c *= (alpha - (i - 1)) / i
        qi *= q
        coef = c * qi
        term = coef * cur
        if cfg.compensated_summation:
            tot = s + term
            comp += np.where(np.abs(s) >= np.abs(term), (s - tot) + term, (term - tot) + s)
            s = tot
        else:
            s = s + term
        absum += np.abs(term)
        # advance Laguerre degree deg -> deg+1
        deg_next = deg + 1
        after = ((2 * deg_next + 1 + a - z) * nxt - (deg_next + a) * cur) / (deg_next + 1)
        cur, nxt, deg = nxt, after, deg_next

        if c == 0.0:
            break
        if i >= 3 and i >= alpha:
            next_coef = abs(c * (alpha - i) / (i + 1)) * r ** (i + 1)
            bound_deg = deg  # degree of the next term
            lag_bound = (bound_deg + 1.0) if a == 1 else 1.0
            tail = next_coef * lag_bound / (1.0 - r) if r < 1 else math.inf
            total = np.abs(s + comp)
            ok = (tail <= cfg.rel_tol * total) | (tail <= 4 * _EPS * absum)
            if np.all(ok):
                break
        else:
            tail = math.inf
    return s + comp, i


def _series_sum(params, t, zb, a, shift, cfg):
    q = math.expm1(-params.beta * t)
    s, _ = laguerre_series(params.alpha, q, zb, a, shift, cfg)
    return s


def green_regular_series(params: ModelParams, t: float, x, y: float = 0.0,
                         cfg: SeriesConfig = DEFAULT_SERIES):
    """Regular part of the Green's function by the truncated binomial series.

    Vectorized over ``x``; zero where ``xbar < 0`` and identically zero at t=0.
    Raises :class:`SeriesConvergenceError` when ``cfg.max_terms`` is exhausted.
    """
    xb = _xbar(params, t, x, y)
    out = np.zeros_like(xb)
    mask = xb >= 0
    if t > 0 and np.any(mask):
        z = params.k * xb[mask]
        s = _series_sum(params, t, z, 1, 0, cfg)
        out[mask] = -params.k * np.exp(-0.5 * z) * s
    return out[()] if out.ndim == 0 else out


def _require_integer_alpha(params: ModelParams) -> int:
    n = params.integer_alpha
    if n is None:
        raise ModelError(f"closed form requires integer alpha, got {params.alpha}")
    return n


def mixture_weights(params: ModelParams, t: float) -> np.ndarray:
    """Weights ``C(n,s) (1-rho)^s rho^(n-s)``, s = 0..n, for integer alpha = n.

    Entry ``s`` is the probability that exactly ``s`` of the ``n`` unit-rate
    components have fired; ``s = 0`` is the atom.
    """
    n = _require_integer_alpha(params)
    rho = math.exp(-params.beta * t)
    one_m = -math.expm1(-params.beta * t)
    return np.array([math.comb(n, s) * one_m**s * rho ** (n - s) for s in range(n + 1)])


def green_regular_closed(params: ModelParams, t: float, x, y: float = 0.0):
    """Finite-sum regular part for integer alpha = n.

    Regrouping the double sum over (i, s) gives the gamma mixture
    ``sum_{s=1}^{n} C(n,s) (1-rho)^s rho^(n-s) psi_s(xbar)``.
    """
    _require_integer_alpha(params)
    xb = _xbar(params, t, x, y)
    w = mixture_weights(params, t)
    out = np.zeros_like(xb)
    mask = xb >= 0
    if np.any(mask):
        xm = xb[mask]
        acc = np.zeros_like(xm)
        for s in range(1, len(w)):
            if w[s] != 0.0:
                acc += w[s] * psi(s, params.k, xm)
        out[mask] = acc
    return out[()] if out.ndim == 0 else out


def green_regular(params: ModelParams, t: float, x, y: float = 0.0,
                  cfg: SeriesConfig = DEFAULT_SERIES):
    """Regular part, routed to the finite sum when alpha is an integer."""
    if params.integer_alpha is not None:
        return green_regular_closed(params, t, x, y)
    return green_regular_series(params, t, x, y, cfg)


@dataclass(frozen=True)
class GreenValue:
    regular: np.ndarray | float
    atom_amplitude: float
    atom_location: float
    xbar: np.ndarray | float


def green(params: ModelParams, t: float, x, y: float = 0.0,
          cfg: SeriesConfig = DEFAULT_SERIES) -> GreenValue:
    """Full Green's function: regular density values plus the explicit atom."""
    xb = _xbar(params, t, x, y)
    return GreenValue(
        regular=green_regular(params, t, x, y, cfg),
        atom_amplitude=singular_amplitude(params, t),
        atom_location=atom_location(params, t, y),
        xbar=xb[()] if xb.ndim == 0 else xb,
    )


def green_regular_cdf(params: ModelParams, t: float, xbar,
                      cfg: SeriesConfig = DEFAULT_SERIES):
    """Regular mass on ``[0, xbar]``; tends to ``1 - exp(-alpha beta t)``.

    Uses ``int_0^z e^{-u} L^{(1)}_n(u) du = 1 - e^{-z} L^{(0)}_n(z)``.
    """
    _check_t(t)
    xb = np.asarray(xbar, dtype=float)
    out = np.zeros_like(xb)
    mask = xb > 0
    if t > 0 and np.any(mask):
        z = params.k * xb[mask]
        n = params.integer_alpha
        if n is not None:
            w = mixture_weights(params, t)
            acc = np.zeros_like(z)
            for s in range(1, n + 1):
                acc += w[s] * gammainc(s, z)
            out[mask] = acc
        else:
            s = _series_sum(params, t, z, 0, 0, cfg)
            mass = -math.expm1(-params.alpha * params.beta * t)
            out[mask] = mass + np.exp(-0.5 * z) * s
    return out[()] if out.ndim == 0 else out


def green_exp_convolution(params: ModelParams, t: float, x, y: float = 0.0,
                          cfg: SeriesConfig = DEFAULT_SERIES):
    """``J(x) = int_0^x G(t, u, y) exp(-k (x-u)) du`` including the atom.

    This is the field that turns the integro-differential equation into a
    second-order hyperbolic one.  Regular part:
    ``e^{-z} [ (1 - rho^alpha) + sum_i C(alpha,i) q^i L^{(0)}_i(z) ]``.
    """
    xb = _xbar(params, t, x, y)
    out = np.zeros_like(xb)
    mask = xb >= 0
    if np.any(mask):
        xm = xb[mask]
        z = params.k * xm
        amp = singular_amplitude(params, t)
        atom = amp * np.exp(-z)
        n = params.integer_alpha
        if t == 0:
            reg = np.zeros_like(z)
        elif n is not None:
            w = mixture_weights(params, t)
            reg = np.zeros_like(z)
            for s in range(1, n + 1):
                reg += w[s] * psi(s + 1, params.k, xm) / params.k
        else:
            s = _series_sum(params, t, z, 0, 1, cfg)
            reg = (1.0 - amp) * np.exp(-z) + np.exp(-0.5 * z) * s
        out[mask] = atom + reg
    return out[()] if out.ndim == 0 else out


def stationary_density(params: ModelParams, x):
    """Gamma(alpha, k) density ``k^a x^(a-1) e^(-kx) / Gamma(a)``.

    At ``x = 0`` with ``alpha < 1`` the density is unbounded; ``inf`` is
    returned there.
    """
    a, k = params.alpha, params.k
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ModelError("x must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        logv = a * math.log(k) + (a - 1) * np.log(x) - k * x - math.lgamma(a)
    out = np.exp(logv)
    if a == 1.0:
        out = np.where(x == 0, k, out)
    elif a < 1.0:
        out = np.where(x == 0, np.inf, out)
    else:
        out = np.where(x == 0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def stationary_mode(params: ModelParams) -> float:
    """Location of the stationary maximum: ``(alpha-1)/k``, or 0.0 (the origin) for alpha <= 1."""
    if params.alpha > 1:
        return (params.alpha - 1) / params.k
    return 0.0
