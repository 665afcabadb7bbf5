"""Cross-checks between the analytic solution and its independent oracles.

Each suite returns a :class:`ValidationReport`: a list of named checks, each
with the measured value, the threshold it is held to and a pass flag.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .cauchy import cdf as cauchy_cdf
from .cauchy import closed_form_gamma_solution, mean as cauchy_mean
from .green import (
    green_regular_closed,
    green_regular_series,
    singular_amplitude,
    stationary_density,
)
from .initial import DiracAt, GammaLike, cell_averages
from .laplace import InversionConfig, LaplaceImage, oracle_green_regular
from .mc import MCConfig, empirical_distribution, ks_distance
from .params import ModelError, ModelParams
from .pde import GridConfig, solve_pde

SUITES = ("series-vs-closed", "laplace", "mc", "pde")


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class ValidationReport:
    suite: str
    checks: list[Check] = field(default_factory=list)
    runtime_s: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, threshold, passed=None, **detail) -> Check:
        value = float(value)
        ok = bool(value <= threshold) if passed is None else bool(passed)
        c = Check(name, value, float(threshold), ok, detail)
        self.checks.append(c)
        return c

    def merge(self, other: "ValidationReport") -> None:
        for c in other.checks:
            self.checks.append(Check(f"{other.suite}/{c.name}", c.value, c.threshold,
                                     c.passed, c.detail))
        self.runtime_s += other.runtime_s

    def to_dict(self) -> dict:
        return {"suite": self.suite, "status": "pass" if self.passed else "fail",
                "version": __version__, "runtime_s": self.runtime_s, "meta": self.meta,
                "checks": [asdict(c) for c in self.checks]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, **kw)


def _timed(fn):
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        rep = fn(*a, **kw)
        rep.runtime_s = time.perf_counter() - t0
        return rep
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def series_vs_closed(alphas=(1, 2, 3, 5), ks=(0.2, 1.0), beta=1.0, n_t=10, n_x=10,
                     tol=1e-12) -> ValidationReport:
    """Series against finite sum on an ``n_t x n_x`` grid of (t, xbar).

    The error is scaled by ``1 + |value|``; a purely relative measure is
    reported alongside but not judged, since it is meaningless where the
    density is below roundoff of the alternating series.
    """
    rep = ValidationReport("series-vs-closed", meta={"tol": tol, "beta": beta})
    ts = np.linspace(0.05, 10.0, n_t)
    for n in alphas:
        for k in ks:
            p = ModelParams.from_alpha(float(n), beta, k)
            xb = np.linspace(0.0, 20.0 / k, n_x)
            worst = worst_rel = 0.0
            for t in ts:
                c = green_regular_closed(p, t, xb)
                s = green_regular_series(p, t, xb)
                d = np.abs(c - s)
                worst = max(worst, float(np.max(d / (1.0 + np.abs(c)))))
                with np.errstate(divide="ignore", invalid="ignore"):
                    r = np.where(c != 0, d / np.abs(c), 0.0)
                worst_rel = max(worst_rel, float(np.max(r)))
            rep.add(f"alpha={n},k={k}", worst, tol, max_pure_relative=worst_rel)
    return rep


@_timed
def laplace(alphas=(1.0, 1.5, 2.0), ks=(0.2, 1.0), ts=(0.5, 2.0), beta=1.0, n_x=6,
            tol=1e-6, doubling_tol=1e-8, cfg: InversionConfig | None = None) -> ValidationReport:
    """Talbot inversion of the Laplace image against the series on ``[0.1/k, 20/k]``."""
    cfg = cfg or InversionConfig(rel_tol=1.0)
    rep = ValidationReport("laplace", meta={"tol": tol, "doubling_tol": doubling_tol,
                                            "nodes": cfg.contour_nodes})
    for a in alphas:
        for k in ks:
            p = ModelParams.from_alpha(a, beta, k)
            xs = np.geomspace(0.1 / k, 20.0 / k, n_x)
            worst = worst_dbl = 0.0
            for t in ts:
                img = LaplaceImage(p, t)
                ser = green_regular_series(p, t, xs)
                for x, s in zip(xs, ser):
                    o = oracle_green_regular(img, float(x), cfg)
                    worst = max(worst, abs(o.value - s) / abs(s))
                    worst_dbl = max(worst_dbl, o.error / abs(o.value))
            rep.add(f"alpha={a},k={k}/series", worst, tol)
            rep.add(f"alpha={a},k={k}/doubling", worst_dbl, doubling_tol)
    return rep


@_timed
def monte_carlo(params: ModelParams | None = None, y: float = 1.0, t: float = 2.0,
                n_paths: int = 1_000_000, seed: int = 12345, ks_tol: float = 2e-3,
                atom_z: float = 4.0, mean_z: float = 3.0) -> ValidationReport:
    """Exact simulation from a Dirac start against the analytic CDF, atom and mean."""
    p = params or ModelParams(beta=1.0, lam=2.0, k=0.2)
    rep = ValidationReport("mc", meta={"params": p.as_dict(), "y": y, "t": t,
                                       "n_paths": n_paths, "seed": seed})
    phi = DiracAt(y)
    emp = empirical_distribution(p, MCConfig(n_paths, t, seed=seed, initial=phi))
    amp = singular_amplitude(p, t)
    loc = y * math.exp(-p.beta * t)
    d = ks_distance(emp, lambda x: cauchy_cdf(p, phi, t, np.maximum(x, 0.0)),
                    atoms=[(loc, amp)])
    rep.add("ks", d, ks_tol)
    # the atom is the no-burst probability exp(-lam t)
    p0 = math.exp(-p.lam * t)
    z0 = abs(emp.atom_candidate_mass - p0) / math.sqrt(p0 * (1 - p0) / n_paths)
    rep.add("atom_z", z0, atom_z, fraction=emp.atom_candidate_mass, expected=p0)
    m = cauchy_mean(p, phi, t)
    rep.add("mean_z", abs(emp.mean - m) / emp.se_mean, mean_z, sample=emp.mean, expected=m)
    return rep


def pde_l1_error(params: ModelParams, phi: GammaLike, t: float, n_cells: int,
                 grid: GridConfig | None = None):
    """L1 distance between the PDE solution and the closed-form density at ``t``.

    The analytic density is sampled at cell centres (second-order accurate
    against cell averages, so it does not pollute a first-order study).
    Returns ``(error, state)``.
    """
    g = grid or GridConfig.for_params(params, n_cells, t)
    state = solve_pde(params, cell_averages(phi, g.edges), g)
    ref = closed_form_gamma_solution(params, phi, t, g.centers)
    return float(np.dot(g.widths, np.abs(state.values - ref))), state


@_timed
def pde(alphas=(1, 2), k: float = 0.2, beta: float = 1.0, t: float = 2.0,
        cells=(512, 1024, 2048), order_range=(0.7, 1.3), t_long: float = 10.0,
        stationary_tol: float = 5e-3) -> ValidationReport:
    """Grid refinement of the finite-volume solver for ``phi = x e^{-x}``."""
    phi = GammaLike(1.0, 1.0)
    rep = ValidationReport("pde", meta={"k": k, "beta": beta, "t": t, "cells": list(cells)})
    for a in alphas:
        p = ModelParams.from_alpha(float(a), beta, k)
        errs = [pde_l1_error(p, phi, t, n)[0] for n in cells]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
        lo, hi = order_range
        for i, o in enumerate(orders):
            rep.add(f"alpha={a}/order{cells[i]}-{cells[i + 1]}", o, hi,
                    passed=lo <= o <= hi, range=[lo, hi], errors=errs)
        rep.add(f"alpha={a}/decreasing", float(np.max(np.diff(errs))), 0.0,
                passed=bool(np.all(np.diff(errs) < 0)))
        g = GridConfig.for_params(p, cells[-1], t_long)
        st = solve_pde(p, cell_averages(phi, g.edges), g)
        l1 = float(np.dot(g.widths, np.abs(st.values - stationary_density(p, g.centers))))
        rep.add(f"alpha={a}/stationary_t{t_long:g}", l1, stationary_tol)
    return rep


def run_suite(name: str, **kw) -> ValidationReport:
    table = {"series-vs-closed": series_vs_closed, "laplace": laplace,
             "mc": monte_carlo, "pde": pde}
    if name == "all":
        rep = ValidationReport("all")
        for s in SUITES:
            rep.merge(table[s]())
        return rep
    if name not in table:
        raise ModelError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    return table[name](**kw)
