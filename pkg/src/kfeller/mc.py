"""Exact event-driven Monte Carlo of the bursting process.

Between bursts the concentration decays as ``x' = -beta x``; bursts arrive at
Poisson rate ``lam`` and add an Exp(k) amount.  Inter-burst times are drawn
directly, so there is no time-stepping error.  Paths that never burst end
exactly at ``x0 exp(-beta t)``: they are the Monte Carlo image of the atom.

Random draws for path ``i`` come from counter-based stream ``i``: draw 0
samples the initial state, draws ``1 + 2m`` and ``2 + 2m`` give the m-th waiting
time and burst size.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .initial import DiracAt
from .params import ModelError, ModelParams
from .rng import CounterStream, counter_uniform


@dataclass(frozen=True)
class MCConfig:
    n_paths: int
    t_end: float
    seed: int = 0
    initial: object = DiracAt(0.0)
    batch: int = 1 << 18
    workers: int = 1

    def __post_init__(self):
        if self.n_paths < 1:
            raise ModelError("n_paths must be >= 1")
        if not self.t_end >= 0:
            raise ModelError("t_end must be >= 0")
        if self.batch < 1 or self.workers < 1:
            raise ModelError("batch and workers must be >= 1")


@dataclass
class EmpiricalResult:
    samples: np.ndarray          # sorted final states
    zero_jump_count: int
    n_paths: int
    t_end: float
    mean: float
    variance: float
    se_mean: float
    se_variance: float

    @property
    def atom_candidate_mass(self) -> float:
        return self.zero_jump_count / self.n_paths

    def ecdf(self, x):
        return np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / self.n_paths

    def ecdf_left(self, x):
        return np.searchsorted(self.samples, np.asarray(x, dtype=float), side="left") / self.n_paths


def simulate_path(params: ModelParams, x0: float, t_end: float, rng_stream) -> float:
    """One exact path; ``rng_stream.uniform()`` supplies (0, 1) draws."""
    if x0 < 0 or not t_end >= 0:
        raise ModelError("x0 and t_end must be nonnegative")
    x = np.float64(x0)
    remaining = np.float64(t_end)
    while True:
        tau = -np.log(np.float64(rng_stream.uniform())) / params.lam
        if tau >= remaining:
            return float(x * np.exp(-params.beta * remaining))
        x = x * np.exp(-params.beta * tau) + (-np.log(np.float64(rng_stream.uniform())) / params.k)
        remaining = remaining - tau


def path_stream(seed: int, index: int) -> CounterStream:
    """Stream positioned after the initial-state draw, matching the batch simulator."""
    return CounterStream(seed, index, start=1)


def sample_initial(phi, seed: int, idx: np.ndarray) -> np.ndarray:
    if isinstance(phi, DiracAt):
        return np.full(idx.shape, float(phi.y))
    return np.asarray(phi.ppf(counter_uniform(seed, idx, 0)), dtype=float)


def simulate_batch(params: ModelParams, x0: np.ndarray, t_end: float, seed: int,
                   idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Advance every path of a batch to ``t_end`` in lockstep over burst events."""
    x = np.asarray(x0, dtype=float).copy()
    remaining = np.full(x.shape, float(t_end))
    jumps = np.zeros(x.shape, dtype=np.int64)
    active = np.arange(x.size)
    m = 0
    while active.size:
        ids = idx[active]
        tau = -np.log(counter_uniform(seed, ids, 1 + 2 * m)) / params.lam
        stop = tau >= remaining[active]
        fin = active[stop]
        x[fin] = x[fin] * np.exp(-params.beta * remaining[fin])
        go = active[~stop]
        tg = tau[~stop]
        size = -np.log(counter_uniform(seed, idx[go], 2 + 2 * m)) / params.k
        x[go] = x[go] * np.exp(-params.beta * tg) + size
        remaining[go] -= tg
        jumps[go] += 1
        active = go
        m += 1
    return x, jumps


def empirical_distribution(params: ModelParams, cfg: MCConfig) -> EmpiricalResult:
    """Run ``cfg.n_paths`` paths and summarize them; reproducible per seed."""
    starts = range(0, cfg.n_paths, cfg.batch)

    def run(start):
        idx = np.arange(start, min(start + cfg.batch, cfg.n_paths), dtype=np.uint64)
        x0 = sample_initial(cfg.initial, cfg.seed, idx)
        if cfg.t_end == 0:
            return x0, np.zeros(idx.shape, dtype=np.int64)
        return simulate_batch(params, x0, cfg.t_end, cfg.seed, idx)

    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            parts = list(ex.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    x = np.concatenate([p[0] for p in parts])
    jumps = np.concatenate([p[1] for p in parts])
    n = x.size
    mu = float(np.mean(x))
    d = x - mu
    var = float(np.mean(d * d)) * n / max(n - 1, 1)
    m4 = float(np.mean(d**4))
    se_var = math.sqrt(max(m4 - var * var, 0.0) / n)
    return EmpiricalResult(
        samples=np.sort(x),
        zero_jump_count=int(np.count_nonzero(jumps == 0)),
        n_paths=n,
        t_end=cfg.t_end,
        mean=mu,
        variance=var,
        se_mean=math.sqrt(var / n),
        se_variance=se_var,
    )


def ks_distance(emp: EmpiricalResult, analytic_cdf, atoms=(), atom_rtol: float = 1e-12,
                analytic_cdf_left=None) -> float:
    """Sup distance between the right-continuous ECDF and an analytic CDF.

    ``atoms`` lists ``(location, mass)`` jumps of the analytic CDF; samples
    within ``atom_rtol`` of an atom are snapped onto it and compared against
    both ``F(loc)`` and the left limit ``F(loc) - mass``, so a point mass is a
    genuine jump.  ``analytic_cdf_left`` overrides the left limit entirely.
    """
    xs = emp.samples
    n = emp.n_paths
    vals, first, counts = np.unique(xs, return_index=True, return_counts=True)
    at = vals.copy()
    drop = np.zeros_like(vals)
    for loc, mass in atoms:
        hit = np.abs(vals - loc) <= atom_rtol * (1.0 + abs(loc))
        at[hit] = loc
        drop[hit] += mass
    F = np.asarray(analytic_cdf(at), dtype=float)
    if analytic_cdf_left is not None:
        F_left = np.asarray(analytic_cdf_left(at), dtype=float)
    else:
        F_left = F - drop
    before = first / n
    after = (first + counts) / n
    d = np.maximum(np.abs(after - F), np.abs(before - F_left))
    return float(d.max(initial=0.0))


def ks_critical(n: int, level: float = 0.01) -> float:
    """Asymptotic Kolmogorov critical value ``c(level) / sqrt(n)``."""
    c = math.sqrt(-0.5 * math.log(level / 2))
    return c / math.sqrt(n)
