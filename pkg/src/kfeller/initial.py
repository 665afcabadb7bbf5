"""Initial densities for the Cauchy problem.

Each variant exposes the same duck-typed surface: ``pdf``, ``log_pdf``,
``cdf``, ``ppf`` (inverse CDF, used for sampling), moments, the breakpoints
where the density is not smooth and the jumps it has there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammainc, gammainccinv, gammaincinv

from .params import ModelError

MASS_TOL = 1e-8


def _arr(x):
    return np.asarray(x, dtype=float)


def _ret(out):
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DiracAt:
    """All mass at ``y``; solutions keep it as an explicit atom."""

    y: float

    is_atomic = True
    smooth = False

    def __post_init__(self):
        if not (math.isfinite(self.y) and self.y >= 0):
            raise ModelError("Dirac location must be a finite nonnegative number")

    @property
    def breakpoints(self) -> np.ndarray:
        return np.array([self.y])

    @property
    def jumps(self) -> list[tuple[float, float]]:
        return []

    def pdf(self, x):
        raise ModelError("a Dirac initial condition has no density; use its atom")

    def cdf(self, x):
        return _ret(np.where(_arr(x) >= self.y, 1.0, 0.0))

    def ppf(self, u):
        return _ret(np.full(np.shape(u), self.y))

    def mean(self) -> float:
        return self.y

    def second_moment(self) -> float:
        return self.y**2

    def support_max(self, tail: float = 1e-16) -> float:
        return self.y

    def describe(self) -> str:
        return f"dirac:y={self.y!r}"


@dataclass(frozen=True)
class GammaLike:
    """``A x^a exp(-b x)`` with ``A = b^(a+1) / Gamma(a+1)``."""

    a: float
    b: float

    is_atomic = False

    def __post_init__(self):
        if not (self.a >= 0 and self.b > 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise ModelError("GammaLike needs a >= 0 and b > 0")

    @property
    def log_norm(self) -> float:
        return (self.a + 1) * math.log(self.b) - math.lgamma(self.a + 1)

    @property
    def A(self) -> float:
        return math.exp(self.log_norm)

    @property
    def smooth(self) -> bool:
        return self.a == 0 or self.a >= 1

    @property
    def breakpoints(self) -> np.ndarray:
        return np.empty(0)

    @property
    def jumps(self) -> list[tuple[float, float]]:
        return []

    def log_pdf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.log_norm + self.a * np.log(x) - self.b * x
        if self.a == 0:
            out = np.where(x == 0, self.log_norm, out)
        return _ret(np.where(x < 0, -np.inf, out))

    def pdf(self, x):
        return _ret(np.exp(self.log_pdf(x)))

    def cdf(self, x):
        x = np.maximum(_arr(x), 0.0)
        return _ret(gammainc(self.a + 1, self.b * x))

    def ppf(self, u):
        return _ret(gammaincinv(self.a + 1, _arr(u)) / self.b)

    def mean(self) -> float:
        return (self.a + 1) / self.b

    def second_moment(self) -> float:
        return (self.a + 1) * (self.a + 2) / self.b**2

    def support_max(self, tail: float = 1e-16) -> float:
        return float(gammainccinv(self.a + 1, tail) / self.b)

    def describe(self) -> str:
        return f"gamma:a={self.a!r},b={self.b!r}"


@dataclass(frozen=True)
class GaussLike:
    """``A x^a exp(-b x^2)`` with ``A = 2 b^((a+1)/2) / Gamma((a+1)/2)``."""

    a: float
    b: float

    is_atomic = False

    def __post_init__(self):
        if not (self.a >= 0 and self.b > 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise ModelError("GaussLike needs a >= 0 and b > 0")

    @property
    def log_norm(self) -> float:
        h = 0.5 * (self.a + 1)
        return math.log(2.0) + h * math.log(self.b) - math.lgamma(h)

    @property
    def A(self) -> float:
        return math.exp(self.log_norm)

    @property
    def smooth(self) -> bool:
        return self.a == 0 or self.a >= 1

    @property
    def breakpoints(self) -> np.ndarray:
        return np.empty(0)

    @property
    def jumps(self) -> list[tuple[float, float]]:
        return []

    def log_pdf(self, x):
        x = _arr(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.log_norm + self.a * np.log(x) - self.b * x * x
        if self.a == 0:
            out = np.where(x == 0, self.log_norm, out)
        return _ret(np.where(x < 0, -np.inf, out))

    def pdf(self, x):
        return _ret(np.exp(self.log_pdf(x)))

    def cdf(self, x):
        x = np.maximum(_arr(x), 0.0)
        return _ret(gammainc(0.5 * (self.a + 1), self.b * x * x))

    def ppf(self, u):
        return _ret(np.sqrt(gammaincinv(0.5 * (self.a + 1), _arr(u)) / self.b))

    def _moment(self, m: int) -> float:
        h = 0.5 * (self.a + 1)
        return math.exp(math.lgamma(h + 0.5 * m) - math.lgamma(h)) / self.b ** (0.5 * m)

    def mean(self) -> float:
        return self._moment(1)

    def second_moment(self) -> float:
        return self._moment(2)

    def support_max(self, tail: float = 1e-16) -> float:
        return float(np.sqrt(gammainccinv(0.5 * (self.a + 1), tail) / self.b))

    def describe(self) -> str:
        return f"gauss:a={self.a!r},b={self.b!r}"


@dataclass(frozen=True)
class PiecewisePoly:
    """Piecewise polynomial on ``[breaks[0], breaks[-1]]``, zero elsewhere.

    ``coeffs[j]`` holds ascending coefficients in the local variable
    ``x - breaks[j]`` for the piece ``[breaks[j], breaks[j+1])``.
    """

    breaks: tuple
    coeffs: tuple
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    is_atomic = False

    def __post_init__(self):
        br = np.asarray(self.breaks, dtype=float)
        if br.ndim != 1 or br.size < 2 or np.any(np.diff(br) <= 0) or br[0] < 0:
            raise ModelError("breaks must be strictly increasing, nonnegative, length >= 2")
        if len(self.coeffs) != br.size - 1:
            raise ModelError("need one coefficient vector per piece")
        object.__setattr__(self, "breaks", tuple(br))
        object.__setattr__(self, "coeffs", tuple(tuple(float(c) for c in cs) for cs in self.coeffs))
        masses = []
        for j, cs in enumerate(self.coeffs):
            h = br[j + 1] - br[j]
            if self._piece_min(cs, h) < -1e-12:
                raise ModelError(f"piece {j} is negative somewhere")
            masses.append(P.polyval(h, P.polyint(cs)))
        cum = np.concatenate([[0.0], np.cumsum(masses)])
        if abs(cum[-1] - 1) > MASS_TOL:
            raise ModelError(f"initial density must integrate to 1, got {cum[-1]!r}")
        object.__setattr__(self, "_cum", cum)

    @staticmethod
    def _piece_min(cs, h):
        cand = [0.0, h]
        d = P.polyder(cs)
        if len(d) and np.any(d):
            for r in P.polyroots(d) if len(d) > 1 else []:
                if abs(r.imag) < 1e-12 and 0 < r.real < h:
                    cand.append(r.real)
        return min(P.polyval(c, cs) for c in cand)

    @classmethod
    def constant(cls, breaks, values, normalize: bool = False) -> "PiecewisePoly":
        """Piecewise-constant density with ``values[j]`` on piece j."""
        br = np.asarray(breaks, dtype=float)
        v = np.asarray(values, dtype=float)
        if normalize:
            v = v / np.sum(v * np.diff(br))
        return cls(tuple(br), tuple((float(c),) for c in v))

    @property
    def smooth(self) -> bool:
        if self.jumps:
            return False
        br = np.asarray(self.breaks)
        for j in range(len(br)):
            left = 0.0 if j == 0 else P.polyval(br[j] - br[j - 1], P.polyder(self.coeffs[j - 1]))
            right = 0.0 if j == len(br) - 1 else P.polyval(0.0, P.polyder(self.coeffs[j]))
            if j == 0 and br[0] == 0:
                continue
            if abs(left - right) > 1e-12:
                return False
        return True

    @property
    def breakpoints(self) -> np.ndarray:
        return np.asarray(self.breaks)

    @property
    def jumps(self) -> list[tuple[float, float]]:
        """``(location, right limit - left limit)`` at every discontinuity in (0, inf)."""
        br = np.asarray(self.breaks)
        out = []
        for j in range(len(br)):
            left = 0.0 if j == 0 else P.polyval(br[j] - br[j - 1], self.coeffs[j - 1])
            right = 0.0 if j == len(br) - 1 else self.coeffs[j][0]
            if br[j] > 0 and abs(right - left) > 1e-14:
                out.append((float(br[j]), float(right - left)))
        return out

    def _locate(self, x):
        br = np.asarray(self.breaks)
        j = np.clip(np.searchsorted(br, x, side="right") - 1, 0, len(br) - 2)
        inside = (x >= br[0]) & (x < br[-1])
        return j, inside

    def pdf(self, x):
        x = _arr(x)
        br = np.asarray(self.breaks)
        j, inside = self._locate(x)
        out = np.zeros_like(x)
        for p, cs in enumerate(self.coeffs):
            sel = inside & (j == p)
            if np.any(sel):
                out[sel] = P.polyval(x[sel] - br[p], cs)
        return _ret(out)

    def log_pdf(self, x):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(x))

    def cdf(self, x):
        x = _arr(x)
        br = np.asarray(self.breaks)
        j, inside = self._locate(x)
        out = np.where(x >= br[-1], 1.0, 0.0)
        for p, cs in enumerate(self.coeffs):
            sel = inside & (j == p)
            if np.any(sel):
                out[sel] = self._cum[p] + P.polyval(x[sel] - br[p], P.polyint(cs))
        return _ret(out)

    def ppf(self, u):
        """Inverse CDF by bisection inside the located piece."""
        u = _arr(u)
        br = np.asarray(self.breaks)
        j = np.clip(np.searchsorted(self._cum, u, side="right") - 1, 0, len(br) - 2)
        lo = br[j].copy()
        hi = br[j + 1].copy()
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return _ret(0.5 * (lo + hi))

    def _moment(self, m: int) -> float:
        br = np.asarray(self.breaks)
        tot = 0.0
        for p, cs in enumerate(self.coeffs):
            # x^m = (br_p + u)^m expanded in the local variable u
            shift = P.polypow([br[p], 1.0], m)
            integ = P.polyint(P.polymul(shift, cs))
            tot += P.polyval(br[p + 1] - br[p], integ)
        return float(tot)

    def mean(self) -> float:
        return self._moment(1)

    def second_moment(self) -> float:
        return self._moment(2)

    def support_max(self, tail: float = 1e-16) -> float:
        return self.breaks[-1]

    def describe(self) -> str:
        br = [float(b) for b in self.breaks]
        cs = [[float(v) for v in c] for c in self.coeffs]
        return f"piecewise:breaks={br},coeffs={cs}"


def Tabulated(grid, values, normalize: bool = False) -> PiecewisePoly:
    """Linear interpolation of tabulated values, zero outside the table."""
    g = np.asarray(grid, dtype=float)
    v = np.asarray(values, dtype=float)
    if g.shape != v.shape or g.size < 2:
        raise ModelError("grid and values must have equal length >= 2")
    if np.any(v < 0):
        raise ModelError("tabulated density must be nonnegative")
    if normalize:
        v = v / np.trapezoid(v, g)
    h = np.diff(g)
    coeffs = tuple((float(v[j]), float((v[j + 1] - v[j]) / h[j])) for j in range(h.size))
    return PiecewisePoly(tuple(g), coeffs)


def cell_averages(phi, edges) -> np.ndarray:
    """Exact cell averages of ``phi`` on cells bounded by ``edges``."""
    edges = _arr(edges)
    return np.diff(phi.cdf(edges)) / np.diff(edges)


def parse_phi(spec: str):
    """Parse ``kind:key=value,...`` initial-density specifications.

    Supported kinds: ``dirac:y=1``, ``gamma:a=1,b=1``, ``gauss:a=1,b=2``,
    ``step:breaks=0|1|3,values=0.5|0.25`` (piecewise constant; add
    ``normalize=1`` to rescale) and ``table:path=file.csv``.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    kv = {}
    for part in filter(None, (s.strip() for s in rest.split(","))):
        if "=" not in part:
            # shorthand: dirac:1
            kv.setdefault("_", part)
            continue
        key, _, val = part.partition("=")
        kv[key.strip()] = val.strip()
    try:
        if kind == "dirac":
            return DiracAt(float(kv.get("y", kv.get("_"))))
        if kind == "gamma":
            return GammaLike(float(kv["a"]), float(kv["b"]))
        if kind == "gauss":
            return GaussLike(float(kv["a"]), float(kv["b"]))
        if kind == "step":
            br = [float(v) for v in kv["breaks"].split("|")]
            vals = [float(v) for v in kv["values"].split("|")]
            return PiecewisePoly.constant(br, vals, normalize=kv.get("normalize", "0") == "1")
        if kind == "table":
            data = np.loadtxt(kv["path"], delimiter=",", comments="#", ndmin=2)
            return Tabulated(data[:, 0], data[:, 1], normalize=kv.get("normalize", "0") == "1")
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"bad initial-density spec {spec!r}: {e}") from e
    raise ModelError(f"unknown initial-density kind {kind!r}")
