"""Model and numerical configuration objects shared by every solver."""

from __future__ import annotations

import math
from dataclasses import dataclass

INTEGER_ALPHA_TOL = 1e-12


class ModelError(ValueError):
    """Invalid model parameters or inputs outside an operation's domain."""


class SeriesConvergenceError(RuntimeError):
    """The Green's function series hit ``max_terms`` before meeting its tolerance."""

    def __init__(self, message: str, terms: int, tail_bound: float):
        super().__init__(message)
        self.terms = terms
        self.tail_bound = tail_bound


@dataclass(frozen=True)
class ModelParams:
    """Rates of the bursting model.

    ``beta`` is the degradation rate, ``lam`` the burst (transcription) rate
    and ``k`` the inverse mean burst size.  ``alpha = lam / beta`` is the
    burst frequency in units of the protein lifetime.
    """

    beta: float
    lam: float
    k: float

    def __post_init__(self):
        for name in ("beta", "lam", "k"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ModelError(f"{name} must be a finite positive number, got {v!r}")
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "k", float(self.k))

    @classmethod
    def from_alpha(cls, alpha: float, beta: float = 1.0, k: float = 1.0) -> "ModelParams":
        return cls(beta=beta, lam=alpha * beta, k=k)

    @property
    def alpha(self) -> float:
        return self.lam / self.beta

    @property
    def integer_alpha(self) -> int | None:
        """``round(alpha)`` when alpha is a positive integer within 1e-12, else None."""
        n = round(self.alpha)
        if n >= 1 and abs(self.alpha - n) <= INTEGER_ALPHA_TOL:
            return int(n)
        return None

    def as_dict(self) -> dict:
        return {"beta": self.beta, "lambda": self.lam, "k": self.k, "alpha": self.alpha}


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation control for the regular-part series.

    The default ``max_terms`` is large because the outer series converges
    geometrically with ratio ``1 - exp(-beta t)``; at ``beta t = 5`` several
    thousand terms are needed for ``rel_tol = 1e-12``.
    """

    rel_tol: float = 1e-12
    max_terms: int = 100_000
    compensated_summation: bool = True

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ModelError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_terms < 1:
            raise ModelError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_SERIES = SeriesConfig()
