"""Green's function, Cauchy solver and oracles for the bursting Kolmogorov-Feller equation."""

__version__ = "0.1.0"

from .params import (  # noqa: E402
    DEFAULT_SERIES,
    ModelError,
    ModelParams,
    SeriesConfig,
    SeriesConvergenceError,
)
from .green import (  # noqa: E402
    GreenValue,
    binom_real,
    green,
    green_regular,
    green_regular_closed,
    green_regular_series,
    psi,
    singular_amplitude,
    stationary_density,
    stationary_mode,
)
from .initial import DiracAt, GammaLike, GaussLike, PiecewisePoly, Tabulated, parse_phi  # noqa: E402
from .cauchy import DensitySolution, cdf, closed_form_gamma_solution, mean, solve  # noqa: E402

__all__ = [
    "__version__", "DEFAULT_SERIES", "ModelError", "ModelParams", "SeriesConfig",
    "SeriesConvergenceError", "GreenValue", "binom_real", "green", "green_regular",
    "green_regular_closed", "green_regular_series", "psi", "singular_amplitude",
    "stationary_density", "stationary_mode", "DiracAt", "GammaLike", "GaussLike",
    "PiecewisePoly", "Tabulated", "parse_phi", "DensitySolution", "cdf",
    "closed_form_gamma_solution", "mean", "solve",
]
