"""Certified lower bounds and exact values for tripartite continuous-variable entanglement.

Modules:
    core: shared types, parameters and exceptions.
    entropy: differential, discrete and conditional entropies.
    bounds: witnesses and E3F lower bounds.
    spdc: cascaded down-conversion phase matching and the triphoton state.
    schmidt: exact E3F of the triple-Gaussian state and its numerical oracles.
    sampler: Monte-Carlo measurement simulation and sampled bounds.
    cli: scenarios and the ``tripent`` command.
"""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    e3f_entropic_bound,
    e3f_variance_bound,
    energy_time_bound,
    gaussian_pipeline_bound,
    gaussian_witnesses,
    spdc_closed_form_bound,
)
from .core import (  # noqa: E402
    GHZ_LIKE_COEFFS,
    BoundMethod,
    BoundReport,
    CoefficientVectors,
    ExperimentParams,
    TripartiteGaussianState,
    TripentError,
    ValidationError,
)
from .schmidt import exact_e3f  # noqa: E402
from .spdc import effective_pump_momentum, gaussian_triphoton_state  # noqa: E402

__all__ = [
    "__version__",
    "GHZ_LIKE_COEFFS",
    "BoundMethod",
    "BoundReport",
    "CoefficientVectors",
    "ExperimentParams",
    "TripartiteGaussianState",
    "TripentError",
    "ValidationError",
    "e3f_entropic_bound",
    "e3f_variance_bound",
    "energy_time_bound",
    "gaussian_pipeline_bound",
    "gaussian_witnesses",
    "spdc_closed_form_bound",
    "exact_e3f",
    "effective_pump_momentum",
    "gaussian_triphoton_state",
]
