"""Shared value types, exceptions and validation helpers.

Units are SI throughout (m, s, rad/m, rad/s) and every entropy is in bits.
Nothing in this package converts units on the caller's behalf.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "TripentError",
    "ValidationError",
    "DegenerateCorrelationsError",
    "PhaseMatchError",
    "GridError",
    "QuadratureError",
    "ConjugatePairKind",
    "ConjugatePair",
    "CoefficientVectors",
    "TripartiteGaussianState",
    "ExperimentParams",
    "BoundMethod",
    "BoundReport",
    "min_coefficient_product",
    "GHZ_LIKE_COEFFS",
]


class TripentError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TripentError, ValueError):
    """An input violates a documented precondition."""


class DegenerateCorrelationsError(ValidationError):
    """A covariance (or a projected sample set) has no spread to work with."""


class PhaseMatchError(ValidationError):
    """The requested phase-matching configuration is unphysical."""


class GridError(TripentError):
    """A numerical grid is too coarse or too small for the requested accuracy."""


class QuadratureError(TripentError):
    """Successive quadrature refinements disagree beyond tolerance."""


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    return value


def _positive(name: str, value: float) -> float:
    value = _finite(name, value)
    if value <= 0.0:
        raise ValidationError(f"{name} must be > 0, got {value!r}")
    return value


class ConjugatePairKind(str, enum.Enum):
    POSITION_MOMENTUM = "position_momentum"
    TIME_FREQUENCY = "time_frequency"


@dataclass(frozen=True)
class ConjugatePair:
    """A Fourier-conjugate pair of observables, with k = p / hbar.

    The product of the two units is dimensionless by construction, which is
    why only these two pairings are offered.
    """

    kind: ConjugatePairKind = ConjugatePairKind.POSITION_MOMENTUM

    @property
    def x_unit(self) -> str:
        return "m" if self.kind is ConjugatePairKind.POSITION_MOMENTUM else "s"

    @property
    def k_unit(self) -> str:
        return "rad/m" if self.kind is ConjugatePairKind.POSITION_MOMENTUM else "rad/s"


@dataclass(frozen=True)
class CoefficientVectors:
    """Coefficients of the measured linear combinations.

    ``eta`` multiplies the positions (or times) and ``beta`` the momenta (or
    frequencies) of parties A, B and C.
    """

    eta: tuple[float, float, float]
    beta: tuple[float, float, float]

    def __post_init__(self):
        eta = tuple(_finite("eta", v) for v in self.eta)
        beta = tuple(_finite("beta", v) for v in self.beta)
        if len(eta) != 3 or len(beta) != 3:
            raise ValidationError("eta and beta must each have exactly three entries")
        if not any(eta) or not any(beta):
            raise ValidationError("at least one eta and one beta entry must be nonzero")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "beta", beta)

    @property
    def products(self) -> tuple[float, float, float]:
        return tuple(abs(e) * abs(b) for e, b in zip(self.eta, self.beta))


# Centroid-difference positions and total momentum; the default everywhere.
GHZ_LIKE_COEFFS = CoefficientVectors(eta=(1.0, -0.5, -0.5), beta=(1.0, 1.0, 1.0))


def min_coefficient_product(coeffs: CoefficientVectors) -> float:
    """Smallest per-party product ``|eta_i| * |beta_i|``.

    Raises:
        ValidationError: if any product vanishes, since the entropic bound
            would then be minus infinity.
    """
    products = coeffs.products
    if min(products) == 0.0:
        raise ValidationError(
            f"coefficient products {products} contain a zero; the bound would be vacuous"
        )
    return min(products)


@dataclass(frozen=True)
class TripartiteGaussianState:
    """Triple-Gaussian pure state described by its principal position variances.

    ``sigma_u_sq`` is the variance of the centroid coordinate
    ``x_u = (x_A + x_B + x_C) / sqrt(3)``; ``sigma_v_sq`` and ``sigma_w_sq``
    belong to the two relative coordinates. Momentum variances follow from
    minimum uncertainty, ``1 / (4 sigma^2)`` per principal axis.
    """

    sigma_u_sq: float
    sigma_v_sq: float
    sigma_w_sq: float

    def __post_init__(self):
        for name in ("sigma_u_sq", "sigma_v_sq", "sigma_w_sq"):
            _positive(name, getattr(self, name))

    @classmethod
    def symmetric(cls, sigma_u_sq: float, sigma_v_sq: float) -> "TripartiteGaussianState":
        return cls(sigma_u_sq, sigma_v_sq, sigma_v_sq)

    @property
    def is_symmetric(self) -> bool:
        return self.sigma_v_sq == self.sigma_w_sq

    @property
    def position_variances(self) -> np.ndarray:
        return np.array([self.sigma_u_sq, self.sigma_v_sq, self.sigma_w_sq])

    @property
    def momentum_variances(self) -> np.ndarray:
        return 1.0 / (4.0 * self.position_variances)

    @property
    def sigma_u(self) -> float:
        return math.sqrt(self.sigma_u_sq)

    @property
    def sigma_v(self) -> float:
        return math.sqrt(self.sigma_v_sq)

    @property
    def sigma_w(self) -> float:
        return math.sqrt(self.sigma_w_sq)


@dataclass(frozen=True)
class ExperimentParams:
    """Cascaded-SPDC source parameters (SI units).

    Poling periods are magnitudes; ``poling_sign_1``/``poling_sign_2`` give
    the direction in which each grating momentum enters the effective pump
    momentum. The default of -1 reproduces the quoted 2.60e7 rad/m.
    """

    lambda_pump: float = 516.67e-9
    n_pump: float = 2.240
    poling_period_1: float = 8.84e-6
    poling_period_2: float = 18.99e-6
    crystal_length_Lz: float = 3e-3
    pump_radius_sigma_p: float = 1e-3
    poling_sign_1: int = -1
    poling_sign_2: int = -1

    def __post_init__(self):
        _positive("lambda_pump", self.lambda_pump)
        _positive("crystal_length_Lz", self.crystal_length_Lz)
        if _finite("pump_radius_sigma_p", self.pump_radius_sigma_p) < 0:
            raise ValidationError("pump_radius_sigma_p must be >= 0")
        if _finite("n_pump", self.n_pump) < 1.0:
            raise ValidationError(f"n_pump must be >= 1, got {self.n_pump}")
        for name in ("poling_period_1", "poling_period_2"):
            value = float(getattr(self, name))
            # 0 or inf both mean "no poling"
            if math.isnan(value) or value < 0:
                raise ValidationError(f"{name} must be >= 0 (use the sign fields for direction)")
        for name in ("poling_sign_1", "poling_sign_2"):
            if getattr(self, name) not in (-1, 0, 1):
                raise ValidationError(f"{name} must be -1, 0 or +1")

    def replace(self, **changes) -> "ExperimentParams":
        from dataclasses import replace

        return replace(self, **changes)

    def as_dict(self) -> dict:
        from dataclasses import asdict

        return asdict(self)


class BoundMethod(str, enum.Enum):
    ENTROPIC = "entropic"
    VARIANCE = "variance"
    CLOSED_FORM = "closed_form"
    SAMPLED = "sampled"


@dataclass(frozen=True)
class BoundReport:
    """Certified lower bound on the tripartite entanglement of formation."""

    bound_gebits: float
    method: BoundMethod
    min_coeff_product: float
    h_x: Optional[float] = None
    h_k: Optional[float] = None
    sigma_x: Optional[float] = None
    sigma_k: Optional[float] = None
    standard_error: Optional[float] = None
    notes: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def certified(self) -> bool:
        """True when the bound is strictly positive."""
        return self.bound_gebits > 0.0

    @property
    def flags(self) -> tuple[str, ...]:
        flags = list(self.notes)
        if not self.certified:
            flags.append("no entanglement certified")
        return tuple(flags)

    def as_dict(self) -> dict:
        out = {
            "bound_gebits": self.bound_gebits,
            "method": self.method.value,
            "min_coeff_product": self.min_coeff_product,
            "h_x": self.h_x,
            "h_k": self.h_k,
            "sigma_x": self.sigma_x,
            "sigma_k": self.sigma_k,
            "standard_error": self.standard_error,
            "certified": self.certified,
            "flags": list(self.flags),
        }
        out.update(self.extra)
        return out


def as_triple(values: Sequence[float], name: str = "values") -> tuple[float, float, float]:
    if len(values) != 3:
        raise ValidationError(f"{name} must have three entries, got {len(values)}")
    return tuple(_finite(name, v) for v in values)
