"""Entanglement witnesses and lower bounds on the tripartite entanglement of formation.

Every bound here is returned unclamped. A negative value means nothing was
certified, and the report says so through ``BoundReport.certified``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    GHZ_LIKE_COEFFS,
    BoundMethod,
    BoundReport,
    CoefficientVectors,
    ExperimentParams,
    TripartiteGaussianState,
    ValidationError,
    as_triple,
    min_coefficient_product,
)
from .entropy import gaussian_conditional_entropy, gaussian_entropy
from .spdc import ROTATION, covariance_matrices, effective_pump_momentum

__all__ = [
    "WitnessTriple",
    "bipartite_conditional_witnesses",
    "e3f_entropic_bound",
    "e3f_variance_bound",
    "energy_time_bound",
    "spdc_closed_form_bound",
    "combination_variances",
    "gaussian_pipeline_bound",
    "gaussian_witnesses",
    "SHALM_SIGMA_T",
    "SHALM_SIGMA_OMEGA",
]

LOG2_2PI = math.log2(2.0 * math.pi)
LOG2_E = math.log2(math.e)

# Published energy-time figures of a three-photon timing experiment.
SHALM_SIGMA_T = 3.7e-10  # s, max sigma(t2 - t1)
SHALM_SIGMA_OMEGA = 3.77e7  # rad/s, pump bandwidth


@dataclass(frozen=True)
class WitnessTriple:
    """Left-hand sides of the three bipartition witnesses, in bits.

    A positive entry certifies entanglement across the corresponding cut
    (A|BC, B|CA, C|AB) and lower-bounds that party's marginal entropy for
    pure states.
    """

    w_A: float
    w_B: float
    w_C: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w_A, self.w_B, self.w_C)

    @property
    def certified(self) -> tuple[bool, bool, bool]:
        return tuple(w > 0 for w in self.as_tuple())


def bipartite_conditional_witnesses(hx_cond: Sequence[float], hk_cond: Sequence[float]) -> WitnessTriple:
    """``w_i = log2(2 pi) - h(x_i | rest) - h(k_i | rest)`` for each party."""
    hx = as_triple(hx_cond, "hx_cond")
    hk = as_triple(hk_cond, "hk_cond")
    return WitnessTriple(*(LOG2_2PI - a - b for a, b in zip(hx, hk)))


def gaussian_witnesses(state: TripartiteGaussianState) -> WitnessTriple:
    """Witnesses evaluated with exact Gaussian conditional entropies."""
    cov_x, cov_k = covariance_matrices(state)
    hx = [gaussian_conditional_entropy(cov_x, i) for i in range(3)]
    hk = [gaussian_conditional_entropy(cov_k, i) for i in range(3)]
    return bipartite_conditional_witnesses(hx, hk)


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite")
    return value


def e3f_entropic_bound(h_x_combo: float, h_k_combo: float,
                       coeffs: CoefficientVectors = GHZ_LIKE_COEFFS) -> BoundReport:
    """``log2(2 pi m) - h(eta . x) - h(beta . k)`` with ``m`` the min coefficient product.

    Args:
        h_x_combo: differential entropy (bits) of ``eta_A x_A + eta_B x_B + eta_C x_C``.
        h_k_combo: differential entropy (bits) of ``beta_A k_A + beta_B k_B + beta_C k_C``.
        coeffs: the coefficient vectors used to form the two combinations.
    """
    m = min_coefficient_product(coeffs)
    h_x = _finite("h_x_combo", h_x_combo)
    h_k = _finite("h_k_combo", h_k_combo)
    bound = math.log2(2.0 * math.pi * m) - h_x - h_k
    return BoundReport(bound, BoundMethod.ENTROPIC, m, h_x=h_x, h_k=h_k)


def e3f_variance_bound(sigma_x_combo: float, sigma_k_combo: float,
                       coeffs: CoefficientVectors = GHZ_LIKE_COEFFS) -> BoundReport:
    """Variance form of the bound, ``-log2(e sigma_x sigma_k / m)``.

    Uses the fact that a Gaussian maximizes entropy at fixed variance, so it
    never exceeds the entropic bound for the same combinations.
    """
    sx = _finite("sigma_x_combo", sigma_x_combo)
    sk = _finite("sigma_k_combo", sigma_k_combo)
    if sx <= 0 or sk <= 0:
        raise ValidationError("standard deviations must be positive")
    m = min_coefficient_product(coeffs)
    bound = -(LOG2_E + math.log2(sx) + math.log2(sk) - math.log2(m))
    return BoundReport(bound, BoundMethod.VARIANCE, m, sigma_x=sx, sigma_k=sk)


def energy_time_bound(sigma_t: float = SHALM_SIGMA_T, sigma_omega: float = SHALM_SIGMA_OMEGA) -> BoundReport:
    """Energy-time bound using ``sigma(t_2 - t_1)`` as a stand-in for the centroid-difference spread.

    The stand-in ``sigma(t_A - (t_B + t_C)/2) ~ sigma(t_2 - t_1)`` is an
    approximation, and the report carries a note saying so.
    """
    report = e3f_variance_bound(sigma_t, sigma_omega, GHZ_LIKE_COEFFS)
    return BoundReport(
        report.bound_gebits,
        BoundMethod.VARIANCE,
        report.min_coeff_product,
        sigma_x=report.sigma_x,
        sigma_k=report.sigma_k,
        notes=("approximation: sigma(t2-t1) substituted for sigma(tA-(tB+tC)/2)",),
        extra={"pair": "time_frequency"},
    )


def spdc_closed_form_bound(params: ExperimentParams, k_p_tilde: Optional[float] = None) -> BoundReport:
    """Closed-form bound for the Gaussian-reduced cascaded-SPDC state, per transverse axis.

    ``0.5*log2(16 + 18 sigma_p^2 k_p_tilde / L_z) - log2(3 sqrt(2) e)``.
    When ``k_p_tilde`` is omitted it is computed from ``params``.
    """
    if k_p_tilde is None:
        k_p_tilde = effective_pump_momentum(params).k_p_tilde
    lz = params.crystal_length_Lz
    sp = params.pump_radius_sigma_p
    if not k_p_tilde > 0:
        raise ValidationError("k_p_tilde must be positive")
    if not lz > 0:
        raise ValidationError("crystal length must be positive")
    bound = 0.5 * math.log2(16.0 + 18.0 * sp**2 * k_p_tilde / lz) - math.log2(3.0 * math.sqrt(2.0) * math.e)
    return BoundReport(
        bound,
        BoundMethod.CLOSED_FORM,
        min_coefficient_product(GHZ_LIKE_COEFFS),
        notes=("per transverse dimension",),
        extra={"k_p_tilde": float(k_p_tilde), "sigma_p": sp, "crystal_length_Lz": lz},
    )


def combination_variances(state: TripartiteGaussianState,
                          coeffs: CoefficientVectors = GHZ_LIKE_COEFFS) -> tuple[float, float]:
    """Variances of ``eta . x`` and ``beta . k`` for a triple-Gaussian state.

    Equal to ``eta^T Sigma_x eta`` with the party-coordinate covariance, but
    evaluated as ``sum_j (R eta)_j^2 sigma_j^2`` on the principal axes. The
    matrix form cancels entries of order ``sigma_u^2`` to leave terms of
    order ``sigma_v^2`` and loses ``log10(sigma_u^2/sigma_v^2)`` digits.
    """
    eta = ROTATION @ np.asarray(coeffs.eta)
    beta = ROTATION @ np.asarray(coeffs.beta)
    return (math.fsum(eta**2 * state.position_variances),
            math.fsum(beta**2 * state.momentum_variances))


def gaussian_pipeline_bound(state: TripartiteGaussianState,
                            coeffs: CoefficientVectors = GHZ_LIKE_COEFFS) -> BoundReport:
    """Entropic bound computed generically: state, covariances, combination entropies."""
    var_x, var_k = combination_variances(state, coeffs)
    return e3f_entropic_bound(gaussian_entropy(var_x), gaussian_entropy(var_k), coeffs)

