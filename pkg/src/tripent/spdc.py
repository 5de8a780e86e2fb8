"""Transverse triphoton state from cascaded SPDC, one transverse axis at a time.

The full amplitude is a pump envelope times a sinc phase-matching function
whose argument is a quadratic form. In the rotated basis

    k_u = (k1 + k3 + k4) / sqrt(3)
    k_v = (2 / sqrt(6)) * (-k1 + (k3 + k4) / 2)
    k_w = (k3 - k4) / sqrt(2)

that form is diagonal, ``a * (4 k_u^2 + k_v^2 + k_w^2)``, and replacing
``sinc(y)`` by ``exp(-(8/9) y)`` gives a triple-Gaussian state with position
variances ``32a/9 + 3 sigma_p^2`` (u) and ``8a/9`` (v, w).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import simpson, trapezoid

from .core import (
    ExperimentParams,
    GridError,
    PhaseMatchError,
    TripartiteGaussianState,
    ValidationError,
)
from .entropy import CovarianceMatrix3

__all__ = [
    "PhaseMatchSolution",
    "SincTriphotonModel",
    "SincWidthResult",
    "ROTATION",
    "GAUSSIAN_FIT_CONSTANT",
    "effective_pump_momentum",
    "poling_period",
    "wavevector",
    "triphoton_sinc_amplitude",
    "gaussian_triphoton_state",
    "rotate_to_principal",
    "covariance_matrices",
    "sinc_width_check",
    "congruent_ln_extraordinary_index",
    "load_dispersion_table",
]

# Rows are the unit vectors of (u, v, w) expressed in party coordinates (1, 3, 4).
ROTATION = np.array(
    [
        [1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0), 1.0 / math.sqrt(3.0)],
        [-2.0 / math.sqrt(6.0), 1.0 / math.sqrt(6.0), 1.0 / math.sqrt(6.0)],
        [0.0, 1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0)],
    ]
)

# sinc(y) ~ exp(-GAUSSIAN_FIT_CONSTANT * y); fixed by the 32a/9 and 8a/9 widths.
GAUSSIAN_FIT_CONSTANT = 8.0 / 9.0


@dataclass(frozen=True)
class PhaseMatchSolution:
    k_pump: float
    k_poling_1: float
    k_poling_2: float
    k_p_tilde: float
    crystal_length_Lz: float

    @property
    def a_param(self) -> float:
        """Sinc quadratic-form coefficient ``3 L_z / (4 k_p_tilde)`` in m^2."""
        return 3.0 * self.crystal_length_Lz / (4.0 * self.k_p_tilde)

    @classmethod
    def from_k_p_tilde(cls, k_p_tilde: float, crystal_length_Lz: float) -> "PhaseMatchSolution":
        if not k_p_tilde > 0:
            raise PhaseMatchError(f"k_p_tilde must be positive, got {k_p_tilde!r}")
        if not crystal_length_Lz > 0:
            raise ValidationError("crystal length must be positive")
        return cls(float(k_p_tilde), 0.0, 0.0, float(k_p_tilde), float(crystal_length_Lz))


def _grating_momentum(period: float, sign: int) -> float:
    if period == 0 or math.isinf(period) or sign == 0:
        return 0.0
    return sign * 2.0 * math.pi / period


def effective_pump_momentum(params: ExperimentParams) -> PhaseMatchSolution:
    """Effective pump momentum including both grating contributions.

    The grating momenta enter with the signs stored on ``params`` (default
    negative, i.e. ``k_p - 2pi/L1 - 2pi/L2``).
    """
    k_pump = 2.0 * math.pi * params.n_pump / params.lambda_pump
    k1 = _grating_momentum(params.poling_period_1, params.poling_sign_1)
    k2 = _grating_momentum(params.poling_period_2, params.poling_sign_2)
    k_tilde = k_pump + k1 + k2
    if not k_tilde > 0:
        raise PhaseMatchError(f"effective pump momentum {k_tilde:.4g} rad/m is not positive")
    return PhaseMatchSolution(k_pump, k1, k2, k_tilde, params.crystal_length_Lz)


def wavevector(wavelength: float, index: float) -> float:
    """``2*pi*n/lambda`` in rad/m."""
    return 2.0 * math.pi * index / wavelength


def poling_period(k_pump: float, k_signal: float, k_idler: float) -> float:
    """Collinear quasi-phase-matching period ``2*pi / (k_p - k_s - k_i)``.

    Raises:
        PhaseMatchError: if the mismatch is zero or negative (either nothing
            to compensate or a backward grating would be needed).
    """
    mismatch = k_pump - k_signal - k_idler
    if not mismatch > 0:
        raise PhaseMatchError(
            f"phase mismatch {mismatch:.6g} rad/m must be positive for a forward grating"
        )
    return 2.0 * math.pi / mismatch


def congruent_ln_extraordinary_index(wavelength: Union[float, np.ndarray]):
    """Extraordinary index of congruent LiNbO3 at room temperature.

    Three-term Sellmeier fit of Zelmon, Small & Jundt (JOSA B 14, 3319,
    1997); ``wavelength`` in metres, valid roughly 0.4-5 um.
    """
    lam_um_sq = (np.asarray(wavelength, dtype=float) * 1e6) ** 2
    n_sq = (
        1.0
        + 2.9804 * lam_um_sq / (lam_um_sq - 0.02047)
        + 0.5981 * lam_um_sq / (lam_um_sq - 0.0666)
        + 8.9543 * lam_um_sq / (lam_um_sq - 416.08)
    )
    return np.sqrt(n_sq)


def load_dispersion_table(path) -> Callable[[float], float]:
    """Read a ``wavelength_nm index`` table and return ``n(wavelength_m)``.

    Blank lines and ``#`` comments are skipped; columns may be separated by
    whitespace or commas. Values between rows are linearly interpolated and
    wavelengths outside the table raise.
    """
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 'wavelength_nm index'")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric entry") from None
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least two rows")
    table = np.array(sorted(rows))
    if np.any(np.diff(table[:, 0]) <= 0):
        raise ValidationError(f"{path}: duplicate wavelengths")
    lam_nm, n = table[:, 0], table[:, 1]

    def index(wavelength: float) -> float:
        w = float(wavelength) * 1e9
        if not lam_nm[0] <= w <= lam_nm[-1]:
            raise ValidationError(f"wavelength {w:.2f} nm outside table range")
        return float(np.interp(w, lam_nm, n))

    return index


@dataclass(frozen=True)
class SincTriphotonModel:
    """One-axis triphoton amplitude evaluated on a rotated-coordinate grid.

    ``shape`` selects the phase-matching factor: ``"sinc"`` is the full
    model and ``"gaussian"`` substitutes ``exp(-fit_constant * y)``, which is
    useful as a self-check of the grid integration.
    """

    a_param: float
    sigma_p: float
    extent: tuple[float, float, float] = (8.0, 8.0, 8.0)
    resolution: tuple[int, int, int] = (96, 96, 96)
    shape: str = "sinc"
    fit_constant: float = GAUSSIAN_FIT_CONSTANT

    def __post_init__(self):
        if not self.a_param > 0:
            raise ValidationError("a_param must be positive")
        if self.sigma_p < 0:
            raise ValidationError("sigma_p must be nonnegative")
        if self.shape not in ("sinc", "gaussian"):
            raise ValidationError(f"unknown shape {self.shape!r}")

    @classmethod
    def from_phase(cls, phase: PhaseMatchSolution, sigma_p: float, **kw) -> "SincTriphotonModel":
        return cls(a_param=phase.a_param, sigma_p=sigma_p, **kw)

    def gaussian_state(self) -> TripartiteGaussianState:
        c = self.fit_constant
        return TripartiteGaussianState(4 * c * self.a_param + 3 * self.sigma_p**2, c * self.a_param, c * self.a_param)

    def nominal_momentum_sigmas(self) -> np.ndarray:
        """Per-axis momentum std devs of the Gaussian reduction (grid scale)."""
        return np.sqrt(self.gaussian_state().momentum_variances)

    def amplitude(self, k1, k3, k4):
        return triphoton_sinc_amplitude(k1, k3, k4, self)

    def amplitude_rotated(self, ku, kv, kw):
        # k1 + k3 + k4 = sqrt(3) k_u, and the quadratic form is diagonal here
        ku, kv, kw = (np.asarray(v, dtype=float) for v in (ku, kv, kw))
        pump = np.exp(-3.0 * self.sigma_p**2 * ku**2)
        y = self.a_param * (4.0 * ku**2 + kv**2 + kw**2)
        return pump * self._phase_matching(y)

    def _phase_matching(self, y):
        if self.shape == "gaussian":
            return np.exp(-self.fit_constant * y)
        return np.sinc(y / math.pi)


def triphoton_sinc_amplitude(k1, k3, k4, model: SincTriphotonModel):
    """Unnormalized amplitude ``alpha_p(k1+k3+k4) * sinc(a * S)``.

    ``S = (k3+k4)^2 + (k1+k3)^2 + (k1+k4)^2`` and the pump envelope is
    ``exp(-sigma_p^2 q^2)``; ``sinc(0) = 1``.
    """
    k1, k3, k4 = (np.asarray(v, dtype=float) for v in (k1, k3, k4))
    q = k1 + k3 + k4
    s = (k3 + k4) ** 2 + (k1 + k3) ** 2 + (k1 + k4) ** 2
    return np.exp(-model.sigma_p**2 * q**2) * model._phase_matching(model.a_param * s)


def gaussian_triphoton_state(phase: Union[PhaseMatchSolution, float], sigma_p: float,
                             fit_constant: float = GAUSSIAN_FIT_CONSTANT) -> TripartiteGaussianState:
    """Principal position variances of the Gaussian-reduced triphoton state.

    ``phase`` may be a :class:`PhaseMatchSolution` or the bare ``a_param``.
    """
    a = phase.a_param if isinstance(phase, PhaseMatchSolution) else float(phase)
    if not a > 0:
        raise ValidationError("a_param must be positive")
    if sigma_p < 0 or not math.isfinite(sigma_p):
        raise ValidationError("sigma_p must be finite and nonnegative")
    c = fit_constant
    return TripartiteGaussianState(4.0 * c * a + 3.0 * sigma_p**2, c * a, c * a)


def rotate_to_principal(k1, k3, k4, inverse: bool = False):
    """Map party coordinates to ``(k_u, k_v, k_w)``; ``inverse=True`` maps back.

    Works elementwise on arrays. The map is orthogonal, so the inverse is the
    transpose.
    """
    stacked = np.stack([np.asarray(v, dtype=float) for v in (k1, k3, k4)])
    m = ROTATION.T if inverse else ROTATION
    out = np.tensordot(m, stacked, axes=1)
    return out[0], out[1], out[2]


def covariance_matrices(state: TripartiteGaussianState) -> tuple[CovarianceMatrix3, CovarianceMatrix3]:
    """Position and momentum covariances in party coordinates (A, B, C)."""
    sx = ROTATION.T @ np.diag(state.position_variances) @ ROTATION
    sk = ROTATION.T @ np.diag(state.momentum_variances) @ ROTATION
    return CovarianceMatrix3(sx), CovarianceMatrix3(sk)


@dataclass(frozen=True)
class SincWidthResult:
    variances: np.ndarray  # along (k_u, k_v, k_w), rad^2/m^2
    gaussian_variances: np.ndarray
    norm: float
    fidelity: float  # |<psi | psi_gauss>|^2 on the grid

    @property
    def ratios(self) -> np.ndarray:
        return self.variances / self.gaussian_variances


def sinc_width_check(model: SincTriphotonModel, norm_tol: float = 1e-6) -> SincWidthResult:
    """Integrate ``|psi|^2`` on a rotated-coordinate grid and return its variances.

    The grid spans ``+/- extent[i]`` nominal standard deviations of the
    Gaussian reduction along each principal axis. The norm is computed with
    both the trapezoid and Simpson rules; if they disagree by more than
    ``norm_tol`` the grid is too coarse.

    The sinc tails decay as ``1/|k|^4`` in the v-w plane, so the v and w
    variances keep growing slowly with ``extent``. They are truncated
    moments, not converged ones.
    """
    if min(model.resolution) < 64:
        raise GridError("grid resolution must be at least 64 points per axis")
    if min(model.extent) < 6:
        raise GridError("grid extent must be at least 6 nominal sigma per axis")
    sig = model.nominal_momentum_sigmas()
    ku_axis, kv_axis, kw_axis = (np.linspace(-e * s, e * s, n)
                                 for e, s, n in zip(model.extent, sig, model.resolution))
    ref = SincTriphotonModel(model.a_param, model.sigma_p, model.extent, model.resolution, "gaussian",
                             model.fit_constant)
    kv, kw = np.meshgrid(kv_axis, kw_axis, indexing="ij")

    def plane(values, rule):
        return rule(rule(values, x=kw_axis, axis=1), x=kv_axis, axis=0)

    # integrate one u-slice at a time to keep memory at O(n_v * n_w)
    rows = np.empty((ku_axis.size, 7))
    for i, ku in enumerate(ku_axis):
        psi = model.amplitude_rotated(ku, kv, kw)
        psi_g = ref.amplitude_rotated(ku, kv, kw)
        dens = psi**2
        rows[i] = (
            plane(dens, trapezoid), plane(dens, simpson), plane(dens, trapezoid) * ku**2,
            plane(dens * kv**2, trapezoid), plane(dens * kw**2, trapezoid),
            plane(psi * psi_g, trapezoid), plane(psi_g**2, trapezoid),
        )
    norm, check, mu, mv, mw, overlap, norm_g = trapezoid(rows, x=ku_axis, axis=0)
    check = simpson(rows[:, 1], x=ku_axis)
    if not math.isclose(norm, check, rel_tol=norm_tol):
        raise GridError(
            f"grid integration unstable (trapezoid {norm:.10g} vs Simpson {check:.10g}); refine the grid"
        )
    variances = np.array([mu, mv, mw]) / norm
    fidelity = overlap**2 / (norm * norm_g)
    return SincWidthResult(variances, sig**2, float(norm), float(fidelity))
