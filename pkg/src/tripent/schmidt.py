"""Exact entanglement of the symmetric triple-Gaussian state and numerical oracles for it.

The reduced density operator of party A has a double-Gaussian kernel whose
spectrum is geometric, ``lambda_n = (2/(1+R)) q^n`` with ``q = (R-1)/(R+1)``.
The von Neumann entropy is then ``h2(lambda_0)/lambda_0``, which is the
exact E3F because the state is pure and symmetric between the parties.

Two checks in this module avoid the geometric formula. :func:`kernel_spectrum`
discretizes the kernel and diagonalizes it. :func:`schmidt_mode_overlap`
projects the wavefunction onto Hermite-Gaussian modes by quadrature.

Coordinates: ``x_p = (x_B + x_C)/sqrt(2)`` and ``x_m = (x_B - x_C)/sqrt(2)``.
With ``sigma_w = sigma_v`` the wavefunction factors as
``psi = N g(x_A, x_p) f(x_m)``, and that factorization is used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .core import GridError, QuadratureError, TripartiteGaussianState, ValidationError
from .entropy import binary_entropy

__all__ = [
    "SchmidtSpectrum",
    "MarginalKernel",
    "correlation_ratio",
    "marginal_eigenvalues",
    "exact_e3f",
    "exact_e3f_from_R",
    "state_for_ratio",
    "marginal_kernel",
    "kernel_spectrum",
    "kernel_correlation_ratio",
    "hermite_functions",
    "hermite_gaussian",
    "schmidt_sigma_A",
    "schmidt_mode_overlap",
    "naive_triple_overlap",
    "hermite_projection",
    "projection_table_polynomial",
    "projection_shape_parameters",
    "fit_projection_shape",
]

SQRT2 = math.sqrt(2.0)


def _check_variances(sigma_u_sq: float, sigma_v_sq: float) -> tuple[float, float]:
    su2, sv2 = float(sigma_u_sq), float(sigma_v_sq)
    if not (su2 > 0 and sv2 > 0) or not (math.isfinite(su2) and math.isfinite(sv2)):
        raise ValidationError(f"variances must be positive and finite, got {su2!r}, {sv2!r}")
    return su2, sv2


def correlation_ratio(sigma_u_sq: float, sigma_v_sq: float) -> float:
    """``R = (1/3) sqrt(5 + 2(su^4 + sv^4)/(su^2 sv^2))``; equals 1 only when su = sv."""
    su2, sv2 = _check_variances(sigma_u_sq, sigma_v_sq)
    t = su2 / sv2
    return math.sqrt(5.0 + 2.0 * (t + 1.0 / t)) / 3.0


def state_for_ratio(R: float, sigma_v_sq: float = 1.0) -> TripartiteGaussianState:
    """Symmetric state with ``sigma_u >= sigma_v`` whose correlation ratio is ``R``."""
    if R < 1:
        raise ValidationError("R must be >= 1")
    c = (9.0 * R * R - 5.0) / 2.0  # = t + 1/t
    t = (c + math.sqrt(max(c * c - 4.0, 0.0))) / 2.0
    return TripartiteGaussianState.symmetric(t * sigma_v_sq, sigma_v_sq)


@dataclass(frozen=True)
class SchmidtSpectrum:
    R: float
    lambdas: np.ndarray
    n_max: int

    @property
    def ratio(self) -> float:
        return (self.R - 1.0) / (self.R + 1.0)

    @property
    def lambda_0(self) -> float:
        return 2.0 / (1.0 + self.R)

    @property
    def tail_mass(self) -> float:
        """Probability beyond ``n_max``: ``ratio ** (n_max + 1)``."""
        return self.ratio ** (self.n_max + 1)


def marginal_eigenvalues(R: float, n_max: int) -> SchmidtSpectrum:
    """Geometric marginal spectrum ``lambda_n = (2/(1+R)) ((R-1)/(R+1))^n`` for ``n <= n_max``."""
    R = float(R)
    if not R >= 1.0 or not math.isfinite(R):
        raise ValidationError(f"correlation ratio must be >= 1, got {R!r}")
    if int(n_max) != n_max or n_max < 0:
        raise ValidationError("n_max must be a nonnegative integer")
    n = np.arange(int(n_max) + 1)
    q = (R - 1.0) / (R + 1.0)
    lambdas = (2.0 / (1.0 + R)) * q**n
    return SchmidtSpectrum(R, lambdas, int(n_max))


def exact_e3f_from_R(R: float) -> float:
    lam0 = marginal_eigenvalues(R, 0).lambda_0
    return binary_entropy(lam0) / lam0


def exact_e3f(sigma_u_sq: float, sigma_v_sq: float) -> float:
    """Exact E3F in gebits of the symmetric triple-Gaussian state (``sigma_w = sigma_v``).

    Asymmetric states are deliberately not accepted; the marginal-spectrum
    argument only covers the symmetric case.
    """
    return exact_e3f_from_R(correlation_ratio(sigma_u_sq, sigma_v_sq))


def schmidt_sigma_A(sigma_u_sq: float, sigma_v_sq: float) -> float:
    """Width parameter of the party-A Schmidt modes (not the std of x_A)."""
    su2, sv2 = _check_variances(sigma_u_sq, sigma_v_sq)
    return math.sqrt(math.sqrt(su2 * sv2)) * ((su2 + 2 * sv2) / (2 * su2 + sv2)) ** 0.25


@dataclass(frozen=True)
class MarginalKernel:
    """Position-space kernel ``eta(x, x')`` of party A's reduced density operator."""

    sigma_u_sq: float
    sigma_v_sq: float

    def __post_init__(self):
        _check_variances(self.sigma_u_sq, self.sigma_v_sq)

    @property
    def marginal_sigma(self) -> float:
        """Standard deviation of x_A, ``sqrt((su^2 + 2 sv^2)/3)``."""
        return math.sqrt((self.sigma_u_sq + 2 * self.sigma_v_sq) / 3.0)

    @property
    def traced_sigma(self) -> float:
        """Standard deviation of ``x_p = (x_B + x_C)/sqrt(2)``."""
        return math.sqrt((2 * self.sigma_u_sq + self.sigma_v_sq) / 3.0)

    @property
    def ridge_sigma(self) -> float:
        """Width along x_p of ``g(x, x_p)^2`` at fixed x (sets the traced-grid spacing)."""
        return 1.0 / math.sqrt(2.0 / (3.0 * self.sigma_u_sq) + 1.0 / (3.0 * self.sigma_v_sq))

    def __call__(self, x, xp):
        su2, sv2 = self.sigma_u_sq, self.sigma_v_sq
        x = np.asarray(x, dtype=float)
        xp = np.asarray(xp, dtype=float)
        s = su2 + 2 * sv2
        return (
            np.sqrt(3.0 / (2.0 * math.pi * s))
            * np.exp(-((x - xp) ** 2) / 24.0 * (1.0 / su2 + 2.0 / sv2))
            * np.exp(-9.0 * (x + xp) ** 2 / (24.0 * s))
        )

    # Pieces of the wavefunction psi = N g(x_A, x_p) f(x_m).
    @property
    def norm_sq(self) -> float:
        """``N^2 * integral f(x_m)^2 dx_m``, the constant in eta = c * int g g dx_p."""
        su, sv = math.sqrt(self.sigma_u_sq), math.sqrt(self.sigma_v_sq)
        n_sq = 1.0 / ((2 * math.pi) ** 1.5 * su * sv * sv)
        return n_sq * math.sqrt(2 * math.pi) * sv

    def partial_wavefunction(self, xa, xp):
        """``g(x_A, x_p)`` without normalization."""
        xa = np.asarray(xa, dtype=float)
        xp = np.asarray(xp, dtype=float)
        return np.exp(
            -((xa + SQRT2 * xp) ** 2) / (12.0 * self.sigma_u_sq)
            - (xa - xp / SQRT2) ** 2 / (6.0 * self.sigma_v_sq)
        )

    def wavefunction(self, xa, xb, xc):
        """Normalized triple-Gaussian ``psi(x_A, x_B, x_C)``."""
        xb = np.asarray(xb, dtype=float)
        xc = np.asarray(xc, dtype=float)
        xp = (xb + xc) / SQRT2
        xm = (xb - xc) / SQRT2
        su, sv = math.sqrt(self.sigma_u_sq), math.sqrt(self.sigma_v_sq)
        n = 1.0 / math.sqrt((2 * math.pi) ** 1.5 * su * sv * sv)
        return n * self.partial_wavefunction(xa, xp) * np.exp(-(xm**2) / (4.0 * self.sigma_v_sq))

    @cached_property
    def quadratic_form(self) -> tuple[float, float, float]:
        """``(A, B, C)`` with ``g = exp(-A x^2 - 2 B x x_p - C x_p^2)``."""
        su2, sv2 = self.sigma_u_sq, self.sigma_v_sq
        a = 1.0 / (12 * su2) + 1.0 / (6 * sv2)
        b = (SQRT2 / (6 * su2) - SQRT2 / (6 * sv2)) / 2.0
        c = 1.0 / (6 * su2) + 1.0 / (12 * sv2)
        return a, b, c


def marginal_kernel(sigma_u_sq: float, sigma_v_sq: float) -> MarginalKernel:
    return MarginalKernel(float(sigma_u_sq), float(sigma_v_sq))


def kernel_spectrum(kernel: MarginalKernel, grid_points: int = 1024, extent: Optional[float] = None,
                    method: str = "factored", n_eigs: Optional[int] = None,
                    trace_tol: float = 1e-6) -> np.ndarray:
    """Eigenvalues of party A's reduced density operator from a discretized kernel.

    Args:
        kernel: the marginal kernel to diagonalize.
        grid_points: number of x_A grid points (at least 256).
        extent: half-width of the x_A grid in metres; defaults to ten
            marginal standard deviations and must cover at least eight.
        method: ``"direct"`` builds ``K_ij = eta(x_i, x_j) dx`` and calls a
            symmetric eigensolver. ``"factored"`` writes ``K = G G^T`` with
            ``G_ij = sqrt(c dx dp) g(x_i, p_j)`` from the partial trace over
            B and C, and squares the singular values of ``G``. Singular values
            carry absolute error relative to ``sqrt(lambda)``, so eigenvalues
            down to ~1e-20 keep full relative accuracy. The direct route
            loses them below ~1e-10.
        n_eigs: truncate the returned list.
        trace_tol: allowed deviation of the eigenvalue sum from one.

    Returns:
        Eigenvalues in descending order, clipped at zero.

    Raises:
        GridError: if the eigenvalues fail to sum to one within ``trace_tol``.
    """
    if grid_points < 256:
        raise GridError("need at least 256 grid points")
    sigma = kernel.marginal_sigma
    if extent is None:
        extent = 10.0 * sigma
    if extent < 8.0 * sigma * (1 - 1e-12):
        raise GridError(f"extent {extent:.4g} covers fewer than 8 marginal standard deviations")
    x = np.linspace(-extent, extent, grid_points)
    dx = x[1] - x[0]
    if method == "direct":
        k = kernel(x[:, None], x[None, :]) * dx
        eigs = np.linalg.eigvalsh(k)[::-1]
    elif method == "factored":
        p_extent = extent * kernel.traced_sigma / sigma
        n_p = max(grid_points, int(math.ceil(2 * p_extent / (0.5 * kernel.ridge_sigma))) + 1)
        p = np.linspace(-p_extent, p_extent, n_p)
        dp = p[1] - p[0]
        g = kernel.partial_wavefunction(x[:, None], p[None, :]) * math.sqrt(kernel.norm_sq * dx * dp)
        eigs = np.linalg.svd(g, compute_uv=False) ** 2
    else:
        raise ValidationError(f"unknown method {method!r}")
    eigs = np.clip(eigs, 0.0, None)
    total = eigs.sum()
    if abs(total - 1.0) > trace_tol:
        raise GridError(f"eigenvalues sum to {total:.10f}; grid is inadequate")
    return eigs if n_eigs is None else eigs[:n_eigs]


def kernel_correlation_ratio(kernel: MarginalKernel, grid_points: int = 801) -> float:
    """``sigma(x + x') / sigma(x - x')`` with ``eta`` itself as the weight.

    Evaluated by brute-force 2D quadrature on a grid aligned with the
    (x + x', x - x') axes. It does not use the closed-form ratio.
    """
    sigma = kernel.marginal_sigma
    s = np.linspace(-14 * sigma, 14 * sigma, grid_points)
    # the x - x' width can be far smaller than sigma; find it from the kernel's own decay
    probe = kernel(np.linspace(0, 2 * sigma, 20001) / 2, -np.linspace(0, 2 * sigma, 20001) / 2)
    d_scale = 2 * sigma * (np.argmax(probe < probe[0] * math.exp(-0.5)) / 20000.0)
    d_scale = d_scale if d_scale > 0 else 2 * sigma
    d = np.linspace(-14 * d_scale, 14 * d_scale, grid_points)
    S, D = np.meshgrid(s, d, indexing="ij")
    w = kernel((S + D) / 2, (S - D) / 2)
    total = w.sum()
    var_s = (w * S**2).sum() / total
    var_d = (w * D**2).sum() / total
    return math.sqrt(var_s / var_d)


def hermite_functions(n_max: int, y) -> np.ndarray:
    """Orthonormal Hermite functions ``h_0..h_n_max`` at ``y`` via the three-term recurrence.

    Returns an array of shape ``(n_max + 1,) + y.shape``.
    """
    y = np.asarray(y, dtype=float)
    out = np.empty((n_max + 1,) + y.shape)
    out[0] = math.pi**-0.25 * np.exp(-(y**2) / 2.0)
    if n_max >= 1:
        out[1] = SQRT2 * y * out[0]
    for k in range(1, n_max):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * y * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_gaussian(n: int, x, sigma_A: float) -> np.ndarray:
    """Normalized Hermite-Gaussian mode with ``|phi_0|^2`` of standard deviation ``sigma_A``."""
    x = np.asarray(x, dtype=float)
    y = x / (sigma_A * SQRT2)
    return hermite_functions(n, y)[n] / math.sqrt(sigma_A * SQRT2)


def _projection_quadrature(kernel: MarginalKernel, n: int, sigma_A: float, n_nodes: int) -> float:
    """lambda_n = c * int dp [int dx phi_n(x) g(x, p)]^2 by nested Gauss-Hermite."""
    a, b, c = kernel.quadratic_form
    a_full = a + 1.0 / (4.0 * sigma_A**2)
    t, wt = hermgauss(n_nodes)
    # outer: the projection decays like exp(-e p^2); weight exp(-2 e p^2)
    e = c - b * b / a_full
    p = t / math.sqrt(2 * e)
    # inner: nodes centred on the x-Gaussian of phi_n * g at each p
    centers = -b * p / a_full
    x = centers[:, None] + t[None, :] / math.sqrt(a_full)
    integrand = hermite_gaussian(n, x, sigma_A) * kernel.partial_wavefunction(x, p[:, None])
    inner = (integrand * np.exp(a_full * (x - centers[:, None]) ** 2) * wt).sum(axis=1) / math.sqrt(a_full)
    outer = (inner**2 * np.exp(2 * e * p**2) * wt).sum() / math.sqrt(2 * e)
    return kernel.norm_sq * outer


def schmidt_mode_overlap(n: int, sigma_u_sq: float, sigma_v_sq: float, n_nodes: Optional[int] = None,
                         tol: float = 1e-6) -> float:
    """Schmidt coefficient ``sqrt(lambda_n)`` by projecting psi onto the n-th A mode.

    Computes the norm over (x_B, x_C) of ``int phi_n(x_A) psi dx_A``, where
    ``phi_n`` is the Hermite-Gaussian of width :func:`schmidt_sigma_A`. The
    quadrature is repeated with twice the nodes. A relative disagreement
    above ``tol`` raises :class:`QuadratureError`.
    """
    if int(n) != n or n < 0:
        raise ValidationError("n must be a nonnegative integer")
    if n > 30:
        raise ValidationError("mode order above 30 is outside the supported range")
    kernel = marginal_kernel(sigma_u_sq, sigma_v_sq)
    sigma_A = schmidt_sigma_A(sigma_u_sq, sigma_v_sq)
    nodes = n_nodes or max(32, 2 * n + 8)
    coarse = _projection_quadrature(kernel, n, sigma_A, nodes)
    fine = _projection_quadrature(kernel, n, sigma_A, 2 * nodes)
    scale = max(abs(fine), 1e-300)
    # both vanish identically in the product-state limit
    if abs(fine - coarse) > tol * scale and abs(fine - coarse) > 1e-15:
        raise QuadratureError(f"mode {n}: quadrature refinements disagree ({coarse!r} vs {fine!r})")
    return math.sqrt(max(fine, 0.0))


def naive_triple_overlap(n: int, sigma_u_sq: float, sigma_v_sq: float, half_width: float = 10.0,
                         points: int = 161) -> float:
    """Overlap of psi with ``phi_n(x_A) phi_n(x_B) phi_n(x_C)`` on a 3D grid.

    This is the coefficient a GHZ-like Hermite-mode expansion would need. It
    is not the Schmidt coefficient; it exists to demonstrate that.
    """
    kernel = marginal_kernel(sigma_u_sq, sigma_v_sq)
    sigma_A = schmidt_sigma_A(sigma_u_sq, sigma_v_sq)
    scale = max(kernel.marginal_sigma, sigma_A * math.sqrt(2 * n + 1))
    x = np.linspace(-half_width * scale, half_width * scale, points)
    dx = x[1] - x[0]
    phi = hermite_gaussian(n, x, sigma_A)
    total = 0.0
    xb, xc = np.meshgrid(x, x, indexing="ij")
    phibc = phi[:, None] * phi[None, :]
    for i, xa in enumerate(x):
        total += phi[i] * np.sum(kernel.wavefunction(xa, xb, xc) * phibc)
    return float(total * dx**3)


def hermite_projection(n: int, xp, sigma_u_sq: float, sigma_v_sq: float, n_nodes: int = 96) -> np.ndarray:
    """``int phi_n(x_A) g(x_A, x_p) dx_A`` at each ``x_p`` (Gauss-Hermite in x_A)."""
    kernel = marginal_kernel(sigma_u_sq, sigma_v_sq)
    sigma_A = schmidt_sigma_A(sigma_u_sq, sigma_v_sq)
    xp = np.atleast_1d(np.asarray(xp, dtype=float))
    a, b, _ = kernel.quadratic_form
    a_full = a + 1.0 / (4.0 * sigma_A**2)
    t, wt = hermgauss(n_nodes)
    centers = -b * xp / a_full
    x = centers[:, None] + t[None, :] / math.sqrt(a_full)
    f = hermite_gaussian(n, x, sigma_A) * kernel.partial_wavefunction(x, xp[:, None])
    return (f * np.exp(a_full * (x - centers[:, None]) ** 2) * wt).sum(axis=1) / math.sqrt(a_full)


def projection_table_polynomial(n: int, s, u):
    """Tabulated polynomials ``P_0 .. P_7`` of the projection, up to a per-order constant.

    ``P_7`` uses ``84 s^4 u`` for its middle term. That is the only choice
    consistent with the Hermite pattern the other orders follow.
    """
    s = np.asarray(s, dtype=float)
    r = math.sqrt
    table = {
        0: lambda: r(6.0) + 0.0 * s,
        1: lambda: 2.0 * r(3.0) * s,
        2: lambda: r(3.0) * (2 * s**2 - u),
        3: lambda: r(2.0) * s * (2 * s**2 - 3 * u),
        4: lambda: 0.5 * (4 * s**4 - 12 * s**2 * u + 3 * u**2),
        5: lambda: s / r(10.0) * (4 * s**4 - 20 * s**2 * u + 15 * u**2),
        6: lambda: (8 * s**6 - 60 * s**4 * u + 90 * s**2 * u**2 - 15 * u**3) / (2 * r(30.0)),
        7: lambda: s / (2 * r(105.0)) * (8 * s**6 - 84 * s**4 * u + 210 * s**2 * u**2 - 105 * u**3),
    }
    if n not in table:
        raise ValidationError("tabulated polynomials exist for orders 0-7 only")
    return table[n]()


def projection_shape_parameters(sigma_u_sq: float, sigma_v_sq: float, xp, form: str = "derived"):
    """Gaussian exponent ``E`` and polynomial arguments ``(s, u)`` for the projection.

    ``form="derived"`` completes the square in ``x_A``. ``form="printed"``
    uses the closed-form expressions as printed alongside the table
    (``s = (gamma^2 - 1) x_p sigma_A`` and friends). Those do not reproduce
    the numerical projection and are kept only for comparison.
    """
    kernel = marginal_kernel(sigma_u_sq, sigma_v_sq)
    sigma_A = schmidt_sigma_A(sigma_u_sq, sigma_v_sq)
    xp = np.asarray(xp, dtype=float)
    if form == "derived":
        a, b, c = kernel.quadratic_form
        a_full = a + 1.0 / (4.0 * sigma_A**2)
        alpha = 1.0 / (sigma_A * SQRT2)
        return c - b * b / a_full, -alpha * b * xp / a_full, 1.0 - alpha**2 / a_full
    if form == "printed":
        sv2 = sigma_v_sq
        gamma = math.sqrt(sigma_u_sq / sigma_v_sq)
        g2 = gamma * gamma
        e = (3 * sigma_A**2 + (2 + g2) * sv2) / ((1 + 2 * g2) * sigma_A**2 + 3 * g2 * sv2)
        s = (g2 - 1) * xp * sigma_A
        u = 1 + 2 * g2 * sigma_A**4 - 9 * g2 * g2 * sv2 * sv2
        return e, s, u
    raise ValidationError(f"unknown form {form!r}")


def fit_projection_shape(n: int, sigma_u_sq: float, sigma_v_sq: float, xp=None,
                         form: str = "derived") -> tuple[float, float]:
    """Least-squares constant ``c`` with projection ~ ``c exp(-E x_p^2) P_n(s, u)``.

    Returns ``(c, residual)`` where the residual is the max absolute misfit
    relative to the largest projected value.
    """
    if xp is None:
        sigma = marginal_kernel(sigma_u_sq, sigma_v_sq).traced_sigma
        xp = np.linspace(-1.5 * sigma, 1.5 * sigma, 13)
    xp = np.asarray(xp, dtype=float)
    proj = hermite_projection(n, xp, sigma_u_sq, sigma_v_sq)
    e, s, u = projection_shape_parameters(sigma_u_sq, sigma_v_sq, xp, form)
    y = proj * np.exp(e * xp**2)
    basis = projection_table_polynomial(n, s, u)
    c = float(np.dot(y, basis) / np.dot(basis, basis))
    residual = float(np.max(np.abs(y - c * basis)) / np.max(np.abs(y)))
    return c, residual
