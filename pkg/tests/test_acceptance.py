"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (with wall time against its budget) that
the terminal summary prints at the end of the run. Tolerances and runtime
budgets are pinned here and must not be loosened.
"""

import itertools
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from tripent.bounds import (
    combination_variances,
    e3f_entropic_bound,
    e3f_variance_bound,
    energy_time_bound,
    gaussian_pipeline_bound,
    spdc_closed_form_bound,
)
from tripent.core import ExperimentParams, TripartiteGaussianState
from tripent.entropy import (
    discretized_differential_entropy,
    gaussian_conditional_entropy,
    gaussian_entropy,
    histogram_from_samples,
    joint_histogram_entropy,
)
from tripent.sampler import estimate_bound_from_samples, exact_mass_bound, sample_triplets
from tripent.schmidt import exact_e3f, kernel_spectrum, marginal_eigenvalues, marginal_kernel, state_for_ratio
from tripent.spdc import (
    PhaseMatchSolution,
    SincTriphotonModel,
    effective_pump_momentum,
    gaussian_triphoton_state,
    rotate_to_principal,
    triphoton_sinc_amplitude,
)

pytestmark = pytest.mark.acceptance

RESULTS: list[str] = []


@contextmanager
def criterion(number: int, title: str, budget_s: float):
    """Time the block, check the runtime budget, and record one result line."""
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < budget_s, f"took {elapsed:.2f} s, budget {budget_s} s"
    except AssertionError as err:
        elapsed = time.perf_counter() - start
        line = f"FAIL criterion {number}: {title} ({elapsed:.2f} s / {budget_s} s): {str(err).splitlines()[0]}"
        RESULTS.append(line)
        print(line)
        raise
    line = f"PASS criterion {number}: {title} ({elapsed:.2f} s / {budget_s} s)"
    RESULTS.append(line)
    print(line)


def test_criterion_1_closed_form_point():
    with criterion(1, "closed-form bound at sigma_p = 1 mm is 5.098 +/- 0.005", 1.0):
        params = ExperimentParams(crystal_length_Lz=3e-3, pump_radius_sigma_p=1e-3)
        bound = spdc_closed_form_bound(params, k_p_tilde=2.6e7).bound_gebits
        assert abs(bound - 5.098) <= 0.005, bound
        # the generic Gaussian pipeline agrees with the closed form
        state = gaussian_triphoton_state(PhaseMatchSolution.from_k_p_tilde(2.6e7, 3e-3), 1e-3)
        assert abs(gaussian_pipeline_bound(state).bound_gebits - bound) < 1e-9


def test_criterion_2_energy_time():
    with criterion(2, "energy-time bound is 3.72 +/- 0.01", 1.0):
        bound = energy_time_bound(3.7e-10, 3.77e7).bound_gebits
        assert abs(bound - 3.72) <= 0.01, bound


def test_criterion_3_gap_asymptote():
    with criterion(3, "exact minus bound at sigma_p = 10 mm is 1.88539 +/- 0.005", 1.0):
        params = ExperimentParams(pump_radius_sigma_p=10e-3)
        phase = effective_pump_momentum(params)
        state = gaussian_triphoton_state(phase, params.pump_radius_sigma_p)
        gap = exact_e3f(state.sigma_u_sq, state.sigma_v_sq) - spdc_closed_form_bound(params).bound_gebits
        assert abs(gap - 1.88539) <= 0.005, gap


def test_criterion_4_phase_matching():
    with criterion(4, "k_p_tilde from the quoted source parameters is 2.60e7 +/- 2%", 1.0):
        params = ExperimentParams(lambda_pump=516.67e-9, n_pump=2.240, poling_period_1=8.84e-6,
                                  poling_period_2=18.99e-6, poling_sign_1=-1, poling_sign_2=-1)
        k = effective_pump_momentum(params).k_p_tilde
        assert abs(k / 2.60e7 - 1) <= 0.02, k


SPECTRUM_RATIOS = (1.1, 1.5, 3.0, 10.0, 93.1)


def _spectrum_errors(extent_sigmas: float) -> dict:
    errors = {}
    for R in SPECTRUM_RATIOS:
        state = state_for_ratio(R)
        kernel = marginal_kernel(state.sigma_u_sq, state.sigma_v_sq)
        eigs = kernel_spectrum(kernel, grid_points=1024, extent=extent_sigmas * kernel.marginal_sigma, n_eigs=10)
        errors[R] = float(np.max(np.abs(eigs / marginal_eigenvalues(R, 9).lambdas - 1)))
    return errors


def test_criterion_5_schmidt_spectrum():
    with criterion(5, "1024-point, 8-sigma kernel spectrum matches the geometric law to 1e-6", 30.0):
        errors = _spectrum_errors(8.0)
        bad = {R: e for R, e in errors.items() if e > 1e-6}
        assert not bad, f"relative error above 1e-6 at R = {bad}"


def test_criterion_5_companion_default_extent():
    # The library default window is 10 sigma. At R = 1.1 the n = 9 mode keeps
    # ~2.5e-6 of its probability beyond 8 sigma, which bounds the accuracy of
    # any discretization confined to that window.
    errors = _spectrum_errors(10.0)
    assert max(errors.values()) <= 1e-6, errors


def test_criterion_6_soundness():
    with criterion(6, "entropic <= exact and variance == entropic +/- 1e-9 on 100 states", 10.0):
        rng = np.random.default_rng(20240601)
        ratios = 10.0 ** rng.uniform(0.0, 4.0, 100)
        for r in ratios:
            sv2 = 1e-10
            state = TripartiteGaussianState.symmetric(r * r * sv2, sv2)
            var_x, var_k = combination_variances(state)
            ent = e3f_entropic_bound(gaussian_entropy(var_x), gaussian_entropy(var_k)).bound_gebits
            var = e3f_variance_bound(math.sqrt(var_x), math.sqrt(var_k)).bound_gebits
            exact = exact_e3f(state.sigma_u_sq, state.sigma_v_sq)
            assert ent <= exact, (r, ent, exact)
            assert abs(var - ent) <= 1e-9, (r, var - ent)


def test_criterion_7_conservative_sampling():
    with criterion(7, "exact-mass bounds conservative and monotone; 50-seed Monte Carlo in range", 300.0):
        params = ExperimentParams()
        state = gaussian_triphoton_state(effective_pump_momentum(params), params.pump_radius_sigma_p)
        analytic = gaussian_pipeline_bound(state).bound_gebits
        for probe in (state, state_for_ratio(1.5, 1e-10), state_for_ratio(1e3, 1e-10)):
            sx, sk = (math.sqrt(v) for v in combination_variances(probe))
            ceiling = gaussian_pipeline_bound(probe).bound_gebits
            levels = [exact_mass_bound(probe, binning=(sx / 2**j, sk / 2**j)).bound_gebits for j in range(9)]
            assert all(b <= ceiling for b in levels), (levels, ceiling)
            assert all(b2 >= b1 for b1, b2 in zip(levels, levels[1:])), levels

        bounds, ses = [], []
        for seed in range(50):
            xs = sample_triplets(state, "position", 10**6, seed)
            ks = sample_triplets(state, "momentum", 10**6, seed)
            report = estimate_bound_from_samples(xs, ks)
            bounds.append(report.bound_gebits)
            ses.append(report.standard_error)
        bounds = np.array(bounds)
        assert np.all((bounds >= 4.95) & (bounds <= 5.12)), (bounds.min(), bounds.max())
        spread, se = float(np.std(bounds, ddof=1)), float(np.mean(ses))
        assert 0.5 <= spread / se <= 2.0, (spread, se)
        assert bounds.mean() <= analytic + 3 * se


def _bootstrap_se(estimator, data, n_boot=50, seed=0):
    rng = np.random.default_rng(seed)
    n = data.shape[-1]
    values = [estimator(data[..., rng.integers(0, n, n)]) for _ in range(n_boot)]
    return float(np.std(values, ddof=1))


def test_criterion_8_entropy_laws():
    with criterion(8, "scaling, reflection, conditioning: exact analytically, within 3 SE sampled", 60.0):
        # analytic Gaussians
        rng = np.random.default_rng(8)
        for _ in range(200):
            var, a = 10.0 ** rng.uniform(-6, 6), 10.0 ** rng.uniform(-3, 3) * rng.choice([-1, 1])
            assert gaussian_entropy(a * a * var) == pytest.approx(gaussian_entropy(var) + math.log2(abs(a)),
                                                                   abs=1e-12)
            # reflection leaves the variance, hence the entropy, unchanged
            assert gaussian_entropy((-1.0) ** 2 * var) == gaussian_entropy(var)
            m = rng.normal(size=(3, 3))
            cov = m @ m.T + 0.05 * np.eye(3)
            for t in range(3):
                others = [i for i in range(3) if i != t]
                h_cond = gaussian_conditional_entropy(cov, t)
                chain = (0.5 * math.log2((2 * math.pi * math.e) ** 3 * np.linalg.det(cov))
                         - 0.5 * math.log2((2 * math.pi * math.e) ** 2 * np.linalg.det(cov[np.ix_(others, others)])))
                assert h_cond == pytest.approx(chain, abs=1e-9)
                assert h_cond <= gaussian_entropy(cov[t, t])

        # sampled estimators, n = 1e5
        n = 10**5
        x = np.random.default_rng(81).standard_normal(n)
        w = 0.1

        def h1(v, width=w):
            return discretized_differential_entropy(histogram_from_samples(v, width))

        se = _bootstrap_se(h1, x)
        a = 3.7
        assert abs(h1(a * x, a * w) - (h1(x) + math.log2(a))) <= 3 * se
        assert abs(h1(-x) - h1(x)) <= 3 * se

        y = 0.9 * x + math.sqrt(1 - 0.81) * np.random.default_rng(82).standard_normal(n)
        xy = np.vstack([x, y])

        def h_cond(d):
            return joint_histogram_entropy(d[0], d[1], w, w) - h1(d[1])

        se_c = _bootstrap_se(h_cond, xy)
        assert h_cond(xy) <= h1(x) + 3 * se_c


def test_criterion_9_rotation_identities():
    with criterion(9, "sum of squares, round trip and permutation symmetry to 1e-12 on 1e4 triples", 1.0):
        k = np.random.default_rng(9).normal(scale=3e3, size=(3, 10**4))
        u, v, w = rotate_to_principal(*k)
        np.testing.assert_allclose(u**2 + v**2 + w**2, (k**2).sum(axis=0), rtol=1e-12)
        back = np.array(rotate_to_principal(u, v, w, inverse=True))
        np.testing.assert_allclose(back, k, rtol=1e-12, atol=1e-12 * np.abs(k).max())
        model = SincTriphotonModel(3 * 3e-3 / (4 * 2.6e7), 1e-3)
        ref = triphoton_sinc_amplitude(*k, model)
        for perm in itertools.permutations(range(3)):
            np.testing.assert_allclose(triphoton_sinc_amplitude(*k[list(perm)], model), ref,
                                       rtol=1e-12, atol=1e-300)
