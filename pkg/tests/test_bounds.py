import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from tripent.bounds import (
    LOG2_2PI,
    bipartite_conditional_witnesses,
    combination_variances,
    e3f_entropic_bound,
    e3f_variance_bound,
    energy_time_bound,
    gaussian_pipeline_bound,
    gaussian_witnesses,
    spdc_closed_form_bound,
)
from tripent.core import GHZ_LIKE_COEFFS, BoundMethod, CoefficientVectors, ExperimentParams, \
    TripartiteGaussianState, ValidationError
from tripent.entropy import gaussian_entropy
from tripent.schmidt import exact_e3f
from tripent.spdc import PhaseMatchSolution, gaussian_triphoton_state

LOG2_E = math.log2(math.e)


def test_witnesses_product_state():
    # minimum-uncertainty product: h(x) + h(k) = log2(pi e) per party
    hx = gaussian_entropy(1.0)
    hk = gaussian_entropy(0.25)
    w = bipartite_conditional_witnesses([hx] * 3, [hk] * 3)
    for value in w.as_tuple():
        assert value == pytest.approx(math.log2(2 / math.e), abs=1e-12)
        assert value == pytest.approx(-0.4427, abs=5e-5)
    assert w.certified == (False, False, False)


def test_witnesses_saturation():
    half = 0.5 * math.log2(2 * math.pi)
    w = bipartite_conditional_witnesses([half] * 3, [half] * 3)
    assert w.as_tuple() == (0.0, 0.0, 0.0)


def test_witness_rejects_nonfinite():
    with pytest.raises(ValidationError):
        bipartite_conditional_witnesses([1, 2, math.inf], [0, 0, 0])


def test_witness_at_default_state(default_state):
    w = gaussian_witnesses(default_state)
    # log2(2 pi) - h(x_A|BC) - h(k_A|BC) with the two conditional entropies -14.4593 and 11.0127
    assert w.w_A == pytest.approx(LOG2_2PI + 14.4593 - 11.0127, abs=1e-3)
    assert w.w_A == pytest.approx(6.099, abs=2e-3)
    assert w.w_A == pytest.approx(w.w_B, rel=1e-9)


@given(st.floats(1.0, 1e4), st.floats(1e-3, 1e3))
@settings(max_examples=60, deadline=None)
def test_witness_below_marginal_entropy(ratio, sv2):
    state = TripartiteGaussianState.symmetric(ratio * sv2, sv2)
    # for a pure symmetric state each marginal entropy equals the exact E3F
    s_a = exact_e3f(state.sigma_u_sq, state.sigma_v_sq)
    assert max(gaussian_witnesses(state).as_tuple()) <= s_a + 1e-9


def test_entropic_bound_examples():
    r = e3f_entropic_bound(-14.460, 11.013, GHZ_LIKE_COEFFS)
    assert r.bound_gebits == pytest.approx(5.099, abs=1e-3)
    assert r.method is BoundMethod.ENTROPIC and r.certified
    assert e3f_entropic_bound(math.log2(math.pi), 0.0).bound_gebits == pytest.approx(0.0, abs=1e-15)


def test_entropic_bound_zero_product_rejected():
    with pytest.raises(ValidationError):
        e3f_entropic_bound(0.0, 0.0, CoefficientVectors((1, 0, 1), (1, 1, 1)))


def test_negative_bound_is_not_clamped():
    r = e3f_entropic_bound(5.0, 5.0)
    assert r.bound_gebits < 0 and "no entanglement certified" in r.flags


def test_variance_bound_examples():
    r = e3f_variance_bound(1.0742e-5, 500.0)
    assert r.bound_gebits == pytest.approx(-math.log2(2 * math.e * 5.371e-3), abs=1e-4)
    assert r.bound_gebits == pytest.approx(5.098, abs=1e-3)
    assert e3f_variance_bound(0.5 / math.e, 1.0).bound_gebits == pytest.approx(0.0, abs=1e-15)
    assert e3f_variance_bound(3.7e-10, 3.77e7).bound_gebits == pytest.approx(3.72, abs=0.01)


@pytest.mark.parametrize("sx, sk", [(0.0, 1.0), (1.0, -1.0), (math.nan, 1.0)])
def test_variance_bound_rejects(sx, sk):
    with pytest.raises(ValidationError):
        e3f_variance_bound(sx, sk)


def test_energy_time_examples():
    r = energy_time_bound()
    assert r.bound_gebits == pytest.approx(3.72, abs=0.01)
    assert any("approximation" in n for n in r.notes)
    assert r.extra["pair"] == "time_frequency"
    assert energy_time_bound(1.0, 1.0 / (2 * math.e)).bound_gebits == pytest.approx(0.0, abs=1e-12)
    assert energy_time_bound(1e-9, 3.77e7).bound_gebits == pytest.approx(-math.log2(2 * math.e * 0.0377), abs=1e-12)
    assert energy_time_bound(1e-9, 3.77e7).bound_gebits == pytest.approx(2.28, abs=0.01)
    assert energy_time_bound(2 * 3.7e-10).bound_gebits == pytest.approx(r.bound_gebits - 1, abs=1e-12)


def _closed_form(sigma_p, k_tilde=2.6e7, lz=3e-3):
    params = ExperimentParams(crystal_length_Lz=lz, pump_radius_sigma_p=sigma_p)
    return spdc_closed_form_bound(params, k_tilde).bound_gebits


def test_closed_form_examples():
    assert _closed_form(1e-3) == pytest.approx(5.098, abs=1e-3)
    assert _closed_form(0.0) == pytest.approx(2 - math.log2(3 * math.sqrt(2) * math.e), abs=1e-12)
    assert _closed_form(0.0) == pytest.approx(-1.528, abs=1e-3)
    root = optimize.brentq(_closed_form, 1e-6, 1e-3, xtol=1e-15)
    assert root == pytest.approx(2.74e-5, rel=5e-3)
    assert abs(_closed_form(root)) < 1e-6
    assert "per transverse dimension" in spdc_closed_form_bound(ExperimentParams(), 2.6e7).notes


def test_closed_form_rejects():
    with pytest.raises(ValidationError):
        spdc_closed_form_bound(ExperimentParams(), -1.0)


@given(st.floats(0.0, 1e-2), st.floats(1e7, 5e7), st.floats(1e-4, 1e-1))
@settings(max_examples=100, deadline=None)
def test_closed_form_equals_generic_pipeline(sigma_p, k_tilde, lz):
    state = gaussian_triphoton_state(PhaseMatchSolution.from_k_p_tilde(k_tilde, lz), sigma_p)
    generic = gaussian_pipeline_bound(state).bound_gebits
    assert generic == pytest.approx(_closed_form(sigma_p, k_tilde, lz), abs=1e-9)


def test_rotated_scaling_identity(default_state):
    # eta . x = -(sqrt(6)/2) x_v, so h(eta . x) = h(x_v) + log2(sqrt(6)/2)
    var_x, var_k = combination_variances(default_state)
    assert var_x == pytest.approx(1.5 * default_state.sigma_v_sq, rel=1e-12)
    assert var_k == pytest.approx(3 * default_state.momentum_variances[0], rel=1e-12)
    assert gaussian_entropy(var_x) == pytest.approx(
        gaussian_entropy(default_state.sigma_v_sq) + math.log2(math.sqrt(6) / 2), abs=1e-12)


@given(st.floats(1.0, 1e4), st.floats(1e-12, 1e-4))
@settings(max_examples=100, deadline=None)
def test_variance_equals_entropic_for_gaussians(ratio, sv2):
    state = TripartiteGaussianState.symmetric(ratio * sv2, sv2)
    var_x, var_k = combination_variances(state)
    ent = gaussian_pipeline_bound(state).bound_gebits
    var = e3f_variance_bound(math.sqrt(var_x), math.sqrt(var_k)).bound_gebits
    assert var == pytest.approx(ent, abs=1e-9)
    assert ent <= exact_e3f(state.sigma_u_sq, state.sigma_v_sq) + 1e-12


def test_entropic_dominates_variance_for_non_gaussian():
    # uniform combinations: entropy log2(width) sits below the Gaussian entropy of the same variance
    w = 2.0
    sigma = w / math.sqrt(12)
    ent = e3f_entropic_bound(math.log2(w), math.log2(w)).bound_gebits
    var = e3f_variance_bound(sigma, sigma).bound_gebits
    assert ent > var


@given(st.floats(0.1, 10.0), st.floats(0.01, 100.0), st.floats(0.01, 100.0))
def test_coefficient_rescaling_invariance(c, sx, sk):
    # scaling eta by c scales sigma_x by c; beta by 1/c scales sigma_k by 1/c
    base = e3f_variance_bound(sx, sk, GHZ_LIKE_COEFFS).bound_gebits
    scaled = CoefficientVectors(tuple(c * e for e in GHZ_LIKE_COEFFS.eta), tuple(b / c for b in GHZ_LIKE_COEFFS.beta))
    assert e3f_variance_bound(c * sx, sk / c, scaled).bound_gebits == pytest.approx(base, abs=1e-10)
