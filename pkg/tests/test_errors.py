import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinsqueeze.errors import (
    ErrorModel,
    apply_stirap_holes,
    detection_forward_moments,
    detection_forward_shots,
    detection_inverse,
)
from spinsqueeze.lattice import LatticeSpec
from spinsqueeze.measurement import ShotSet, moment_summary, sample_shots, var_along
from spinsqueeze.protocols import prepare_coherent_y


def test_error_model_validation():
    with pytest.raises(ValueError):
        ErrorModel(eta=1.0)
    with pytest.raises(ValueError):
        ErrorModel(eps_up=0.3, eps_down=0.2)
    ErrorModel(eta=0.0, eps_up=0.0, eps_down=0.0)  # boundary values allowed


def test_holes_eta_zero_identity():
    spec = LatticeSpec(rows=3, cols=3)
    real = apply_stirap_holes(spec, ErrorModel(eta=0.0, eps_up=0.0, eps_down=0.0))
    assert real.n_failed == 0
    assert real.active_spec.n_sites == 9


def test_holes_eta_one_all_fail():
    spec = LatticeSpec(rows=2, cols=3)
    real = apply_stirap_holes(spec, ErrorModel(eta=1.0 - 1e-12, eps_up=0.0, eps_down=0.0))
    assert real.n_failed == 6
    assert real.active_spec is None
    assert real.n_imaged == 6


def test_holes_binomial_mean_count():
    spec = LatticeSpec(rows=6, cols=6)
    em = ErrorModel(eta=0.02, eps_up=0.0, eps_down=0.0)
    rng = np.random.default_rng(123)
    counts = [apply_stirap_holes(spec, em, rng).n_failed for _ in range(10_000)]
    mean = np.mean(counts)
    se = np.sqrt(36 * 0.02 * 0.98 / 10_000)
    assert abs(mean - 0.72) <= 4.0 * se


def test_holes_respect_existing_holes():
    spec = LatticeSpec(rows=2, cols=2, holes=frozenset({0}))
    em = ErrorModel(eta=0.5, eps_up=0.0, eps_down=0.0)
    rng = np.random.default_rng(7)
    real = apply_stirap_holes(spec, em, rng)
    assert real.n_imaged == 3
    assert 0 not in real.failed_sites
    if real.active_spec is not None:
        assert real.active_spec.n_sites + real.n_failed == 3


def test_forward_shots_identity_without_errors():
    shots = ShotSet(np.ones((5, 4), dtype=np.int8))
    em = ErrorModel(eta=0.0, eps_up=0.0, eps_down=0.0)
    out = detection_forward_shots(shots, em)
    assert np.array_equal(out.outcomes, shots.outcomes)


def test_forward_shots_flip_rates():
    rng = np.random.default_rng(5)
    em = ErrorModel(eta=0.0, eps_up=0.025, eps_down=0.010)
    ups = ShotSet(np.ones((200_000, 1), dtype=np.int8))
    flipped = detection_forward_shots(ups, em, np.random.default_rng(1))
    mean = flipped.outcomes.mean()
    se = 2.0 * np.sqrt(0.025 * 0.975 / 200_000)
    assert abs(mean - 0.95) <= 4.0 * se
    downs = ShotSet(-np.ones((200_000, 1), dtype=np.int8))
    flipped = detection_forward_shots(downs, em, np.random.default_rng(2))
    assert abs(flipped.outcomes.mean() + (1.0 - 2.0 * 0.010)) <= 4.0 * se


def test_forward_moments_worked_examples():
    em = ErrorModel(eta=0.0, eps_up=0.025, eps_down=0.010)
    mean, _ = detection_forward_moments(2.0, 0.0, 0.0, 4, em)
    assert mean == pytest.approx(2.0 * (0.010 - 0.025) + 0.965 * 2.0, abs=1e-15)
    assert mean == pytest.approx(1.90, abs=1e-12)
    _, var = detection_forward_moments(0.0, 9.0, 0.0, 36, em)
    assert var == pytest.approx(0.93 * 9.0 + 0.010 * 18.0 + 0.025 * 18.0, abs=1e-12)
    assert var == pytest.approx(9.0, abs=1e-12)


def test_forward_moments_identity_without_errors():
    em = ErrorModel(eta=0.0, eps_up=0.0, eps_down=0.0)
    assert detection_forward_moments(1.3, 2.7, 0.4, 10, em) == (1.3, 2.7)


@settings(max_examples=100, deadline=None)
@given(
    st.floats(-8.0, 8.0), st.floats(0.01, 20.0), st.floats(-8.0, 8.0),
    st.floats(0.0, 0.2), st.floats(0.0, 0.2),
)
def test_roundtrip_forward_inverse(mean, var, mean_theta, eps_up, eps_down):
    em = ErrorModel(eta=0.0, eps_up=eps_up, eps_down=eps_down)
    n = 16
    mean_f, var_f = detection_forward_moments(mean, var, mean_theta, n, em)
    mt_f, _ = detection_forward_moments(mean_theta, 0.0, mean_theta, n, em)
    mean_b, var_b = detection_inverse(mean_f, var_f, mt_f, n, em)
    assert mean_b == pytest.approx(mean, abs=1e-10)
    assert var_b == pytest.approx(var, abs=1e-10)


def test_inverse_neglect_mode():
    em = ErrorModel(eta=0.0, eps_up=0.02, eps_down=0.01)
    mean_b, var_b = detection_inverse(1.0, 2.0, 123.4, 8, em, neglect_theta_mean=True)
    mean_b2, var_b2 = detection_inverse(1.0, 2.0, 0.04, 8, em, neglect_theta_mean=False)
    # dropping a small <J_theta> barely moves the corrected variance
    assert var_b == pytest.approx(var_b2, abs=0.01)
    assert mean_b == mean_b2


def test_monte_carlo_matches_analytic_map():
    # coherent state: Var(J_theta) = N/4, <J_theta> = 0, means all zero
    n = 9
    em = ErrorModel(eta=0.0, eps_up=0.025, eps_down=0.010)
    v = prepare_coherent_y(n)
    shots = sample_shots(v, 0.0, 100_000, seed=3)
    flipped = detection_forward_shots(shots, em, np.random.default_rng(17))
    values = flipped.j_values()
    _, var_expect = detection_forward_moments(0.0, 0.25 * n, 0.0, n, em)
    mean_expect, _ = detection_forward_moments(0.0, 0.0, 0.0, n, em)
    se_var = var_expect * np.sqrt(2.0 / values.size)
    se_mean = np.sqrt(var_expect / values.size)
    assert abs(values.var(ddof=1) - var_expect) <= 4.0 * se_var
    assert abs(values.mean() - mean_expect) <= 4.0 * se_mean


def test_monte_carlo_matches_analytic_map_random_states():
    rng = np.random.default_rng(8)
    em = ErrorModel(eta=0.0, eps_up=0.03, eps_down=0.015)
    n = 6
    for trial in range(20):
        v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        v /= np.linalg.norm(v)
        theta = rng.uniform(-np.pi / 2, np.pi / 2)
        shots = sample_shots(v, theta, 40_000, seed=100 + trial)
        ms = moment_summary(v)
        tilde_var = var_along(ms, theta)
        tilde_mean = np.cos(theta) * ms.mean_z + np.sin(theta) * ms.mean_x
        mean_expect, var_expect = detection_forward_moments(
            tilde_mean, tilde_var, tilde_mean, n, em)
        flipped = detection_forward_shots(shots, em, np.random.default_rng(trial))
        values = flipped.j_values()
        se_var = (var_expect + 0.05) * np.sqrt(2.0 / values.size) + 3e-4 * n
        se_mean = np.sqrt((var_expect + 0.05) / values.size)
        assert abs(values.var(ddof=1) - var_expect) <= 4.0 * se_var
        assert abs(values.mean() - mean_expect) <= 4.0 * se_mean


def test_inverse_finite_near_probability_boundary():
    # eps_up + eps_down < 1/2 guarantees invertibility; just below the
    # boundary the corrected variance blows up but stays finite
    em = ErrorModel(eta=0.0, eps_up=0.24, eps_down=0.2599)
    mean_b, var_b = detection_inverse(1.0, 3.0, 0.0, 4, em)
    assert np.isfinite(mean_b) and np.isfinite(var_b)
    assert abs(var_b) > 100.0  # 1/(1 - 2 s) amplification
