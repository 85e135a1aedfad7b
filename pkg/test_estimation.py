#!/usr/bin/env python3
"""
Tests for phase evolution, measurement models, classical Fisher information
and the Monte Carlo estimator
"""
import math

import numpy as np
import pytest

import estimation
from common_utils import ConfigError, DomainError, SingularPointError
from estimation import (
    GLOBAL_PARITY, MODELS, SECTOR_PARITY, PhaseSetting, ProbabilityTable, classical_fisher,
    derivative_check, evolve, evolve_dense, mle_bracket, outcome_distribution, outcome_distribution_dense,
    run_monte_carlo, std_confidence_interval,
)
from qfi import qfi_ghz_diagonal
from state_core import build_rho_nk, maximally_mixed, pure_ghz, random_ghz_diagonal, weight


def sample_states():
    rng = np.random.default_rng(17)
    states = [build_rho_nk(4, 2), build_rho_nk(5, 1), build_rho_nk(7, 2), build_rho_nk(8, 2), pure_ghz(3)]
    states += [random_ghz_diagonal(2 + i % 6, rng) for i in range(15)]
    return states


def test_evolution_at_zero_is_identity():
    state = build_rho_nk(5, 2)
    evolved = evolve(state, 0.0)
    np.testing.assert_allclose(evolved.coherences, [float(d) / 2 for d in state.diffs])
    np.testing.assert_allclose(evolved.to_dense(), evolve_dense(state, 0.0), atol=1e-15)


def test_ghz_phase_reaches_pi():
    n = 5
    evolved = evolve(pure_ghz(n), math.pi / n)
    assert abs(evolved.coherences[0] + 0.5) < 1e-15


def test_phase_setting_unitary():
    setting = PhaseSetting(2, 0.4)
    np.testing.assert_allclose(setting.unitary_diagonal(), np.exp(-0.4j * np.array([1, 0, 0, -1])))


def test_evolution_matches_dense():
    rng = np.random.default_rng(3)
    for trial in range(20):
        state = random_ghz_diagonal(2 + trial % 7, rng)
        theta = float(rng.uniform(-math.pi, math.pi))
        np.testing.assert_allclose(evolve(state, theta).to_dense(), evolve_dense(state, theta), atol=1e-14)


def test_ghz_parity_fringe():
    n = 4
    for theta in np.linspace(0, math.pi, 13):
        p = outcome_distribution(pure_ghz(n), theta, GLOBAL_PARITY).probabilities
        np.testing.assert_allclose(p, [(1 + math.cos(n * theta)) / 2, (1 - math.cos(n * theta)) / 2], atol=1e-15)


def test_sector_parity_at_zero_reads_eigenvalues():
    state = build_rho_nk(6, 2)
    table = outcome_distribution(state, 0.0, SECTOR_PARITY).as_dict()
    for i in range(state.size):
        assert table[(i, +1)] == pytest.approx(float(state.lambda_plus[i]), abs=1e-15)
        assert table[(i, -1)] == pytest.approx(float(state.lambda_minus[i]), abs=1e-15)


def test_distributions_match_born_rule():
    for state in sample_states():
        if state.n > 8:
            continue
        for model in MODELS:
            for theta in (0.0, 0.37, 1.9):
                fast = outcome_distribution(state, theta, model).probabilities
                dense = outcome_distribution_dense(state, theta, model)
                np.testing.assert_allclose(fast, dense, atol=1e-12)


def test_distributions_are_normalised():
    for state in sample_states():
        for model in MODELS:
            for theta in np.linspace(-3, 3, 25):
                p = outcome_distribution(state, theta, model).probabilities
                assert abs(p.sum() - 1) < 1e-12
                assert p.min() >= 0


def test_sector_probabilities_are_periodic():
    state = build_rho_nk(6, 2)
    theta = 0.41
    base = outcome_distribution(state, theta, SECTOR_PARITY).as_dict()
    for i in range(state.size):
        w = abs(weight(state.n, i))
        if w == 0:
            continue
        shifted = outcome_distribution(state, theta + 2 * math.pi / w, SECTOR_PARITY).as_dict()
        for sign in (+1, -1):
            assert abs(shifted[(i, sign)] - base[(i, sign)]) < 1e-12
    n = 5
    p = outcome_distribution(pure_ghz(n), theta, GLOBAL_PARITY).probabilities
    q = outcome_distribution(pure_ghz(n), theta + 2 * math.pi / n, GLOBAL_PARITY).probabilities
    np.testing.assert_allclose(p, q, atol=1e-12)


def test_ghz_parity_saturates_qfi():
    for n in range(2, 9):
        for theta in (0.1, 0.45, 1.3):
            if abs(math.sin(n * theta)) < 1e-6:
                continue
            assert classical_fisher(pure_ghz(n), theta, GLOBAL_PARITY) == pytest.approx(n * n, rel=1e-9)


def test_classical_fisher_never_exceeds_qfi():
    grid = np.linspace(0.01, 3.0, 100)
    for state in sample_states():
        f_q = float(qfi_ghz_diagonal(state))
        for model in MODELS:
            for theta in grid:
                assert classical_fisher(state, theta, model) <= f_q * (1 + 1e-9) + 1e-9


def test_dominant_sector_contribution():
    state = build_rho_nk(4, 2)
    theta = math.pi / 8
    table = outcome_distribution(state, theta, SECTOR_PARITY)
    p = table.probabilities[:2]
    dp = table.derivatives[:2]
    assert np.sum(dp * dp / p) == pytest.approx(16 / 11, rel=1e-12)


def test_analytic_derivative_matches_finite_difference():
    for state in sample_states():
        for model in MODELS:
            for theta in (0.2, 1.1, 2.5):
                assert derivative_check(state, theta, model) < 1e-6


def test_zero_probability_outcomes():
    assert classical_fisher(pure_ghz(4), 0.0, GLOBAL_PARITY) == 0.0
    assert classical_fisher(build_rho_nk(5, 2), 0.0, SECTOR_PARITY) == 0.0


def test_singular_point_is_reported(monkeypatch):
    table = ProbabilityTable((+1, -1), np.array([1.0, 0.0]), np.array([-1.0, 1.0]))
    monkeypatch.setattr(estimation, 'outcome_distribution', lambda *args: table)
    with pytest.raises(SingularPointError):
        classical_fisher(pure_ghz(2), 0.3, GLOBAL_PARITY)


def test_unknown_model():
    with pytest.raises(DomainError):
        outcome_distribution(pure_ghz(2), 0.1, 'homodyne')


def test_bracket_is_dominant_half_period():
    assert mle_bracket(pure_ghz(4), math.pi / 16) == pytest.approx((0.0, math.pi / 4))
    with pytest.raises(DomainError):
        mle_bracket(maximally_mixed(3), 0.2)


def test_std_interval_contains_sample_value():
    low, high = std_confidence_interval(1.0, 200, 0.999)
    assert 0.8 < low < 1.0 < high < 1.25


def test_ghz_monte_carlo_reaches_cramer_rao():
    run = run_monte_carlo(pure_ghz(4), math.pi / 16, GLOBAL_PARITY, 10000, 200, 42)
    assert run.fisher_classical == pytest.approx(16, rel=1e-9)
    assert run.crlb == pytest.approx(0.0025, rel=1e-9)
    low, high = run.std_interval(0.999)
    assert low <= run.crlb <= high
    assert run.crlb_respected()
    assert abs(run.mean_estimate - math.pi / 16) < 5 * run.crlb / math.sqrt(run.repetitions) + 1e-4
    assert run.rng == 'philox'


def test_monte_carlo_is_reproducible():
    first = run_monte_carlo(build_rho_nk(4, 2), 0.3, GLOBAL_PARITY, 1000, 5, 7)
    second = run_monte_carlo(build_rho_nk(4, 2), 0.3, GLOBAL_PARITY, 1000, 5, 7)
    other = run_monte_carlo(build_rho_nk(4, 2), 0.3, GLOBAL_PARITY, 1000, 5, 8)
    assert first.estimates == second.estimates
    assert first.estimates != other.estimates


def test_more_shots_shrink_deviation():
    coarse = run_monte_carlo(pure_ghz(4), math.pi / 16, GLOBAL_PARITY, 2500, 150, 5)
    fine = run_monte_carlo(pure_ghz(4), math.pi / 16, GLOBAL_PARITY, 10000, 150, 6)
    assert 1.4 < coarse.empirical_std / fine.empirical_std < 2.9


def test_sector_parity_never_beats_qfi():
    state = build_rho_nk(8, 2)
    run = run_monte_carlo(state, math.pi / 16, SECTOR_PARITY, 10000, 50, 11)
    assert run.fisher_classical <= run.fisher_quantum * (1 + 1e-9)
    low, high = run.std_interval(0.999)
    assert high * math.sqrt(run.shots * run.fisher_quantum) >= 1


def test_monte_carlo_argument_checks(monkeypatch):
    with pytest.raises(DomainError):
        run_monte_carlo(pure_ghz(3), 0.2, GLOBAL_PARITY, 50, 10, 0)
    with pytest.raises(DomainError):
        run_monte_carlo(pure_ghz(3), 0.0, GLOBAL_PARITY, 1000, 10, 0)
    monkeypatch.setenv('GHZMETRO_RNG', 'pcg64')
    assert run_monte_carlo(pure_ghz(3), 0.2, GLOBAL_PARITY, 1000, 3, 0).rng == 'pcg64'
    monkeypatch.setenv('GHZMETRO_RNG', 'mt19937')
    with pytest.raises(ConfigError):
        run_monte_carlo(pure_ghz(3), 0.2, GLOBAL_PARITY, 1000, 3, 0)


if __name__ == "__main__":
    pytest.main([__file__, '-v'])
