import math

import numpy as np
import pytest

from codeword_transfer import DomainError, Encoding, ProbabilityVector, StateVector, amplitude_encode
from codeword_transfer.rng import stream
from codeword_transfer.single_transfer import (
    SingleConfig,
    draw_counts,
    error_scaling_study,
    exact_moments,
    laser_scenario,
    run_experiment,
    sample_outcomes,
)


def enumerate_binomial(q, n):
    """Independent oracle: E[omega_hat], Var(omega_hat), E[(y_hat - y)^2 summed] for m = 2."""
    ks = range(n + 1)
    w = [math.comb(n, k) * q ** k * (1 - q) ** (n - k) for k in ks]
    om = [math.acos(math.sqrt(k / n)) for k in ks]
    mean = sum(wi * o for wi, o in zip(w, om))
    var = sum(wi * (o - mean) ** 2 for wi, o in zip(w, om))
    y1, y2 = math.sqrt(q), math.sqrt(1 - q)
    mse = sum(wi * ((math.sqrt(k / n) - y1) ** 2 + (math.sqrt(1 - k / n) - y2) ** 2) for wi, k in zip(w, ks))
    return mean, var, mse


def test_sample_outcomes_deterministic_category():
    assert sample_outcomes(StateVector((1.0, 0.0)), 50, stream(1)).counts == (50, 0)


def test_sample_outcomes_equal_superposition():
    c = sample_outcomes(StateVector((1 / math.sqrt(2), 1 / math.sqrt(2))), 10 ** 6, stream(2))
    assert 0.498 <= c.counts[0] / c.n <= 0.502


def test_sample_outcomes_encoded_state():
    n = 10 ** 6
    c = sample_outcomes(amplitude_encode((0.25, 0.75)), n, stream(3))
    sigma = math.sqrt(0.25 * 0.75 / n)
    assert abs(c.counts[0] / n - 0.25) < 4 * sigma
    assert abs(c.counts[1] / n - 0.75) < 4 * sigma


def test_run_experiment_one_hot():
    res = run_experiment(SingleConfig(ProbabilityVector((1, 0, 0)), 37, 20, 0))
    assert len(res) == 20
    assert all(np.array_equal(r.p_hat.p, [1, 0, 0]) for r in res)


def test_trial_result_consistency():
    res = run_experiment(SingleConfig(ProbabilityVector((0.2, 0.3, 0.5)), 100, 50, 4))
    for r in res:
        assert np.allclose(r.p_hat.p, np.array(r.counts.counts) / 100, atol=0)
        assert np.allclose(r.y_hat ** 2, r.p_hat.p, atol=1e-15)
        assert np.allclose(r.omega_hat, np.arccos(r.y_hat), atol=0)


def test_run_experiment_mean():
    res = run_experiment(SingleConfig(ProbabilityVector((0.5, 0.5)), 10 ** 4, 10 ** 3, 0))
    assert abs(np.mean([r.p_hat.p[0] for r in res]) - 0.5) < 4 * math.sqrt(0.25 / (10 ** 4 * 10 ** 3))


def _omega_var_ratio(trials, seed=0):
    n = 10 ** 4
    res = run_experiment(SingleConfig(ProbabilityVector((1 / 3,) * 3), n, trials, seed))
    w = np.array([r.omega_hat for r in res])
    return np.var(w, axis=0, ddof=1) / (1 / (4 * n))


@pytest.mark.xfail(strict=True, reason="1000 trials give a 4.5% standard deviation on each ratio; "
                                       "seed 0 lands one component at 1.099")
def test_run_experiment_variance_1000_trials():
    assert np.all(np.abs(_omega_var_ratio(10 ** 3) - 1) < 0.05)


def test_run_experiment_variance_statistical_band():
    # same claim at 1000 trials, tested against its 4-sigma sampling band
    sd = math.sqrt(2 / (10 ** 3 - 1))
    assert np.all(np.abs(_omega_var_ratio(10 ** 3) - 1) < 4 * sd)


def test_run_experiment_variance_10k_trials():
    assert np.all(np.abs(_omega_var_ratio(10 ** 4) - 1) < 0.05)


def test_error_scaling_m2_example():
    rep = error_scaling_study((0.5, 0.5), [10 ** 4], 10 ** 3, seed=0)
    r = rep.rows[0]
    assert 0.95 <= r.ratio_component[0] <= 1.05
    assert r.excluded == (0, 0)
    assert math.isclose(r.sigma_nominal, math.sqrt(1 / 10 ** 4))
    assert math.isclose(r.predicted_total, 1 / (4 * 10 ** 4))


def test_parametrization_independence_m3():
    a = error_scaling_study((1 / 3, 1 / 3, 1 / 3), [10 ** 4], 10 ** 4, seed=1).rows[0].var_omega
    b = error_scaling_study((0.1, 0.3, 0.6), [10 ** 4], 10 ** 4, seed=1).rows[0].var_omega
    allv = np.array(a + b)
    assert allv.max() / allv.min() < 1.05


def test_parametrization_independence_angle_grid():
    n, trials = 10 ** 4, 10 ** 4
    vars_ = []
    for w in np.linspace(0.3, 1.3, 5):
        q = math.cos(w) ** 2
        vars_.append(error_scaling_study((q, 1 - q), [n], trials, seed=2).rows[0].var_omega[0])
    assert max(vars_) / min(vars_) < 1.1


def test_scaling_report_shape():
    rep = error_scaling_study((0.2, 0.3, 0.5), [100, 200], 300, seed=5)
    assert rep.m == 3 and [r.n for r in rep.rows] == [100, 200]
    assert len(rep.csv_rows()) == 2 and len(rep.csv_rows()[0]) == len(rep.csv_header())
    d = rep.to_dict()
    assert d["rows"][0]["n"] == 100
    assert rep.row(200).n == 200


def test_scaling_rejects_boundary_p():
    with pytest.raises(DomainError):
        error_scaling_study((1.0, 0.0), [10], 10, 0)


@pytest.mark.parametrize("q", [0.5, 0.3, 0.85])
@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_exact_moments_match_independent_enumeration(q, n):
    mean, var, mse = enumerate_binomial(q, n)
    ex = exact_moments((q, 1 - q), n)
    assert abs(ex["mean_omega_hat"][0] - mean) < 1e-12
    assert abs(ex["var_omega"][0] - var) < 1e-12
    assert abs(ex["mse_y_total"] - mse) < 1e-12
    assert abs(ex["mean_p_hat"][0] - q) < 1e-12


def test_monte_carlo_matches_enumeration():
    q, n, trials = 0.3, 12, 200_000
    counts = draw_counts(ProbabilityVector((q, 1 - q)), n, trials, seed=8)
    om = np.arccos(np.sqrt(counts[:, 0] / n))
    mean, var, _ = enumerate_binomial(q, n)
    assert abs(om.mean() - mean) < 4 * math.sqrt(var / trials)


def test_law_of_large_numbers():
    p = np.array([0.2, 0.8])
    errs = []
    for n in (10 ** 2, 10 ** 4, 10 ** 6):
        c = draw_counts(ProbabilityVector(p), n, 200, seed=9, key=(n,))
        errs.append(np.abs(c[:, 0] / n - p[0]))
    means = [e.mean() for e in errs]
    assert means[0] > means[1] > means[2]
    assert np.mean(errs[2] < 4 * math.sqrt(0.16 / 10 ** 6)) >= 0.99


def test_thread_count_does_not_change_results():
    cfg = SingleConfig(ProbabilityVector((0.1, 0.2, 0.7)), 500, 1000, 123)
    a = run_experiment(cfg, threads=1)
    b = run_experiment(cfg, threads=6)
    assert all(x.counts == y.counts for x, y in zip(a, b))


def test_seed_changes_results():
    p = ProbabilityVector((0.4, 0.6))
    assert not np.array_equal(draw_counts(p, 100, 50, 1), draw_counts(p, 100, 50, 2))


def test_other_encodings_decode():
    cfg = SingleConfig(ProbabilityVector((0.3, 0.7)), 1000, 5, 0, Encoding.identity())
    r = run_experiment(cfg)[0]
    assert np.allclose(r.omega_hat, r.p_hat.p)


def test_laser_examples():
    assert laser_scenario(0.0, 100, 1) == 1.0
    assert laser_scenario(math.pi / 2, 100, 1) == 0.0
    n = 10 ** 6
    x = laser_scenario(math.pi / 3, n, 1)
    assert abs(x - 0.25) < 4 * math.sqrt(0.25 * 0.75 / n)


def test_laser_literal_flag():
    n = 10 ** 6
    x = laser_scenario(math.pi / 6, n, 2, literal=True)
    assert abs(x - 0.5) < 4 * math.sqrt(0.25 / n)
    with pytest.raises(DomainError):
        laser_scenario(2.0, 10, 0)
