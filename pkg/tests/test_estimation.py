import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codeword_transfer import Encoding, EndpointSingularityError
from codeword_transfer.estimation import (
    OutcomeCounts,
    amplitude_covariance_diagonal,
    cramer_rao_report,
    estimate,
    fisher_diagonal,
    multinomial_covariance,
    sigma_theory,
)
from codeword_transfer.rng import stream


def test_fisher_amplitude_is_four():
    w = np.linspace(1e-6, math.pi / 2 - 1e-6, 1000)
    assert np.max(np.abs(fisher_diagonal(Encoding.amplitude(), w).values - 4.0)) < 1e-10


@pytest.mark.parametrize("omega, expected", [(0.5, 4.0), (0.9, 1 / (0.9 * 0.1))])
def test_fisher_identity(omega, expected):
    j = fisher_diagonal(Encoding.identity(), [omega]).values[0]
    assert math.isclose(j, expected, rel_tol=1e-12)
    assert f"{j:.6g}" == ("4" if omega == 0.5 else "11.1111")


def test_fisher_power_matches_formula():
    # oracle: J = (k w^(k-1))^2 / (w^k (1 - w^k))
    k, w = 3.0, np.array([0.2, 0.5, 0.8])
    expected = (k * w ** (k - 1)) ** 2 / (w ** k * (1 - w ** k))
    assert np.allclose(fisher_diagonal(Encoding.power(k), w).values, expected, rtol=1e-12)


def test_endpoint_policy():
    amp = fisher_diagonal(Encoding.amplitude(), [0.0, math.pi / 2]).values
    assert np.all(amp == 4.0)
    with pytest.raises(EndpointSingularityError):
        fisher_diagonal(Encoding.identity(), [0.0])
    with pytest.raises(EndpointSingularityError):
        fisher_diagonal(Encoding.power(2), [1.0])


def test_covariance_examples():
    assert np.all(multinomial_covariance((1, 0), 100) == 0)
    c = multinomial_covariance((0.5, 0.5), 100)
    assert np.allclose(c, [[25, -25], [-25, 25]])
    assert np.allclose(np.diag(multinomial_covariance((0.5, 0.5), 1)), 0.25)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=9).filter(lambda x: sum(x) > 1e-3),
       st.integers(1, 10_000))
def test_covariance_rows_sum_to_zero(raw, n):
    p = np.array(raw) / sum(raw)
    c = multinomial_covariance(p / p.sum(), n)
    assert np.max(np.abs(c.sum(axis=1))) <= 1e-12 * max(1.0, np.abs(c).max())
    assert np.allclose(c, c.T)
    assert np.min(np.linalg.eigvalsh(c)) > -1e-9 * max(1.0, np.abs(c).max())


def test_covariance_matches_sampling():
    p = np.array([0.2, 0.3, 0.5])
    draws = stream(11, 0).multinomial(40, p, size=200_000)
    assert np.allclose(np.cov(draws.T), multinomial_covariance(p, 40), atol=0.05)


@pytest.mark.parametrize("omega", [math.pi / 4, 0.2])
def test_cramer_rao_amplitude(omega):
    rep = cramer_rao_report(Encoding.amplitude(), [omega], 1)
    e = rep.entries[0]
    assert math.isclose(e.variance_bound, 0.25, abs_tol=1e-12)
    assert math.isclose(e.achieved_variance, 0.25, abs_tol=1e-12)
    assert e.saturated and rep.all_saturated


def test_cramer_rao_identity_pointwise():
    rep = cramer_rao_report(Encoding.identity(), [0.9, 0.5], 1)
    assert math.isclose(rep.entries[0].variance_bound, 0.09, rel_tol=1e-12)
    assert math.isclose(rep.entries[0].achieved_variance, 0.09, rel_tol=1e-12)
    assert rep.entries[0].saturated
    # bound moves with omega, unlike the amplitude family
    assert rep.entries[1].variance_bound != rep.entries[0].variance_bound
    d = rep.to_dict()
    assert d["encoding"] == "identity" and len(d["entries"]) == 2


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["amplitude", "identity", "power(2)", "power(0.5)"]), st.floats(0.02, 0.98),
       st.integers(1, 10_000))
def test_cramer_rao_direction(name, frac, n):
    enc = Encoding.from_name(name)
    w = enc.lower + frac * (enc.upper - enc.lower)
    e = cramer_rao_report(enc, [w], n).entries[0]
    assert e.achieved_variance >= e.variance_bound - 1e-12


@pytest.mark.parametrize("counts, p", [((5, 5), (0.5, 0.5)), ((10, 0), (1, 0)), ((3, 5, 2), (0.3, 0.5, 0.2))])
def test_estimate_examples(counts, p):
    assert np.allclose(estimate(OutcomeCounts(counts)).p, p, atol=0)


def test_estimate_rejects_bad_counts():
    with pytest.raises(ValueError):
        OutcomeCounts((-1, 2))
    with pytest.raises(ValueError):
        estimate(OutcomeCounts((0, 0)))


def test_estimate_unbiased():
    p = np.array([0.1, 0.6, 0.3])
    n, draws = 30, 10_000
    counts = stream(5, 1).multinomial(n, p, size=draws)
    mean = np.mean([estimate(c).p for c in counts], axis=0)
    assert np.all(np.abs(mean - p) < 5 * np.sqrt(p * (1 - p) / (n * draws)))


@pytest.mark.parametrize("m, n, expected", [(1, 100, 0.0), (2, 100, 0.1), (3, 300, 0.0816497)])
def test_sigma_theory(m, n, expected):
    assert math.isclose(sigma_theory(m, n), expected, abs_tol=1e-7)


def test_sigma_diagonal_maximum():
    grid = np.linspace(0, 1, 1001)
    assert abs(grid[np.argmax(grid * (1 - grid))] - 0.5) <= grid[1]
    w = np.linspace(0, math.pi / 2, 1001)
    d = amplitude_covariance_diagonal(w)
    assert abs(w[np.argmax(d)] - math.pi / 4) <= w[1]
    assert math.isclose(d.max(), 0.25, abs_tol=1e-6)
