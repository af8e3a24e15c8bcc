import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codeword_transfer import DimensionError, NormalizationError
from codeword_transfer.double_transfer import DoubleConfig, complete_table
from codeword_transfer.entropy import (
    PAIRS,
    JointTable,
    SettingPairTable,
    bell_inequality_holds,
    conditional_entropy,
    delta_s,
    delta_s_terms,
    joint_entropy,
    random_table,
    shannon_entropy,
)
from codeword_transfer.rng import stream


def H(ps):
    return -sum(p * math.log2(p) for p in ps if p > 0)


UNIFORM = JointTable(np.full((2, 2), 0.25))
DIAG = JointTable(np.array([[0.5, 0.0], [0.0, 0.5]]))


@pytest.mark.parametrize("p, expected", [((0.25,) * 4, 2.0), ((1, 0), 0.0), ((0.25, 0.75), 0.811278)])
def test_shannon_examples(p, expected):
    assert math.isclose(shannon_entropy(p), expected, abs_tol=1e-6)


def test_joint_and_conditional_examples():
    assert math.isclose(joint_entropy(UNIFORM), 2.0)
    assert math.isclose(conditional_entropy(UNIFORM, 1, 0), 1.0)
    assert conditional_entropy(DIAG, 1, 0) == 0.0


def test_conditional_direct_summation():
    t = [[0.4, 0.1], [0.2, 0.3]]
    # oracle: sum_x P(x) H(Y | X = x), rows are X
    oracle = sum(sum(r) * H([v / sum(r) for v in r]) for r in t)
    got = conditional_entropy(JointTable(np.array(t)), 1, 0)
    assert math.isclose(got, oracle, abs_tol=1e-12)
    assert math.isclose(got, 0.846439, abs_tol=1e-6)


def test_table_validation():
    with pytest.raises(NormalizationError):
        JointTable(np.array([[0.5, 0.5], [0.5, 0.5]]))
    with pytest.raises(NormalizationError):
        JointTable(np.array([[1.1, -0.1], [0, 0]]))
    with pytest.raises(DimensionError):
        JointTable.from_flat((2, 2), [1.0, 0, 0])
    with pytest.raises(DimensionError):
        UNIFORM.marginal([5])


def test_json_round_trip_at_file_tolerance():
    t = random_table((2, 3, 2), stream(1))
    back = JointTable.from_json(t.to_json())
    assert np.allclose(back.probs, t.probs, atol=1e-15)
    rounded = {"dims": [2, 2], "probs": [0.3333333333, 0.3333333333, 0.3333333334, 0.0]}
    assert JointTable.from_json(json.dumps(rounded)).dims == (2, 2)


def test_from_counts():
    t = JointTable.from_counts([[3, 1], [0, 4]])
    assert np.allclose(t.probs, [[0.375, 0.125], [0, 0.5]])


def test_bell_uniform_table():
    b = bell_inequality_holds(JointTable(np.full((2, 2, 2, 2), 1 / 16)))
    assert math.isclose(b.lhs, 1.0) and math.isclose(b.rhs, 3.0) and b.holds
    assert math.isclose(b.delta_s, -2.0)


def test_bell_needs_four_variables():
    with pytest.raises(DimensionError):
        bell_inequality_holds(UNIFORM)


def test_bell_random_tables():
    rng = stream(2024, 5)
    worst = max(bell_inequality_holds(random_table((2, 2, 2, 2), rng)).delta_s for _ in range(3000))
    assert worst <= 1e-9


def test_bell_random_sparse_tables():
    # tables with exact zeros probe the 0 log 0 convention
    rng = stream(2024, 6)
    for _ in range(500):
        e = rng.exponential(size=16) * (rng.random(16) < 0.4)
        if e.sum() == 0:
            continue
        assert bell_inequality_holds(JointTable((e / e.sum()).reshape(2, 2, 2, 2))).holds


def test_bell_local_product_table():
    cfg = DoubleConfig(theta_alpha=0.3, theta_beta=1.1, theta_bA=0.9, theta_bB=2.0, theta_cA=0.1,
                       theta_cB=0.4, mode="local")
    assert bell_inequality_holds(complete_table(cfg)).holds


def test_bell_deterministic_extreme():
    # a1 = b2 = b1 = a2 deterministic copy: all terms zero
    t = np.zeros((2, 2, 2, 2))
    t[0, 0, 0, 0] = t[1, 1, 1, 1] = 0.5
    b = bell_inequality_holds(JointTable(t))
    assert abs(b.lhs) < 1e-15 and abs(b.rhs) < 1e-15 and b.holds


def _pairs(table):
    return SettingPairTable({p: table for p in PAIRS})


def test_delta_s_examples():
    assert delta_s(_pairs(DIAG)) == 0.0
    assert math.isclose(delta_s(_pairs(UNIFORM)), -2.0)
    terms = delta_s_terms(_pairs(UNIFORM))
    assert set(terms) == {"S(a1|a2)", "S(a1|b2)", "S(b2|b1)", "S(b1|a2)"}


def test_setting_pairs_need_all_pairs():
    with pytest.raises(DimensionError):
        SettingPairTable({("A", "A"): UNIFORM})


def test_marginal_gaps_zero_for_consistent_tables():
    gaps = _pairs(UNIFORM).marginal_gaps()
    assert all(v == 0 for v in gaps.values())


tables = st.integers(0, 2 ** 32 - 1).map(lambda s: random_table((2, 3, 2), stream(s)))


@settings(max_examples=300, deadline=None)
@given(tables)
def test_chain_rule(t):
    for x, y in [(0, 1), (1, 2), (0, 2)]:
        assert abs(joint_entropy(t, (x, y)) - joint_entropy(t, x) - conditional_entropy(t, y, x)) < 1e-10


@settings(max_examples=300, deadline=None)
@given(tables)
def test_conditioning_reduces_and_nonnegative(t):
    for x in range(3):
        for y in range(3):
            if x != y:
                assert conditional_entropy(t, x, y) <= joint_entropy(t, x) + 1e-12
                assert conditional_entropy(t, x, y) >= -1e-12
    assert joint_entropy(t) >= -1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.permutations(range(4)))
def test_permutation_invariance(seed, perm):
    t = random_table((4, 3), stream(seed))
    permuted = JointTable(t.probs[list(perm), :])
    assert abs(joint_entropy(t) - joint_entropy(permuted)) < 1e-12
    assert abs(conditional_entropy(t, 1, 0) - conditional_entropy(permuted, 1, 0)) < 1e-12


def test_random_table_is_seeded():
    a = random_table((2, 2), stream(3))
    b = random_table((2, 2), stream(3))
    assert np.array_equal(a.probs, b.probs)
