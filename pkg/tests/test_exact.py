import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothdisc.core import SignVector
from smoothdisc.errors import OddN, ParityMismatch, ParityViolation, TooLarge
from smoothdisc.exact import (
    ExactProbability,
    agreement,
    all_sign_vectors,
    binom,
    count_S_t,
    enumerate_even_oracle,
    even_class,
    in_even_support,
    inner_product_law,
    joint_inner_product_law,
    parity_checks,
    parity_checks_exhaustive,
    prob_joint_even,
    prob_single_even,
    spencer_budget,
    spencer_estimate,
    support_even_inner,
    verification_csv,
    VerificationRow,
)

from conftest import random_sign


def _even_vectors_by_hand(n):
    # independent of even_class: itertools over tuples
    return [v for v in itertools.product((-1, 1), repeat=n) if v.count(1) % 2 == 0]


def test_binom_examples():
    assert binom(4, 2) == 6
    assert binom(4, 5) == 0 and binom(4, -1) == 0
    product = 1
    for j in range(50):
        product = product * (100 - j) // (j + 1)
    assert binom(100, 50) == product
    assert binom(30, 7) == binom(30, 23)


def test_exact_probability_bounds():
    p = ExactProbability(6, 8)
    assert p == Fraction(3, 4) and p.reduced
    with pytest.raises(ValueError):
        ExactProbability(5, 4)
    with pytest.raises(ValueError):
        ExactProbability(-1, 4)


def test_count_S_t_examples():
    assert count_S_t(2, 0) == 2
    assert count_S_t(4, 1) == sum(1 for v in itertools.product((-1, 1), repeat=4) if sum(v) == 2) == 4
    assert count_S_t(4, 3) == 0
    with pytest.raises(OddN):
        count_S_t(3, 0)


def test_support_examples():
    assert support_even_inner(2, SignVector([1, 1])).support == {-2, 2}
    assert support_even_inner(4, SignVector([1, 1, -1, -1])).support == {-4, 0, 4}
    assert support_even_inner(4, SignVector([1, 1, 1, -1])).support == {-2, 2}
    with pytest.raises(OddN):
        support_even_inner(3, SignVector([1, 1, 1]))


@pytest.mark.parametrize("n", [2, 4, 6])
def test_support_matches_enumeration(n):
    E = np.array(_even_vectors_by_hand(n))
    for v in itertools.product((-1, 1), repeat=n):
        x = SignVector(v)
        assert support_even_inner(n, x).support == set((E @ np.array(v)).tolist())


def test_prob_single_examples():
    assert prob_single_even(2, SignVector([1, 1]), 1) == Fraction(1, 2)
    assert prob_single_even(4, SignVector([1, 1, 1, 1]), 0) == Fraction(3, 4)
    assert prob_single_even(4, SignVector([1, 1, -1, -1]), 1) == 0
    # off-support the bare binomial would be nonzero
    assert binom(4, 3) > 0


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_prob_single_sums_to_one(rng, n):
    for _ in range(10):
        x = random_sign(rng, n)
        assert sum(prob_single_even(n, x, t) for t in range(-n, n + 1)) == 1


def test_prob_single_against_hand_enumeration(rng):
    n = 6
    E = _even_vectors_by_hand(n)
    for _ in range(10):
        x = random_sign(rng, n)
        for t in range(-3, 4):
            hits = sum(1 for r in E if sum(a * b for a, b in zip(r, x.tolist())) == 2 * t)
            assert prob_single_even(n, x, t) == Fraction(hits, len(E))


def test_prob_single_symmetries(rng):
    n = 8
    for _ in range(10):
        x = random_sign(rng, n)
        perm = SignVector(rng.permutation(x.entries))
        for t in range(-4, 5):
            p = prob_single_even(n, x, t)
            assert prob_single_even(n, perm, t) == p
            assert prob_single_even(n, -x, -t) == p


def test_prob_joint_example():
    x, y = SignVector([1, 1, 1, 1]), SignVector([1, 1, -1, -1])
    assert prob_joint_even(4, x, y, 0, 0) == Fraction(1, 2)
    hits = [r for r in _even_vectors_by_hand(4) if sum(r) == 0 and r[0] + r[1] - r[2] - r[3] == 0]
    assert sorted(hits) == sorted([(1, -1, 1, -1), (1, -1, -1, 1), (-1, 1, 1, -1), (-1, 1, -1, 1)])


def test_prob_joint_diagonal_reduces_to_single(rng):
    for n in (4, 6, 8):
        x = random_sign(rng, n)
        for t in range(-n // 2, n // 2 + 1):
            assert prob_joint_even(n, x, x, t, t) == prob_single_even(n, x, t)


def test_prob_joint_parity_mismatch():
    with pytest.raises(ParityMismatch):
        prob_joint_even(4, SignVector([1, 1, -1, -1]), SignVector([1, -1, -1, -1]), 0, 1)


def test_prob_joint_mixed_parity_targets_zero():
    x, y = SignVector([1, 1, 1, 1]), SignVector([1, 1, -1, -1])
    assert prob_joint_even(4, x, y, 0, 1) == 0


def _matched_pair(rng, n):
    x = random_sign(rng, n)
    while True:
        y = random_sign(rng, n)
        if y.parity == x.parity:
            return x, y


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_prob_joint_total_and_marginals(rng, n):
    for _ in range(5):
        x, y = _matched_pair(rng, n)
        ts = range(-n // 2, n // 2 + 1)
        table = {(a, b): prob_joint_even(n, x, y, a, b) for a in ts for b in ts}
        assert sum(table.values()) == 1
        for a in ts:
            assert sum(table[(a, b)] for b in ts) == prob_single_even(n, x, a)
        law = joint_inner_product_law(n, x, y)
        for (a, b), p in table.items():
            assert p == law.get((2 * a, 2 * b), 0)


def test_agreement():
    assert agreement(SignVector([1, -1, 1]), SignVector([1, 1, 1])) == 2


def test_even_class_and_oracle():
    E = even_class(6)
    assert E.shape == (32, 6)
    assert sorted(map(tuple, E.tolist())) == sorted(_even_vectors_by_hand(6))
    assert enumerate_even_oracle(6, lambda R: np.ones(len(R), bool)) == 1
    target = E[5]
    assert enumerate_even_oracle(6, lambda R: np.all(R == target, axis=1)) == Fraction(1, 32)
    with pytest.raises(TooLarge):
        even_class(21)
    with pytest.raises(ValueError):
        enumerate_even_oracle(4, lambda R: np.ones(3, bool))


def test_inner_product_law_total(rng):
    x = random_sign(rng, 8)
    assert sum(inner_product_law(8, x).values()) == 1


def test_all_sign_vectors_count():
    V = all_sign_vectors(5)
    assert V.shape == (32, 5) and len({tuple(r) for r in V.tolist()}) == 32


def test_spencer_examples():
    e0 = spencer_estimate(1000, 0)
    assert e0.exact_log_ratio == 0.0 and e0.approx_log_ratio == 0.0
    e = spencer_estimate(1000, 100)
    assert e.within_budget
    assert e.error_budget == pytest.approx(3 * (100**3 + 100**2 + 1) / 1000**2 + 100**2 / (1000 * 1100))
    ratio = math.comb(100, 55) / math.comb(100, 50)
    assert math.exp(spencer_estimate(100, 10).exact_log_ratio) == pytest.approx(ratio, rel=1e-12)


def test_spencer_negative_t_symmetric():
    assert spencer_estimate(1000, -20).exact_log_ratio == spencer_estimate(1000, 20).exact_log_ratio


def test_spencer_errors():
    with pytest.raises(ParityViolation):
        spencer_estimate(100, 3)
    with pytest.raises(OddN):
        spencer_estimate(101, 1)
    with pytest.raises(ValueError):
        spencer_estimate(1000, 102)
    assert spencer_estimate(1000, 100).t == 100  # t^3 = n^2 is inside the regime


def test_spencer_matches_float_lgamma():
    for t in (0, 10, 40, 100):
        ref = (math.lgamma(1001) - math.lgamma(501 + t // 2) - math.lgamma(501 - t // 2)) \
            - (math.lgamma(1001) - 2 * math.lgamma(501))
        assert spencer_estimate(1000, t).exact_log_ratio == pytest.approx(ref, abs=1e-9)


def test_spencer_budget_positive():
    assert spencer_budget(1000, 0) == pytest.approx(3e-6)


def test_parity_checks_examples(rng):
    x = random_sign(rng, 7)
    assert parity_checks(x, x).all_hold
    for _ in range(200):
        u, v = random_sign(rng, 6), random_sign(rng, 6)
        if int(u.entries.sum()) == int(v.entries.sum()):
            assert parity_checks(u, v).equal_sum_implies_even_diff


def test_parity_exhaustive_small():
    counts = parity_checks_exhaustive(6)
    assert counts["pairs"] == 4**6
    assert all(v == 0 for k, v in counts.items() if k != "pairs")


def test_parity_law_iff(rng):
    # matching parity <=> even Hamming distance, exhaustively at n = 5
    V = [SignVector(v) for v in itertools.product((-1, 1), repeat=5)]
    for u in V:
        for v in V:
            diff = int(np.count_nonzero(u.entries != v.entries))
            assert (u.parity == v.parity) == (diff % 2 == 0)


def test_in_even_support_out_of_range():
    x = SignVector([1, 1])
    assert not in_even_support(2, x, 4)
    assert not in_even_support(2, x, 1)


def test_verification_csv():
    rows = [VerificationRow("single-inner", 4, "x0:t=0", Fraction(3, 4), Fraction(3, 4)),
            VerificationRow("single-inner", 4, "x0:t=1", Fraction(0), Fraction(1, 8))]
    lines = verification_csv(rows).splitlines()
    assert lines[0] == "lemma_id,n,case_id,exact_num,exact_den,oracle_num,oracle_den,match"
    assert lines[1] == "single-inner,4,x0:t=0,3,4,3,4,1"
    assert lines[2].endswith(",0")


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5).map(lambda k: 2 * k), st.data())
def test_single_probability_against_oracle_property(n, data):
    bits = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n))
    t = data.draw(st.integers(-n // 2 - 1, n // 2 + 1))
    x = SignVector(bits)
    xs = np.array(bits)
    assert prob_single_even(n, x, t) == enumerate_even_oracle(n, lambda R: R.astype(int) @ xs == 2 * t)
