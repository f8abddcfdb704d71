import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import min_parts_dp
from scaling_entropy.semimetric import (
    EmpiricalTriple,
    InstanceTooLarge,
    _branch_and_bound,
    _exhaustive,
    check_partition,
    epsilon_entropy_bounds,
    epsilon_entropy_exact,
    epsilon_entropy_greedy,
    epsilon_entropy_lower,
    validate_semimetric,
)


def uniform_discrete(m):
    return EmpiricalTriple.uniform(1.0 - np.eye(m))


def random_triple(rng, m, dim=2, scale=1.0):
    pts = rng.random((m, dim)) * scale
    d = np.abs(pts[:, None, :] - pts[None, :, :]).max(axis=-1)
    w = rng.random(m) + 0.05
    return EmpiricalTriple(w / w.sum(), d)


@st.composite
def triples(draw, max_m=10):
    m = draw(st.integers(1, max_m))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    return random_triple(np.random.default_rng(seed), m, scale=draw(st.sampled_from([0.3, 1.0, 2.0])))


def test_validate_pass_single_point():
    assert validate_semimetric(EmpiricalTriple([1.0], [[0.0]])).ok


def test_validate_asymmetry():
    rep = validate_semimetric(EmpiricalTriple([0.5, 0.5], [[0, 1], [2, 0]]))
    assert not rep.ok and rep.axiom == "asymmetry" and rep.indices == (0, 1)


def test_validate_triangle():
    d = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    rep = validate_semimetric(EmpiricalTriple.uniform(d))
    assert str(rep) == "fail: triangle at (0,2,1)"


def test_validate_diagonal_and_negative():
    assert validate_semimetric(EmpiricalTriple.uniform([[1, 0], [0, 0]])).axiom == "diagonal"
    assert validate_semimetric(EmpiricalTriple.uniform([[0, -1], [-1, 0]])).axiom == "negative"


def test_zero_offdiagonal_allowed():
    assert validate_semimetric(EmpiricalTriple.uniform(np.zeros((3, 3)))).ok


def test_bad_weights_rejected():
    with pytest.raises(ValueError):
        EmpiricalTriple([0.5, 0.6], np.zeros((2, 2)))


def test_exact_single_point():
    est = epsilon_entropy_exact(EmpiricalTriple([1.0], [[0.0]]), 0.3)
    assert est.k_lower == est.k_upper == 1 and est.h_upper_bits == 0


def test_exact_uniform_four():
    t = uniform_discrete(4)
    est = epsilon_entropy_exact(t, 0.5)
    assert est.k_upper == 3 and est.exact
    assert math.isclose(est.h_upper_bits, math.log2(3))
    assert min_parts_dp(list(t.weights), t.distances.tolist(), 0.5) == 3
    assert check_partition(t, 0.5, est.partition)


def test_exact_two_point():
    t = EmpiricalTriple([0.9, 0.1], [[0, 1], [1, 0]])
    est = epsilon_entropy_exact(t, 0.2)
    assert est.k_upper == 1 and est.partition == (1, 0)


def test_exact_all_zero():
    est = epsilon_entropy_exact(EmpiricalTriple.uniform(np.zeros((6, 6))), 0.1)
    assert est.k_upper == 1


def test_exact_limits():
    with pytest.raises(InstanceTooLarge):
        epsilon_entropy_exact(uniform_discrete(15), 0.5)
    with pytest.raises(ValueError):
        epsilon_entropy_exact(uniform_discrete(2), 0.0)


def test_greedy_examples():
    assert epsilon_entropy_greedy(uniform_discrete(4), 0.5).k_upper == 3
    assert epsilon_entropy_greedy(uniform_discrete(4), 0.5).partition == (1, 2, 3, 0)
    assert epsilon_entropy_greedy(EmpiricalTriple([1.0], [[0.0]]), 1.0).k_upper == 1
    est = epsilon_entropy_greedy(EmpiricalTriple.uniform([[0, 1], [1, 0]]), 0.25)
    assert est.k_upper == 2 and est.h_upper_bits == 1


def test_lower_examples():
    assert epsilon_entropy_lower(uniform_discrete(4), 0.5).k_lower == 3
    assert epsilon_entropy_lower(EmpiricalTriple([0.9, 0.1], [[0, 1], [1, 0]]), 0.2).k_lower == 1
    assert epsilon_entropy_lower(EmpiricalTriple.uniform(np.zeros((5, 5))), 0.3).k_lower == 1


def test_branch_and_bound_matches_exhaustive():
    rng = np.random.default_rng(7)
    for _ in range(150):
        t = random_triple(rng, int(rng.integers(1, 9)))
        eps = float(rng.uniform(0.05, 0.8))
        close = t.distances < eps - 1e-12
        k1, _ = _exhaustive(t.weights, close, eps - 1e-12)
        k2, labels = _branch_and_bound(t.weights, close, eps - 1e-12, 1)
        assert k1 == k2
        assert check_partition(t, eps, labels)


@settings(max_examples=200, deadline=None)
@given(triples(), st.floats(0.02, 1.0))
def test_sandwich(t, eps):
    lo = epsilon_entropy_lower(t, eps).k_lower
    ex = epsilon_entropy_exact(t, eps)
    gr = epsilon_entropy_greedy(t, eps)
    assert lo <= ex.k_upper <= gr.k_upper
    assert ex.k_upper == min_parts_dp(list(t.weights), t.distances.tolist(), eps - 1e-12)
    assert check_partition(t, eps, ex.partition)
    assert check_partition(t, eps, gr.partition)


@settings(max_examples=100, deadline=None)
@given(triples(max_m=12), st.floats(0.02, 1.0), st.floats(0.02, 1.0))
def test_exact_monotone_in_eps(t, e1, e2):
    e1, e2 = sorted((e1, e2))
    assert epsilon_entropy_exact(t, e1).k_upper >= epsilon_entropy_exact(t, e2).k_upper


@settings(max_examples=60, deadline=None)
@given(triples(max_m=12), st.floats(0.05, 1.0), st.data())
def test_permutation_invariance(t, eps, data):
    perm = data.draw(st.permutations(range(t.m)))
    assert epsilon_entropy_exact(t.permuted(perm), eps).k_upper == epsilon_entropy_exact(t, eps).k_upper


def test_bounds_on_larger_instance():
    rng = np.random.default_rng(3)
    t = random_triple(rng, 300)
    for eps in (0.05, 0.1, 0.3):
        est = epsilon_entropy_bounds(t, eps)
        assert est.k_lower <= est.k_upper
        assert check_partition(t, eps, est.partition)
