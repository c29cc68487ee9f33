import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ngonlift import lowerbound as lb
from ngonlift.lowerbound import Clustering
from ngonlift.soscert import (
    facet_functional,
    hexagon_certificate,
    hierarchy_certificate,
    powers_of_two_certificate,
)
from ngonlift.trigspace import TrigPoly


def fs(*parts):
    return tuple(frozenset(p) for p in parts)


def test_mod_star_examples():
    for n in (7, 8, 20):
        assert lb.mod_star(n - 1, n) == -1
        assert lb.mod_star(n // 2, n) == n // 2
        assert lb.mod_star(n // 2 + 1, n) == n // 2 + 1 - n
    with pytest.raises(ValueError):
        lb.mod_star(1, 2)


@given(st.integers(3, 64), st.integers(-1000, 1000))
def test_mod_star_range(n, k):
    m = lb.mod_star(k, n)
    assert -math.ceil(n / 2) < m <= n // 2 and (m - k) % n == 0


@pytest.mark.parametrize("n", range(3, 65))
def test_mod_star_difference_identity(n):
    g = (n - 1) // 2
    for k in range(g + 1):
        for kk in range(g + 1):
            assert lb.mod_star(kk - k, n) == lb.mod_star(kk, n) - lb.mod_star(k, n)


def test_valid_clustering_examples():
    assert lb.is_valid_clustering(Clustering(20, fs({0, 1}, {3}, {7}), 1), K={0, 1, 3, 7})
    assert lb.is_valid_clustering(Clustering(20, fs({0, 1, 3, 7}), 7))
    # distance exactly gamma is not enough
    assert not lb.is_valid_clustering(Clustering(20, fs({0}, {2}), 2))
    # gamma must stay below N/2
    assert not lb.is_valid_clustering(Clustering(20, fs({0, 10}), 10))
    assert not lb.is_valid_clustering(Clustering(20, fs({0, 1}, {1, 5}), 1))
    assert not lb.is_valid_clustering(Clustering(20, fs({0, 1}, {5}), 1), K={0, 1, 5, 9})


def test_greedy_hand_trace():
    c = lb.greedy_clustering([0, 1, 3, 7], 20)
    assert c is not None
    assert c.clusters == fs({0, 1}, {3}, {7})
    assert c.gamma == 1 and c.merges == 1
    assert c.distances == (1, 2, 3, 4, 6, 7)


def test_greedy_separated_singletons():
    c = lb.greedy_clustering([0, 2, 4, 9], 20)
    assert c.merges == 0 and c.gamma == 1 and len(c.clusters) == 4


def test_greedy_single_cluster():
    c = lb.greedy_clustering([0, 1, 2, 3], 64)
    assert c is not None and len(c.clusters) == 1 and c.gamma == 3


def test_greedy_powers_of_two_support():
    n = 6
    K = [0] + [2 ** i for i in range(n - 1)]
    assert lb.greedy_clustering(K, 2 ** n) is None


@settings(max_examples=200)
@given(st.integers(8, 200), st.sets(st.integers(0, 10 ** 6), min_size=1, max_size=8))
def test_greedy_output_is_valid(n, K):
    K = {k % n for k in K}
    c = lb.greedy_clustering(K, n)
    if c is not None:
        assert lb.is_valid_clustering(c, K=K)


def test_separating_functional_values():
    n = 16
    L = lb.separating_functional(1, n)
    assert L.apply(TrigPoly.basis(0, n)) == 1
    assert L.apply(TrigPoly.basis(n - 1, n)) == pytest.approx(cmath.exp(1j * math.pi / n))
    assert L.apply(TrigPoly.basis(2, n)) == 0
    assert L.apply(facet_functional(n)) == pytest.approx(math.cos(math.pi / n) - 1, abs=1e-15)
    for k, v in L.values().items():
        assert abs(abs(v) - 1) < 1e-15 and min(k, n - k) <= 1
    with pytest.raises(ValueError):
        lb.separating_functional(0, n)
    with pytest.raises(ValueError):
        lb.separating_functional(8, n)


@settings(max_examples=100)
@given(st.integers(8, 40), st.data())
def test_L_of_square_on_interval(n, data):
    g = data.draw(st.integers(1, (n - 1) // 2))
    coeffs = data.draw(st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False),
                                min_size=g + 1, max_size=g + 1))
    h = dict(enumerate(coeffs))
    h[g] = h[g] + 1e-3  # pin the interval length
    L = lb.separating_functional(g, n)
    f = TrigPoly(n, h)
    val = L.apply(f.abs2())
    closed = abs(sum(c * cmath.exp(-1j * math.pi * lb.mod_star(k, n) / n) for k, c in h.items())) ** 2
    assert val.real == pytest.approx(closed, abs=1e-12)
    assert abs(val.imag) <= 1e-12


def test_cluster_square_identity_helper():
    lhs, rhs = lb.cluster_square_identity({0: 1 + 1j, 1: 0.3, 2: -0.5j}, 16)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_gram_matches_literal_square():
    n = 24
    K = (0, 5, 11)
    L = lb.separating_functional(2, n)
    rng = np.random.default_rng(3)
    for _ in range(20):
        h = lb.random_coefficients(rng, len(K))
        literal = L.apply(TrigPoly(n, dict(zip(K, h))).abs2())
        assert np.conj(h) @ L.gram(K) @ h == pytest.approx(literal, abs=1e-12)


def test_refute_no_consecutive():
    rep = lb.refute_sos_valid([0, 2, 4], 16)
    assert rep is not None and rep.gamma == 1 and len(rep.clustering.clusters) == 3
    assert rep.sound


def test_refute_interval():
    rep = lb.refute_sos_valid(range(5), 32)
    assert rep is not None and len(rep.clustering.clusters) == 1
    assert rep.L_ell.real == pytest.approx(math.cos(math.pi / 32) - 1, abs=1e-14)
    data = json.loads(rep.dumps())
    assert set(data) == {"n", "K", "clusters", "gamma", "L_ell", "min_L_h2"}


@pytest.mark.parametrize("n", range(2, 21))
def test_no_refutation_of_powers_of_two_support(n):
    N = 2 ** n
    K = {0} | {2 ** i for i in range(n - 1)}
    herm = {k % N for k in K} | {(-k) % N for k in K}
    assert lb.refute_sos_valid(herm, N) is None


CORPUS = ([hexagon_certificate()] + [powers_of_two_certificate(n) for n in range(2, 9)]
          + [hierarchy_certificate(N) for N in range(3, 33)])


@pytest.mark.parametrize("cert", CORPUS, ids=lambda c: f"{c.scheme}-{c.n}")
def test_corpus_supports_are_never_refuted(cert):
    assert lb.refute_sos_valid(cert.hermitian_support, cert.n) is None
    assert len(cert.hermitian_support) >= math.log(cert.n / 2) / 2


@settings(max_examples=100)
@given(st.integers(8, 64), st.sets(st.integers(0, 63), min_size=1, max_size=6))
def test_refuted_sets_carry_no_corpus_certificate(n, K):
    K = {k % n for k in K}
    rep = lb.refute_sos_valid(K, n)
    if rep is None:
        return
    assert rep.sound
    for cert in CORPUS:
        if cert.n == n:
            assert not cert.hermitian_support <= K


def test_log_bound_examples():
    rng = np.random.default_rng(7)
    stats = lb.log_bound_check(64, 1000, rng)
    assert stats.successes == 1000 and stats.max_size == 3
    assert stats.single_cluster + stats.no_consecutive + stats.general == 1000
    with pytest.raises(ValueError):
        lb.log_bound_check(4, 10)


@pytest.mark.parametrize("N", [2 ** 10, 2 ** 16, 2 ** 20])
def test_geometric_sets_cluster(N):
    size = math.ceil(math.log(N / 2)) - 1
    K = lb.geometric_set(N, size)
    assert len(K) < math.log(N / 2)
    assert lb.greedy_clustering(K, N) is not None


def test_invariant_breach_is_raised(monkeypatch):
    monkeypatch.setattr(lb, "in_diameter", lambda K, n: 10 ** 9)
    with pytest.raises(lb.InvariantBreach):
        lb.greedy_clustering([0, 1, 5], 64)
