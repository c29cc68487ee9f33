import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import Chebyshev, Polynomial

from ngonlift import interp
from ngonlift.interp import LevelSequence


def grid_min(p, lo, hi, m=20001):
    """Oracle: dense sampling of p on [lo, hi]."""
    xs = np.linspace(lo, hi, m)
    return float(np.min(p(xs)))


def test_level_sequence_validation():
    LevelSequence((0, 1, 2))
    with pytest.raises(ValueError):
        LevelSequence((1, 2, 3))
    with pytest.raises(ValueError):
        LevelSequence((0, 2, 1))
    with pytest.raises(ValueError):
        LevelSequence((3, 3, 1), increasing=False)


def test_candidate_for_arithmetic_levels():
    p = interp.candidate_interpolant([0, 1, 2, 3])
    # -q/q'(0) + x with q = x(x-1)(x-2)(x-3), q'(0) = -6
    expected = Polynomial([0, 0, 11 / 6, -1, 1 / 6])
    assert np.allclose(interp.trim(p).coef, expected.coef)
    assert interp.is_globally_nonnegative(p)


def test_candidate_fails_for_spread_levels():
    p = interp.candidate_interpolant([0, 1, 2, 100])
    verdict = interp.is_globally_nonnegative(p)
    assert not verdict
    assert p(verdict.witness) < 0
    assert verdict.value == pytest.approx(p(verdict.witness))


@given(st.lists(st.floats(0.05, 3), min_size=1, max_size=6))
def test_interpolation_conditions(gaps):
    a = np.concatenate([[0.0], np.cumsum(gaps)])
    p = interp.candidate_interpolant(a)
    assert np.allclose(p(a), a, atol=1e-7 * max(1, a[-1]) ** len(a))
    assert abs(p.deriv()(0.0)) < 1e-9


def test_nonnegativity_examples():
    x = Polynomial([0, 1])
    witness = interp.is_globally_nonnegative(x ** 2 - 1)
    assert not witness and witness.witness == pytest.approx(0.0)
    assert interp.is_globally_nonnegative((x - 1) ** 2 * (x + 2) ** 2)
    assert not interp.is_globally_nonnegative(x ** 3)
    assert not interp.is_globally_nonnegative(-(x ** 2))
    assert interp.is_globally_nonnegative(Polynomial([2.0]))
    assert not interp.is_globally_nonnegative(Polynomial([-1.0]))


def test_nonnegative_on_interval():
    x = Polynomial([0, 1])
    assert interp.nonnegative_on(x ** 3, lower=0.0)
    assert not interp.nonnegative_on(x ** 3, lower=-0.5)
    assert interp.nonnegative_on(1 - x ** 2, -1, 1)
    assert not interp.nonnegative_on(1 - x ** 2, -1, 1.5)


@settings(max_examples=80)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=6),
       st.floats(-0.5, 0.5).filter(lambda c: abs(c) > 1e-4))
def test_decision_on_shifted_squares(roots, c):
    # r^2 attains 0 at each root, so r^2 + c >= 0 exactly when c >= 0
    r = Polynomial.fromroots(roots)
    verdict = interp.is_globally_nonnegative(r * r + c)
    assert bool(verdict) == (c > 0)
    if c < 0:
        assert (r * r + c)(verdict.witness) < 0


def test_tangent_condition():
    x = Polynomial([0, 1])
    assert not interp.tangent_condition(x ** 3, 1.0)
    q = interp.vanishing_poly(range(6))
    assert interp.tangent_condition(q, 0.0)
    assert interp.tangent_condition(x ** 3, 1.0, lower=-2.0)


def test_chebyshev_recurrence():
    xs = np.linspace(-1, 1, 101)
    for m in range(8):
        assert np.allclose(interp.chebyshev(m)(xs), np.cos(m * np.arccos(xs)), atol=1e-12)
    with pytest.raises(ValueError):
        interp.chebyshev(-1)


def test_subadditivity_and_disc_cone():
    assert interp.is_subadditive([0, 1, 2, 3])
    assert not interp.is_subadditive([0, 1, 3])
    assert interp.disccone_check(1, 2, 3)
    assert not interp.disccone_check(1, 2, 100)
    with pytest.raises(ValueError):
        interp.disccone_check(2, 1, 3)


def test_ngon_levels():
    a = interp.ngon_levels(8)
    assert len(a) == 4 and not a.increasing
    assert np.allclose(a.values, [math.cos((2 * i + 1) * math.pi / 8) for i in range(4)])


@pytest.mark.parametrize("n", range(3, 65))
def test_theta_rank_interpolant(n):
    p = interp.theta_rank_interpolant(n)
    assert p.degree() == 2 * math.ceil(n / 4)
    a = np.cos((2 * np.arange(math.ceil(n / 2)) + 1) * np.pi / n)
    assert np.allclose(p(a), a[0] - a, atol=1e-9)
    assert grid_min(p, -1.5, 1.5) >= -1e-9


@pytest.mark.parametrize("n", range(3, 40))
def test_qN_is_chebyshev(n):
    assert interp.lemma_qN_cheb_check(n)


def test_chebyshev_tangent_lemma():
    assert interp.cheb_tangent_lemma_check(4, math.cos(math.pi / 4))
    assert interp.cheb_tangent_lemma_check(3, 0.5)
    assert not interp.cheb_tangent_lemma_check(3, 0.5, global_domain=True)
    assert interp.cheb_tangent_lemma_check(7, 0.95)
    with pytest.raises(ValueError):
        interp.cheb_tangent_lemma_check(4, 0.5)


def test_figure_curve_columns():
    q = Chebyshev.basis(4)
    xs = np.linspace(-1, 1, 5)
    rows = interp.figure_curve(q, 0.5, xs)
    assert rows.shape == (5, 3)
    assert np.allclose(rows[:, 1], q(xs))
    u = 0.5
    assert np.allclose(rows[:, 2], q(u) + q.deriv()(u) * (xs - u))
