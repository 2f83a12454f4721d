import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strongperm.approximation import (
    ChebyshevExpansion, cheb_expand, chebyshev_on_interval, chebyshev_T, interpolation_check, markov_bound_check,
    markov_chebyshev_ratio, rational_markov_check, sup_norm, uniform_points, zygmund_sum,
)
from strongperm.errors import PreconditionError
from strongperm.ncpoly import ScalarPolynomial
from strongperm.ratfunc import RationalFunctionQ


def test_cheb_expand_examples():
    K = Fraction(3)
    assert cheb_expand(ScalarPolynomial.parse("x^2"), K).coeffs == (K**2 / 2, 0, K**2 / 2)
    assert cheb_expand(ScalarPolynomial.parse("x^3"), K).coeffs == (0, 3 * K**3 / 4, 0, K**3 / 4)
    T3 = chebyshev_T(3)
    scaled = ScalarPolynomial([c / K**k for k, c in enumerate(T3.coeffs)])
    assert cheb_expand(scaled, K).coeffs == (0, 0, 0, 1)
    with pytest.raises(PreconditionError):
        cheb_expand(T3, 0)


@given(st.lists(st.integers(-20, 20), min_size=1, max_size=12), st.integers(1, 5))
def test_cheb_round_trip_exact(coeffs, K):
    h = ScalarPolynomial([Fraction(c) for c in coeffs])
    e = cheb_expand(h, Fraction(K))
    assert e.to_polynomial() == h
    assert len(e.coeffs) <= h.degree + 1


@settings(max_examples=30)
@given(st.integers(1, 30), st.floats(0.5, 6.0), st.integers(0, 10**6))
def test_cheb_round_trip_float(q, K, seed):
    rng = np.random.default_rng(seed)
    h = ScalarPolynomial(list(rng.standard_normal(q + 1) / K ** np.arange(q + 1)))
    e = cheb_expand(h, K)
    xs = np.linspace(-K, K, 2001)
    assert np.max(np.abs(e(xs) - h.as_floats()[::-1] @ np.vander(xs, q + 1).T)) <= 1e-10


def test_markov_examples():
    for q in (1, 2, 5, 9, 15):
        rep = markov_bound_check(chebyshev_on_interval(q, Fraction(2)), 2.0, 1)
        assert rep.ratio == pytest.approx(1.0, abs=1e-6)
    lin = markov_bound_check(ScalarPolynomial.parse("x"), 1.0, 1)
    assert lin.passed and lin.ratio <= 0.5
    const = markov_bound_check(ScalarPolynomial.parse("7"), 1.0, 1)
    assert const.lhs == 0 and const.passed


def test_markov_higher_order_ratio_at_chebyshev():
    """T_q attains prod_{k<m}(1 - k^2/q^2) of the bound: equality only at m = 1."""
    for q in (4, 15):
        for m in (2, 3):
            rep = markov_bound_check(chebyshev_on_interval(q, Fraction(1)), 1.0, m)
            assert rep.ratio == pytest.approx(markov_chebyshev_ratio(q, m), rel=1e-9)
            assert rep.ratio == pytest.approx(math.prod(1 - k * k / q**2 for k in range(m)), rel=1e-9)


def test_markov_random_polynomials_every_degree():
    rng = random.Random(11)
    for q in range(1, 16):
        for _ in range(100):
            h = ScalarPolynomial([rng.uniform(-1, 1) for _ in range(q)] + [rng.choice([-1, 1]) * rng.uniform(0.1, 1)])
            m = rng.randint(1, min(q, 3))
            assert markov_bound_check(h, 1.5, m).passed


def test_interpolation_examples():
    for q in (1, 3, 6):
        h = chebyshev_on_interval(q, Fraction(1))
        pts = uniform_points(1.0, q)
        assert interpolation_check(h, 1.0, pts).passed
    assert interpolation_check(ScalarPolynomial.parse("2"), 1.0, uniform_points(1.0, 1)).norm == 2
    rng = np.random.default_rng(2)
    h = ScalarPolynomial(list(rng.standard_normal(6)))
    rep = interpolation_check(h, 1.0, uniform_points(1.0, 5))
    assert rep.passed and rep.norm <= 2 * rep.grid_max
    with pytest.raises(PreconditionError):
        interpolation_check(h, 1.0, [0.0, 1.0])


def test_sup_norm_exact_and_float():
    h = ScalarPolynomial.parse("x^2 - x")
    assert sup_norm(h, 0, 1) == pytest.approx(0.25)
    assert sup_norm(chebyshev_T(15), -1, 1) == pytest.approx(1.0, abs=1e-12)


def test_rational_markov_examples():
    for u in (Fraction(3, 2), Fraction(2), Fraction(5)):
        r = RationalFunctionQ.make((1 / u,), {1 / u: 1})  # 1 / (u - x)
        for m in (1, 2, 3):
            rep = rational_markov_check(r, 1.0, m)
            assert rep.passed and 0 < rep.ratio <= 1
    poly = RationalFunctionQ.make(chebyshev_on_interval(4, Fraction(1)).coeffs)
    rp = rational_markov_check(poly, 1.0, 1)
    assert rp.c == 1.0 and rp.passed
    assert rational_markov_check(RationalFunctionQ.constant(3), 1.0, 2).lhs == 0
    with pytest.raises(PreconditionError):
        rational_markov_check(RationalFunctionQ.make((1,), {1: 1}), 1.5, 1)


def test_zygmund_examples():
    for j in (1, 3, 6):
        e = ChebyshevExpansion(1.0, tuple([0] * j + [1]))
        rep = zygmund_sum(e, 2, math.inf)
        assert rep.lhs == j**2
        assert rep.rhs == pytest.approx(j**3, rel=1e-9)
        assert rep.ratio <= 1
    assert zygmund_sum(ChebyshevExpansion(1.0, (5,)), 2, 3.0).lhs == 0
    rng = np.random.default_rng(4)
    rep = zygmund_sum(cheb_expand(ScalarPolynomial(list(rng.standard_normal(11))), 2.0), 2, 2.0)
    assert math.isfinite(rep.ratio) and rep.ratio > 0
