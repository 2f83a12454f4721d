import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oracles import letters_of, naive_expected_trace
from strongperm.errors import BudgetExceeded
from strongperm.expectations import (
    brute_force_expectation, degree_bound, denominator_gq, enumerate_quotients, exact_expectation_at,
    polynomial_trace_expectation, quotient_signatures, word_expectation,
)
from strongperm.ncpoly import NCPolynomial, ScalarPolynomial
from strongperm.ratfunc import RationalFunctionQ
from strongperm.words import Word, inverse_letters, reduce_letters, reduced_words

X = RationalFunctionQ.make((0, 1))

# values from the loop-based oracle in oracles.py, N = 2, 3, 4, 5
FROZEN = {
    "aa": ["1/2", "1/3", "1/4", "1/5"],
    "aaa": ["0", "1/3", "1/4", "1/5"],
    "abAB": ["1/2", "1/6", "1/12", "1/20"],
    "aabb": ["1/2", "1/6", "1/12", "1/20"],
    "aaaa": ["1/2", "1/3", "1/2", "2/5"],
    "ab": ["0", "0", "0", "0"],
}


def W(text, d=None):
    return Word.parse(text, d)


def test_denominator_gq_examples():
    assert denominator_gq(2, 2) == (1, -1)
    assert denominator_gq(3, 2) == (1, -3, 2)
    assert denominator_gq(1, 2) == (1,)


@pytest.mark.parametrize("q, d", [(q, d) for q in range(1, 13) for d in (1, 2, 3, 5)])
def test_denominator_degree_bound(q, d):
    assert len(denominator_gq(q, d)) - 1 <= degree_bound(q, d) - min(d, q) + 1e-9


def test_quotients_of_short_words():
    (g,) = list(enumerate_quotients(W("a")))
    assert (g.v, g.e) == (1, 1)
    assert sorted((g.v, g.e) for g in enumerate_quotients(W("aa"))) == [(1, 1), (2, 2)]
    # x_0 = x_1 forces the a-loop and b-loop on one vertex; both partitions are admissible
    assert sorted((g.v, g.e) for g in enumerate_quotients(W("ab"))) == [(1, 2), (2, 2)]


@pytest.mark.parametrize("text", ["abAB", "aabAb", "abAAbb", "aaBBaB"])
def test_quotient_invariants(text):
    for g in enumerate_quotients(W(text)):
        assert g.euler_excess >= 0
        assert g.v >= max(g.e_by_colour)
        for E in g.edges:
            assert len({s for s, _ in E}) == len(E) == len({t for _, t in E})


def test_word_expectation_examples():
    assert word_expectation(W("a")).is_zero
    assert word_expectation(W("aA")) == RationalFunctionQ.make((1, -1))
    assert word_expectation(W("aa")) == X
    aaa = word_expectation(W("aaa"))
    assert aaa == X and aaa.taylor(1)[1] == 1


@pytest.mark.parametrize("text", sorted(FROZEN))
def test_frozen_oracle_values(text):
    for N, val in zip(range(2, 6), FROZEN[text]):
        assert brute_force_expectation(W(text), N) == Fraction(val)
        assert exact_expectation_at(W(text), N) == Fraction(val)
        if N >= len(text):
            assert word_expectation(W(text)).at_N(N) == Fraction(val)


def test_vectorised_oracle_matches_loop_oracle():
    rng = random.Random(5)
    for _ in range(25):
        L = rng.randint(1, 6)
        letters = tuple(rng.choice([1, -1, 2, -2, 0]) for _ in range(L))
        for N in (2, 3):
            assert brute_force_expectation(Word(letters, 2), N) == naive_expected_trace(letters, N, 2)


def test_brute_force_spec_examples():
    assert brute_force_expectation(W("aA"), 4) == Fraction(3, 4)
    assert brute_force_expectation(W("aa"), 3) == Fraction(1, 3)
    with pytest.raises(BudgetExceeded):
        brute_force_expectation(W("abc"), 7)


def test_rational_function_agrees_with_oracle_for_large_enough_N():
    """Exact validity for N >= |w|; below that the rational function may not apply."""
    for L in range(1, 5):
        for w in reduced_words(2, L):
            r = word_expectation(Word(w, 2))
            for N in range(max(L, 2), 6):
                assert r.at_N(N) == brute_force_expectation(Word(w, 2), N)


def test_direct_route_agrees_with_oracle_for_every_N():
    for L in range(1, 5):
        for w in reduced_words(2, L):
            for N in range(1, 6):
                assert exact_expectation_at(Word(w, 2), N) == brute_force_expectation(Word(w, 2), N)


def test_small_N_counterexample():
    """sigma^3 has no fixed points beyond 1 in S_2 on average, but 1/N holds for N >= 3."""
    assert brute_force_expectation(W("aaa"), 2) == 0
    # over g_3 the unreduced form has a removable pole at N = 2; the reduced form is x
    with pytest.raises(ZeroDivisionError):
        word_expectation(W("aaa")).at_N(2)
    assert word_expectation(W("aaa")).reduced().at_N(2) == Fraction(1, 2)


word_strategy = st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=7)


@given(word_strategy, st.integers(0, 6))
def test_invariance_under_rotation_inversion_relabelling(w, shift):
    w = tuple(w)
    base = word_expectation(Word(w, 2))
    k = shift % len(w)
    assert word_expectation(Word(w[k:] + w[:k], 2)) == base
    assert word_expectation(Word(inverse_letters(w), 2)) == base
    swapped = tuple((3 - abs(x)) * (1 if x > 0 else -1) for x in w)
    assert word_expectation(Word(swapped, 2)) == base
    flipped = tuple(-x if abs(x) == 1 else x for x in w)
    assert word_expectation(Word(flipped, 2)) == base


@given(word_strategy)
def test_structure_and_value_at_infinity(w):
    w = tuple(w)
    r = word_expectation(Word(w, 2))
    assert r(Fraction(0)) == (1 if not reduce_letters(w) else 0)
    red = r.reduced()
    q = len(w)
    num_deg, den_deg = red.degree_bounds()
    assert num_deg <= degree_bound(q, 2) and den_deg <= degree_bound(q, 2)


def test_signatures_count_matches_enumeration():
    w = W("abAABb")
    sig = quotient_signatures(w)
    assert sum(sig.values()) == sum(1 for _ in enumerate_quotients(w))


def test_cap_enforced():
    with pytest.raises(BudgetExceeded):
        word_expectation(W("ab" * 7))


def test_polynomial_trace_examples():
    A = NCPolynomial.adjacency(2)
    psi = polynomial_trace_expectation(A, ScalarPolynomial.parse("x^2"))
    nu = psi.taylor(1)
    assert nu == [4, 0]
    assert polynomial_trace_expectation(NCPolynomial.parse("a", 1), ScalarPolynomial.parse("x")).is_zero
    const = polynomial_trace_expectation(A, ScalarPolynomial.parse("3"))
    assert const == 3 * RationalFunctionQ.make((1, -1))


def test_polynomial_trace_matches_brute_force():
    P = NCPolynomial.parse("a + A + 1/2*b - 1/2*B", 2)
    h = ScalarPolynomial.parse("x^2 + x")
    psi = polynomial_trace_expectation(P, h)
    # brute force over the expansion words, N >= q q0 = 2
    from strongperm.ncpoly import trace_word_expansion

    for N in (2, 3, 4):
        direct = sum(c * brute_force_expectation(w, N) for c, w in trace_word_expansion(P, h))
        assert psi.at_N(N) == direct


def test_word_parse_letters_helper():
    assert tuple(letters_of("aB1")) == W("aB1", 2).letters
