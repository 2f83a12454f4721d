"""Taylor functionals nu_i of expected traces and their independent word-count route.

nu_i(h) is the i-th Taylor coefficient at x = 0 of Psi_h(x), the rational
function with E[tr h(X^N)] = Psi_h(1/N).  For moments h(x) = x^p the first
order term also has a closed form by counting words: a word reducing to v^k,
v a non-power and k >= 2, contributes omega(k) - 1 (the number of divisors of
k other than 1), and each word reducing to e contributes -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence

import numpy as np

from .approximation import sup_norm
from .errors import InvariantViolation
from .expectations import exact_expectation_at, polynomial_trace_expectation
from .limit import radial_walk_counts, walk_vector
from .ncpoly import NCPolynomial, ScalarPolynomial, trace_word_expansion
from .ratfunc import RationalFunctionQ
from .words import divisor_count, power_decompose_letters


@dataclass
class NuFunctionalValue:
    order: int
    value: object
    provenance: str  # "taylor" or "wordcount"


def taylor_nu(psi: RationalFunctionQ, m: int) -> List:
    """[nu_0, ..., nu_m]: Taylor coefficients of psi at x = 0."""
    return psi.taylor(m)


def word_weight(letters) -> int:
    """First-order weight of a reduced word: -1 for e, omega(k) - 1 for v^k."""
    if not letters:
        return -1
    _, k = power_decompose_letters(tuple(letters))
    return divisor_count(k) - 1


def nu1_adjacency_ball(d: int, p: int) -> int:
    """nu_1(x^p) for the adjacency polynomial, summing over the radius-p ball."""
    total = 0
    for g, count in walk_vector(d, p).items():
        total += word_weight(g) * count
    return total


@lru_cache(maxsize=None)
def cyclically_reduced_count(d: int, r: int) -> int:
    """Number of cyclically reduced words of length r >= 1: trace of the non-backtracking matrix power."""
    n = 2 * d
    M = np.ones((n, n), dtype=object)
    for i in range(d):
        M[i, i + d] = 0
        M[i + d, i] = 0
    P = np.identity(n, dtype=object)
    for _ in range(r):
        P = P.dot(M)
    return int(sum(P[i, i] for i in range(n)))


def conjugator_count(d: int, s: int) -> int:
    """Reduced conjugators c of length s with c u c^{-1} reduced, for a fixed cyclic core u."""
    return 1 if s == 0 else (2 * d - 2) * (2 * d - 1) ** (s - 1)


@lru_cache(maxsize=None)
def power_weight_sphere(d: int, length: int) -> int:
    """Sum of omega(k) - 1 over all g != e of the given length, g = v^k with v a non-power.

    Equals sum_{j >= 2} #{u : |u^j| = length}, and u = c r c^{-1} with r
    cyclically reduced has |u^j| = 2|c| + j|r|.
    """
    total = 0
    for j in range(2, length + 1):
        for r in range(1, length // j + 1):
            rest = length - j * r
            if rest % 2:
                continue
            total += cyclically_reduced_count(d, r) * conjugator_count(d, rest // 2)
    return total


def nu1_adjacency_radial(d: int, p: int) -> int:
    """nu_1(x^p) for the adjacency polynomial via spherical symmetry of walk counts."""
    W = radial_walk_counts(d, p)
    total = -W[0]
    for l in range(1, p + 1):
        if W[l]:
            total += W[l] * power_weight_sphere(d, l)
    return total


def nu1_adjacency_wordcount(d: int, p: int, method: str = "auto") -> int:
    """nu_1(x^p) = -tau(A^p) + sum_{g = v^k, k >= 2} (omega(k) - 1) walk_count(g, p)."""
    if method == "auto":
        method = "ball" if p <= 6 else "radial"
    if method == "ball":
        return nu1_adjacency_ball(d, p)
    if method == "radial":
        return nu1_adjacency_radial(d, p)
    raise ValueError(f"unknown method {method!r}")


def nu1_polynomial_wordcount(P: NCPolynomial, p: int, budget=None):
    """nu_1(x^p) for a general polynomial, from its merged word expansion."""
    total = 0
    for coeff, word in trace_word_expansion(P, ScalarPolynomial.monomial(p), budget=budget):
        total += coeff * word_weight(word.letters)
    return total


@dataclass
class SupportEstimate:
    p_max: int
    normalized: List[float]  # (|nu(x^p)| / poly(p))^{1/p}, p = 1..p_max
    rho_hat: float
    target: float | None = None
    tolerance: float = 0.01
    within_target: bool | None = None


def _normalizer(kind: str, p: int) -> float:
    if kind == "poly6":  # degree-6 prefactor 1 + p^2 (p + 1)^4
        return 1 + p * p * (p + 1) ** 4
    if kind == "none":
        return 1.0
    raise ValueError(f"unknown normalizer {kind!r}")


def support_estimate(moments: Sequence, normalizer: str = "poly6", target: float | None = None,
                     tolerance: float = 0.01) -> SupportEstimate:
    """Growth rates of moments[p-1] = nu(x^p); rho_hat = max over the top third of p."""
    if len(moments) < 3:
        raise ValueError("need at least three moments")
    vals = []
    for p, mu in enumerate(moments, start=1):
        mag = abs(complex(mu)) if not isinstance(mu, (int, Fraction)) else abs(mu)
        if mag == 0:
            vals.append(0.0)
        else:
            # logs keep huge integers out of float overflow
            vals.append(math.exp((_log_abs(mag) - math.log(_normalizer(normalizer, p))) / p))
    start = len(vals) - max(1, len(vals) // 3)
    rho = max(vals[start:])
    within = None if target is None else all(v <= target + tolerance for v in vals)
    return SupportEstimate(len(vals), vals, rho, target, tolerance, within)


def _log_abs(x) -> float:
    if isinstance(x, Fraction):
        return math.log(x.numerator) - math.log(x.denominator)
    if isinstance(x, int):
        return math.log(x)
    return math.log(float(x))


@dataclass
class MasterInequalityReport:
    N: int
    m: int
    q: int
    q0: int
    K: float
    lhs: float
    lhs_exact: object
    rhs: float
    h_norm: float
    nus: List = field(default_factory=list)
    route: str = "rational"
    passed: bool = False


def true_expectation(P: NCPolynomial, h: ScalarPolynomial, N: int, budget=None) -> Fraction:
    """E[tr_{DN} h(X^N)] at one N, valid for every N (direct quotient sums)."""
    total = 0
    for coeff, word in trace_word_expansion(P, h, budget=budget):
        total += coeff * exact_expectation_at(word, N)
    return total


def verify_master_inequality(P: NCPolynomial, h: ScalarPolynomial, N: int, m: int,
                             K: float | None = None, budget=None, psi: RationalFunctionQ | None = None
                             ) -> MasterInequalityReport:
    """|E tr h(X^N) - sum_{i<m} nu_i(h)/N^i| <= (4 q q0 (1 + log d))^{4m} / N^m ||h||_{C0[-K,K]}.

    q is taken as max(deg h, 1) so that constants, whose left side is |c|/N at
    m = 1 under the 1 - 1/N trace normalisation, are covered by a nonzero
    right side.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    q = max(h.degree, 1)
    q0 = max(P.degree, 1)
    if K is None:
        K = P.coefficient_norm_sum()
    if psi is None:
        psi = polynomial_trace_expectation(P, h, budget=budget)
    nus = taylor_nu(psi, m - 1)
    x = Fraction(1, N)
    if N >= q * q0:
        value = psi(x)
        route = "rational"
    else:
        value = true_expectation(P, h, N, budget=budget)
        route = "direct"
    diff = value - sum(nu * x ** i for i, nu in enumerate(nus))
    lhs = abs(complex(diff)) if not isinstance(diff, (int, Fraction)) else float(abs(diff))
    hn = sup_norm(h, -float(K), float(K))
    rhs = (4 * q * q0 * (1 + math.log(P.d))) ** (4 * m) / N ** m * hn
    passed = lhs <= rhs * (1 + 1e-12)
    return MasterInequalityReport(N, m, q, q0, float(K), lhs, diff, rhs, hn, nus, route, passed)


def check_linear_functional_bound(P: NCPolynomial, h: ScalarPolynomial, m: int, K: float | None = None,
                                  psi: RationalFunctionQ | None = None) -> dict:
    """|nu_i(h)| <= (4 q q0 (1 + log d))^{4i} ||h||_{C0[-K,K]} for i = 0..m."""
    q = max(h.degree, 1)
    q0 = max(P.degree, 1)
    if K is None:
        K = P.coefficient_norm_sum()
    if psi is None:
        psi = polynomial_trace_expectation(P, h)
    hn = sup_norm(h, -float(K), float(K))
    rows = []
    for i, nu in enumerate(taylor_nu(psi, m)):
        bound = (4 * q * q0 * (1 + math.log(P.d))) ** (4 * i) * hn
        mag = abs(complex(nu)) if not isinstance(nu, (int, Fraction)) else float(abs(nu))
        rows.append({"order": i, "nu": nu, "abs": mag, "bound": bound, "passed": mag <= bound * (1 + 1e-12)})
    if not all(r["passed"] for r in rows):
        raise InvariantViolation("linear functional bound violated")
    return {"h_norm": hn, "rows": rows}
