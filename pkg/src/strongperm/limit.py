"""The limiting model: left-regular representation of F_d on l^2(F_d) (x) C^D.

Vectors are finitely supported and stored exactly, so walk counts on the
2d-regular tree and the moments tau(X_F^p) come out as exact integers or
rationals.  Only the norm estimate drops to floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Tuple

from .errors import BudgetExceeded
from .exact import conj, real_part
from .ncpoly import NCPolynomial
from .words import Letters, as_word, reduce_letters

DEFAULT_SUPPORT_BUDGET = 2_000_000


def _left_mul(w: Letters, g: Letters) -> Letters:
    k = 0
    n = min(len(w), len(g))
    while k < n and w[-1 - k] == -g[k]:
        k += 1
    return w[: len(w) - k] + g[k:]


@dataclass
class GroupVector:
    """Finitely supported vector in C^D (x) l^2(F_d): (coordinate, group element) -> amplitude."""

    d: int
    D: int = 1
    data: Dict[Tuple[int, Letters], object] = field(default_factory=dict)

    @classmethod
    def delta(cls, d: int, word=(), coord: int = 0, D: int = 1) -> "GroupVector":
        w = reduce_letters(as_word(word, d).letters) if not isinstance(word, tuple) else reduce_letters(word)
        return cls(d, D, {(coord, w): 1})

    def get(self, word=(), coord: int = 0):
        key = reduce_letters(as_word(word, self.d).letters) if not isinstance(word, tuple) else word
        return self.data.get((coord, key), 0)

    def norm_squared(self):
        return sum(a * conj(a) for a in self.data.values())

    def inner(self, other: "GroupVector"):
        """<self, other>, conjugate-linear in the first slot."""
        return sum(conj(a) * other.data.get(k, 0) for k, a in self.data.items())

    def __len__(self):
        return len(self.data)


def apply(P: NCPolynomial, psi: GroupVector, budget: int = DEFAULT_SUPPORT_BUDGET) -> GroupVector:
    """(sum_w A_w (x) lambda(w)) psi, exactly."""
    if P.D != psi.D:
        raise ValueError(f"coefficient dimension mismatch: {P.D} vs {psi.D}")
    out: Dict[Tuple[int, Letters], object] = {}
    D = P.D
    for w, M in P.terms.items():
        for (j, g), amp in psi.data.items():
            target = _left_mul(w, g)
            for i in range(D):
                a = M[i][j]
                if a == 0:
                    continue
                key = (i, target)
                out[key] = out.get(key, 0) + a * amp
    out = {k: v for k, v in out.items() if v != 0}
    if len(out) > budget:
        raise BudgetExceeded("group-vector support", budget, len(out))
    return GroupVector(P.d, D, out)


@lru_cache(maxsize=64)
def _adjacency_walk_vector(d: int, p: int) -> GroupVector:
    if p == 0:
        return GroupVector(d, 1, {(0, ()): 1})
    return apply(NCPolynomial.adjacency(d), _adjacency_walk_vector(d, p - 1))


def walk_vector(d: int, p: int) -> Dict[Letters, int]:
    """A_F^p delta_e as a map reduced word -> number of length-p walks ending there."""
    vec = _adjacency_walk_vector(d, p)
    return {g: int(a) for (_, g), a in vec.data.items()}


def walk_count(v, p: int, d: int) -> int:
    """<delta_v, A_F^p delta_e>: letter sequences of length p whose product is v."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    v = reduce_letters(as_word(v, d).letters)
    if len(v) > p or (p - len(v)) % 2:
        return 0
    return walk_vector(d, p).get(v, 0)


@lru_cache(maxsize=None)
def radial_walk_counts(d: int, p: int) -> Tuple[int, ...]:
    """Number of length-p walks from e ending at one fixed vertex at distance l, l = 0..p.

    Uses the distance chain of the 2d-regular tree; equals walk_count(v, p)
    for any v with |v| = l.
    """
    counts = [1] + [0] * p
    for _ in range(p):
        nxt = [0] * (p + 1)
        for l, c in enumerate(counts):
            if not c:
                continue
            if l == 0:
                nxt[1] += 2 * d * c
            else:
                nxt[l - 1] += c
                if l + 1 <= p:
                    nxt[l + 1] += (2 * d - 1) * c
        counts = nxt
    per_vertex = []
    for l, c in enumerate(counts):
        sphere = 1 if l == 0 else 2 * d * (2 * d - 1) ** (l - 1)
        if c % sphere:
            raise AssertionError("walk counts must be equidistributed on spheres")
        per_vertex.append(c // sphere)
    return tuple(per_vertex)


def adjacency_moment(d: int, p: int) -> int:
    """tau(A_F^p) via the radial recursion (fast path for the adjacency operator)."""
    return radial_walk_counts(d, p)[0]


def tau_moment(P: NCPolynomial, p: int, budget: int = DEFAULT_SUPPORT_BUDGET):
    """(tr_D (x) tau)(P^p), exact."""
    if p == 0:
        return Fraction(1)
    total = 0
    for j in range(P.D):
        vec = GroupVector(P.d, P.D, {(j, ()): 1})
        for _ in range(p):
            vec = apply(P, vec, budget)
        total += vec.data.get((j, ()), 0)
    return total / Fraction(P.D) if P.D > 1 else total


def kesten_norm(d: int) -> float:
    """Norm of the adjacency operator of the 2d-regular tree."""
    if d < 1:
        raise ValueError("d must be positive")
    return 2.0 * math.sqrt(2 * d - 1)


@dataclass
class LimitMomentSeries:
    d: int
    p_max: int
    values: List  # values[p] = (tr_D (x) tau)(X^p) for p = 0..p_max


def limit_moments(P: NCPolynomial, p_max: int, budget: int = DEFAULT_SUPPORT_BUDGET) -> LimitMomentSeries:
    """All moments (tr_D (x) tau)(P^p), p <= p_max, from one sweep per coordinate."""
    sums = [0] * (p_max + 1)
    for j in range(P.D):
        vec = GroupVector(P.d, P.D, {(j, ()): 1})
        sums[0] += 1
        for p in range(1, p_max + 1):
            vec = apply(P, vec, budget)
            sums[p] += vec.data.get((j, ()), 0)
    values = [s / Fraction(P.D) if P.D > 1 else s for s in sums]
    return LimitMomentSeries(P.d, p_max, values)


@dataclass
class NormEstimate:
    lower: float
    estimates: List[float]  # m_{2p}^{1/2p}, p = 1..p_max
    ratios: List[float]  # m_{2p+2}/m_{2p}, p = 1..p_max-1
    series: LimitMomentSeries  # even moments m_{2p} at index p


def limit_norm_estimate(P: NCPolynomial, p_max: int, budget: int = DEFAULT_SUPPORT_BUDGET) -> NormEstimate:
    """Lower bounds m_{2p}^{1/2p} <= ||P(s, s*)||, p = 1..p_max.

    For self-adjoint P, m_{2p} = (1/D) sum_j ||P^p (e_j (x) delta_e)||^2, so only
    p applications are needed.  Non-self-adjoint P is replaced by P*P, whose
    norm is ||P||^2; the returned estimates are square-rooted accordingly.
    """
    squared = not P.is_self_adjoint
    Q = P.adjoint() * P if squared else P
    even = [0] * (p_max + 1)
    for j in range(Q.D):
        vec = GroupVector(Q.d, Q.D, {(j, ()): 1})
        even[0] += 1
        for p in range(1, p_max + 1):
            vec = apply(Q, vec, budget)
            even[p] += vec.norm_squared()
    # squared norms are real even for Gaussian-rational amplitudes
    even = [Fraction(real_part(e)) / Q.D for e in even]
    ests = []
    for p in range(1, p_max + 1):
        val = _root(even[p], 2 * p)
        ests.append(math.sqrt(val) if squared else val)
    ratios = [float(even[p + 1] / even[p]) if even[p] else float("nan") for p in range(1, p_max)]
    lower = max(ests) if ests else 0.0
    return NormEstimate(lower, ests, ratios, LimitMomentSeries(Q.d, 2 * p_max, even))


def _root(m: Fraction, k: int) -> float:
    if m <= 0:
        return 0.0
    # exp(log(num)/k - log(den)/k) avoids float overflow for huge moments
    return math.exp((math.log(m.numerator) - math.log(m.denominator)) / k)


def projected_return_element(letters: Letters) -> int:
    """<delta_e, lambda(l_1) Q lambda(l_2) Q ... Q lambda(l_s) delta_e>, Q = 1 - delta_e delta_e^*.

    Computed by applying the operators right to left to an explicit vector.
    """
    vec: Dict[Letters, int] = {(): 1}
    for pos in range(len(letters) - 1, -1, -1):
        vec = {_left_mul((letters[pos],) if letters[pos] else (), g): a for g, a in vec.items()}
        if pos > 0:
            vec.pop((), None)
    return vec.get((), 0)


def matrix_element(v: Letters, letters: Letters) -> int:
    """<delta_v, lambda(l_1) ... lambda(l_k) delta_e>."""
    g: Letters = ()
    for x in reversed(letters):
        if x:
            g = _left_mul((x,), g)
    return 1 if g == v else 0


def first_visit_indicator_via_operators(w, v) -> int:
    """1_{w first visits v}, written with matrix elements of the left-regular representation.

    <delta_v, lambda(w) delta_e> minus, for each split s, the Q-projected return
    amplitude of the first s letters times the indicator that the remaining
    letters already reach v.
    """
    w = as_word(w)
    letters = w.letters
    target = reduce_letters(as_word(v, w.d).letters)
    total = matrix_element(target, letters)
    for s in range(1, len(letters)):
        tail = matrix_element(target, letters[s:])
        if tail:
            total -= projected_return_element(letters[:s]) * tail
    return total
