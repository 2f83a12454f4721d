"""Exact expected traces of words in independent uniform random permutations.

For a word w = l_1 ... l_q and permutations sigma_1..sigma_d of [N], the fixed
points of w(sigma) are closed walks x_0, x_1, ..., x_q = x_0 where letter l_t
joins x_t and x_{t-1} by an edge of colour |l_t|.  Grouping walks by their
coincidence pattern (which positions carry the same vertex) gives

    E[Fix w(sigma)] = sum_Gamma (N)_{v_Gamma} / prod_j (N)_{e_Gamma^j},

summed over partitions of the q positions for which each colour class of
edges is a partial injection.  Writing x = 1/N turns this into a rational
function whose denominator divides g_q(x) = prod_j (1 - j x)^{d_j}.

Normalisation: traces are taken on the complement of the constant vector and
divided by N, so E[tr_N w] = (E[Fix] - 1) / N and the identity word gives 1 - x.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .errors import BudgetExceeded, InvariantViolation
from .ncpoly import NCPolynomial, ScalarPolynomial, trace_word_expansion
from .ratfunc import Poly, RationalFunctionQ, linear_factor, padd, pmul, ppow, pscale, pshift_x
from .words import Letters, Word, as_word, canonical_cyclic_key, cyclic_reduce_letters, reduce_letters, strip_identity

DEFAULT_WORD_CAP = int(os.environ.get("BUDGET_WORD_LENGTH", 12))
BRUTE_FORCE_LIMIT = int(os.environ.get("BUDGET_BRUTE_FORCE", 20_000_000))


def gq_multiplicities(q: int, d: int) -> Dict[int, int]:
    """d_j = min(d, floor(q / (j + 1))) for j = 1..q-1 (zeros dropped)."""
    out = {}
    for j in range(1, q):
        m = min(d, q // (j + 1))
        if m:
            out[j] = m
    return out


def denominator_gq(q: int, d: int) -> Poly:
    """g_q(x) = prod_{j=1}^{q-1} (1 - j x)^{d_j} as a coefficient tuple."""
    if q < 1 or d < 1:
        raise ValueError("q and d must be positive")
    out: Poly = (1,)
    for j, m in gq_multiplicities(q, d).items():
        out = pmul(out, ppow(linear_factor(j), m))
    return out


def degree_bound(q: int, d: int) -> float:
    return q * (1 + math.log(d))


@dataclass(frozen=True)
class QuotientGraph:
    """One admissible coincidence pattern of a word cycle.

    ``blocks[t]`` is the block of position x_t (restricted-growth labels), and
    ``edges[j-1]`` the set of distinct colour-j edges (source, target).
    """

    blocks: Tuple[int, ...]
    edges: Tuple[frozenset, ...]

    @property
    def v(self) -> int:
        return max(self.blocks) + 1 if self.blocks else 0

    @property
    def e_by_colour(self) -> Tuple[int, ...]:
        return tuple(len(E) for E in self.edges)

    @property
    def e(self) -> int:
        return sum(self.e_by_colour)

    @property
    def euler_excess(self) -> int:
        """e - v + 1, the first Betti number of the connected quotient."""
        return self.e - self.v + 1


def _check_word(w, cap: int) -> Tuple[Letters, int]:
    w = as_word(w)
    letters = strip_identity(w.letters)
    if len(letters) > cap:
        raise BudgetExceeded("word length", cap, len(letters))
    return letters, w.d


def _search(letters: Letters, d: int, on_leaf) -> None:
    """Depth-first assignment of x_1..x_{q-1} in restricted-growth order.

    Colour-j edges are kept as two dicts (out, in) so that the partial
    injection condition is a lookup: once a block has an outgoing colour-j
    edge, the next position is forced.
    """
    q = len(letters)
    out = [dict() for _ in range(d + 1)]
    inn = [dict() for _ in range(d + 1)]
    blocks = [0] * q

    def maps(t: int):
        # letter t joins x_{t-1} and x_t; +j: x_t -> x_{t-1}, -j: x_{t-1} -> x_t.
        # Returns (fwd, back) with fwd keyed by x_{t-1}'s block.
        lt = letters[t - 1]
        j = abs(lt)
        return (inn[j], out[j]) if lt > 0 else (out[j], inn[j])

    def close(nblocks: int) -> None:
        lt = letters[q - 1]
        j = abs(lt)
        a, b = blocks[q - 1], blocks[0]
        src, dst = (b, a) if lt > 0 else (a, b)
        have = out[j].get(src)
        if have is not None:
            if have == dst:
                on_leaf(nblocks, out, blocks)
            return
        if dst in inn[j]:
            return
        out[j][src] = dst
        inn[j][dst] = src
        on_leaf(nblocks, out, blocks)
        del out[j][src]
        del inn[j][dst]

    def step(t: int, nblocks: int) -> None:
        if t == q:
            close(nblocks)
            return
        fwd, back = maps(t)
        known = blocks[t - 1]
        forced = fwd.get(known)
        if forced is not None:
            blocks[t] = forced
            step(t + 1, nblocks)
            return
        for b in range(nblocks + 1):
            if b < nblocks and b in back:
                continue
            blocks[t] = b
            fwd[known] = b
            back[b] = known
            step(t + 1, nblocks + (b == nblocks))
            del fwd[known]
            del back[b]

    if q == 0:
        return
    if q == 1:
        close(1)
        return
    step(1, 1)


def enumerate_quotients(w, cap: int = DEFAULT_WORD_CAP) -> Iterator[QuotientGraph]:
    """Yield every admissible coincidence pattern of the cycle of ``w``, once each."""
    letters, d = _check_word(w, cap)
    found: List[QuotientGraph] = []

    def leaf(nblocks, out, blocks):
        edges = tuple(frozenset(out[j].items()) for j in range(1, d + 1))
        found.append(QuotientGraph(tuple(blocks), edges))

    _search(letters, d, leaf)
    yield from found


def quotient_signatures(w, cap: int = DEFAULT_WORD_CAP) -> Dict[Tuple[int, Tuple[int, ...]], int]:
    """Counts of admissible quotients by (v, per-colour edge counts)."""
    letters, d = _check_word(w, cap)
    counts: Dict[Tuple[int, Tuple[int, ...]], int] = {}

    def leaf(nblocks, out, blocks):
        key = (nblocks, tuple(len(out[j]) for j in range(1, d + 1)))
        counts[key] = counts.get(key, 0) + 1

    _search(letters, d, leaf)
    return counts


def falling_factorial_x(k: int) -> Poly:
    """prod_{l<k} (1 - l x), so that (N)_k = N^k times this at x = 1/N."""
    out: Poly = (1,)
    for l in range(1, k):
        out = pmul(out, linear_factor(l))
    return out


def _expectation_uncached(letters: Letters, d: int, q_nominal: int) -> RationalFunctionQ:
    q = len(letters)
    gmult = gq_multiplicities(q_nominal, d)
    numerator: Poly = ()
    for (v, es), count in sorted(quotient_signatures(Word(letters, d), cap=max(q, 1)).items()):
        e = sum(es)
        if e - v + 1 < 0:
            raise InvariantViolation("quotient of a cycle must be connected")
        # multiplicity of (1 - l x) in prod_j (N)_{e_j}
        mult: Dict[int, int] = {}
        for ej in es:
            for l in range(1, ej):
                mult[l] = mult.get(l, 0) + 1
        term = pshift_x(falling_factorial_x(v), e - v + 1)
        for l, m in gmult.items():
            extra = m - mult.get(l, 0)
            if extra < 0:
                raise InvariantViolation(f"colour multiplicity {mult[l]} at j={l} exceeds d_j={m}")
            term = pmul(term, ppow(linear_factor(l), extra))
        for l in mult:
            if l not in gmult:
                raise InvariantViolation(f"factor (1-{l}x) outside g_q")
        numerator = padd(numerator, pscale(term, count))
    # subtract the trivial eigenvector: E[tr] = x (E[Fix] - 1)
    numerator = padd(numerator, pscale(pshift_x(denominator_gq(q_nominal, d), 1), -1))
    return RationalFunctionQ.make(numerator, gmult)


_CACHE: Dict[Tuple[Letters, int], RationalFunctionQ] = {}


def clear_cache() -> None:
    _CACHE.clear()


def word_expectation(w, cap: int = DEFAULT_WORD_CAP, check: bool = True) -> RationalFunctionQ:
    """E[tr_N w(S^N)] as an exact rational function of x = 1/N.

    The result is written over g_q for q = |w| (identity letters stripped); it
    agrees with the expectation for every N >= q.  Words are first reduced and
    cyclically reduced, and results are memoised by canonical cyclic class.
    """
    letters, d = _check_word(w, cap)
    q = len(letters)
    core = cyclic_reduce_letters(reduce_letters(letters))[1]
    if not core:
        return RationalFunctionQ.make((1, -1))
    key = (canonical_cyclic_key(core), len(core))
    base = _CACHE.get(key)
    if base is None:
        # the canonical key is a relabelled word; its rank is its largest letter
        kl = key[0]
        base = _expectation_uncached(kl, max(abs(x) for x in kl), len(kl))
        _CACHE[key] = base
    # rewrite over g_q(d) for the nominal length and rank
    target = gq_multiplicities(q, d)
    own = base.factor_dict
    if any(own.get(Fraction(j), 0) > m for j, m in ((Fraction(j), m) for j, m in target.items())):
        raise InvariantViolation("core denominator does not divide g_q")
    result = RationalFunctionQ.make(base._over({Fraction(j): m for j, m in target.items()}), target)
    if check:
        _check_structure(result, q, d)
    return result


def _check_structure(r: RationalFunctionQ, q: int, d: int) -> None:
    red = r.reduced()
    g = gq_multiplicities(q, d)
    for j, m in red.factors:
        if j.denominator != 1 or g.get(int(j), 0) < m:
            raise InvariantViolation(f"reduced denominator does not divide g_{q}")
    bound = degree_bound(q, d) + 1e-9
    num_deg, den_deg = red.degree_bounds()
    if num_deg > bound or den_deg > bound:
        raise InvariantViolation(f"degree bound violated: ({num_deg}, {den_deg}) > {bound:.3f}")


def polynomial_trace_expectation(P: NCPolynomial, h: ScalarPolynomial, budget=None,
                                 cap: int = DEFAULT_WORD_CAP) -> RationalFunctionQ:
    """Psi_h(x) with E[tr_{DN} h(X^N)] = Psi_h(1/N) for N >= deg(h) deg(P).

    Each reduced word contributes coefficient times word_expectation; the empty
    word contributes coefficient times (1 - x), so constant h = c gives c (1 - x).
    """
    total = RationalFunctionQ.make(())
    for coeff, word in trace_word_expansion(P, h, budget=budget):
        total = total + word_expectation(word, cap=cap, check=False) * coeff
    return total


def exact_expectation_at(w, N: int, cap: int = DEFAULT_WORD_CAP) -> Fraction:
    """E[tr_N w] at one N by direct summation over quotients with v <= N.

    Valid for every N >= 1, including N < |w| where the rational function of
    :func:`word_expectation` need not apply.
    """
    letters, d = _check_word(w, cap)
    if not reduce_letters(letters):
        return Fraction(N - 1, N)
    core = cyclic_reduce_letters(reduce_letters(letters))[1]
    fix = Fraction(0)
    for (v, es), count in quotient_signatures(Word(core, d), cap=cap).items():
        if v > N:
            continue
        num = math.perm(N, v)
        den = 1
        for ej in es:
            den *= math.perm(N, ej)
        fix += Fraction(count * num, den)
    return (fix - 1) / N


def _all_perms(N: int) -> np.ndarray:
    return np.array(list(permutations(range(N))), dtype=np.int64)


def brute_force_expectation(w, N: int, limit: int = BRUTE_FORCE_LIMIT) -> Fraction:
    """Exact average of tr_N w(S^N) over all tuples of permutations of [N].

    Enumerates (N!)^{d'} tuples for the d' generators that occur in w, so it is
    an oracle for small N only.
    """
    w = as_word(w)
    letters = strip_identity(w.letters)
    gens = sorted({abs(x) for x in letters})
    nperm = math.factorial(N)
    total = nperm ** len(gens)
    if total * N > limit:
        raise BudgetExceeded("brute-force tuples x N", limit, total * N)
    if not letters:
        return Fraction(N - 1, N)
    perms = _all_perms(N)
    inv = np.argsort(perms, axis=1)
    grids = np.meshgrid(*[np.arange(nperm)] * len(gens), indexing="ij")
    idx = {g: grid.ravel() for g, grid in zip(gens, grids)}
    start = np.broadcast_to(np.arange(N), (total, N))
    state = start.copy()
    # w(S) e_x: apply the rightmost letter first
    for lt in reversed(letters):
        table = perms if lt > 0 else inv
        state = table[idx[abs(lt)][:, None], state]
    fixed = int((state == start).sum())
    return Fraction(fixed - total, total * N)
