"""Noncommutative polynomials P = sum_w A_w (x) w with matrix coefficients.

Terms are keyed by reduced words (signed-letter tuples) and carry a D x D
coefficient matrix stored as a tuple of row tuples.  Exact entries are
``Fraction``/``GaussianRational``; float or complex entries are accepted and
mark the polynomial as approximate.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .errors import BudgetExceeded
from .exact import conj, format_scalar, is_exact, parse_scalar
from .words import Letters, Word, as_word, inverse_letters, reduce_letters

Matrix = Tuple[Tuple, ...]

DEFAULT_EXPANSION_BUDGET = int(os.environ.get("BUDGET_WORDS", 5_000_000))


# -- small dense matrices over an arbitrary field ---------------------------

def mat_identity(D: int, one=1) -> Matrix:
    return tuple(tuple(one if i == j else 0 for j in range(D)) for i in range(D))


def mat_scalar(c, D: int) -> Matrix:
    return tuple(tuple(c if i == j else 0 for j in range(D)) for i in range(D))


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_scale(A: Matrix, c) -> Matrix:
    return tuple(tuple(c * a for a in row) for row in A)


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    if len(A) == 1:
        return ((A[0][0] * B[0][0],),)
    cols = list(zip(*B))
    return tuple(tuple(sum((a * b for a, b in zip(row, col)), 0) for col in cols) for row in A)


def mat_adjoint(A: Matrix) -> Matrix:
    return tuple(tuple(conj(A[j][i]) for j in range(len(A))) for i in range(len(A)))


def mat_is_zero(A: Matrix) -> bool:
    return all(a == 0 for row in A for a in row)


def mat_trace(A: Matrix):
    return sum((A[i][i] for i in range(len(A))), 0)


def mat_normalized_trace(A: Matrix):
    t = mat_trace(A)
    D = len(A)
    if D == 1:
        return t
    return t / Fraction(D) if is_exact(t) else t / D


def mat_opnorm(A: Matrix) -> float:
    M = np.array([[complex(a) for a in row] for row in A])
    return float(np.linalg.norm(M, 2))


def parse_matrix(text: str) -> Matrix:
    rows = re.findall(r"\[([^\[\]]*)\]", text)
    if not rows:
        raise ValueError(f"cannot parse matrix {text!r}")
    M = tuple(tuple(parse_scalar(e.strip()) for e in row.split(",")) for row in rows)
    if any(len(r) != len(M) for r in M):
        raise ValueError(f"matrix {text!r} is not square")
    return M


class ScalarPolynomial:
    """Univariate polynomial h(x) = sum_k c_k x^k (coefficients low to high)."""

    def __init__(self, coeffs: Sequence):
        c = list(coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c) if c else (0,)

    @classmethod
    def monomial(cls, p: int, c=1) -> "ScalarPolynomial":
        return cls([0] * p + [c])

    @classmethod
    def parse(cls, text: str) -> "ScalarPolynomial":
        """Parse ``"x^4"``, ``"1 - 2x + 3/2x^3"`` or a coefficient list ``"0,0,1"``."""
        s = text.replace(" ", "").replace("**", "^").replace("*", "")
        if "x" not in s:
            return cls([parse_scalar(t) for t in s.split(",")])
        coeffs: Dict[int, object] = {}
        for sign, body in re.findall(r"([+-]?)([^+-]+)", s):
            if "x" in body:
                c, _, p = body.partition("x")
                power = int(p[1:]) if p.startswith("^") else 1
                coef = parse_scalar(c) if c else Fraction(1)
            else:
                power, coef = 0, parse_scalar(body)
            if sign == "-":
                coef = -coef
            coeffs[power] = coeffs.get(power, 0) + coef
        n = max(coeffs) + 1
        return cls([coeffs.get(k, 0) for k in range(n)])

    @property
    def degree(self) -> int:
        return 0 if self.coeffs == (0,) else len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def derivative(self, m: int = 1) -> "ScalarPolynomial":
        c = list(self.coeffs)
        for _ in range(m):
            c = [i * c[i] for i in range(1, len(c))] or [0]
        return ScalarPolynomial(c)

    def __add__(self, other: "ScalarPolynomial") -> "ScalarPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0] * (n - len(self.coeffs))
        b = list(other.coeffs) + [0] * (n - len(other.coeffs))
        return ScalarPolynomial([x + y for x, y in zip(a, b)])

    def __mul__(self, c) -> "ScalarPolynomial":
        return ScalarPolynomial([c * a for a in self.coeffs])

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, ScalarPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def as_floats(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def __repr__(self):
        return f"ScalarPolynomial({[format_scalar(c) for c in self.coeffs]})"


class NCPolynomial:
    """P = sum_w A_w (x) w in M_D(C) (x) C<s, s*> over the free group of rank d."""

    def __init__(self, terms: Dict[Letters, Matrix], d: int, D: int = 1):
        self.d = d
        self.D = D
        self.terms: Dict[Letters, Matrix] = terms

    # -- construction -------------------------------------------------------

    @classmethod
    def from_terms(cls, pairs: Iterable[Tuple[object, object]], d: int, D: int | None = None) -> "NCPolynomial":
        """Build from ``(coefficient, word)`` pairs; words are reduced and merged.

        A scalar coefficient stands for that multiple of the identity matrix.
        """
        pairs = list(pairs)
        if D is None:
            D = 1
            for c, _ in pairs:
                if isinstance(c, tuple) or isinstance(c, list):
                    D = len(c)
                    break
        terms: Dict[Letters, Matrix] = {}
        for c, w in pairs:
            w = as_word(w, d)
            if w.d > d:
                raise ValueError(f"word {w} needs rank {w.d} > {d}")
            M = tuple(tuple(row) for row in c) if isinstance(c, (tuple, list)) else mat_scalar(c, D)
            if len(M) != D:
                raise ValueError(f"coefficient dimension {len(M)} != {D}")
            key = reduce_letters(w.letters)
            terms[key] = mat_add(terms[key], M) if key in terms else M
        return cls._canonical(terms, d, D)

    @classmethod
    def _canonical(cls, terms: Dict[Letters, Matrix], d: int, D: int) -> "NCPolynomial":
        return cls({w: M for w, M in terms.items() if not mat_is_zero(M)}, d, D)

    @classmethod
    def adjacency(cls, d: int) -> "NCPolynomial":
        pairs = []
        for i in range(1, d + 1):
            pairs += [(Fraction(1), (i,)), (Fraction(1), (-i,))]
        return cls.from_terms(pairs, d)

    @classmethod
    def generator(cls, i: int, d: int) -> "NCPolynomial":
        return cls.from_terms([(Fraction(1), (i,))], d)

    @classmethod
    def identity(cls, d: int, D: int = 1) -> "NCPolynomial":
        return cls({(): mat_identity(D, Fraction(1))}, d, D)

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "NCPolynomial":
        """Parse e.g. ``"a + A + 2*bB - 1/2*ab"`` or ``"[[1,0],[0,2]]*a + [[0,1],[1,0]]*A"``.

        ``adjacency`` expands to s_1 + s_1* + ... + s_d + s_d*.  Complex
        scalars must be parenthesized, ``(1+2i)*a``.  A bare number is a
        multiple of the identity.
        """
        text = text.strip()
        if text.lower() in ("adjacency", "adj"):
            if d is None:
                raise ValueError("adjacency requires d")
            return cls.adjacency(d)
        pairs = []
        for sign, body in _split_terms(text):
            coeff, word = _parse_term(body)
            if sign == "-":
                coeff = mat_scale(coeff, -1) if isinstance(coeff, tuple) else -coeff
            pairs.append((coeff, word))
        rank = max([max([abs(x) for x in Word.parse(w).letters] + [1]) for _, w in pairs] + [1])
        d = d if d is not None else rank
        if rank > d:
            raise ValueError(f"polynomial uses generator {rank} > d={d}")
        return cls.from_terms([(c, Word.parse(w, d)) for c, w in pairs], d)

    @classmethod
    def from_json(cls, obj: dict) -> "NCPolynomial":
        d = int(obj["d"])
        pairs = []
        for t in obj["terms"]:
            c = t["coeff"]
            if isinstance(c, list) and c and isinstance(c[0], list):
                c = tuple(tuple(parse_scalar(e) for e in row) for row in c)
            else:
                c = parse_scalar(c)
            pairs.append((c, Word.parse(t["word"], d)))
        return cls.from_terms(pairs, d, obj.get("D"))

    def to_json(self) -> dict:
        terms = []
        for w, M in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
            coeff = format_scalar(M[0][0]) if self.D == 1 else [[format_scalar(a) for a in row] for row in M]
            terms.append({"coeff": coeff, "word": str(Word(w, self.d))})
        return {"d": self.d, "D": self.D, "terms": terms}

    # -- algebra ------------------------------------------------------------

    def _check(self, other: "NCPolynomial"):
        if self.D != other.D:
            raise ValueError(f"coefficient dimension mismatch: {self.D} vs {other.D}")

    def __add__(self, other: "NCPolynomial") -> "NCPolynomial":
        self._check(other)
        terms = dict(self.terms)
        for w, M in other.terms.items():
            terms[w] = mat_add(terms[w], M) if w in terms else M
        return NCPolynomial._canonical(terms, max(self.d, other.d), self.D)

    def __neg__(self) -> "NCPolynomial":
        return NCPolynomial({w: mat_scale(M, -1) for w, M in self.terms.items()}, self.d, self.D)

    def __sub__(self, other: "NCPolynomial") -> "NCPolynomial":
        return self + (-other)

    def scale(self, c) -> "NCPolynomial":
        return NCPolynomial._canonical({w: mat_scale(M, c) for w, M in self.terms.items()}, self.d, self.D)

    def __mul__(self, other) -> "NCPolynomial":
        if not isinstance(other, NCPolynomial):
            return self.scale(other)
        return multiply(self, other)

    def __rmul__(self, c) -> "NCPolynomial":
        return self.scale(c)

    def __pow__(self, k: int) -> "NCPolynomial":
        out = NCPolynomial.identity(self.d, self.D)
        for _ in range(k):
            out = out * self
        return out

    def adjoint(self) -> "NCPolynomial":
        return NCPolynomial(
            {inverse_letters(w): mat_adjoint(M) for w, M in self.terms.items()}, self.d, self.D
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCPolynomial) or self.D != other.D:
            return False
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    # -- properties ---------------------------------------------------------

    @property
    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    @property
    def exact(self) -> bool:
        return all(is_exact(a) for M in self.terms.values() for row in M for a in row)

    @property
    def is_self_adjoint(self) -> bool:
        if self.exact:
            return self == self.adjoint()
        adj = self.adjoint()
        keys = set(self.terms) | set(adj.terms)
        zero = mat_scalar(0, self.D)
        return all(
            np.allclose(np.array(self.terms.get(w, zero), dtype=complex), np.array(adj.terms.get(w, zero), dtype=complex))
            for w in keys
        )

    def coefficient_norm_sum(self) -> float:
        """sum_w ||A_w||, an upper bound for the norm of P in M_D (x) C*(F_d)."""
        return sum(mat_opnorm(M) for M in self.terms.values())

    def words(self) -> List[Word]:
        return [Word(w, self.d) for w in self.terms]

    def __repr__(self):
        parts = []
        for w, M in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0])):
            c = format_scalar(M[0][0]) if self.D == 1 else str([[format_scalar(a) for a in r] for r in M])
            parts.append(f"{c}*{Word(w, self.d)}")
        return f"NCPolynomial(d={self.d}, D={self.D}: " + (" + ".join(parts) or "0") + ")"


def multiply(P: NCPolynomial, Q: NCPolynomial, budget: list | None = None) -> NCPolynomial:
    """Distributive product with free reduction of the concatenated words.

    ``budget`` is an optional one-element list holding the remaining number
    of term products; it is decremented in place.
    """
    P._check(Q)
    n = len(P.terms) * len(Q.terms)
    if budget is not None:
        if n > budget[0]:
            raise BudgetExceeded("word products in expansion", budget[1] if len(budget) > 1 else budget[0], n)
        budget[0] -= n
    out: Dict[Letters, Matrix] = {}
    for u, A in P.terms.items():
        for v, B in Q.terms.items():
            key = _concat_reduce(u, v)
            M = mat_mul(A, B)
            out[key] = mat_add(out[key], M) if key in out else M
    return NCPolynomial._canonical(out, max(P.d, Q.d), P.D)


def _concat_reduce(u: Letters, v: Letters) -> Letters:
    k = 0
    n = min(len(u), len(v))
    while k < n and u[-1 - k] == -v[k]:
        k += 1
    return u[: len(u) - k] + v[k:]


def adjoint(P: NCPolynomial) -> NCPolynomial:
    return P.adjoint()


def trace_word_expansion(
    P: NCPolynomial, h: ScalarPolynomial, budget: int | None = None
) -> List[Tuple[object, Word]]:
    """Expand (tr_D (x) id) h(P) as a combination of reduced words.

    Returns ``(coefficient, word)`` pairs with distinct reduced words of
    length at most deg(h) * deg(P); coefficients are normalized traces of the
    matrix coefficients.  Words with zero coefficient are dropped.
    """
    limit = DEFAULT_EXPANSION_BUDGET if budget is None else budget
    remaining = [limit, limit]
    acc: Dict[Letters, object] = {}

    def add(poly: NCPolynomial, c):
        if c == 0:
            return
        for w, M in poly.terms.items():
            t = c * mat_normalized_trace(M)
            acc[w] = acc.get(w, 0) + t

    power = NCPolynomial.identity(P.d, P.D)
    for k, c in enumerate(h.coeffs):
        if k > 0:
            power = multiply(power, P, remaining)
        add(power, c)
    items = [(c, Word(w, P.d)) for w, c in acc.items() if c != 0]
    items.sort(key=lambda cw: (len(cw[1]), cw[1].letters))
    return items


def _split_terms(text: str) -> List[Tuple[str, str]]:
    out = []
    depth = 0
    sign = "+"
    cur = ""
    for ch in text.replace(" ", ""):
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        if ch in "+-" and depth == 0 and cur and cur[-1] != "*":
            out.append((sign, cur))
            sign, cur = ch, ""
            continue
        if ch in "+-" and depth == 0 and not cur:
            sign = "-" if (sign == "-") != (ch == "-") else "+"
            continue
        cur += ch
    if cur:
        out.append((sign, cur))
    return out


_NUMBER = re.compile(r"^(\d+(?:\.\d*)?(?:/\d+)?|\.\d+)")


def _parse_term(body: str):
    coeff = Fraction(1)
    rest = body
    if rest.startswith("["):
        depth = 0
        for k, ch in enumerate(rest):
            depth += ch == "["
            depth -= ch == "]"
            if depth == 0:
                break
        coeff = parse_matrix(rest[: k + 1])
        rest = rest[k + 1:]
    elif rest.startswith("("):
        k = rest.index(")")
        coeff = parse_scalar(rest[1:k])
        rest = rest[k + 1:]
    else:
        m = _NUMBER.match(rest)
        if m:
            coeff = parse_scalar(m.group(1))
            rest = rest[m.end():]
    rest = rest.lstrip("*")
    if rest == "1":
        rest = ""
    return coeff, rest
