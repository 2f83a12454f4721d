"""Exact univariate polynomials and rational functions in x = 1/N.

Polynomials are tuples of coefficients, constant term first.  Coefficients
may be ``int``, ``Fraction`` or :class:`~strongperm.exact.GaussianRational`;
nothing here assumes a particular type beyond field arithmetic.

Every rational function met in this package has a denominator that splits
into linear factors ``(1 - j x)`` with rational ``j``, so
:class:`RationalFunctionQ` stores the denominator in factored form.  This
keeps cancellation structural: reducing a fraction means dividing the
numerator by ``(1 - j x)`` while the remainder vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Sequence, Tuple

from .exact import format_scalar, parse_scalar

Poly = Tuple


def ptrim(p: Sequence) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def pdeg(p: Sequence) -> int:
    """Degree, with deg 0 = -1."""
    return len(ptrim(p)) - 1


def padd(p: Sequence, q: Sequence) -> Poly:
    n = max(len(p), len(q))
    return ptrim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def psub(p: Sequence, q: Sequence) -> Poly:
    return padd(p, pscale(q, -1))


def pscale(p: Sequence, c) -> Poly:
    return ptrim([c * a for a in p])


def pmul(p: Sequence, q: Sequence) -> Poly:
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return ptrim(out)


def ppow(p: Sequence, k: int) -> Poly:
    out: Poly = (1,)
    for _ in range(k):
        out = pmul(out, p)
    return out


def peval(p: Sequence, x):
    acc = 0
    for a in reversed(p):
        acc = acc * x + a
    return acc


def pderiv(p: Sequence, m: int = 1) -> Poly:
    p = tuple(p)
    for _ in range(m):
        p = tuple(i * p[i] for i in range(1, len(p)))
    return ptrim(p)


def pshift_x(p: Sequence, k: int) -> Poly:
    """Multiply by x**k."""
    if not p:
        return ()
    return (0,) * k + tuple(p)


def linear_factor(j) -> Poly:
    """The polynomial 1 - j x."""
    return ptrim((1, -j))


def div_linear(p: Sequence, j):
    """Divide ``p`` by ``1 - j x``; return (quotient, remainder scalar)."""
    p = ptrim(p)
    if j == 0:
        return p, 0
    # p(x) = (1 - j x) q(x) + r, with r = p(1/j); synthetic division from the top
    n = len(p) - 1
    if n < 0:
        return (), 0
    q = [0] * n
    carry = 0
    for i in range(n, 0, -1):
        # coefficient of x^i in p equals q[i] - j q[i-1]  (q[n] = 0)
        carry = (carry - p[i]) / Fraction(j)
        q[i - 1] = carry
    rem = p[0] - (q[0] if n > 0 else 0)
    return ptrim(q), rem


def taylor_divide(num: Sequence, den: Sequence, order: int) -> list:
    """Power series coefficients of num/den up to x**order (den(0) != 0)."""
    if not den or den[0] == 0:
        raise ZeroDivisionError("denominator vanishes at x = 0")
    d0 = den[0]
    out = []
    for k in range(order + 1):
        acc = num[k] if k < len(num) else 0
        for i in range(1, min(k, len(den) - 1) + 1):
            acc -= den[i] * out[k - i]
        out.append(acc if d0 == 1 else acc / d0)
    return out


@dataclass(frozen=True)
class RationalFunctionQ:
    """``numerator(x) / prod_j (1 - j x)**mult_j`` with exact coefficients."""

    numerator: Poly
    factors: Tuple[Tuple[Fraction, int], ...] = field(default=())

    @classmethod
    def make(cls, numerator: Sequence, factors: Dict | Sequence = ()) -> "RationalFunctionQ":
        items = factors.items() if isinstance(factors, dict) else factors
        merged: Dict[Fraction, int] = {}
        for j, m in items:
            j = Fraction(j)
            if j == 0 or m == 0:
                continue
            merged[j] = merged.get(j, 0) + m
        if any(m < 0 for m in merged.values()):
            raise ValueError("negative factor multiplicity")
        return cls(ptrim(numerator), tuple(sorted(merged.items())))

    @classmethod
    def constant(cls, c) -> "RationalFunctionQ":
        return cls.make((c,))

    @classmethod
    def polynomial(cls, p: Sequence) -> "RationalFunctionQ":
        return cls.make(p)

    @property
    def factor_dict(self) -> Dict[Fraction, int]:
        return dict(self.factors)

    @property
    def denominator(self) -> Poly:
        out: Poly = (1,)
        for j, m in self.factors:
            out = pmul(out, ppow(linear_factor(j), m))
        return out

    @property
    def is_zero(self) -> bool:
        return not self.numerator

    def reduced(self) -> "RationalFunctionQ":
        """Cancel common linear factors between numerator and denominator."""
        num = self.numerator
        fac = dict(self.factors)
        if not num:
            return RationalFunctionQ((), ())
        for j in list(fac):
            while fac[j] > 0:
                q, r = div_linear(num, j)
                if r != 0:
                    break
                num = q
                fac[j] -= 1
        return RationalFunctionQ.make(num, fac)

    def _over(self, target: Dict[Fraction, int]) -> Poly:
        """Numerator after rewriting over a denominator that this one divides."""
        num = self.numerator
        own = self.factor_dict
        for j, m in target.items():
            extra = m - own.get(j, 0)
            if extra < 0:
                raise ValueError("target denominator is not a multiple")
            if extra:
                num = pmul(num, ppow(linear_factor(j), extra))
        return num

    def __add__(self, other) -> "RationalFunctionQ":
        if not isinstance(other, RationalFunctionQ):
            other = RationalFunctionQ.constant(other)
        lcm = self.factor_dict
        for j, m in other.factors:
            lcm[j] = max(lcm.get(j, 0), m)
        return RationalFunctionQ.make(padd(self._over(lcm), other._over(lcm)), lcm)

    __radd__ = __add__

    def __neg__(self) -> "RationalFunctionQ":
        return RationalFunctionQ(pscale(self.numerator, -1), self.factors)

    def __sub__(self, other) -> "RationalFunctionQ":
        if not isinstance(other, RationalFunctionQ):
            other = RationalFunctionQ.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "RationalFunctionQ":
        return (-self) + other

    def __mul__(self, other) -> "RationalFunctionQ":
        if isinstance(other, RationalFunctionQ):
            fac = self.factor_dict
            for j, m in other.factors:
                fac[j] = fac.get(j, 0) + m
            return RationalFunctionQ.make(pmul(self.numerator, other.numerator), fac)
        return RationalFunctionQ(pscale(self.numerator, other), self.factors)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunctionQ):
            other = RationalFunctionQ.constant(other)
        lcm = self.factor_dict
        for j, m in other.factors:
            lcm[j] = max(lcm.get(j, 0), m)
        return self._over(lcm) == other._over(lcm)

    def __hash__(self):
        r = self.reduced()
        return hash((r.numerator, r.factors))

    def __call__(self, x):
        """Exact evaluation; raises ZeroDivisionError at a pole."""
        den = 1
        for j, m in self.factors:
            den *= (1 - j * x) ** m
        if den == 0:
            raise ZeroDivisionError(f"pole at x = {x}")
        num = peval(self.numerator, x)
        if isinstance(num, int) and isinstance(den, int):
            return Fraction(num, den)
        return num / den

    def at_N(self, N: int):
        return self(Fraction(1, N))

    def taylor(self, order: int) -> list:
        """Taylor coefficients at x = 0 up to x**order."""
        return taylor_divide(self.numerator, self.denominator, order)

    def derivative(self) -> "RationalFunctionQ":
        """r' over the denominator with every multiplicity raised by one."""
        fac = self.factor_dict
        # d/dx (1 - j x)^(-m) = j m (1 - j x)^(-m-1); common denominator g * prod_j (1 - j x)
        G: Poly = (1,)
        for j in fac:
            G = pmul(G, linear_factor(j))
        term = pmul(pderiv(self.numerator), G)
        for j, m in fac.items():
            others: Poly = (1,)
            for k in fac:
                if k != j:
                    others = pmul(others, linear_factor(k))
            term = padd(term, pscale(pmul(self.numerator, others), j * m))
        new_fac = {j: m + 1 for j, m in fac.items()}
        return RationalFunctionQ.make(term, new_fac)

    def degree_bounds(self) -> Tuple[int, int]:
        return pdeg(self.numerator), sum(m for _, m in self.factors)

    def to_json(self) -> dict:
        r = self
        return {
            "numerator": [format_scalar(c) for c in r.numerator],
            "denominator": [format_scalar(c) for c in r.denominator],
            "denominator_factors": [
                {"root_j": format_scalar(j), "multiplicity": m} for j, m in r.factors
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RationalFunctionQ":
        num = [parse_scalar(c) for c in obj["numerator"]]
        fac = {parse_scalar(f["root_j"]): f["multiplicity"] for f in obj.get("denominator_factors", [])}
        return cls.make(num, fac)

    def __str__(self):
        def poly_str(p):
            if not p:
                return "0"
            parts = []
            for i, c in enumerate(p):
                if c == 0:
                    continue
                mon = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
                parts.append(f"({format_scalar(c)}){mon}" if mon else format_scalar(c))
            return " + ".join(parts)

        den = " ".join(
            f"(1-{format_scalar(j)}x)" + (f"^{m}" if m > 1 else "") for j, m in self.factors
        )
        return poly_str(self.numerator) if not den else f"[{poly_str(self.numerator)}] / {den}"
