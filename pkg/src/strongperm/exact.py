"""Exact scalars: rationals and Gaussian rationals, plus their text forms."""

from __future__ import annotations

from fractions import Fraction
from numbers import Number


class GaussianRational:
    """a + b i with a, b arbitrary-precision rationals."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other, 0)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return gq(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return gq(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return gq(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return gq(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * GaussianRational(o.re, -o.im)
        num = num if isinstance(num, GaussianRational) else GaussianRational(num)
        return gq(num.re / den, num.im / den)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __abs__(self):
        return abs(complex(self))

    def conjugate(self):
        return gq(self.re, -self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return format_scalar(self)


def gq(re, im=0):
    """Gaussian rational, collapsed to a Fraction when the imaginary part is 0."""
    im = Fraction(im)
    if im == 0:
        return Fraction(re)
    return GaussianRational(re, im)


def conj(x):
    if isinstance(x, (int, Fraction)):
        return x
    return x.conjugate()


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, GaussianRational))


def real_part(x):
    if isinstance(x, GaussianRational):
        return x.re
    if isinstance(x, complex):
        return x.real
    return x


def to_complex(x) -> complex:
    return complex(x)


def parse_scalar(text) -> Number:
    """Parse ``"3"``, ``"-1/2"``, ``"0.25"``, ``"1+2i"``, ``"(1/2-i)"`` or ``"2i"``.

    Integers, fractions and decimals are parsed exactly; a decimal with an
    exponent is kept exact as well.  Floats (Python ``float``) pass through.
    """
    if isinstance(text, (int, Fraction, GaussianRational, float, complex)):
        return text
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return gq(Fraction(str(text[0])), Fraction(str(text[1])))
    s = str(text).replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    if s[0] == "(" and s[-1] == ")":
        s = s[1:-1]
    if s[-1] not in "ij":
        return Fraction(s)
    body = s[:-1]
    # split at the last sign that is not at position 0 and not after an exponent
    split = None
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE":
            split = k
            break
    if split is None:
        re_part, im_part = "0", body
    else:
        re_part, im_part = body[:split], body[split:]
    if im_part in ("", "+"):
        im_part = "1"
    elif im_part == "-":
        im_part = "-1"
    return gq(Fraction(re_part), Fraction(im_part))


def format_scalar(x) -> str:
    """Exact text form: ``"p/q"`` for rationals, ``"a+bi"`` for Gaussian rationals."""
    if isinstance(x, GaussianRational):
        if x.im == 0:
            return format_scalar(x.re)
        sign = "+" if x.im > 0 else "-"
        im = abs(x.im)
        im_s = "" if im == 1 else format_scalar(im)
        if x.re == 0:
            return ("-" if x.im < 0 else "") + f"{im_s}i"
        return f"{format_scalar(x.re)}{sign}{im_s}i"
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, complex):
        return repr(x)
    return repr(float(x))
