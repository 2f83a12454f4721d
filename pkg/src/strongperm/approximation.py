"""Univariate polynomial toolkit: Chebyshev expansions, Markov-type
inequalities, and Zygmund-type coefficient sums.

Sup norms of polynomials are computed from the candidate set {endpoints,
real critical points} together with a Chebyshev grid of 8q+1 points, so they
are accurate to floating-point rounding rather than to a grid spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import polynomial as nppoly
from scipy import integrate, optimize

from .errors import InvariantViolation, PreconditionError
from .ncpoly import ScalarPolynomial
from .ratfunc import RationalFunctionQ, peval

REL_TOL = 1e-9


def _coeffs(h) -> list:
    if isinstance(h, ScalarPolynomial):
        return list(h.coeffs)
    return list(h)


def _degree(c: Sequence) -> int:
    k = len(c) - 1
    while k >= 0 and c[k] == 0:
        k -= 1
    return k


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


# --- Chebyshev expansions -------------------------------------------------


@dataclass(frozen=True)
class ChebyshevExpansion:
    """h(x) = sum_j coeffs[j] T_j(x / K) on [-K, K]."""

    K: object
    coeffs: tuple

    @property
    def degree(self) -> int:
        return _degree(self.coeffs)

    def __call__(self, x):
        c = np.array([float(a) for a in self.coeffs]) if self.coeffs else np.zeros(1)
        return npcheb.chebval(np.asarray(x, dtype=float) / float(self.K), c)

    def to_polynomial(self) -> ScalarPolynomial:
        """Monomial coefficients, exact when K and the coefficients are rational."""
        K = Fraction(self.K) if _is_exact(self.K) else self.K
        out = [0] * max(len(self.coeffs), 1)
        for j, a in enumerate(self.coeffs):
            for i, c in enumerate(chebyshev_T(j).coeffs):
                out[i] += a * c
        # substitute t = x / K
        return ScalarPolynomial(tuple(c / K ** i for i, c in enumerate(out)))


def cheb_expand(h, K) -> ChebyshevExpansion:
    """Chebyshev coefficients of h on [-K, K], by exact change of basis."""
    if K <= 0:
        raise PreconditionError(f"K must be positive, got {K}")
    c = _coeffs(h)
    q = _degree(c)
    exact = _is_exact(K) and all(_is_exact(a) for a in c)
    if exact:
        K = Fraction(K)
    # b_k: coefficients of h(K t) in t
    b = [c[k] * K ** k for k in range(q + 1)]
    half = Fraction(1, 2) if exact else 0.5
    out = [0] * (q + 1)
    # t^k in the Chebyshev basis, starting from t^0 = T_0
    power = [1] + [0] * q
    for k in range(q + 1):
        if k > 0:
            new = [0] * (q + 1)
            for j, a in enumerate(power):
                if a == 0:
                    continue
                # t T_0 = T_1, t T_j = (T_{j+1} + T_{j-1}) / 2
                if j == 0:
                    new[1] += a
                else:
                    if j + 1 <= q:
                        new[j + 1] += a * half
                    new[j - 1] += a * half
            power = new
        if b[k] != 0:
            for j, a in enumerate(power):
                out[j] += b[k] * a
    return ChebyshevExpansion(K, tuple(out))


def chebyshev_T(q: int) -> ScalarPolynomial:
    """T_q in monomials, exact."""
    prev, cur = [1], [0, 1]
    if q == 0:
        return ScalarPolynomial((1,))
    for _ in range(q - 1):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= c
        prev, cur = cur, nxt
    return ScalarPolynomial(tuple(cur))


def chebyshev_on_interval(q: int, a) -> ScalarPolynomial:
    """T_q(2x/a - 1), the extremal polynomial of degree q on [0, a]."""
    a = Fraction(a) if _is_exact(a) else a
    T = chebyshev_T(q).coeffs
    # substitute t = (2/a) x - 1
    lin = (-1, 2 / a)
    out = [0]
    for c in reversed(T):
        # out = out * lin + c
        prod = [0] * (len(out) + 1)
        for i, u in enumerate(out):
            prod[i] += u * lin[0]
            prod[i + 1] += u * lin[1]
        prod[0] += c
        out = prod
    return ScalarPolynomial(tuple(out))


# --- sup norms --------------------------------------------------------------


def _float_coeffs(c) -> np.ndarray:
    arr = np.array([complex(a) if not _is_exact(a) and not isinstance(a, float) else float(a) for a in c])
    if np.iscomplexobj(arr):
        if np.all(arr.imag == 0):
            return arr.real
        raise ValueError("sup norms are defined here for real polynomials")
    return arr


def sup_norm(h, lo: float, hi: float) -> float:
    """max |h| on [lo, hi] for a real polynomial h."""
    c = _float_coeffs(_coeffs(h))
    q = _degree(list(c))
    if q <= 0:
        return abs(float(c[0])) if q == 0 else 0.0
    c = c[: q + 1]
    pts = [lo, hi]
    n = 8 * q + 1
    k = np.arange(n)
    pts.extend(0.5 * (lo + hi) + 0.5 * (hi - lo) * np.cos(np.pi * k / (n - 1)))
    crit = nppoly.polyroots(nppoly.polyder(c)) if q >= 2 else np.array([])
    for r in np.atleast_1d(crit):
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r.real)) and lo <= r.real <= hi:
            pts.append(r.real)
    exact = _coeffs(h)
    if all(_is_exact(a) for a in exact):
        # monomial coefficients of high-degree polynomials cancel badly in floats
        return float(max(abs(peval(exact, Fraction(float(x)))) for x in pts))
    vals = np.abs(nppoly.polyval(np.array(pts, dtype=float), c))
    return float(vals.max())


def double_factorial_odd(m: int) -> int:
    """(2m - 1)!! with (-1)!! = 1."""
    out = 1
    for k in range(1, 2 * m, 2):
        out *= k
    return out


@dataclass
class MarkovReport:
    q: int
    m: int
    a: float
    lhs: float  # ||h^(m)||
    norm: float  # ||h||
    bound: float
    ratio: float
    passed: bool


def markov_bound_check(h, a: float, m: int) -> MarkovReport:
    """||h^(m)|| <= (2 q^2 / a)^m / (2m - 1)!! ||h|| on [0, a]."""
    if a <= 0:
        raise PreconditionError("a must be positive")
    h = h if isinstance(h, ScalarPolynomial) else ScalarPolynomial(tuple(h))
    q = max(h.degree, 0)
    norm = sup_norm(h, 0.0, float(a))
    lhs = sup_norm(h.derivative(m), 0.0, float(a)) if q >= m else 0.0
    bound = (2 * q * q / float(a)) ** m / double_factorial_odd(m) * norm
    ratio = lhs / bound if bound > 0 else 0.0
    passed = lhs <= bound * (1 + REL_TOL) + 1e-300
    if not passed:
        raise InvariantViolation(f"Markov inequality violated: {lhs} > {bound}")
    return MarkovReport(q, m, float(a), lhs, norm, bound, ratio, passed)


def markov_chebyshev_ratio(q: int, m: int) -> float:
    """Exact attainment ratio for T_q mapped to [0, a]: prod_{k<m} (1 - k^2/q^2)."""
    out = 1.0
    for k in range(m):
        out *= 1 - k * k / (q * q)
    return out


@dataclass
class InterpolationReport:
    q: int
    norm: float
    grid_max: float
    mesh: float
    passed: bool


def interpolation_check(h, a: float, points: Sequence[float]) -> InterpolationReport:
    """||h||_{C0[0,a]} <= 2 max_{x in I} |h(x)| when I is a/(4q^2)-dense in [0, a]."""
    h = h if isinstance(h, ScalarPolynomial) else ScalarPolynomial(tuple(h))
    q = max(h.degree, 1)
    pts = np.sort(np.asarray(points, dtype=float))
    if pts.size == 0 or pts[0] < 0 or pts[-1] > a:
        raise PreconditionError("points must be a nonempty subset of [0, a]")
    r = a / (4 * q * q)
    gaps = np.diff(pts)
    mesh = max(pts[0], a - pts[-1], (gaps.max() / 2) if gaps.size else 0.0)
    if mesh > r * (1 + 1e-12):
        raise PreconditionError(f"mesh {mesh:.3g} exceeds a/(4q^2) = {r:.3g}")
    c = _float_coeffs(h.coeffs)
    grid_max = float(np.abs(nppoly.polyval(pts, c)).max())
    norm = sup_norm(h, 0.0, float(a))
    passed = norm <= 2 * grid_max * (1 + REL_TOL) + 1e-300
    if not passed:
        raise InvariantViolation(f"interpolation inequality violated: {norm} > 2 * {grid_max}")
    return InterpolationReport(q, norm, grid_max, mesh, passed)


def uniform_points(a: float, q: int) -> np.ndarray:
    """Midpoints of a uniform partition with mesh a/(4q^2)."""
    n = int(math.ceil(2 * q * q))
    return (np.arange(n) + 0.5) * a / n


# --- rational Markov ----------------------------------------------------------


@dataclass
class RationalMarkovReport:
    q: int
    m: int
    c: float
    lhs: float
    norm: float
    bound: float
    ratio: float
    passed: bool


def _rational_sup(r: RationalFunctionQ, a: float, n: int = 4001) -> float:
    num = [float(x) for x in r.numerator] or [0.0]
    den = [float(x) for x in r.denominator]

    def f(x):
        return abs(nppoly.polyval(x, num) / nppoly.polyval(x, den))

    xs = np.linspace(0.0, a, n)
    vals = f(xs)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda x: -f(x), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-13 * max(a, 1.0)})
        best = max(best, float(-res.fun))
    return best


def rational_markov_check(r: RationalFunctionQ, a: float, m: int) -> RationalMarkovReport:
    """||r^(m)|| <= m! (5 c q^2 / a)^m ||r|| on [0, a], c = max|g| / min|g|."""
    if a <= 0:
        raise PreconditionError("a must be positive")
    den = r.denominator
    for j, _ in r.factors:
        if j > 0 and 1 / float(j) <= a:
            raise PreconditionError(f"pole at x = {1 / float(j)} inside [0, {a}]")
    g = [float(x) for x in den]
    q = max(_degree(list(r.numerator)), _degree(list(den)), 1)
    # |g| has no zero on [0, a]; extremes are at endpoints or critical points
    cands = [0.0, float(a)]
    if len(g) > 2:
        for z in np.atleast_1d(nppoly.polyroots(nppoly.polyder(g))):
            if abs(z.imag) < 1e-12 and 0 <= z.real <= a:
                cands.append(z.real)
    gv = np.abs(nppoly.polyval(np.array(cands), g))
    c = float(gv.max() / gv.min())
    rm = r
    for _ in range(m):
        rm = rm.derivative()
    lhs = _rational_sup(rm, float(a))
    norm = _rational_sup(r, float(a))
    bound = math.factorial(m) * (5 * c * q * q / float(a)) ** m * norm
    ratio = lhs / bound if bound > 0 else 0.0
    passed = lhs <= bound * (1 + 1e-6) + 1e-300
    if not passed:
        raise InvariantViolation(f"rational Markov inequality violated: {lhs} > {bound}")
    return RationalMarkovReport(q, m, c, lhs, norm, bound, ratio, passed)


# --- Zygmund sums ---------------------------------------------------------------


def trig_derivative(coeffs: Sequence[float], m: int, theta: np.ndarray) -> np.ndarray:
    """m-th derivative of f(theta) = sum_j a_j cos(j theta)."""
    theta = np.asarray(theta, dtype=float)
    out = np.zeros_like(theta)
    for j, a in enumerate(coeffs):
        if j == 0 or a == 0:
            if j == 0 and m == 0:
                out += float(a)
            continue
        if m % 2 == 0:
            out += (-1) ** (m // 2) * j ** m * float(a) * np.cos(j * theta)
        else:
            out += (-1) ** ((m + 1) // 2) * j ** m * float(a) * np.sin(j * theta)
    return out


def lp_norm_periodic(func, beta: float, n_sub: int = 64) -> float:
    """L^beta norm over [0, 2 pi] (beta = inf gives the sup)."""
    if math.isinf(beta):
        th = np.linspace(0.0, 2 * np.pi, 200_001)
        v = np.abs(func(th))
        i = int(np.argmax(v))
        lo, hi = th[max(i - 1, 0)], th[min(i + 1, th.size - 1)]
        res = optimize.minimize_scalar(lambda t: -abs(float(func(np.array([t]))[0])), bounds=(lo, hi),
                                       method="bounded")
        return max(float(v[i]), float(-res.fun))
    edges = np.linspace(0.0, 2 * np.pi, n_sub + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda t: abs(float(func(np.array([t]))[0])) ** beta, lo, hi,
                                limit=200, epsabs=1e-13, epsrel=1e-10)
        total += val
    return total ** (1.0 / beta)


def beta_star(beta: float) -> float:
    """Conjugate exponent: 1/beta_* = 1 - 1/beta."""
    if beta <= 1:
        raise PreconditionError("beta must exceed 1")
    return 1.0 if math.isinf(beta) else beta / (beta - 1)


@dataclass
class ZygmundReport:
    m: int
    beta: float
    lhs: float
    rhs: float
    ratio: float  # empirical constant lhs / rhs


def zygmund_sum(e: ChebyshevExpansion, m: int, beta: float) -> ZygmundReport:
    """sum_{j>=1} j^m |a_j| against beta_* ||f^(m+1)||_{L^beta}, f(theta) = h(K cos theta)."""
    bs = beta_star(beta)
    coeffs = [float(a) for a in e.coeffs]
    lhs = float(sum(j ** m * abs(a) for j, a in enumerate(coeffs) if j >= 1))
    norm = lp_norm_periodic(lambda th: trig_derivative(coeffs, m + 1, th), beta)
    rhs = bs * norm
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else math.inf)
    return ZygmundReport(m, beta, lhs, rhs, ratio)
