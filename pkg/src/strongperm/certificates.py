"""Smooth test functions and explicit tail-bound certificates.

The transition function h is an iterated convolution

    h = 1_{(0, inf)} * F_{delta/2} * H_a * ... * H_a   (m box kernels, a = delta/2m),

with the polynomial bump F(u) = c_n (u (1 - u))^n on [0, 1].  Integrating the m
boxes in closed form gives a cumulative B-spline G_m, so every derivative
h^(j), j <= m, is a one-dimensional integral of a piecewise polynomial and is
evaluated exactly (up to rounding) by Gauss-Legendre on the pieces.  The top
derivative h^(m+1) is a finite difference of shifted bumps, with no integral.

chi(x) = h(arcsin(x/K) - phi) + h(-arcsin(x/K) - phi) then vanishes on
|x| <= rho + eps/2 and equals 1 for |x| >= rho + eps, and
f(theta) = chi(K cos theta) consists of four disjoint copies of h on the circle.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Dict

import numpy as np
from numpy.polynomial import polynomial as nppoly
from scipy import integrate

from .errors import PreconditionError

_GL_NODES = 32


def bump_constant(n: int) -> float:
    """c_n with int_0^1 c_n (u (1-u))^n du = 1."""
    return math.factorial(2 * n + 1) / math.factorial(n) ** 2


@dataclass
class TestFunction:
    rho: float
    eps: float
    K: float
    m: int
    n: int = 0  # bump exponent; 0 means m + 1
    phi: float = field(init=False)
    delta: float = field(init=False)
    a: float = field(init=False)

    def __post_init__(self):
        if self.m < 1:
            raise PreconditionError("smoothness order m must be at least 1")
        if not (self.rho >= 0 and self.eps > 0 and self.rho + self.eps < self.K):
            raise PreconditionError(f"need rho + eps < K, got rho={self.rho}, eps={self.eps}, K={self.K}")
        if self.n <= 0:
            self.n = self.m + 1
        self.phi = math.asin((self.rho + self.eps / 2) / self.K)
        self.delta = math.asin((self.rho + self.eps) / self.K) - self.phi
        self.a = self.delta / (2 * self.m)
        self._cn = bump_constant(self.n)
        self._binom = [(-1) ** k * math.comb(self.m, k) for k in range(self.m + 1)]
        self._nodes, self._weights = np.polynomial.legendre.leggauss(_GL_NODES)

    # --- the transition function h --------------------------------------

    def bump(self, y):
        """F_{delta/2}(y)."""
        s = self.delta / 2
        u = np.asarray(y, dtype=float) / s
        inside = (u > 0) & (u < 1)
        uu = np.where(inside, u, 0.0)
        return np.where(inside, self._cn * (uu * (1 - uu)) ** self.n / s, 0.0)

    def _spline(self, z, j: int):
        """G^(j)(z), the j-th derivative of the cumulative m-fold box spline (j <= m)."""
        z = np.asarray(z, dtype=float)
        p = self.m - j
        out = np.zeros_like(z)
        for k, c in enumerate(self._binom):
            t = z - k * self.a
            out += c * (np.where(t > 0, t ** p, 0.0) if p > 0 else (t > 0).astype(float))
        return out / (self.a ** self.m * math.factorial(p))

    def h_derivative(self, x, j: int = 0):
        """h^(j)(x) for 0 <= j <= m + 1."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if j == self.m + 1:
            out = np.zeros_like(x)
            for i, c in enumerate(self._binom):
                out += c * self.bump(x - i * self.a)
            return out / self.a ** self.m
        if not 0 <= j <= self.m:
            raise ValueError(f"derivative order {j} out of range")
        s = self.delta / 2
        out = np.empty_like(x)
        for idx, xv in enumerate(x):
            if xv <= 0:
                out[idx] = 0.0
                continue
            if xv >= self.delta:
                out[idx] = 1.0 if j == 0 else 0.0
                continue
            # breakpoints of y -> G^(j)(x - y) inside (0, s)
            cuts = [0.0, s] + [xv - k * self.a for k in range(self.m + 1)]
            cuts = sorted(c for c in set(cuts) if 0.0 <= c <= s)
            total = 0.0
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                if hi <= lo:
                    continue
                y = 0.5 * (hi - lo) * self._nodes + 0.5 * (hi + lo)
                total += 0.5 * (hi - lo) * np.dot(self._weights, self.bump(y) * self._spline(xv - y, j))
            out[idx] = total
        return out

    def h(self, x):
        return self.h_derivative(x, 0)

    # --- chi and f -----------------------------------------------------------

    def chi(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.ones_like(x)
        inside = np.abs(x) < self.K
        t = np.arcsin(x[inside] / self.K)
        out[inside] = self.h(t - self.phi) + self.h(-t - self.phi)
        return out

    def f(self, theta):
        return self.chi(self.K * np.cos(np.asarray(theta, dtype=float)))

    def f_derivative(self, theta, j: int):
        """f^(j)(theta) on [0, 2 pi] from the two-copy representation on [0, pi]."""
        th = np.atleast_1d(np.asarray(theta, dtype=float)) % (2 * np.pi)
        mirrored = th > np.pi
        t = np.where(mirrored, 2 * np.pi - th, th)
        val = (-1) ** j * self.h_derivative(np.pi / 2 - t - self.phi, j) + self.h_derivative(t - np.pi / 2 - self.phi, j)
        # f(2 pi - t) = f(t): odd derivatives change sign under the reflection
        return np.where(mirrored & (j % 2 == 1), -val, val)

    # --- derivative norms --------------------------------------------------------

    def _top_pieces(self):
        """h^(m+1) as a polynomial on each [k a, (k+1) a], k = 0..2m-1 (local variable)."""
        deg = 2 * self.n
        pieces = []
        for k in range(2 * self.m):
            lo, hi = k * self.a, (k + 1) * self.a
            u = 0.5 * (1 - np.cos(np.pi * (np.arange(deg + 1) + 0.5) / (deg + 1)))
            vals = self.h_derivative(lo + u * self.a, self.m + 1)
            coef = nppoly.polyfit(u, vals, deg)
            pieces.append((lo, hi, coef))
        return pieces

    def top_derivative_norm_h(self, beta: float) -> float:
        """||h^(m+1)||_{L^beta(R)}."""
        pieces = self._top_pieces()
        if math.isinf(beta):
            best = 0.0
            for lo, hi, c in pieces:
                cands = [0.0, 1.0]
                for r in np.atleast_1d(nppoly.polyroots(nppoly.polyder(c))):
                    if abs(r.imag) < 1e-9 and 0 <= r.real <= 1:
                        cands.append(r.real)
                best = max(best, float(np.abs(self.h_derivative(lo + np.array(cands) * self.a, self.m + 1)).max()))
            return best
        total = 0.0
        for lo, hi, _ in pieces:
            val, _ = integrate.quad(lambda y: abs(float(self.h_derivative(y, self.m + 1)[0])) ** beta, lo, hi,
                                    limit=200, epsabs=0.0, epsrel=1e-10)
            total += val
        return total ** (1.0 / beta)

    def top_derivative_norm(self, beta: float) -> float:
        """||f^(m+1)||_{L^beta[0, 2 pi]} = 4^{1/beta} ||h^(m+1)||_{L^beta}, by disjointness of the copies."""
        nh = self.top_derivative_norm_h(beta)
        return nh if math.isinf(beta) else 4 ** (1.0 / beta) * nh

    def top_derivative_norm_direct(self, beta: float) -> float:
        """The same norm by quadrature of f^(m+1) over [0, 2 pi] (independent check)."""
        j = self.m + 1
        lo1, hi1 = np.pi / 2 - self.phi - self.delta, np.pi / 2 - self.phi
        lo2, hi2 = np.pi / 2 + self.phi, np.pi / 2 + self.phi + self.delta
        segs = [(lo1, hi1), (lo2, hi2), (2 * np.pi - hi2, 2 * np.pi - lo2), (2 * np.pi - hi1, 2 * np.pi - lo1)]
        if math.isinf(beta):
            best = 0.0
            for lo, hi in segs:
                th = np.linspace(lo, hi, 20001)
                best = max(best, float(np.abs(self.f_derivative(th, j)).max()))
            return best
        total = 0.0
        for lo, hi in segs:
            brk = list(np.linspace(lo, hi, 2 * self.m + 1)[1:-1])
            val, _ = integrate.quad(lambda t: abs(float(self.f_derivative(t, j)[0])) ** beta, lo, hi,
                                    points=brk, limit=400, epsabs=0.0, epsrel=1e-9)
            total += val
        return total ** (1.0 / beta)

    def fitted_constant(self) -> float:
        """C with ||f^(m+1)||_inf = (C m)^m (K/eps)^(m+1)."""
        measured = self.top_derivative_norm(math.inf)
        return (measured / (self.K / self.eps) ** (self.m + 1)) ** (1.0 / self.m) / self.m


def build_test_function(rho: float, eps: float, K: float, m: int, n: int = 0) -> TestFunction:
    return TestFunction(rho, eps, K, m, n)


@dataclass
class TailCertificate:
    d: int
    eps: float
    N: int
    m: int
    K: float
    rho: float
    beta_star: float
    beta: float
    delta: float
    phi: float
    f_norm: float  # ||f^(9)||_{L^beta[0, 2 pi]}
    master_constant: float  # (4 q0 (1 + log d))^8, q0 = 1
    universal_constant: float
    trace_bound: float  # bound on E[tr_N chi(A^N)]
    bound: float  # bound on P[||A^N|| >= rho + eps] = N * trace_bound
    probability_bound: float  # min(1, bound)
    up_to_universal_constant: bool = True

    def to_json(self) -> Dict:
        return asdict(self)


@lru_cache(maxsize=256)
def _certificate_norms(d: int, eps: float, m: int):
    K = 2.0 * d
    rho = 2.0 * math.sqrt(2 * d - 1)
    bs = 1.0 + math.log(2 * d / eps)
    beta = bs / (bs - 1.0)
    tf = build_test_function(rho, eps, K, m)
    return K, rho, bs, beta, tf.delta, tf.phi, tf.top_derivative_norm(beta)


def friedman_certificate(d: int, eps: float, N: int, universal_constant: float = 1.0) -> TailCertificate:
    """Explicit bound on P[||A^N|_{1^perp}|| >= 2 sqrt(2d-1) + eps], up to a universal constant.

    E[tr_N chi(A^N)] <= C (4 (1 + log d))^8 beta_* ||f^(9)||_{L^beta} / N^2, since the
    zeroth and first order terms vanish on chi; Markov's inequality for
    Tr chi = N tr_N chi turns this into a probability bound of order 1/N.
    """
    if d < 2:
        raise PreconditionError("d must be at least 2")
    gap = 2 * d - 2 * math.sqrt(2 * d - 1)
    if not 0 < eps < gap:
        raise PreconditionError(f"eps must lie in (0, {gap:.6f})")
    if N < 1:
        raise PreconditionError("N must be positive")
    m = 8
    K, rho, bs, beta, delta, phi, fnorm = _certificate_norms(d, float(eps), m)
    master = (4 * 1 * (1 + math.log(d))) ** 8
    trace_bound = universal_constant * master * bs * fnorm / N ** 2
    bound = N * trace_bound
    return TailCertificate(d, float(eps), N, m, K, rho, bs, beta, delta, phi, fnorm, master,
                           universal_constant, trace_bound, bound, min(1.0, bound))
