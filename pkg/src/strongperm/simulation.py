"""Monte Carlo experiments with random permutation matrices.

Operators act on C^D (x) C^N and are restricted to C^D (x) {1_N}^perp: every
apply removes the block means before and after, and Krylov iterations start
in the complement, so the trivial eigenvectors never enter the search space.

Randomness: trial t, generator i draws from the Philox stream keyed by
(seed, t, i), so trials are independent of each other and of worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .asymptotics import taylor_nu
from .errors import ConvergenceError, PreconditionError
from .expectations import polynomial_trace_expectation
from .ncpoly import NCPolynomial, ScalarPolynomial, trace_word_expansion
from .words import Letters

DEFAULT_WORKERS = int(os.environ.get("WORKERS", 1))


def rng_for(seed: int, trial: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial, index])))


@dataclass
class PermTuple:
    """sigma_1..sigma_d as index arrays: perms[i][x] = sigma_{i+1}(x)."""

    perms: Tuple[np.ndarray, ...]
    seed: int
    trial: int
    planted: int = 0

    @property
    def N(self) -> int:
        return len(self.perms[0])

    @property
    def d(self) -> int:
        return len(self.perms)


def sample_tuple(N: int, d: int, seed: int, trial: int, planted: int = 0) -> PermTuple:
    """Uniform i.i.d. permutations; the first ``planted`` are uniform among those fixing vertex 0."""
    if N < 1 or d < 1:
        raise PreconditionError("N and d must be positive")
    if planted > d:
        raise PreconditionError("cannot plant more generators than d")
    perms = []
    for i in range(d):
        rng = rng_for(seed, trial, i)
        if i < planted:
            p = np.concatenate(([0], 1 + rng.permutation(N - 1)))
        else:
            p = rng.permutation(N)
        perms.append(p.astype(np.int64))
    return PermTuple(tuple(perms), seed, trial, planted)


def word_index_map(letters: Letters, perms: Sequence[np.ndarray], inverses: Sequence[np.ndarray]) -> np.ndarray:
    """pi with (w(S) v)[x] = v[pi[x]], where (S_i v)[x] = v[sigma_i^{-1}(x)]."""
    N = len(perms[0])
    idx = np.arange(N)
    for lt in letters:
        table = inverses[lt - 1] if lt > 0 else perms[-lt - 1]
        idx = table[idx]
    return idx


class SparsePermOperator:
    """P(S, S*) restricted to C^D (x) {1_N}^perp, applied matrix-free."""

    def __init__(self, P: NCPolynomial, pt: PermTuple):
        if pt.d < P.d:
            raise PreconditionError("permutation tuple has fewer generators than P")
        self.P = P
        self.pt = pt
        self.N = pt.N
        self.D = P.D
        inv = [np.argsort(p) for p in pt.perms]
        self.terms = []
        for w, M in sorted(P.terms.items()):
            A = np.array([[complex(a) for a in row] for row in M])
            if np.all(A.imag == 0):
                A = A.real
            self.terms.append((A, word_index_map(w, pt.perms, inv)))
        self.dtype = np.result_type(*[A.dtype for A, _ in self.terms], np.float64)
        self.matvecs = 0

    @property
    def shape(self) -> Tuple[int, int]:
        n = self.D * self.N
        return (n, n)

    def project(self, v: np.ndarray) -> np.ndarray:
        V = v.reshape(self.D, self.N)
        return (V - V.mean(axis=1, keepdims=True)).reshape(-1)

    def apply_full(self, v: np.ndarray) -> np.ndarray:
        V = v.reshape(self.D, self.N)
        out = np.zeros((self.D, self.N), dtype=np.result_type(self.dtype, v.dtype))
        for A, pi in self.terms:
            out += A @ V[:, pi]
        return out.reshape(-1)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        self.matvecs += 1
        v = np.asarray(v).reshape(-1)
        return self.project(self.apply_full(self.project(v)))

    def dense_full(self) -> np.ndarray:
        n = self.N
        M = np.zeros((self.D * n, self.D * n), dtype=self.dtype)
        rows = np.arange(n)
        for A, pi in self.terms:
            Pm = np.zeros((n, n))
            Pm[rows, pi] = 1.0
            M += np.kron(A, Pm)
        return M

    def dense(self) -> np.ndarray:
        """(I (x) U)^T M (I (x) U) with U an orthonormal basis of 1^perp: the restricted operator."""
        n = self.N
        Q, _ = np.linalg.qr(np.column_stack([np.ones(n), np.eye(n)[:, : n - 1]]))
        U = Q[:, 1:]
        IU = np.kron(np.eye(self.D), U)
        return IU.conj().T @ self.dense_full() @ IU


@dataclass
class SpectralReport:
    k: int
    values: List[float]  # k largest eigenvalues on the complement, descending
    lambda_min: float
    norm: float
    residuals: List[float]
    matvecs: int
    wall_time: float


def _start_vector(op: SparsePermOperator) -> np.ndarray:
    rng = rng_for(op.pt.seed, op.pt.trial, 10_000)
    return op.project(rng.standard_normal(op.D * op.N)).astype(op.dtype)


def extreme_eigs(op: SparsePermOperator, k: int = 1, tol: float = 1e-10, maxiter: int | None = None,
                 residual_tol: float = 1e-6) -> SpectralReport:
    """Largest k eigenvalues and the smallest eigenvalue of a self-adjoint restricted operator."""
    if not op.P.is_self_adjoint:
        raise PreconditionError("extreme_eigs needs a self-adjoint polynomial")
    n = op.D * op.N - op.D  # dimension of the restricted space
    if n < 1:
        return SpectralReport(k, [], 0.0, 0.0, [], 0, 0.0)
    t0 = time.perf_counter()
    op.matvecs = 0
    if n <= max(2 * k + 2, 40):
        vals = np.linalg.eigvalsh(op.dense())
        top = sorted(vals[::-1][:k].tolist(), reverse=True)
        lo = float(vals[0])
        return SpectralReport(k, top, lo, max(top[0], -lo), [0.0] * len(top), 0, time.perf_counter() - t0)
    L = LinearOperator(op.shape, matvec=op.matvec, dtype=op.dtype)
    v0 = _start_vector(op)
    try:
        tv, tvec = eigsh(L, k=k, which="LA", tol=tol, v0=v0, maxiter=maxiter)
        bv, bvec = eigsh(L, k=1, which="SA", tol=tol, v0=v0, maxiter=maxiter)
    except ArpackNoConvergence as exc:
        raise ConvergenceError("Lanczos iteration did not converge",
                               {"matvecs": op.matvecs, "converged": len(exc.eigenvalues)}) from exc
    order = np.argsort(tv)[::-1]
    tv, tvec = tv[order], tvec[:, order]
    res = []
    for lam, vec in zip(list(tv) + list(bv), list(tvec.T) + list(bvec.T)):
        res.append(float(np.linalg.norm(op.matvec(vec) - lam * vec) / max(np.linalg.norm(vec), 1e-300)))
    scale = max(1.0, float(np.max(np.abs(np.concatenate([tv, bv])))))
    if max(res) > residual_tol * scale:
        raise ConvergenceError("eigenpair residual above tolerance", {"residuals": res, "matvecs": op.matvecs})
    top = [float(x) for x in tv]
    lo = float(bv[0])
    return SpectralReport(k, top, lo, max(top[0], -lo), res, op.matvecs, time.perf_counter() - t0)


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> Tuple[float, float]:
    if n <= 0:
        raise ValueError("need at least one trial")
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # the endpoints are exactly 0 and 1 at the extreme counts; avoid cancellation residue
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


def _map_trials(fn, args: List[tuple], workers: int) -> list:
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*args)))


def _adjacency_trial(d: int, N: int, seed: int, trial: int, planted: int) -> Dict:
    pt = sample_tuple(N, d, seed, trial, planted)
    rep = extreme_eigs(SparsePermOperator(NCPolynomial.adjacency(d), pt), k=1)
    return {"trial": trial, "lambda2": rep.values[0], "lambda_min": rep.lambda_min, "norm": rep.norm,
            "matvecs": rep.matvecs}


@dataclass
class TailResult:
    d: int
    N: int
    eps: float
    threshold: float
    trials: int
    seed: int
    rows: List[Dict]
    exceed: int
    fraction: float
    ci: Tuple[float, float]
    norm_fraction: float
    quantiles: Dict[str, float]

    def to_json(self) -> Dict:
        return asdict(self)


def tail_experiment(d: int, N: int, eps: float, trials: int, seed: int, workers: int = DEFAULT_WORKERS) -> TailResult:
    """Fraction of trials with lambda_2(A^N) >= 2 sqrt(2d-1) + eps, with a Wilson interval."""
    if trials < 1:
        raise PreconditionError("trials must be positive")
    thr = 2 * math.sqrt(2 * d - 1) + eps
    rows = _map_trials(_adjacency_trial, [(d, N, seed, t, 0) for t in range(trials)], workers)
    rows.sort(key=lambda r: r["trial"])
    lam = np.array([r["lambda2"] for r in rows])
    norms = np.array([r["norm"] for r in rows])
    exceed = int(np.sum(lam >= thr))
    q = {f"q{int(100 * p)}": float(np.quantile(lam, p)) for p in (0.05, 0.25, 0.5, 0.75, 0.95)}
    return TailResult(d, N, eps, thr, trials, seed, rows, exceed, exceed / trials, wilson_interval(exceed, trials),
                      float(np.mean(norms >= thr)), q)


def staircase_rho(d: int, m: int) -> float:
    return (2 * m - 1) + (2 * d - 1) / (2 * m - 1)


@dataclass
class StaircaseResult:
    d: int
    N: int
    m: int
    rho_m: float
    degenerate: bool
    planted: bool
    trials: int
    seed: int
    window: float
    top: List[float]
    hits: int  # trials with |top - rho_m| <= window
    above: int  # trials with top >= rho_m - window

    def to_json(self) -> Dict:
        return asdict(self)


def staircase_experiment(d: int, N: int, m: int, trials: int, seed: int, planted: bool = True,
                         window: float = 0.1, workers: int = DEFAULT_WORKERS) -> StaircaseResult:
    """Top eigenvalue on 1^perp with m generators conditioned to fix a common vertex.

    The planted vertex carries m self-loops; for 2m - 1 > sqrt(2d - 1) this
    produces an outlier near rho_m = 2m - 1 + (2d - 1)/(2m - 1).
    """
    if not 1 <= m <= d:
        raise PreconditionError(f"need 1 <= m <= d, got m={m}, d={d}")
    if not 2 * m - 1 > math.sqrt(2 * d - 1):
        raise PreconditionError("2m - 1 <= sqrt(2d - 1): rho_m equals the bulk edge 2 sqrt(2d - 1), no outlier regime")
    if trials < 1:
        raise PreconditionError("trials must be positive")
    rho = staircase_rho(d, m)
    rows = _map_trials(_adjacency_trial, [(d, N, seed, t, m if planted else 0) for t in range(trials)], workers)
    rows.sort(key=lambda r: r["trial"])
    top = [r["lambda2"] for r in rows]
    hits = sum(abs(t - rho) <= window for t in top)
    above = sum(t >= rho - window for t in top)
    return StaircaseResult(d, N, m, rho, math.isclose(rho, 2 * d), planted, trials, seed, window, top, hits, above)


def monte_carlo_trace(expansion, pt: PermTuple) -> float:
    """tr_{DN} h(P(S, S*)) restricted to 1^perp, from a merged word expansion."""
    N = pt.N
    inv = [np.argsort(p) for p in pt.perms]
    total = 0.0
    for coeff, word in expansion:
        pi = word_index_map(word.letters, pt.perms, inv)
        fix = int(np.sum(pi == np.arange(N)))
        total += complex(coeff).real * (fix - 1) / N
    return total


@dataclass
class WeakProbeResult:
    Ns: List[int]
    exact: List[Fraction]
    nu0: Fraction
    nu1: Fraction
    residuals: List[float]  # |Psi(1/N) - nu0 - nu1/N|
    slope: float
    mc_mean: List[float] = field(default_factory=list)
    mc_stderr: List[float] = field(default_factory=list)
    mc_consistent: List[bool] = field(default_factory=list)


def residual_slope(Ns: Sequence[int], residuals: Sequence[float]) -> float:
    pts = [(math.log(n), math.log(r)) for n, r in zip(Ns, residuals) if r > 0]
    if len(pts) < 2:
        return float("nan")
    x, y = zip(*pts)
    return float(np.polyfit(x, y, 1)[0])


def weak_convergence_probe(P: NCPolynomial, h: ScalarPolynomial, Ns: Sequence[int], trials: int = 0,
                           seed: int = 0) -> WeakProbeResult:
    """Exact residuals |Psi(1/N) - nu0 - nu1/N| and their log-log slope, with optional Monte Carlo."""
    psi = polynomial_trace_expectation(P, h)
    nu0, nu1 = taylor_nu(psi, 1)
    exact = [psi(Fraction(1, n)) for n in Ns]
    res = [float(abs(e - nu0 - nu1 * Fraction(1, n))) for e, n in zip(exact, Ns)]
    out = WeakProbeResult(list(Ns), exact, nu0, nu1, res, residual_slope(Ns, res))
    if trials > 0:
        expansion = trace_word_expansion(P, h)
        for n, e in zip(Ns, exact):
            samples = np.array([monte_carlo_trace(expansion, sample_tuple(n, P.d, seed, t)) for t in range(trials)])
            mean = float(samples.mean())
            se = float(samples.std(ddof=1) / math.sqrt(trials)) if trials > 1 else float("inf")
            out.mc_mean.append(mean)
            out.mc_stderr.append(se)
            out.mc_consistent.append(abs(mean - float(e)) <= 3 * se + 1e-12)
    return out
