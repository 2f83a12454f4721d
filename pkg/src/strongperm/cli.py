"""Command-line entry point: ``python3 -m strongperm <subcommand> ...``.

Every JSON document carries the parsed configuration and the package version.
Exit codes: 0 ok, 1 failed check, 2 usage or precondition error, 3 budget
exceeded, 4 eigensolver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import BudgetExceeded, ConvergenceError, InvariantViolation, PreconditionError
from .exact import GaussianRational, format_scalar

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET, EXIT_CONVERGENCE = 0, 1, 2, 3, 4


def jsonable(obj):
    if isinstance(obj, (Fraction, GaussianRational)):
        return format_scalar(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return jsonable(float(obj))
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return str(obj)


def emit(args, payload: dict) -> None:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {"version": __version__, "config": jsonable(config), **{k: jsonable(v) for k, v in payload.items()}}
    text = json.dumps(doc, indent=2, sort_keys=False)
    if getattr(args, "json_out", None):
        with open(args.json_out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def write_csv(path: str, rows: list, columns: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([jsonable(r[c]) for c in columns])


def _poly(args):
    from .ncpoly import NCPolynomial

    return NCPolynomial.parse(args.poly, args.d)


def _h(text):
    from .ncpoly import ScalarPolynomial

    return ScalarPolynomial.parse(text)


# --- subcommands ---------------------------------------------------------------


def cmd_expect_word(args):
    from .expectations import exact_expectation_at, word_expectation
    from .words import Word, reduce_letters, strip_identity

    w = Word.parse(args.word, args.d)
    psi = word_expectation(w)
    q = len(strip_identity(w.letters))
    out = {"word": str(w), "reduced": str(Word(reduce_letters(w.letters), w.d)), "q": q}
    if args.symbolic or not args.at:
        out["symbolic"] = psi.reduced().to_json()
        out["over_gq"] = psi.to_json()
    rows = []
    for N in args.at or []:
        if N >= max(q, 1):
            rows.append({"N": N, "value": psi.at_N(N), "route": "rational"})
        else:
            rows.append({"N": N, "value": exact_expectation_at(w, N), "route": "direct"})
    if rows:
        out["values"] = rows
    emit(args, out)
    return EXIT_OK


def cmd_expect_poly(args):
    from .asymptotics import taylor_nu
    from .expectations import polynomial_trace_expectation

    P = _poly(args)
    psi = polynomial_trace_expectation(P, _h(args.h))
    out = {"symbolic": psi.reduced().to_json(), "taylor": taylor_nu(psi, args.order)}
    if args.at:
        out["values"] = [{"N": N, "value": psi.at_N(N)} for N in args.at]
    emit(args, out)
    return EXIT_OK


def cmd_limit_moments(args):
    from .limit import limit_moments

    series = limit_moments(_poly(args), args.pmax)
    emit(args, {"rows": [{"p": p, "moment": m} for p, m in enumerate(series.values)]})
    return EXIT_OK


def cmd_nu(args):
    from .asymptotics import nu1_polynomial_wordcount, support_estimate, taylor_nu
    from .expectations import polynomial_trace_expectation
    from .ncpoly import ScalarPolynomial

    P = _poly(args)
    rows = []
    for p in range(1, args.pmax + 1):
        psi = polynomial_trace_expectation(P, ScalarPolynomial.monomial(p))
        nus = taylor_nu(psi, args.order)
        row = {"p": p, **{f"nu{i}": v for i, v in enumerate(nus)}, "route": "taylor"}
        if args.order >= 1:
            wc = nu1_polynomial_wordcount(P, p)
            row["nu1_wordcount"] = wc
            if wc != nus[1]:
                emit(args, {"rows": rows + [row], "error": "nu1 routes disagree"})
                return EXIT_FAIL
        rows.append(row)
    if args.order >= 1 and len(rows) >= 3:
        est = support_estimate([r["nu1"] for r in rows])
        for r, g in zip(rows, est.normalized):
            r["normalized_growth"] = g
    emit(args, {"rows": rows})
    return EXIT_OK


def cmd_support(args):
    from .asymptotics import nu1_adjacency_wordcount, support_estimate
    from .limit import adjacency_moment, kesten_norm

    if args.which == "nu1":
        moments = [nu1_adjacency_wordcount(args.d, p) for p in range(1, args.pmax + 1)]
        normalizer = args.normalizer or "poly6"
    else:
        moments = [adjacency_moment(args.d, p) for p in range(1, args.pmax + 1)]
        normalizer = args.normalizer or "none"
    est = support_estimate(moments, normalizer=normalizer, target=kesten_norm(args.d), tolerance=args.tol)
    emit(args, {"moments": moments, "estimate": est})
    return EXIT_OK if est.within_target or args.which == "nu0" else EXIT_FAIL


def cmd_cheb(args):
    from .approximation import cheb_expand

    K = Fraction(args.K) if args.K == int(args.K) else args.K
    e = cheb_expand(_h(args.h), K)
    emit(args, {"K": args.K, "coefficients": list(e.coeffs)})
    return EXIT_OK


def cmd_markov_check(args):
    from .approximation import chebyshev_on_interval, markov_bound_check

    h = chebyshev_on_interval(args.chebyshev, Fraction(args.a)) if args.chebyshev else _h(args.h)
    rep = markov_bound_check(h, args.a, args.m)
    emit(args, {"report": rep})
    return EXIT_OK


def cmd_testfn(args):
    from .certificates import build_test_function

    tf = build_test_function(args.rho, args.eps, args.K, args.m)
    xs = np.linspace(-args.K * 1.1, args.K * 1.1, args.samples)
    chi = tf.chi(xs)
    order = np.argsort(np.abs(xs))
    checks = {
        "range": bool(chi.min() >= -1e-12 and chi.max() <= 1 + 1e-12),
        "zero_plateau": bool(np.all(np.abs(chi[np.abs(xs) <= args.rho + args.eps / 2]) <= 1e-12)),
        "one_plateau": bool(np.all(np.abs(chi[np.abs(xs) >= args.rho + args.eps] - 1) <= 1e-12)),
        "monotone_in_abs": bool(np.all(np.diff(chi[order]) >= -1e-10)),
    }
    beta = math.inf if args.beta == "inf" else float(args.beta)
    out = {"phi": tf.phi, "delta": tf.delta, "bump_exponent": tf.n, "checks": checks,
           "f_derivative_norm": tf.top_derivative_norm(beta), "fitted_constant_C": tf.fitted_constant()}
    if args.csv:
        write_csv(args.csv, [{"x": x, "chi": c} for x, c in zip(xs, chi)], ["x", "chi"])
    emit(args, out)
    return EXIT_OK if all(checks.values()) else EXIT_FAIL


def cmd_certificate(args):
    from .certificates import friedman_certificate

    cert = friedman_certificate(args.d, args.eps, args.N, universal_constant=args.C)
    emit(args, {"certificate": cert})
    return EXIT_OK


def _plot_script(path: str, csv_path: str, column: str, ref: float, label: str) -> None:
    with open(path, "w") as fh:
        fh.write(
            "import csv\nimport matplotlib.pyplot as plt\n\n"
            f"vals = [float(r[{column!r}]) for r in csv.DictReader(open({csv_path!r}))]\n"
            "plt.hist(vals, bins=30)\n"
            f"plt.axvline({ref!r}, color='k', linestyle='--', label={label!r})\n"
            "plt.legend()\nplt.xlabel('top eigenvalue on the complement of 1')\n"
            f"plt.savefig({(os.path.splitext(csv_path)[0] + '.png')!r})\n"
        )


def cmd_simulate(args):
    from .simulation import tail_experiment

    res = tail_experiment(args.d, args.N, args.eps, args.trials, args.seed, workers=args.workers)
    if args.out:
        write_csv(args.out, res.rows, ["trial", "lambda2", "lambda_min", "norm", "matvecs"])
        if args.plot_script:
            _plot_script(args.plot_script, args.out, "lambda2", 2 * math.sqrt(2 * args.d - 1), "2 sqrt(2d-1)")
    summary = {k: v for k, v in dataclasses.asdict(res).items() if k != "rows"}
    emit(args, {"summary": summary})
    return EXIT_OK


def cmd_staircase(args):
    from .simulation import staircase_experiment

    res = staircase_experiment(args.d, args.N, args.m, args.trials, args.seed, planted=not args.no_plant,
                               window=args.window, workers=args.workers)
    if args.out:
        write_csv(args.out, [{"trial": t, "top": v} for t, v in enumerate(res.top)], ["trial", "top"])
        if args.plot_script:
            _plot_script(args.plot_script, args.out, "top", res.rho_m, "rho_m")
    emit(args, {"result": res})
    return EXIT_OK


def cmd_weak_probe(args):
    from .simulation import weak_convergence_probe

    res = weak_convergence_probe(_poly(args), _h(args.h), args.Ns, trials=args.trials, seed=args.seed)
    if args.out:
        rows = [{"N": n, "exact": float(e), "residual": r} for n, e, r in zip(res.Ns, res.exact, res.residuals)]
        write_csv(args.out, rows, ["N", "exact", "residual"])
    emit(args, {"result": res})
    return EXIT_OK if all(res.mc_consistent) else EXIT_FAIL


def cmd_selftest(args):
    from .asymptotics import nu1_adjacency_wordcount, taylor_nu
    from .expectations import brute_force_expectation, polynomial_trace_expectation, word_expectation
    from .limit import tau_moment, walk_count
    from .ncpoly import NCPolynomial, ScalarPolynomial
    from .words import Word, reduced_words

    checks = {}
    checks["walk_count"] = walk_count("a", 3, 2) == 7 and tau_moment(NCPolynomial.adjacency(2), 4) == 28
    ok = True
    for L in range(1, 4):
        for w in reduced_words(2, L):
            W = Word(w, 2)
            r = word_expectation(W)
            ok &= all(r.at_N(N) == brute_force_expectation(W, N) for N in range(max(L, 2), 5))
    checks["oracle_words_len3"] = ok
    A = NCPolynomial.adjacency(2)
    checks["nu1_routes"] = all(
        taylor_nu(polynomial_trace_expectation(A, ScalarPolynomial.monomial(p)), 1)[1] == nu1_adjacency_wordcount(2, p)
        for p in range(1, 5))
    emit(args, {"checks": checks})
    return EXIT_OK if all(checks.values()) else EXIT_FAIL


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    seed_default = int(os.environ.get("SEED", 0))
    workers_default = int(os.environ.get("WORKERS", 1))
    p = argparse.ArgumentParser(prog="strongperm", description="Exact and Monte Carlo tools for random permutation matrices.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--json-out", help="also write the JSON document to this file")
        return sp

    sp = add("expect-word", cmd_expect_word, "exact E[tr_N w(S)] as a rational function of 1/N")
    sp.add_argument("--word", required=True)
    sp.add_argument("--d", type=int)
    sp.add_argument("--at", type=int, nargs="*")
    sp.add_argument("--symbolic", action="store_true")

    sp = add("expect-poly", cmd_expect_poly, "exact E[tr h(P(S, S*))] as a rational function of 1/N")
    sp.add_argument("--poly", required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--h", required=True, help="scalar polynomial, e.g. 'x^4' or '1 - 2x + x^3'")
    sp.add_argument("--order", type=int, default=2)
    sp.add_argument("--at", type=int, nargs="*")

    sp = add("limit-moments", cmd_limit_moments, "moments of P in the limiting model")
    sp.add_argument("--poly", required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--pmax", type=int, required=True)

    sp = add("nu", cmd_nu, "Taylor functionals nu_i(x^p), with the word-count route for nu_1")
    sp.add_argument("--poly", required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--order", type=int, default=1)
    sp.add_argument("--pmax", type=int, required=True)

    sp = add("support", cmd_support, "moment-growth support estimate for the adjacency model")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--pmax", type=int, default=10)
    sp.add_argument("--which", choices=["nu0", "nu1"], default="nu1")
    sp.add_argument("--normalizer", choices=["poly6", "none"])
    sp.add_argument("--tol", type=float, default=0.01)

    sp = add("cheb", cmd_cheb, "Chebyshev coefficients of a polynomial on [-K, K]")
    sp.add_argument("--h", "--poly", dest="h", required=True)
    sp.add_argument("--K", type=float, required=True)

    sp = add("markov-check", cmd_markov_check, "Markov inequality check on [0, a]")
    sp.add_argument("--h", "--poly", dest="h", default="x")
    sp.add_argument("--chebyshev", type=int, default=0, help="use T_q mapped to [0, a] instead of --h")
    sp.add_argument("--a", type=float, default=1.0)
    sp.add_argument("--m", type=int, default=1)

    sp = add("testfn", cmd_testfn, "build the smooth test function and measure its derivative norms")
    sp.add_argument("--rho", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--K", type=float, required=True)
    sp.add_argument("--m", type=int, default=8)
    sp.add_argument("--beta", default="inf")
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--csv")

    sp = add("certificate", cmd_certificate, "tail bound for the second eigenvalue, up to a universal constant")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--N", type=int, default=10**6)
    sp.add_argument("--C", type=float, default=1.0, help="universal constant (default 1)")

    for name, func, help_ in (("simulate", cmd_simulate, "tail experiment for random 2d-regular graphs"),
                              ("staircase", cmd_staircase, "planted-tangle outlier experiment")):
        sp = add(name, func, help_)
        sp.add_argument("--d", type=int, required=True)
        sp.add_argument("--N", type=int, default=2000)
        sp.add_argument("--trials", type=int, default=20)
        sp.add_argument("--seed", type=int, default=seed_default)
        sp.add_argument("--workers", type=int, default=workers_default)
        sp.add_argument("--out", help="CSV of per-trial values")
        sp.add_argument("--plot-script", help="write a matplotlib script plotting the CSV")
        if name == "simulate":
            sp.add_argument("--eps", type=float, default=0.3)
        else:
            sp.add_argument("--m", type=int, required=True)
            sp.add_argument("--no-plant", action="store_true")
            sp.add_argument("--window", type=float, default=0.1)

    sp = add("weak-probe", cmd_weak_probe, "remainder scaling of expected traces")
    sp.add_argument("--poly", default="adjacency")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--h", default="x^4")
    sp.add_argument("--Ns", type=int, nargs="+", default=[50, 100, 200, 400, 800])
    sp.add_argument("--trials", type=int, default=0)
    sp.add_argument("--seed", type=int, default=seed_default)
    sp.add_argument("--out")

    add("selftest", cmd_selftest, "quick consistency checks")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConvergenceError as exc:
        print(f"error: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (InvariantViolation, AssertionError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
