import math

import numpy as np
import pytest

from strongperm.errors import PreconditionError
from strongperm.ncpoly import NCPolynomial, ScalarPolynomial
from strongperm.simulation import (
    SparsePermOperator, extreme_eigs, sample_tuple, staircase_experiment, staircase_rho, tail_experiment,
    weak_convergence_probe, wilson_interval,
)

A2 = NCPolynomial.adjacency(2)


def test_sample_tuple_basics():
    assert [p.tolist() for p in sample_tuple(1, 3, 0, 0).perms] == [[0], [0], [0]]
    a, b = sample_tuple(50, 2, 7, 3), sample_tuple(50, 2, 7, 3)
    assert all(x.tobytes() == y.tobytes() for x, y in zip(a.perms, b.perms))
    c = sample_tuple(50, 2, 7, 4)
    assert any(x.tobytes() != y.tobytes() for x, y in zip(a.perms, c.perms))
    for p in a.perms:
        assert sorted(p.tolist()) == list(range(50))


def test_planted_generators_fix_vertex_zero():
    pt = sample_tuple(30, 3, 1, 0, planted=2)
    assert pt.perms[0][0] == 0 and pt.perms[1][0] == 0
    with pytest.raises(PreconditionError):
        sample_tuple(30, 2, 1, 0, planted=3)


def test_mean_fixed_points_is_one():
    fixes = [int(np.sum(sample_tuple(40, 1, 5, t).perms[0] == np.arange(40))) for t in range(10_000)]
    assert abs(np.mean(fixes) - 1) <= 0.05


@pytest.mark.parametrize("P", [A2, NCPolynomial.parse("[[1,2],[2,0]]*a + [[1,2],[2,0]]*A + [[0,1],[1,0]]*bb", 2),
                               NCPolynomial.parse("(1+i)*ab + (1-i)*BA", 2)])
def test_matvec_matches_dense(P):
    pt = sample_tuple(60, 2, 3, 0)
    op = SparsePermOperator(P, pt)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(op.D * op.N)
    M = op.dense_full()
    proj = op.project(v)
    assert np.max(np.abs(op.matvec(v) - op.project(M @ proj))) <= 1e-12
    out = op.matvec(v).reshape(op.D, op.N)
    assert np.max(np.abs(out.sum(axis=1))) <= 1e-9


def test_eigs_match_dense_oracle():
    for N in (20, 120, 200):
        op = SparsePermOperator(A2, sample_tuple(N, 2, 9, N))
        rep = extreme_eigs(op, k=3)
        dense = np.linalg.eigvalsh(op.dense())
        assert np.allclose(rep.values, dense[::-1][:3], atol=1e-8)
        assert rep.lambda_min == pytest.approx(dense[0], abs=1e-8)
        assert rep.values == sorted(rep.values, reverse=True)


def test_trivial_eigenvalue_excluded():
    for t in range(5):
        rep = extreme_eigs(SparsePermOperator(A2, sample_tuple(300, 2, 1, t)))
        assert rep.values[0] < 4 - 1e-8


def test_cycle_graph_bound():
    rep = extreme_eigs(SparsePermOperator(NCPolynomial.adjacency(1), sample_tuple(200, 1, 2, 0)))
    assert rep.values[0] <= 2 + 1e-10 and rep.lambda_min >= -2 - 1e-10


def test_non_self_adjoint_refused():
    with pytest.raises(PreconditionError):
        extreme_eigs(SparsePermOperator(NCPolynomial.parse("a", 1), sample_tuple(50, 1, 0, 0)))


def test_tail_experiment_edges():
    gap = 4 - 2 * math.sqrt(3)
    res = tail_experiment(2, 200, gap, 5, seed=1, workers=1)
    assert res.exceed == 0 and res.fraction == 0
    with pytest.raises((PreconditionError, ValueError)):
        tail_experiment(2, 200, 0.3, 0, seed=1)


def test_determinism_across_workers():
    a = tail_experiment(2, 400, 0.3, 4, seed=3, workers=1)
    b = tail_experiment(2, 400, 0.3, 4, seed=3, workers=2)
    for r, s in zip(a.rows, b.rows):
        assert abs(r["lambda2"] - s["lambda2"]) <= 1e-12


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0 and 0 < hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi


def test_staircase_formula_and_regime():
    assert staircase_rho(3, 2) == pytest.approx(14 / 3)
    assert staircase_rho(2, 2) == 4
    res = staircase_experiment(2, 200, 2, 2, seed=0)
    assert res.degenerate
    with pytest.raises(PreconditionError):
        staircase_experiment(3, 200, 1, 2, seed=0)


def test_weak_probe_examples():
    const = weak_convergence_probe(A2, ScalarPolynomial.parse("3"), [50, 100, 200])
    assert const.residuals == [0.0, 0.0, 0.0]
    probe = weak_convergence_probe(A2, ScalarPolynomial.parse("x^2"), [20, 40], trials=200, seed=4)
    assert all(probe.mc_consistent)
