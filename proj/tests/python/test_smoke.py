import numpy as np
import pytest

import qinspired as qi


def test_sampler_matches_weights():
    s = qi.IndexSampler([0.0, 1.0, 3.0])
    assert s.total == pytest.approx(4.0)
    assert s.probability(2) == pytest.approx(0.75)
    assert s.sample(0.1) == 1
    assert s.sample(0.9) == 2
    draws = s.draw(qi.Rng(1), 4000)
    assert 0 not in draws
    assert abs(draws.count(2) / 4000 - 0.75) < 0.03


def test_tree_update():
    t = qi.LengthSquareTree([1.0, 1.0])
    t.update(0, 0.0)
    assert t.sample(0.0) == 1
    assert t.total == pytest.approx(1.0)


def test_exhaustive_sketch_pseudoinverse():
    a = qi.DenseMatrix(np.diag([3.0, 4.0]))
    sketch = qi.exhaustive_sketch(a, 2)
    assert sorted(sketch.sigma) == pytest.approx([3.0, 4.0])
    pinv = qi.reconstruct(sketch, a, pseudoinverse=True)
    assert np.allclose(pinv, np.diag([1 / 3, 1 / 4]))
    x = qi.solve_direct(a, [0.0, 1.0], 2, sketch)
    assert np.allclose(x, [0.0, 0.25])


def test_linear_pipeline_rank_one():
    rng = qi.Rng(4)
    u = np.array([1.0, 2.0, 2.0]) / 3
    v = np.array([0.6, 0.8])
    a = qi.DenseMatrix(5.0 * np.outer(u, v))
    sketch = qi.run_fkv(a, 20, 20, 1, rng)
    assert sketch.sigma[0] == pytest.approx(5.0, rel=1e-9)
    lam = qi.estimate_lambdas_linear(a, list(u), sketch, samples=200, reps=5, rng=rng)
    sol = qi.make_implicit_solution(sketch, lam)
    x = sol.vector(a)
    assert np.allclose(np.abs(x), v / 5.0, rtol=1e-9)
    j, trials = sol.sample(a, rng)
    assert j in (0, 1) and trials >= 1


def test_gaussian_problem_and_metrics():
    p = qi.gaussian_problem(60, 40, 3, 3.0, qi.Rng(2))
    a = p.matrix()
    assert np.allclose(a @ p.exact_solution(), p.b)
    assert qi.relative_error([1.0, 2.0, 4.0], [1.1, 2.0, 4.0]) == pytest.approx(0.1 / 3)
    assert qi.relative_error([1.0, 2.0, 4.0], [1.1, 2.0, 4.0], mode="median") == pytest.approx(0.0)


def test_hadamard_entries():
    h = qi.HadamardProblem(2, [1.0], [0], [1.0])
    assert h.shape == (4, 4)
    assert h.frobenius_norm == pytest.approx(1.0)
    dense = h.to_dense()
    assert np.linalg.svd(dense, compute_uv=False)[0] == pytest.approx(1.0)


def test_errors_become_exceptions():
    with pytest.raises(qi.Error):
        qi.DenseMatrix(np.zeros((2, 2)))


def test_highdim_report():
    report = qi.run_highdim(n_bits=12, k=1, kappa=1.0, kappa_beta=1.0, r=20, c=20, L=10, reps=2, seed=3,
                            samples=200)
    assert report["n_repetitions"] == 2
    assert report["summary"]["eta_sigma"]["mean"] < 1e-9
    assert len(report["timings"]) == 2


def test_markowitz_single_asset():
    a, b = qi.markowitz_system(np.array([[0.01, 0.03]]))
    assert a.shape == (2, 2)
    assert b[0] == pytest.approx(0.02)
