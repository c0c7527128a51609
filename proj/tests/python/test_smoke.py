import numpy as np
import pytest

import speclab


def test_kernel_bounds():
    k = speclab.gaussian_kernel(0.5, 0.1)
    assert k.kappa_l == pytest.approx(0.1 + np.exp(-2.0))
    assert k.kappa_u == pytest.approx(1.1)
    with pytest.raises(ValueError):
        speclab.gaussian_kernel(-1.0, 0.1)


def test_laplacian_embedding_restricts_to_eigenvectors():
    x = speclab.sample_uniform(150, seed=3)
    fit = speclab.laplacian_embedding(x, speclab.gaussian_kernel(), 2)
    assert fit.eigvals[0] == pytest.approx(1.0)
    np.testing.assert_allclose(fit.evaluate(x), fit.eigvecs, atol=1e-10)
    np.testing.assert_allclose(fit.laplacian, fit.laplacian.T, atol=0)


def test_kpca_linear_matches_second_moment():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, size=(30, 2))
    sys = speclab.kpca(x, speclab.linear_kernel([-1, -1], [1, 1]), 2)
    moment = np.sort(np.linalg.eigvalsh(x.T @ x / 30))[::-1]
    np.testing.assert_allclose(sys.eigvals[:2], moment, atol=1e-10)
    np.testing.assert_allclose(speclab.second_moment_spectrum(x), moment, atol=1e-12)


def test_oracle_and_alignment():
    k = speclab.gaussian_kernel()
    oracle = speclab.population_oracle(k, m=400, K=2)
    assert oracle.eigengap > 0
    w = oracle.weights
    f = oracle.node_values
    np.testing.assert_allclose(f.T @ (w[:, None] * f), np.eye(2), atol=1e-8)
    q, s, gap = speclab.procrustes(np.diag([0.9, 0.8]))
    np.testing.assert_allclose(q, np.eye(2), atol=1e-15)
    assert gap == pytest.approx(0.2)
    with pytest.raises(RuntimeError):
        speclab.procrustes(np.zeros((2, 2)))


def test_sep_and_newton():
    assert speclab.sep(np.diag([3.0, 2.0]), np.diag([1.0, 0.5])) == pytest.approx(1.0)
    t = np.diag([2.0, 1.0])
    e = np.array([[0.0, 0.2], [1e-3, 0.0]])
    res = speclab.newton_solve(t, e, 1)
    assert res["passes"]
    y = 2e-3 / (1 + np.sqrt(1 + 4 * 0.2 * 1e-3))
    assert abs(res["Y"][0, 0] - y) <= 1e-14
    assert "theorem_bound_holds=1" in speclab.nk_demo()


def test_small_rate_study():
    out = speclab.rate_study("n_grid=50,100,200,400\ntrials=20\noracle_m=400\n")
    assert len(out["rows"]) == 80
    assert out["slope"] < 0
    with pytest.raises(ValueError):
        speclab.rate_study("trials=3\n")
