import numpy as np
import pytest
import scipy.linalg

from ccguide.cca import (
    CcaResult,
    dcca_gradient,
    dcca_objective,
    fit_cca,
    identity_residuals,
    total_correlation,
)
from ccguide.data import gen_correlated_gaussian
from ccguide.errors import InsufficientDataError, InvalidInputError, NumericalFailureError


def eigen_oracle(u, y, reg):
    """Canonical correlations from the generalised symmetric eigenproblem
    Suy Syy^-1 Suy' w = rho^2 Suu w, with covariances from numpy."""
    l = u.shape[0]
    c = np.cov(np.vstack([u, y]))
    suu = c[:l, :l] + reg * np.eye(l)
    syy = c[l:, l:] + reg * np.eye(y.shape[0])
    suy = c[:l, l:]
    lhs = suy @ np.linalg.solve(syy, suy.T)
    w = scipy.linalg.eigh(0.5 * (lhs + lhs.T), suu, eigvals_only=True)
    return np.sqrt(np.clip(np.sort(w)[::-1], 0, None))


def mixed_views(l, m, n, seed):
    rng = np.random.default_rng(seed)
    shared = rng.normal(size=(min(l, m), n))
    u = rng.normal(size=(l, min(l, m))) @ shared + rng.normal(size=(l, n))
    y = rng.normal(size=(m, min(l, m))) @ shared + rng.normal(size=(m, n))
    return u, y


def test_identical_views_give_unit_correlations():
    u = np.random.default_rng(0).normal(size=(3, 1000))
    res = fit_cca(u, u.copy(), reg=1e-8)
    assert res.kappa == 3
    assert np.all(res.rho >= 1 - 1e-6) and np.all(res.rho <= 1)


def test_independent_views_are_near_zero():
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        res = fit_cca(rng.normal(size=(2, 50_000)), rng.normal(size=(2, 50_000)))
        worst = max(worst, res.rho.max())
    assert worst <= 3 / np.sqrt(50_000)


def test_known_correlations_recovered():
    d = gen_correlated_gaussian(20_000, 2, (0.9, 0.5), seed=1)
    res = fit_cca(d.x1, d.x2)
    np.testing.assert_allclose(res.rho, [0.9, 0.5], atol=0.02)
    np.testing.assert_allclose(res.rho, eigen_oracle(d.x1, d.x2, 1e-8), atol=1e-8)


@pytest.mark.parametrize("seed", range(6))
def test_matches_eigen_oracle(seed):
    l, m = 2 + seed % 3, 4 - seed % 3
    u, y = mixed_views(l, m, 500, seed)
    res = fit_cca(u, y, reg=1e-8)
    oracle = eigen_oracle(u, y, 1e-8)[: min(l, m)]
    np.testing.assert_allclose(res.rho, oracle, atol=1e-8)


@pytest.mark.parametrize("l,m", [(2, 2), (3, 5), (6, 2), (8, 8)])
def test_identities_and_shapes(l, m):
    u, y = mixed_views(l, m, 2000, l * 10 + m)
    res = fit_cca(u, y)
    assert res.j.shape == (l, l) and res.el.shape == (m, m) and res.sigma.shape == (l, m)
    k = min(l, m)
    np.testing.assert_array_equal(np.diag(res.sigma)[: res.kappa], res.rho)
    assert np.count_nonzero(res.sigma) == res.kappa
    assert res.kappa == k
    assert np.all(np.diff(res.rho) <= 0) and res.rho[0] <= 1 + 1e-8
    for name, value in identity_residuals(res).items():
        assert value <= 1e-6, name


def test_regularisation_is_stored_and_used():
    u, y = mixed_views(3, 3, 300, 2)
    res = fit_cca(u, y, reg=0.5)
    np.testing.assert_allclose(res.cov_u, np.cov(u) + 0.5 * np.eye(3), atol=1e-12)
    assert res.reg == 0.5
    assert max(identity_residuals(res).values()) <= 1e-10


def test_permutation_invariance_bitwise():
    u, y = mixed_views(3, 4, 600, 3)
    perm = np.random.default_rng(3).permutation(600)
    a, b = fit_cca(u, y), fit_cca(u[:, perm], y[:, perm])
    for name in ("j", "el", "sigma", "rho", "mean_u", "mean_v"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    assert a.fit_id == b.fit_id


def test_rank_tol_counts_only_real_correlation():
    rng = np.random.default_rng(4)
    u = rng.normal(size=(3, 400))
    y = np.vstack([u[0], rng.normal(size=(2, 400))])
    res = fit_cca(u, y, rank_tol=0.5)
    assert res.kappa == 1 and res.rho[0] > 0.99


def test_errors():
    with pytest.raises(InsufficientDataError):
        fit_cca(np.ones((3, 4)), np.ones((2, 4)))
    with pytest.raises(InvalidInputError):
        fit_cca(np.ones((2, 10)), np.ones((2, 9)))
    with pytest.raises(InvalidInputError):
        fit_cca(np.ones((2, 10)), np.ones((2, 10)), reg=-1)
    with pytest.raises(NumericalFailureError):
        x = np.random.default_rng(0).normal(size=(2, 20))
        fit_cca(np.vstack([x[0], x[0]]), x, reg=0.0)


def test_identity_constants():
    c = CcaResult.identity(3, 2)
    np.testing.assert_array_equal(c.j, np.eye(3))
    assert c.kappa == 0 and c.sigma.shape == (3, 2) and not c.sigma.any()


def test_dcca_objective_equal_views():
    h = np.random.default_rng(5).normal(size=(3, 500))
    assert dcca_objective(h, h.copy(), reg=1e-12) == pytest.approx(3.0, abs=1e-4)


def test_dcca_objective_top1_matches_cca():
    u, y = mixed_views(4, 4, 800, 6)
    assert dcca_objective(u, y, 1e-3, k=1) == pytest.approx(fit_cca(u, y, reg=1e-3).rho[0], abs=1e-8)
    assert dcca_objective(u, y, 1e-3) == pytest.approx(fit_cca(u, y, reg=1e-3).rho.sum(), abs=1e-8)


def test_dcca_objective_noise_envelope():
    n, k = 50_000, 2
    for seed in range(20):
        rng = np.random.default_rng(200 + seed)
        assert dcca_objective(rng.normal(size=(k, n)), rng.normal(size=(k, n)), 1e-8) <= k * 3 / np.sqrt(n)


def test_dcca_objective_k_validation():
    h = np.ones((2, 10)) + np.random.default_rng(0).normal(size=(2, 10))
    with pytest.raises(InvalidInputError):
        dcca_objective(h, h, 1e-3, k=3)


def central_diff(f, x, step):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        old = x[idx]
        x[idx] = old + step
        hi = f()
        x[idx] = old - step
        lo = f()
        x[idx] = old
        g[idx] = (hi - lo) / (2 * step)
    return g


def rel_err(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-12)


@pytest.mark.parametrize("case", ["random", "scaled_copy"])
def test_dcca_gradient_finite_differences(case):
    rng = np.random.default_rng(7)
    h1 = rng.normal(size=(4, 64))
    if case == "random":
        h2 = 0.6 * h1 + rng.normal(size=(4, 64))
    else:
        h2 = h1.copy()
        h2[1] *= 2.0
    reg = 1e-4
    g1, g2 = dcca_gradient(h1, h2, reg)
    n1 = central_diff(lambda: dcca_objective(h1, h2, reg), h1, 1e-5)
    n2 = central_diff(lambda: dcca_objective(h1, h2, reg), h2, 1e-5)
    assert np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))
    assert rel_err(g1, n1) <= 1e-4
    assert rel_err(g2, n2) <= 1e-4


def test_dcca_gradient_swap_symmetry():
    rng = np.random.default_rng(8)
    h1, h2 = rng.normal(size=(3, 40)), rng.normal(size=(3, 40))
    a1, a2 = dcca_gradient(h1, h2, 1e-3)
    b1, b2 = dcca_gradient(h2, h1, 1e-3)
    np.testing.assert_array_equal(a1, b2)
    np.testing.assert_array_equal(a2, b1)


def test_dcca_gradient_requires_full_k():
    h = np.random.default_rng(0).normal(size=(3, 20))
    with pytest.raises(InvalidInputError):
        dcca_gradient(h, h, 1e-3, k=2)


def test_total_correlation_self():
    z = np.random.default_rng(9).normal(size=(2, 1000))
    assert total_correlation(z, z.copy()) == pytest.approx(2 * 999 / 1000, abs=1e-6)


def test_total_correlation_independent():
    rng = np.random.default_rng(10)
    assert total_correlation(rng.normal(size=(2, 50_000)), rng.normal(size=(2, 50_000))) <= 0.03


def test_total_correlation_equals_scaled_rho_sum():
    u, y = mixed_views(3, 3, 400, 11)
    res = fit_cca(u, y)
    assert total_correlation(u, y) == pytest.approx(res.rho.sum() * 399 / 400, rel=1e-10)
