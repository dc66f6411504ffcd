"""Linear canonical correlation analysis and correlation metrics."""

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidInputError, NumericalFailureError
from .linalg import as_matrix, covariance, svd, sym_eig

DEFAULT_REG = 1e-8
DEFAULT_RANK_TOL = 1e-6
# an eigenvalue below this fraction of the largest one counts as singular
_SINGULAR_RTOL = 1e-13


@dataclass(frozen=True)
class CcaResult:
    """Fitted CCA constants.

    ``j`` (l x l) and ``el`` (m x m) hold the canonical weight vectors as
    columns, ``sigma`` (l x m) carries ``rho`` on its leading diagonal and
    zeros elsewhere. ``cov_u``, ``cov_v`` and ``cov_uv`` are the regularised
    covariances the weights were computed from.
    """

    j: np.ndarray
    el: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray
    kappa: int
    mean_u: np.ndarray
    mean_v: np.ndarray
    reg: float
    cov_u: np.ndarray = None
    cov_v: np.ndarray = None
    cov_uv: np.ndarray = None

    @property
    def dims(self):
        return self.j.shape[0], self.el.shape[0]

    @property
    def fit_id(self):
        h = hashlib.sha1()
        for arr in (self.j, self.el, self.sigma):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:12]

    @classmethod
    def identity(cls, l, m):
        """Pass-through constants (``J = I``, ``L = I``, ``Sigma = 0``, zero
        means) used before the first fit."""
        return cls(
            j=np.eye(l),
            el=np.eye(m),
            sigma=np.zeros((l, m)),
            rho=np.zeros(0),
            kappa=0,
            mean_u=np.zeros(l),
            mean_v=np.zeros(m),
            reg=0.0,
        )


def _inv_sqrt_checked(cov, name):
    w, q = sym_eig(cov)
    top = max(float(w[-1]), 0.0)
    if top <= 0.0 or w[0] <= _SINGULAR_RTOL * top:
        raise NumericalFailureError(
            f"covariance of {name} is not invertible "
            f"(eigenvalues in [{w[0]:.3g}, {w[-1]:.3g}]); increase reg"
        )
    out = (q * w**-0.5) @ q.T
    return 0.5 * (out + out.T)


def _whitened_cross(u, y, reg):
    mean_u, mean_y, su, sy, suy = covariance(u, y)
    su = su + reg * np.eye(su.shape[0])
    sy = sy + reg * np.eye(sy.shape[0])
    isu = _inv_sqrt_checked(su, "view 1")
    isy = _inv_sqrt_checked(sy, "view 2")
    return mean_u, mean_y, su, sy, suy, isu, isy, isu @ suy @ isy


def fit_cca(u, y, reg=DEFAULT_REG, rank_tol=DEFAULT_RANK_TOL):
    """Fit linear CCA to two views.

    Parameters
    ----------
    u : array_like, shape (l, N)
    y : array_like, shape (m, N)
        Views with samples on columns.
    reg : float
        Added to the diagonals of both auto-covariances.
    rank_tol : float
        Singular values at or below this are treated as zero correlation.

    Returns
    -------
    CcaResult
    """
    u = as_matrix(u, "u")
    y = as_matrix(y, "y")
    if reg < 0 or rank_tol < 0:
        raise InvalidInputError("reg and rank_tol must be non-negative")
    l, n = u.shape
    m = y.shape[0]
    if y.shape[1] != n:
        raise InvalidInputError(f"views have {n} and {y.shape[1]} samples")
    if n < max(l, m) + 2:
        raise InsufficientDataError(
            f"CCA with dims ({l}, {m}) needs at least {max(l, m) + 2} samples, got {n}"
        )
    mean_u, mean_y, su, sy, suy, isu, isy, upsilon = _whitened_cross(u, y, reg)
    f = svd(upsilon, full_matrices=True)
    s = np.clip(f.s, 0.0, 1.0)
    kappa = int(np.count_nonzero(s > rank_tol))
    rho = s[:kappa].copy()
    sigma = np.zeros((l, m))
    sigma[np.arange(kappa), np.arange(kappa)] = rho
    return CcaResult(
        j=isu @ f.u,
        el=isy @ f.v,
        sigma=sigma,
        rho=rho,
        kappa=kappa,
        mean_u=mean_u,
        mean_v=mean_y,
        reg=float(reg),
        cov_u=su,
        cov_v=sy,
        cov_uv=suy,
    )


def identity_residuals(res):
    """Max-norm residuals of the CCA identities on the fitted covariances.

    Returns a dict with the whitening residuals ``J'S_u J - I`` and
    ``L'S_y L - I``, the cross term ``J'S_uy L - Sigma`` and the two
    transposed forms ``J'S_uy - Sigma L'S_y`` and ``L'S_uy' - Sigma' J'S_u``.
    """
    j, el, sig = res.j, res.el, res.sigma
    l, m = res.dims
    return {
        "whiten_u": float(np.max(np.abs(j.T @ res.cov_u @ j - np.eye(l)))),
        "whiten_v": float(np.max(np.abs(el.T @ res.cov_v @ el - np.eye(m)))),
        "cross": float(np.max(np.abs(j.T @ res.cov_uv @ el - sig))),
        "regress_u": float(np.max(np.abs(j.T @ res.cov_uv - sig @ el.T @ res.cov_v))),
        "regress_v": float(np.max(np.abs(el.T @ res.cov_uv.T - sig.T @ j.T @ res.cov_u))),
    }


def dcca_objective(h1, h2, reg, k=None):
    """Sum of the top ``k`` singular values of the whitened cross-covariance.

    With ``k`` equal to the output width this is the trace norm that deep
    CCA maximises.
    """
    h1 = as_matrix(h1, "h1")
    h2 = as_matrix(h2, "h2")
    o = min(h1.shape[0], h2.shape[0])
    k = o if k is None else int(k)
    if not 1 <= k <= o:
        raise InvalidInputError(f"k must lie in [1, {o}], got {k}")
    if h2.shape[1] != h1.shape[1]:
        raise InvalidInputError("h1 and h2 must have the same number of columns")
    *_, r = _whitened_cross(h1, h2, reg)
    return float(np.sum(svd(r).s[:k]))


def _dcca_grad_core(h1, h2, reg):
    n = h1.shape[1]
    _, _, _, _, _, is11, is22, r = _whitened_cross(h1, h2, reg)
    f = svd(r)
    h1c = h1 - h1.mean(axis=1, keepdims=True)
    h2c = h2 - h2.mean(axis=1, keepdims=True)
    d12 = is11 @ (f.u @ f.v.T) @ is22
    d11 = -0.5 * is11 @ (f.u * f.s) @ f.u.T @ is11
    d22 = -0.5 * is22 @ (f.v * f.s) @ f.v.T @ is22
    g1 = (2.0 * d11 @ h1c + d12 @ h2c) / (n - 1)
    g2 = (2.0 * d22 @ h2c + d12.T @ h1c) / (n - 1)
    return g1, g2


def dcca_gradient(h1, h2, reg, k=None):
    """Gradient of the full trace-norm objective w.r.t. ``h1`` and ``h2``.

    Only ``k`` equal to the output width is supported.
    """
    h1 = as_matrix(h1, "h1")
    h2 = as_matrix(h2, "h2")
    if h1.shape != h2.shape:
        raise InvalidInputError(f"h1 {h1.shape} and h2 {h2.shape} must match")
    o, n = h1.shape
    if k is not None and int(k) != o:
        raise InvalidInputError(f"gradient requires k == {o}, got {k}")
    if n < 2:
        raise InsufficientDataError("need at least 2 samples")
    # evaluate in a canonical view order so that swapping the views swaps
    # the gradients bit-for-bit
    if h1.tobytes() <= h2.tobytes():
        return _dcca_grad_core(h1, h2, reg)
    g2, g1 = _dcca_grad_core(h2, h1, reg)
    return g1, g2


def total_correlation(z1, z2, reg=DEFAULT_REG):
    """``(1/N) trace(J' Z1c Z2c' L)`` for CCA fitted on ``(z1, z2)``.

    ``Z1c`` and ``Z2c`` are the centred feature matrices.
    """
    z1 = as_matrix(z1, "z1")
    z2 = as_matrix(z2, "z2")
    res = fit_cca(z1, z2, reg=reg)
    n = z1.shape[1]
    z1c = z1 - res.mean_u[:, None]
    z2c = z2 - res.mean_v[:, None]
    return float(np.trace((res.j.T @ z1c) @ (z2c.T @ res.el)) / n)
