"""Zero-parameter redundancy filter built from a CCA fit.

For features ``z1`` and ``z2`` the filter returns the two residuals::

    r1 = J' z1 - Sigma L' z2
    r2 = L' z2 - Sigma' J' z1

Nothing in here is trainable; the constants come verbatim from a
:class:`~ccguide.cca.CcaResult`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NumericalFailureError
from .linalg import sym_eig


@dataclass(frozen=True)
class FilterParams:
    j: np.ndarray
    el: np.ndarray
    sigma: np.ndarray
    source: str = ""

    trainable_parameters = 0

    @classmethod
    def from_cca(cls, res):
        return cls(j=res.j, el=res.el, sigma=res.sigma, source=res.fit_id)

    @property
    def dims(self):
        return self.j.shape[0], self.el.shape[0]


def _as_batch(z, dim, name):
    z = np.asarray(z, dtype=np.float64)
    vector = z.ndim == 1
    if vector:
        z = z[:, None]
    if z.ndim != 2 or z.shape[0] != dim:
        raise InvalidInputError(f"{name} must have {dim} rows, got shape {z.shape}")
    return z, vector


def apply_filter(z1, z2, p, use_filter=True):
    """Apply the redundancy filter column-wise.

    Accepts single vectors or ``(dim, N)`` batches. With ``use_filter=False``
    the cross terms are dropped and ``(J' z1, L' z2)`` is returned, which is
    the same as filtering with ``Sigma = 0``.
    """
    l, m = p.dims
    z1, vec1 = _as_batch(z1, l, "z1")
    z2, vec2 = _as_batch(z2, m, "z2")
    if z1.shape[1] != z2.shape[1]:
        raise InvalidInputError("z1 and z2 must have the same number of columns")
    a1 = p.j.T @ z1
    a2 = p.el.T @ z2
    if use_filter:
        r1 = a1 - p.sigma @ a2
        r2 = a2 - p.sigma.T @ a1
    else:
        r1, r2 = a1, a2
    if vec1 and vec2:
        return r1[:, 0], r2[:, 0]
    return r1, r2


def filter_backward(g1, g2, p, use_filter=True):
    """Pull gradients w.r.t. ``(r1, r2)`` back to ``(z1, z2)``."""
    if use_filter:
        ga1 = g1 - p.sigma @ g2
        ga2 = g2 - p.sigma.T @ g1
    else:
        ga1, ga2 = g1, g2
    return p.j @ ga1, p.el @ ga2


def residual_covariance_expected(p):
    """Covariance of ``r1`` predicted for whitened inputs: ``I - Sigma Sigma'``."""
    l = p.dims[0]
    return np.eye(l) - p.sigma @ p.sigma.T


def lms_form_check(z1, z2, p, sample_covs):
    """Largest entry-wise gap between ``r1`` and its regression form.

    ``r1`` is recomputed as ``Gamma' S1^{-1/2} (z1 - S12 S2^{-1} z2)``, where
    ``S12 S2^{-1} z2`` is the least-squares estimate of ``z1`` from ``z2`` and
    ``Gamma = S1^{1/2} J``. ``sample_covs`` is ``(S1, S2, S12)``, normally the
    regularised covariances stored on the CCA fit. The two forms agree when
    ``p`` was fitted on those covariances; a large value flags a mismatch.
    """
    s1, s2, s12 = (np.asarray(c, dtype=np.float64) for c in sample_covs)
    l, m = p.dims
    z1, _ = _as_batch(z1, l, "z1")
    z2, _ = _as_batch(z2, m, "z2")
    w1, q1 = sym_eig(s1)
    w2, q2 = sym_eig(s2)
    if w1[0] <= 0:
        raise NumericalFailureError("view-1 covariance is not positive definite")
    if w2[0] <= 1e-13 * max(w2[-1], 0.0) or w2[-1] <= 0:
        raise NumericalFailureError("view-2 covariance is singular")
    s1_half = (q1 * np.sqrt(w1)) @ q1.T
    s1_inv_half = (q1 / np.sqrt(w1)) @ q1.T
    s2_inv = (q2 / w2) @ q2.T
    gamma = s1_half @ p.j
    lms = gamma.T @ s1_inv_half @ (z1 - s12 @ (s2_inv @ z2))
    r1, _ = apply_filter(z1, z2, p)
    return float(np.max(np.abs(r1 - lms)))
