"""Dense linear algebra used by the CCA layer.

Matrices are plain 2-D ``float64`` numpy arrays. Two-view data is stored
with features on rows and samples on columns (``d x N``).
"""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidInputError, NumericalFailureError

SVD_TOL = 1e-12
SVD_MAX_SWEEPS = 100
EIG_FLOOR = 1e-8
SYMMETRY_RTOL = 1e-10


def as_matrix(a, name="a"):
    """Return ``a`` as a finite 2-D float64 array or raise InvalidInputError."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidInputError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdFactors:
    """``a = u @ diag(s) @ v.T`` with ``s`` sorted descending."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        k = self.s.shape[0]
        return (self.u[:, :k] * self.s) @ self.v[:, :k].T


def _round_robin(size):
    """Circle-method schedule for an even ``size``: one arrangement per
    round, each listing the indices so that positions ``2i`` and ``2i+1``
    form a pair. Every pair appears once per sweep."""
    ring = list(range(size))
    rounds = []
    for _ in range(size - 1):
        rounds.append([x for i in range(size // 2) for x in (ring[i], ring[size - 1 - i])])
        ring = [ring[0], ring[-1]] + ring[1:-1]
    return np.array(rounds)


def _jacobi_columns(work, tol, max_sweeps):
    """One-sided (Hestenes) Jacobi: orthogonalise the columns of ``work``.

    Disjoint column pairs are rotated together (round-robin ordering); pairs
    that are already orthogonal to ``tol`` get the identity rotation.
    Returns the rotated matrix, the accumulated right rotation ``V`` and the
    number of sweeps used.
    """
    rows, n = work.shape
    size = n + (n % 2)
    # rows of ``a`` are the columns being orthogonalised, rows of ``v`` the
    # matching columns of the right rotation; an odd count gets a zero row
    a = np.zeros((size, rows))
    a[:n] = work.T
    v = np.eye(size)
    rounds = _round_robin(size)
    inverse = np.argsort(rounds, axis=1)
    # gathers taking the arrangement of round r to that of round r + 1
    steps = [inverse[r][rounds[(r + 1) % len(rounds)]] for r in range(len(rounds))]
    a = a[rounds[0]]
    v = v[rounds[0]]
    half = size // 2
    # columns already at roundoff level carry no direction worth rotating
    negligible = (np.finfo(float).eps * np.linalg.norm(work)) ** 2
    quiet = 0
    for sweep in range(1, max_sweeps + 1):
        for r in range(len(rounds)):
            a3 = a.reshape(half, 2, rows)
            v3 = v.reshape(half, 2, size)
            ap, aq = a3[:, 0], a3[:, 1]
            alpha = np.einsum("ij,ij->i", ap, ap)
            beta = np.einsum("ij,ij->i", aq, aq)
            gamma = np.einsum("ij,ij->i", ap, aq)
            act = ((gamma != 0.0) & (np.abs(gamma) > tol * np.sqrt(alpha * beta))
                   & (np.minimum(alpha, beta) > negligible))
            if act.any():
                quiet = 0
                g = np.where(act, gamma, 1.0)
                zeta = (beta - alpha) / (2.0 * g)
                t = np.copysign(1.0, zeta) / (np.abs(zeta) + np.hypot(1.0, zeta))
                t = np.where(act, t, 0.0)[:, None]
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                vp, vq = v3[:, 0], v3[:, 1]
                a3[:, 0], a3[:, 1] = c * ap - s * aq, s * ap + c * aq
                v3[:, 0], v3[:, 1] = c * vp - s * vq, s * vp + c * vq
            else:
                quiet += 1
            a = a[steps[r]]
            v = v[steps[r]]
            if quiet >= len(rounds):
                # a full sweep's worth of rounds without a rotation
                back = inverse[(r + 1) % len(rounds)]
                a, v = a[back], v[back]
                return a[:n].T.copy(), v[:n, :n].T.copy(), sweep
    raise NumericalFailureError(
        f"Jacobi SVD did not converge after {max_sweeps} sweeps"
    )


def _complete_basis(q, size, valid):
    """Fill the columns of ``q`` not flagged ``valid`` (and extend to ``size``
    columns) with an orthonormal completion built from unit vectors."""
    m = q.shape[0]
    out = np.zeros((m, size))
    keep = [q[:, k] for k in range(q.shape[1]) if valid[k]]
    basis = list(keep)
    candidates = iter(np.eye(m))
    for k in range(size):
        if k < q.shape[1] and valid[k]:
            out[:, k] = q[:, k]
            continue
        for e in candidates:
            w = e.copy()
            for _ in range(2):
                for b in basis:
                    w -= (b @ w) * b
            norm = np.linalg.norm(w)
            if norm > 1e-8:
                w /= norm
                basis.append(w)
                out[:, k] = w
                break
        else:  # pragma: no cover - unreachable for size <= m
            raise NumericalFailureError("could not complete orthonormal basis")
    return out


def svd(a, full_matrices=False, tol=SVD_TOL, max_sweeps=SVD_MAX_SWEEPS):
    """Singular value decomposition by one-sided Jacobi rotations.

    Parameters
    ----------
    a : array_like, shape (m, n)
    full_matrices : bool
        If True ``u`` is ``m x m`` and ``v`` is ``n x n``; otherwise both have
        ``min(m, n)`` columns.

    Returns
    -------
    SvdFactors
        Singular values descending. Signs are fixed so that the largest
        magnitude entry of every left singular vector is non-negative.
    """
    a = as_matrix(a)
    m, n = a.shape
    transposed = m < n
    work = (a.T if transposed else a).copy()
    work, rot, _ = _jacobi_columns(work, tol, max_sweeps)

    s = np.sqrt(np.einsum("ij,ij->j", work, work))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    work = work[:, order]
    rot = rot[:, order]

    # columns of ``work`` are s_k * (left vectors of the working matrix)
    rows = work.shape[0]
    cutoff = s[0] * max(rows, work.shape[1]) * np.finfo(float).eps if s[0] > 0 else 0.0
    valid = s > cutoff
    left = np.zeros_like(work)
    left[:, valid] = work[:, valid] / s[valid]
    left_size = rows if full_matrices else work.shape[1]
    left = _complete_basis(left, left_size, valid)
    s = np.where(valid, s, 0.0)

    if transposed:
        u, v = rot, left
    else:
        u, v = left, rot

    # sign convention on left vectors; the paired right vector flips with it
    k = min(m, n)
    for col in range(u.shape[1]):
        idx = int(np.argmax(np.abs(u[:, col])))
        if u[idx, col] < 0:
            u[:, col] = -u[:, col]
            if col < k:
                v[:, col] = -v[:, col]
    if not full_matrices:
        u = u[:, :k]
        v = v[:, :k]
    return SvdFactors(u=u, s=s, v=v)


def _check_symmetric(a, name):
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise InvalidInputError(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


def sym_eig(a):
    """Eigen-decomposition of a symmetric matrix (ascending eigenvalues)."""
    a = _check_symmetric(a, "a")
    try:
        return np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailureError(f"eigendecomposition failed: {exc}") from exc


def sym_power(a, power, floor=EIG_FLOOR):
    """``a ** power`` for symmetric ``a`` with eigenvalues clamped at ``floor``."""
    if not floor > 0:
        raise InvalidInputError("floor must be positive")
    w, q = sym_eig(a)
    w = np.maximum(w, floor)
    out = (q * w**power) @ q.T
    return 0.5 * (out + out.T)


def sym_inv_sqrt(a, floor=EIG_FLOOR):
    """Symmetric inverse square root, eigenvalues clamped below at ``floor``."""
    return sym_power(a, -0.5, floor)


def canonical_columns(x):
    """Reorder the columns of ``x`` lexicographically (first row is the
    primary key). Any permutation of the columns maps to the same result."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[1] < 2:
        return x
    order = np.argsort(x[0], kind="stable")
    head = x[0, order]
    if np.any(head[1:] == head[:-1]):
        # ties in the first row: break them on the remaining rows
        order = np.lexsort(x[::-1])
    return x[:, order]


def covariance(x, y):
    """Sample means and (cross-)covariances of two views.

    Columns are samples. Covariances use the ``1/(N-1)`` normalisation.
    Samples are put into a canonical order before any accumulation, so
    permuting them leaves every output bit-for-bit unchanged.

    Returns
    -------
    mean_x, mean_y, cov_x, cov_y, cov_xy
    """
    x = as_matrix(x, "x")
    y = as_matrix(y, "y")
    n = x.shape[1]
    if y.shape[1] != n:
        raise InvalidInputError(
            f"views must share the sample count, got {n} and {y.shape[1]}"
        )
    if n < 2:
        raise InsufficientDataError(f"covariance needs at least 2 samples, got {n}")
    l = x.shape[0]
    w = canonical_columns(np.vstack([x, y]))
    mean = w.sum(axis=1) / n
    w = w - mean[:, None]
    joint = (w @ w.T) / (n - 1)
    joint = 0.5 * (joint + joint.T)
    return mean[:l], mean[l:], joint[:l, :l], joint[l:, l:], joint[:l, l:]
