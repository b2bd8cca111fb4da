"""Dense linear algebra helpers: truncated SVD, rank projection, eigensolver.

Matrices are plain 2-D float64 numpy arrays.  Column-major semantics only
matter where vectors are laid out on grids or patches; those call sites
reshape with Fortran order explicitly.

The decompositions delegate to LAPACK via numpy; the module pins the library
behind a deterministic sign convention (first nonzero entry of every right
singular vector / eigenvector is positive) so golden tests are stable.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceFailure, NotSymmetric, OutOfRange


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Sign pattern making the first nonzero entry of each column positive."""
    flips = np.ones(vectors.shape[1])
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        nz = np.nonzero(col)[0]
        if nz.size and col[nz[0]] < 0.0:
            flips[j] = -1.0
    return flips


def svd_topk(m, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-k singular triplets of ``m``.

    Returns ``(U, s, V)`` with s descending and the columns of U and V
    orthonormal; ``m ~ U @ diag(s) @ V.T`` when k is the full rank.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise OutOfRange(f"expected a matrix, got shape {m.shape}")
    if not 1 <= k <= min(m.shape):
        raise OutOfRange(f"k must lie in [1, {min(m.shape)}], got {k}")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    u, s, v = u[:, :k], s[:k], vt[:k].T
    flips = _fix_signs(v)
    return u * flips, s, v * flips


def rank_project(m, k: int) -> np.ndarray:
    """Nearest matrix of rank at most ``k`` in Frobenius distance.

    Truncates the singular value decomposition after the k largest values.
    """
    u, s, v = svd_topk(m, k)
    return (u * s) @ v.T


def sym_eigh(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Returns ``(eigenvalues, eigenvectors)`` with orthonormal eigenvector
    columns; raises :class:`NotSymmetric` when the input deviates from its
    transpose by more than 1e-10 of its Frobenius norm.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.linalg.norm(a))
    if float(np.abs(a - a.T).max()) > 1e-10 * max(scale, 1e-300):
        raise NotSymmetric("matrix deviates from its transpose beyond tolerance")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    w = w[::-1].copy()
    v = v[:, ::-1]
    return w, v * _fix_signs(v)
