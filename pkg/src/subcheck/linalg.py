"""Frame construction helpers: nullspaces, metric orthonormalization, angles."""

from __future__ import annotations

import numpy as np

__all__ = [
    "nullspace",
    "g_orthonormalize",
    "g_complement",
    "g_span",
    "frame_projector",
    "max_principal_angle",
]


def nullspace(a: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of ker(a); singular values below
    ``rtol * s_max`` count as zero."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    _, s, vh = np.linalg.svd(a)
    tol = rtol * (s[0] if s.size else 0.0)
    rank = int((s > tol).sum())
    return vh[rank:].T


def g_orthonormalize(basis: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Orthonormalize full-rank columns with respect to the inner product g."""
    if basis.shape[1] == 0:
        return basis
    gram = basis.T @ g @ basis
    chol = np.linalg.cholesky(gram)
    return basis @ np.linalg.inv(chol).T


def g_complement(span: np.ndarray, within: np.ndarray, g: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """g-orthonormal basis of the g-orthogonal complement of span inside within.

    Both arguments are column bases; ``within`` must be g-orthonormal.
    """
    if within.shape[1] == 0:
        return within
    if span.shape[1] == 0:
        return within
    coeff = within.T @ g @ span  # coordinates of span inside the frame
    resid = np.eye(within.shape[1]) - _euclid_projector(coeff)
    w, v = np.linalg.eigh(resid)
    keep = w > max(rtol, rtol * w.max(initial=0.0))
    basis = within @ v[:, keep]
    return g_orthonormalize(basis, g)


def _euclid_projector(cols: np.ndarray) -> np.ndarray:
    if cols.shape[1] == 0:
        return np.zeros((cols.shape[0], cols.shape[0]))
    q, _ = np.linalg.qr(cols)
    # Guard rank deficiency: drop columns with negligible norm contribution.
    r = np.linalg.matrix_rank(cols, tol=1e-12 * max(1.0, np.abs(cols).max()))
    q = q[:, :r]
    return q @ q.T


def g_span(cols: np.ndarray, g: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """g-orthonormal basis of the column span, discarding near-null columns."""
    if cols.shape[1] == 0:
        return cols
    gram = cols.T @ g @ cols
    w, v = np.linalg.eigh(gram)
    keep = w > max(rtol, rtol * w.max(initial=0.0))
    if not keep.any():
        return cols[:, :0]
    return cols @ (v[:, keep] / np.sqrt(w[keep]))


def frame_projector(frame: np.ndarray, g: np.ndarray) -> np.ndarray:
    """g-orthogonal projector onto the span of a g-orthonormal frame."""
    if frame.shape[1] == 0:
        return np.zeros((frame.shape[0], frame.shape[0]))
    return frame @ frame.T @ g


def max_principal_angle(u: np.ndarray, w: np.ndarray, g: np.ndarray) -> float:
    """Largest principal angle (radians) between equal-dimension subspaces.

    Computed through the sine (the residual of one basis against the other's
    projector), which stays accurate near zero where the cosine saturates.
    """
    if u.shape[1] != w.shape[1]:
        return float(np.pi / 2)
    if u.shape[1] == 0:
        return 0.0
    uu = g_orthonormalize(u, g)
    ww = g_orthonormalize(w, g)
    resid = uu - ww @ (ww.T @ g @ uu)
    sin2 = np.linalg.eigvalsh(resid.T @ g @ resid).max()
    return float(np.arcsin(np.sqrt(np.clip(sin2, 0.0, 1.0))))
