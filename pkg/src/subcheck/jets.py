"""First/second-order jets of matrix- and vector-valued fields on a chart.

A field jet stores the value together with its coordinate derivatives:
``m1[k] = d_k M`` and ``m2[k, l] = d_k d_l M``.  Products, inverses and
applications propagate these exactly, so covariant derivatives of projector
and operator fields inherit machine accuracy from the scalar jets feeding
them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MatJet",
    "VecJet",
    "mat_const",
    "vec_const",
    "mat_add",
    "mat_sub",
    "mat_mul",
    "mat_t",
    "mat_inv",
    "mat_apply",
    "vec_add",
    "vec_sub",
    "vec_scale",
    "poly_vecjet",
    "christoffel_jet",
    "riemann_from_christoffel",
]


@dataclass
class MatJet:
    m0: np.ndarray
    m1: np.ndarray | None = None
    m2: np.ndarray | None = None

    @property
    def order(self) -> int:
        if self.m2 is not None:
            return 2
        if self.m1 is not None:
            return 1
        return 0


@dataclass
class VecJet:
    v0: np.ndarray
    v1: np.ndarray | None = None
    v2: np.ndarray | None = None

    @property
    def order(self) -> int:
        if self.v2 is not None:
            return 2
        if self.v1 is not None:
            return 1
        return 0


def mat_const(m: np.ndarray, n: int, order: int = 2) -> MatJet:
    r, c = m.shape
    return MatJet(
        np.asarray(m, dtype=float),
        np.zeros((n, r, c)) if order >= 1 else None,
        np.zeros((n, n, r, c)) if order >= 2 else None,
    )


def vec_const(v: np.ndarray, n: int, order: int = 2) -> VecJet:
    d = len(v)
    return VecJet(
        np.asarray(v, dtype=float),
        np.zeros((n, d)) if order >= 1 else None,
        np.zeros((n, n, d)) if order >= 2 else None,
    )


def _order(*jets) -> int:
    return min(j.order for j in jets)


def mat_add(a: MatJet, b: MatJet) -> MatJet:
    k = _order(a, b)
    return MatJet(
        a.m0 + b.m0,
        a.m1 + b.m1 if k >= 1 else None,
        a.m2 + b.m2 if k >= 2 else None,
    )


def mat_sub(a: MatJet, b: MatJet) -> MatJet:
    k = _order(a, b)
    return MatJet(
        a.m0 - b.m0,
        a.m1 - b.m1 if k >= 1 else None,
        a.m2 - b.m2 if k >= 2 else None,
    )


def mat_t(a: MatJet) -> MatJet:
    return MatJet(
        a.m0.T,
        np.swapaxes(a.m1, 1, 2) if a.m1 is not None else None,
        np.swapaxes(a.m2, 2, 3) if a.m2 is not None else None,
    )


def mat_mul(a: MatJet, b: MatJet) -> MatJet:
    k = _order(a, b)
    c0 = a.m0 @ b.m0
    c1 = c2 = None
    if k >= 1:
        c1 = np.einsum("kij,jm->kim", a.m1, b.m0) + np.einsum("ij,kjm->kim", a.m0, b.m1)
    if k >= 2:
        c2 = (
            np.einsum("klij,jm->klim", a.m2, b.m0)
            + np.einsum("kij,ljm->klim", a.m1, b.m1)
            + np.einsum("lij,kjm->klim", a.m1, b.m1)
            + np.einsum("ij,kljm->klim", a.m0, b.m2)
        )
    return MatJet(c0, c1, c2)


def mat_inv(a: MatJet) -> MatJet:
    b0 = np.linalg.inv(a.m0)
    b1 = b2 = None
    if a.order >= 1:
        c = np.einsum("ij,kjl,lm->kim", b0, a.m1, b0)  # b0 a1[k] b0
        b1 = -c
        if a.order >= 2:
            t1 = np.einsum("ij,kljm,mn->klin", b0, a.m2, b0)
            t2 = np.einsum("kij,ljm,mn->klin", c, a.m1, b0)
            b2 = -t1 + t2 + np.swapaxes(t2, 0, 1)
    return MatJet(b0, b1, b2)


def mat_apply(a: MatJet, v: VecJet) -> VecJet:
    k = _order(a, v)
    w0 = a.m0 @ v.v0
    w1 = w2 = None
    if k >= 1:
        w1 = np.einsum("kij,j->ki", a.m1, v.v0) + np.einsum("ij,kj->ki", a.m0, v.v1)
    if k >= 2:
        w2 = (
            np.einsum("klij,j->kli", a.m2, v.v0)
            + np.einsum("kij,lj->kli", a.m1, v.v1)
            + np.einsum("lij,kj->kli", a.m1, v.v1)
            + np.einsum("ij,klj->kli", a.m0, v.v2)
        )
    return VecJet(w0, w1, w2)


def vec_add(a: VecJet, b: VecJet) -> VecJet:
    k = _order(a, b)
    return VecJet(
        a.v0 + b.v0,
        a.v1 + b.v1 if k >= 1 else None,
        a.v2 + b.v2 if k >= 2 else None,
    )


def vec_sub(a: VecJet, b: VecJet) -> VecJet:
    k = _order(a, b)
    return VecJet(
        a.v0 - b.v0,
        a.v1 - b.v1 if k >= 1 else None,
        a.v2 - b.v2 if k >= 2 else None,
    )


def vec_scale(s: float, a: VecJet) -> VecJet:
    return VecJet(
        s * a.v0,
        s * a.v1 if a.v1 is not None else None,
        s * a.v2 if a.v2 is not None else None,
    )


def poly_vecjet(const: np.ndarray, lin: np.ndarray, quad: np.ndarray, p: np.ndarray, order: int = 2) -> VecJet:
    """Jet of the polynomial field c(q) = const + lin q + q.quad.q at ``p``.

    ``quad[j, k, l]`` must be symmetric in (k, l); components are
    c_j(q) = const_j + sum_k lin[j, k] q_k + sum_kl quad[j, k, l] q_k q_l.
    """
    v0 = const + lin @ p + np.einsum("jkl,k,l->j", quad, p, p)
    v1 = lin.T + 2.0 * np.einsum("jkl,l->kj", quad, p) if order >= 1 else None
    v2 = 2.0 * np.einsum("jkl->klj", quad) if order >= 2 else None
    return VecJet(v0, v1, v2)


def christoffel_jet(g: MatJet) -> tuple[np.ndarray, np.ndarray | None]:
    """Christoffel symbols (and their first derivatives when available).

    Returns ``(G0, G1)`` with ``G0[k, i, j]`` the symbol with upper index k and
    ``G1[m, k, i, j] = d_m G0[k, i, j]``; ``G1`` is None when ``g`` carries no
    second derivatives.
    """
    gi = np.linalg.inv(g.m0)
    if g.m1 is None:
        raise ValueError("metric jet must carry first derivatives")
    # Koszul combination T[l, i, j] = d_i g_jl + d_j g_il - d_l g_ij.
    t = (
        np.einsum("ijl->lij", g.m1)
        + np.einsum("jil->lij", g.m1)
        - g.m1
    )
    g0 = 0.5 * np.einsum("kl,lij->kij", gi, t)
    g1 = None
    if g.m2 is not None:
        gi1 = -np.einsum("ij,mjl,lk->mik", gi, g.m1, gi)
        t1 = (
            np.einsum("mijl->mlij", g.m2)
            + np.einsum("mjil->mlij", g.m2)
            - g.m2
        )
        g1 = 0.5 * (
            np.einsum("mkl,lij->mkij", gi1, t)
            + np.einsum("kl,mlij->mkij", gi, t1)
        )
    return g0, g1


def riemann_from_christoffel(g0: np.ndarray, g1: np.ndarray) -> np.ndarray:
    """Curvature tensor R[l, k, i, j] so that R(e_i, e_j) e_k = R[l, k, i, j] e_l."""
    return (
        np.einsum("iljk->lkij", g1)
        - np.einsum("jlik->lkij", g1)
        + np.einsum("lim,mjk->lkij", g0, g0)
        - np.einsum("ljm,mik->lkij", g0, g0)
    )
