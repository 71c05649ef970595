"""Metric fields, almost complex structures, connection and curvature.

Everything lives on a single global coordinate chart.  Metrics are Euclidean,
direct products, or warped products ``g = g_1 (+) f^2 g_2`` with a positive
warp function on the first factor; all derivatives of metric entries come from
the scalar jets of the defining expressions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import exprs
from .exprs import Expr
from .jets import (
    MatJet,
    VecJet,
    christoffel_jet,
    riemann_from_christoffel,
)

__all__ = [
    "GeometryError",
    "MetricField",
    "ComplexStructureField",
    "ExprVectorField",
    "standard_J",
    "product_J",
    "christoffel",
    "covariant_derivative",
    "lie_bracket",
    "riemann_tensor",
    "sectional_curvature",
    "nabla_J_residual",
]

MAX_METRIC_CONDITION = 1e12


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class MetricField:
    """Positive-definite metric on a chart of the given dimension."""

    dim: int
    kind: str  # euclidean | product | warped_product
    split: tuple[int, int] | None = None
    warp: Expr | None = None
    params: Mapping[str, float] = field(default_factory=dict)

    @classmethod
    def euclidean(cls, dim: int) -> "MetricField":
        return cls(dim, "euclidean")

    @classmethod
    def product(cls, dim1: int, dim2: int) -> "MetricField":
        return cls(dim1 + dim2, "product", (dim1, dim2))

    @classmethod
    def warped_product(
        cls,
        dim1: int,
        dim2: int,
        warp: Expr,
        params: Mapping[str, float] | None = None,
    ) -> "MetricField":
        used = exprs.variables_used(warp)
        if any(i > dim1 for i in used):
            raise GeometryError(
                "warp function may depend only on first-factor coordinates "
                f"x1..x{dim1}, got x{max(used)}"
            )
        return cls(dim1 + dim2, "warped_product", (dim1, dim2), warp, dict(params or {}))

    def _warp_value(self, p: Sequence[float]) -> float:
        f = exprs.eval_value(self.warp, p, self.params)
        if f <= 0.0:
            raise GeometryError(f"warp function must stay positive, got {f} at {list(p)}")
        return f

    def matrix(self, p: Sequence[float]) -> np.ndarray:
        g = np.eye(self.dim)
        if self.kind == "warped_product":
            n1, _ = self.split
            g[n1:, n1:] *= self._warp_value(p) ** 2
        return g

    def jet(self, p: Sequence[float], order: int = 2) -> MatJet:
        n = self.dim
        g0 = np.eye(n)
        g1 = np.zeros((n, n, n)) if order >= 1 else None
        g2 = np.zeros((n, n, n, n)) if order >= 2 else None
        if self.kind == "warped_product":
            n1, _ = self.split
            fj = exprs.eval_jet(self.warp, p, self.params, order=max(order, 1))
            if fj.val <= 0.0:
                raise GeometryError(f"warp function must stay positive, got {fj.val}")
            w0 = fj.val**2
            w1 = 2.0 * fj.val * fj.grad
            for a in range(n1, n):
                g0[a, a] = w0
                if g1 is not None:
                    g1[:, a, a] = w1
                if g2 is not None:
                    g2[:, :, a, a] = 2.0 * (np.outer(fj.grad, fj.grad) + fj.val * fj.hess)
        return MatJet(g0, g1, g2)

    def inverse(self, p: Sequence[float]) -> np.ndarray:
        g = self.matrix(p)
        if np.linalg.cond(g) > MAX_METRIC_CONDITION:
            raise GeometryError(f"metric not invertible at {list(p)}")
        return np.linalg.inv(g)


@dataclass(frozen=True)
class ComplexStructureField:
    """Orthogonal almost complex structure J with J^2 = -id (constant matrix)."""

    dim: int
    mat: np.ndarray

    def matrix(self, p: Sequence[float] | None = None) -> np.ndarray:
        return self.mat

    def jet(self, p: Sequence[float], order: int = 2) -> MatJet:
        from .jets import mat_const

        return mat_const(self.mat, self.dim, order)


def standard_J(dim: int) -> ComplexStructureField:
    """Block structure pairing coordinates (x1, x2), (x3, x4), ...:
    J e_{2i-1} = e_{2i} and J e_{2i} = -e_{2i-1}."""
    if dim % 2 != 0:
        raise GeometryError(f"almost complex structure needs even dimension, got {dim}")
    j = np.zeros((dim, dim))
    for i in range(0, dim, 2):
        j[i + 1, i] = 1.0
        j[i, i + 1] = -1.0
    return ComplexStructureField(dim, j)


def product_J(j1: ComplexStructureField, j2: ComplexStructureField) -> ComplexStructureField:
    """Block-diagonal structure acting factor-wise on a (warped) product."""
    dim = j1.dim + j2.dim
    j = np.zeros((dim, dim))
    j[: j1.dim, : j1.dim] = j1.mat
    j[j1.dim :, j1.dim :] = j2.mat
    return ComplexStructureField(dim, j)


@dataclass(frozen=True)
class ExprVectorField:
    """Vector field whose components are closed-form expressions."""

    dim: int
    components: tuple[Expr, ...]
    params: Mapping[str, float] = field(default_factory=dict)

    @classmethod
    def from_strings(
        cls, dim: int, components: Sequence[str], params: Mapping[str, float] | None = None
    ) -> "ExprVectorField":
        parsed = tuple(exprs.parse(c, dim, tuple((params or {}).keys())) for c in components)
        return cls(dim, parsed, dict(params or {}))

    def value(self, p: Sequence[float]) -> np.ndarray:
        return np.array([exprs.eval_value(c, p, self.params) for c in self.components])

    def jet(self, p: Sequence[float], order: int = 2) -> VecJet:
        jets = [exprs.eval_jet(c, p, self.params, order=order) for c in self.components]
        v0 = np.array([j.val for j in jets])
        v1 = np.stack([j.grad for j in jets], axis=-1) if order >= 1 else None
        v2 = np.stack([j.hess for j in jets], axis=-1) if order >= 2 else None
        return VecJet(v0, v1, v2)


def christoffel(metric: MetricField, p: Sequence[float]) -> np.ndarray:
    """Symbols C[k, i, j] of the Levi-Civita connection at p (upper index first)."""
    if np.linalg.cond(metric.matrix(p)) > MAX_METRIC_CONDITION:
        raise GeometryError(f"metric not invertible at {list(p)}")
    g0, _ = christoffel_jet(metric.jet(p, order=1))
    return g0


def covariant_derivative(
    metric: MetricField, x, y, p: Sequence[float]
) -> np.ndarray:
    """(nabla_X Y)^k = X^i d_i Y^k + C^k_ij X^i Y^j at p."""
    gamma = christoffel(metric, p)
    xv = x.value(p)
    yj = y.jet(p, order=1)
    return yj.v1.T @ xv + np.einsum("kij,i,j->k", gamma, xv, yj.v0)


def lie_bracket(x, y, p: Sequence[float]) -> np.ndarray:
    """[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k at p (metric independent)."""
    xj = x.jet(p, order=1)
    yj = y.jet(p, order=1)
    return yj.v1.T @ xj.v0 - xj.v1.T @ yj.v0


def riemann_tensor(metric: MetricField, p: Sequence[float]) -> np.ndarray:
    """R[l, k, i, j] with R(e_i, e_j) e_k = R[l, k, i, j] e_l."""
    g0, g1 = christoffel_jet(metric.jet(p, order=2))
    return riemann_from_christoffel(g0, g1)


def sectional_curvature(
    metric: MetricField, p: Sequence[float], x: np.ndarray, y: np.ndarray
) -> float:
    """K(X, Y) = g(R(X, Y) Y, X) / (|X|^2 |Y|^2 - g(X, Y)^2)."""
    g = metric.matrix(p)
    denom = (x @ g @ x) * (y @ g @ y) - (x @ g @ y) ** 2
    if denom < 1e-12 * (x @ g @ x) * (y @ g @ y):
        raise GeometryError("degenerate plane: X and Y are (numerically) parallel")
    r = riemann_tensor(metric, p)
    rxyy = np.einsum("lkij,i,j,k->l", r, x, y, y)
    return float((rxyy @ g @ x) / denom)


def nabla_J_residual(
    metric: MetricField, jfield: ComplexStructureField, p: Sequence[float]
) -> float:
    """Max component of nabla J at p; zero iff the structure is parallel there."""
    gamma = christoffel(metric, p)
    j = jfield.matrix(p)
    # (nabla_i J)^k_j for constant J: C^k_il J^l_j - C^l_ij J^k_l.
    nj = np.einsum("kil,lj->ikj", gamma, j) - np.einsum("lij,kl->ikj", gamma, j)
    return float(np.abs(nj).max())
