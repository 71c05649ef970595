"""Pointwise structure analysis of a smooth submersion between charts.

Given a map F with an almost Hermitian source, this module computes the
vertical/horizontal splitting of the source tangent space, the operators
obtained by splitting J against that decomposition, the invariant/slant
decomposition of the kernel with its angle spectrum, and a structural verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import exprs
from .exprs import Expr
from .geometry import (
    ComplexStructureField,
    MetricField,
    standard_J,
)
from .jets import MatJet
from .linalg import (
    frame_projector,
    g_complement,
    g_orthonormalize,
    g_span,
    nullspace,
)

__all__ = [
    "SubmersionError",
    "InternalConsistencyError",
    "Tolerances",
    "SubmersionMap",
    "Frame",
    "SemiSlantAnalysis",
    "MapAnalysis",
    "VERDICTS",
    "analyze",
    "analyze_map",
    "riemannian_submersion_residual",
    "vertical_space",
    "phi_omega",
    "b_c",
    "even_dimension_check",
    "linear_submersion",
    "random_linear_submersion",
]

VERDICTS = (
    "invariant",
    "anti-invariant",
    "slant",
    "semi-invariant",
    "semi-slant",
    "generic",
)


class SubmersionError(ValueError):
    pass


class InternalConsistencyError(RuntimeError):
    """The pipeline produced something mathematically impossible."""


@dataclass(frozen=True)
class Tolerances:
    rank_rtol: float = 1e-9  # singular values below rank_rtol * s_max are zero
    cluster: float = 1e-7  # eigenvalue clustering width / distance to 1
    submersion: float = 1e-8  # horizontal length-preservation gate
    boundary_band: float = 1e-4  # annotate eigenvalues this close to a threshold

    @property
    def right_angle(self) -> float:
        # cos(theta) below this counts as a right angle.
        return float(np.sqrt(self.cluster))


@dataclass(frozen=True)
class SubmersionMap:
    """Map between coordinate charts with an almost Hermitian source."""

    source_dim: int
    target_dim: int
    components: tuple[Expr, ...]
    metric: MetricField
    jfield: ComplexStructureField
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.components) != self.target_dim:
            raise SubmersionError(
                f"expected {self.target_dim} components, got {len(self.components)}"
            )
        if self.source_dim % 2 != 0:
            raise SubmersionError("source dimension must be even")
        if self.metric.dim != self.source_dim or self.jfield.dim != self.source_dim:
            raise SubmersionError("metric / complex structure dimension mismatch")
        if self.target_dim >= self.source_dim:
            raise SubmersionError("target dimension must be smaller than source")

    @classmethod
    def from_strings(
        cls,
        source_dim: int,
        target_dim: int,
        components: Sequence[str],
        metric: MetricField | None = None,
        jfield: ComplexStructureField | None = None,
        params: Mapping[str, float] | None = None,
    ) -> "SubmersionMap":
        params = dict(params or {})
        parsed = tuple(exprs.parse(c, source_dim, tuple(params.keys())) for c in components)
        return cls(
            source_dim,
            target_dim,
            parsed,
            metric or MetricField.euclidean(source_dim),
            jfield or standard_J(source_dim),
            params,
        )

    def value(self, p: Sequence[float]) -> np.ndarray:
        return np.array([exprs.eval_value(c, p, self.params) for c in self.components])

    def differential(self, p: Sequence[float]) -> np.ndarray:
        """Jacobian at p: row i is the gradient of component i."""
        rows = [exprs.eval_jet(c, p, self.params, order=1).grad for c in self.components]
        return np.stack(rows)

    def jets(self, p: Sequence[float], order: int = 2) -> tuple[np.ndarray, MatJet]:
        """Map value and the jet of the differential (orders 0..2)."""
        js = [exprs.eval_jet(c, p, self.params, order=order + 1) for c in self.components]
        f0 = np.array([j.val for j in js])
        a0 = np.stack([j.grad for j in js])
        a1 = np.stack([j.hess for j in js], axis=1) if order >= 1 else None
        a2 = np.stack([j.third for j in js], axis=2) if order >= 2 else None
        return f0, MatJet(a0, a1, a2)


@dataclass(frozen=True)
class Frame:
    """Columns spanning a subspace at a base point."""

    point: np.ndarray
    vectors: np.ndarray  # shape (ambient_dim, subspace_dim)
    orthonormal: bool = True

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def gram_residual(self, g: np.ndarray) -> float:
        if self.dim == 0:
            return 0.0
        gram = self.vectors.T @ g @ self.vectors
        return float(np.abs(gram - np.eye(self.dim)).max())


@dataclass(frozen=True)
class SemiSlantAnalysis:
    """Splitting data of one map at one point."""

    point: np.ndarray
    metric: np.ndarray
    jmat: np.ndarray
    kernel: Frame
    horizontal: Frame
    d1: Frame
    d2: Frame
    omega_d2: Frame
    mu: Frame
    phi: np.ndarray  # kernel-frame matrix of the vertical part of J
    omega: np.ndarray  # horizontal-frame rows: horizontal part of J on the kernel
    bmat: np.ndarray  # kernel-frame rows: vertical part of J on horizontals
    cmat: np.ndarray  # horizontal-frame matrix of the horizontal part of J
    spectrum: np.ndarray  # eigenvalues of -phi^2 restricted to d2 (cos^2 values)
    clusters: tuple[float, ...]
    verdict: str
    theta: float | None
    cos_theta: float | None
    boundary: bool
    submersion_residual: float

    # ---- ambient operator application -------------------------------------

    def vertical_projector(self) -> np.ndarray:
        return frame_projector(self.kernel.vectors, self.metric)

    def horizontal_projector(self) -> np.ndarray:
        return frame_projector(self.horizontal.vectors, self.metric)

    def phi_of(self, x: np.ndarray) -> np.ndarray:
        """Vertical part of J X for vertical X (ambient coordinates)."""
        pv = self.vertical_projector()
        return pv @ (self.jmat @ (pv @ x))

    def omega_of(self, x: np.ndarray) -> np.ndarray:
        pv = self.vertical_projector()
        return self.horizontal_projector() @ (self.jmat @ (pv @ x))

    def b_of(self, z: np.ndarray) -> np.ndarray:
        ph = self.horizontal_projector()
        return self.vertical_projector() @ (self.jmat @ (ph @ z))

    def c_of(self, z: np.ndarray) -> np.ndarray:
        ph = self.horizontal_projector()
        return ph @ (self.jmat @ (ph @ z))

    @property
    def dims(self) -> tuple[int, int]:
        return self.d1.dim, self.d2.dim


def riemannian_submersion_residual(f: SubmersionMap, p: Sequence[float]) -> float:
    """Worst deviation of pushed-forward horizontal frames from orthonormality."""
    a = f.differential(p)
    g = f.metric.matrix(p)
    horizontal = _horizontal_frame(a, g, Tolerances().rank_rtol)
    pushed = a @ horizontal
    gram = pushed.T @ pushed  # target metric is Euclidean
    return float(np.abs(gram - np.eye(horizontal.shape[1])).max())


def vertical_space(f: SubmersionMap, p: Sequence[float], tol: Tolerances = Tolerances()) -> Frame:
    """Orthonormal basis of the kernel of the differential at p."""
    return analyze(f, p, tol).kernel


def phi_omega(
    f: SubmersionMap, p: Sequence[float], tol: Tolerances = Tolerances()
) -> tuple[np.ndarray, np.ndarray]:
    """Frame matrices of the vertical and horizontal parts of J on the kernel."""
    a = analyze(f, p, tol)
    return a.phi, a.omega


def b_c(
    f: SubmersionMap, p: Sequence[float], tol: Tolerances = Tolerances()
) -> tuple[np.ndarray, np.ndarray]:
    """Frame matrices of the vertical and horizontal parts of J on horizontals."""
    a = analyze(f, p, tol)
    return a.bmat, a.cmat


def _vertical_frame(a: np.ndarray, g: np.ndarray, expected_dim: int, rtol: float) -> np.ndarray:
    null = nullspace(a, rtol)
    if null.shape[1] != expected_dim:
        raise SubmersionError(
            f"not a submersion: kernel dimension {null.shape[1]} != {expected_dim}"
        )
    return g_orthonormalize(null, g)


def _horizontal_frame(a: np.ndarray, g: np.ndarray, rtol: float) -> np.ndarray:
    raw = np.linalg.solve(g, a.T)  # raised rows of the differential
    return g_span(raw, g, rtol)


def analyze(f: SubmersionMap, p: Sequence[float], tol: Tolerances = Tolerances()) -> SemiSlantAnalysis:
    """Full splitting analysis of ``f`` at one point."""
    p = np.asarray(p, dtype=float)
    a = f.differential(p)
    g = f.metric.matrix(p)
    j = f.jfield.matrix(p)
    kdim = f.source_dim - f.target_dim

    vframe = _vertical_frame(a, g, kdim, tol.rank_rtol)
    hframe = _horizontal_frame(a, g, tol.rank_rtol)
    if hframe.shape[1] != f.target_dim:
        raise SubmersionError(
            f"not a submersion: horizontal dimension {hframe.shape[1]} != {f.target_dim}"
        )

    pushed = a @ hframe
    residual = float(np.abs(pushed.T @ pushed - np.eye(f.target_dim)).max())

    phi = vframe.T @ (g @ (j @ vframe))
    omega = hframe.T @ (g @ (j @ vframe))
    bmat = vframe.T @ (g @ (j @ hframe))
    cmat = hframe.T @ (g @ (j @ hframe))

    m = -phi @ phi
    m = 0.5 * (m + m.T)
    lam, u = np.linalg.eigh(m) if kdim else (np.zeros(0), np.zeros((0, 0)))
    if lam.size and (lam.min() < -10 * tol.cluster or lam.max() > 1.0 + 10 * tol.cluster):
        raise InternalConsistencyError(
            f"-phi^2 spectrum escapes [0, 1]: {lam.tolist()} (broken splitting)"
        )

    one_mask = np.abs(lam - 1.0) < tol.cluster
    d1_cols = vframe @ u[:, one_mask]
    d2_cols = vframe @ u[:, ~one_mask]
    d2_lam = lam[~one_mask]

    clusters = _cluster_means(np.sort(d2_lam), tol.cluster)
    boundary = bool(
        (d2_lam.size and (1.0 - d2_lam.max()) < tol.boundary_band)
        or (lam[one_mask].size and np.abs(lam[one_mask] - 1.0).max() > 1e-12)
    )

    theta = cos_theta = None
    if d2_lam.size == 0:
        verdict = "invariant"
    elif len(clusters) > 1:
        verdict = "generic"
    else:
        cos_theta = float(np.sqrt(np.clip(clusters[0], 0.0, 1.0)))
        right_angle = cos_theta < tol.right_angle
        if right_angle:
            # below the detection threshold the angle IS a right angle; the
            # raw eigenvalues stay available in the spectrum
            cos_theta = 0.0
            theta = float(np.pi / 2)
        else:
            theta = float(np.arccos(cos_theta))
        if d1_cols.shape[1] == 0:
            verdict = "anti-invariant" if right_angle else "slant"
        else:
            verdict = "semi-invariant" if right_angle else "semi-slant"

    omega_d2_cols = g_span(
        frame_projector(hframe, g) @ (j @ d2_cols), g, tol.rank_rtol
    )
    mu_cols = g_complement(omega_d2_cols, hframe, g, tol.rank_rtol)

    return SemiSlantAnalysis(
        point=p,
        metric=g,
        jmat=j,
        kernel=Frame(p, vframe),
        horizontal=Frame(p, hframe),
        d1=Frame(p, g_orthonormalize(d1_cols, g) if d1_cols.shape[1] else d1_cols),
        d2=Frame(p, g_orthonormalize(d2_cols, g) if d2_cols.shape[1] else d2_cols),
        omega_d2=Frame(p, omega_d2_cols),
        mu=Frame(p, mu_cols),
        phi=phi,
        omega=omega,
        bmat=bmat,
        cmat=cmat,
        spectrum=np.sort(d2_lam),
        clusters=tuple(clusters),
        verdict=verdict,
        theta=theta,
        cos_theta=cos_theta,
        boundary=boundary,
        submersion_residual=residual,
    )


def _cluster_means(sorted_vals: np.ndarray, width: float) -> list[float]:
    if sorted_vals.size == 0:
        return []
    groups: list[list[float]] = [[float(sorted_vals[0])]]
    for v in sorted_vals[1:]:
        if float(v) - groups[-1][-1] <= width:
            groups[-1].append(float(v))
        else:
            groups.append([float(v)])
    return [float(np.mean(gr)) for gr in groups]


@dataclass(frozen=True)
class MapAnalysis:
    """Analyses across sample points plus cross-point consistency data."""

    analyses: tuple[SemiSlantAnalysis, ...]
    verdict: str
    theta: float | None
    theta_deviation: float
    direct_angle_spread: float
    dims: tuple[int, int]
    max_submersion_residual: float
    boundary: bool

    @property
    def representative(self) -> SemiSlantAnalysis:
        return self.analyses[0]


def analyze_map(
    f: SubmersionMap,
    points: Sequence[Sequence[float]],
    tol: Tolerances = Tolerances(),
    rng: np.random.Generator | None = None,
    directions: int = 20,
    strict: bool = True,
) -> MapAnalysis:
    """Analyze at every point; verify the verdict and angle are constant.

    The direct angle of random unit vectors in the slant part (|phi X| over
    |J X|) is cross-checked against the spectral angle at every point.
    """
    if len(points) == 0:
        raise ValueError("need at least one sample point")
    analyses = tuple(analyze(f, p, tol) for p in points)
    verdicts = {a.verdict for a in analyses}
    if len(verdicts) > 1:
        raise SubmersionError(f"not globally semi-slant: verdicts vary {sorted(verdicts)}")
    dims = {a.dims for a in analyses}
    if len(dims) > 1:
        raise SubmersionError(f"not globally semi-slant: splitting dimensions vary {sorted(dims)}")
    residual = max(a.submersion_residual for a in analyses)
    if strict and residual > tol.submersion:
        raise SubmersionError(
            f"not a Riemannian submersion: horizontal length residual {residual:.3e}"
        )

    thetas = [a.theta for a in analyses if a.theta is not None]
    theta = float(np.mean(thetas)) if thetas else None
    theta_dev = float(max(abs(t - theta) for t in thetas)) if thetas else 0.0

    spread = 0.0
    if rng is None:
        rng = np.random.default_rng(0)
    if theta is not None:
        for a in analyses:
            if a.d2.dim == 0:
                continue
            coeff = rng.standard_normal((a.d2.dim, directions))
            xs = a.d2.vectors @ coeff
            norms = np.sqrt(np.einsum("ik,ij,jk->k", xs, a.metric, xs))
            xs = xs / norms
            for k in range(xs.shape[1]):
                px = a.phi_of(xs[:, k])
                cos_direct = float(np.sqrt(px @ a.metric @ px))
                spread = max(spread, abs(cos_direct - (a.cos_theta or 0.0)))

    return MapAnalysis(
        analyses=analyses,
        verdict=analyses[0].verdict,
        theta=theta,
        theta_deviation=theta_dev,
        direct_angle_spread=spread,
        dims=analyses[0].dims,
        max_submersion_residual=residual,
        boundary=any(a.boundary for a in analyses),
    )


def even_dimension_check(f: SubmersionMap, analysis: SemiSlantAnalysis | MapAnalysis) -> bool:
    """True unless a single-angle splitting with angle < pi/2 hits an odd
    target or kernel dimension (which would be structurally impossible)."""
    verdict = analysis.verdict
    theta = analysis.theta
    applicable = verdict in ("invariant", "slant", "semi-slant") and (
        theta is None or theta < np.pi / 2 - 1e-9
    )
    if not applicable:
        return True
    kdim = f.source_dim - f.target_dim
    return f.target_dim % 2 == 0 and kdim % 2 == 0


# ---- synthetic linear maps -------------------------------------------------


def _linear_expr(coeffs: np.ndarray) -> Expr:
    from .exprs import Bin, Num, Var

    terms = [
        Bin("*", Num(float(c), 0), Var(i + 1, 0), 0)
        for i, c in enumerate(coeffs)
        if abs(c) > 0.0
    ]
    if not terms:
        return Num(0.0, 0)
    node = terms[0]
    for t in terms[1:]:
        node = Bin("+", node, t, 0)
    return node


def linear_submersion(matrix: np.ndarray) -> SubmersionMap:
    """Map x -> A x on a Euclidean source with the standard block J."""
    matrix = np.asarray(matrix, dtype=float)
    n, m = matrix.shape
    return SubmersionMap(
        source_dim=m,
        target_dim=n,
        components=tuple(_linear_expr(row) for row in matrix),
        metric=MetricField.euclidean(m),
        jfield=standard_J(m),
    )


def random_linear_submersion(
    rng: np.random.Generator, source_dim: int, target_dim: int
) -> SubmersionMap:
    """Random linear map with orthonormal rows (hence length-preserving
    horizontally)."""
    a = rng.standard_normal((source_dim, target_dim))
    q, _ = np.linalg.qr(a)
    return linear_submersion(q.T)
