"""Fundamental tensors of a submersion and derived operators at a point.

A ``PointContext`` caches the jets of everything that varies smoothly with the
base point: the differential, the metric, the Christoffel symbols, the
vertical/horizontal projectors and the operator fields obtained by splitting
the almost complex structure.  All covariant derivatives of projected fields
then reduce to exact jet arithmetic; no finite differencing occurs anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .jets import (
    MatJet,
    VecJet,
    christoffel_jet,
    mat_add,
    mat_apply,
    mat_const,
    mat_inv,
    mat_mul,
    mat_sub,
    mat_t,
    poly_vecjet,
    vec_const,
)
from .submersion import (
    SemiSlantAnalysis,
    SubmersionMap,
    Tolerances,
    analyze,
)

__all__ = [
    "PointContext",
    "build_context",
    "cov_value",
    "cov_jet",
    "tensor_T",
    "tensor_A",
    "tensor_T_jet",
    "hat_nabla",
    "horiz_nabla",
    "nabla_phi",
    "nabla_omega",
    "nabla_T",
    "second_fundamental_form",
    "mean_curvature",
    "umbilical_residual",
    "harmonic_traces",
    "endomorphism_Fhat_sides",
    "fiber_sectional_curvature",
    "PolyField",
    "random_poly_field",
    "eval_poly_field",
    "basic_field",
    "bracket_value",
]


@dataclass
class PointContext:
    """Jets and frames of one map at one sample point."""

    f: SubmersionMap
    point: np.ndarray
    analysis: SemiSlantAnalysis
    fval: np.ndarray
    gjet: MatJet
    ajet: MatJet  # jet of the differential, rows indexed by target component
    gamma0: np.ndarray
    gamma1: np.ndarray
    pv: MatJet
    ph: MatJet
    lift: MatJet  # horizontal lift of target vectors; dF . lift = id
    jop: MatJet
    phi_op: MatJet
    omega_op: MatJet
    b_op: MatJet
    c_op: MatJet
    p_op: MatJet | None  # projector field onto the invariant part of the kernel
    q_op: MatJet | None

    @property
    def dim(self) -> int:
        return self.f.source_dim

    def g_norm(self, v: np.ndarray) -> float:
        return float(np.sqrt(max(v @ self.analysis.metric @ v, 0.0)))

    def const_field(self, v: np.ndarray) -> VecJet:
        return vec_const(np.asarray(v, dtype=float), self.dim, order=2)

    def vertical_ext(self, v: np.ndarray) -> VecJet:
        """Field q -> P_V(q) v (equals v at the base point for vertical v)."""
        return mat_apply(self.pv, self.const_field(v))

    def horizontal_ext(self, v: np.ndarray) -> VecJet:
        return mat_apply(self.ph, self.const_field(v))


def build_context(
    f: SubmersionMap,
    p,
    tol: Tolerances = Tolerances(),
    analysis: SemiSlantAnalysis | None = None,
) -> PointContext:
    p = np.asarray(p, dtype=float)
    if analysis is None:
        analysis = analyze(f, p, tol)
    n = f.source_dim

    gjet = f.metric.jet(p, order=2)
    fval, ajet = f.jets(p, order=2)
    gamma0, gamma1 = christoffel_jet(gjet)

    gi = mat_inv(gjet)
    at = mat_t(ajet)
    m = mat_mul(ajet, mat_mul(gi, at))
    mi = mat_inv(m)
    lift = mat_mul(gi, mat_mul(at, mi))
    ph = mat_mul(lift, ajet)
    pv = mat_sub(mat_const(np.eye(n), n, order=2), ph)

    jop = f.jfield.jet(p, order=2)
    phi_op = mat_mul(pv, mat_mul(jop, pv))
    omega_op = mat_mul(ph, mat_mul(jop, pv))
    b_op = mat_mul(pv, mat_mul(jop, ph))
    c_op = mat_mul(ph, mat_mul(jop, ph))

    p_op = q_op = None
    if analysis.verdict == "invariant":
        p_op = pv
        q_op = mat_sub(pv, pv)  # zero field
    elif analysis.cos_theta is not None:
        # On a constant-angle splitting, -phi^2 = P + cos^2(theta) Q, so the
        # projector onto the invariant part is a polynomial in the operators.
        cos2 = analysis.cos_theta**2
        sin2 = 1.0 - cos2
        if sin2 > 1e-14:
            phi2 = mat_mul(phi_op, phi_op)
            num = mat_sub(mat_sub(mat_const(np.zeros((n, n)), n, 2), phi2), _scale(cos2, pv))
            p_op = _scale(1.0 / sin2, num)
            q_op = mat_sub(pv, p_op)

    return PointContext(
        f=f,
        point=p,
        analysis=analysis,
        fval=fval,
        gjet=gjet,
        ajet=ajet,
        gamma0=gamma0,
        gamma1=gamma1,
        pv=pv,
        ph=ph,
        lift=lift,
        jop=jop,
        phi_op=phi_op,
        omega_op=omega_op,
        b_op=b_op,
        c_op=c_op,
        p_op=p_op,
        q_op=q_op,
    )


def _scale(s: float, a: MatJet) -> MatJet:
    return MatJet(
        s * a.m0,
        s * a.m1 if a.m1 is not None else None,
        s * a.m2 if a.m2 is not None else None,
    )


# ---- covariant derivatives -------------------------------------------------


def cov_value(ctx: PointContext, x: np.ndarray, y: VecJet) -> np.ndarray:
    """(nabla_X Y)(p) for a direction x and a field jet y."""
    return y.v1.T @ x + np.einsum("kij,i,j->k", ctx.gamma0, x, y.v0)


def cov_jet(ctx: PointContext, x: VecJet, y: VecJet) -> VecJet:
    """Order-1 jet of nabla_X Y from order-2 jets of the two fields."""
    z0 = y.v1.T @ x.v0 + np.einsum("kij,i,j->k", ctx.gamma0, x.v0, y.v0)
    z1 = (
        np.einsum("li,ik->lk", x.v1, y.v1)
        + np.einsum("i,lik->lk", x.v0, y.v2)
        + np.einsum("lkij,i,j->lk", ctx.gamma1, x.v0, y.v0)
        + np.einsum("kij,li,j->lk", ctx.gamma0, x.v1, y.v0)
        + np.einsum("kij,i,lj->lk", ctx.gamma0, x.v0, y.v1)
    )
    return VecJet(z0, z1, None)


def bracket_value(x: VecJet, y: VecJet) -> np.ndarray:
    """[X, Y](p) from field jets."""
    return y.v1.T @ x.v0 - x.v1.T @ y.v0


# ---- fundamental tensors ---------------------------------------------------


def tensor_T(ctx: PointContext, e: np.ndarray, fjet: VecJet) -> np.ndarray:
    """T_E F = H nabla_{VE} (VF) + V nabla_{VE} (HF) at the base point."""
    ve = ctx.pv.m0 @ np.asarray(e, dtype=float)
    vf = mat_apply(ctx.pv, fjet)
    hf = mat_apply(ctx.ph, fjet)
    return ctx.ph.m0 @ cov_value(ctx, ve, vf) + ctx.pv.m0 @ cov_value(ctx, ve, hf)


def tensor_A(ctx: PointContext, e: np.ndarray, fjet: VecJet) -> np.ndarray:
    """A_E F = H nabla_{HE} (VF) + V nabla_{HE} (HF) at the base point."""
    he = ctx.ph.m0 @ np.asarray(e, dtype=float)
    vf = mat_apply(ctx.pv, fjet)
    hf = mat_apply(ctx.ph, fjet)
    return ctx.ph.m0 @ cov_value(ctx, he, vf) + ctx.pv.m0 @ cov_value(ctx, he, hf)


def tensor_T_jet(ctx: PointContext, ejet: VecJet, fjet: VecJet) -> VecJet:
    """Order-1 jet of the field q -> T_{E(q)} F(q)."""
    vej = mat_apply(ctx.pv, ejet)
    vfj = mat_apply(ctx.pv, fjet)
    hfj = mat_apply(ctx.ph, fjet)
    term1 = mat_apply(ctx.ph, cov_jet(ctx, vej, vfj))
    term2 = mat_apply(ctx.pv, cov_jet(ctx, vej, hfj))
    return VecJet(term1.v0 + term2.v0, term1.v1 + term2.v1, None)


def hat_nabla(ctx: PointContext, x: np.ndarray, y: VecJet) -> np.ndarray:
    """Vertical part of nabla_X Y (the fiber connection for vertical data)."""
    return ctx.pv.m0 @ cov_value(ctx, np.asarray(x, dtype=float), y)


def horiz_nabla(ctx: PointContext, x: np.ndarray, y: VecJet) -> np.ndarray:
    return ctx.ph.m0 @ cov_value(ctx, np.asarray(x, dtype=float), y)


def nabla_phi(ctx: PointContext, x: np.ndarray, y: VecJet) -> np.ndarray:
    """(nabla_X phi) Y = hat_nabla_X (phi Y) - phi hat_nabla_X Y."""
    phi_y = mat_apply(ctx.phi_op, y)
    return hat_nabla(ctx, x, phi_y) - ctx.phi_op.m0 @ hat_nabla(ctx, x, y)


def nabla_omega(ctx: PointContext, x: np.ndarray, y: VecJet) -> np.ndarray:
    """(nabla_X omega) Y = H nabla_X (omega Y) - omega hat_nabla_X Y."""
    om_y = mat_apply(ctx.omega_op, y)
    return horiz_nabla(ctx, x, om_y) - ctx.omega_op.m0 @ hat_nabla(ctx, x, y)


def nabla_T(ctx: PointContext, e: np.ndarray, xjet: VecJet, yjet: VecJet) -> np.ndarray:
    """(nabla_E T)(X, Y) = nabla_E (T_X Y) - T_{nabla_E X} Y - T_X (nabla_E Y)."""
    e = np.asarray(e, dtype=float)
    t_field = tensor_T_jet(ctx, xjet, yjet)
    lead = cov_value(ctx, e, t_field)
    de_x = cov_value(ctx, e, xjet)
    de_y = cov_value(ctx, e, yjet)
    # Both slots of T are tensorial, so value-level replacements suffice.
    t1 = tensor_T(ctx, de_x, yjet)
    t2 = tensor_T(ctx, xjet.v0, ctx.const_field(de_y))
    return lead - t1 - t2


def second_fundamental_form(ctx: PointContext, x: np.ndarray, y: VecJet) -> np.ndarray:
    """(nabla F_*)(X, Y) over a flat target: D_X (dF Y) - dF (nabla_X Y)."""
    x = np.asarray(x, dtype=float)
    pushed = mat_apply(ctx.ajet, y)
    return pushed.v1.T @ x - ctx.ajet.m0 @ cov_value(ctx, x, y)


def mean_curvature(ctx: PointContext) -> np.ndarray:
    """Mean curvature vector of the fiber: average of T_e e over a vertical
    orthonormal frame."""
    frame = ctx.analysis.kernel.vectors
    if frame.shape[1] == 0:
        return np.zeros(ctx.dim)
    acc = np.zeros(ctx.dim)
    for i in range(frame.shape[1]):
        e = frame[:, i]
        acc += tensor_T(ctx, e, ctx.vertical_ext(e))
    return acc / frame.shape[1]


def umbilical_residual(ctx: PointContext, rng: np.random.Generator, draws: int = 10) -> float:
    """Worst |T_X Y - g(X, Y) H| over random vertical pairs."""
    frame = ctx.analysis.kernel.vectors
    if frame.shape[1] == 0:
        return 0.0
    h = mean_curvature(ctx)
    g = ctx.analysis.metric
    worst = 0.0
    for _ in range(draws):
        x = frame @ rng.standard_normal(frame.shape[1])
        y = frame @ rng.standard_normal(frame.shape[1])
        x /= ctx.g_norm(x)
        y /= ctx.g_norm(y)
        t = tensor_T(ctx, x, ctx.vertical_ext(y))
        worst = max(worst, ctx.g_norm(t - (x @ g @ y) * h))
    return worst


def harmonic_traces(ctx: PointContext) -> tuple[np.ndarray, np.ndarray]:
    """Full trace of (nabla F_*) and the partial sum over the slant part of
    the kernel (both in target coordinates)."""
    full = np.zeros(ctx.f.target_dim)
    for frame in (ctx.analysis.kernel.vectors, ctx.analysis.horizontal.vectors):
        for i in range(frame.shape[1]):
            e = frame[:, i]
            full += second_fundamental_form(ctx, e, ctx.const_field(e))
    d2 = ctx.analysis.d2.vectors
    partial = np.zeros(ctx.f.target_dim)
    for i in range(d2.shape[1]):
        v = d2[:, i]
        partial += ctx.ajet.m0 @ tensor_T(ctx, v, ctx.vertical_ext(v))
    return full, partial


def endomorphism_Fhat_sides(
    ctx: PointContext, x: np.ndarray, y: VecJet
) -> tuple[np.ndarray, np.ndarray]:
    """Both sides of the derivation identity for JP + phi Q on the kernel."""
    if ctx.p_op is None or ctx.q_op is None:
        raise ValueError("invariant-part projector undefined for this verdict")
    fhat = mat_add(mat_mul(ctx.jop, ctx.p_op), mat_mul(ctx.phi_op, ctx.q_op))
    lhs = hat_nabla(ctx, x, mat_apply(fhat, y)) - fhat.m0 @ hat_nabla(ctx, x, y)
    py = mat_apply(ctx.p_op, y)
    phi_qy = mat_apply(mat_mul(ctx.phi_op, ctx.q_op), y)
    rhs = (
        ctx.phi_op.m0 @ (hat_nabla(ctx, x, py) - hat_nabla(ctx, x, y))
        + ctx.b_op.m0 @ tensor_T(ctx, x, py)
        + hat_nabla(ctx, x, phi_qy)
    )
    return lhs, rhs


def fiber_sectional_curvature(
    ctx: PointContext, x: np.ndarray, y: np.ndarray, ambient_k: float
) -> float:
    """Sectional curvature of the fiber from the ambient one via the relation
    between a submanifold's curvature and its second fundamental form."""
    g = ctx.analysis.metric
    txx = tensor_T(ctx, x, ctx.vertical_ext(x))
    tyy = tensor_T(ctx, y, ctx.vertical_ext(y))
    txy = tensor_T(ctx, x, ctx.vertical_ext(y))
    denom = (x @ g @ x) * (y @ g @ y) - (x @ g @ y) ** 2
    return ambient_k + float((txx @ g @ tyy - txy @ g @ txy) / denom)


@dataclass(frozen=True)
class PolyField:
    """Coefficients of a global polynomial vector field of degree <= 2."""

    const: np.ndarray
    lin: np.ndarray
    quad: np.ndarray


def random_poly_field(rng: np.random.Generator, n: int, degree: int = 2) -> PolyField:
    """Random coefficients in U[-1, 1]; degree <= 2 keeps jet costs bounded
    while still exercising every derivative term of the identities."""
    const = rng.uniform(-1.0, 1.0, n)
    lin = rng.uniform(-1.0, 1.0, (n, n)) if degree >= 1 else np.zeros((n, n))
    quad = np.zeros((n, n, n))
    if degree >= 2:
        q = rng.uniform(-1.0, 1.0, (n, n, n))
        quad = 0.5 * (q + np.swapaxes(q, 1, 2))
    return PolyField(const, lin, quad)


def eval_poly_field(ctx: PointContext, pf: PolyField, space: str | None = None) -> VecJet:
    """Jet of a polynomial field projected into a named distribution.

    ``space`` is one of vertical, horizontal, d1, d2 or None (unprojected).
    """
    raw = poly_vecjet(pf.const, pf.lin, pf.quad, ctx.point, order=2)
    if space is None:
        return raw
    projector = {
        "vertical": ctx.pv,
        "horizontal": ctx.ph,
        "d1": ctx.p_op,
        "d2": ctx.q_op,
    }[space]
    if projector is None:
        raise ValueError(f"no smooth projector onto {space!r} for this verdict")
    return mat_apply(projector, raw)


def basic_field(ctx: PointContext, const: np.ndarray, lin: np.ndarray) -> VecJet:
    """Horizontal lift of the affine target field y -> const + lin y.

    Basic fields push forward to fields on the target, so their pullback
    derivative along vertical directions vanishes; the characterizations of
    totally geodesic maps are stated against such lifts.
    """
    a0 = ctx.ajet.m0
    a1 = ctx.ajet.m1
    w0 = const + lin @ ctx.fval
    w1 = (lin @ a0).T
    w2 = np.einsum("kjl,ij->kli", a1, lin) if a1 is not None else None
    return mat_apply(ctx.lift, VecJet(w0, w1, w2))
