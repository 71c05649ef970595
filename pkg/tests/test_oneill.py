"""Fundamental tensors, derived operators, traces and curvature helpers."""

import numpy as np
import pytest

from subcheck import exprs
from subcheck.geometry import MetricField, product_J, sectional_curvature, standard_J
from subcheck.jets import mat_apply
from subcheck.oneill import (
    basic_field,
    bracket_value,
    build_context,
    cov_value,
    endomorphism_Fhat_sides,
    eval_poly_field,
    fiber_sectional_curvature,
    harmonic_traces,
    hat_nabla,
    horiz_nabla,
    mean_curvature,
    nabla_omega,
    nabla_phi,
    random_poly_field,
    second_fundamental_form,
    tensor_A,
    tensor_T,
    umbilical_residual,
)
from subcheck.submersion import SubmersionMap

RNG = np.random.default_rng(31)


@pytest.fixture(scope="module")
def warped_ctx():
    metric = MetricField.warped_product(4, 2, exprs.parse("exp(x1)", 4), {})
    jf = product_J(standard_J(4), standard_J(2))
    f = SubmersionMap.from_strings(
        6, 2, ["x1*sin(alpha) - x3*cos(alpha)", "x4"],
        metric=metric, jfield=jf, params={"alpha": 0.6},
    )
    p = np.array([0.2, -0.1, 0.3, 0.15, 0.4, -0.3])
    return build_context(f, p)


@pytest.fixture(scope="module")
def flat_ctx():
    f = SubmersionMap.from_strings(
        6, 2, ["x3*sin(alpha) - x5*cos(alpha)", "x6"], params={"alpha": 0.9}
    )
    return build_context(f, np.array([0.3, -0.2, 0.5, 0.1, -0.4, 0.2]))


@pytest.fixture(scope="module")
def polar_ctx():
    f = SubmersionMap.from_strings(4, 2, ["sqrt(x1^2 + x2^2)", "x3"])
    return build_context(f, np.array([1.2, 0.7, 0.3, -0.4]))


def test_tensors_vanish_for_flat_linear(flat_ctx):
    ctx = flat_ctx
    for _ in range(5):
        e, g_ = RNG.standard_normal((2, 6))
        assert np.abs(tensor_T(ctx, e, ctx.const_field(g_))).max() < 1e-14
        assert np.abs(tensor_A(ctx, e, ctx.const_field(g_))).max() < 1e-14


def test_warped_fiber_shape_oracle(warped_ctx):
    # For a metric-unit second-factor direction X, T_X X is minus the
    # horizontal part of grad(f)/f (classical warped-product fiber shape).
    ctx = warped_ctx
    fv = np.exp(ctx.point[0])
    x = np.zeros(6)
    x[4] = 1.0 / fv
    gradf = np.zeros(6)
    gradf[0] = fv
    oracle = -(1.0 / fv) * (ctx.ph.m0 @ gradf)
    txx = tensor_T(ctx, x, ctx.vertical_ext(x))
    np.testing.assert_allclose(txx, oracle, atol=1e-6)


def test_extension_independence(warped_ctx, polar_ctx):
    for ctx in (warped_ctx, polar_ctx):
        vf = ctx.analysis.kernel.vectors
        hf = ctx.analysis.horizontal.vectors
        for _ in range(5):
            y = vf @ RNG.standard_normal(vf.shape[1])
            e = vf @ RNG.standard_normal(vf.shape[1])
            t1 = tensor_T(ctx, e, ctx.const_field(y))
            t2 = tensor_T(ctx, e, ctx.vertical_ext(y))
            assert np.abs(t1 - t2).max() < 1e-9
            w = hf @ RNG.standard_normal(hf.shape[1])
            z = hf @ RNG.standard_normal(hf.shape[1])
            a1 = tensor_A(ctx, z, ctx.const_field(w))
            a2 = tensor_A(ctx, z, ctx.horizontal_ext(w))
            assert np.abs(a1 - a2).max() < 1e-9


def test_T_symmetric_on_vertical_pairs(warped_ctx, polar_ctx):
    for ctx in (warped_ctx, polar_ctx):
        vf = ctx.analysis.kernel.vectors
        for _ in range(5):
            x = vf @ RNG.standard_normal(vf.shape[1])
            y = vf @ RNG.standard_normal(vf.shape[1])
            d = tensor_T(ctx, x, ctx.vertical_ext(y)) - tensor_T(ctx, y, ctx.vertical_ext(x))
            assert np.abs(d).max() < 1e-9


def test_A_equals_half_vertical_bracket(warped_ctx, polar_ctx):
    for ctx in (warped_ctx, polar_ctx):
        hf = ctx.analysis.horizontal.vectors
        for i in range(hf.shape[1]):
            for j in range(hf.shape[1]):
                z, w = hf[:, i], hf[:, j]
                a = tensor_A(ctx, z, ctx.horizontal_ext(w))
                br = bracket_value(ctx.horizontal_ext(z), ctx.horizontal_ext(w))
                assert np.abs(a - 0.5 * ctx.pv.m0 @ br).max() < 1e-8


def test_A_skew(warped_ctx):
    ctx = warped_ctx
    g = ctx.analysis.metric
    hf = ctx.analysis.horizontal.vectors
    vf = ctx.analysis.kernel.vectors
    for _ in range(5):
        z = hf @ RNG.standard_normal(hf.shape[1])
        v = vf @ RNG.standard_normal(vf.shape[1])
        w = hf @ RNG.standard_normal(hf.shape[1])
        lhs = tensor_A(ctx, z, ctx.vertical_ext(v)) @ g @ w
        rhs = -(v @ g @ tensor_A(ctx, z, ctx.horizontal_ext(w)))
        assert abs(lhs - rhs) < 1e-8


def test_hat_nabla_flat_constant(flat_ctx):
    ctx = flat_ctx
    v = ctx.analysis.kernel.vectors[:, 0]
    assert np.abs(hat_nabla(ctx, v, ctx.const_field(v))).max() < 1e-14


def test_hat_nabla_metric_on_fibers(warped_ctx):
    # X g(Y, Z) = g(Dhat_X Y, Z) + g(Y, Dhat_X Z) for vertical fields
    ctx = warped_ctx
    f = ctx.f
    pfy = random_poly_field(RNG, 6)
    pfz = random_poly_field(RNG, 6)
    vf = ctx.analysis.kernel.vectors
    x = vf @ RNG.standard_normal(vf.shape[1])
    y = eval_poly_field(ctx, pfy, "vertical")
    z = eval_poly_field(ctx, pfz, "vertical")
    h = 1e-6

    def inner(q):
        c2 = build_context(f, q)
        yq = eval_poly_field(c2, pfy, "vertical")
        zq = eval_poly_field(c2, pfz, "vertical")
        return yq.v0 @ c2.analysis.metric @ zq.v0

    lhs = sum(
        x[k] * (inner(ctx.point + h * e) - inner(ctx.point - h * e)) / (2 * h)
        for k, e in enumerate(np.eye(6))
    )
    g = ctx.analysis.metric
    rhs = hat_nabla(ctx, x, y) @ g @ z.v0 + y.v0 @ g @ hat_nabla(ctx, x, z)
    assert abs(lhs - rhs) < 1e-8


def test_gauss_relation(warped_ctx):
    # nabla_X Y = Dhat_X Y + T_X Y for vertical fields
    ctx = warped_ctx
    x = eval_poly_field(ctx, random_poly_field(RNG, 6), "vertical")
    y = eval_poly_field(ctx, random_poly_field(RNG, 6), "vertical")
    nab = cov_value(ctx, x.v0, y)
    split = hat_nabla(ctx, x.v0, y) + tensor_T(ctx, x.v0, y)
    np.testing.assert_allclose(nab, split, atol=1e-10)


def test_nabla_phi_omega_vanish_for_constant_data(flat_ctx):
    ctx = flat_ctx
    v = ctx.analysis.kernel.vectors[:, 1]
    y = ctx.const_field(ctx.analysis.kernel.vectors[:, 0])
    assert np.abs(nabla_phi(ctx, v, y)).max() < 1e-14
    assert np.abs(nabla_omega(ctx, v, y)).max() < 1e-14


def test_nabla_phi_two_routes(flat_ctx):
    # definition vs product-rule expansion through the operator-field jets
    ctx = flat_ctx
    x = eval_poly_field(ctx, random_poly_field(RNG, 6), "vertical")
    y = eval_poly_field(ctx, random_poly_field(RNG, 6), "vertical")
    route_a = nabla_phi(ctx, x.v0, y)
    dphi = np.einsum("kij,k->ij", ctx.phi_op.m1, x.v0)
    route_b = (
        ctx.pv.m0 @ (dphi @ y.v0)
        + ctx.pv.m0 @ (ctx.phi_op.m0 @ cov_value(ctx, x.v0, y))
        - ctx.phi_op.m0 @ hat_nabla(ctx, x.v0, y)
    )
    np.testing.assert_allclose(route_a, route_b, atol=1e-8)


def test_sff_zero_for_linear_flat(flat_ctx):
    ctx = flat_ctx
    for _ in range(5):
        x, y = RNG.standard_normal((2, 6))
        assert np.abs(second_fundamental_form(ctx, x, ctx.const_field(y))).max() < 1e-14


def test_sff_symmetry_warped(warped_ctx):
    ctx = warped_ctx
    for _ in range(5):
        x, y = RNG.standard_normal((2, 6))
        s1 = second_fundamental_form(ctx, x, ctx.const_field(y))
        s2 = second_fundamental_form(ctx, y, ctx.const_field(x))
        assert np.abs(s1 - s2).max() < 1e-9


def test_sff_vanishes_on_horizontal_pairs(warped_ctx, polar_ctx):
    for ctx in (warped_ctx, polar_ctx):
        hf = ctx.analysis.horizontal.vectors
        for i in range(hf.shape[1]):
            for j in range(hf.shape[1]):
                s = second_fundamental_form(ctx, hf[:, i], ctx.horizontal_ext(hf[:, j]))
                assert np.abs(s).max() < 1e-9


def test_mean_curvature_flat_zero(flat_ctx):
    assert np.abs(mean_curvature(flat_ctx)).max() < 1e-14


def test_mean_curvature_warped_oracle(warped_ctx):
    # |H| = sin(alpha)/2: two of four fiber directions contribute the warped
    # shape term, each of norm sin(alpha)
    ctx = warped_ctx
    h = mean_curvature(ctx)
    g = ctx.analysis.metric
    assert np.sqrt(h @ g @ h) == pytest.approx(np.sin(0.6) / 2, abs=1e-6)


def test_mean_curvature_frame_invariance(warped_ctx):
    ctx = warped_ctx
    h_ref = mean_curvature(ctx)
    vf = ctx.analysis.kernel.vectors
    q, _ = np.linalg.qr(RNG.standard_normal((vf.shape[1], vf.shape[1])))
    rotated = vf @ q
    acc = np.zeros(6)
    for i in range(rotated.shape[1]):
        e = rotated[:, i]
        acc += tensor_T(ctx, e, ctx.vertical_ext(e))
    np.testing.assert_allclose(acc / rotated.shape[1], h_ref, atol=1e-10)


def test_umbilical_residuals(flat_ctx, warped_ctx, polar_ctx):
    rng = np.random.default_rng(9)
    assert umbilical_residual(flat_ctx, rng) < 1e-12
    assert umbilical_residual(warped_ctx, rng) > 1e-3
    assert umbilical_residual(polar_ctx, rng) > 1e-3


def test_harmonic_traces_flat(flat_ctx):
    full, partial = harmonic_traces(flat_ctx)
    assert np.abs(full).max() < 1e-13 and np.abs(partial).max() < 1e-13


def test_harmonic_traces_polar_both_nonzero(polar_ctx):
    full, partial = harmonic_traces(polar_ctx)
    assert np.abs(full).max() > 1e-3
    assert np.abs(partial).max() > 1e-3


def test_harmonic_trace_two_route_sum(warped_ctx):
    # the full trace equals the direct sum over any orthonormal frame
    ctx = warped_ctx
    full, _ = harmonic_traces(ctx)
    g = ctx.analysis.metric
    w, v = np.linalg.eigh(g)
    frame = v / np.sqrt(w)  # g-orthonormal frame from the metric eigenbasis
    acc = np.zeros(2)
    for i in range(6):
        acc += second_fundamental_form(ctx, frame[:, i], ctx.const_field(frame[:, i]))
    np.testing.assert_allclose(acc, full, atol=1e-8)


def test_d1_pair_cancellation_flat(flat_ctx):
    ctx = flat_ctx
    d1 = ctx.analysis.d1.vectors
    for i in range(d1.shape[1]):
        e = d1[:, i]
        je = ctx.jop.m0 @ e
        s = second_fundamental_form(ctx, e, ctx.const_field(e)) + second_fundamental_form(
            ctx, je, ctx.const_field(je)
        )
        assert np.abs(s).max() < 1e-8


def test_fhat_identity_flat_poly_fields(flat_ctx):
    ctx = flat_ctx
    for _ in range(6):
        x = eval_poly_field(ctx, random_poly_field(RNG, 6), "vertical")
        y = eval_poly_field(ctx, random_poly_field(RNG, 6), "vertical")
        lhs, rhs = endomorphism_Fhat_sides(ctx, x.v0, y)
        assert np.abs(lhs - rhs).max() < 1e-8


def test_fhat_equals_J_on_invariant_part(flat_ctx):
    ctx = flat_ctx
    d1 = ctx.analysis.d1.vectors
    fhat0 = ctx.jop.m0 @ ctx.p_op.m0 + ctx.phi_op.m0 @ ctx.q_op.m0
    for i in range(d1.shape[1]):
        x = d1[:, i]
        np.testing.assert_allclose(fhat0 @ x, ctx.jop.m0 @ x, atol=1e-10)


def test_fiber_curvature_gauss_oracle(warped_ctx):
    # fiber of the warped entry at a second-factor plane: the ambient value is
    # -1 and the fiber one is -cos^2(alpha) for f = exp(x1), alpha = 0.6
    ctx = warped_ctx
    fv = np.exp(ctx.point[0])
    x = np.zeros(6); x[4] = 1.0 / fv
    y = np.zeros(6); y[5] = 1.0 / fv
    k_amb = sectional_curvature(ctx.f.metric, ctx.point, x, y)
    assert k_amb == pytest.approx(-1.0, abs=1e-8)
    k_fib = fiber_sectional_curvature(ctx, x, y, k_amb)
    assert k_fib == pytest.approx(-np.cos(0.6) ** 2, abs=1e-6)


def test_basic_field_pushes_to_target(warped_ctx):
    # dF applied to a basic lift reproduces the target field along the map
    ctx = warped_ctx
    const = RNG.uniform(-1, 1, 2)
    lin = RNG.uniform(-1, 1, (2, 2))
    z = basic_field(ctx, const, lin)
    np.testing.assert_allclose(ctx.ajet.m0 @ z.v0, const + lin @ ctx.fval, atol=1e-12)
    # and its pullback derivative along vertical directions vanishes
    pushed = mat_apply(ctx.ajet, z)
    vf = ctx.analysis.kernel.vectors
    for i in range(vf.shape[1]):
        assert np.abs(pushed.v1.T @ vf[:, i]).max() < 1e-12
