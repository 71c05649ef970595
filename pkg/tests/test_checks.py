"""Check catalog, gating, two-route agreement and suite determinism."""

import numpy as np
import pytest

from subcheck import exprs
from subcheck.checks import (
    CATALOG,
    CATALOG_BY_ID,
    NONZERO_FLOOR,
    _two_route_verdict,
    direct_integrability_residual,
    run_suite,
)
from subcheck.geometry import MetricField, product_J, standard_J
from subcheck.jets import VecJet
from subcheck.linalg import frame_projector, g_orthonormalize
from subcheck.submersion import SubmersionMap

RNG = np.random.default_rng(41)


def make_ex6():
    return SubmersionMap.from_strings(8, 2, ["(x5 - x8)/sqrt(2)", "x6"])


def make_warped():
    metric = MetricField.warped_product(4, 2, exprs.parse("exp(x1)", 4), {})
    jf = product_J(standard_J(4), standard_J(2))
    return SubmersionMap.from_strings(
        6, 2, ["x1*sin(alpha) - x3*cos(alpha)", "x4"],
        metric=metric, jfield=jf, params={"alpha": 0.6},
    )


def pts(n, count=40, lo=-1.0, hi=1.0, seed=3):
    return np.random.default_rng(seed).uniform(lo, hi, size=(count, n))


def test_catalog_integrity():
    ids = [c.id for c in CATALOG]
    assert len(ids) == len(set(ids))
    for c in CATALOG:
        assert c.statement.strip()
        assert c.tolerance > 0
        assert c.points >= 1
        assert all(isinstance(g, str) for g in c.gates)
    assert CATALOG_BY_ID["harmonicity"].gates == ("kahler", "d1_integrable")


def test_suite_example6_all_pass_or_vacuous():
    res = run_suite(make_ex6(), pts(8, 60), seed=42)
    assert res.status == "pass"
    for r in res.results:
        assert r.verdict in ("pass", "vacuous", "skipped"), (r.id, r.verdict)
        assert r.consistency_ok
    # everything except the transverse-plane check has its hypotheses met here
    gated = [r.id for r in res.results if r.verdict != "pass"]
    assert gated == ["curvature_transverse_plane"]


def test_suite_warped_gates_parallel_J_statements():
    res = run_suite(make_warped(), pts(6, 40, -0.5, 0.5), seed=42)
    assert res.status == "pass"
    assert not res.gates.kahler
    assert res.gates.kahler_residual > 1e-3
    by_id = {r.id: r for r in res.results}
    for cid in ("vertical_foliation", "totally_geodesic_map", "harmonicity"):
        assert by_id[cid].verdict == "skipped"
        assert "kahler" in by_id[cid].gate_failures
    # the almost-Hermitian integrability theorems still run and pass
    for cid in ("d1_integrability", "d2_integrability"):
        assert by_id[cid].verdict == "pass"
        assert by_id[cid].property_holds is True


def test_warped_informational_residuals_expose_route_divergence():
    # with a non-parallel J the tensor conditions and the direct geometry
    # genuinely part ways; the recorded informational residuals show it
    res = run_suite(make_warped(), pts(6, 40, -0.5, 0.5), seed=42)
    by_id = {r.id: r for r in res.results}
    h = by_id["harmonicity"]
    assert h.direct_residual > 1.0  # the map is not harmonic
    assert h.condition_residual < 1e-10  # but the slant-part trace vanishes
    v = by_id["vertical_foliation"]
    assert v.direct_residual > 1.0 and v.condition_residual < 1e-10


def test_polar_two_route_agreement_on_failures():
    f = SubmersionMap.from_strings(4, 2, ["sqrt(x1^2 + x2^2)", "x3"])
    p = np.random.default_rng(8)
    points = np.column_stack(
        [p.uniform(1, 2, 40), p.uniform(0.25, 1, 40), p.uniform(-1, 1, (40, 2))]
    )
    res = run_suite(f, points, seed=42)
    assert res.status == "pass"
    by_id = {r.id: r for r in res.results}
    for cid in ("vertical_foliation", "totally_geodesic_map", "harmonicity", "d2_foliation"):
        r = by_id[cid]
        assert r.verdict == "pass" and r.property_holds is False
        assert r.direct_residual > NONZERO_FLOOR
        assert r.condition_residual > NONZERO_FLOOR


def test_two_route_verdict_logic():
    assert _two_route_verdict(1e-12, 1e-13, 1e-8) == ("pass", True, True)
    assert _two_route_verdict(3.0, 2.0, 1e-8) == ("pass", False, True)
    # decisive separation falsifies the implementation
    assert _two_route_verdict(1e-12, 3.0, 1e-8) == ("fail", None, False)
    # a split inside the noise band is an over-tight tolerance, not a bug
    assert _two_route_verdict(1e-6, 1e-12, 1e-8) == ("fail", None, True)
    assert _two_route_verdict(1e-14, 5e-15, 1e-14)[2] is True


def test_contact_distribution_fails_direct_integrability():
    # span{d1 + x2 d4, d2, d3} is a contact-like distribution: the bracket of
    # the first two fields leaves it, and the evaluator must say so loudly
    p = np.array([0.3, 0.7, -0.2, 0.5])
    x = VecJet(
        np.array([1.0, 0.0, 0.0, p[1]]),
        np.array([[0.0, 0, 0, 0], [0, 0, 0, 1.0], [0, 0, 0, 0], [0, 0, 0, 0]]),
        np.zeros((4, 4, 4)),
    )
    y = VecJet(np.array([0.0, 1.0, 0.0, 0.0]), np.zeros((4, 4)), np.zeros((4, 4, 4)))
    frame = np.column_stack([x.v0, y.v0, np.array([0.0, 0.0, 1.0, 0.0])])
    g = np.eye(4)
    proj = frame_projector(g_orthonormalize(frame, g), g)
    resid = direct_integrability_residual(proj, g, x, y)
    assert resid > 1e-2


def test_suite_deterministic_for_fixed_seed():
    f = make_ex6()
    points = pts(8, 30)
    r1 = run_suite(f, points, seed=42)
    r2 = run_suite(f, points, seed=42)
    for a, b in zip(r1.results, r2.results):
        assert a.id == b.id and a.verdict == b.verdict
        assert a.max_residual == b.max_residual
        assert a.direct_residual == b.direct_residual
        assert a.condition_residual == b.condition_residual


def test_suite_seed_changes_residual_stream():
    f = make_warped()
    points = pts(6, 20, -0.5, 0.5)
    r1 = {r.id: r for r in run_suite(f, points, seed=1).results}
    r2 = {r.id: r for r in run_suite(f, points, seed=2).results}
    moved = [
        cid
        for cid in r1
        if r1[cid].max_residual is not None
        and r2[cid].max_residual is not None
        and r1[cid].max_residual != r2[cid].max_residual
    ]
    assert moved  # random draws actually respond to the seed


def test_only_filter_and_unknown_id():
    f = make_ex6()
    res = run_suite(f, pts(8, 20), seed=42, only=("algebraic_identities",))
    assert [r.id for r in res.results] == ["algebraic_identities"]
    with pytest.raises(KeyError):
        run_suite(f, pts(8, 20), seed=42, only=("nope",))


def test_only_filter_preserves_results():
    f = make_ex6()
    points = pts(8, 30)
    full = {r.id: r for r in run_suite(f, points, seed=42).results}
    sub = run_suite(f, points, seed=42, only=("kahler_identity_vertical",)).results[0]
    assert sub.max_residual == full["kahler_identity_vertical"].max_residual


def test_tol_override_applies():
    f = make_ex6()
    res = run_suite(f, pts(8, 20), seed=42, tol_override=1e-30)
    # over-tightening must flip noise-limited checks to fail
    assert any(r.verdict == "fail" for r in res.results)
    for r in res.results:
        if r.verdict in ("pass", "fail"):
            assert r.tolerance == 1e-30


def test_threads_do_not_change_results():
    f = make_warped()
    points = pts(6, 24, -0.5, 0.5)
    r1 = run_suite(f, points, seed=42, threads=1)
    r4 = run_suite(f, points, seed=42, threads=4)
    for a, b in zip(r1.results, r4.results):
        assert a.max_residual == b.max_residual


def test_radial_sphere_fibers_nontrivial_statements():
    # round sphere fibers: umbilical with nonzero mean curvature, a parallel-J
    # source, and a non-integrable invariant part
    f = SubmersionMap.from_strings(4, 1, ["sqrt(x1^2 + x2^2 + x3^2 + x4^2)"])
    points = np.random.default_rng(12).uniform(0.5, 1.5, (40, 4))
    res = run_suite(f, points, seed=42)
    assert res.status == "pass"
    assert res.gates.kahler and res.gates.umbilical and not res.gates.d1_integrable
    by_id = {r.id: r for r in res.results}
    # the mean curvature vector is nonzero yet lies in omega D2 to rounding
    from subcheck.oneill import build_context, mean_curvature

    ctx = build_context(f, points[0])
    h = mean_curvature(ctx)
    assert ctx.g_norm(h) > 0.3
    assert by_id["umbilical_mean_curvature"].verdict == "pass"
    assert by_id["umbilical_mean_curvature"].max_residual < 1e-12
    # the invariant-plane curvature relation holds with every term nonzero
    assert by_id["curvature_invariant_plane"].verdict == "pass"
    assert by_id["curvature_invariant_plane"].max_residual < 1e-10
    # both routes agree that the invariant part fails to be integrable
    r = by_id["d1_integrability"]
    assert r.verdict == "pass" and r.property_holds is False
    assert r.direct_residual > 1.0 and r.condition_residual > 1.0
    # the paired-frame cancellation is correctly vacuous without integrability
    assert by_id["d1_pair_cancellation"].verdict == "vacuous"
    assert "d1_integrable" in by_id["d1_pair_cancellation"].gate_failures


def test_right_angle_snaps_exactly():
    f = SubmersionMap.from_strings(4, 1, ["sqrt(x1^2 + x2^2 + x3^2 + x4^2)"])
    points = np.random.default_rng(2).uniform(0.5, 1.5, (10, 4))
    from subcheck.submersion import analyze_map

    ma = analyze_map(f, points)
    assert ma.verdict == "semi-invariant"
    assert ma.theta == np.pi / 2
    assert ma.representative.cos_theta == 0.0
    assert ma.theta_deviation == 0.0


def test_biangle_generic_gating():
    f = SubmersionMap.from_strings(
        8, 4,
        ["x1*sin(a) - x3*cos(a)", "x4", "x5*sin(b) - x7*cos(b)", "x8"],
        params={"a": 0.3, "b": 1.0},
    )
    res = run_suite(f, pts(8, 30), seed=42)
    assert res.status == "pass"
    by_id = {r.id: r for r in res.results}
    assert not res.gates.single_angle
    assert by_id["d2_integrability"].verdict == "vacuous"
    assert by_id["fhat_derivation"].verdict == "vacuous"
    assert by_id["algebraic_identities"].verdict == "pass"
    assert by_id["slant_characterization"].verdict == "pass"
    assert by_id["slant_characterization"].property_holds is False


def test_fhat_derivation_in_suite():
    f = SubmersionMap.from_strings(
        6, 2, ["x3*sin(alpha) - x5*cos(alpha)", "x6"], params={"alpha": 0.8}
    )
    res = run_suite(f, pts(6, 25), seed=42, only=("fhat_derivation",))
    r = res.results[0]
    assert r.verdict == "pass" and r.max_residual < 1e-10
