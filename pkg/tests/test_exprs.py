"""Parser, printer and evaluator tests for the expression language."""

import math

import numpy as np
import pytest

from subcheck import exprs
from subcheck.exprs import (
    EvalError,
    SyntaxErrorAt,
    eval_jet2,
    eval_value,
    parse,
    unparse,
    variables_used,
)


def test_basic_values():
    assert eval_value(parse("x1", 1), [7.0]) == 7.0
    assert eval_value(parse("(x5-x8)/sqrt(2)", 8), [1.0] * 8) == 0.0
    assert eval_value(parse("2+3*4", 1), [0.0]) == 14.0
    assert eval_value(parse("pi", 1), [0.0]) == pytest.approx(math.pi)


def test_precedence_and_unary_minus():
    # exponent binds tighter than unary minus
    assert eval_value(parse("-x1^2", 1), [2.0]) == -4.0
    assert eval_value(parse("(-x1)^2", 1), [2.0]) == 4.0
    assert eval_value(parse("2-3-4", 1), [0.0]) == -5.0
    assert eval_value(parse("12/2/3", 1), [0.0]) == 2.0
    assert eval_value(parse("2*3^2", 1), [0.0]) == 18.0


def test_negative_and_chained_exponents():
    assert eval_value(parse("x1^-2", 1), [2.0]) == 0.25
    # chained exponents associate left
    assert eval_value(parse("x1^2^3", 1), [2.0]) == 64.0


def test_parameters():
    e = parse("x3*sin(a) - x5*cos(a)", 6, params=("a",))
    point = [0.0, 0.0, 1.0, 0.0, 1.0, 0.0]
    a = math.pi / 6
    assert eval_value(e, point, {"a": a}) == pytest.approx(math.sin(a) - math.cos(a))
    with pytest.raises(EvalError):
        eval_value(e, point, {})


def test_unknown_identifier_rejected_with_offset():
    with pytest.raises(SyntaxErrorAt) as err:
        parse("x1 + bogus", 2)
    assert err.value.offset == 5


def test_out_of_range_variable():
    with pytest.raises(SyntaxErrorAt):
        parse("x3", 2)
    with pytest.raises(SyntaxErrorAt):
        parse("x0", 2)


def test_unknown_function():
    with pytest.raises(SyntaxErrorAt):
        parse("sinh(x1)", 1)


def test_syntax_errors_carry_offsets():
    for text, offset in [("x1 + ", 5), ("(x1", 3), ("x1 ^ x2", 5), ("", 0), ("   ", 0)]:
        with pytest.raises(SyntaxErrorAt) as err:
            parse(text, 2)
        assert err.value.offset == offset


def test_no_implicit_multiplication():
    with pytest.raises(SyntaxErrorAt):
        parse("2 x1", 1)


def test_division_by_zero_reports_location():
    e = parse("x1/(x2-x2)", 2)
    with pytest.raises(EvalError) as err:
        eval_value(e, [1.0, 3.0])
    assert "division" in str(err.value)


def test_log_domain_error():
    e = parse("log(x1)", 1)
    with pytest.raises(EvalError):
        eval_value(e, [-1.0])
    with pytest.raises(EvalError):
        eval_jet2(e, [0.0])


def test_variables_used():
    e = parse("x3*sin(a) - x5*cos(a)", 6, params=("a",))
    assert variables_used(e) == {3, 5}


def test_jet2_polynomial():
    jet = eval_jet2(parse("x1^2", 1), [3.0])
    assert jet.val == 9.0
    assert jet.grad.tolist() == [6.0]
    assert jet.hess.tolist() == [[2.0]]


def test_jet2_linear_component():
    e = parse("(x5-x8)/sqrt(2)", 8)
    jet = eval_jet2(e, [0.3] * 8)
    expected = np.zeros(8)
    expected[4] = 1.0 / math.sqrt(2)
    expected[7] = -1.0 / math.sqrt(2)
    np.testing.assert_allclose(jet.grad, expected, atol=1e-15)
    np.testing.assert_allclose(jet.hess, 0.0, atol=1e-15)


def _fd_gradient(e, point, h=1e-5):
    point = np.asarray(point, dtype=float)
    out = np.zeros(len(point))
    for i in range(len(point)):
        dp = np.zeros(len(point))
        dp[i] = h
        out[i] = (eval_value(e, point + dp) - eval_value(e, point - dp)) / (2 * h)
    return out


def _fd_hessian(e, point, h=1e-4):
    point = np.asarray(point, dtype=float)
    n = len(point)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            pp = point.copy(); pp[i] += h; pp[j] += h
            pm = point.copy(); pm[i] += h; pm[j] -= h
            mp = point.copy(); mp[i] -= h; mp[j] += h
            mm = point.copy(); mm[i] -= h; mm[j] -= h
            out[i, j] = (
                eval_value(e, pp) - eval_value(e, pm) - eval_value(e, mp) + eval_value(e, mm)
            ) / (4 * h * h)
    return out


def test_jet2_matches_finite_differences():
    e = parse("exp(x1)*sin(x2)", 2)
    point = [0.3, 1.1]
    jet = eval_jet2(e, point)
    fd_g = _fd_gradient(e, point)
    fd_h = _fd_hessian(e, point)
    np.testing.assert_allclose(jet.grad, fd_g, rtol=1e-6)
    np.testing.assert_allclose(jet.hess, fd_h, rtol=1e-4, atol=1e-6)


def test_hessian_symmetric():
    e = parse("exp(x1)*sin(x2) + x1^3*x2 - tan(x1/4)", 2)
    jet = eval_jet2(e, [0.4, -0.7])
    np.testing.assert_allclose(jet.hess, jet.hess.T, atol=1e-14)


# ---- round trip --------------------------------------------------------------


def _random_expr(rng, depth, n_vars, params):
    choice = rng.integers(0, 10)
    if depth <= 0 or choice < 3:
        kind = rng.integers(0, 4)
        if kind == 0:
            return exprs.Num(float(np.round(rng.uniform(-5, 5), 3)), 0)
        if kind == 1:
            return exprs.Var(int(rng.integers(1, n_vars + 1)), 0)
        if kind == 2 and params:
            return exprs.Param(params[int(rng.integers(0, len(params)))], 0)
        return exprs.Const("pi", 0)
    if choice < 7:
        op = "+-*/"[int(rng.integers(0, 4))]
        left = _random_expr(rng, depth - 1, n_vars, params)
        right = _random_expr(rng, depth - 1, n_vars, params)
        return exprs.Bin(op, left, right, 0)
    if choice == 7:
        return exprs.Neg(_random_expr(rng, depth - 1, n_vars, params), 0)
    if choice == 8:
        return exprs.Pow(_random_expr(rng, depth - 1, n_vars, params), int(rng.integers(0, 4)), 0)
    fn = exprs.FUNCTIONS[int(rng.integers(0, len(exprs.FUNCTIONS)))]
    return exprs.Call(fn, _random_expr(rng, depth - 1, n_vars, params), 0)


def test_round_trip_1000_random_expressions():
    rng = np.random.default_rng(2024)
    n_vars = 3
    params = ("a",)
    binding = {"a": 0.37}
    checked = 0
    for _ in range(1000):
        tree = _random_expr(rng, 4, n_vars, params)
        text = unparse(tree)
        reparsed = parse(text, n_vars, params)
        agreements = 0
        for _ in range(10):
            point = rng.uniform(-2.0, 2.0, n_vars)
            try:
                v1 = exprs.evaluate(tree, list(point), binding)
            except (EvalError, ZeroDivisionError, ValueError, OverflowError):
                continue
            if not np.isfinite(v1) or abs(v1) > 1e12:
                continue
            v2 = exprs.evaluate(reparsed, list(point), binding)
            assert v2 == pytest.approx(v1, rel=1e-12, abs=1e-12), text
            agreements += 1
        if agreements:
            checked += 1
    assert checked > 700  # the generator must produce mostly evaluable trees


def test_unparse_examples():
    e = parse("x3*sin(a) - x5*cos(a)", 6, params=("a",))
    assert unparse(e) == "x3*sin(a)-x5*cos(a)"
    assert unparse(parse("-x1^2", 1)) == "-x1^2"
    assert unparse(parse("(x1+x2)*x1", 2)) == "(x1+x2)*x1"
