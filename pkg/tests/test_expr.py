import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from periodlab import expr as ex


def test_parse_add_mul():
    e = ex.parse("a1 + 2*a2", 2)
    assert e == ex.Expr("add", (ex.var(1), ex.Expr("mul", (ex.const(2), ex.var(2)))))


def test_parse_sqrt():
    assert ex.parse("sqrt(a1)", 1) == ex.func("sqrt", ex.var(1))


def test_parse_out_of_range_variable():
    with pytest.raises(ex.ExprSyntaxError):
        ex.parse("a3", 2)


def test_parse_unknown_identifier_offset():
    with pytest.raises(ex.ExprSyntaxError) as err:
        ex.parse("a1 + foo(a1)", 1)
    assert err.value.offset == 5


def test_parse_syntax_error_offset():
    with pytest.raises(ex.ExprSyntaxError) as err:
        ex.parse("a1 + ", 1)
    assert err.value.offset == 5


def test_t_is_alias_for_a1():
    assert ex.parse("t*t", 1) == ex.parse("a1*a1", 1)


def test_rational_literal_binds_tightly():
    assert ex.parse("3/2", 1) == ex.const(Fraction(3, 2))
    # but division by a variable is still division
    assert ex.parse("1/a1", 1).kind == "div"


def test_eval_examples():
    assert ex.evaluate(ex.parse("a1*a1", 1), (0.5,)) == 0.25
    assert ex.evaluate(ex.parse("sqrt(a1)", 1), (0.0,)) == 0.0
    with pytest.raises(ex.ExprDomainError):
        ex.evaluate(ex.parse("1/a1", 1), (0.0,))


def test_eval_domain_errors_carry_subexpression():
    with pytest.raises(ex.ExprDomainError) as err:
        ex.evaluate(ex.parse("log(a1 - 2)", 1), (1.0,))
    assert "log" in str(err.value)


def test_pow_zero_base_conventions():
    e = ex.parse("a1^(1/2)", 1)
    assert ex.evaluate(e, (0.0,)) == 0.0
    with pytest.raises(ex.ExprDomainError):
        ex.evaluate(ex.parse("a1^(-1/2)", 1), (0.0,))
    with pytest.raises(ex.ExprDomainError):
        ex.evaluate(ex.parse("a1^(1/2)", 1), (-1.0,))


def test_diff_power_rule():
    d = ex.diff(ex.parse("a1^(3/2)", 1), 1)
    assert d == ex.Expr("mul", (ex.const(Fraction(3, 2)), ex.Expr("pow", (ex.var(1),), Fraction(1, 2))))


def test_diff_product_rule():
    d = ex.diff(ex.parse("sin(a1)*a2", 2), 1)
    assert ex.to_string(d) == "cos(a1)*a2"


def test_diff_sqrt_at_quarter():
    d = ex.diff(ex.parse("sqrt(a1)", 1), 1)
    # finite-difference oracle at 0.25, step 1e-6
    e = ex.parse("sqrt(a1)", 1)
    h = 1e-6
    fd = (ex.evaluate(e, (0.25 + h,)) - ex.evaluate(e, (0.25 - h,))) / (2 * h)
    assert abs(ex.evaluate(d, (0.25,)) - fd) <= 1e-6
    assert abs(ex.evaluate(d, (0.25,)) - 1.0) <= 1e-12


# -- generators ------------------------------------------------------------

# expressions guaranteed smooth on the open box (0,1)^arity: denominators and
# the arguments of sqrt/log stay >= 1
def _safe_exprs(arity, depth):
    leaf = st.one_of(
        st.integers(min_value=1, max_value=arity).map(ex.var),
        st.fractions(min_value=Fraction(-2), max_value=Fraction(2)).map(ex.const),
        st.just(ex.pi),
    )
    if depth == 0:
        return leaf
    sub = _safe_exprs(arity, depth - 1)

    def positive(e):
        return ex.add(ex.const(1), ex.mul(e, e))

    return st.one_of(
        leaf,
        st.tuples(sub, sub).map(lambda ab: ex.add(*ab)),
        st.tuples(sub, sub).map(lambda ab: ex.sub(*ab)),
        st.tuples(sub, sub).map(lambda ab: ex.mul(*ab)),
        st.tuples(sub, sub).map(lambda ab: ex.div(ab[0], positive(ab[1]))),
        sub.map(lambda e: ex.func("sin", e)),
        sub.map(lambda e: ex.func("cos", e)),
        sub.map(lambda e: ex.func("atan", e)),
        sub.map(lambda e: ex.func("sqrt", positive(e))),
        sub.map(lambda e: ex.func("log", positive(e))),
        sub.map(lambda e: ex.pow_(positive(e), Fraction(3, 2))),
        sub.map(lambda e: ex.pow_(e, 2)),
    )


@settings(max_examples=200, deadline=None)
@given(e=_safe_exprs(2, 3))
def test_print_parse_roundtrip(e):
    assert ex.parse(ex.to_string(e), 2) == e


@settings(max_examples=150, deadline=None)
@given(
    e=_safe_exprs(2, 3),
    x=st.floats(min_value=0.05, max_value=0.9),
    y=st.floats(min_value=0.05, max_value=0.9),
    i=st.integers(min_value=1, max_value=2),
)
def test_diff_matches_central_difference(e, x, y, i):
    h = 1e-6
    pt = [x, y]
    up, dn = pt[:], pt[:]
    up[i - 1] += h
    dn[i - 1] -= h
    try:
        fd = (ex.evaluate(e, up) - ex.evaluate(e, dn)) / (2 * h)
        sym = ex.evaluate(ex.diff(e, i), pt)
    except ex.ExprDomainError:
        return
    if not (math.isfinite(fd) and math.isfinite(sym)):
        return
    assert abs(sym - fd) <= 1e-5 * (1.0 + abs(sym))


@settings(max_examples=50, deadline=None)
@given(e=_safe_exprs(2, 3), x=st.floats(min_value=0.1, max_value=0.9))
def test_eval_deterministic(e, x):
    pt = (x, 1.0 - x / 2)
    try:
        v1 = ex.evaluate(e, pt)
        v2 = ex.evaluate(e, pt)
        v3 = ex.compile_expr(e)(pt)
    except ex.ExprDomainError:
        return
    assert v1 == v2 == v3


@settings(max_examples=100, deadline=None)
@given(e=_safe_exprs(2, 3), x=st.floats(min_value=0.1, max_value=0.9))
def test_vector_eval_matches_scalar(e, x):
    import numpy as np

    pts = np.array([[x, 0.3], [0.2, x], [x / 2, x / 2]])
    try:
        scalar = [ex.evaluate(e, p) for p in pts]
        vec = ex.compile_vec(e)(pts.T)
    except ex.ExprDomainError:
        return
    assert all(abs(a - b) <= 1e-14 * (1 + abs(a)) for a, b in zip(scalar, vec))
