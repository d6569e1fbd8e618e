import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singcert import kernels
from singcert.polyexpr import (
    DimensionError,
    ParseError,
    Polynomial,
    PolySystem,
    TaylorExpansion,
    apply_tensor,
    derivative_tensor,
    dump_point,
    evaluate,
    evaluate_many,
    format_system,
    hessian_tensor,
    jacobian,
    load_point,
    multi_indices,
    multinomial_weight,
    parse_system,
    shift_system,
    taylor_norm_bound,
)
from sysgen import cplx, random_system

X3_YZ = "vars x, y, z; x^3 - y*z; y^3 - x*z; z^3 - x*y;"


# ------------------------------------------------------------------ parsing

def test_parse_basic_system():
    f = parse_system(X3_YZ)
    assert f.nvars == 3 and f.neqs == 3 and f.degree == 3
    assert f.varnames == ("x", "y", "z")
    assert f[0].terms == {(3, 0, 0): 1, (0, 1, 1): -1}


@pytest.mark.parametrize("text, expected", [
    ("vars x; 2*x^2 - 3", {(2,): 2, (0,): -3}),
    ("vars x; (x+1)^2", {(2,): 1, (1,): 2, (0,): 1}),
    ("vars x; -x", {(1,): -1}),
    ("vars x; 2i*x + 1.5e-3", {(1,): 2j, (0,): 1.5e-3}),
    ("vars x; i*x", {(1,): 1j}),
    ("vars x; x - x", {}),
    ("vars x; 2^3*x", {(1,): 8}),
])
def test_parse_expressions(text, expected):
    assert parse_system(text)[0].terms == expected


def test_declared_i_is_a_variable():
    f = parse_system("vars i, j; i*j; i - j")
    assert f[0].terms == {(1, 1): 1}


@pytest.mark.parametrize("text, line", [
    ("vars x; x + w", 1),
    ("vars x;\nx^", 2),
    ("vars x; x^101", 1),
    ("vars x; (x + 1", 1),
    ("x + 1", 1),
    ("vars x; x $ 2", 1),
])
def test_parse_errors_carry_position(text, line):
    with pytest.raises(ParseError) as info:
        parse_system(text)
    assert info.value.line == line
    assert info.value.col >= 1


def test_canonical_round_trip_fixed():
    f = parse_system("vars x, y; 0.1*x*y - (2+3i)*y^2 + 0.3333333333333333; x")
    g = parse_system(format_system(f))
    assert g == f
    assert format_system(g) == format_system(f)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_print_parse_round_trip(seed):
    f, _ = random_system(seed)
    g = parse_system(format_system(f))
    assert [p.terms for p in g.polys] == [p.terms for p in f.polys]


def test_point_round_trip():
    x = np.array([1.5 - 2j, -7.5e-20 - 2.7e-20j, 0.1])
    assert np.array_equal(load_point(dump_point(x)), x)
    assert np.array_equal(load_point("[1, 2.5]"), np.array([1, 2.5], complex))


# ------------------------------------------------------------- arithmetic

def test_polynomial_arithmetic():
    n = 2
    x, y = Polynomial.variable(0, n), Polynomial.variable(1, n)
    p = (x + y) ** 2 - x * x - 2 * x * y
    assert p == y ** 2
    assert (x - x).is_zero()
    assert (x * 0).degree == 0


def test_partial_derivative():
    f = parse_system("vars x, y; x^3*y^2 + 4*y")
    assert f[0].partial(0).terms == {(2, 2): 3}
    assert f[0].partial(1).terms == {(3, 1): 2, (0, 0): 4}


def test_dimension_errors():
    f = parse_system(X3_YZ)
    with pytest.raises(DimensionError):
        evaluate(f, [1, 2])
    with pytest.raises(DimensionError):
        Polynomial({(1, 0): 1}, 3)


# -------------------------------------------------------------- evaluation

def test_evaluate_matches_manual():
    f = parse_system(X3_YZ)
    x = np.array([1 + 1j, 2, -0.5j])
    X, Y, Z = x
    want = [X ** 3 - Y * Z, Y ** 3 - X * Z, Z ** 3 - X * Y]
    assert np.allclose(evaluate(f, x), want, rtol=1e-15, atol=0)


def test_evaluate_many_shape():
    f, _ = random_system(3, n=3)
    P = cplx(np.random.default_rng(0), 5, 3)
    out = evaluate_many(f, P)
    assert out.shape == (5, 3)
    assert np.allclose(out[2], evaluate(f, P[2]))


# ------------------------------------------------------------ Taylor data

def test_multi_indices_counts():
    for n in range(1, 5):
        for k in range(5):
            idx = multi_indices(n, k)
            assert len(idx) == math.comb(n + k - 1, k)
            assert all(sum(a) == k for a in idx)
            # multinomial weights count the ordered index tuples
            assert sum(multinomial_weight(a) for a in idx) == n ** k


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 100_000))
def test_taylor_exactness(seed):
    # f(x + w) = sum_k D^k f(x)(w, ..., w) / k! exactly for polynomials
    f, x = random_system(seed)
    rng = np.random.default_rng(seed + 1)
    w = 0.3 * cplx(rng, f.nvars)
    ex = TaylorExpansion(f, x)
    total = ex.value().copy()
    for k in range(1, f.degree + 1):
        total += ex.tensor(k).apply_same(w) / math.factorial(k)
    ref = evaluate(f, x + w)
    assert np.allclose(total, ref, rtol=1e-10, atol=1e-10 * (1 + np.abs(ref).max()))


def test_jacobian_and_hessian_by_finite_differences():
    f, x = random_system(11, n=3, degree=3)
    h = 1e-6
    J = jacobian(f, x)
    H = hessian_tensor(f, x)
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd = (evaluate(f, x + e) - evaluate(f, x - e)) / (2 * h)
        assert np.allclose(J[:, j], fd, atol=1e-6)
        fdJ = (jacobian(f, x + e) - jacobian(f, x - e)) / (2 * h)
        assert np.allclose(H[:, :, j], fdJ, atol=1e-5)
    assert np.allclose(H, np.swapaxes(H, 1, 2))


def test_apply_tensor_mixed_equals_expand():
    f, x = random_system(5, n=3, degree=3)
    T = derivative_tensor(f, x, 3)
    rng = np.random.default_rng(1)
    a, b, c = cplx(rng, 3), cplx(rng, 3), cplx(rng, 3)
    want = np.einsum("iabc,a,b,c->i", T.expand(), a, b, c)
    assert np.allclose(apply_tensor(T, [a, b, c]), want)
    assert np.allclose(apply_tensor(T, [a, a, a]), T.apply_same(a))


def test_tensor_beyond_degree_is_zero():
    f = parse_system("vars x, y; x^2 + y; x*y")
    assert derivative_tensor(f, [1, 2], 3).is_zero()


def test_shift_system_only_changes_low_order():
    f, x = random_system(21, n=3, degree=3)
    rng = np.random.default_rng(2)
    c, H = cplx(rng, 3), cplx(rng, 3, 3)
    g = shift_system(f, x, c, H)
    y = x + 0.2 * cplx(rng, 3)
    assert np.allclose(evaluate(g, y), evaluate(f, y) - c - H @ (y - x))
    for k in (2, 3):
        assert np.array_equal(derivative_tensor(g, x, k).values, derivative_tensor(f, x, k).values)


def test_taylor_norm_bound_dominates_samples():
    f, x = random_system(8, n=2, degree=3)
    R = 0.5
    bound = taylor_norm_bound(f, x, R)
    rng = np.random.default_rng(0)
    W = cplx(rng, 2000, 2)
    W *= (R * rng.random(2000) ** 0.25 / np.linalg.norm(W, axis=1))[:, None]
    vals = np.linalg.norm(evaluate_many(f, x + W), axis=1)
    assert vals.max() <= bound


# ------------------------------------------------------------------ kernels

@pytest.mark.skipif(kernels.compiled_backend is None, reason="extension not built")
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 100_000))
def test_backends_agree(seed):
    f, x = random_system(seed)
    py, cy = kernels.python_backend, kernels.compiled_backend
    rng = np.random.default_rng(seed)
    pts = cplx(rng, 4, f.nvars)
    for p in f.polys:
        if p.is_zero():
            continue
        a = py.taylor_shift(p.exps, p.coefs, x, p.degree)
        b = cy.taylor_shift(p.exps, p.coefs, x, p.degree)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13 * np.abs(a).max())
        a = py.eval_points(p.exps, p.coefs, pts, p.degree)
        b = cy.eval_points(p.exps, p.coefs, pts, p.degree)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13 * (1 + np.abs(a).max()))


def test_system_equality_and_scale():
    f = parse_system("vars x; -4*x^2 + 0.5")
    assert f.coef_scale() == 4
    assert isinstance(f - f, PolySystem)
    assert all(p.is_zero() for p in (f - f).polys)
