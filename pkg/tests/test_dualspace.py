import numpy as np
import pytest

from singcert.dualspace import (
    MacaulayTooLarge,
    NotStabilized,
    dual_invariants,
    macaulay_matrix,
    macaulay_nullity,
)
from singcert.polyexpr import parse_system
from sysgen import singular_system

X3_YZ = "vars x, y, z; x^3 - y*z; y^3 - x*z; z^3 - x*y;"


def xn_family(n):
    return parse_system(f"vars x, y, z; x^{n} - y*z; y^{n} - x*z; z^{n} - x*y;")


@pytest.mark.parametrize("text, point, breadth, depth, mult", [
    (X3_YZ, [0, 0, 0], 3, 4, 11),
    ("vars x, y; x - 1; y - 1", [1, 1], 0, 0, 1),
    ("vars x, y; x; y^3", [0, 0], 1, 2, 3),
    ("vars x, y; x^2; y^2", [0, 0], 2, 2, 4),
    ("vars x; x^5", [0], 1, 4, 5),
    # shifted root: the invariants are local and translation invariant
    ("vars x, y; (x - 2)^2; y + 1", [2, -1], 1, 1, 2),
])
def test_known_invariants(text, point, breadth, depth, mult):
    inv = dual_invariants(parse_system(text), point)
    assert (inv.breadth, inv.depth, inv.multiplicity) == (breadth, depth, mult)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_xn_family_multiplicity(n):
    assert dual_invariants(xn_family(n), np.zeros(3)).multiplicity == 2 + 3 * n


def test_xn_family_n2_is_not_isolated():
    # the line (t, t, t) solves x^2 = yz, y^2 = xz, z^2 = xy
    with pytest.raises(NotStabilized):
        dual_invariants(xn_family(2), np.zeros(3))


def test_dims_are_monotone_and_plateau():
    inv = dual_invariants(parse_system(X3_YZ), np.zeros(3))
    assert inv.dims == [1, 4, 7, 10, 11, 11]
    assert all(a <= b for a, b in zip(inv.dims, inv.dims[1:]))


def test_order_zero_and_one():
    f = parse_system(X3_YZ)
    assert macaulay_nullity(f, np.zeros(3), 0) == 1
    # nullity at order one is 1 + corank of the Jacobian
    assert macaulay_nullity(f, np.zeros(3), 1) == 4


def test_macaulay_matrix_shape():
    f = parse_system(X3_YZ)
    M = macaulay_matrix(f, np.zeros(3), 2)
    # rows: (1 + 3) shifts times 3 equations; columns: 1 + 3 + 6 functionals
    assert M.shape == (12, 10)


def test_not_stabilized_for_non_isolated_zero():
    f = parse_system("vars x, y; x*y; x^2*y")
    with pytest.raises(NotStabilized) as info:
        dual_invariants(f, [0, 0], kmax=5)
    assert len(info.value.dims) == 6


def test_kmax_too_small():
    with pytest.raises(NotStabilized):
        dual_invariants(parse_system(X3_YZ), np.zeros(3), kmax=2)


def test_order_cap():
    with pytest.raises(MacaulayTooLarge):
        macaulay_matrix(parse_system(X3_YZ), np.zeros(3), 20)


def test_residual_warning(caplog):
    f = parse_system("vars x; x^2")
    with caplog.at_level("WARNING"):
        dual_invariants(f, [0.5])
    assert "res_tol" in caplog.text


@pytest.mark.parametrize("seed", range(6))
def test_multiplicity_at_least_two_to_kappa_random(seed):
    f, x0, kappa = singular_system(seed, n=2, degree=3)
    inv = dual_invariants(f, x0)
    assert inv.breadth == kappa
    assert inv.multiplicity >= 2 ** kappa
