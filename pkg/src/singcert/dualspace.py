"""Local dual space dimensions via Macaulay-matrix nullities.

For order ``k`` the matrix has one column per differential functional
``d^alpha_x`` with ``|alpha| <= k`` and one row per shifted generator
``(y - x)^beta f_i`` with ``|beta| <= k - 1``; the entry is
``d^alpha_x((y - x)^beta f_i)``, which is the Taylor coefficient of ``f_i``
at ``x`` for ``alpha - beta``.  Its nullity is ``dim D^(k)_{f,x}``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .numlin import DEFAULT_RANK_TOL, singular_values
from .polyexpr import PolySystem, TaylorExpansion, evaluate, multi_indices

log = logging.getLogger(__name__)

DEFAULT_RES_TOL = 1e-6
# refuse Macaulay matrices with k * n beyond this
DEFAULT_ORDER_CAP = 48


class NotStabilized(RuntimeError):
    """Dual space dimensions did not plateau by ``kmax``."""

    def __init__(self, dims, kmax):
        super().__init__(f"dual space dimensions {dims} did not stabilise by order {kmax}")
        self.dims = list(dims)
        self.kmax = kmax


class MacaulayTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class DualInvariants:
    breadth: int
    depth: int
    multiplicity: int
    dims: list = field(default_factory=list)

    def as_dict(self):
        return {
            "breadth": self.breadth,
            "depth": self.depth,
            "multiplicity": self.multiplicity,
            "dims": list(self.dims),
        }


def _indices_upto(n, k):
    out = []
    for d in range(k + 1):
        out.extend(multi_indices(n, d))
    return out


def macaulay_matrix(f: PolySystem, x, k: int, order_cap: int = DEFAULT_ORDER_CAP,
                    expansion: TaylorExpansion | None = None) -> np.ndarray:
    if k < 0:
        raise ValueError("order must be non-negative")
    n = f.nvars
    if k * n > order_cap:
        raise MacaulayTooLarge(f"order {k} with {n} variables exceeds the cap k*n <= {order_cap}")
    ex = expansion if expansion is not None else TaylorExpansion(f, x)
    cols = _indices_upto(n, k)
    col_of = {a: j for j, a in enumerate(cols)}
    shifts = _indices_upto(n, k - 1) if k >= 1 else []
    M = np.zeros((len(shifts) * f.neqs, len(cols)), dtype=np.complex128)
    # Taylor support of each generator, trimmed to order k
    support = []
    for i in range(f.neqs):
        items = []
        for d in range(min(k, f.polys[i].degree) + 1):
            for g in multi_indices(n, d):
                c = ex.coefficient(i, g)
                if c != 0:
                    items.append((g, c))
        support.append(items)
    row = 0
    for beta in shifts:
        room = k - sum(beta)
        for i in range(f.neqs):
            for g, c in support[i]:
                if sum(g) <= room:
                    M[row, col_of[tuple(a + b for a, b in zip(g, beta))]] = c
            row += 1
    return M


def macaulay_nullity(f: PolySystem, x, k: int, rank_tol: float = DEFAULT_RANK_TOL,
                     res_tol: float = DEFAULT_RES_TOL, order_cap: int = DEFAULT_ORDER_CAP,
                     expansion: TaylorExpansion | None = None) -> int:
    """Numerical ``dim D^(k)_{f,x}``.

    Singular values count as zero below ``rank_tol * max(sigma_max, coef_scale(f))``,
    the policy of :func:`numlin.numerical_kernel`; at an approximate root the
    low-order blocks can be uniformly tiny and a purely relative test would
    read them as full rank.
    """
    if expansion is None:
        res = float(np.linalg.norm(evaluate(f, x)))
        if res > res_tol:
            log.warning("|f(x)| = %.3e exceeds res_tol %.1e; x may not be a zero", res, res_tol)
    M = macaulay_matrix(f, x, k, order_cap, expansion)
    ncols = M.shape[1]
    if M.shape[0] == 0:
        return ncols
    s = singular_values(M)
    ref = max(float(s[0]), f.coef_scale())
    thresh = rank_tol * ref if ref > 0 else rank_tol
    rank = int(np.sum(s > thresh))
    return ncols - rank


def dual_invariants(f: PolySystem, x, kmax: int = 12, rank_tol: float = DEFAULT_RANK_TOL,
                    res_tol: float = DEFAULT_RES_TOL,
                    order_cap: int = DEFAULT_ORDER_CAP) -> DualInvariants:
    """Breadth, depth and multiplicity from the first plateau of the nullities.

    Raises :class:`NotStabilized` when no plateau appears by ``kmax``, which
    happens for non-isolated zeros or when ``kmax`` is too small.
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    res = float(np.linalg.norm(evaluate(f, x)))
    if res > res_tol:
        log.warning("|f(x)| = %.3e exceeds res_tol %.1e; x may not be a zero", res, res_tol)
    ex = TaylorExpansion(f, x)
    dims = [macaulay_nullity(f, x, 0, rank_tol, res_tol, order_cap, ex)]
    for k in range(1, kmax + 1):
        dims.append(macaulay_nullity(f, x, k, rank_tol, res_tol, order_cap, ex))
        if dims[k] == dims[k - 1]:
            depth = k - 1
            return DualInvariants(dims[1] - dims[0], depth, dims[depth], dims)
    raise NotStabilized(dims, kmax)
