"""Operators, gamma bounds, the universal constant and the certification tests.

Conventions: ``<a, b> = b^H a`` (conjugate-linear in the second slot) and
``Pi_v z = <z, v> v`` for unit ``v``, so ``Pi_v = v v^H``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numlin import (
    DEFAULT_RANK_TOL,
    KernelFrame,
    SingularMatrixError,
    inv_norm,
    least_squares_residual,
    numerical_kernel,
    op_norm,
    random_orthonormal_kernel_basis,
    relative_sigma_min,
    singular_values,
)
from .polyexpr import (
    PolySystem,
    TaylorExpansion,
    evaluate,
    evaluate_many,
    jacobian,
    taylor_norm_bound,
)

DEFAULT_RES_TOL = 1e-6
LSQ_REL_TOL = 1e-8
D_SCAN_STEP = 1e-3
D_BISECT_TOL = 1e-14


class SingularOperator(ValueError):
    pass


class NotSimpleMultiple(ValueError):
    pass


class OutOfBall(ValueError):
    pass


class RadiusOutOfRange(ValueError):
    pass


class NoRoot(ValueError):
    pass


# ------------------------------------------------------------------ frames

def jacobian_frame(f: PolySystem, x, rank_tol: float = DEFAULT_RANK_TOL, seed=None) -> KernelFrame:
    """Numerical kernel of ``Df(x)``, mixed by a seeded random unitary.

    The rank threshold is relative to ``max(sigma_max(Df(x)), coef_scale(f))``
    so that a Jacobian which is uniformly tiny at an approximate root still
    counts as singular.
    """
    J = jacobian(f, x)
    frame = numerical_kernel(J, rank_tol, scale=f.coef_scale())
    if seed is not None and frame.kappa >= 1:
        frame = random_orthonormal_kernel_basis(frame, seed)
    return frame


# --------------------------------------------------------------- operators

def _hessian_slices(hess: np.ndarray, frame: KernelFrame):
    """``M_i = D^2 f(x)(v_i, .)`` as ``n x n`` matrices."""
    return [np.einsum("ijk,j->ik", hess, v) for v in frame.vectors()]


def assemble_operator_A_alpha(f: PolySystem, x, frame: KernelFrame, alpha, *,
                              expansion: TaylorExpansion | None = None) -> np.ndarray:
    """``Df(x) + sum_i D^2 f(x)(alpha_i v_i, Pi_{v_i} .)``."""
    ex = expansion if expansion is not None else TaylorExpansion(f, x)
    J = _jac_from(ex)
    alpha = np.asarray(alpha, dtype=np.complex128).ravel()
    if alpha.shape[0] != frame.kappa:
        raise ValueError("alpha needs one entry per kernel vector")
    if frame.kappa == 0:
        return J
    hess = ex.tensor(2).expand()
    A = J.copy()
    for a, M, v in zip(alpha, _hessian_slices(hess, frame), frame.vectors()):
        A += a * (M @ np.outer(v, v.conj()))
    return A


def _jac_from(ex: TaylorExpansion) -> np.ndarray:
    t = ex.tensor(1)
    J = np.zeros((t.neqs, t.nvars), dtype=np.complex128)
    for col, a in enumerate(t.indices):
        J[:, a.index(1)] = t.values[:, col]
    return J


def assemble_operator_A(f: PolySystem, x, frame: KernelFrame, **kw) -> np.ndarray:
    """The matrix of ``Df(x) + sum_i 1/2 D^2 f(x)(v_i, Pi_{v_i} .)``."""
    return assemble_operator_A_alpha(f, x, frame, np.full(frame.kappa, 0.5), **kw)


def assemble_operator_H(f: PolySystem, x, frame: KernelFrame) -> np.ndarray:
    """``H v_i = Df(x) v_i`` and ``H z = 0`` on the complement."""
    J = jacobian(f, x)
    return J @ (frame.V1 @ frame.V1.conj().T)


def operator_A_alpha(f: PolySystem, x, frame: KernelFrame, alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=np.complex128)
    if np.any(alpha == 0):
        import warnings

        warnings.warn("operator_A_alpha: nonsingularity needs every alpha_i != 0", stacklevel=2)
    return assemble_operator_A_alpha(f, x, frame, alpha)


@dataclass(frozen=True)
class CertOperators:
    A: np.ndarray
    H: np.ndarray
    AmH: np.ndarray
    frame: KernelFrame
    inv_norm_A: float
    inv_norm_AmH: float
    norm_H: float


def operator_A(f: PolySystem, x, frame: KernelFrame, rank_tol: float = DEFAULT_RANK_TOL) -> CertOperators:
    """Assemble ``A``, ``H`` and ``A - H`` with their norms.

    Raises :class:`SingularOperator` when ``A`` or ``A - H`` has relative
    ``sigma_min`` at or below ``rank_tol``.
    """
    ex = TaylorExpansion(f, x)
    A = assemble_operator_A(f, x, frame, expansion=ex)
    H = _jac_from(ex) @ (frame.V1 @ frame.V1.conj().T)
    AmH = A - H
    for name, M in (("A", A), ("A-H", AmH)):
        rel = relative_sigma_min(M, f.coef_scale())
        if rel <= rank_tol:
            raise SingularOperator(f"operator {name} is numerically singular (relative sigma_min {rel:.3e})")
    try:
        ia, iamh = inv_norm(A), inv_norm(AmH)
    except SingularMatrixError as exc:
        raise SingularOperator(str(exc)) from exc
    return CertOperators(A, H, AmH, frame, ia, iamh, op_norm(H))


# ------------------------------------------------------------------- gamma

@dataclass(frozen=True)
class GammaBound:
    """``gamma = max(1, max_k bound_k^(1/(k-1)))`` with ``bound_k`` a certified
    upper bound of ``|op^{-1} D^k f(x)/k!|``."""

    per_k: list
    gamma: float
    operator_used: str
    source: str = "internal"


def gamma_bound(f: PolySystem, x, ops: CertOperators, which: str = "A") -> GammaBound:
    op = {"A": ops.A, "AmH": ops.AmH}[which]
    ex = TaylorExpansion(f, x)
    try:
        s = singular_values(op)
        if s[-1] <= 0:
            raise SingularMatrixError("zero singular value")
    except SingularMatrixError as exc:
        raise SingularOperator(str(exc)) from exc
    per_k = []
    gamma = 1.0
    for k in range(2, f.degree + 1):
        T = ex.tensor(k)
        Y = np.linalg.solve(op, T.values / math.factorial(k))
        col = np.sum(np.abs(Y) ** 2, axis=0)
        bound = float(np.sqrt(np.dot(T.weights, col)))
        root = bound ** (1.0 / (k - 1))
        per_k.append((k, bound, root))
        gamma = max(gamma, root)
    return GammaBound(per_k, gamma, which)


def overridden_gamma(value: float, which: str = "A") -> GammaBound:
    if not value >= 1:
        raise ValueError("a gamma bound must be >= 1")
    return GammaBound([], float(value), which, source="override")


def sampled_gamma_lower_bound(f: PolySystem, x, op, k: int, samples: int = 10_000, seed=0) -> float:
    """Monte-Carlo lower bound of ``|op^{-1} D^k f(x)/k!|`` over unit directions."""
    rng = np.random.default_rng(seed)
    n = f.nvars
    W = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    T = TaylorExpansion(f, x).tensor(k)
    vals = T.apply_same(W) / math.factorial(k)
    Y = np.linalg.solve(op, vals.T)
    return float(np.max(np.linalg.norm(Y, axis=0)))


# ------------------------------------------------------- universal constant

def h_kappa(d: float, kappa: int) -> float:
    """Scalar function whose first root on ``(0, 1)`` is the universal constant."""
    s = math.sqrt(1.0 - d * d)
    return s - (kappa + 1) * kappa * d * s - kappa * d * d - d


def h_kappa2(d: float, kappa: int) -> float:
    """Variant with a ``kappa^2 d^2`` term in place of ``kappa d^2``."""
    s = math.sqrt(1.0 - d * d)
    return s - (kappa + 1) * kappa * d * s - kappa * kappa * d * d - d


_H_VARIANTS = {"kappa": h_kappa, "kappa2": h_kappa2}


@dataclass(frozen=True)
class UniversalConstant:
    kappa: int
    d: float
    residual: float
    variant: str = "kappa"

    def theta_sin(self, gamma: float) -> float:
        return self.d / gamma


def universal_d(kappa: int, variant: str = "kappa") -> UniversalConstant:
    """Smallest positive root of ``h(d) = 0`` on ``(0, 1)``.

    Scans with step ``1e-3`` for the first sign change, then bisects to
    ``1e-14``.  The lower bracket end is returned, so ``h(d) > 0`` and ``d``
    never exceeds the true root.
    """
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    h = _H_VARIANTS[variant]
    lo = 0.0
    hi = None
    steps = int(round(1.0 / D_SCAN_STEP))
    for j in range(1, steps):
        t = j * D_SCAN_STEP
        if h(t, kappa) <= 0:
            hi = t
            break
        lo = t
    if hi is None:
        raise NoRoot(f"no sign change of h on (0, 1) for kappa={kappa}")
    while hi - lo > D_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if h(mid, kappa) > 0:
            lo = mid
        else:
            hi = mid
    return UniversalConstant(kappa, lo, abs(h(lo, kappa)), variant)


# ------------------------------------------------- exact-root bounds

def _require_simple_multiple(f: PolySystem, x, seed, rank_tol, res_tol):
    if not f.is_square():
        raise ValueError("certification needs a square system")
    res = float(np.linalg.norm(evaluate(f, x)))
    if res > res_tol:
        raise NotSimpleMultiple(f"|f(x)| = {res:.3e} exceeds res_tol; x is not a root")
    frame = jacobian_frame(f, x, rank_tol, seed)
    if frame.kappa == 0:
        raise NotSimpleMultiple("Df(x) is invertible: x is a regular root")
    try:
        ops = operator_A(f, x, frame, rank_tol)
    except SingularOperator as exc:
        raise NotSimpleMultiple(f"x is not a simple multiple root: {exc}") from exc
    return frame, ops


@dataclass(frozen=True)
class SeparationResult:
    radius: float
    kappa: int
    gamma: GammaBound
    d: UniversalConstant
    inv_norm_A: float
    seed: int | None


def separation_analysis(f: PolySystem, x, seed=0, rank_tol: float = DEFAULT_RANK_TOL,
                        res_tol: float = DEFAULT_RES_TOL, d_variant: str = "kappa",
                        gamma_override: float | None = None) -> SeparationResult:
    frame, ops = _require_simple_multiple(f, x, seed, rank_tol, res_tol)
    g = overridden_gamma(gamma_override) if gamma_override is not None else gamma_bound(f, x, ops, "A")
    uc = universal_d(frame.kappa, d_variant)
    return SeparationResult(uc.d / (2 * g.gamma ** 2), frame.kappa, g, uc, ops.inv_norm_A, seed)


def separation_bound(f: PolySystem, x, seed=0, **kw) -> float:
    """Radius ``d / (2 gamma^2)`` free of other roots around a simple multiple root."""
    return separation_analysis(f, x, seed, **kw).radius


def residual_lower_bound_check(f: PolySystem, x, y, ops: CertOperators, gamma: float, d: float):
    """Evaluate ``|f(y)| >= d |y-x|^2 / (2 |A^{-1}|)`` inside ``B(x, d/(4 gamma^2))``."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    r = float(np.linalg.norm(y - x))
    R = d / (4 * gamma ** 2)
    if r > R * (1 + 1e-12):
        raise OutOfBall(f"|y - x| = {r:.3e} exceeds d/(4 gamma^2) = {R:.3e}")
    lhs = float(np.linalg.norm(evaluate(f, y)))
    rhs = d * r * r / (2 * ops.inv_norm_A)
    return lhs >= rhs, lhs, rhs


@dataclass(frozen=True)
class ClusterResult:
    verdict: str
    dR_bound: float
    threshold: float
    R: float
    zero_count: int
    zero_count_kind: str


def cluster_criterion(f: PolySystem, g: PolySystem, x, R: float, seed=0, mu: int | None = None,
                      rank_tol: float = DEFAULT_RANK_TOL, res_tol: float = DEFAULT_RES_TOL,
                      gamma_override: float | None = None) -> ClusterResult:
    """Perturbation test: ``d_R(f, g) < d R^2 / (2 |A^{-1}|)`` certifies the cluster of ``g``."""
    frame, ops = _require_simple_multiple(f, x, seed, rank_tol, res_tol)
    gam = overridden_gamma(gamma_override) if gamma_override is not None else gamma_bound(f, x, ops, "A")
    d = universal_d(frame.kappa).d
    rmax = d / (4 * gam.gamma ** 2)
    if not 0 < R <= rmax:
        raise RadiusOutOfRange(f"R must lie in (0, {rmax:.6e}]")
    dR = taylor_norm_bound(f - g, x, R)
    threshold = d * R * R / (2 * ops.inv_norm_A)
    verdict = "Certified" if dR < threshold else "NotCertified"
    if mu is not None:
        return ClusterResult(verdict, dR, threshold, R, int(mu), "multiplicity")
    return ClusterResult(verdict, dR, threshold, R, 2 ** frame.kappa, "lower_bound")


# ------------------------------------------------- approximate roots

@dataclass
class CertReport:
    verdict: str
    reason: str
    kappa: int
    gamma: float | None = None
    gamma_source: str | None = None
    gamma_per_k: list = field(default_factory=list)
    d: float | None = None
    d_variant: str = "kappa"
    radius_separation: float | None = None
    radius_cluster: float | None = None
    lhs: float | None = None
    rhs: float | None = None
    residual_norm: float | None = None
    norm_H: float | None = None
    inv_norm_AmH: float | None = None
    zero_count_lower_bound: int | None = None
    sigma_complement: float | None = None
    sigma_complement_tol: float | None = None
    lsq_residuals: list = field(default_factory=list)
    lsq_tols: list = field(default_factory=list)
    jacobian_sigma: list = field(default_factory=list)
    seed: int | None = None
    rank_tol: float = DEFAULT_RANK_TOL


def certify_cluster(f: PolySystem, x, seed=0, rank_tol: float = DEFAULT_RANK_TOL,
                    d_variant: str = "kappa", gamma_override: float | None = None) -> CertReport:
    """Check ``|f(x)| + |H| d/(4g^2) < d^3 / (32 g^4 |(A-H)^{-1}|)``.

    On success ``f`` has at least ``2^kappa`` zeros, counting multiplicity, in
    ``B(x, d/(4 g^2))``.  ``g`` is an upper bound of the gamma built on
    ``A - H``; the inequality only gets harder as ``g`` grows, so using the
    bound is conservative.
    """
    if not f.is_square():
        raise ValueError("certification needs a square system")
    x = np.asarray(x, dtype=np.complex128)
    residual = float(np.linalg.norm(evaluate(f, x)))
    frame = jacobian_frame(f, x, rank_tol, seed)
    rep = CertReport("PreconditionFailed", "", frame.kappa, residual_norm=residual, seed=seed,
                     rank_tol=rank_tol, d_variant=d_variant, jacobian_sigma=list(map(float, frame.sigma)))
    if frame.kappa == 0:
        rep.reason = "Df(x) has trivial numerical kernel (kappa = 0); the criterion needs kappa >= 1"
        return rep
    ex = TaylorExpansion(f, x)
    J = _jac_from(ex)
    hess = ex.tensor(2).expand()
    JV2 = J @ frame.V2
    ref = max(float(frame.sigma[0]) if frame.sigma.size else 0.0, f.coef_scale())
    rep.sigma_complement_tol = rank_tol * ref
    s2 = singular_values(JV2)
    rep.sigma_complement = float(s2[-1]) if s2.size else math.inf
    ok = rep.sigma_complement > rep.sigma_complement_tol
    for v in frame.vectors():
        q = np.einsum("ijk,j,k->i", hess, v, v)
        rep.lsq_residuals.append(least_squares_residual(JV2, q))
        rep.lsq_tols.append(LSQ_REL_TOL * float(np.linalg.norm(q)))
    ok = ok and all(r > t for r, t in zip(rep.lsq_residuals, rep.lsq_tols))
    if not ok:
        rep.reason = "kernel frame preconditions fail (rank of Df on the complement or D^2 f(v_i,v_i) in its image)"
        return rep
    try:
        ops = operator_A(f, x, frame, rank_tol)
    except SingularOperator as exc:
        rep.reason = str(exc)
        return rep
    if gamma_override is not None:
        gam = overridden_gamma(gamma_override, "AmH")
    else:
        gam = gamma_bound(f, x, ops, "AmH")
    uc = universal_d(frame.kappa, d_variant)
    g, d = gam.gamma, uc.d
    rep.gamma, rep.gamma_source, rep.gamma_per_k = g, gam.source, [list(t) for t in gam.per_k]
    rep.d = d
    rep.radius_separation = d / (2 * g ** 2)
    rep.radius_cluster = d / (4 * g ** 2)
    rep.norm_H = ops.norm_H
    rep.inv_norm_AmH = ops.inv_norm_AmH
    rep.lhs = residual + ops.norm_H * d / (4 * g ** 2)
    rep.rhs = d ** 3 / (32 * g ** 4 * ops.inv_norm_AmH)
    rep.zero_count_lower_bound = 2 ** frame.kappa
    if rep.lhs < rep.rhs:
        rep.verdict, rep.reason = "Certified", f"at least {2 ** frame.kappa} zeros in B(x, d/(4 gamma^2))"
    else:
        rep.verdict, rep.reason = "NotCertified", "lhs >= rhs"
    return rep


# ------------------------------------------------ residual inequality suite

def angle(a, b) -> float:
    """``arccos(|<a,b>| / (|a| |b|))`` with the cosine clamped to ``[0, 1]``."""
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return math.pi / 2
    c = abs(np.vdot(b, a)) / (na * nb)
    return math.acos(min(1.0, max(0.0, float(c))))


@dataclass(frozen=True)
class Decomposition:
    alpha: np.ndarray
    w_hat: np.ndarray
    phi: float
    phis: np.ndarray


def decompose(w, frame: KernelFrame) -> Decomposition:
    """``w = w_hat + sum alpha_i v_i`` with ``alpha_i = <w, v_i>`` and the angles."""
    w = np.asarray(w, dtype=np.complex128)
    alpha = frame.V1.conj().T @ w
    w_hat = w - frame.V1 @ alpha
    phi = angle(w - w_hat, w)
    phis = np.array([angle(v, w) for v in frame.vectors()])
    return Decomposition(alpha, w_hat, phi, phis)


@dataclass
class InequalityCount:
    applied: int = 0
    violations: int = 0
    worst_margin: float = math.inf

    def record(self, lhs, rhs):
        self.applied += 1
        margin = lhs - rhs
        self.worst_margin = min(self.worst_margin, margin)
        # rounding allowance relative to the magnitudes compared
        if margin < -1e-12 * max(abs(lhs), abs(rhs)):
            self.violations += 1


@dataclass
class ResidualBoundReport:
    samples: int
    gamma: float
    d: float
    theta: float
    kappa: int
    far_angle_quadratic: InequalityCount = field(default_factory=InequalityCount)
    min_coefficient: InequalityCount = field(default_factory=InequalityCount)
    far_angle: InequalityCount = field(default_factory=InequalityCount)
    near_kernel: InequalityCount = field(default_factory=InequalityCount)
    min_coefficient_excluded: int = 0
    pythagoras_max_err: float = 0.0

    @property
    def violations(self) -> int:
        return sum(c.violations for c in (self.far_angle_quadratic, self.min_coefficient, self.far_angle, self.near_kernel))


def residual_lower_bounds(fy_solved_norm: float, w, frame: KernelFrame, gamma: float, d: float):
    """Residual lower bounds for one displacement ``w``, keyed by regime.

    Returns a dict with the applicable ``(lhs, rhs)`` pairs.
    """
    w = np.asarray(w, dtype=np.complex128)
    r = float(np.linalg.norm(w))
    kappa = frame.kappa
    dec = decompose(w, frame)
    sin_t = d / gamma
    theta = math.asin(sin_t)
    lhs = fy_solved_norm
    out = {}
    if dec.phi >= theta:
        out["far_angle_quadratic"] = (lhs, r * sin_t - 2 * gamma * r * r)
        out["far_angle"] = (lhs, 2 * gamma * r * (sin_t / (2 * gamma) - r))
    if dec.phi <= theta:
        out["near_kernel"] = (lhs, 2 * gamma ** 2 * r * r * (sin_t / (2 * gamma) - r))
    amin = float(np.min(np.abs(dec.alpha)))
    if amin > 1e-12 * r:
        sc = float(np.sum(np.sin(dec.phis) * np.cos(dec.phis)))
        s2 = float(np.sum(np.sin(dec.phis) ** 2))
        rhs3 = (r * amin - (kappa + 1) * gamma * r * r * sc - gamma * r * r * s2
                - 2 * gamma ** 2 * r ** 3)
        out["min_coefficient"] = (lhs, rhs3)
    return out, dec


def residual_bound_suite(f: PolySystem, x, samples: int = 1000, seed=0, rank_tol: float = DEFAULT_RANK_TOL,
                res_tol: float = DEFAULT_RES_TOL, gamma_override: float | None = None,
                frame: KernelFrame | None = None) -> ResidualBoundReport:
    """Sample ``w`` with ``gamma |w| <= 1/2`` and test the residual lower bounds at ``y = x + w``.

    Radii are log-uniform over three decades below ``1/(2 gamma)`` so both
    the quadratic and the cubic regime are exercised.  Samples with some
    ``alpha_i = 0`` are excluded from the ``min |alpha_i|`` bound and counted.
    """
    x = np.asarray(x, dtype=np.complex128)
    ss = np.random.SeedSequence(seed)
    frame_seed, sample_seed = ss.spawn(2)
    if frame is None:
        frame, ops = _require_simple_multiple(f, x, np.random.default_rng(frame_seed), rank_tol, res_tol)
    else:
        ops = operator_A(f, x, frame, rank_tol)
    gam = overridden_gamma(gamma_override) if gamma_override is not None else gamma_bound(f, x, ops, "A")
    gamma = gam.gamma
    d = universal_d(frame.kappa).d
    rep = ResidualBoundReport(samples, gamma, d, math.asin(d / gamma), frame.kappa)
    rng = np.random.default_rng(sample_seed)
    n = f.nvars
    W = rng.standard_normal((samples, n)) + 1j * rng.standard_normal((samples, n))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    radii = (0.5 / gamma) * 10.0 ** (-3.0 * rng.random(samples))
    W *= radii[:, None]
    FY = evaluate_many(f, x[None, :] + W)
    solved = np.linalg.solve(ops.A, FY.T).T
    for w, s in zip(W, solved):
        pairs, dec = residual_lower_bounds(float(np.linalg.norm(s)), w, frame, gamma, d)
        cos2 = math.cos(dec.phi) ** 2
        rep.pythagoras_max_err = max(rep.pythagoras_max_err,
                                     abs(cos2 - float(np.sum(np.cos(dec.phis) ** 2))))
        if "min_coefficient" not in pairs:
            rep.min_coefficient_excluded += 1
        for key, (lhs, rhs) in pairs.items():
            getattr(rep, key).record(lhs, rhs)
    return rep


def ratio_operator_norm(alpha, beta, n: int) -> float:
    """Spectral norm of ``A_alpha^{-1} A_beta`` at an exact root.

    The product acts as ``beta_i/alpha_i`` on ``v_i`` and as the identity on
    the orthogonal complement, so the ``1`` only enters when ``kappa < n``.
    """
    ratios = np.abs(np.asarray(beta) / np.asarray(alpha))
    top = float(np.max(ratios))
    return max(1.0, top) if ratios.size < n else top


def ratio_operator_norm_error(f: PolySystem, x, frame: KernelFrame, draws: int = 100, seed=0) -> float:
    """Max relative error between ``|A_a^{-1} A_b|`` and :func:`ratio_operator_norm`."""
    rng = np.random.default_rng(seed)
    ex = TaylorExpansion(f, x)
    worst = 0.0
    k = frame.kappa
    for _ in range(draws):
        a = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        b = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        Aa = assemble_operator_A_alpha(f, x, frame, a, expansion=ex)
        Ab = assemble_operator_A_alpha(f, x, frame, b, expansion=ex)
        got = op_norm(np.linalg.solve(Aa, Ab))
        want = ratio_operator_norm(a, b, frame.n)
        worst = max(worst, abs(got - want) / want)
    return worst
