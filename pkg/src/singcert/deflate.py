"""One-step deflation, the characterization matrix and root classification.

The deflated system augments ``f`` with ``Df(y) (V1 lam1 + V2 lam2)`` where
``lam1`` is a fixed random unit vector and ``lam2`` is the new unknown, so a
singular root ``x`` becomes the root ``(x, 0)`` of a system in ``2n - kappa``
variables.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .certify import SingularOperator, jacobian_frame, operator_A
from .numlin import (
    DEFAULT_RANK_TOL,
    KernelFrame,
    haar_unitary,
    relative_sigma_min,
    singular_values,
    svd,
)
from .polyexpr import (
    Polynomial,
    PolySystem,
    TaylorExpansion,
    evaluate,
    jacobian,
)

log = logging.getLogger(__name__)

DEFAULT_RES_TOL = 1e-6
MAX_DEFLATION_STEPS = 5


class RegularRoot(ValueError):
    """Raised when an operation needs a nontrivial kernel but ``Df(x)`` is invertible."""


class Verdict(str, enum.Enum):
    REGULAR = "Regular"
    SIMPLE_MULTIPLE = "SimpleMultiple"
    NOT_SIMPLE = "NotSimple"
    NOT_A_ROOT = "NotARoot"

    def __str__(self):
        return self.value


def random_unit_vector(k: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return z / np.linalg.norm(z)


# ------------------------------------------------------ characterization

@dataclass(frozen=True)
class CharacterizationMatrix:
    B: np.ndarray
    frame: KernelFrame
    det_abs: float
    sigma_min: float
    rel_sigma_min: float

    def full_rank(self, rank_tol: float = DEFAULT_RANK_TOL) -> bool:
        return self.rel_sigma_min > rank_tol


def build_characterization_matrix(f: PolySystem, x, frame: KernelFrame) -> CharacterizationMatrix:
    """``B = [D^2 f(x)(v_1,v_1) ... D^2 f(x)(v_k,v_k)  Df(x) V2]``."""
    if frame.kappa < 1:
        raise RegularRoot("kernel of Df(x) is trivial; the characterization matrix is undefined")
    ex = TaylorExpansion(f, x)
    T2 = ex.tensor(2)
    cols = [T2.apply_same(v) for v in frame.vectors()]
    J = jacobian(f, x)
    B = np.column_stack(cols + [J @ frame.V2]) if frame.V2.shape[1] else np.column_stack(cols)
    s = singular_values(B)
    det_abs = float(abs(np.linalg.det(B)))
    return CharacterizationMatrix(B, frame, det_abs, float(s[-1]), relative_sigma_min(B, f.coef_scale()))


# -------------------------------------------------------------- deflation

def _embed(p: Polynomial, nvars: int) -> Polynomial:
    pad = (0,) * (nvars - p.nvars)
    return Polynomial({e + pad: c for e, c in p.terms.items()}, nvars)


def augmented_system(f: PolySystem, V1: np.ndarray, V2: np.ndarray, lambda1) -> PolySystem:
    """``[f(y); Df(y) (V1 lam1 + V2 lam2)]`` in the variables ``(y, lam2)``.

    Works for rectangular systems; ``V1`` and ``V2`` have ``f.nvars`` rows.
    """
    m = f.nvars
    r = V2.shape[1]
    total = m + r
    base = V1 @ np.asarray(lambda1, dtype=np.complex128)
    direction = []
    for j in range(m):
        terms = {}
        zero = (0,) * total
        if base[j] != 0:
            terms[zero] = complex(base[j])
        for l in range(r):
            if V2[j, l] != 0:
                e = tuple(1 if q == m + l else 0 for q in range(total))
                terms[e] = complex(V2[j, l])
        direction.append(Polynomial(terms, total))
    polys = [_embed(p, total) for p in f.polys]
    for p in f.polys:
        acc = Polynomial({}, total)
        for j in range(m):
            dp = p.partial(j)
            if not dp.is_zero():
                acc = acc + _embed(dp, total) * direction[j]
        polys.append(acc)
    names = tuple(f.varnames) + tuple(f"lam{l + 1}" for l in range(r))
    return PolySystem(tuple(polys), names)


@dataclass(frozen=True)
class DeflationStep:
    g: PolySystem
    lambda1: np.ndarray
    V: np.ndarray
    Dg: np.ndarray
    blocks: tuple
    full_rank: bool
    sigma_min: float
    rel_sigma_min: float
    point: np.ndarray  # the root (x, 0) of g

    def as_summary(self) -> dict:
        return {
            "nvars": self.g.nvars,
            "neqs": self.g.neqs,
            "lambda1": self.lambda1,
            "full_rank": self.full_rank,
            "sigma_min": self.sigma_min,
            "rel_sigma_min": self.rel_sigma_min,
        }


def deflated_jacobian_blocks(f: PolySystem, x, frame: KernelFrame, lambda1):
    """The four blocks of the augmented Jacobian at ``(x, 0)``."""
    ex = TaylorExpansion(f, x)
    J = jacobian(f, x)
    hess = ex.tensor(2).expand() if f.degree >= 2 else np.zeros((f.neqs, f.nvars, f.nvars), complex)
    u = frame.V1 @ np.asarray(lambda1, dtype=np.complex128)
    top_left = J
    top_right = np.zeros((f.neqs, frame.V2.shape[1]), dtype=np.complex128)
    bottom_left = np.einsum("ijk,k->ij", hess, u)
    bottom_right = J @ frame.V2
    return top_left, top_right, bottom_left, bottom_right


def deflate_once(f: PolySystem, x, frame: KernelFrame, seed=0, rank_tol: float = DEFAULT_RANK_TOL,
                 lambda1=None) -> DeflationStep:
    """One deflation step with a seeded random unit ``lambda1``.

    ``lambda1`` may be passed explicitly to reproduce a fixed instance.
    """
    if frame.kappa < 1:
        raise RegularRoot("kernel of Df(x) is trivial; nothing to deflate")
    if lambda1 is None:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        lambda1 = random_unit_vector(frame.kappa, rng)
    lambda1 = np.asarray(lambda1, dtype=np.complex128)
    g = augmented_system(f, frame.V1, frame.V2, lambda1)
    blocks = deflated_jacobian_blocks(f, x, frame, lambda1)
    tl, tr, bl, br = blocks
    Dg = np.block([[tl, tr], [bl, br]])
    rel = relative_sigma_min(Dg, f.coef_scale())
    s = singular_values(Dg)
    point = np.concatenate([np.asarray(x, dtype=np.complex128), np.zeros(frame.V2.shape[1], complex)])
    return DeflationStep(g, lambda1, frame.V, Dg, blocks, rel > rank_tol,
                         float(s[min(Dg.shape) - 1]), rel, point)


# ------------------------------------------------------ equivalence check

@dataclass
class EquivalenceReport:
    kappa: int
    trials: int
    agree: int = 0
    disagree: int = 0
    borderline: int = 0
    b_full: int = 0
    dg_full: int = 0
    records: list = field(default_factory=list)

    @property
    def vacuous(self) -> bool:
        return self.kappa == 0

    @property
    def decided_disagreements(self) -> int:
        """Disagreements outside the borderline band."""
        return sum(1 for r in self.records if not r["agree"] and not r["borderline"])


def _is_borderline(rel: float, rank_tol: float) -> bool:
    return rank_tol / 10 <= rel <= 10 * rank_tol


def one_step_equivalence_check(f: PolySystem, x, trials: int = 20, seed=0,
                               rank_tol: float = DEFAULT_RANK_TOL) -> EquivalenceReport:
    """Compare the full-rank verdicts of ``B`` and of the augmented Jacobian.

    Each trial draws an independent kernel rotation and ``lambda1`` from a
    spawned seed.  A trial is borderline when either relative ``sigma_min``
    lies within a decade of ``rank_tol``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base = jacobian_frame(f, x, rank_tol)
    rep = EquivalenceReport(base.kappa, trials)
    if base.kappa == 0:
        return rep
    for child in np.random.SeedSequence(seed).spawn(trials):
        frame_ss, lam_ss = child.spawn(2)
        Q = haar_unitary(base.kappa, np.random.default_rng(frame_ss))
        frame = KernelFrame(base.kappa, base.V1 @ Q, base.V2, base.sigma, base.tol_used)
        B = build_characterization_matrix(f, x, frame)
        step = deflate_once(f, x, frame, np.random.default_rng(lam_ss), rank_tol)
        b_ok, dg_ok = B.full_rank(rank_tol), step.full_rank
        border = _is_borderline(B.rel_sigma_min, rank_tol) or _is_borderline(step.rel_sigma_min, rank_tol)
        rep.b_full += b_ok
        rep.dg_full += dg_ok
        rep.agree += b_ok == dg_ok
        rep.disagree += b_ok != dg_ok
        rep.borderline += border
        rec = {"b_rel_sigma_min": B.rel_sigma_min, "dg_rel_sigma_min": step.rel_sigma_min,
               "b_full": b_ok, "dg_full": dg_ok, "agree": b_ok == dg_ok, "borderline": border}
        rep.records.append(rec)
        if b_ok != dg_ok or border:
            log.info("one-step trial: %s", rec)
    return rep


# -------------------------------------------------------- classification

def is_simple_multiple(f: PolySystem, x, seed=0, rank_tol: float = DEFAULT_RANK_TOL,
                       res_tol: float = DEFAULT_RES_TOL) -> Verdict:
    """Classify ``x``; isolation of the root is assumed, not verified."""
    if float(np.linalg.norm(evaluate(f, x))) > res_tol:
        return Verdict.NOT_A_ROOT
    frame = jacobian_frame(f, x, rank_tol, seed)
    if frame.kappa == 0:
        return Verdict.REGULAR
    try:
        operator_A(f, x, frame, rank_tol)
    except SingularOperator:
        return Verdict.NOT_SIMPLE
    return Verdict.SIMPLE_MULTIPLE


def _rect_kernel(J: np.ndarray, rank_tol: float, scale: float):
    m = J.shape[1]
    _, s, V = svd(J)
    ref = max(float(s[0]) if s.size else 0.0, scale)
    thresh = rank_tol * ref if ref > 0 else rank_tol
    rank = int(np.sum(s > thresh))
    return V[:, rank:], V[:, :rank], m - rank


def iterated_deflation(f: PolySystem, x, seed=0, rank_tol: float = DEFAULT_RANK_TOL,
                       max_steps: int = MAX_DEFLATION_STEPS) -> int | None:
    """Number of deflation steps until the Jacobian has full column rank.

    Diagnostic only.  Returns ``None`` when ``max_steps`` is not enough.
    """
    rng = np.random.default_rng(seed)
    g, pt = f, np.asarray(x, dtype=np.complex128)
    scale = f.coef_scale()
    for step in range(max_steps + 1):
        V1, V2, kappa = _rect_kernel(jacobian(g, pt), rank_tol, scale)
        if kappa == 0:
            return step
        if step == max_steps:
            break
        lam = random_unit_vector(kappa, rng)
        g = augmented_system(g, V1, V2, lam)
        pt = np.concatenate([pt, np.zeros(V2.shape[1], complex)])
    return None
