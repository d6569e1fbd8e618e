"""Dense complex linear algebra used by every certification formula.

SVD, numerical rank and kernel frames, seeded random unitary mixing, and
norms.  Inverse norms are always ``1/sigma_min``; explicit inverses are
never formed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RANK_TOL = 1e-8
SINGULAR_RTOL = 1e-14


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when ``sigma_min <= SINGULAR_RTOL * sigma_max``."""


def svd(A):
    """``A = U diag(sigma) V^H`` with ``sigma`` descending.

    Returns ``(U, sigma, V)`` where ``V`` (not ``V^H``) holds the right
    singular vectors as columns.
    """
    A = np.asarray(A, dtype=np.complex128)
    try:
        U, s, Vh = np.linalg.svd(A)
    except np.linalg.LinAlgError as exc:  # LAPACK gesdd did not converge
        raise np.linalg.LinAlgError(f"SVD failed to converge: {exc}") from exc
    return U, s, Vh.conj().T


def singular_values(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return np.zeros(0)
    return np.linalg.svd(A, compute_uv=False)


@dataclass(frozen=True)
class KernelFrame:
    """Orthonormal split ``C^n = im V1 (+) im V2`` around a numerical kernel.

    ``sigma`` is the singular value list of the analysed matrix and
    ``tol_used`` the absolute threshold that separated kernel from range.
    """

    kappa: int
    V1: np.ndarray
    V2: np.ndarray
    sigma: np.ndarray
    tol_used: float

    @property
    def n(self) -> int:
        return self.V1.shape[0]

    @property
    def V(self) -> np.ndarray:
        return np.hstack([self.V1, self.V2])

    def vectors(self):
        return [self.V1[:, i] for i in range(self.kappa)]

    @classmethod
    def from_basis(cls, V1, sigma=None, tol_used: float = 0.0) -> "KernelFrame":
        """Frame from explicit orthonormal kernel vectors (columns of ``V1``)."""
        V1 = np.asarray(V1, dtype=np.complex128)
        n, kappa = V1.shape
        gram = V1.conj().T @ V1
        if not np.allclose(gram, np.eye(kappa), atol=1e-12):
            raise ValueError("kernel vectors must be orthonormal")
        if kappa == n:
            V2 = np.zeros((n, 0), dtype=np.complex128)
        else:
            # complement from the full QR of V1
            Q, _ = np.linalg.qr(V1, mode="complete")
            V2 = Q[:, kappa:]
        if sigma is None:
            sigma = np.zeros(0)
        return cls(kappa, V1, V2, np.asarray(sigma, dtype=float), tol_used)


def numerical_kernel(A, tol: float = DEFAULT_RANK_TOL, scale: float = 0.0) -> KernelFrame:
    """Kernel frame of a square matrix by singular value thresholding.

    A singular value counts as zero when ``sigma <= tol * max(sigma_max, scale)``
    (absolute ``tol`` if both are zero).  ``scale`` lets callers supply the
    magnitude of the data a Jacobian came from, so a uniformly tiny Jacobian
    at an approximate singular root is recognised as numerically zero.
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError("numerical_kernel needs a square matrix")
    _, s, V = svd(A)
    ref = max(float(s[0]) if n else 0.0, float(scale))
    thresh = tol * ref if ref > 0 else tol
    kappa = int(np.sum(s <= thresh))
    r = n - kappa
    return KernelFrame(kappa, V[:, r:].copy(), V[:, :r].copy(), s, thresh)


def haar_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``k x k`` unitary from QR of a complex Gaussian."""
    G = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    ph = np.where(np.abs(d) > 0, d / np.abs(d), 1.0)
    return Q * ph


def random_orthonormal_kernel_basis(frame: KernelFrame, seed) -> KernelFrame:
    """Replace ``V1`` by ``V1 Q`` with a seeded Haar unitary ``Q``."""
    if frame.kappa < 1:
        raise ValueError("kernel is trivial")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    Q = haar_unitary(frame.kappa, rng)
    return KernelFrame(frame.kappa, frame.V1 @ Q, frame.V2, frame.sigma, frame.tol_used)


def _check_nonsingular(A) -> np.ndarray:
    s = singular_values(A)
    if s.size == 0 or s[-1] <= SINGULAR_RTOL * s[0] or s[0] == 0:
        raise SingularMatrixError(
            f"matrix is numerically singular (sigma_min={s[-1] if s.size else 0:.3e})"
        )
    return s


def solve(A, b) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    _check_nonsingular(A)
    return np.linalg.solve(A, np.asarray(b, dtype=np.complex128))


def inv_norm(A) -> float:
    """Spectral norm of ``A^{-1}``, i.e. ``1/sigma_min``."""
    s = _check_nonsingular(A)
    return float(1.0 / s[-1])


def op_norm(A) -> float:
    s = singular_values(A)
    return float(s[0]) if s.size else 0.0


def sigma_min(A) -> float:
    s = singular_values(A)
    return float(s[-1]) if s.size else 0.0


def relative_sigma_min(A, scale: float = 0.0) -> float:
    """``sigma_min / max(sigma_max, scale)`` for the full column rank test.

    ``scale`` plays the role it has in :func:`numerical_kernel`: a matrix made
    only of rounding noise is not mistaken for a well-conditioned one.
    Returns 0 for zero matrices.
    """
    A = np.asarray(A, dtype=np.complex128)
    s = singular_values(A)
    ref = max(float(s[0]) if s.size else 0.0, float(scale))
    if s.size == 0 or ref == 0:
        return 0.0
    k = min(A.shape)
    return float(s[k - 1] / ref)


def least_squares_residual(A, b) -> float:
    """``|b - A A^+ b|``: distance from ``b`` to the column space of ``A``."""
    A = np.asarray(A, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128).ravel()
    if A.shape[1] == 0:
        return float(np.linalg.norm(b))
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    return float(np.linalg.norm(b - A @ x))
