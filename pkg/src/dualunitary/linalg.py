"""Dense complex linear algebra and the structural operations on two-site gates.

Conventions used throughout the package:

* A two-site gate is a ``q**2 x q**2`` complex array whose composite row
  index ``(a, b)`` is ``a*q + b`` (row-major), so ``U[a*q+b, c*q+d]`` is
  ``U_{ab,cd}``.
* Operators on one site are vectorized row-major, ``vec(X)[a*q+b] = X[a, b]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

import numpy as np

STRUCTURE_TOL = 1e-10
EIG_RESIDUAL_TOL = 1e-8


class EigenConvergenceError(np.linalg.LinAlgError):
    """Eigen-decomposition failed or returned pairs with excessive residuals.

    ``eigenvalues`` and ``eigenvectors`` hold whatever partial result exists
    (``None`` if the solver produced nothing).
    """

    def __init__(self, message, eigenvalues=None, eigenvectors=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors


@dataclass(frozen=True)
class GateReport:
    unitary: bool
    dual_unitary: bool
    max_defect: float
    unitary_defect: float
    dual_defect: float

    def to_dict(self):
        return {
            "unitary": self.unitary,
            "dual_unitary": self.dual_unitary,
            "max_defect": self.max_defect,
            "unitary_defect": self.unitary_defect,
            "dual_defect": self.dual_defect,
        }


def as_matrix(A) -> np.ndarray:
    """Return ``A`` as a finite 2-d complex128 array."""
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def local_dim(U) -> int:
    """Local dimension q of a ``q**2 x q**2`` two-site operator."""
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"two-site operator must be square, got shape {U.shape}")
    q = isqrt(U.shape[0])
    if q * q != U.shape[0] or q < 1:
        raise ValueError(f"dimension {U.shape[0]} is not a perfect square")
    return q


def kron(A, B) -> np.ndarray:
    """Kronecker product with ``(A⊗B)[a*p+b, c*r+d] = A[a,c] B[b,d]`` for ``B`` of shape p×r."""
    A = as_matrix(A)
    B = as_matrix(B)
    m, n = A.shape
    p, r = B.shape
    return (A[:, None, :, None] * B[None, :, None, :]).reshape(m * p, n * r)


def swap_gate(q: int) -> np.ndarray:
    """SWAP on two q-level sites, ``S_{ab,cd} = δ_ad δ_bc``."""
    S = np.zeros((q * q, q * q), dtype=np.complex128)
    for a in range(q):
        for b in range(q):
            S[a * q + b, b * q + a] = 1.0
    return S


def dual_reshuffle(U) -> np.ndarray:
    """Space-time dual ``Ũ_{ab,cd} = U_{db,ca}``. Applying it twice is the identity."""
    U = np.asarray(U, dtype=np.complex128)
    q = local_dim(U)
    T = U.reshape(q, q, q, q)
    return np.ascontiguousarray(np.einsum("dbca->abcd", T)).reshape(q * q, q * q)


def partial_trace(X, site: str = "first") -> np.ndarray:
    """Trace out one site of a ``q**2 x q**2`` operator.

    ``site="first"`` gives ``Y_bd = Σ_a X_{(a,b),(a,d)}``; ``site="second"``
    gives ``Y_ac = Σ_b X_{(a,b),(c,b)}``.
    """
    X = np.asarray(X, dtype=np.complex128)
    q = local_dim(X)
    T = X.reshape(q, q, q, q)
    if site == "first":
        return np.einsum("abad->bd", T)
    if site == "second":
        return np.einsum("abcb->ac", T)
    raise ValueError(f"site must be 'first' or 'second', got {site!r}")


def _identity_defects(A):
    n = A.shape[0]
    eye = np.eye(n)
    return max(
        float(np.max(np.abs(A @ A.conj().T - eye))),
        float(np.max(np.abs(A.conj().T @ A - eye))),
    )


def unitarity_defect(A) -> float:
    """``max(‖AA†−1‖_max, ‖A†A−1‖_max)``."""
    return _identity_defects(as_matrix(A))


def validate_gate(U, tol: float = STRUCTURE_TOL) -> GateReport:
    """Check unitarity of ``U`` and of its dual in the max-norm."""
    U = as_matrix(U)
    q = local_dim(U)
    if q < 2:
        raise ValueError("local dimension must be at least 2")
    du = _identity_defects(U)
    dd = _identity_defects(dual_reshuffle(U))
    return GateReport(
        unitary=du <= tol,
        dual_unitary=dd <= tol,
        max_defect=max(du, dd),
        unitary_defect=du,
        dual_defect=dd,
    )


def _sort_spectrum(w):
    # Group moduli so round-off does not break ties between equal-modulus values.
    mod = np.round(np.abs(w), 10)
    phase = np.angle(w)
    phase = np.where(phase <= -np.pi + 1e-12, np.pi, phase)
    return np.lexsort((-phase, -mod))


def sort_eigenvalues(w) -> np.ndarray:
    """Descending modulus, ties broken by descending phase in (-π, π]."""
    w = np.asarray(w, dtype=np.complex128)
    return w[_sort_spectrum(w)]


def general_eigs(M, residual_tol: float = EIG_RESIDUAL_TOL):
    """Eigenpairs of a general complex square matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors as columns,
    sorted by descending modulus and then descending phase. Every pair is
    checked against ``‖Mv − λv‖₂ ≤ residual_tol·‖M‖₂``.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"matrix must be square, got shape {M.shape}")
    try:
        w, V = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"eigensolver did not converge: {exc}") from exc
    order = _sort_spectrum(w)
    w, V = w[order], V[:, order]
    scale = max(np.linalg.norm(M, 2), np.finfo(float).tiny)
    residuals = np.linalg.norm(M @ V - V * w, axis=0)
    bad = residuals > residual_tol * scale
    if np.any(bad):
        raise EigenConvergenceError(
            f"{int(bad.sum())} eigenpairs exceed residual tolerance "
            f"(worst {residuals.max() / scale:.2e} relative)",
            eigenvalues=w,
            eigenvectors=V,
        )
    return w, V


def general_eigvals(M) -> np.ndarray:
    """Eigenvalues only, in the same order as :func:`general_eigs`."""
    M = as_matrix(M)
    try:
        w = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"eigensolver did not converge: {exc}") from exc
    return sort_eigenvalues(w)


def is_hermitian(W, tol: float = STRUCTURE_TOL) -> bool:
    W = np.asarray(W)
    return W.ndim == 2 and W.shape[0] == W.shape[1] and float(np.max(np.abs(W - W.conj().T), initial=0.0)) <= tol


def hermitian_phase_exp(W, s: float) -> np.ndarray:
    """``exp(i s W)`` for Hermitian ``W`` via its spectral decomposition."""
    W = as_matrix(W)
    if not is_hermitian(W):
        raise ValueError("W must be Hermitian to within 1e-10")
    w, P = np.linalg.eigh((W + W.conj().T) / 2)
    return (P * np.exp(1j * s * w)) @ P.conj().T


def vec(X) -> np.ndarray:
    """Row-major vectorization of a one-site operator."""
    return np.asarray(X, dtype=np.complex128).reshape(-1)


def unvec(v, q: int) -> np.ndarray:
    return np.asarray(v, dtype=np.complex128).reshape(q, q)
