"""Light-cone quantum channels of a two-site gate and their ergodicity class.

``M₊(ρ) = tr₁[U†(ρ⊗1)U]/q`` and ``M₋(ρ) = tr₂[U†(1⊗ρ)U]/q`` are stored as
``q² x q²`` matrices acting on row-major vectorized operators, so
``M(ρ)_ab = Σ_cd M_{ab,cd} ρ_cd``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dualunitary import linalg

DEFAULT_CLASSIFY_TOL = 1e-8
KERNEL_CUTOFF = 1e-8

ERGODICITY_CLASSES = ("non_interacting", "non_ergodic", "ergodic_nonmixing", "ergodic_mixing")


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    q: int
    direction: str
    matrix: np.ndarray

    def apply(self, rho) -> np.ndarray:
        return linalg.unvec(self.matrix @ linalg.vec(rho), self.q)


@dataclass(frozen=True)
class ErgodicityReport:
    eigenvalues: tuple
    n_unit_one: int
    n_unit_modulus: int
    ergodicity_class: str
    subleading_modulus: float

    def to_dict(self):
        return {
            "class": self.ergodicity_class,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "n_unit_one": self.n_unit_one,
            "n_unit_modulus": self.n_unit_modulus,
            "subleading_modulus": self.subleading_modulus,
        }


@dataclass(frozen=True)
class SVDCheck:
    passed: bool
    max_deviation: float
    singular_values: tuple
    expected: tuple


def build_channel(U, direction: str = "plus") -> QuantumChannel:
    U = linalg.as_matrix(U)
    q = linalg.local_dim(U)
    defect = linalg.unitarity_defect(U)
    if defect > linalg.STRUCTURE_TOL:
        raise ValueError(f"gate is not unitary (defect {defect:.2e})")
    T = U.reshape(q, q, q, q)
    if direction == "plus":
        M = np.einsum("cgea,dgeb->abcd", T.conj(), T) / q
    elif direction == "minus":
        M = np.einsum("gcae,gdbe->abcd", T.conj(), T) / q
    else:
        raise ValueError(f"direction must be 'plus' or 'minus', got {direction!r}")
    return QuantumChannel(q, direction, np.ascontiguousarray(M.reshape(q * q, q * q)))


def sigma_values(J) -> np.ndarray:
    """Diagonal of the core channel, ``σ_ab = (1/q) Σ_f exp(-i(J_af − J_bf))``."""
    J = np.asarray(J, dtype=np.float64)
    q = J.shape[0]
    E = np.exp(-1j * J)
    sigma = E @ E.conj().T / q
    np.fill_diagonal(sigma, 1.0)
    return sigma


def _trivial_index(eigenvalues):
    return int(np.argmin(np.abs(np.asarray(eigenvalues) - 1)))


def subleading_modulus(eigenvalues) -> float:
    """Largest modulus after removing the eigenvalue closest to 1."""
    lam = np.delete(np.asarray(eigenvalues), _trivial_index(eigenvalues))
    return float(np.max(np.abs(lam), initial=0.0))


def classify(M: QuantumChannel, tol: float = DEFAULT_CLASSIFY_TOL) -> ErgodicityReport:
    lam, _ = linalg.general_eigs(M.matrix)
    n_one = int(np.sum(np.abs(lam - 1) <= tol))
    n_mod = int(np.sum(np.abs(np.abs(lam) - 1) <= tol))
    if n_one == lam.size:
        cls = "non_interacting"
    elif n_one > 1:
        cls = "non_ergodic"
    elif n_mod > 1:
        cls = "ergodic_nonmixing"
    else:
        cls = "ergodic_mixing"
    return ErgodicityReport(tuple(complex(z) for z in lam), n_one, n_mod, cls, subleading_modulus(lam))


def conserved_charges(M: QuantumChannel, tol: float = KERNEL_CUTOFF) -> list[np.ndarray]:
    """Trace-orthonormal basis of the fixed-point space of ``M``.

    The first element is always ``1/√q``; the rest span the complement of the
    identity inside ``ker(M − 1)``.
    """
    q = M.q
    d = q * q
    _, s, Vh = np.linalg.svd(M.matrix - np.eye(d))
    null = Vh[s <= tol].conj().T
    ident = linalg.vec(np.eye(q)) / np.sqrt(q)
    rest = null - np.outer(ident, ident.conj() @ null)
    if rest.size:
        u, sv, _ = np.linalg.svd(rest, full_matrices=False)
        rest = u[:, sv > 0.5]
    basis = [ident] + [rest[:, k] for k in range(rest.shape[1])]
    return [linalg.unvec(b, q) for b in basis]


def channel_singular_values(M: QuantumChannel) -> np.ndarray:
    return np.linalg.svd(M.matrix, compute_uv=False)


def channel_svd_check(bundle, tol: float = linalg.STRUCTURE_TOL) -> SVDCheck:
    """Compare channel singular values with ``|σ_ab(J)|`` as multisets."""
    got = np.sort(channel_singular_values(build_channel(bundle.U)))
    expected = np.sort(np.abs(sigma_values(bundle.J)).ravel())
    dev = float(np.max(np.abs(got - expected)))
    return SVDCheck(dev <= tol, dev, tuple(got.tolist()), tuple(expected.tolist()))


def principal_angles(A, B) -> np.ndarray:
    """Principal angles between column spans of ``A`` and ``B``."""
    qa, _ = np.linalg.qr(A)
    qb, _ = np.linalg.qr(B)
    s = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    return np.arccos(np.clip(s, -1.0, 1.0))
