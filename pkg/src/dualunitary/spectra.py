"""Floquet operators of small periodic brickwork circuits and their level statistics."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from dualunitary import kernels, linalg
from dualunitary.gates import GateSpec, sample_gates
from dualunitary.seeding import rng_for

DEFAULT_DIM_BUDGET = 4096
DEGENERACY_SPACING = 1e-12
GUE_MEAN_R = 0.603
POISSON_MEAN_R = 0.386


def dim_budget() -> int:
    """Largest allowed ``q**L``; ``DUALUNITARY_MAX_DIM`` overrides the default."""
    return int(os.environ.get("DUALUNITARY_MAX_DIM", DEFAULT_DIM_BUDGET))


@dataclass(frozen=True, eq=False)
class CircuitSpec:
    """A periodic brickwork chain of ``L`` sites.

    Exactly one of ``gate`` (the same gate on every bond) or ``gate_spec``
    (a fresh sample per bond and realization) is given.
    """

    q: int
    L: int
    gate_spec: GateSpec | None = None
    gate: np.ndarray | None = None
    realizations: int = 1
    seed: int = 0
    budget: int | None = None

    def __post_init__(self):
        if self.L < 2 or self.L % 2:
            raise ValueError(f"L must be even and >= 2, got {self.L}")
        if (self.gate is None) == (self.gate_spec is None):
            raise ValueError("give exactly one of gate or gate_spec")
        if self.gate_spec is not None and self.gate_spec.q != self.q:
            raise ValueError("gate_spec.q does not match q")
        if self.gate is not None and np.shape(self.gate) != (self.q**2, self.q**2):
            raise ValueError(f"gate must be {self.q**2}x{self.q**2}")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        limit = self.budget if self.budget is not None else dim_budget()
        if self.q**self.L > limit:
            raise ValueError(f"q^L = {self.q**self.L} exceeds the dimension budget {limit}")

    @property
    def dim(self) -> int:
        return self.q**self.L


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    phases: np.ndarray
    spacings: np.ndarray
    ratios: np.ndarray
    mean_r: float
    excluded_degeneracies: int


@dataclass(frozen=True)
class EnsembleReport:
    q: int
    L: int
    gate_class: str
    realizations: int
    mean_r: float
    stderr: float
    excluded_degeneracies: int
    per_realization: tuple

    def to_dict(self):
        return {
            "q": self.q,
            "L": self.L,
            "class": self.gate_class,
            "realizations": self.realizations,
            "mean_r": self.mean_r,
            "stderr": self.stderr,
            "excluded_degeneracies": self.excluded_degeneracies,
        }


def layer_bonds(L: int):
    """Bonds ``(left, right)`` of the first and second brickwork layer."""
    first = [(i, i + 1) for i in range(0, L, 2)]
    second = [(i, (i + 1) % L) for i in range(1, L, 2)]
    return first, second


def embed_gate(U, q: int, L: int, i: int, j: int) -> np.ndarray:
    """``U`` acting on sites ``(i, j)`` (left leg ``i``) of an ``L``-site chain."""
    return kernels.apply_two_site(np.eye(q**L, dtype=np.complex128), U, q, L, i, j)


def translation_permutation(q: int, L: int) -> np.ndarray:
    """Unitary ``T`` moving the state of site ``x`` to site ``x+1 mod L``."""
    D = q**L
    idx = np.arange(D)
    digits = (idx[:, None] // q ** np.arange(L - 1, -1, -1)) % q
    shifted = np.roll(digits, 1, axis=1)
    target = shifted @ (q ** np.arange(L - 1, -1, -1))
    T = np.zeros((D, D))
    T[target, idx] = 1.0
    return T


def floquet_from_gates(gates, q: int, L: int) -> np.ndarray:
    """One period ``F = (layer 2)(layer 1)``; ``gates`` lists one gate per bond, layer 1 first."""
    first, second = layer_bonds(L)
    bonds = first + second
    if len(gates) != len(bonds):
        raise ValueError(f"need {len(bonds)} gates for L={L}, got {len(gates)}")
    F = np.eye(q**L, dtype=np.complex128)
    for (i, j), U in zip(bonds, gates):
        F = kernels.apply_two_site(F, U, q, L, i, j)
    return F


def circuit_gates(spec: CircuitSpec, rng: np.random.Generator | None = None):
    """Gate bundles for one realization (or the fixed gate repeated)."""
    n_bonds = spec.L
    if spec.gate is not None:
        return [np.asarray(spec.gate, dtype=np.complex128)] * n_bonds
    rng = rng_for(spec.seed, "realization") if rng is None else rng
    return sample_gates(spec.gate_spec, n_bonds, rng)


def floquet_operator(spec: CircuitSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    gates = [g if isinstance(g, np.ndarray) else g.U for g in circuit_gates(spec, rng)]
    return floquet_from_gates(gates, spec.q, spec.L)


def _wrap(theta):
    theta = np.angle(np.exp(1j * theta))
    return np.where(theta <= -np.pi, np.pi, theta)


def _cayley_phases(F, alpha):
    # H = i(1 - G)(1 + G)^-1 is Hermitian with eigenvalues tan(θ_G/2) for G = e^{iα}F.
    n = F.shape[0]
    G = np.exp(1j * alpha) * F
    eye = np.eye(n)
    H = 1j * np.linalg.solve((eye + G).T, (eye - G).T).T
    h = np.linalg.eigvalsh((H + H.conj().T) / 2)
    return np.sort(_wrap(2 * np.arctan(h) - alpha))


def eigenphases(F, method: str = "eig") -> np.ndarray:
    """Sorted eigenphases of a unitary in (-π, π].

    ``method="eig"`` takes the arguments of the general eigenvalues.
    ``method="cayley"`` diagonalizes the Hermitian Cayley transform instead,
    which is several times faster for large ``F``; the global phase is
    chosen so that no eigenvalue sits near the transform's pole at -1.
    """
    F = linalg.as_matrix(F)
    if method == "eig":
        lam = linalg.general_eigvals(F)
        lam = lam / np.abs(lam)
        return np.sort(_wrap(np.arctan2(lam.imag, lam.real)))
    if method != "cayley":
        raise ValueError(f"method must be 'eig' or 'cayley', got {method!r}")
    defect = linalg.unitarity_defect(F)
    if defect > 1e-8:
        raise ValueError(f"Cayley eigenphases need a unitary input (defect {defect:.2e})")
    theta = _cayley_phases(F, 0.0)
    if np.min(np.pi - np.abs(theta)) < 1e-3:
        gaps = np.append(np.diff(theta), theta[0] + 2 * np.pi - theta[-1])
        k = int(np.argmax(gaps))
        mid = theta[k] + gaps[k] / 2
        theta = _cayley_phases(F, np.pi - mid)
    return theta


def r_statistics(F, min_spacing: float = DEGENERACY_SPACING, method: str = "eig") -> SpectrumReport:
    theta = eigenphases(F, method)
    ratios, spacings, excluded = kernels.spacing_ratios(theta, min_spacing)
    mean_r = float(np.mean(ratios)) if ratios.size else float("nan")
    return SpectrumReport(theta, spacings, ratios, mean_r, int(excluded))


def ensemble_mean_r(spec: CircuitSpec, method: str = "eig") -> EnsembleReport:
    """Mean ``<r>`` over independent realizations, each from its own seed stream."""
    per = []
    excluded = 0
    for k in range(spec.realizations):
        F = floquet_operator(spec, rng_for(spec.seed, "realization", k))
        rep = r_statistics(F, method=method)
        per.append(rep.mean_r)
        excluded += rep.excluded_degeneracies
    arr = np.asarray(per)
    stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else float("nan")
    cls = spec.gate_spec.gate_class if spec.gate_spec is not None else "fixed"
    return EnsembleReport(spec.q, spec.L, cls, spec.realizations, float(arr.mean()), stderr, excluded, tuple(per))


def sublattice_charge(c, q: int, L: int, offset: int) -> np.ndarray:
    """``Q = Σ_x c(x)`` over sites ``x ≡ offset (mod 2)``."""
    c = linalg.as_matrix(c)
    Q = np.zeros((q**L, q**L), dtype=np.complex128)
    for x in range(offset % 2, L, 2):
        Q += np.kron(np.kron(np.eye(q**x), c), np.eye(q ** (L - x - 1)))
    return Q


def charge_commutator(F, c, offset: int) -> float:
    """``‖[Q, F]‖_max`` for the sublattice charge ``Q`` built from ``c``."""
    F = linalg.as_matrix(F)
    q = np.asarray(c).shape[0]
    L = int(round(np.log(F.shape[0]) / np.log(q)))
    if q**L != F.shape[0]:
        raise ValueError("F dimension is not a power of the charge dimension")
    Q = sublattice_charge(c, q, L, offset)
    return float(np.max(np.abs(Q @ F - F @ Q)))
