"""Dual-unitary gate construction.

Gates are assembled as ``U = (u₊⊗u₋) V[J] (v₋⊗v₊)`` with the entangling core
``V[J]_{ab,cd} = δ_ad δ_bc exp(i J_ab)``. The ergodicity class is selected
by constraining the phase matrix ``J`` and the one-site unitaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from dualunitary import linalg
from dualunitary._io import atomic_write_text
from dualunitary.linalg import kron
from dualunitary.seeding import rng_for

GATE_CLASSES = (
    "ergodic_mixing",
    "non_ergodic",
    "non_ergodic_noncommuting",
    "ergodic_nonmixing",
    "non_interacting",
    "prethermal",
)

_USES_BLOCKS = {"non_ergodic", "non_ergodic_noncommuting", "prethermal"}

# Eigenvalues of generic mixing channels this close to the unit circle are
# treated as a degenerate draw and resampled.
MIXING_REJECTION_GAP = 1e-6
_MAX_REJECTIONS = 100


def normalize_class(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    aliases = {"noncommuting": "non_ergodic_noncommuting", "mixing": "ergodic_mixing", "nonmixing": "ergodic_nonmixing"}
    return aliases.get(key, key)


@dataclass(frozen=True)
class GateSpec:
    """Parameters selecting a gate ensemble.

    ``n`` counts the commuting charges of the block construction, ``m`` the
    number of leading equal rows of ``J`` (non-commuting charges), ``phi``
    offsets those rows from one another (``J[a] = J[0] + a*phi``), ``thetas``
    are the phases of the cyclic shift matrix and ``epsilon`` the strength of
    the prethermal perturbation.
    """

    q: int
    gate_class: str
    n: int = 0
    m: int = 0
    epsilon: float = 0.0
    thetas: tuple | None = None
    phi: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gate_class", normalize_class(self.gate_class))
        if self.thetas is not None:
            object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        cls = self.gate_class
        if cls not in GATE_CLASSES:
            raise ValueError(f"unknown gate class {cls!r}; expected one of {GATE_CLASSES}")
        if self.q < 2:
            raise ValueError(f"local dimension q must be >= 2, got {self.q}")
        if cls in _USES_BLOCKS:
            if self.n == self.q:
                raise ValueError(f"n = q = {self.q} is equivalent to n = q-1; use n = {self.q - 1}")
            if not 1 <= self.n <= self.q - 1:
                raise ValueError(f"class {cls} needs 1 <= n <= q-1, got n={self.n}")
        elif self.n != 0:
            raise ValueError(f"n is not a parameter of class {cls}")
        if cls == "non_ergodic_noncommuting":
            if not 0 <= self.m <= self.n:
                raise ValueError(f"need 0 <= m <= n, got m={self.m}, n={self.n}")
        elif self.m != 0 or self.phi != 0.0:
            raise ValueError(f"m and phi are only parameters of non_ergodic_noncommuting, not {cls}")
        if self.epsilon < 0 or not np.isfinite(self.epsilon):
            raise ValueError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if cls != "prethermal" and self.epsilon != 0.0:
            raise ValueError(f"epsilon is only a parameter of prethermal, not {cls}")
        if self.thetas is not None:
            if cls != "ergodic_nonmixing":
                raise ValueError("thetas are only a parameter of ergodic_nonmixing")
            if len(self.thetas) != self.q:
                raise ValueError(f"need q={self.q} shift phases, got {len(self.thetas)}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def to_dict(self):
        return {
            "q": self.q,
            "class": self.gate_class,
            "n": self.n,
            "m": self.m,
            "epsilon": self.epsilon,
            "thetas": list(self.thetas) if self.thetas is not None else None,
            "phi": self.phi,
            "seed": self.seed,
        }


@dataclass(frozen=True, eq=False)
class GateBundle:
    spec: GateSpec
    U: np.ndarray
    u_plus: np.ndarray
    u_minus: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    J: np.ndarray
    w: np.ndarray
    analytic_charges: tuple | None = None
    W_u: np.ndarray | None = field(default=None, repr=False)
    W_v: np.ndarray | None = field(default=None, repr=False)

    @property
    def q(self) -> int:
        return self.spec.q

    def reassemble(self) -> np.ndarray:
        return compose(self.u_plus, self.u_minus, self.J, self.v_minus, self.v_plus)


def build_V(J) -> np.ndarray:
    """Entangling core ``V[J]_{ab,cd} = δ_ad δ_bc exp(i J_ab)``."""
    J = np.asarray(J, dtype=np.float64)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise ValueError(f"J must be square, got shape {J.shape}")
    if not np.all(np.isfinite(J)):
        raise ValueError("J has non-finite entries")
    q = J.shape[0]
    V = np.zeros((q * q, q * q), dtype=np.complex128)
    a, b = np.divmod(np.arange(q * q), q)
    V[a * q + b, b * q + a] = np.exp(1j * J[a, b])
    return V


def compose(u_plus, u_minus, J, v_minus, v_plus) -> np.ndarray:
    return kron(u_plus, u_minus) @ build_V(J) @ kron(v_minus, v_plus)


def haar_unitary(q: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SU(q) (Ginibre QR, phase-fixed R diagonal)."""
    if q < 1:
        raise ValueError("q must be >= 1")
    Z = (rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))) / np.sqrt(2)
    if q == 1:
        return np.ones((1, 1), dtype=np.complex128)
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    Q = Q * (d / np.abs(d))
    return Q * np.exp(-1j * np.angle(np.linalg.det(Q)) / q)


def gue_hermitian(q: int, rng: np.random.Generator) -> np.ndarray:
    """GUE matrix rescaled to unit spectral radius."""
    G = rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))
    H = (G + G.conj().T) / 2
    return H / np.max(np.abs(np.linalg.eigvalsh(H)))


def block_unitary(q: int, n: int, inner, w, side: str) -> np.ndarray:
    """``w·diag(1_n, inner)`` for ``side="u"``, ``diag(1_n, inner)·w†`` for ``side="v"``."""
    if not 0 <= n <= q - 1:
        raise ValueError(f"need 0 <= n <= q-1, got n={n}, q={q}")
    inner = np.asarray(inner, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    if inner.shape != (q - n, q - n):
        raise ValueError(f"inner block must be {(q - n, q - n)}, got {inner.shape}")
    if w.shape != (q, q):
        raise ValueError(f"w must be {(q, q)}, got {w.shape}")
    B = np.eye(q, dtype=np.complex128)
    B[n:, n:] = inner
    if side == "u":
        return w @ B
    if side == "v":
        return B @ w.conj().T
    raise ValueError(f"side must be 'u' or 'v', got {side!r}")


def shift_matrix(q: int, thetas=None) -> np.ndarray:
    """Cyclic shift ``P_{a,b} = exp(iθ_a) δ_{b,a+1 mod q}``."""
    thetas = np.zeros(q) if thetas is None else np.asarray(thetas, dtype=np.float64)
    P = np.zeros((q, q), dtype=np.complex128)
    P[np.arange(q), (np.arange(q) + 1) % q] = np.exp(1j * thetas)
    return P


def basis_unit(q: int, a: int, b: int) -> np.ndarray:
    e = np.zeros((q, q), dtype=np.complex128)
    e[a, b] = 1.0
    return e


def block_charges(w, n: int) -> list[np.ndarray]:
    """Commuting charges ``w e_aa w†`` for ``a < n``."""
    q = w.shape[0]
    return [w @ basis_unit(q, a, a) @ w.conj().T for a in range(n)]


def noncommuting_charges(w, m: int) -> list[np.ndarray]:
    """Hermitian, trace-orthonormal charges spanning ``w e_ab w†`` for ``a ≠ b < m``."""
    q = w.shape[0]
    out = []
    for a in range(m):
        for b in range(a + 1, m):
            sym = basis_unit(q, a, b) + basis_unit(q, b, a)
            asym = 1j * (basis_unit(q, a, b) - basis_unit(q, b, a))
            out.append(w @ sym @ w.conj().T / np.sqrt(2))
            out.append(w @ asym @ w.conj().T / np.sqrt(2))
    return out


def random_phases(q: int, rng: np.random.Generator) -> np.ndarray:
    return rng.uniform(0.0, 2 * np.pi, size=(q, q))


def make_gate(spec: GateSpec, rng: np.random.Generator | None = None, w=None) -> GateBundle:
    """Sample a gate of the requested class.

    ``rng`` defaults to the ``gate`` lane of ``spec.seed``. Passing ``w``
    fixes the charge rotation, so that independently sampled gates share
    their conserved charges. For ``prethermal`` the unperturbed core is drawn
    before the perturbation, so the same seed gives the same core for every
    ``epsilon``.
    """
    if rng is None:
        rng = rng_for(spec.seed, "gate")
    q, cls = spec.q, spec.gate_class
    if cls == "ergodic_mixing":
        return _make_mixing(spec, rng)

    J = random_phases(q, rng)
    eye = np.eye(q, dtype=np.complex128)
    charges = None
    W_u = W_v = None
    if cls == "non_interacting":
        J = np.tile(J[0], (q, 1))
        u_plus, u_minus = haar_unitary(q, rng), haar_unitary(q, rng)
        v_plus, v_minus = u_plus.conj().T, u_minus.conj().T
        w_used = eye
    elif cls == "ergodic_nonmixing":
        w_used = haar_unitary(q, rng) if w is None else np.asarray(w, dtype=np.complex128)
        u_plus = w_used @ shift_matrix(q, spec.thetas)
        v_plus = w_used.conj().T
        u_minus, v_minus = haar_unitary(q, rng), haar_unitary(q, rng)
    else:
        n = spec.n
        if cls == "non_ergodic_noncommuting":
            J[: spec.m] = J[0] + spec.phi * np.arange(spec.m)[:, None]
        w_used = haar_unitary(q, rng) if w is None else np.asarray(w, dtype=np.complex128)
        u_plus = block_unitary(q, n, haar_unitary(q - n, rng), w_used, "u")
        v_plus = block_unitary(q, n, haar_unitary(q - n, rng), w_used, "v")
        u_minus, v_minus = haar_unitary(q, rng), haar_unitary(q, rng)
        charges = block_charges(w_used, n)
        if cls == "non_ergodic_noncommuting" and spec.phi == 0.0:
            charges += noncommuting_charges(w_used, spec.m)
        if cls == "prethermal":
            W_u, W_v = gue_hermitian(q, rng), gue_hermitian(q, rng)
            u_plus = linalg.hermitian_phase_exp(W_u, spec.epsilon) @ u_plus
            v_plus = v_plus @ linalg.hermitian_phase_exp(W_v, -spec.epsilon)
        charges = tuple(charges)

    U = compose(u_plus, u_minus, J, v_minus, v_plus)
    return GateBundle(spec, U, u_plus, u_minus, v_plus, v_minus, J, w_used, charges, W_u, W_v)


def _make_mixing(spec, rng):
    from dualunitary.channels import build_channel

    q = spec.q
    for _ in range(_MAX_REJECTIONS):
        J = random_phases(q, rng)
        u_plus, u_minus, v_plus, v_minus = (haar_unitary(q, rng) for _ in range(4))
        U = compose(u_plus, u_minus, J, v_minus, v_plus)
        lam = linalg.general_eigvals(build_channel(U).matrix)
        nontrivial = np.delete(lam, np.argmin(np.abs(lam - 1)))
        if np.all(np.abs(nontrivial) < 1 - MIXING_REJECTION_GAP):
            return GateBundle(spec, U, u_plus, u_minus, v_plus, v_minus, J, np.eye(q, dtype=np.complex128))
    raise RuntimeError(f"no mixing gate found in {_MAX_REJECTIONS} draws")


def sample_gates(spec: GateSpec, count: int, rng: np.random.Generator, share_w: bool = True) -> list[GateBundle]:
    """Independent gates of one class for per-slot sampling in a circuit.

    With ``share_w`` the charge rotation is drawn once and reused, so gates
    of the charge-conserving classes conserve the same local charges.
    """
    w = None
    if share_w and spec.gate_class in _USES_BLOCKS | {"ergodic_nonmixing"}:
        w = haar_unitary(spec.q, rng)
    return [make_gate(spec, rng, w=w) for _ in range(count)]


def dft_kicked_gate(q: int) -> np.ndarray:
    """Kicked DFT gate ``U_{ab,cd} = exp(2πi(a+d)(b+c)/q) / q``."""
    if q < 2:
        raise ValueError("q must be >= 2")
    a, b, c, d = np.meshgrid(*(np.arange(q),) * 4, indexing="ij")
    U = np.exp(2j * np.pi * (a + d) * (b + c) / q) / q
    return U.reshape(q * q, q * q)


def dft_matrix(q: int) -> np.ndarray:
    a = np.arange(q)
    return np.exp(2j * np.pi * np.outer(a, a) / q) / np.sqrt(q)


def qubit_gate(J: float) -> np.ndarray:
    """Two-qubit core ``exp[-iπ/4(XX+YY)] exp[-iJ ZZ]`` in closed form.

    ``V_{ab,cd} = δ_ad δ_bc exp(i((2J − π/2)(a−b)² − J))``, i.e. ``V[J_ab]``
    with ``J_ab = (2J − π/2)(a−b)² − J``.
    """
    a = np.arange(2)
    Jab = (2 * J - np.pi / 2) * (a[:, None] - a[None, :]) ** 2 - J
    return build_V(Jab)


def random_density(q: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_traceless(q: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.standard_normal((q, q)) + 1j * rng.standard_normal((q, q))
    return G - np.trace(G) / q * np.eye(q)


# -- gate files ---------------------------------------------------------------


def gate_to_json(U, gate_class: str = "custom", seed: int = 0) -> str:
    U = linalg.as_matrix(U)
    q = linalg.local_dim(U)
    payload = {
        "q": q,
        "class": gate_class,
        "seed": int(seed),
        "re": U.real.tolist(),
        "im": U.imag.tolist(),
    }
    return json.dumps(payload)


def gate_from_json(text: str):
    """Parse a gate file; returns ``(U, metadata)``."""
    data = json.loads(text)
    try:
        re = np.asarray(data["re"], dtype=np.float64)
        im = np.asarray(data["im"], dtype=np.float64)
        q = int(data["q"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed gate file: {exc}") from exc
    if re.shape != (q * q, q * q) or im.shape != re.shape:
        raise ValueError(f"gate arrays must be {q * q}x{q * q} for q={q}")
    meta = {"q": q, "class": data.get("class", "custom"), "seed": data.get("seed", 0)}
    U = np.empty(re.shape, dtype=np.complex128)
    U.real, U.imag = re, im
    return U, meta


def save_gate(path, U, gate_class: str = "custom", seed: int = 0) -> None:
    atomic_write_text(Path(path), gate_to_json(U, gate_class, seed))


def load_gate(path):
    return gate_from_json(Path(path).read_text())
