"""Light-cone correlation dynamics, steady states and the finite-lattice oracle."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from dualunitary import kernels, linalg
from dualunitary.channels import QuantumChannel, build_channel, conserved_charges, subleading_modulus
from dualunitary.gates import GateSpec, make_gate

DEFAULT_T_MAX = 40
BRUTE_FORCE_BUDGET = 8192
# Overlaps below this are treated as zero weight (log-parameter -inf).
GGE_WEIGHT_FLOOR = 1e-30


@dataclass(frozen=True, eq=False)
class CorrelationSeries:
    q: int
    direction: str
    times: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,re,im\n")
        for t, z in zip(self.times, self.values):
            buf.write(f"{int(t)},{float(z.real)!r},{float(z.imag)!r}\n")
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class GGEState:
    """Steady state fixed by commuting charges.

    ``mu_a``/``mu`` are the log-parameters; a weight too small for a
    logarithm is reported as ``-inf`` while ``weights``/``residual_weight``
    always hold the linear coefficients used to build ``matrix``.
    """

    q: int
    n: int
    mu_a: tuple
    mu: float
    weights: tuple
    residual_weight: float
    matrix: np.ndarray


def _channel_matrix(M):
    return M.matrix if isinstance(M, QuantumChannel) else np.asarray(M, dtype=np.complex128)


def correlation_series(M: QuantumChannel, rho, sigma, t_max: int = DEFAULT_T_MAX, metadata=None) -> CorrelationSeries:
    """``c(t) = tr[Mᵗ(ρ) σ]`` for ``t = 0..t_max`` by repeated application of ``M``."""
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    rho = linalg.as_matrix(rho)
    sigma = linalg.as_matrix(sigma)
    if rho.shape != (M.q, M.q) or sigma.shape != (M.q, M.q):
        raise ValueError(f"operators must be {M.q}x{M.q}")
    values = kernels.channel_series(M.matrix, linalg.vec(rho), linalg.vec(sigma.T), t_max)
    return CorrelationSeries(M.q, M.direction, np.arange(t_max + 1), values, dict(metadata or {}))


def thermal_value(sigma, q: int) -> complex:
    return complex(np.trace(np.asarray(sigma)) / q)


def gge_state(rho, charges, q: int, n: int | None = None) -> GGEState:
    """GGE built from commuting projector charges ``c_a``.

    ``weights[a] = tr(ρ c_a)`` and the remaining weight
    ``(1 − Σ_b tr(ρ c_b))/(q − n)`` is spread over ``1 − Σ_b c_b``.
    """
    rho = linalg.as_matrix(rho)
    charges = [linalg.as_matrix(c) for c in charges]
    n = len(charges) if n is None else n
    if n != len(charges):
        raise ValueError(f"expected {n} charges, got {len(charges)}")
    if not 0 <= n <= q - 1:
        raise ValueError(f"need 0 <= n <= q-1, got n={n}")
    weights = [float(np.real(np.trace(rho @ c))) for c in charges]
    residual = (1.0 - sum(weights)) / (q - n)
    mu_a = tuple(math.log(p) if p > GGE_WEIGHT_FLOOR else -math.inf for p in weights)
    mu = math.log(residual) if residual > GGE_WEIGHT_FLOOR else -math.inf
    complement = np.eye(q, dtype=np.complex128) - sum(charges, np.zeros((q, q), dtype=np.complex128))
    matrix = sum((p * c for p, c in zip(weights, charges)), residual * complement)
    return GGEState(q, n, mu_a, mu, tuple(weights), residual, matrix)


def steady_state(rho, M: QuantumChannel, tol: float = 1e-8) -> np.ndarray:
    """Non-decaying part of ``ρ``: projection onto the fixed points of ``M``."""
    rho = linalg.as_matrix(rho)
    out = np.zeros_like(rho)
    for c in conserved_charges(M, tol):
        out += np.trace(c.conj().T @ rho) * c
    return out


def iterate_channel(M, rho, tol: float = 1e-12, max_iter: int = 1_000_000) -> np.ndarray:
    """Apply ``M`` until the max-norm increment drops below ``tol``."""
    A = _channel_matrix(M)
    q = int(round(math.sqrt(A.shape[0])))
    v = linalg.vec(rho)
    for _ in range(max_iter):
        nxt = A @ v
        if np.max(np.abs(nxt - v)) < tol:
            return linalg.unvec(nxt, q)
        v = nxt
    raise RuntimeError(f"channel iteration did not settle within {max_iter} steps")


def decay_time(M, gap_tol: float = 1e-12) -> float:
    """``ln 2 / (1 − |λ_sub|)`` for the largest nontrivial eigenvalue ``λ_sub``."""
    lam = linalg.general_eigvals(_channel_matrix(M))
    return decay_time_from_modulus(subleading_modulus(lam), gap_tol)


def decay_time_from_modulus(lam_sub: float, gap_tol: float = 1e-12) -> float:
    if 1 - lam_sub <= gap_tol:
        raise ValueError(f"subleading modulus {lam_sub!r} has no finite decay time")
    return math.log(2) / (1 - lam_sub)


@dataclass(frozen=True, eq=False)
class PrethermalRun:
    epsilon: float
    series: CorrelationSeries
    subleading_modulus: float
    decay_time: float


@dataclass(frozen=True, eq=False)
class PrethermalSweep:
    base: GateSpec
    runs: tuple
    gge_value: complex
    thermal_value: complex

    def run(self, epsilon: float) -> PrethermalRun:
        for r in self.runs:
            if r.epsilon == epsilon:
                return r
        raise KeyError(epsilon)


def prethermal_sweep(base: GateSpec, epsilons, rho, sigma, t_max: int = DEFAULT_T_MAX) -> PrethermalSweep:
    """Correlation series for a perturbed non-ergodic gate at each ``epsilon``.

    All gates share ``base.seed`` and therefore the same unperturbed core;
    the ``epsilon = 0`` reference is always included first.
    """
    if base.gate_class != "prethermal":
        raise ValueError(f"base class must be prethermal, got {base.gate_class}")
    eps_list = [0.0] + [float(e) for e in epsilons if float(e) != 0.0]
    runs = []
    gge_value = None
    for eps in eps_list:
        spec = GateSpec(base.q, "prethermal", n=base.n, epsilon=eps, seed=base.seed)
        bundle = make_gate(spec)
        M = build_channel(bundle.U)
        series = correlation_series(M, rho, sigma, t_max, metadata={"gate": spec.to_dict()})
        lam_sub = subleading_modulus(linalg.general_eigvals(M.matrix))
        try:
            tau = decay_time_from_modulus(lam_sub)
        except ValueError:
            tau = math.inf
        runs.append(PrethermalRun(eps, series, lam_sub, tau))
        if eps == 0.0:
            gge = gge_state(rho, bundle.analytic_charges, base.q, base.n)
            gge_value = complex(np.trace(gge.matrix @ np.asarray(sigma)))
    return PrethermalSweep(base, tuple(runs), gge_value, thermal_value(sigma, base.q))


# -- finite-lattice oracle ---------------------------------------------------


def _embed(op, pos, L, q):
    return np.kron(np.kron(np.eye(q**pos), op), np.eye(q ** (L - pos - 1)))


def brute_force_correlation(gate, rho, sigma, t: int, x: int | None = None, direction: str = "plus",
                            budget: int = BRUTE_FORCE_BUDGET) -> complex:
    """Exact ``tr[𝒰(t)† ρ(0) 𝒰(t) σ(x)] / q^(L-1)`` on the window of sites ``-t..t+1``.

    ``gate`` is a ``q² x q²`` array used on every bond, or a callable
    ``gate(layer, left_site)`` returning one. Layer ``k = 1..t`` acts on the
    bonds ``(j, j+1)`` with ``j ≡ k-1`` (``plus``) or ``j ≡ k`` (``minus``)
    mod 2, so the first layer acting on ρ has it on the left (right) leg.
    Only bonds inside the window are applied; the window contains the whole
    forward cone of ρ, so the result is exact. The normalisation makes
    ``t = 0`` give ``tr(ρσ)``, matching ``tr[Mᵗ(ρ)σ]`` on the light cone.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    rho = linalg.as_matrix(rho)
    sigma = linalg.as_matrix(sigma)
    q = rho.shape[0]
    if direction not in ("plus", "minus"):
        raise ValueError(f"direction must be 'plus' or 'minus', got {direction!r}")
    if x is None:
        x = t if direction == "plus" else -t
    lo, hi = -t, t + 1
    L = hi - lo + 1
    if not lo <= x <= hi:
        raise ValueError(f"x={x} outside the window {lo}..{hi}")
    if q**L > budget:
        raise ValueError(f"window of {L} sites needs dimension q^L = {q**L} > budget {budget}")
    gate_at = gate if callable(gate) else (lambda k, j, _U=linalg.as_matrix(gate): _U)
    parity = 0 if direction == "plus" else 1

    X = _embed(rho, 0 - lo, L, q)
    for k in range(1, t + 1):
        for j in range(lo, hi):
            if (j - (k - 1 + parity)) % 2:
                continue
            U = linalg.as_matrix(gate_at(k, j))
            i = j - lo
            X = kernels.apply_two_site(X, U.conj().T, q, L, i, i + 1)
            X = kernels.apply_two_site(np.ascontiguousarray(X.T), U.T, q, L, i, i + 1).T
    S = _embed(sigma, x - lo, L, q)
    return complex(np.sum(X * S.T) / q ** (L - 1))
