import math

import numpy as np
import pytest

from dualunitary import gates, linalg
from dualunitary.channels import build_channel
from dualunitary.dynamics import (
    brute_force_correlation,
    correlation_series,
    decay_time,
    decay_time_from_modulus,
    gge_state,
    iterate_channel,
    prethermal_sweep,
    steady_state,
    thermal_value,
)
from dualunitary.gates import GateSpec, make_gate, random_density, random_traceless
from oracles import cnot, random_complex, random_unitary


def _ops(rng, q):
    return random_density(q, rng), random_traceless(q, rng)


def test_identity_observable_is_constant(rng):
    M = build_channel(make_gate(GateSpec(4, "ergodic_mixing", seed=1)).U)
    s = correlation_series(M, random_density(4, rng), np.eye(4), 30)
    assert np.allclose(s.values, 1, atol=1e-12)


def test_t0_is_overlap(rng):
    M = build_channel(make_gate(GateSpec(3, "non_ergodic", n=1, seed=2)).U)
    rho, sigma = random_complex(rng, 3, 3), random_complex(rng, 3, 3)
    s = correlation_series(M, rho, sigma, 0)
    assert abs(s.values[0] - np.trace(rho @ sigma)) <= 1e-12
    assert list(s.times) == [0]


def test_series_is_contractive(rng):
    for cls, n in [("ergodic_mixing", 0), ("non_ergodic", 2), ("ergodic_nonmixing", 0)]:
        M = build_channel(make_gate(GateSpec(4, cls, n=n, seed=3)).U)
        rho, sigma = random_complex(rng, 4, 4), random_complex(rng, 4, 4)
        bound = np.linalg.norm(rho, "nuc") * np.linalg.norm(sigma, 2)
        assert np.all(np.abs(correlation_series(M, rho, sigma, 40).values) <= bound * (1 + 1e-12))


def test_nonmixing_period_q(rng):
    q = 5
    M = build_channel(make_gate(GateSpec(q, "ergodic_nonmixing", seed=4)).U)
    v = correlation_series(M, *_ops(rng, q), t_max=200).values
    assert np.max(np.abs(v[150:195] - v[150 + q:195 + q])) <= 1e-8


def test_mixing_envelope():
    # |c(t) - thermal| <= |λ_sub|^t Σ_k |α_k| with α_k the eigen-overlaps of ρ and σ.
    for seed in range(10):
        rng = np.random.default_rng(seed)
        q = 3
        M = build_channel(make_gate(GateSpec(q, "ergodic_mixing", seed=seed)).U)
        rho, sigma = _ops(rng, q)
        lam, V = np.linalg.eig(M.matrix)
        coeffs = np.linalg.solve(V, linalg.vec(rho))
        overlaps = (linalg.vec(sigma.T) @ V) * coeffs
        keep = np.abs(lam - 1) > 1e-8
        C = np.sum(np.abs(overlaps[keep]))
        lam_sub = np.max(np.abs(lam[keep]))
        v = correlation_series(M, rho, sigma, 40).values
        t = np.arange(41)
        assert np.all(np.abs(v - thermal_value(sigma, q)) <= lam_sub**t * C * (1 + 1e-8) + 1e-13)


def test_thermal_value():
    assert thermal_value(np.eye(3), 3) == 1
    assert thermal_value(np.diag([1.0, -1.0]), 2) == 0


def test_gge_maximally_mixed():
    q, n = 5, 2
    b = make_gate(GateSpec(q, "non_ergodic", n=n, seed=5))
    g = gge_state(np.eye(q) / q, b.analytic_charges, q, n)
    assert np.allclose(g.matrix, np.eye(q) / q, atol=1e-14)
    assert np.allclose(g.mu_a, math.log(1 / q)) and math.isclose(g.mu, math.log(1 / q))


def test_gge_matches_charges_and_iteration(rng):
    q, n = 6, 2
    b = make_gate(GateSpec(q, "non_ergodic", n=n, seed=6))
    rho = random_density(q, rng)
    g = gge_state(rho, b.analytic_charges, q, n)
    for c in b.analytic_charges:
        assert abs(np.trace(g.matrix @ c) - np.trace(rho @ c)) <= 1e-12
    assert abs(np.trace(g.matrix) - 1) <= 1e-12
    assert np.min(np.linalg.eigvalsh(g.matrix)) >= -1e-10
    M = build_channel(b.U)
    assert np.max(np.abs(iterate_channel(M, rho) - g.matrix)) <= 1e-8
    assert np.max(np.abs(steady_state(rho, M) - g.matrix)) <= 1e-10


def test_gge_zero_weight_sentinel():
    q = 3
    w = np.eye(q)
    charges = gates.block_charges(w, 1)
    rho = np.diag([0.0, 0.5, 0.5])
    g = gge_state(rho, charges, q, 1)
    assert g.mu_a == (-math.inf,) and g.weights == (0.0,)
    assert np.allclose(g.matrix, rho)


def test_gge_charge_count_mismatch():
    with pytest.raises(ValueError):
        gge_state(np.eye(3) / 3, gates.block_charges(np.eye(3), 1), 3, 2)


def test_steady_state_mixing(rng):
    q = 4
    M = build_channel(make_gate(GateSpec(q, "ergodic_mixing", seed=7)).U)
    rho = random_complex(rng, q, q)
    assert np.allclose(steady_state(rho, M), np.trace(rho) * np.eye(q) / q, atol=1e-12)


def test_steady_state_noncommuting(rng):
    q = 4
    M = build_channel(make_gate(GateSpec(q, "non_ergodic_noncommuting", n=2, m=2, seed=8)).U)
    rho = random_density(q, rng)
    st = steady_state(rho, M)
    assert np.max(np.abs(st - iterate_channel(M, rho))) <= 1e-8
    # The off-diagonal charges carry weight, so the commuting GGE alone is not the limit.
    b = make_gate(GateSpec(q, "non_ergodic_noncommuting", n=2, m=2, seed=8))
    g = gge_state(rho, gates.block_charges(b.w, 2), q, 2)
    assert np.max(np.abs(st - g.matrix)) > 1e-6


def test_phi_oscillation_averages_to_gge(rng):
    q, n, m, period = 4, 2, 2, 8
    phi = 2 * np.pi / period
    b = make_gate(GateSpec(q, "non_ergodic_noncommuting", n=n, m=m, phi=phi, seed=9))
    M = build_channel(b.U)
    rho, sigma = _ops(rng, q)
    v = correlation_series(M, rho, sigma, 800).values
    g = gge_state(rho, gates.block_charges(b.w, n), q, n)
    gge_val = np.trace(g.matrix @ sigma)
    tail = v[-period:]
    assert abs(tail.mean() - gge_val) <= 1e-6
    # The oscillation has angular frequency φ: the tail repeats after one period only.
    assert np.max(np.abs(v[-period:] - v[-2 * period:-period])) <= 1e-8
    assert np.max(np.abs(tail - gge_val)) > 1e-6


def test_decay_time_values():
    assert decay_time_from_modulus(0.5) == pytest.approx(math.log(2) / 0.5)
    with pytest.raises(ValueError):
        decay_time(build_channel(make_gate(GateSpec(4, "ergodic_nonmixing", seed=1)).U))
    with pytest.raises(ValueError):
        decay_time_from_modulus(1.0)


def test_decay_time_quadratic_in_epsilon():
    taus = [decay_time(build_channel(make_gate(GateSpec(4, "prethermal", n=1, epsilon=e, seed=3)).U))
            for e in (1e-3, 2e-3)]
    assert taus[0] / taus[1] == pytest.approx(4, rel=0.02)


def test_prethermal_sweep_behaviour(rng):
    q = 4
    rho, sigma = _ops(rng, q)
    sweep = prethermal_sweep(GateSpec(q, "prethermal", n=1, seed=2), [1e-3, 0.3], rho, sigma, t_max=400)
    assert [r.epsilon for r in sweep.runs] == [0.0, 1e-3, 0.3]
    base = sweep.run(0.0)
    assert math.isinf(base.decay_time)
    assert abs(base.series.values[-1] - sweep.gge_value) <= 1e-8
    assert abs(sweep.run(0.3).series.values[-1] - sweep.thermal_value) <= 1e-8
    early = np.abs(sweep.run(1e-3).series.values[:51] - base.series.values[:51])
    assert np.max(early) <= 1e-2
    with pytest.raises(KeyError):
        sweep.run(0.5)
    with pytest.raises(ValueError):
        prethermal_sweep(GateSpec(q, "non_ergodic", n=1), [0.1], rho, sigma)


def test_series_csv(rng):
    M = build_channel(gates.dft_kicked_gate(2))
    s = correlation_series(M, np.diag([1.0, 0.0]), np.diag([1.0, -1.0]), 2)
    lines = s.to_csv().splitlines()
    assert lines[0] == "t,re,im" and len(lines) == 4
    assert lines[1] == "0,1.0,0.0"


# -- finite-lattice oracle -----------------------------------------------------------


def test_brute_force_t0(rng):
    rho, sigma = random_complex(rng, 3, 3), random_complex(rng, 3, 3)
    assert abs(brute_force_correlation(np.eye(9), rho, sigma, 0) - np.trace(rho @ sigma)) <= 1e-12


CLASS_SPECS = {
    2: [("ergodic_mixing", {}), ("non_ergodic", {"n": 1}), ("ergodic_nonmixing", {}),
        ("non_interacting", {}), ("prethermal", {"n": 1, "epsilon": 0.2}),
        ("non_ergodic_noncommuting", {"n": 1, "m": 1})],
    3: [("ergodic_mixing", {}), ("non_ergodic", {"n": 1}), ("ergodic_nonmixing", {}),
        ("non_interacting", {}), ("prethermal", {"n": 1, "epsilon": 0.2}),
        ("non_ergodic_noncommuting", {"n": 2, "m": 2})],
}


@pytest.mark.parametrize("direction", ["plus", "minus"])
@pytest.mark.parametrize("q,t_max", [(2, 3), (3, 2)])
def test_brute_force_matches_channel(q, t_max, direction):
    for k, (cls, kw) in enumerate(CLASS_SPECS[q]):
        rng = np.random.default_rng(100 + k)
        U = make_gate(GateSpec(q, cls, seed=k, **kw)).U
        rho, sigma = random_complex(rng, q, q), random_complex(rng, q, q)
        series = correlation_series(build_channel(U, direction), rho, sigma, t_max).values
        for t in range(t_max + 1):
            assert abs(brute_force_correlation(U, rho, sigma, t, direction=direction) - series[t]) <= 1e-10


def test_brute_force_per_slot_gates(rng):
    # With a different gate on each slot the light-cone value is the ordered product of channels.
    q, t = 2, 3
    pool = {}

    def gate_at(layer, left):
        if (layer, left) not in pool:
            pool[(layer, left)] = make_gate(GateSpec(q, "ergodic_mixing"), rng).U
        return pool[(layer, left)]

    rho, sigma = random_complex(rng, q, q), random_complex(rng, q, q)
    got = brute_force_correlation(gate_at, rho, sigma, t)
    v = linalg.vec(rho)
    for k in range(1, t + 1):
        v = build_channel(pool[(k, k - 1)]).matrix @ v
    assert abs(got - np.trace(linalg.unvec(v, q) @ sigma)) <= 1e-10


def test_dual_unitary_off_cone_factorizes(rng):
    q, t = 2, 2
    U = make_gate(GateSpec(q, "ergodic_mixing", seed=5)).U
    rho, sigma = random_complex(rng, q, q), random_complex(rng, q, q)
    expected = np.trace(rho) * np.trace(sigma) / q
    for x in range(-t + 1, t):
        assert abs(brute_force_correlation(U, rho, sigma, t, x=x) - expected) <= 1e-10


def test_non_dual_unitary_inside_cone_does_not_factorize(rng):
    q = 2
    rho, sigma = random_complex(rng, q, q), random_complex(rng, q, q)
    expected = np.trace(rho) * np.trace(sigma) / q
    # CNOT leaves a nontrivial value strictly inside the cone after one layer.
    assert abs(brute_force_correlation(cnot(), rho, sigma, 1, x=0) - expected) > 1e-3
    # A generic unitary does so at every interior point at t = 2.
    U = random_unitary(rng, 4)
    for x in (-1, 0, 1):
        assert abs(brute_force_correlation(U, rho, sigma, 2, x=x) - expected) > 1e-3


def test_brute_force_budget():
    with pytest.raises(ValueError, match="budget"):
        brute_force_correlation(np.eye(16), np.eye(4), np.eye(4), 4)
    with pytest.raises(ValueError):
        brute_force_correlation(np.eye(4), np.eye(2), np.eye(2), 1, x=5)
