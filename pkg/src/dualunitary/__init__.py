"""Dual-unitary brickwork circuits at arbitrary local dimension q.

Submodules
----------
linalg
    Kronecker products, partial traces, the dual reshuffle and validators.
gates
    Gate construction per ergodicity class, Haar sampling, gate files.
channels
    Light-cone channels, their spectra and the ergodicity classifier.
dynamics
    Correlation series, GGE and steady states, the finite-lattice oracle.
spectra
    Floquet operators of periodic chains and level-spacing statistics.
kernels
    Compiled hot loops with a pure numpy fallback.
"""

from dualunitary.channels import build_channel, classify, conserved_charges, sigma_values
from dualunitary.dynamics import brute_force_correlation, correlation_series, gge_state, steady_state
from dualunitary.gates import GateSpec, build_V, dft_kicked_gate, make_gate, qubit_gate
from dualunitary.linalg import dual_reshuffle, partial_trace, validate_gate

__version__ = "0.1.0"

__all__ = [
    "GateSpec",
    "brute_force_correlation",
    "build_V",
    "build_channel",
    "classify",
    "conserved_charges",
    "correlation_series",
    "dft_kicked_gate",
    "dual_reshuffle",
    "gge_state",
    "make_gate",
    "partial_trace",
    "qubit_gate",
    "sigma_values",
    "steady_state",
    "validate_gate",
]
