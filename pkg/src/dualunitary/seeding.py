"""Seed splitting.

Every random draw in the package descends from one master seed. A stream is
addressed by ``(master_seed, lane, index)`` and built as
``numpy.random.SeedSequence([master_seed, LANES[lane], index])``, so streams
for different lanes or indices are statistically independent and never
depend on how many draws another stream made.

Lanes: ``gate`` (gate construction, including the prethermal W_u and W_v,
which are drawn after the unperturbed core), ``operator`` (random ρ and σ)
and ``realization`` (one circuit realization in an ensemble).
"""

import numpy as np

LANES = {"gate": 0, "operator": 1, "realization": 2}


def seed_sequence(seed: int, lane: str, index: int = 0) -> np.random.SeedSequence:
    if lane not in LANES:
        raise ValueError(f"unknown lane {lane!r}; expected one of {sorted(LANES)}")
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    return np.random.SeedSequence([int(seed), LANES[lane], int(index)])


def rng_for(seed: int, lane: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(seed, lane, index))
