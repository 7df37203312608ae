"""Seeded random streams.

Every random draw in the package comes from a PCG64 generator whose
SeedSequence is keyed by ``(master_seed, purpose, machine_id, round)``.
Streams therefore do not depend on the order in which machines run or on
how many worker threads are used, and PCG64 output is identical across
platforms.
"""

from __future__ import annotations

import numpy as np

# purpose codes; append only, never renumber
DATA = 0
HOLDOUT = 1
PARTITION = 2
SUBSET = 3
INNER = 4

PURPOSES = {
    "data": DATA,
    "holdout": HOLDOUT,
    "partition": PARTITION,
    "subset": SUBSET,
    "inner": INNER,
}


def stream(seed: int, purpose: int, machine: int = 0, round: int = 0) -> np.random.Generator:
    """Return the generator for one (purpose, machine, round) cell."""
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    ss = np.random.SeedSequence(
        entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=(int(purpose), int(machine), int(round)),
    )
    return np.random.Generator(np.random.PCG64(ss))
