"""Named, seedable random streams.

Every stochastic concern (fault sampling, warm-up gauge noise, deploy
checks) draws from its own stream so that adding draws to one concern
never perturbs another.  Streams are derived from a single root seed and
a fixed per-name index, which keeps runs reproducible across platforms
and across unrelated code changes.
"""

from __future__ import annotations

import numpy as np

# Fixed stream indices; append only, never renumber.
STREAM_IDS: dict[str, int] = {
    "faults": 0,
    "noise": 1,
    "deploy": 2,
}


def stream(seed: int, name: str) -> np.random.Generator:
    """Return the generator for the named stream under ``seed``."""
    try:
        sid = STREAM_IDS[name]
    except KeyError:
        raise ValueError(f"unknown random stream: {name!r}") from None
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, sid))))


def scenario_seed(base_seed: int, scenario_id: int) -> int:
    """Derive an independent per-scenario seed from a suite-level seed."""
    ss = np.random.SeedSequence((base_seed, scenario_id))
    return int(ss.generate_state(1, np.uint64)[0])
