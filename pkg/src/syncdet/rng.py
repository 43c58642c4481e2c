"""Counter-based reproducible random streams.

Every stochastic operation in the toolkit draws from a stream keyed by
(master seed, stream id...).  Streams are independent of scheduling, so
frame-parallel runs reproduce single-threaded results bit for bit.
"""

import numpy as np


def stream(master_seed: int, *ids: int) -> np.random.Generator:
    """Return the generator for stream (master_seed, *ids).

    Identical keys always yield identical draw sequences (Philox is
    counter-based; SeedSequence hashing is a stable numpy contract).
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.Philox(ss))
