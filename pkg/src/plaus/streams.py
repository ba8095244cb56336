"""Counter-based random substreams.

Every random draw in the package comes from a generator keyed by a tuple of
integers, so results do not depend on evaluation order or on how work is
split between workers.  Keys are ``(purpose, *counters)``; the purpose tags
below keep unrelated consumers from ever sharing a stream.
"""

from __future__ import annotations

import numpy as np

# purpose tags
MC = 0
MC_RETRY = 1
BOOTSTRAP = 2
DATA = 3
DESIGN = 4
REPLICATE = 5
RESTART = 6

# replicates per substream; fixed so chunk boundaries never move
CHUNK = 4096

_MASK64 = (1 << 64) - 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent Philox generator for ``(seed, key)``."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Deterministically derive a child 64-bit seed."""
    ss = np.random.SeedSequence(int(seed) & _MASK64, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def chunk_sizes(total: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(int(total), chunk)
    return [chunk] * full + ([rest] if rest else [])


def as_generator(stream) -> np.random.Generator:
    """Accept a Generator, an integer seed, or None (seed 0)."""
    if isinstance(stream, np.random.Generator):
        return stream
    return substream(0 if stream is None else int(stream))
