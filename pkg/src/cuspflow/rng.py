"""Counter-based random streams.

Every Monte-Carlo routine in this package draws its randomness from a
generator keyed by ``(seed, *path)`` where ``path`` identifies the stream and
the work item (e.g. ``(stream_id, atom_index)``).  Results therefore depend
only on the seed and the logical index of each sample, never on how samples
are scheduled across threads.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for the substream ``(seed, *path)``.

    Uses the Philox counter-based bit generator; two calls with equal
    arguments yield identical streams, independent of call order.
    """
    ss = np.random.SeedSequence(
        entropy=int(seed) & _MASK64,
        spawn_key=tuple(int(p) & _MASK64 for p in path),
    )
    return np.random.Generator(np.random.Philox(ss))
