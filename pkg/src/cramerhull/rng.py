"""Counter-based random streams.

Every stochastic routine in the toolkit draws from a Philox generator keyed
by ``(global seed, stream id)``.  Philox is counter-based, so a stream is a
pure function of its key: re-creating the stream and replaying the same
draw sequence is bit-identical, and distinct stream ids never collide.
"""

from __future__ import annotations

import numpy as np

_MAX_KEY = 2**64


def stream(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Return the deterministic generator for ``(seed, stream_id)``."""
    if not 0 <= int(seed) < _MAX_KEY:
        raise ValueError(f"seed must be a non-negative 64-bit integer, got {seed!r}")
    if not 0 <= int(stream_id) < _MAX_KEY:
        raise ValueError(f"stream_id must be a non-negative 64-bit integer, got {stream_id!r}")
    return np.random.Generator(np.random.Philox(key=np.array([seed, stream_id], dtype=np.uint64)))
