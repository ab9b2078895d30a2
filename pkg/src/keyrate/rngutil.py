"""Deterministic random streams and worker-count control.

All randomness in the package flows from a single integer seed through
named sub-streams, so any component (an optimizer restart, a simulation
batch) can be rerun in isolation and reproduce its draws exactly.
"""

import os
import zlib

import numpy as np


def substream(seed: int, name: str, index: int = 0) -> np.random.Generator:
    """Return the counter-based generator for sub-stream `name`/`index`.

    The stream key mixes the master seed, a CRC of the stream name and the
    index, so stream k is reproducible without generating streams 0..k-1.
    """
    key = np.random.SeedSequence(
        entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
        spawn_key=(zlib.crc32(name.encode("utf-8")), int(index)),
    )
    return np.random.Generator(np.random.Philox(key))


def worker_count() -> int:
    """Worker cap from KEYRATE_THREADS: unset/1 serial, 0 auto, n fixed."""
    raw = os.environ.get("KEYRATE_THREADS", "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 0:
        raise ValueError("KEYRATE_THREADS must be >= 0")
    if n == 0:
        return os.cpu_count() or 1
    return n
