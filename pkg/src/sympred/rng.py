"""Splittable random streams.

Every command takes one 64-bit master seed. Anything that needs randomness
draws from a named substream so that, for example, tree 17 of a forest sees
the same random numbers no matter how many other trees were built before it.

The scheme: a substream is identified by the master seed plus a path of
stream ids (short strings or non-negative integers). Strings are mapped to
integers with CRC-32, and the whole path seeds a ``numpy`` ``SeedSequence``:

    SeedSequence(entropy=[master_seed, id0, id1, ...])
"""

from __future__ import annotations

import zlib

import numpy as np


def _encode(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"stream id must be non-negative, got {part}")
        return int(part)
    raise TypeError(f"stream id must be str or int, got {type(part).__name__}")


def _sequence(seed: int, path: tuple[int | str, ...]) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed)] + [_encode(p) for p in path])


def substream(seed: int, *path: int | str) -> np.random.Generator:
    """Return a generator for the substream identified by (seed, *path)."""
    return np.random.Generator(np.random.PCG64(_sequence(seed, path)))


def derive_seed(seed: int, *path: int | str) -> int:
    """Collapse a substream identity to a plain integer seed (63-bit)."""
    state = _sequence(seed, path).generate_state(2, dtype=np.uint32)
    return int((int(state[0]) << 31) ^ int(state[1]))
