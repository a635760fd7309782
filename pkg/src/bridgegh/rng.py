"""Counter-style substream derivation.

Every random draw in the package comes from a generator keyed by
``(master_seed, stream_key)``.  The key is folded into the seed with the
SplitMix64 finalizer, so the stream a trial sees depends only on its key and
never on which worker ran it or in what order.

Constants (SplitMix64, Steele/Lea/Flood 2014)::

    golden gamma  0x9E3779B97F4A7C15
    mix 1         0xBF58476D1CE4E5B9
    mix 2         0x94D049BB133111EB

String key parts are mapped to 64 bits with an 8-byte BLAKE2b digest.
"""

from __future__ import annotations

import hashlib
from typing import Union

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

KeyPart = Union[int, str]


def splitmix64(x: int) -> int:
    x = (x + _GAMMA) & MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def _part_to_int(part: KeyPart) -> int:
    if isinstance(part, str):
        return int.from_bytes(hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest(), "little")
    if isinstance(part, (bool, np.bool_)) or not isinstance(part, (int, np.integer)):
        raise TypeError(f"stream-key parts must be int or str, got {type(part).__name__}")
    return int(part) & MASK64


def derive_seed(master_seed: int, *key: KeyPart) -> int:
    """Fold ``key`` into ``master_seed``; returns a 64-bit unsigned integer."""
    if master_seed < 0 or master_seed > MASK64:
        raise ValueError("master_seed must be a 64-bit unsigned integer")
    h = splitmix64(master_seed)
    for part in key:
        h = splitmix64(h ^ _part_to_int(part))
    return h


def generator(master_seed: int, *key: KeyPart) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *key)))
