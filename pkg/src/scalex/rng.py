"""Reproducible random streams.

Every stream is numpy's ``Philox`` (Philox4x64-10, Salmon et al. 2011,
reference implementation in Random123) keyed by a 64-bit integer, with the
counter starting at zero. Uniform doubles are ``(next_uint64 >> 11) * 2**-53``,
which is numpy's documented conversion, so a stream can be reproduced outside
Python from the key alone.

Sub-seeds for trials are derived with :func:`derive_seed`, a chain of
SplitMix64 finalizers::

    h = base
    for k in keys:
        h = mix64(h ^ mix64(k + GOLDEN))

where ``mix64`` is the SplitMix64 output function and ``GOLDEN`` is
``0x9E3779B97F4A7C15``. String keys are first reduced to an integer by
folding their UTF-8 bytes (little-endian, 8 at a time) through the same chain.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _key_to_int(key) -> int:
    if isinstance(key, str):
        data = key.encode()
        h = len(data)
        for i in range(0, len(data), 8):
            h = mix64(h ^ mix64(int.from_bytes(data[i : i + 8], "little") + GOLDEN))
        return h
    k = int(key)
    if k < 0:
        raise ValueError(f"seed keys must be non-negative, got {k}")
    return k & MASK64


def derive_seed(base: int, *keys) -> int:
    """Deterministically mix ``base`` with integer or string ``keys`` into a 64-bit seed."""
    h = _key_to_int(base)
    for key in keys:
        h = mix64(h ^ mix64(_key_to_int(key) + GOLDEN))
    return h


def philox(seed: int) -> np.random.Generator:
    """Generator over a Philox stream keyed by ``seed`` (taken mod 2**64)."""
    return np.random.Generator(np.random.Philox(key=_key_to_int(seed)))
