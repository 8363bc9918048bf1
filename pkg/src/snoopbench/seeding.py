"""Deterministic fan-out of one master seed into per-purpose RNG streams.

Every random choice in the pipeline flows from a generator created here, so a
single 64-bit master seed replays an entire run. The derivation is plain
sha256 over "master:purpose", independent of numpy internals, and its name is
recorded in manifests so a manifest documents how its randomness was made.
"""

from __future__ import annotations

import hashlib

import numpy as np

RNG_ALGORITHM = "numpy-pcg64/sha256-derive-v1"

MAX_SEED = 2**64 - 1


def derive_seed(master: int, purpose: str) -> int:
    """Map (master seed, purpose string) to a 64-bit seed."""
    digest = hashlib.sha256(f"{master}:{purpose}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def make_rng(seed: int, purpose: str | None = None) -> np.random.Generator:
    """PCG64 generator for `seed`, optionally derived for a named purpose."""
    if purpose is not None:
        seed = derive_seed(seed, purpose)
    return np.random.Generator(np.random.PCG64(seed))
