"""Deterministic RNG stream derivation.

Every stochastic run owns a master seed.  Independent sub-streams (one per
trial, per sample, per solver) are derived from (master seed, key parts)
through numpy's SeedSequence, so results do not depend on execution order
and trial-level parallelism cannot change them.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _encode(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFFFFFFFFFF
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")
    raise TypeError(f"cannot derive a seed from {type(part).__name__}")


def derive_seed_sequence(master_seed: int, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence([_encode(master_seed)] + [_encode(k) for k in key])


def derive_rng(master_seed: int, *key) -> np.random.Generator:
    """Stream for (master_seed, *key); key parts are ints or strings."""
    return np.random.default_rng(derive_seed_sequence(master_seed, *key))
