"""Named deterministic random streams.

Every stochastic step in the pipeline draws from a stream keyed by the run
seed plus a path of string parts (task id, purpose, index). Streams are
mutually independent and stable across processes and platforms, which is what
makes full generate runs byte-identical for a fixed seed.
"""

from __future__ import annotations

import hashlib
import random


def stream_key(seed, *parts):
    return "/".join([str(seed), *(str(p) for p in parts)])


def stream_rng(seed, *parts):
    key = stream_key(seed, *parts)
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def stable_hash(*parts):
    """Short stable hex digest for uids and cache keys."""
    key = "/".join(str(p) for p in parts)
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


__all__ = ["stream_key", "stream_rng", "stable_hash"]
