"""Small shared helpers."""

from __future__ import annotations

import hashlib
import random


def stable_seed(*parts: object) -> int:
    """Platform- and run-stable 64-bit seed from the given parts."""
    material = "|".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


def stable_rng(*parts: object) -> random.Random:
    return random.Random(stable_seed(*parts))
