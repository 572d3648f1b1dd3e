"""
ReliaSpan - Deterministic Seed Derivation

Every random choice in the library is a pure function of a 64-bit seed and
a position, so structures can be rebuilt bit-for-bit from their seeds.
"""
import hashlib
import secrets
import struct

import numpy as np

SEED_MASK = (1 << 64) - 1

CONSTRUCTION = "construction"
ATTACK = "attack"
COPY = "copy"
TRIAL = "trial"


def derive_seed(namespace: str, *parts: object) -> int:
    """
    Derive a 64-bit child seed from a namespace and any printable parts

    Args:
        namespace: Seed namespace ("construction", "attack", "copy", "trial")
        parts: Values identifying the child (base seed, indices, ...)

    Returns:
        Unsigned 64-bit integer
    """
    signature = "_".join([namespace, *(str(p) for p in parts)])
    digest = hashlib.sha256(signature.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def coin(seed: int, level: int, index: int) -> int:
    """Unbiased bit for tournament node (level, index) under seed"""
    packed = struct.pack(">QQQ", seed & SEED_MASK, level, index)
    return hashlib.blake2b(packed, digest_size=8).digest()[-1] & 1


def rng(seed: int) -> np.random.Generator:
    """numpy generator seeded from a 64-bit seed"""
    return np.random.default_rng(seed & SEED_MASK)


def fresh_seed() -> int:
    """Random 63-bit seed for runs started without --seed"""
    return secrets.randbits(63)
