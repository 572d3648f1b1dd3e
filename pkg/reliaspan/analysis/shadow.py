"""
ReliaSpan - Alpha-Shadows of an Attack

i is in the left alpha-shadow of B when some interval [i..j] is at least an
alpha fraction attacked; the right shadow uses intervals [h..i]. With
alpha = a/b and g(j) = b*prefix(j) - a*j, i is in the left shadow iff
max_{j >= i} g(j) >= g(i-1), so both shadows fall out of one suffix maximum
and one prefix minimum in exact integer arithmetic.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Set, Union

import numpy as np
import pandas as pd

from reliaspan.core.exceptions import InvalidInputError

AlphaLike = Union[float, Fraction]


def as_fraction(alpha: AlphaLike) -> Fraction:
    """Exact ratio for alpha; floats are read through their shortest repr"""
    if isinstance(alpha, Fraction):
        return alpha
    return Fraction(repr(float(alpha))).limit_denominator(10**9)


def attack_mask(B: Iterable[int], n: int) -> np.ndarray:
    """Boolean mask over [1..n] with mask[v-1] set for v in B"""
    mask = np.zeros(n, dtype=bool)
    idx = np.fromiter((int(v) for v in B), dtype=np.int64)
    if idx.size:
        if idx.min() < 1 or idx.max() > n:
            raise InvalidInputError(f"attack contains vertices outside [1, {n}]")
        mask[idx - 1] = True
    return mask


@dataclass(frozen=True, eq=False)
class ShadowProfile:
    """Left, right and combined alpha-shadow masks over [1..n]"""
    alpha: Fraction
    left_mask: np.ndarray
    right_mask: np.ndarray

    @property
    def combined_mask(self) -> np.ndarray:
        return self.left_mask | self.right_mask

    @property
    def left(self) -> Set[int]:
        return set((np.flatnonzero(self.left_mask) + 1).tolist())

    @property
    def right(self) -> Set[int]:
        return set((np.flatnonzero(self.right_mask) + 1).tolist())

    @property
    def combined(self) -> Set[int]:
        return set((np.flatnonzero(self.combined_mask) + 1).tolist())


def compute_shadow(B: Iterable[int], alpha: AlphaLike, n: int) -> ShadowProfile:
    """
    Left/right/combined alpha-shadow of B in [1..n]

    Args:
        B: Attacked vertices
        alpha: Density threshold in (0, 1]
        n: Domain size

    Returns:
        ShadowProfile
    """
    a = as_fraction(alpha)
    if not 0 < a <= 1:
        raise InvalidInputError(f"alpha must lie in (0, 1], got {alpha}")
    mask = B if isinstance(B, np.ndarray) and B.dtype == bool else attack_mask(B, n)

    prefix = np.concatenate([[0], np.cumsum(mask, dtype=np.int64)])
    g = a.denominator * prefix - a.numerator * np.arange(n + 1, dtype=np.int64)

    suffix_max = np.maximum.accumulate(g[::-1])[::-1]
    left = suffix_max[1:] >= g[:-1]

    prefix_min = np.minimum.accumulate(g[:-1])
    right = g[1:] >= prefix_min

    return ShadowProfile(alpha=a, left_mask=left, right_mask=right)


@dataclass(frozen=True, eq=False)
class RoundClassification:
    """
    depth[v-1] = smallest k with v in the (sp / 2^k)-shadow, inf if none

    Attributes:
        sp: Baseline alpha
        depth: Float array over [1..n]; finite entries are integers
        max_round: Largest k examined
    """
    sp: Fraction
    depth: np.ndarray
    max_round: int

    def round_of(self, v: int) -> float:
        return float(self.depth[v - 1])

    def shadow(self, k: int) -> Set[int]:
        """S_k = vertices with depth <= k"""
        return set((np.flatnonzero(self.depth <= k) + 1).tolist())


def classify_rounds(B: Iterable[int], sp: AlphaLike, n: int) -> RoundClassification:
    """
    Classify every vertex by the round at which it is buried in the shadow

    Args:
        B: Attacked vertices
        sp: Baseline alpha in (0, 1)
        n: Domain size

    Returns:
        RoundClassification with rounds capped at log2 of the padded size
    """
    base = as_fraction(sp)
    if not 0 < base < 1:
        raise InvalidInputError(f"sp must lie in (0, 1), got {sp}")
    mask = attack_mask(B, n)
    max_round = max(0, (n - 1).bit_length())
    depth = np.full(n, np.inf)
    for k in range(max_round + 1):
        buried = compute_shadow(mask, base / 2**k, n).combined_mask
        depth[buried & np.isinf(depth)] = k
        if not np.isinf(depth).any():
            break
    return RoundClassification(sp=base, depth=depth, max_round=max_round)


def shadow_size_bound(attack_size: int, alpha: AlphaLike) -> int:
    """(1 + 2 ceil(1/alpha)) |B|"""
    return (1 + 2 * math.ceil(1 / as_fraction(alpha))) * attack_size


def high_alpha_bound(attack_size: int, alpha: AlphaLike) -> Fraction:
    """|B| / (2 alpha - 1), meaningful for alpha in (2/3, 1)"""
    a = as_fraction(alpha)
    if not Fraction(2, 3) < a < 1:
        raise InvalidInputError(f"high-alpha bound needs alpha in (2/3, 1), got {alpha}")
    return attack_size / (2 * a - 1)


def to_frame(profile: ShadowProfile, classification: RoundClassification) -> pd.DataFrame:
    """Per-vertex table: vertex, in_left, in_right, depth"""
    n = len(profile.left_mask)
    depth = pd.Series(classification.depth).map(lambda d: "inf" if math.isinf(d) else str(int(d)))
    return pd.DataFrame({
        "vertex": np.arange(1, n + 1),
        "in_left": profile.left_mask.astype(int),
        "in_right": profile.right_mask.astype(int),
        "depth": depth,
    })
