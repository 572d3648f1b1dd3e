"""
ReliaSpan - Random Elimination Tournament (Gradation)

The tournament is a full binary tree over the leaves 1..n_padded. Every
internal node copies the value of one of its two children, chosen by an
unbiased coin, so the values reaching level i form the level set P_i.
"""
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from reliaspan.core.exceptions import InvalidInputError
from reliaspan.core.logging import app_logger
from reliaspan.core.seeding import coin


def next_power_of_two(n: int) -> int:
    """Smallest power of two >= n"""
    return 1 << max(0, (n - 1).bit_length())


@dataclass(frozen=True, eq=False)
class Gradation:
    """
    Nested level sets P_0 ⊇ P_1 ⊇ ... ⊇ P_log(n_padded)

    Attributes:
        n_padded: Number of tournament leaves (power of two)
        n_original: Number of real vertices; the rest are trimmed padding
        level_of: level_of[v - 1] is the highest level reached by vertex v
        seed: 64-bit seed the coins were derived from
    """
    n_padded: int
    n_original: int
    level_of: np.ndarray
    seed: int
    _members: Dict[int, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.level_of.setflags(write=False)

    @property
    def top_level(self) -> int:
        return self.n_padded.bit_length() - 1

    def members(self, i: int, trimmed: bool = True) -> np.ndarray:
        """
        Vertices of P_i in ascending order

        Args:
            i: Level, 0 <= i <= log2(n_padded)
            trimmed: Restrict to the real vertices 1..n_original

        Returns:
            Read-only sorted int64 array
        """
        if not 0 <= i <= self.top_level:
            raise InvalidInputError(f"level {i} outside [0, {self.top_level}]")
        full = self._members.get(i)
        if full is None:
            full = np.flatnonzero(self.level_of >= i).astype(np.int64) + 1
            full.setflags(write=False)
            self._members[i] = full
        if not trimmed or self.n_original == self.n_padded:
            return full
        return full[: np.searchsorted(full, self.n_original, side="right")]

    def level(self, v: int) -> int:
        return int(self.level_of[v - 1])

    def rank(self, i: int, v: int) -> int:
        """0-based position of v within sorted P_i (v need not belong to P_i)"""
        return int(np.searchsorted(self.members(i, trimmed=False), v))

    def sizes(self, trimmed: bool = False) -> List[int]:
        return [len(self.members(i, trimmed)) for i in range(self.top_level + 1)]

    def to_dict(self) -> dict:
        return {"n": self.n_original, "seed": self.seed, "level_of": self.level_of.tolist()}


def build_gradation(n: int, seed: int) -> Gradation:
    """
    Play the random elimination tournament on [1..n]

    Args:
        n: Number of vertices (>= 1); the tree is built on the next power of two
        seed: 64-bit seed; the coin of node (level, index) is coin(seed, level, index)

    Returns:
        Gradation
    """
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise InvalidInputError(f"gradation needs n >= 1, got {n!r}")
    n = int(n)
    n_padded = next_power_of_two(n)
    level_of = np.zeros(n_padded, dtype=np.int64)

    # winners[t] holds the vertex stored at node t of the current level
    winners = np.arange(1, n_padded + 1, dtype=np.int64)
    level = 0
    while len(winners) > 1:
        level += 1
        pick = np.fromiter(
            (coin(seed, level, t) for t in range(len(winners) // 2)),
            dtype=np.int64,
            count=len(winners) // 2,
        )
        winners = winners.reshape(-1, 2)[np.arange(len(pick)), pick]
        level_of[winners - 1] = level

    app_logger.debug(f"Gradation built: n={n}, n_padded={n_padded}, levels={level + 1}, seed={seed}")
    return Gradation(n_padded=n_padded, n_original=n, level_of=level_of, seed=seed)


def gradation_from_levels(n: int, seed: int, level_of: List[int]) -> Gradation:
    """Rebuild a gradation from its serialized level map, checking the tournament structure"""
    n_padded = next_power_of_two(n)
    if len(level_of) != n_padded:
        raise InvalidInputError(f"level_of has {len(level_of)} entries, expected {n_padded}")
    levels = np.asarray(level_of, dtype=np.int64)
    g = Gradation(n_padded=n_padded, n_original=n, level_of=levels, seed=seed)
    for i in range(g.top_level + 1):
        blocks = np.bincount((g.members(i, trimmed=False) - 1) >> i, minlength=n_padded >> i)
        if not np.all(blocks == 1):
            raise InvalidInputError(f"level_of violates the tournament block structure at level {i}")
    return g
