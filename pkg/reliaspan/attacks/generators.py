"""
ReliaSpan - Attack Generators

Oblivious generators see only n and a seed. The remark-middle attack reads
the built spanner and removes the c(M) points of every level closest to the
middle, which cuts every edge that crosses it.
"""
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple

import numpy as np

from reliaspan.construction.spanner1d import Spanner1D
from reliaspan.core.exceptions import InvalidInputError
from reliaspan.core.logging import app_logger
from reliaspan.core.seeding import ATTACK, derive_seed, rng


class AttackKind(str, Enum):
    UNIFORM = "uniform"
    BLOCK = "block"
    MULTIBLOCK = "multiblock"
    PERIODIC = "periodic"
    CUSTOM = "custom"
    REMARK_MIDDLE = "remark-middle"


@dataclass(frozen=True)
class Attack:
    """
    An attack set B on [1..n]

    Attributes:
        kind: Generator that produced it
        n: Vertex count
        seed: Seed it was drawn with (None for custom and remark-middle)
        vertices: Sorted attacked vertices
        oblivious: False only for remark-middle
    """
    kind: AttackKind
    n: int
    seed: Optional[int]
    vertices: Tuple[int, ...]
    oblivious: bool = True

    def __post_init__(self):
        if self.vertices and (self.vertices[0] < 1 or self.vertices[-1] > self.n):
            raise InvalidInputError(f"attack vertices must lie in [1, {self.n}]")
        if self.kind is AttackKind.REMARK_MIDDLE and self.oblivious:
            raise InvalidInputError("remark-middle attacks are never oblivious")

    @property
    def size(self) -> int:
        return len(self.vertices)

    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        if self.vertices:
            out[np.asarray(self.vertices) - 1] = True
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "n": self.n, "seed": self.seed, "vertices": list(self.vertices)}


class AttackGenerator(ABC):
    """
    Base class for attack generators

    Subclasses implement sample(); generate() validates and packages the result.
    """

    kind: AttackKind
    oblivious: bool = True

    def __init__(self, n: int, seed: Optional[int] = None):
        if n < 1:
            raise InvalidInputError(f"attacks need n >= 1, got {n}")
        self.n = n
        self.seed = seed
        self.rng = rng(derive_seed(ATTACK, seed if seed is not None else 0, self.kind.value, n))

    @abstractmethod
    def sample(self, size: int) -> np.ndarray:
        """Draw the attacked vertices (1-based)"""
        pass

    def generate(self, size: int) -> Attack:
        if not 0 <= size <= self.n:
            raise InvalidInputError(f"attack size {size} outside [0, {self.n}]")
        vertices = tuple(sorted(set(int(v) for v in self.sample(size))))
        app_logger.debug(f"{self.kind.value} attack: n={self.n}, |B|={len(vertices)}, seed={self.seed}")
        return Attack(kind=self.kind, n=self.n, seed=self.seed, vertices=vertices, oblivious=self.oblivious)


class UniformAttack(AttackGenerator):
    """Random k-subset"""
    kind = AttackKind.UNIFORM

    def sample(self, size: int) -> np.ndarray:
        return self.rng.choice(self.n, size=size, replace=False) + 1


class BlockAttack(AttackGenerator):
    """Random contiguous run of length k"""
    kind = AttackKind.BLOCK

    def sample(self, size: int) -> np.ndarray:
        if size == 0:
            return np.empty(0, dtype=np.int64)
        start = int(self.rng.integers(1, self.n - size + 2))
        return np.arange(start, start + size)


class MultiBlockAttack(AttackGenerator):
    """b disjoint, non-touching runs of near-equal length totalling k"""
    kind = AttackKind.MULTIBLOCK

    def __init__(self, n: int, seed: Optional[int] = None, blocks: int = 2):
        super().__init__(n, seed)
        if blocks < 1:
            raise InvalidInputError(f"multiblock needs at least one block, got {blocks}")
        self.blocks = blocks

    def sample(self, size: int) -> np.ndarray:
        b = min(self.blocks, size) if size else 0
        if b == 0:
            return np.empty(0, dtype=np.int64)
        free = self.n - size - (b - 1)
        if free < 0:
            raise InvalidInputError(f"{b} separated blocks of total size {size} do not fit in n={self.n}")
        lengths = [size // b + (1 if j < size % b else 0) for j in range(b)]
        cuts = np.sort(self.rng.integers(0, free + 1, size=b))
        gaps = np.diff(np.concatenate([[0], cuts]))
        out, pos = [], 1
        for j in range(b):
            pos += int(gaps[j]) + (1 if j else 0)
            out.append(np.arange(pos, pos + lengths[j]))
            pos += lengths[j]
        return np.concatenate(out)


class PeriodicAttack(AttackGenerator):
    """Every ceil(1/fraction)-th vertex from a random offset"""
    kind = AttackKind.PERIODIC

    def __init__(self, n: int, seed: Optional[int] = None, fraction: float = 0.1):
        super().__init__(n, seed)
        if not 0 < fraction <= 1:
            raise InvalidInputError(f"periodic fraction must lie in (0, 1], got {fraction}")
        self.step = math.ceil(1 / fraction)

    def sample(self, size: int) -> np.ndarray:
        offset = int(self.rng.integers(1, min(self.step, self.n) + 1))
        return np.arange(offset, self.n + 1, self.step)

    def generate(self, size: Optional[int] = None) -> Attack:
        """The size is fixed by the period"""
        return super().generate(len(range(1, self.n + 1, self.step)))


def remark_middle(s: Spanner1D) -> Attack:
    """
    Union over levels i <= M of the c(M) points of P_i closest to n/2

    Consecutive points of P_i on opposite sides of the removed run are more
    than c(M) >= c(i) ranks apart, so no edge of any level crosses it.
    """
    half = s.n / 2
    reach = s.conn[s.M]
    chosen = set()
    for i in range(s.M + 1):
        row = s.members(i)
        order = np.lexsort((row, np.abs(row - half)))
        chosen.update(row[order[:reach]].tolist())
    app_logger.info(f"Remark-middle attack: n={s.n}, M={s.M}, c(M)={reach}, |B|={len(chosen)}")
    return Attack(
        kind=AttackKind.REMARK_MIDDLE,
        n=s.n,
        seed=None,
        vertices=tuple(sorted(chosen)),
        oblivious=False,
    )


def custom_attack(n: int, vertices: Iterable[int]) -> Attack:
    return Attack(kind=AttackKind.CUSTOM, n=n, seed=None, vertices=tuple(sorted(set(int(v) for v in vertices))))


GENERATORS = {
    AttackKind.UNIFORM: UniformAttack,
    AttackKind.BLOCK: BlockAttack,
    AttackKind.MULTIBLOCK: MultiBlockAttack,
    AttackKind.PERIODIC: PeriodicAttack,
}


def generate(
    kind: str,
    n: int,
    size: Optional[int] = None,
    fraction: Optional[float] = None,
    seed: Optional[int] = None,
    spanner: Optional[Spanner1D] = None,
    blocks: int = 2,
    vertices: Optional[Iterable[int]] = None,
) -> Attack:
    """
    Build an attack of the given kind

    Args:
        kind: uniform, block, multiblock, periodic, custom or remark-middle
        n: Vertex count
        size: Number of attacked vertices (or fraction of n)
        fraction: Attacked fraction, used when size is not given
        seed: Attack seed (kept in its own namespace)
        spanner: Built spanner, required for remark-middle
        blocks: Run count for multiblock
        vertices: Explicit set for custom

    Returns:
        Attack
    """
    try:
        kind = AttackKind(kind)
    except ValueError:
        raise InvalidInputError(f"unknown attack kind {kind!r}") from None

    if kind is AttackKind.REMARK_MIDDLE:
        if spanner is None:
            raise InvalidInputError("remark-middle attack needs the built spanner")
        if spanner.n != n:
            raise InvalidInputError(f"spanner is over n={spanner.n}, attack over n={n}")
        return remark_middle(spanner)
    if kind is AttackKind.CUSTOM:
        if vertices is None:
            raise InvalidInputError("custom attack needs explicit vertices")
        return custom_attack(n, vertices)
    if kind is AttackKind.PERIODIC:
        if fraction is None:
            if not size:
                raise InvalidInputError("periodic attack needs a fraction or a positive size")
            fraction = size / n
        return PeriodicAttack(n, seed, fraction).generate()

    if size is None:
        if fraction is None:
            raise InvalidInputError(f"{kind.value} attack needs a size or a fraction")
        size = int(round(fraction * n))
    if kind is AttackKind.MULTIBLOCK:
        return MultiBlockAttack(n, seed, blocks).generate(size)
    return GENERATORS[kind](n, seed).generate(size)
