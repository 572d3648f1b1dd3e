"""
ReliaSpan - One-dimensional Reliable 1-Spanner

Level i connects every point of P_i with its c(i) = ceil(2^(i/2) / eps)
successors and predecessors in P_i, for i = 0..M. Edge sets are kept
implicit (they are fully determined by the gradation and c(i)) and are
enumerated only on demand.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Sequence, Set, Tuple

import numpy as np

from reliaspan.construction.gradation import Gradation, build_gradation, next_power_of_two
from reliaspan.core.config import get_settings
from reliaspan.core.exceptions import InvalidInputError
from reliaspan.core.logging import app_logger
from reliaspan.core.seeding import CONSTRUCTION, derive_seed

settings = get_settings()

Edge = Tuple[int, int]


@dataclass(frozen=True)
class Params1D:
    """
    Construction parameters of the 1-D spanner

    Attributes:
        n: Number of real vertices
        n_padded: Tournament size (next power of two)
        rho: Reliability target in (0, 1/2)
        delta: Failure probability of the probabilistic variant, None for the expectation variant
        c_const: The constant c of the eps formula
        sp: Shadow baseline alpha = 1 - rho/8
        eps_step: eps of the construction
        M: Highest connected level
    """
    n: int
    n_padded: int
    rho: float
    delta: Optional[float]
    c_const: float
    sp: float
    eps_step: float
    M: int

    @property
    def degenerate(self) -> bool:
        """eps * n_padded <= 1: the whole construction is a single clique level"""
        return self.M == 0

    @property
    def variant(self) -> str:
        return "expectation" if self.delta is None else "probabilistic"

    def conn(self, i: int) -> int:
        """Per-level reach c(i)"""
        return math.ceil(2.0 ** (i / 2) / self.eps_step)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "rho": self.rho,
            "delta": self.delta,
            "c_const": self.c_const,
            "eps_step": self.eps_step,
            "sp": self.sp,
            "M": self.M,
        }


def eps_for(rho: float, delta: Optional[float], c_const: float) -> float:
    """eps = rho / (c ln(1/rho)), or rho / (c (ln(1/rho) + ln(1/delta))) with delta"""
    log_term = math.log(1.0 / rho)
    if delta is not None:
        log_term += math.log(1.0 / delta)
    return rho / (c_const * log_term)


def top_level_for(n_padded: int, eps_step: float) -> int:
    """Smallest M with n_padded / 2^M <= 2^(M/2) / eps, clamped to [0, log2 n_padded]"""
    top = n_padded.bit_length() - 1
    for m in range(top + 1):
        if n_padded * eps_step <= 2.0 ** (1.5 * m):
            return m
    return top


def derive_params(
    n: int,
    rho: float,
    delta: Optional[float] = None,
    c_const: Optional[float] = None,
    max_rho: float = 0.5,
) -> Params1D:
    """
    Derive sp, eps and M for the expectation or probabilistic variant

    Args:
        n: Number of vertices
        rho: Reliability target, 0 < rho < max_rho
        delta: Optional failure probability, 0 < delta < 1
        c_const: Constant c >= 1 (settings default 2^11)
        max_rho: Upper limit for rho; the d-dimensional layer passes 1

    Returns:
        Params1D
    """
    c_const = settings.C_CONST_DEFAULT if c_const is None else c_const
    if n < 1:
        raise InvalidInputError(f"n must be positive, got {n}")
    if not 0 < rho < max_rho:
        raise InvalidInputError(f"rho must lie in (0, {max_rho}), got {rho}")
    if delta is not None and not 0 < delta < 1:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta}")
    if c_const < 1:
        raise InvalidInputError(f"c_const must be >= 1, got {c_const}")

    n_padded = next_power_of_two(n)
    eps_step = eps_for(rho, delta, c_const)
    params = Params1D(
        n=n,
        n_padded=n_padded,
        rho=rho,
        delta=delta,
        c_const=c_const,
        sp=1.0 - rho / 8.0,
        eps_step=eps_step,
        M=top_level_for(n_padded, eps_step),
    )
    if params.degenerate:
        app_logger.debug(f"Degenerate parameters (eps*n={eps_step * n_padded:.3g} <= 1): single clique level")
    return params


class MonotoneGraph(Protocol):
    """Anything that answers edge queries on [1..n]"""

    n: int
    degenerate: bool

    def has_edge(self, u: int, v: int) -> bool: ...

    def forward_neighbors(self, u: int) -> np.ndarray: ...


@dataclass(frozen=True, eq=False)
class Spanner1D:
    """
    The spanner G on [1..n] with its per-level reach

    Attributes:
        gradation: The tournament level sets
        params: Construction parameters
        conn: conn[i] = c(i) for i = 0..M
    """
    gradation: Gradation
    params: Params1D
    conn: Tuple[int, ...]
    _forward: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.gradation.n_original

    @property
    def M(self) -> int:
        return self.params.M

    @property
    def degenerate(self) -> bool:
        return self.params.degenerate

    def members(self, i: int) -> np.ndarray:
        return self.gradation.members(i, trimmed=True)

    def adjacency_level(self, u: int, v: int) -> int:
        """Highest level at which u and v could share an edge"""
        return min(self.gradation.level(u), self.gradation.level(v), self.M)

    def has_edge(self, u: int, v: int) -> bool:
        """uv in E(G); the highest common level gives the smallest rank gap and the widest reach"""
        if u == v:
            return False
        h = self.adjacency_level(u, v)
        return abs(self.gradation.rank(h, u) - self.gradation.rank(h, v)) <= self.conn[h]

    def has_level_edge(self, i: int, u: int, v: int) -> bool:
        """uv in E_i"""
        if u == v or i > self.M:
            return False
        g = self.gradation
        if g.level(u) < i or g.level(v) < i:
            return False
        return abs(g.rank(i, u) - g.rank(i, v)) <= self.conn[i]

    def forward_neighbors(self, u: int) -> np.ndarray:
        """Neighbors of u greater than u, ascending"""
        cached = self._forward.get(u)
        if cached is not None:
            return cached
        g = self.gradation
        parts = []
        for h in range(min(g.level(u), self.M) + 1):
            row = self.members(h)
            r = int(np.searchsorted(row, u))
            parts.append(row[r + 1 : r + 1 + self.conn[h]])
        out = np.unique(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int64)
        self._forward[u] = out
        return out

    def backward_neighbors(self, u: int) -> np.ndarray:
        """Neighbors of u smaller than u, ascending"""
        g = self.gradation
        parts = []
        for h in range(min(g.level(u), self.M) + 1):
            row = self.members(h)
            r = int(np.searchsorted(row, u))
            parts.append(row[max(0, r - self.conn[h]) : r])
        return np.unique(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int64)

    def level_edges(self, i: int) -> np.ndarray:
        """E_i as an (|E_i|, 2) array of pairs u < v"""
        row = self.members(i)
        reach = min(self.conn[i], len(row) - 1)
        if reach <= 0:
            return np.empty((0, 2), dtype=np.int64)
        return np.concatenate([np.stack([row[:-d], row[d:]], axis=1) for d in range(1, reach + 1)])

    def edges(self) -> Set[Edge]:
        """Flattened E(G) = union of E_0..E_M"""
        out: Set[Edge] = set()
        for i in range(self.M + 1):
            out.update(map(tuple, self.level_edges(i).tolist()))
        return out

    def is_clique(self, vertices: Sequence[int], level: int) -> bool:
        """
        Whether a set of P_level points is a clique in G

        A point whose own level is exactly i can only use level-i edges, so it
        must be within c(i) ranks of both extremes of the set; the points that
        climb higher are checked recursively on the next level.
        """
        pts = np.asarray(sorted(vertices), dtype=np.int64)
        g = self.gradation
        i = level
        while len(pts) > 1 and i < self.M:
            ranks = np.searchsorted(g.members(i, trimmed=False), pts)
            exact = g.level_of[pts - 1] == i
            if exact.any():
                spread = np.maximum(ranks[exact] - ranks[0], ranks[-1] - ranks[exact])
                if int(spread.max()) > self.conn[i]:
                    return False
            pts = pts[~exact]
            i += 1
        return True


def conn_table(params: Params1D) -> Tuple[int, ...]:
    return tuple(params.conn(i) for i in range(params.M + 1))


def build_1d(g: Gradation, p: Params1D) -> Spanner1D:
    """
    Materialize the spanner for a gradation and parameters

    Args:
        g: Gradation over [1..n]
        p: Parameters derived for the same n

    Returns:
        Spanner1D
    """
    if g.n_original != p.n or g.n_padded != p.n_padded:
        raise InvalidInputError(f"gradation is over n={g.n_original}, params over n={p.n}")
    conn = conn_table(p)
    top = len(g.members(p.M, trimmed=False))
    if conn[p.M] < top - 1:
        raise InvalidInputError(f"top level {p.M} is not a clique: c(M)={conn[p.M]} < |P_M|-1={top - 1}")
    app_logger.debug(f"Spanner1D: n={p.n}, M={p.M}, eps={p.eps_step:.4g}, c(0)={conn[0]}, c(M)={conn[p.M]}")
    return Spanner1D(gradation=g, params=p, conn=conn)


def build_spanner(
    n: int,
    rho: float,
    delta: Optional[float] = None,
    c_const: Optional[float] = None,
    seed: int = 0,
) -> Spanner1D:
    """Convenience wrapper: derive parameters, play the tournament, build"""
    params = derive_params(n, rho, delta, c_const)
    return build_1d(build_gradation(n, derive_seed(CONSTRUCTION, seed)), params)


def level_pair_count(m: int, c: int) -> int:
    """Pairs at rank distance <= c among m points on a path"""
    if m > c:
        return c * m - c * (c + 1) // 2
    return m * (m - 1) // 2


@dataclass(frozen=True)
class EdgeCount:
    per_level: Tuple[int, ...]
    total: int
    distinct: Optional[int] = None


def edge_count(s: Spanner1D, distinct: bool = False) -> EdgeCount:
    """
    Count edges per level in closed form

    Args:
        s: Built spanner
        distinct: Also enumerate |E(G)| (a pair may appear on several levels)

    Returns:
        EdgeCount with total = sum of |E_i|
    """
    per_level = tuple(level_pair_count(len(s.members(i)), s.conn[i]) for i in range(s.M + 1))
    return EdgeCount(
        per_level=per_level,
        total=sum(per_level),
        distinct=len(s.edges()) if distinct else None,
    )


def edge_bound(params: Params1D) -> float:
    """7 n / eps, from summing 2 / 2^(i/2) over all levels"""
    return 7.0 * params.n / params.eps_step


@dataclass(frozen=True, eq=False)
class SpannerUnion:
    """
    Edge union of independent 1-D spanners on the same vertex set

    Attributes:
        copies: The boosted copies
    """
    copies: Tuple[Spanner1D, ...]
    _forward: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.copies[0].n

    @property
    def copy_count(self) -> int:
        return len(self.copies)

    @property
    def degenerate(self) -> bool:
        """A single clique copy makes the union complete"""
        return any(c.degenerate for c in self.copies)

    def has_edge(self, u: int, v: int) -> bool:
        return any(c.has_edge(u, v) for c in self.copies)

    def forward_neighbors(self, u: int) -> np.ndarray:
        cached = self._forward.get(u)
        if cached is None:
            cached = np.unique(np.concatenate([c.forward_neighbors(u) for c in self.copies]))
            self._forward[u] = cached
        return cached

    def edges(self) -> Set[Edge]:
        out: Set[Edge] = set()
        for c in self.copies:
            out |= c.edges()
        return out


def boost_union(spanners: List[Spanner1D]) -> SpannerUnion:
    """
    Union of independent copies

    Args:
        spanners: Copies over the same n

    Returns:
        SpannerUnion recording the copy count
    """
    if not spanners:
        raise InvalidInputError("boost_union needs at least one spanner")
    sizes = {s.n for s in spanners}
    if len(sizes) != 1:
        raise InvalidInputError(f"copies are over different vertex sets: n in {sorted(sizes)}")
    return SpannerUnion(copies=tuple(spanners))


def boost_params(rho: float, delta: float) -> Tuple[int, float]:
    """Copy count ceil(log2(1/delta)) and per-copy reliability rho/2 of Markov boosting"""
    if not 0 < delta < 1:
        raise InvalidInputError(f"delta must lie in (0, 1), got {delta}")
    return max(1, math.ceil(math.log2(1.0 / delta))), rho / 2.0


def build_boosted_1d(
    n: int,
    rho: float,
    delta: float,
    c_const: Optional[float] = None,
    seed: int = 0,
) -> SpannerUnion:
    """Union of ceil(log2(1/delta)) expectation-variant copies built with rho/2"""
    copies, copy_rho = boost_params(rho, delta)
    params = derive_params(n, copy_rho, None, c_const)
    spanners = [
        build_1d(build_gradation(n, derive_seed(CONSTRUCTION, seed, "boost", k)), params)
        for k in range(copies)
    ]
    app_logger.info(f"Boosted 1-D spanner: n={n}, copies={copies}, rho per copy={copy_rho}")
    return boost_union(spanners)

