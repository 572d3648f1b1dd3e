"""
ReliaSpan - Damaged-Set Extension and Loss Rate

The smallest B-hat containing B that leaves every remaining pair with its
guaranteed path is B plus a minimum vertex cover of the bad-pair graph.
Bad-pair graphs are kept as dense boolean matrices over the survivors.
"""
from dataclasses import dataclass
from typing import FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from reliaspan.core.config import get_settings
from reliaspan.core.exceptions import InvalidInputError, UndefinedLossError
from reliaspan.core.logging import app_logger

settings = get_settings()

Pair = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class BadPairGraph:
    """
    Survivor pairs without the required path

    Attributes:
        survivors: Sorted vertex labels of the residual graph
        matrix: Symmetric boolean adjacency over survivors (index, not label)
    """
    survivors: np.ndarray
    matrix: np.ndarray

    @classmethod
    def from_matrix(cls, survivors: Sequence[int], matrix: np.ndarray) -> "BadPairGraph":
        labels = np.asarray(survivors, dtype=np.int64)
        m = np.asarray(matrix, dtype=bool)
        if m.shape != (len(labels), len(labels)):
            raise InvalidInputError(f"bad-pair matrix shape {m.shape} does not match {len(labels)} survivors")
        m = m | m.T
        np.fill_diagonal(m, False)
        return cls(survivors=labels, matrix=m)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair], survivors: Optional[Sequence[int]] = None) -> "BadPairGraph":
        pairs = [(int(u), int(v)) for u, v in pairs]
        if survivors is None:
            survivors = sorted({x for p in pairs for x in p})
        labels = np.asarray(sorted(survivors), dtype=np.int64)
        m = np.zeros((len(labels), len(labels)), dtype=bool)
        for u, v in pairs:
            i, j = np.searchsorted(labels, [u, v])
            if i >= len(labels) or j >= len(labels) or labels[i] != u or labels[j] != v:
                raise InvalidInputError(f"pair ({u}, {v}) involves a non-survivor")
            if u == v:
                raise InvalidInputError(f"self pair ({u}, {v})")
            m[i, j] = m[j, i] = True
        return cls(survivors=labels, matrix=m)

    @property
    def count(self) -> int:
        return int(np.triu(self.matrix, 1).sum())

    def __len__(self) -> int:
        return self.count

    def pairs(self) -> Iterator[Pair]:
        """(u, v) label pairs with u < v"""
        rows, cols = np.nonzero(np.triu(self.matrix, 1))
        for i, j in zip(rows.tolist(), cols.tolist()):
            yield int(self.survivors[i]), int(self.survivors[j])

    def contains(self, u: int, v: int) -> bool:
        i, j = np.searchsorted(self.survivors, [u, v])
        if i >= len(self.survivors) or j >= len(self.survivors):
            return False
        if self.survivors[i] != u or self.survivors[j] != v:
            return False
        return bool(self.matrix[i, j])

    def is_cover(self, witness: Iterable[int]) -> bool:
        """Whether removing witness leaves no bad pair"""
        keep = ~np.isin(self.survivors, np.fromiter(witness, dtype=np.int64))
        return not self.matrix[np.ix_(keep, keep)].any()


@dataclass(frozen=True)
class Extension:
    """Certified bounds on the minimum vertex cover of a bad-pair graph"""
    lower: int
    upper: int
    exact: bool
    witness: FrozenSet[int]


def _kernelize(matrix: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """
    Drop isolated vertices and resolve pendant vertices (their neighbor is forced)

    Returns:
        (active mask of the kernel, forced matrix indices)
    """
    active = np.ones(len(matrix), dtype=bool)
    deg = matrix.sum(axis=1).astype(np.int64)
    active &= deg > 0
    forced: List[int] = []
    while True:
        pendants = np.flatnonzero(active & (deg == 1))
        if pendants.size == 0:
            break
        p = int(pendants[0])
        w = int(np.flatnonzero(matrix[p] & active)[0])
        forced.append(w)
        active[w] = False
        deg -= (matrix[w] & active).astype(np.int64)
        deg[w] = 0
        active &= deg > 0
    return active, forced


def _greedy_cover(matrix: np.ndarray, active: np.ndarray) -> List[int]:
    """Repeatedly take a maximum-degree vertex"""
    alive = active.copy()
    deg = (matrix & alive[None, :]).sum(axis=1) * alive
    cover: List[int] = []
    while deg.max(initial=0) > 0:
        v = int(np.argmax(deg))
        cover.append(v)
        alive[v] = False
        deg = deg - (matrix[v] & alive)
        deg[v] = 0
    return cover


def _maximal_matching(matrix: np.ndarray, active: np.ndarray) -> List[Tuple[int, int]]:
    matched = ~active.copy()
    out: List[Tuple[int, int]] = []
    for u in np.flatnonzero(active).tolist():
        if matched[u]:
            continue
        free = np.flatnonzero(matrix[u] & ~matched)
        if free.size:
            v = int(free[0])
            matched[u] = matched[v] = True
            out.append((u, v))
    return out


def _maximum_matching_size(matrix: np.ndarray, active: np.ndarray) -> int:
    idx = np.flatnonzero(active)
    sub = np.triu(matrix[np.ix_(idx, idx)], 1)
    rows, cols = np.nonzero(sub)
    graph = nx.Graph()
    graph.add_edges_from(zip(idx[rows].tolist(), idx[cols].tolist()))
    return len(nx.max_weight_matching(graph, maxcardinality=True))


class _VertexCoverSearch:
    """Branch and bound over a kernel with bitmask adjacency"""

    def __init__(self, matrix: np.ndarray, vertices: np.ndarray):
        self.vertices = vertices.tolist()
        k = len(self.vertices)
        sub = matrix[np.ix_(vertices, vertices)]
        self.adj = [sum(1 << j for j in np.flatnonzero(sub[i]).tolist()) for i in range(k)]
        self.best_size = k
        self.best = (1 << k) - 1

    def _matching_bound(self, alive: int) -> int:
        size = 0
        free = alive
        while free:
            u = (free & -free).bit_length() - 1
            free &= ~(1 << u)
            nbrs = self.adj[u] & free
            if nbrs:
                v = (nbrs & -nbrs).bit_length() - 1
                free &= ~(1 << v)
                size += 1
        return size

    def _search(self, alive: int, taken: int, size: int):
        if size + self._matching_bound(alive) >= self.best_size:
            return
        pick, pick_deg = -1, 0
        rest = alive
        while rest:
            u = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            d = bin(self.adj[u] & alive).count("1")
            if d > pick_deg:
                pick, pick_deg = u, d
        if pick_deg == 0:
            self.best_size, self.best = size, taken
            return
        nbrs = self.adj[pick] & alive
        self._search(alive & ~(1 << pick), taken | (1 << pick), size + 1)
        # with maximum degree 1 the rest is a matching and either endpoint will do
        if pick_deg > 1:
            self._search(alive & ~(1 << pick) & ~nbrs, taken | nbrs, size + bin(nbrs).count("1"))

    def solve(self, upper: List[int]) -> List[int]:
        local = {v: i for i, v in enumerate(self.vertices)}
        self.best_size = len(upper)
        self.best = sum(1 << local[v] for v in upper)
        self._search((1 << len(self.vertices)) - 1, 0, 0)
        return [self.vertices[i] for i in range(len(self.vertices)) if self.best >> i & 1]


def min_extension(
    pairs: Union[BadPairGraph, Iterable[Pair]],
    kernel_limit: Optional[int] = None,
    matching_edge_limit: Optional[int] = None,
) -> Extension:
    """
    Minimum vertex cover of the bad-pair graph, exact when the kernel is small

    Args:
        pairs: Bad-pair graph or iterable of survivor pairs
        kernel_limit: Largest kernel solved exactly (settings EXACT_VC_KERNEL_LIMIT)
        matching_edge_limit: Use an exact maximum matching for the lower bound
            up to this many kernel pairs (settings MAX_MATCHING_EDGE_LIMIT)

    Returns:
        Extension with lower <= upper and a cover witness of size upper
    """
    graph = pairs if isinstance(pairs, BadPairGraph) else BadPairGraph.from_pairs(pairs)
    kernel_limit = settings.EXACT_VC_KERNEL_LIMIT if kernel_limit is None else kernel_limit
    matching_edge_limit = settings.MAX_MATCHING_EDGE_LIMIT if matching_edge_limit is None else matching_edge_limit
    m = graph.matrix
    labels = graph.survivors

    active, forced = _kernelize(m)
    kernel = np.flatnonzero(active)

    greedy = _greedy_cover(m, active)
    matching = _maximal_matching(m, active)
    paired = [x for e in matching for x in e]
    upper_cover = greedy if len(greedy) <= len(paired) else paired

    if len(kernel) <= kernel_limit:
        cover = _VertexCoverSearch(m, kernel).solve(upper_cover) if len(kernel) else []
        size = len(forced) + len(cover)
        witness = frozenset(int(labels[i]) for i in forced + cover)
        app_logger.debug(f"Exact extension {size} (kernel {len(kernel)}, forced {len(forced)})")
        return Extension(lower=size, upper=size, exact=True, witness=witness)

    kernel_pairs = int(np.triu(m[np.ix_(kernel, kernel)], 1).sum())
    if kernel_pairs <= matching_edge_limit:
        lower_kernel = _maximum_matching_size(m, active)
    else:
        lower_kernel = len(matching)
    lower = len(forced) + lower_kernel
    upper = len(forced) + len(upper_cover)
    app_logger.debug(
        f"Extension bounds [{lower}, {upper}] (kernel {len(kernel)} vertices, {kernel_pairs} pairs)"
    )
    return Extension(
        lower=lower,
        upper=upper,
        exact=lower == upper,
        witness=frozenset(int(labels[i]) for i in forced + upper_cover),
    )


def loss_rate(attack_size: int, extension: Extension) -> Tuple[float, float]:
    """
    Loss-rate interval |B-hat \\ B| / |B|

    Raises:
        UndefinedLossError: For an empty attack
    """
    if attack_size < 1:
        raise UndefinedLossError("loss undefined for empty attack")
    return extension.lower / attack_size, extension.upper / attack_size


@dataclass(frozen=True)
class LossReport:
    """
    Loss of one (spanner, attack) instance

    stairway_bad counts the bad survivors (outside the stairway set), the
    superset of B-hat \\ B that the reliability guarantee bounds.
    """
    attack_size: int
    bad_pairs: int
    extension_lower: int
    extension_upper: int
    exact: bool
    variant: str
    stairway_bad: Optional[int] = None

    @property
    def loss_rate_bounds(self) -> Tuple[float, float]:
        if self.attack_size < 1:
            raise UndefinedLossError("loss undefined for empty attack")
        return self.extension_lower / self.attack_size, self.extension_upper / self.attack_size

    @property
    def stairway_loss(self) -> Optional[float]:
        if self.stairway_bad is None or self.attack_size < 1:
            return None
        return self.stairway_bad / self.attack_size

    def to_dict(self) -> dict:
        lo, hi = self.loss_rate_bounds
        return {
            "attack_size": self.attack_size,
            "bad_pairs": self.bad_pairs,
            "extension_lower": self.extension_lower,
            "extension_upper": self.extension_upper,
            "exact": self.exact,
            "loss_lower": lo,
            "loss_upper": hi,
            "variant": self.variant,
            "stairway_bad": self.stairway_bad,
            "stairway_loss": self.stairway_loss,
        }


def loss_report(
    graph: BadPairGraph,
    attack_size: int,
    variant: str,
    stairway_bad: Optional[int] = None,
) -> LossReport:
    """Solve the extension and package it with the attack size"""
    if attack_size < 1:
        raise UndefinedLossError("loss undefined for empty attack")
    ext = min_extension(graph)
    return LossReport(
        attack_size=attack_size,
        bad_pairs=graph.count,
        extension_lower=ext.lower,
        extension_upper=ext.upper,
        exact=ext.exact,
        variant=variant,
        stairway_bad=stairway_bad,
    )
