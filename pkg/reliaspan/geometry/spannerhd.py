"""
ReliaSpan - Reliable (1+eps)-Spanner in d Dimensions

For every ordering sigma of the locality-sensitive family and i = 1..N, a
1-D spanner G^i_sigma is built over the sigma-sorted points with reliability
rho' = rho / (3 M N). The spanner is the union of all of them. Copies are
built lazily and cached; when the per-copy parameters are degenerate every
copy is a clique and the union is the complete graph.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from reliaspan.analysis.loss import BadPairGraph
from reliaspan.analysis.resilience1d import bad_mask, monotone_path
from reliaspan.analysis.shadow import attack_mask
from reliaspan.construction.gradation import build_gradation
from reliaspan.construction.spanner1d import (
    Params1D,
    Spanner1D,
    boost_union,
    build_1d,
    derive_params,
    edge_bound,
    edge_count,
)
from reliaspan.core.config import get_settings
from reliaspan.core.exceptions import InvalidInputError
from reliaspan.core.logging import app_logger
from reliaspan.core.seeding import COPY, derive_seed
from reliaspan.geometry.lso import (
    NormalizationMap,
    Ordering,
    OrderingFamily,
    build_orderings,
    keys,
    sample_points,
    sort_order,
    to_fixed,
    verify_lso_property,
)

settings = get_settings()


@dataclass(frozen=True)
class ParamsHD:
    """
    Parameters of the d-dimensional construction

    Attributes:
        n: Number of points
        d: Dimension
        eps: Target stretch slack
        rho: Reliability target
        delta: Failure probability (probabilistic variant) or None
        varsigma: eps / 32
        N: Copies per ordering, ceil(log2 log2 n), at least 1
        M: Family size
        rho_prime: rho / (3 M N)
        delta_prime: delta / (M N) or None
        copy_params: 1-D parameters every copy is built with
    """
    n: int
    d: int
    eps: float
    rho: float
    delta: Optional[float]
    varsigma: float
    N: int
    M: int
    rho_prime: float
    delta_prime: Optional[float]
    copy_params: Params1D

    @property
    def variant(self) -> str:
        return "expectation" if self.delta is None else "probabilistic"

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "eps": self.eps,
            "rho": self.rho,
            "delta": self.delta,
            "varsigma": self.varsigma,
            "N": self.N,
            "M": self.M,
            "rho_prime": self.rho_prime,
            "delta_prime": self.delta_prime,
            "c_const": self.copy_params.c_const,
        }


def copies_per_ordering(n: int) -> int:
    return max(1, math.ceil(math.log2(math.log2(n)))) if n > 2 else 1


def derive_params_hd(
    n: int,
    d: int,
    eps: float,
    rho: float,
    family: OrderingFamily,
    delta: Optional[float] = None,
    c_const: Optional[float] = None,
) -> ParamsHD:
    if n < 2:
        raise InvalidInputError(f"the d-dimensional spanner needs n >= 2, got {n}")
    if not 0 < eps < 1:
        raise InvalidInputError(f"eps must lie in (0, 1), got {eps}")
    if not 0 < rho < 1:
        raise InvalidInputError(f"rho must lie in (0, 1), got {rho}")
    N = copies_per_ordering(n)
    M = family.count
    rho_prime = rho / (3 * M * N)
    delta_prime = None if delta is None else delta / (M * N)
    return ParamsHD(
        n=n,
        d=d,
        eps=eps,
        rho=rho,
        delta=delta,
        varsigma=eps / 32,
        N=N,
        M=M,
        rho_prime=rho_prime,
        delta_prime=delta_prime,
        copy_params=derive_params(n, rho_prime, delta_prime, c_const, max_rho=1.0),
    )


@dataclass(frozen=True, eq=False)
class CopyHD:
    """
    G^i_sigma: a 1-D spanner over the sigma-sorted points

    order[r-1] is the point id (1-based) of rank r; rank_of[v-1] inverts it.
    """
    ordering: Ordering
    copy: int
    order: np.ndarray
    rank_of: np.ndarray
    spanner: Spanner1D

    def ids(self, ranks: Iterable[int]) -> List[int]:
        return [int(self.order[r - 1]) for r in ranks]


@dataclass(frozen=True, eq=False)
class SpannerHD:
    """
    Union of the N copies of every ordering

    Attributes:
        points: Original coordinates, point v is points[v-1]
        normalization: Map into [0,1)^d
        X: Fixed-point normalized coordinates
        family: Ordering family
        params: Construction parameters
        seed: Base seed of all copies
    """
    points: np.ndarray
    normalization: NormalizationMap
    X: np.ndarray
    family: OrderingFamily
    params: ParamsHD
    seed: int
    _copies: Dict[Tuple[int, int], CopyHD] = field(default_factory=dict, repr=False)
    _samples: List[np.ndarray] = field(default_factory=list, repr=False)
    _edge_codes: List[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def degenerate(self) -> bool:
        return self.params.copy_params.degenerate

    @property
    def copy_total(self) -> int:
        return self.params.M * self.params.N

    def copy(self, sigma: Union[Ordering, int], i: int) -> CopyHD:
        """Copy i (1..N) of ordering sigma, built on first use"""
        sigma = sigma if isinstance(sigma, Ordering) else self.family.ordering(sigma)
        if not 1 <= i <= self.params.N:
            raise InvalidInputError(f"copy index {i} outside [1, {self.params.N}]")
        key = (sigma.index, i)
        cached = self._copies.get(key)
        if cached is not None:
            return cached
        order = sort_order(self.family, sigma, self.X) + 1
        rank_of = np.empty(self.n, dtype=np.int64)
        rank_of[order - 1] = np.arange(1, self.n + 1)
        g = build_gradation(self.n, derive_seed(COPY, self.seed, sigma.index, i))
        built = CopyHD(ordering=sigma, copy=i, order=order, rank_of=rank_of, spanner=build_1d(g, self.params.copy_params))
        self._copies[key] = built
        return built

    def require_materializable(self):
        if not self.degenerate and self.copy_total > settings.HD_MAX_MATERIALIZED_COPIES:
            raise InvalidInputError(
                f"{self.copy_total} non-degenerate copies exceed HD_MAX_MATERIALIZED_COPIES="
                f"{settings.HD_MAX_MATERIALIZED_COPIES}"
            )

    def all_copies(self, i: Optional[int] = None) -> Iterable[CopyHD]:
        self.require_materializable()
        rounds = range(1, self.params.N + 1) if i is None else [i]
        for sigma in self.family:
            for r in rounds:
                yield self.copy(sigma, r)

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        if self.degenerate:
            return True
        a, b = (u, v) if u < v else (v, u)
        codes = self.edge_codes()
        code = a * (self.n + 1) + b
        i = int(np.searchsorted(codes, code))
        return i < len(codes) and int(codes[i]) == code

    def edge_codes(self) -> np.ndarray:
        """Sorted u (n+1) + v codes of the union edges, computed once"""
        if not self._edge_codes:
            edges = self.edge_array()
            self._edge_codes.append(edges[:, 0] * (self.n + 1) + edges[:, 1])
        return self._edge_codes[0]

    def distance(self, u: int, v: int) -> float:
        """Euclidean distance between points u and v in original units"""
        return float(np.linalg.norm(self.points[u - 1] - self.points[v - 1]))

    def edge_array(self) -> np.ndarray:
        """Distinct union edges as (m, 2) point-id pairs u < v"""
        if self.degenerate:
            return np.array(np.triu_indices(self.n, 1)).T + 1
        parts = []
        for c in self.all_copies():
            for lv in range(c.spanner.M + 1):
                pairs = c.spanner.level_edges(lv)
                if len(pairs):
                    parts.append(c.order[pairs - 1])
        if not parts:
            return np.empty((0, 2), dtype=np.int64)
        ids = np.sort(np.concatenate(parts), axis=1)
        return np.unique(ids, axis=0)

    def samples(self) -> np.ndarray:
        if not self._samples:
            self._samples.append(sample_points(self.family.d, self.family.w, extra=self.X))
        return self._samples[0]


def build_hd(
    points: Sequence[Sequence[float]],
    eps: float,
    rho: float,
    delta: Optional[float] = None,
    c_const: Optional[float] = None,
    seed: int = 0,
    family: Optional[OrderingFamily] = None,
) -> SpannerHD:
    """
    Build the d-dimensional reliable spanner

    Args:
        points: n distinct points in R^d
        eps: Stretch slack in (0, 1)
        rho: Reliability in (0, 1)
        delta: Optional failure probability (probabilistic variant)
        c_const: Constant of the 1-D construction
        seed: Base seed; copy (sigma, i) is seeded independently from it
        family: Ordering family (default: shifted quadtree with varsigma = eps/32)

    Returns:
        SpannerHD
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or len(pts) < 2:
        raise InvalidInputError("build_hd needs at least two points")
    if len(np.unique(pts, axis=0)) != len(pts):
        raise InvalidInputError("points must be distinct")
    d = pts.shape[1]
    family = build_orderings(eps / 32, d) if family is None else family
    if family.d != d:
        raise InvalidInputError(f"family is {family.d}-dimensional, points are {d}-dimensional")

    norm = NormalizationMap.fit(pts)
    X = to_fixed(norm.apply(pts), family.w)
    if len(np.unique(X, axis=0)) != len(X):
        raise InvalidInputError(f"points collide at {family.w}-bit precision")

    params = derive_params_hd(len(pts), d, eps, rho, family, delta, c_const)
    spanner = SpannerHD(points=pts, normalization=norm, X=X, family=family, params=params, seed=seed)
    spanner.require_materializable()
    app_logger.info(
        f"SpannerHD: n={params.n}, d={d}, eps={eps}, M={params.M}, N={params.N}, "
        f"rho'={params.rho_prime:.3g}, degenerate={spanner.degenerate}"
    )
    return spanner


@dataclass(frozen=True)
class EdgeCountHD:
    total: int
    distinct: Optional[int]
    bound: float


def edge_count_hd(s: SpannerHD, distinct: bool = False) -> EdgeCountHD:
    """
    Sum of copy edge counts (with multiplicity) and N M times the 1-D bound

    Degenerate copies are counted in closed form without being built.
    """
    p = s.params
    bound = p.N * p.M * edge_bound(p.copy_params)
    if s.degenerate:
        total = p.N * p.M * (s.n * (s.n - 1) // 2)
    else:
        total = sum(edge_count(c.spanner).total for c in s.all_copies())
    return EdgeCountHD(total=total, distinct=len(s.edge_array()) if distinct else None, bound=bound)


@dataclass(frozen=True)
class HDPath:
    """
    Path between two survivors with its measured stretch

    Attributes:
        vertices: Point ids from p to q
        length: Sum of original edge lengths
        distance: Original distance between the endpoints
        defects: Recursion invariants that failed along the way
    """
    vertices: Tuple[int, ...]
    length: float
    distance: float
    defects: Tuple[str, ...] = ()

    @property
    def stretch(self) -> float:
        return self.length / self.distance if self.distance > 0 else 1.0


def _path_length(s: SpannerHD, path: Sequence[int]) -> float:
    pts = s.points[np.asarray(path) - 1]
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def _blocked(s: SpannerHD, B: Union[Iterable[int], np.ndarray]) -> np.ndarray:
    if isinstance(B, np.ndarray) and B.dtype == bool:
        return B
    return attack_mask(B, s.n)


def _copy_path(s: SpannerHD, c: CopyHD, blocked: np.ndarray, x: int, y: int) -> Optional[List[int]]:
    """Monotone path between x and y inside copy c, as point ids from x to y"""
    rx, ry = int(c.rank_of[x - 1]), int(c.rank_of[y - 1])
    ranks = monotone_path(c.spanner, blocked[c.order - 1], rx, ry)
    if ranks is None:
        return None
    ids = c.ids(ranks)
    return ids if rx < ry else ids[::-1]


class _PathBuilder:
    """Recursive crossing-edge construction; round r uses copy N - r"""

    def __init__(self, s: SpannerHD, blocked: np.ndarray, p: int, q: int):
        self.s = s
        self.blocked = blocked
        self.base = float(np.linalg.norm((s.X[p - 1] - s.X[q - 1]).astype(np.float64)))
        self.defects: List[str] = []

    def connect(self, x: int, y: int, r: int) -> Optional[List[int]]:
        s = self.s
        if x == y:
            return [x]
        if s.has_edge(x, y):
            return [x, y]
        gap = float(np.linalg.norm((s.X[x - 1] - s.X[y - 1]).astype(np.float64)))
        if gap > (2 * s.family.varsigma) ** r * self.base * (1 + settings.STRETCH_REL_TOL):
            self.defects.append(f"round {r}: active pair {x}-{y} wider than (2 varsigma)^{r} |pq|")

        witness = verify_lso_property(s.family, s.X[x - 1], s.X[y - 1], s.samples())
        if witness is None:
            self.defects.append(f"round {r}: no ordering witness for {x}-{y}")
            return None
        first, second = (x, y) if tuple(s.X[x - 1].tolist()) == witness.p else (y, x)
        copy_index = s.params.N - r
        c = s.copy(witness.ordering, max(1, copy_index))
        path = _copy_path(s, c, self.blocked, first, second)
        if path is None:
            return None

        if copy_index <= 1:
            cap = 2 * max(1, math.ceil(math.log2(s.n)))
            if len(path) - 1 > cap:
                self.defects.append(f"final splice {first}-{second} uses {len(path) - 1} > {cap} edges")
            return path if first == x else path[::-1]

        kz = keys(s.family, witness.ordering, np.asarray(witness.z))[0]
        kpath = keys(s.family, witness.ordering, s.X[np.asarray(path) - 1])
        past = np.flatnonzero([not _before(row, kz) for row in kpath])
        t = int(past[0])
        x_end, y_start = path[t - 1], path[t]
        left = self.connect(first, x_end, r + 1)
        right = self.connect(y_start, second, r + 1)
        if left is None or right is None:
            return None
        joined = left + right
        return joined if first == x else joined[::-1]


def _before(a: np.ndarray, b: np.ndarray) -> bool:
    diff = np.flatnonzero(a != b)
    return bool(diff.size) and bool(a[diff[0]] < b[diff[0]])


def path_hd(s: SpannerHD, B: Union[Iterable[int], np.ndarray], p: int, q: int) -> Optional[HDPath]:
    """
    (1+eps)-path between two surviving points

    Args:
        s: Spanner
        B: Attacked point ids
        p, q: Surviving point ids

    Returns:
        HDPath, or None when some round has no witness or no monotone path
    """
    blocked = _blocked(s, B)
    for v in (p, q):
        if not 1 <= v <= s.n:
            raise InvalidInputError(f"point {v} outside [1, {s.n}]")
        if blocked[v - 1]:
            raise InvalidInputError(f"endpoint {v} is attacked")
    if p == q:
        return HDPath(vertices=(p,), length=0.0, distance=0.0)

    if s.family.identity:
        # one shared order: the copies form a boosted 1-D spanner
        copies = [s.copy(0, i) for i in range(1, s.params.N + 1)]
        order = copies[0].order
        union = boost_union([c.spanner for c in copies])
        rp, rq = int(copies[0].rank_of[p - 1]), int(copies[0].rank_of[q - 1])
        ranks = monotone_path(union, blocked[order - 1], rp, rq)
        vertices = None
        if ranks is not None:
            vertices = copies[0].ids(ranks if rp < rq else ranks[::-1])
        defects: Tuple[str, ...] = ()
    else:
        builder = _PathBuilder(s, blocked, p, q)
        vertices = builder.connect(p, q, 0)
        defects = tuple(builder.defects)
    for defect in defects:
        app_logger.warning(f"path_hd {p}-{q}: {defect}")
    if vertices is None:
        return None
    return HDPath(
        vertices=tuple(vertices),
        length=_path_length(s, vertices),
        distance=s.distance(p, q),
        defects=defects,
    )


def bad_sequence(s: SpannerHD, B: Union[Iterable[int], np.ndarray]) -> List[np.ndarray]:
    """
    B_0 = B, B_i = B_{i-1} plus the bad points of every copy i against B_{i-1}

    Returns:
        N + 1 nested boolean masks over point ids
    """
    current = _blocked(s, B).copy()
    seq = [current.copy()]
    for i in range(1, s.params.N + 1):
        if not s.degenerate and current.any():
            nxt = current.copy()
            for c in s.all_copies(i):
                bad_ranks = bad_mask(c.spanner, current[c.order - 1])
                nxt[c.order[bad_ranks] - 1] = True
            current = nxt
        seq.append(current.copy())
    return seq


def damaged_pairs_hd(
    s: SpannerHD,
    B: Union[Iterable[int], np.ndarray],
    rel_tol: Optional[float] = None,
) -> BadPairGraph:
    """
    Survivor pairs whose residual distance exceeds (1+eps) |pq|

    Args:
        s: Spanner
        B: Attacked point ids
        rel_tol: Relative slack on the comparison (settings STRETCH_REL_TOL)

    Returns:
        BadPairGraph over surviving point ids
    """
    rel_tol = settings.STRETCH_REL_TOL if rel_tol is None else rel_tol
    blocked = _blocked(s, B)
    survivors = np.flatnonzero(~blocked) + 1
    k = len(survivors)
    if s.degenerate or k < 2:
        return BadPairGraph(survivors=survivors, matrix=np.zeros((k, k), dtype=bool))

    edges = s.edge_array()
    alive = ~blocked[edges[:, 0] - 1] & ~blocked[edges[:, 1] - 1]
    edges = edges[alive]
    local = np.full(s.n + 1, -1, dtype=np.int64)
    local[survivors] = np.arange(k)
    u, v = local[edges[:, 0]], local[edges[:, 1]]
    pts = s.points[survivors - 1]
    w = np.linalg.norm(pts[u] - pts[v], axis=1)
    graph = coo_matrix((w, (u, v)), shape=(k, k)).tocsr()
    dist = dijkstra(graph, directed=False)
    direct = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    bad = dist > (1 + s.params.eps) * direct * (1 + rel_tol)
    np.fill_diagonal(bad, False)
    out = BadPairGraph.from_matrix(survivors, bad)
    app_logger.debug(f"HD damaged pairs: {out.count} among {k} survivors")
    return out
