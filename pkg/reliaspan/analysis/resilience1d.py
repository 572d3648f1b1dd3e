"""
ReliaSpan - Stairways, Monotone Paths and Bad Points on the Line

A right stairway from v climbs p_0 = v <= p_1 <= ... <= p_j with p_i in P_i,
consecutive distinct points joined by edges; it is safe when it avoids B and
usable when [p_j..n] ∩ P_j is a clique. Left stairways mirror this.
"""
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Union

import numpy as np
import pandas as pd

from reliaspan.analysis.loss import BadPairGraph
from reliaspan.analysis.shadow import attack_mask, classify_rounds
from reliaspan.construction.spanner1d import MonotoneGraph, Spanner1D
from reliaspan.core.config import get_settings
from reliaspan.core.exceptions import InvalidInputError
from reliaspan.core.logging import app_logger

settings = get_settings()


class Direction(str, Enum):
    RIGHT = "right"
    LEFT = "left"


@dataclass(frozen=True)
class Stairway:
    """
    Level-climbing monotone sequence from origin

    Attributes:
        origin: Starting vertex p_0
        direction: right or left
        points: p_0..p_j, p_i in P_i (repeats allowed)
        safe: No point lies in the attack
        usable: The remaining side of P_j is a clique
    """
    origin: int
    direction: Direction
    points: tuple
    safe: bool = True
    usable: bool = True

    @property
    def top(self) -> int:
        return len(self.points) - 1


def _blocked(s: Spanner1D, B: Union[Iterable[int], np.ndarray]) -> np.ndarray:
    if isinstance(B, np.ndarray) and B.dtype == bool:
        return B
    return attack_mask(B, s.n)


def _check_vertex(v: int, n: int) -> None:
    if not 1 <= v <= n:
        raise InvalidInputError(f"vertex {v} outside [1, {n}]")


def _resolve_mode(exhaustive: Optional[bool]) -> bool:
    return settings.STAIRWAY_EXHAUSTIVE if exhaustive is None else exhaustive


def usable_bound(s: Spanner1D, i: int, direction: Direction) -> Optional[int]:
    """
    Vertex threshold for usability at level i

    Right: smallest t in P_i with [t..n] ∩ P_i a clique, so x is usable iff x >= t.
    Left: largest t in P_i with [1..t] ∩ P_i a clique, so x is usable iff x <= t.
    """
    row = s.members(i)
    if len(row) == 0:
        return None
    lo, hi = 0, len(row) - 1
    if direction is Direction.RIGHT:
        while lo < hi:
            mid = (lo + hi) // 2
            if s.is_clique(row[mid:], i):
                hi = mid
            else:
                lo = mid + 1
        return int(row[lo])
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if s.is_clique(row[: mid + 1], i):
            lo = mid
        else:
            hi = mid - 1
    return int(row[lo])


def _is_usable(s: Spanner1D, i: int, x: int, direction: Direction) -> bool:
    row = s.members(i)
    side = row[np.searchsorted(row, x):] if direction is Direction.RIGHT else row[: np.searchsorted(row, x, side="right")]
    return s.is_clique(side, i)


def check_stairway(s: Spanner1D, B: Union[Iterable[int], np.ndarray], st: Stairway) -> List[str]:
    """Violations of the stairway invariants, empty when st is a valid safe usable stairway"""
    blocked = _blocked(s, B)
    g = s.gradation
    pts = list(st.points)
    problems: List[str] = []
    if not pts or pts[0] != st.origin:
        problems.append("does not start at its origin")
        return problems
    step = 1 if st.direction is Direction.RIGHT else -1
    for i, (a, b) in enumerate(zip(pts, pts[1:])):
        if (b - a) * step < 0:
            problems.append(f"not monotone between levels {i} and {i + 1}")
        if a != b and not s.has_edge(a, b):
            problems.append(f"{a}-{b} is not an edge")
    for i, p in enumerate(pts):
        if g.level(p) < i:
            problems.append(f"{p} is not in P_{i}")
        if blocked[p - 1]:
            problems.append(f"{p} is attacked")
    if st.usable and len(pts) - 1 <= g.top_level and not _is_usable(s, len(pts) - 1, pts[-1], st.direction):
        problems.append("top level side is not a clique")
    return problems


def _witness_interval(v: int, i: int, eps: float, direction: Direction):
    delta = int(2.0 ** ((i - 1) / 2) / (2 * eps))
    width = 1 << i
    if direction is Direction.RIGHT:
        return v, -(-v // width) * width + (delta - 1) * width
    return ((v - 1) // width) * width + 1 - (delta - 1) * width, v


def _interval_witness(s: Spanner1D, blocked: np.ndarray, v: int, direction: Direction) -> Optional[Stairway]:
    """
    Extreme surviving P_i point of the interval I_i for i = 1..xi

    xi is the largest level whose interval fits in [1..n]; the witness is
    validated before it is returned.
    """
    pts = [v]
    top = min(s.M, s.gradation.top_level)
    for i in range(1, top + 1):
        lo, hi = _witness_interval(v, i, s.params.eps_step, direction)
        if lo < 1 or hi > s.n:
            break
        row = s.members(i)
        cand = row[np.searchsorted(row, lo): np.searchsorted(row, hi, side="right")]
        cand = cand[~blocked[cand - 1]]
        if direction is Direction.RIGHT:
            cand = cand[cand >= pts[-1]]
        else:
            cand = cand[cand <= pts[-1]]
        if cand.size == 0:
            return None
        pts.append(int(cand[0] if direction is Direction.RIGHT else cand[-1]))
    st = Stairway(origin=v, direction=direction, points=tuple(pts))
    if check_stairway(s, blocked, st):
        return None
    return st


class _StairwayTable:
    """
    good[i][x-1]: some safe usable stairway continues from x at level i

    good(i, x) holds for a survivor x of P_i when x is usable at level i, or
    x itself is good at level i+1, or some neighbor ahead of x is.
    """

    def __init__(self, s: Spanner1D, blocked: np.ndarray, direction: Direction):
        self.s = s
        self.direction = direction
        self.bounds: Dict[int, Optional[int]] = {}
        self.good: List[np.ndarray] = [np.zeros(0, dtype=bool)] * (s.M + 1)
        ahead = s.forward_neighbors if direction is Direction.RIGHT else s.backward_neighbors
        nxt: Optional[np.ndarray] = None
        for i in range(s.M, -1, -1):
            row = s.members(i)
            alive = row[~blocked[row - 1]]
            good = np.zeros(s.n, dtype=bool)
            usable = self._usable(i, alive)
            good[alive[usable] - 1] = True
            if nxt is not None:
                for x in alive[~usable].tolist():
                    if nxt[x - 1] or nxt[ahead(x) - 1].any():
                        good[x - 1] = True
            self.good[i] = good
            nxt = good
        self.ahead = ahead

    def _usable(self, i: int, xs: np.ndarray) -> np.ndarray:
        t = usable_bound(self.s, i, self.direction)
        self.bounds[i] = t
        if t is None:
            return np.zeros(len(xs), dtype=bool)
        return xs >= t if self.direction is Direction.RIGHT else xs <= t

    def is_usable(self, i: int, x: int) -> bool:
        t = self.bounds[i]
        if t is None:
            return False
        return x >= t if self.direction is Direction.RIGHT else x <= t

    def stairway(self, v: int) -> Optional[Stairway]:
        if not self.good[0][v - 1]:
            return None
        pts, x, i = [v], v, 0
        while not self.is_usable(i, x):
            nxt = self.good[i + 1]
            if not nxt[x - 1]:
                nbrs = self.ahead(x)
                nbrs = nbrs[nxt[nbrs - 1]]
                x = int(nbrs[0] if self.direction is Direction.RIGHT else nbrs[-1])
            i += 1
            pts.append(x)
        return Stairway(origin=v, direction=self.direction, points=tuple(pts))


def find_stairway(
    s: Spanner1D,
    B: Union[Iterable[int], np.ndarray],
    v: int,
    direction: Union[Direction, str],
    exhaustive: Optional[bool] = None,
) -> Optional[Stairway]:
    """
    Safe usable stairway from v

    Args:
        s: Spanner
        B: Attack
        v: Origin, not attacked
        direction: right or left
        exhaustive: Fall back to the level-by-level search when the interval
            witness fails (settings STAIRWAY_EXHAUSTIVE)

    Returns:
        Stairway or None
    """
    direction = Direction(direction)
    _check_vertex(v, s.n)
    blocked = _blocked(s, B)
    if blocked[v - 1]:
        raise InvalidInputError(f"vertex {v} is attacked")
    st = _interval_witness(s, blocked, v, direction)
    if st is not None or not _resolve_mode(exhaustive):
        return st
    return _StairwayTable(s, blocked, direction).stairway(v)


def bad_mask(
    s: Spanner1D,
    B: Union[Iterable[int], np.ndarray],
    exhaustive: Optional[bool] = None,
) -> np.ndarray:
    """Boolean mask over [1..n] of bad points (attacked or missing a stairway)"""
    blocked = _blocked(s, B)
    bad = blocked.copy()
    if s.degenerate or not blocked.any():
        return bad
    if _resolve_mode(exhaustive):
        for direction in Direction:
            bad |= ~_StairwayTable(s, blocked, direction).good[0]
        return bad
    for v in np.flatnonzero(~blocked).tolist():
        if any(_interval_witness(s, blocked, v + 1, d) is None for d in Direction):
            bad[v] = True
    return bad


def is_bad(
    s: Spanner1D,
    B: Union[Iterable[int], np.ndarray],
    v: int,
    exhaustive: Optional[bool] = None,
) -> bool:
    _check_vertex(v, s.n)
    blocked = _blocked(s, B)
    if blocked[v - 1]:
        return True
    return any(find_stairway(s, blocked, v, d, exhaustive) is None for d in Direction)


def stairway_set(
    s: Spanner1D,
    B: Union[Iterable[int], np.ndarray],
    exhaustive: Optional[bool] = None,
) -> Set[int]:
    """StwSet: points with safe usable stairways both ways"""
    return set((np.flatnonzero(~bad_mask(s, B, exhaustive)) + 1).tolist())


def check_monotone_path(g: MonotoneGraph, blocked: np.ndarray, path: List[int]) -> List[str]:
    problems = []
    for a, b in zip(path, path[1:]):
        if b <= a:
            problems.append(f"not increasing at {a}->{b}")
        elif not g.has_edge(a, b):
            problems.append(f"{a}-{b} is not an edge")
    problems.extend(f"{p} is attacked" for p in path if blocked[p - 1])
    return problems


def _splice(right: Stairway, left: Stairway) -> List[int]:
    """Join a right stairway from u and a left stairway from v at their first crossing"""
    j = min(right.top, left.top)
    a, b = right.points[: j + 1], left.points[: j + 1]
    crossing = next((i for i in range(1, j + 1) if a[i] >= b[i]), None)
    if crossing is None:
        seq = list(a) + list(reversed(b))
    elif a[crossing] < b[crossing - 1]:
        seq = list(a[: crossing + 1]) + list(reversed(b[:crossing]))
    else:
        seq = list(a[:crossing]) + list(reversed(b[:crossing]))
    path = [seq[0]]
    for x in seq[1:]:
        if x != path[-1]:
            path.append(x)
    return path


def _reach_path(g: MonotoneGraph, blocked: np.ndarray, u: int, v: int) -> Optional[List[int]]:
    """Forward BFS over left-to-right arcs between u and v"""
    parent = {u: 0}
    queue = deque([u])
    while queue:
        x = queue.popleft()
        if x == v:
            path = [v]
            while path[-1] != u:
                path.append(parent[path[-1]])
            return path[::-1]
        for y in g.forward_neighbors(x).tolist():
            if y > v:
                break
            if y not in parent and not blocked[y - 1]:
                parent[y] = x
                queue.append(y)
    return None


def monotone_path(
    g: MonotoneGraph,
    B: Union[Iterable[int], np.ndarray],
    u: int,
    v: int,
    exhaustive: Optional[bool] = None,
) -> Optional[List[int]]:
    """
    Monotone u -> v path in G \\ B

    Both stairways present: the spliced stairway path. Otherwise (or for a
    union of copies) forward reachability decides.

    Args:
        g: Spanner or union of spanners
        B: Attack
        u, v: Surviving endpoints, u < v

    Returns:
        Strictly increasing vertex list, or None
    """
    _check_vertex(u, g.n)
    _check_vertex(v, g.n)
    if u == v:
        raise InvalidInputError("monotone_path needs distinct endpoints")
    if u > v:
        u, v = v, u
    blocked = attack_mask(B, g.n) if not (isinstance(B, np.ndarray) and B.dtype == bool) else B
    if blocked[u - 1] or blocked[v - 1]:
        raise InvalidInputError(f"endpoint attacked: {u if blocked[u - 1] else v}")
    if g.has_edge(u, v):
        return [u, v]

    if isinstance(g, Spanner1D):
        right = find_stairway(g, blocked, u, Direction.RIGHT, exhaustive)
        left = find_stairway(g, blocked, v, Direction.LEFT, exhaustive) if right else None
        if right and left:
            path = _splice(right, left)
            problems = check_monotone_path(g, blocked, path)
            if not problems:
                return path
            app_logger.warning(f"Stairway splice {u}->{v} invalid ({problems[0]}); using reachability")
    return _reach_path(g, blocked, u, v)


def _reach_bits(bits: int, n: int) -> np.ndarray:
    raw = np.frombuffer(bits.to_bytes(n // 8 + 1, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[1 : n + 1].astype(bool)


def damaged_pairs_1d(g: MonotoneGraph, B: Union[Iterable[int], np.ndarray]) -> BadPairGraph:
    """
    Survivor pairs with no monotone path in G \\ B

    Reach sets are bitsets filled from n down to 1: reach(u) is u plus the
    reach sets of its surviving forward neighbors, skipping those already
    covered.
    """
    blocked = attack_mask(B, g.n) if not (isinstance(B, np.ndarray) and B.dtype == bool) else B
    survivors = np.flatnonzero(~blocked) + 1
    k = len(survivors)
    matrix = np.zeros((k, k), dtype=bool)
    if g.degenerate or k < 2:
        return BadPairGraph(survivors=survivors, matrix=matrix)

    reach: Dict[int, int] = {}
    for u in survivors[::-1].tolist():
        bits = 1 << u
        for w in g.forward_neighbors(u).tolist():
            if not blocked[w - 1] and not bits >> w & 1:
                bits |= reach[w]
        reach[u] = bits

    for idx, u in enumerate(survivors.tolist()):
        reached = _reach_bits(reach[u], g.n)[survivors - 1]
        row = ~reached
        row[: idx + 1] = False
        matrix[idx] = row
    out = BadPairGraph.from_matrix(survivors, matrix)
    app_logger.debug(f"Damaged pairs: {out.count} among {k} survivors")
    return out


def badness_by_round(
    s: Spanner1D,
    B: Iterable[int],
    exhaustive: Optional[bool] = None,
) -> pd.DataFrame:
    """
    Per shadow round k: number of k-th round points, how many are bad, and
    the proven bound on Pr[bad | k-th round]

    Round 0 points are already in the baseline shadow and carry no bound.
    """
    blocked = attack_mask(B, s.n)
    rounds = classify_rounds(np.flatnonzero(blocked) + 1, s.params.sp, s.n)
    bad = bad_mask(s, blocked, exhaustive) & ~blocked
    rho, delta = s.params.rho, s.params.delta
    rows = []
    for k in range(rounds.max_round + 1):
        at_k = (rounds.depth == k) & ~blocked
        points = int(at_k.sum())
        if points == 0:
            continue
        if k == 0:
            bound = 1.0
        elif delta is None:
            bound = (rho / 2) ** k / 32
        else:
            bound = rho * delta / 2 ** (3 * k + 4)
        n_bad = int((bad & at_k).sum())
        rows.append({"round": k, "points": points, "bad": n_bad, "bad_rate": n_bad / points, "bound": bound})
    return pd.DataFrame(rows, columns=["round", "points", "bad", "bad_rate", "bound"])
