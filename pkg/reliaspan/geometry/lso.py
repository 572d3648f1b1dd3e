"""
ReliaSpan - Locality-Sensitive Orderings

Orderings of [0,1)^d from a shifted quadtree. Coordinates are w-bit fixed
point; shift j adds floor(j 2^w / (D+1)) to every coordinate, so cells live in
[0, 2^(w+1))^d. Quadtree levels are grouped into blocks of L levels whose
boundaries sit at the bit levels congruent to r (mod L). A point's key is the
sequence of its block digits, each replaced by its position along one path of
the Walecki decomposition of the complete graph on the K = 2^(dL) sub-cells,
read forwards or backwards. Two sub-cells adjacent on some path are adjacent
in the order, which is what makes the family locality-sensitive.
"""
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from reliaspan.core.config import get_settings
from reliaspan.core.exceptions import InvalidInputError
from reliaspan.core.logging import app_logger

settings = get_settings()


@dataclass(frozen=True)
class NormalizationMap:
    """
    Affine map x -> (x - translation) * scale into [0,1)^d

    The extent is inflated by 2^-20 so the upper boundary stays open.
    """
    translation: Tuple[float, ...]
    scale: float

    @classmethod
    def fit(cls, points: np.ndarray) -> "NormalizationMap":
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or len(pts) == 0:
            raise InvalidInputError("points must be a non-empty (n, d) array")
        low = pts.min(axis=0)
        extent = float((pts.max(axis=0) - low).max())
        scale = 1.0 / ((1.0 + 2.0**-20) * extent) if extent > 0 else 1.0
        return cls(translation=tuple(low.tolist()), scale=scale)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - np.asarray(self.translation)) * self.scale

    def original_distance(self, normalized_distance: float) -> float:
        return normalized_distance / self.scale

    def to_dict(self) -> dict:
        return {"translation": list(self.translation), "scale": self.scale}


def to_fixed(points: np.ndarray, w: Optional[int] = None) -> np.ndarray:
    """floor(x 2^w) per coordinate for points of [0,1)^d"""
    w = settings.LSO_PRECISION_BITS if w is None else w
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if (pts < 0).any() or (pts >= 1).any():
        raise InvalidInputError("points must lie in [0,1)^d; normalize them first")
    return np.floor(np.ldexp(pts, w)).astype(np.int64)


def walecki_position(v: np.ndarray, k: int, m: int) -> np.ndarray:
    """Position of vertex v on path k of the zigzag decomposition of K_2m"""
    t = np.mod(np.asarray(v, dtype=np.int64) - k, 2 * m)
    return np.where(t == 0, 0, np.where(t <= m, 2 * t - 1, 2 * (2 * m - t)))


def walecki_path_of(a: int, b: int, m: int) -> int:
    """The path containing edge {a, b}; a path holds the pairs with sum 2k or 2k+1 (mod 2m)"""
    s = (a + b) % (2 * m)
    return (s // 2) % m


@dataclass(frozen=True)
class Ordering:
    """
    One member of the family

    Attributes:
        index: Position in the family
        shift: Shift index j in [0, D]
        offset: Block offset r in [0, L)
        path: Walecki path k in [0, K/2)
        reverse: Read the order backwards
    """
    index: int
    shift: int
    offset: int
    path: int
    reverse: bool


@dataclass(frozen=True)
class OrderingFamily:
    """
    The family Pi(varsigma) of orderings of [0,1)^d

    Orderings are decoded from their index on demand; the identity family
    (d = 1 only) holds just the natural order.
    """
    varsigma: float
    d: int
    w: int
    identity: bool = False

    @property
    def D(self) -> int:
        return 2 * math.ceil(self.d / 2)

    @property
    def L(self) -> int:
        return max(1, math.ceil(math.log2(2 * (self.D + 1) * math.sqrt(self.d) / self.varsigma)))

    @property
    def m(self) -> int:
        return 1 << (self.d * self.L - 1)

    @property
    def shifts(self) -> Tuple[int, ...]:
        return tuple((j << self.w) // (self.D + 1) for j in range(self.D + 1))

    @property
    def count(self) -> int:
        if self.identity:
            return 1
        return 2 * (self.D + 1) * self.L * self.m

    @property
    def c_lso(self) -> float:
        """count / (varsigma^-d ceil(log2 1/varsigma))"""
        return self.count / (self.varsigma ** -self.d * max(1, math.ceil(math.log2(1 / self.varsigma))))

    def ordering(self, index: int) -> Ordering:
        if not 0 <= index < self.count:
            raise InvalidInputError(f"ordering index {index} outside [0, {self.count})")
        if self.identity:
            return Ordering(index=0, shift=0, offset=0, path=0, reverse=False)
        rest, reverse = divmod(index, 2)
        rest, path = divmod(rest, self.m)
        shift, offset = divmod(rest, self.L)
        return Ordering(index=index, shift=shift, offset=offset, path=path, reverse=bool(reverse))

    def index_of(self, shift: int, offset: int, path: int, reverse: bool) -> int:
        return ((shift * self.L + offset) * self.m + path) * 2 + int(reverse)

    def __iter__(self) -> Iterator[Ordering]:
        for i in range(self.count):
            yield self.ordering(i)

    def __len__(self) -> int:
        return self.count

    def boundaries(self, offset: int) -> Tuple[int, ...]:
        """Block boundaries, descending from w+1 to 0"""
        top = self.w + 1
        inner = [lv for lv in range(top - 1, 0, -1) if lv % self.L == offset]
        return tuple([top] + inner + [0])

    def to_dict(self) -> dict:
        return {"varsigma": self.varsigma, "d": self.d, "w": self.w, "identity": self.identity, "count": self.count}


def lso_constant_bound(d: int) -> float:
    """C with count <= C varsigma^-d ceil(log2 1/varsigma) for every varsigma"""
    D = 2 * math.ceil(d / 2)
    base = 2 * (D + 1) * math.sqrt(d)
    return (D + 1) * (2 * base) ** d * (2 + math.log2(base))


def build_orderings(varsigma: float, d: int, w: Optional[int] = None) -> OrderingFamily:
    """
    Shifted-quadtree family for the given locality parameter

    Args:
        varsigma: Locality parameter in (0, 1)
        d: Dimension >= 1
        w: Fixed-point bits per coordinate (settings LSO_PRECISION_BITS)

    Returns:
        OrderingFamily
    """
    w = settings.LSO_PRECISION_BITS if w is None else w
    if not 0 < varsigma < 1:
        raise InvalidInputError(f"varsigma must lie in (0, 1), got {varsigma}")
    if d < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {d}")
    family = OrderingFamily(varsigma=varsigma, d=d, w=w)
    if d * family.L > 62:
        raise InvalidInputError(f"sub-cell digits of {d * family.L} bits do not fit a 64-bit key")
    app_logger.debug(
        f"LSO family: d={d}, varsigma={varsigma}, D={family.D}, L={family.L}, count={family.count}, "
        f"c_lso={family.c_lso:.3g}"
    )
    return family


def identity_family(w: Optional[int] = None) -> OrderingFamily:
    """The natural order of [0,1), as a one-member family"""
    return OrderingFamily(varsigma=0.5, d=1, w=settings.LSO_PRECISION_BITS if w is None else w, identity=True)


def keys(family: OrderingFamily, sigma: Ordering, X: np.ndarray) -> np.ndarray:
    """
    Materialized keys of fixed-point points under sigma

    Returns:
        (n, blocks) int64 array; rows compare lexicographically, most
        significant block first (negated for reversed orderings)
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.int64))
    if family.identity:
        return X[:, :1].copy()
    Y = X + family.shifts[sigma.shift]
    bounds = family.boundaries(sigma.offset)
    cols = []
    for hi, lo in zip(bounds, bounds[1:]):
        width = hi - lo
        mask = (1 << width) - 1
        digit = np.zeros(len(Y), dtype=np.int64)
        for c in range(family.d):
            digit |= ((Y[:, c] >> lo) & mask) << (c * width)
        cols.append(walecki_position(digit, sigma.path, family.m))
    out = np.stack(cols, axis=1)
    return -out if sigma.reverse else out


def compare(family: OrderingFamily, sigma: Ordering, p: Sequence[int], q: Sequence[int]) -> int:
    """
    -1 if p precedes q under sigma, +1 otherwise

    The most significant differing block digit decides.
    """
    k = keys(family, sigma, np.array([p, q], dtype=np.int64))
    diff = np.flatnonzero(k[0] != k[1])
    if diff.size == 0:
        raise InvalidInputError("compare needs distinct points")
    b = diff[0]
    return -1 if k[0, b] < k[1, b] else 1


def sort_order(family: OrderingFamily, sigma: Ordering, X: np.ndarray) -> np.ndarray:
    """Indices of X in sigma order"""
    k = keys(family, sigma, X)
    return np.lexsort(k.T[::-1])


def _precedes(k: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Row-wise: key row strictly before ref"""
    diff = k != ref
    first = np.argmax(diff, axis=1)
    rows = np.arange(len(k))
    return diff.any(axis=1) & (k[rows, first] < ref[first])


@dataclass(frozen=True)
class LSOWitness:
    """
    Ordering sigma with p before q and pivot z

    Every sample strictly between p and z is within varsigma*l of p; every
    sample strictly between z and q is within varsigma*l of q.
    """
    ordering: Ordering
    p: Tuple[int, ...]
    q: Tuple[int, ...]
    z: Tuple[int, ...]
    length: float


def sample_points(d: int, w: int, grid_bits: Optional[int] = None, extra: Optional[np.ndarray] = None) -> np.ndarray:
    """Fixed-point centres of a 2^grid_bits grid per axis, plus extra points"""
    g = settings.LSO_SAMPLE_GRID_BITS if grid_bits is None else grid_bits
    side = 1 << g
    axis = ((np.arange(side, dtype=np.int64) << (w - g)) + (1 << (w - g - 1))) if w > g else np.arange(side)
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    if extra is not None and len(extra):
        grid = np.unique(np.concatenate([grid, np.asarray(extra, dtype=np.int64)]), axis=0)
    return grid


def _cell_reach(y: np.ndarray, size_bits: int) -> float:
    """Distance from y to the farthest corner of its cell of side 2^size_bits"""
    corner = (y >> size_bits) << size_bits
    span = np.maximum(y - corner, corner + (1 << size_bits) - 1 - y).astype(np.float64)
    return float(np.sqrt((span**2).sum()))


def _check_samples(
    family: OrderingFamily, sigma: Ordering, p: np.ndarray, q: np.ndarray, z: np.ndarray, samples: np.ndarray, radius: float
) -> bool:
    kp, kq, kz = (keys(family, sigma, x)[0] for x in (p, q, z))
    ksample = keys(family, sigma, samples)
    after_p = ~_precedes(ksample, kp) & (ksample != kp).any(axis=1)
    before_z = _precedes(ksample, kz)
    after_z = ~before_z & (ksample != kz).any(axis=1)
    before_q = _precedes(ksample, kq)
    near_p = np.sqrt(((samples - p).astype(np.float64) ** 2).sum(axis=1)) <= radius
    near_q = np.sqrt(((samples - q).astype(np.float64) ** 2).sum(axis=1)) <= radius
    return bool(np.all(near_p[after_p & before_z]) and np.all(near_q[after_z & before_q]))


def verify_lso_property(
    family: OrderingFamily,
    p: Sequence[int],
    q: Sequence[int],
    samples: Optional[np.ndarray] = None,
) -> Optional[LSOWitness]:
    """
    Find an ordering and pivot that confine everything between p and q

    The candidate for shift j puts the smallest common cell of p and q on a
    block boundary, takes the Walecki path on which their sub-cells are
    consecutive and orients it so p comes first. It is accepted when both
    sub-cells fit in the varsigma*l balls and the sample set agrees.

    Args:
        family: Ordering family
        p, q: Distinct fixed-point points
        samples: Fixed-point sample set (default grid of settings LSO_SAMPLE_GRID_BITS
            together with p and q)

    Returns:
        LSOWitness from the lowest shift index that succeeds, or None
    """
    p = np.asarray(p, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    if np.array_equal(p, q):
        raise InvalidInputError("LSO property needs distinct points")
    if samples is None:
        samples = sample_points(family.d, family.w, extra=np.stack([p, q]))
    length = float(np.sqrt(((p - q).astype(np.float64) ** 2).sum()))
    radius = family.varsigma * length

    if family.identity:
        sigma = family.ordering(0)
        first, second = (p, q) if p[0] < q[0] else (q, p)
        return _identity_witness(sigma, first, second, samples, radius, length)

    for j, shift in enumerate(family.shifts):
        yp, yq = p + shift, q + shift
        level = int(np.bitwise_or.reduce(yp ^ yq)).bit_length()
        width = min(family.L, level)
        cell_bits = level - width
        if _cell_reach(yp, cell_bits) > radius or _cell_reach(yq, cell_bits) > radius:
            continue
        # the common cell sits on a block boundary; the top level always does
        offset = level % family.L
        mask = (1 << width) - 1
        dp = sum(int((yp[c] >> cell_bits) & mask) << (c * width) for c in range(family.d))
        dq = sum(int((yq[c] >> cell_bits) & mask) << (c * width) for c in range(family.d))
        path = walecki_path_of(dp, dq, family.m)
        pos = walecki_position(np.array([dp, dq]), path, family.m)
        reverse = bool(pos[0] > pos[1])
        sigma = family.ordering(family.index_of(j, offset, path, reverse))

        in_q_cell = np.all(((samples + shift) >> cell_bits) == ((yq >> cell_bits)), axis=1)
        candidates = np.concatenate([samples[in_q_cell], q[None, :]])
        z = candidates[sort_order(family, sigma, candidates)[0]]
        if _check_samples(family, sigma, p, q, z, samples, radius):
            return LSOWitness(ordering=sigma, p=tuple(p.tolist()), q=tuple(q.tolist()), z=tuple(z.tolist()), length=length)
    app_logger.debug(f"No LSO witness for {p.tolist()} / {q.tolist()}")
    return None


def _identity_witness(
    sigma: Ordering, first: np.ndarray, second: np.ndarray, samples: np.ndarray, radius: float, length: float
) -> Optional[LSOWitness]:
    """Natural order: p is the smaller point, z the first sample outside its ball"""
    x = samples[:, 0]
    between = samples[(x > first[0]) & (x < second[0])]
    between = between[np.argsort(between[:, 0], kind="stable")]
    near_first = np.abs(between[:, 0] - first[0]) <= radius
    far = between[~near_first]
    z = far[0] if len(far) else second
    if np.all(np.abs(far[:, 0] - second[0]) <= radius):
        return LSOWitness(ordering=sigma, p=tuple(first.tolist()), q=tuple(second.tolist()), z=tuple(z.tolist()), length=length)
    return None
