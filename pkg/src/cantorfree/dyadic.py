"""Dyadic addresses and exact metrics on finite Cantor nets.

A depth-m net consists of the 2**m binary addresses of length m, standing for
the points of a totally disconnected space at resolution m.  The cylinder of a
shorter address a is the index block of all depth-m addresses extending a, and
the representative of a is a padded with zeros.  Everything here is dense and
either exactly rational or float64, chosen by the metric's number mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateMetricError,
    DepthLimitError,
    InvalidParameterError,
)
from .numerics import (
    RationalMatrix,
    Tolerance,
    as_fraction,
    as_number,
    block_min_max,
    max_abs_diff,
    max_ratio,
    min_ratio,
    to_float_array,
    tolerance_for,
    triangle_defect,
    metric_closure,
)

DEFAULT_MAX_DEPTH = 12
RATIONAL_DEPTH_DEFAULT = 8  # beyond this, generators default to float64
DOUBLE_TOL = 1e-9

GENERATOR_KINDS = ("mu", "middle_lambda", "fat_cantor", "ultrametric", "random")


# ---------------------------------------------------------------------------
# addresses


@dataclass(frozen=True)
class Address:
    """Finite 0/1 word; ordered by length, then lexicographically."""

    bits: tuple

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise InvalidParameterError("address bits must be 0 or 1")
        if len(self.bits) > 64:
            raise InvalidParameterError("address longer than 64 bits")
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))

    @classmethod
    def parse(cls, text: str) -> "Address":
        text = text.strip()
        if text in ("", "root"):
            return cls(())
        return cls(tuple(int(c) for c in text))

    @property
    def length(self) -> int:
        return len(self.bits)

    def as_int(self) -> int:
        v = 0
        for b in self.bits:
            v = (v << 1) | b
        return v

    def index_at(self, depth: int) -> int:
        """Index of the representative: this address padded with zeros."""
        if self.length > depth:
            raise InvalidParameterError("address longer than the net depth")
        return self.as_int() << (depth - self.length)

    def block_at(self, depth: int) -> range:
        """Index range of all depth-`depth` addresses extending this one."""
        if self.length > depth:
            raise InvalidParameterError("address longer than the net depth")
        width = 1 << (depth - self.length)
        start = self.as_int() * width
        return range(start, start + width)

    def extended(self, *bits) -> "Address":
        return Address(self.bits + tuple(bits))

    def sort_key(self):
        return (self.length, self.bits)

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return "".join(str(b) for b in self.bits) if self.bits else ""

    def __repr__(self):
        return f"Address({str(self) or 'root'!r})"


ROOT = Address(())


def all_addresses(level: int):
    """Addresses of exactly the given length, in lexicographic order."""
    if level < 0:
        raise InvalidParameterError("level must be nonnegative")
    if level == 0:
        return [ROOT]
    return [
        Address(tuple((v >> (level - 1 - k)) & 1 for k in range(level)))
        for v in range(1 << level)
    ]


def representatives(depth: int, level: int) -> np.ndarray:
    """Point indices of the zero-padded representatives of level-n addresses."""
    if not 0 <= level <= depth:
        raise InvalidParameterError("level out of range")
    return np.arange(1 << level, dtype=np.int64) << (depth - level)


def first_difference_level(i: int, j: int, depth: int) -> int:
    """1-based position of the first differing bit of two depth-m indices."""
    if i == j:
        raise InvalidParameterError("points are equal")
    x = i ^ j
    return depth - x.bit_length() + 1


def _msb_exponents(depth: int) -> np.ndarray:
    """Matrix of floor(log2(i xor j)); diagonal entries are 0 placeholders."""
    idx = np.arange(1 << depth, dtype=np.int64)
    x = np.bitwise_xor.outer(idx, idx)
    return np.floor(np.log2(np.maximum(x, 1))).astype(np.int64)


# ---------------------------------------------------------------------------
# metric container


class DyadicMetric:
    """Symmetric positive distance matrix on the 2**depth points of a net.

    Immutable after construction; `mode` is "rational" (exact, scaled-integer
    storage) or "double" (float64).  `line_points` carries the generating
    positions on the real line when the metric came from an interval
    construction, enabling box-counting probes.
    """

    __slots__ = ("depth", "mode", "base_index", "line_points", "meta",
                 "_rat", "_dbl", "_float_cache")

    def __init__(self, depth, data, mode, base_index=0, line_points=None, meta=None):
        if depth < 1:
            raise InvalidParameterError("depth must be at least 1")
        n = 1 << depth
        if mode == "rational":
            if not isinstance(data, RationalMatrix):
                raise InvalidParameterError("rational mode expects a RationalMatrix")
            if data.n != n:
                raise InvalidParameterError("matrix size does not match depth")
            self._rat, self._dbl = data, None
        elif mode == "double":
            arr = np.asarray(data, dtype=np.float64)
            if arr.shape != (n, n):
                raise InvalidParameterError("matrix size does not match depth")
            if arr.flags.writeable:
                arr = arr.copy()
                arr.setflags(write=False)
            self._rat, self._dbl = None, arr
        else:
            raise InvalidParameterError(f"unknown number mode {mode!r}")
        if not 0 <= base_index < n:
            raise InvalidParameterError("base point index out of range")
        self.depth = depth
        self.mode = mode
        self.base_index = base_index
        self.line_points = tuple(line_points) if line_points is not None else None
        self.meta = dict(meta) if meta else {}
        self._float_cache = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_matrix(cls, matrix, mode=None, base_index=0, line_points=None,
                    meta=None, validate=True, tol=DOUBLE_TOL) -> "DyadicMetric":
        """Wrap an explicit square matrix whose size is a power of two.

        Entries may be Fractions/ints (rational mode) or floats (double mode).
        """
        if isinstance(matrix, RationalMatrix):
            data, mode = matrix, "rational"
            n = matrix.n
        else:
            rows = [list(r) for r in matrix]
            n = len(rows)
            if any(len(r) != n for r in rows):
                raise InvalidParameterError("matrix must be square")
            if mode is None:
                flat = [v for r in rows for v in r]
                mode = "double" if any(isinstance(v, float) for v in flat) else "rational"
            if mode == "rational":
                data = RationalMatrix.from_fractions(rows)
            else:
                data = np.array(rows, dtype=np.float64)
        if n < 2 or n & (n - 1):
            raise InvalidParameterError("point count must be a power of two, >= 2")
        depth = n.bit_length() - 1
        d = cls(depth, data, mode, base_index=base_index,
                line_points=line_points, meta=meta)
        if validate:
            diag = validate_metric(d, tolerance=None if mode == "rational" else tol)
            if not diag.accepted:
                raise InvalidParameterError(
                    f"matrix is not a metric: {diag.summary()}")
        return d

    # -- access ---------------------------------------------------------

    @property
    def n_points(self) -> int:
        return 1 << self.depth

    @property
    def rational(self) -> bool:
        return self.mode == "rational"

    @property
    def data(self):
        return self._rat if self.rational else self._dbl

    @property
    def dist(self) -> np.ndarray:
        """Dense distance matrix: Fractions (rational) or float64 (double)."""
        return self._rat.fractions() if self.rational else self._dbl

    def entry(self, i: int, j: int):
        return self._rat.entry(i, j) if self.rational else float(self._dbl[i, j])

    def as_float(self) -> np.ndarray:
        if self._float_cache is None:
            arr = self._dbl if self._dbl is not None else self._rat.to_float()
            arr.setflags(write=False) if arr.flags.writeable else None
            self._float_cache = arr
        return self._float_cache

    def tolerance(self, tol: float = DOUBLE_TOL) -> Tolerance:
        return tolerance_for(self.mode, tol)

    def zero(self):
        return Fraction(0) if self.rational else 0.0

    def min_offdiagonal(self):
        if self.rational:
            return self._rat.min_offdiagonal()
        n = self.n_points
        masked = np.where(np.eye(n, dtype=bool), np.inf, self._dbl)
        return float(masked.min())

    def diameter(self):
        return self._rat.max_value() if self.rational else float(self._dbl.max())

    def scaled(self, c) -> "DyadicMetric":
        if self.rational:
            data = self._rat.scaled(as_fraction(c))
        else:
            data = self._dbl * float(c)
        pts = None
        if self.line_points is not None:
            factor = as_fraction(c) if self.rational else float(c)
            pts = tuple(p * factor for p in self.line_points)
        return DyadicMetric(self.depth, data, self.mode, self.base_index,
                            pts, self.meta)

    def __eq__(self, other):
        if not isinstance(other, DyadicMetric):
            return NotImplemented
        if (self.depth, self.mode) != (other.depth, other.mode):
            return False
        if self.rational:
            return self._rat == other._rat
        return bool(np.array_equal(self._dbl, other._dbl))

    def __hash__(self):
        return hash((self.depth, self.mode))

    def __repr__(self):
        return (f"DyadicMetric(depth={self.depth}, mode={self.mode!r}, "
                f"points={self.n_points})")


# ---------------------------------------------------------------------------
# generators


def _default_mode(depth: int) -> str:
    return "rational" if depth <= RATIONAL_DEPTH_DEFAULT else "double"


def _mu_matrix(depth: int, mode: str):
    e = _msb_exponents(depth)
    if mode == "rational":
        num = (np.int64(1) << e).astype(np.int64)
        np.fill_diagonal(num, 0)
        return RationalMatrix(num, 1 << depth)
    vals = np.ldexp(1.0, (e - depth).astype(np.int64))
    np.fill_diagonal(vals, 0.0)
    return vals


def _interval_lengths(ratios: Sequence[Fraction]):
    """Cumulative construction-interval lengths l_k = prod_{i<=k} r_i."""
    lengths = []
    cur = Fraction(1)
    for r in ratios:
        cur *= r
        lengths.append(cur)
    return lengths


def _line_positions(depth: int, ratios: Sequence[Fraction]):
    """Left endpoints of the surviving construction intervals.

    Choosing bit 1 at step i jumps by l_{i-1} - l_i, the width of the removed
    gap plus the right sibling.
    """
    lengths = [Fraction(1)] + _interval_lengths(ratios)
    increments = [lengths[i - 1] - lengths[i] for i in range(1, depth + 1)]
    positions = []
    for v in range(1 << depth):
        p = Fraction(0)
        for i in range(depth):
            if (v >> (depth - 1 - i)) & 1:
                p += increments[i]
        positions.append(p)
    return positions


def _from_positions(depth, positions, mode, base_index, meta):
    if mode == "rational":
        data = RationalMatrix.from_positions(positions)
        pts = tuple(positions)
    else:
        fp = np.array([float(p) for p in positions])
        data = np.abs(np.subtract.outer(fp, fp))
        pts = tuple(float(p) for p in positions)
    return DyadicMetric(depth, data, mode, base_index, pts, meta)


def generate(kind: str, depth: int, *, lam=None, removal_fractions=None,
             level_scales=None, roughness="1/2", grid=64, seed=None,
             mode=None, base_index=0, max_depth=DEFAULT_MAX_DEPTH) -> DyadicMetric:
    """Build one of the stock metrics on the depth-m net.

    Kinds:
      mu            -- 2**(-first differing bit); the canonical ultrametric.
      middle_lambda -- distances of the left endpoints of the construction
                       removing the middle `lam` fraction of each interval.
      fat_cantor    -- same with per-level removal fractions; positive total
                       length when the fractions are summable.
      ultrametric   -- first-difference metric with strictly decreasing
                       per-level scales (given or seeded).
      random        -- seeded symmetric perturbation of mu, closed under
                       shortest paths so the triangle inequality holds.
    """
    if kind not in GENERATOR_KINDS:
        raise InvalidParameterError(f"unknown generator kind {kind!r}")
    if depth < 1:
        raise InvalidParameterError("depth must be at least 1")
    if depth > max_depth:
        raise DepthLimitError(f"depth {depth} exceeds maximum {max_depth}")
    if mode is None:
        mode = _default_mode(depth)
    if mode not in ("rational", "double"):
        raise InvalidParameterError(f"unknown number mode {mode!r}")

    meta = {"kind": kind, "depth": depth}

    if kind == "mu":
        d = DyadicMetric(depth, _mu_matrix(depth, mode), mode, base_index,
                         None, meta)
    elif kind == "middle_lambda":
        if lam is None:
            raise InvalidParameterError("middle_lambda requires lam")
        lam = as_fraction(lam)
        if not 0 < lam < 1:
            raise InvalidParameterError("lam must lie strictly between 0 and 1")
        r = (1 - lam) / 2
        meta.update(lam=lam, ratios=(r,) * depth)
        d = _from_positions(depth, _line_positions(depth, [r] * depth),
                            mode, base_index, meta)
    elif kind == "fat_cantor":
        if removal_fractions is None:
            raise InvalidParameterError("fat_cantor requires removal_fractions")
        fracs = [as_fraction(v) for v in removal_fractions]
        if len(fracs) < depth:
            raise InvalidParameterError(
                "fat_cantor needs one removal fraction per level")
        if any(not 0 < v < 1 for v in fracs):
            raise InvalidParameterError("removal fractions must lie in (0, 1)")
        ratios = [(1 - v) / 2 for v in fracs[:depth]]
        meta.update(removal_fractions=tuple(fracs[:depth]), ratios=tuple(ratios))
        d = _from_positions(depth, _line_positions(depth, ratios),
                            mode, base_index, meta)
    elif kind == "ultrametric":
        scales = _ultrametric_scales(depth, level_scales, seed)
        meta.update(level_scales=tuple(scales))
        d = DyadicMetric(depth, _scale_matrix(depth, scales, mode), mode,
                         base_index, None, meta)
    else:  # random
        if seed is None:
            raise InvalidParameterError("random generator requires a seed")
        meta.update(seed=int(seed), roughness=str(roughness), grid=int(grid))
        d = _random_metric(depth, as_fraction(roughness), int(grid),
                           int(seed), mode, base_index, meta)

    if not _positive_offdiagonal(d):
        raise DegenerateMetricError("generator produced a zero distance")
    return d


def _positive_offdiagonal(d: DyadicMetric) -> bool:
    if d.rational:
        return d._rat.min_offdiagonal() > 0
    return d.min_offdiagonal() > 0


def _ultrametric_scales(depth, level_scales, seed):
    if level_scales is not None:
        scales = [as_fraction(v) for v in level_scales]
        if len(scales) != depth:
            raise InvalidParameterError("need exactly one scale per level")
    elif seed is not None:
        rng = np.random.default_rng(int(seed))
        scales, cur = [], Fraction(1)
        for _ in range(depth):
            cur *= Fraction(int(rng.integers(8, 25)), 32)  # in [1/4, 3/4]
            scales.append(cur)
    else:
        raise InvalidParameterError("ultrametric requires level_scales or seed")
    if any(s <= 0 for s in scales):
        raise InvalidParameterError("scales must be positive")
    if any(a <= b for a, b in zip(scales, scales[1:])):
        raise InvalidParameterError("scales must be strictly decreasing")
    return scales


def _scale_matrix(depth, scales, mode):
    e = _msb_exponents(depth)
    level = depth - e  # first-difference level, 1..depth
    np.fill_diagonal(level, 0)
    if mode == "rational":
        den = 1
        for s in scales:
            den = den * s.denominator // math.gcd(den, s.denominator)
        lut = np.array([0] + [int(s * den) for s in scales], dtype=object)
        num = lut[level]
        return RationalMatrix(num, den)
    lut = np.array([0.0] + [float(s) for s in scales])
    return lut[level]


def _random_metric(depth, roughness, grid, seed, mode, base_index, meta):
    if roughness < 0:
        raise InvalidParameterError("roughness must be nonnegative")
    if grid < 1:
        raise InvalidParameterError("grid must be at least 1")
    n = 1 << depth
    rng = np.random.default_rng(seed)
    u = rng.integers(0, grid + 1, size=(n, n))
    u = np.triu(u, 1)
    u = u + u.T
    e = _msb_exponents(depth)
    mu_num = (np.int64(1) << e).astype(np.int64)
    np.fill_diagonal(mu_num, 0)
    p, q = roughness.numerator, roughness.denominator
    # factor 1 + roughness * u/grid over denominator q*grid
    num = mu_num * (q * grid + p * u)
    den = (1 << depth) * q * grid
    if mode == "rational":
        closed = metric_closure(num)
        return DyadicMetric(depth, RationalMatrix(closed, den), mode,
                            base_index, None, meta)
    closed = metric_closure(num.astype(np.float64) / float(den))
    return DyadicMetric(depth, closed, mode, base_index, None, meta)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class MetricDiagnostics:
    """Defect measurements of a candidate distance matrix.

    `positivity_scale_report` maps a level n to the minimum distance among
    pairs whose addresses first differ within the top n levels; it is empty
    when the matrix size is not a power of two.
    """

    max_triangle_defect: object
    max_symmetry_defect: object
    max_diagonal_defect: object
    min_offdiagonal: object
    positivity_scale_report: dict
    accepted: bool
    mode: str
    tolerance: object

    def summary(self) -> str:
        return (f"triangle defect {self.max_triangle_defect}, symmetry defect "
                f"{self.max_symmetry_defect}, diagonal defect "
                f"{self.max_diagonal_defect}, min off-diagonal "
                f"{self.min_offdiagonal}")


def _coerce_matrix(matrix):
    """Normalize input to (num_array_or_float_array, den_or_None, mode)."""
    if isinstance(matrix, DyadicMetric):
        if matrix.rational:
            return matrix._rat.num, matrix._rat.den, "rational"
        return matrix._dbl, None, "double"
    if isinstance(matrix, RationalMatrix):
        return matrix.num, matrix.den, "rational"
    arr = np.asarray(matrix)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidParameterError("expected a square matrix")
    if arr.dtype == object or any(isinstance(v, Fraction) for v in arr.ravel()[:1]):
        rm = RationalMatrix.from_fractions(arr.tolist())
        return rm.num, rm.den, "rational"
    if np.issubdtype(arr.dtype, np.integer):
        return arr.astype(np.int64), 1, "rational"
    return arr.astype(np.float64), None, "double"


def validate_metric(matrix, tolerance=None) -> MetricDiagnostics:
    """Measure how far a square matrix is from being a metric.

    Always returns diagnostics; `accepted` is True iff every defect is within
    tolerance and the smallest off-diagonal entry is strictly positive.
    """
    num, den, mode = _coerce_matrix(matrix)
    n = num.shape[0]
    if tolerance is None:
        tolerance = Fraction(0) if mode == "rational" else DOUBLE_TOL

    def q(value):
        if mode == "rational":
            return Fraction(int(value), den)
        return float(value)

    sym = max_abs_diff(num, num.T) if n else 0
    diag = np.abs(np.diagonal(num)).max() if n else 0
    tri = triangle_defect(num)
    if n >= 2:
        eye = np.eye(n, dtype=bool)
        off_min = np.where(eye, num.max(), num).min()
    else:
        off_min = 0

    report = {}
    if n >= 2 and n & (n - 1) == 0:
        depth = n.bit_length() - 1
        e = _msb_exponents(depth)
        fd = depth - e
        eye = np.eye(n, dtype=bool)
        big = num.max()
        for level in range(1, depth + 1):
            sel = np.where(~eye & (fd <= level), num, big)
            report[level] = q(sel.min())

    tri_q = q(max(tri, 0))
    sym_q = q(sym)
    diag_q = q(diag)
    off_q = q(off_min)
    tol_cmp = as_fraction(tolerance) if mode == "rational" else float(tolerance)
    accepted = (tri_q <= tol_cmp and sym_q <= tol_cmp and diag_q <= tol_cmp
                and off_q > 0)
    return MetricDiagnostics(
        max_triangle_defect=tri_q,
        max_symmetry_defect=sym_q,
        max_diagonal_defect=diag_q,
        min_offdiagonal=off_q,
        positivity_scale_report=report,
        accepted=bool(accepted),
        mode=mode,
        tolerance=tol_cmp,
    )


# ---------------------------------------------------------------------------
# distances between metrics, cylinder statistics


def sup_distance(d1: DyadicMetric, d2: DyadicMetric):
    """Uniform distance max |d1 - d2| over all point pairs."""
    if d1.depth != d2.depth:
        raise InvalidParameterError("depth mismatch")
    if d1.rational and d2.rational:
        a, b, den = d1._rat.rebase(d2._rat)
        return Fraction(int(max_abs_diff(a, b)), den)
    return float(max_abs_diff(d1.as_float(), d2.as_float()))


@dataclass(frozen=True)
class CylinderStats:
    """Min/max distances between level-n cylinder index blocks.

    inf_dist and sup_dist are 2**n x 2**n matrices (Fractions in rational
    mode); diam[a] is the within-block sup distance.
    """

    level: int
    mode: str
    _inf: object
    _sup: object
    _den: Optional[int]

    def inf(self, a: int, b: int):
        v = self._inf[a, b]
        return Fraction(int(v), self._den) if self.mode == "rational" else float(v)

    def sup(self, a: int, b: int):
        v = self._sup[a, b]
        return Fraction(int(v), self._den) if self.mode == "rational" else float(v)

    def diam(self, a: int):
        return self.sup(a, a)

    @property
    def blocks(self) -> int:
        return self._inf.shape[0]

    def inf_matrix(self) -> np.ndarray:
        return _as_value_matrix(self._inf, self._den, self.mode)

    def sup_matrix(self) -> np.ndarray:
        return _as_value_matrix(self._sup, self._den, self.mode)

    def diams(self):
        return [self.diam(a) for a in range(self.blocks)]

    def max_diam(self):
        v = np.diagonal(self._sup).max()
        return Fraction(int(v), self._den) if self.mode == "rational" else float(v)

    def min_cross_inf(self):
        """Smallest inf-distance between two distinct blocks."""
        B = self.blocks
        if B < 2:
            raise InvalidParameterError("needs at least two blocks")
        eye = np.eye(B, dtype=bool)
        v = np.where(eye, self._inf.max(), self._inf).min()
        return Fraction(int(v), self._den) if self.mode == "rational" else float(v)


def _as_value_matrix(raw, den, mode):
    if mode != "rational":
        return np.array(raw)
    out = np.empty(raw.shape, dtype=object)
    flat = out.ravel()
    for k, v in enumerate(raw.ravel()):
        flat[k] = Fraction(int(v), den)
    return out


def cylinder_stats(d: DyadicMetric, level: int) -> CylinderStats:
    """Exact per-cylinder inf/sup distance matrices at the given level."""
    if not 1 <= level <= d.depth:
        raise InvalidParameterError("level out of range")
    blocks = 1 << level
    if d.rational:
        inf_, sup_ = block_min_max(d._rat.num, blocks)
        return CylinderStats(level, "rational", inf_, sup_, d._rat.den)
    inf_, sup_ = block_min_max(d._dbl, blocks)
    return CylinderStats(level, "double", inf_, sup_, None)


def spread_threshold(level: int) -> Fraction:
    """Admissibility bound 1 + 1/n for the level-n cylinder spread."""
    if level < 1:
        raise InvalidParameterError("level must be at least 1")
    return 1 + Fraction(1, level)


@dataclass(frozen=True)
class CylinderSpread:
    """Worst ratio of sup over inf distance between distinct cylinders."""

    level: int
    value: object
    threshold: Fraction
    within_threshold: bool


def cylinder_spread(d: DyadicMetric, level: int) -> CylinderSpread:
    """Max over distinct level-n cylinder pairs of sup/inf cross distance.

    The level must be strictly below the depth: at level = depth every
    cylinder is a single point and the ratio degenerates to 1.
    """
    if not 1 <= level < d.depth:
        raise InvalidParameterError(
            "level must satisfy 1 <= level < depth (singleton cylinders are "
            "rejected to avoid reading a trivial ratio)")
    stats = cylinder_stats(d, level)
    B = stats.blocks
    mask = ~np.eye(B, dtype=bool)
    if d.rational:
        den = stats._den
        value = max_ratio(stats._sup, den, stats._inf, den, mask)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(mask, stats._sup / stats._inf, -np.inf)
        value = float(ratios.max())
    thr = spread_threshold(level)
    tol = d.tolerance()
    return CylinderSpread(level=level, value=value, threshold=thr,
                          within_threshold=bool(tol.lt(value, thr)))


# ---------------------------------------------------------------------------
# density and disconnection


def net_density(d: DyadicMetric, subset) -> object:
    """Covering radius of a point subset: max over x of min_{s} d(x, s)."""
    idx = sorted({int(i) for i in subset})
    if not idx:
        raise InvalidParameterError("subset must be nonempty")
    if idx[0] < 0 or idx[-1] >= d.n_points:
        raise InvalidParameterError("subset index out of range")
    if d.rational:
        cols = d._rat.num[:, idx]
        return Fraction(int(cols.min(axis=1).max()), d._rat.den)
    return float(d._dbl[:, idx].min(axis=1).max())


def _minimum_spanning_tree(num) -> list:
    """Prim's algorithm on a dense symmetric matrix; returns (i, j, w) edges."""
    n = num.shape[0]
    visited = np.zeros(n, dtype=bool)
    visited[0] = True
    best = np.array(num[0], copy=True)
    parent = np.zeros(n, dtype=np.int64)
    edges = []
    for _ in range(n - 1):
        pending = np.flatnonzero(~visited)
        j = pending[int(np.argmin(best[pending]))] if num.dtype != object else \
            min(pending, key=lambda t: best[t])
        edges.append((int(parent[j]), int(j), num[parent[j], j]))
        visited[j] = True
        improve = num[j] < best
        improve &= ~visited
        best[improve] = num[j][improve]
        parent[improve] = j
    return edges


def bottleneck_matrix(num) -> np.ndarray:
    """Minimax path values: min over paths of the maximum edge weight.

    Computed on a minimum spanning tree; the value of a pair equals the
    largest edge on its unique tree path.
    """
    n = num.shape[0]
    adj = [[] for _ in range(n)]
    for i, j, w in _minimum_spanning_tree(num):
        adj[i].append((j, w))
        adj[j].append((i, w))
    out = np.zeros_like(np.asarray(num))
    for s in range(n):
        stack = [s]
        seen = [False] * n
        seen[s] = True
        while stack:
            u = stack.pop()
            for v, w in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    out[s, v] = max(out[s, u], w) if u != s else w
                    stack.append(v)
    return out


def disconnection_constant(d: DyadicMetric):
    """Best uniform separation constant of the finite space, in (0, 1].

    For a pair (x, y), the best constant over two-sided clopen splits is
    (max over partitions separating x from y of the minimum cross distance)
    divided by d(x, y).  In a finite space every subset is clopen, and cut/
    path duality for bottleneck weights identifies the numerator with the
    minimax path value b(x, y): every path from x to y crosses every
    separating cut, so no cut's minimum cross edge can exceed a path's
    maximum edge, and the cut {z : b(x, z) <= t} for t just below b(x, y)
    attains the bound.  The overall constant is the minimum of
    b(x, y)/d(x, y) over pairs, which equals 1 exactly on ultrametrics.
    """
    n = d.n_points
    if n == 2:
        return Fraction(1) if d.rational else 1.0
    mask = ~np.eye(n, dtype=bool)
    if d.rational:
        num = d._rat.num
        bn = bottleneck_matrix(num)
        return min_ratio(bn, d._rat.den, num, d._rat.den, mask)
    bn = bottleneck_matrix(d._dbl)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(mask, bn / d._dbl, np.inf)
    return float(ratios.min())
