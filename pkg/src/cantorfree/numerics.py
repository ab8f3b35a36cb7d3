"""Numeric kernels shared by the whole package.

Exact rational matrices are stored as integer numerators over a single shared
denominator.  Numerators live in an int64 numpy array whenever they fit with
headroom for pairwise sums, and fall back to an object array of Python ints
otherwise, so every operation stays exact regardless of magnitude.

Floating-point matrices are plain float64 arrays; the :class:`Tolerance`
policy is the one place comparisons consult when deciding strictness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidParameterError

# Sums of two entries must stay inside int64.
INT64_SAFE = 1 << 61

_FLOAT_SCREEN = 1e-9  # candidate window for exact max/min confirmation


def as_fraction(x) -> Fraction:
    """Exact conversion to Fraction; floats convert via their binary value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise InvalidParameterError(f"cannot interpret {x!r} as an exact rational")


def as_number(x, mode: str):
    """Coerce x into the arithmetic of the given mode."""
    return as_fraction(x) if mode == "rational" else float(x)


def _as_int_array(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype == object or arr.dtype == np.int64:
        return arr
    if np.issubdtype(arr.dtype, np.integer):
        return arr.astype(np.int64)
    raise InvalidParameterError("numerator array must be integer-valued")


def _fits_int64(arr, extra: int = 1) -> bool:
    if arr.size == 0:
        return True
    m = max(abs(int(arr.min())), abs(int(arr.max())))
    return m * extra < INT64_SAFE


def _gcd_of(arr, den: int) -> int:
    g = den
    if arr.dtype == np.int64:
        if arr.size:
            g = math.gcd(g, int(np.gcd.reduce(np.abs(arr.ravel()))))
        return g
    for v in arr.ravel():
        g = math.gcd(g, abs(int(v)))
        if g == 1:
            return 1
    return g


def to_float_array(num, den=None) -> np.ndarray:
    """num/den as float64; exact rounding per entry."""
    if den is None:
        return np.asarray(num, dtype=np.float64)
    if num.dtype == object:
        out = np.empty(num.shape, dtype=np.float64)
        flat = out.ravel()
        for k, v in enumerate(num.ravel()):
            flat[k] = int(v) / den
        return out
    return num.astype(np.float64) / float(den)


class RationalMatrix:
    """Square matrix of nonnegative rationals over one shared denominator.

    Instances are immutable: the numerator array is marked read-only and all
    methods return fresh objects.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den: int = 1, *, normalize: bool = True):
        num = _as_int_array(num)
        den = int(den)
        if den <= 0:
            raise InvalidParameterError("denominator must be positive")
        if num.ndim != 2 or num.shape[0] != num.shape[1]:
            raise InvalidParameterError("expected a square matrix")
        if normalize:
            g = _gcd_of(num, den)
            if g > 1:
                num = num // g
                den //= g
            if num.dtype == object and _fits_int64(num, 2):
                num = np.array([[int(v) for v in row] for row in num], dtype=np.int64)
        if num.flags.writeable:
            num = num.copy()
            num.setflags(write=False)
        self.num = num
        self.den = den

    # -- construction -----------------------------------------------------

    @classmethod
    def from_fractions(cls, rows) -> "RationalMatrix":
        rows = [[as_fraction(v) for v in row] for row in rows]
        den = 1
        for row in rows:
            for v in row:
                den = den * v.denominator // math.gcd(den, v.denominator)
        num = [[int(v * den) for v in row] for row in rows]
        arr = np.array(num, dtype=np.int64) if _fits_int64(np.array(num, dtype=object), 2) \
            else np.array(num, dtype=object)
        return cls(arr, den)

    @classmethod
    def from_positions(cls, positions) -> "RationalMatrix":
        """Distance matrix |p_i - p_j| of rational points on the line."""
        pos = [as_fraction(p) for p in positions]
        den = 1
        for p in pos:
            den = den * p.denominator // math.gcd(den, p.denominator)
        nums = [int(p * den) for p in pos]
        big = max((abs(v) for v in nums), default=0)
        dtype = np.int64 if 2 * big < INT64_SAFE else object
        v = np.array(nums, dtype=dtype)
        mat = np.abs(np.subtract.outer(v, v))
        return cls(mat, den)

    # -- basic access ------------------------------------------------------

    @property
    def n(self) -> int:
        return self.num.shape[0]

    def entry(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.num[i, j]), self.den)

    def fractions(self) -> np.ndarray:
        out = np.empty(self.num.shape, dtype=object)
        flat = out.ravel()
        for k, v in enumerate(self.num.ravel()):
            flat[k] = Fraction(int(v), self.den)
        flat = None
        out.setflags(write=False)
        return out

    def to_float(self) -> np.ndarray:
        return to_float_array(self.num, self.den)

    def max_value(self) -> Fraction:
        return Fraction(int(self.num.max()), self.den) if self.num.size else Fraction(0)

    def min_offdiagonal(self) -> Fraction:
        n = self.n
        if n < 2:
            return Fraction(0)
        masked = np.where(np.eye(n, dtype=bool), self.num.max(), self.num)
        return Fraction(int(masked.min()), self.den)

    # -- algebra -----------------------------------------------------------

    def scaled(self, c) -> "RationalMatrix":
        c = as_fraction(c)
        if c < 0:
            raise InvalidParameterError("scale factor must be nonnegative")
        num = self.num
        if num.dtype == np.int64 and not _fits_int64(num, 2 * c.numerator):
            num = num.astype(object)
        return RationalMatrix(num * c.numerator, self.den * c.denominator)

    def restrict(self, indices) -> "RationalMatrix":
        idx = np.asarray(indices)
        return RationalMatrix(self.num[np.ix_(idx, idx)], self.den, normalize=False)

    def rebase(self, other: "RationalMatrix"):
        """Common-denominator numerators (a_num, b_num, den)."""
        den = self.den * other.den // math.gcd(self.den, other.den)
        fa, fb = den // self.den, den // other.den
        a = _scaled_ints(self.num, fa)
        b = _scaled_ints(other.num, fb)
        return a, b, den

    def __eq__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        if self.den != other.den or self.num.shape != other.num.shape:
            return False
        return bool(np.array_equal(self.num, other.num))

    def __hash__(self):
        return hash((self.den, self.num.shape))

    def __repr__(self):
        return f"RationalMatrix(n={self.n}, den={self.den})"


def _scaled_ints(arr: np.ndarray, k: int) -> np.ndarray:
    if k == 1:
        return arr
    if arr.dtype == np.int64 and not _fits_int64(arr, 2 * k):
        arr = arr.astype(object)
    return arr * k


# -- dense metric kernels (dtype-generic: int64, object, or float64) -------


def triangle_defect(mat: np.ndarray):
    """max over (i,j) of d[i,j] - min_k (d[i,k] + d[k,j]); 0 iff triangle holds."""
    n = mat.shape[0]
    best = None
    for k in range(n):
        s = np.add.outer(mat[:, k], mat[k, :])
        best = s if best is None else np.minimum(best, s)
    gap = mat - best
    return gap.max() if gap.size else 0


def metric_closure(mat: np.ndarray) -> np.ndarray:
    """All-pairs min-plus closure (Floyd-Warshall) of a symmetric matrix."""
    out = np.array(mat)
    n = out.shape[0]
    for k in range(n):
        np.minimum(out, np.add.outer(out[:, k], out[k, :]), out=out)
    return out


def block_min_max(mat: np.ndarray, blocks: int):
    """Per-block (inf, sup) over a matrix split into `blocks` equal index blocks."""
    n = mat.shape[0]
    s = n // blocks
    view = mat.reshape(blocks, s, blocks, s)
    return view.min(axis=(1, 3)), view.max(axis=(1, 3))


def max_abs_diff(a: np.ndarray, b: np.ndarray):
    return np.abs(a - b).max()


# -- exact extrema of entrywise ratios --------------------------------------
#
# Float arithmetic prescreens candidates; the winner is confirmed with exact
# integer cross-multiplication.  The float error of num/den ratios is far
# below the screening window, so the exact optimum is always a candidate.


def _ratio_candidates(fa, fb, mask, pick_max: bool):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(mask, fa / fb, -np.inf if pick_max else np.inf)
    if pick_max:
        target = r.max()
        if target == -np.inf:
            return None
        window = abs(target) * _FLOAT_SCREEN + 1e-300
        cand = np.argwhere(r >= target - window)
    else:
        target = r.min()
        if target == np.inf:
            return None
        window = abs(target) * _FLOAT_SCREEN + 1e-300
        cand = np.argwhere(r <= target + window)
    return cand


def _extreme_ratio(num_a, den_a, num_b, den_b, mask, pick_max):
    """Exact extremum of (num_a/den_a)/(num_b/den_b) over mask; entries >= 0."""
    fa = to_float_array(num_a, den_a)
    fb = to_float_array(num_b, den_b)
    cand = _ratio_candidates(fa, fb, mask, pick_max)
    if cand is None:
        raise InvalidParameterError("ratio extremum over empty selection")
    best = None
    for idx in cand:
        idx = tuple(idx)
        q = Fraction(int(num_a[idx]) * den_b, int(num_b[idx]) * den_a)
        if best is None or (q > best if pick_max else q < best):
            best = q
    return best


def max_ratio(num_a, den_a, num_b, den_b, mask) -> Fraction:
    return _extreme_ratio(num_a, den_a, num_b, den_b, mask, True)


def min_ratio(num_a, den_a, num_b, den_b, mask) -> Fraction:
    return _extreme_ratio(num_a, den_a, num_b, den_b, mask, False)


# -- tolerance policy --------------------------------------------------------


@dataclass(frozen=True)
class Tolerance:
    """Single comparison policy: exact in rational mode, banded in double mode.

    Strict inequalities in double mode require clearance by `tol`, matching
    the convention that a guaranteed strict bound must hold with margin once
    rounding is in play.
    """

    mode: str
    tol: float = 1e-9

    def __post_init__(self):
        if self.mode not in ("rational", "double"):
            raise InvalidParameterError(f"unknown mode {self.mode!r}")

    @property
    def exact(self) -> bool:
        return self.mode == "rational"

    def eq(self, a, b) -> bool:
        return a == b if self.exact else abs(float(a) - float(b)) <= self.tol

    def is_zero(self, a) -> bool:
        return self.eq(a, 0)

    def le(self, a, b) -> bool:
        return a <= b if self.exact else float(a) <= float(b) + self.tol

    def lt(self, a, b) -> bool:
        return a < b if self.exact else float(a) < float(b) - self.tol


def tolerance_for(mode: str, tol: float = 1e-9) -> Tolerance:
    return Tolerance(mode=mode, tol=tol)
