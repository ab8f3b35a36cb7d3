"""Lipschitz functions on dyadic nets: constants, extensions, profiles.

Functions are stored as value tuples aligned with point indices.  All
computations are exact in rational mode; float inputs stay in float64.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dyadic import DyadicMetric
from .errors import InvalidParameterError
from .numerics import INT64_SAFE, as_fraction, max_ratio

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LipFn:
    """Real values on the net, with a designated base point index."""

    values: tuple
    base_index: int

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not 0 <= self.base_index < len(self.values):
            raise InvalidParameterError("base index out of range")

    @property
    def rational(self) -> bool:
        return isinstance(self.values[0], (int, Fraction))

    def vanishes_at_base(self) -> bool:
        return self.values[self.base_index] == 0

    def as_lip0(self) -> "LipFn":
        """Shift so the base value is zero; logs when a shift was needed."""
        b = self.values[self.base_index]
        if b == 0:
            return self
        logger.info("normalizing function to vanish at base point (shift %s)", b)
        return LipFn(tuple(v - b for v in self.values), self.base_index)

    def sup_norm(self):
        return max(abs(v) for v in self.values)

    def scaled(self, c) -> "LipFn":
        return LipFn(tuple(v * c for v in self.values), self.base_index)

    def __add__(self, other: "LipFn") -> "LipFn":
        if len(self.values) != len(other.values):
            raise InvalidParameterError("length mismatch")
        return LipFn(tuple(a + b for a, b in zip(self.values, other.values)),
                     self.base_index)

    def __len__(self):
        return len(self.values)


def _check_sizes(f: LipFn, d: DyadicMetric):
    if len(f.values) != d.n_points:
        raise InvalidParameterError("function length does not match the net")


def _value_numerators(values):
    """Common-denominator integer numerators of exact values."""
    fracs = [as_fraction(v) for v in values]
    den = 1
    for v in fracs:
        den = den * v.denominator // math.gcd(den, v.denominator)
    nums = [int(v * den) for v in fracs]
    big = max((abs(v) for v in nums), default=0)
    dtype = np.int64 if 2 * big < INT64_SAFE else object
    return np.array(nums, dtype=dtype), den


def lip_const(f: LipFn, d: DyadicMetric, subset=None):
    """Exact Lipschitz constant, optionally over a point subset.

    A singleton subset has no pairs; the constant is 0 by convention and a
    warning is logged.
    """
    _check_sizes(f, d)
    if subset is None:
        idx = np.arange(d.n_points)
    else:
        idx = np.array(sorted({int(i) for i in subset}), dtype=np.int64)
        if idx.size == 0:
            raise InvalidParameterError("subset must be nonempty")
        if idx[0] < 0 or idx[-1] >= d.n_points:
            raise InvalidParameterError("subset index out of range")
    if idx.size == 1:
        logger.warning("Lipschitz constant of a singleton subset is 0 by convention")
        return Fraction(0) if d.rational else 0.0
    mask = np.triu(np.ones((idx.size, idx.size), dtype=bool), 1)
    if d.rational:
        vnum, vden = _value_numerators([f.values[i] for i in idx])
        diff = np.abs(np.subtract.outer(vnum, vnum))
        sub = d.data.restrict(idx)
        return max_ratio(diff, vden, sub.num, sub.den, mask)
    vals = np.asarray([float(f.values[i]) for i in idx])
    diff = np.abs(np.subtract.outer(vals, vals))
    dd = d.as_float()[np.ix_(idx, idx)]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(mask, diff / dd, -np.inf)
    return float(ratios.max())


def mcshane_extend(partial, L, d: DyadicMetric) -> LipFn:
    """Largest L-Lipschitz extension: x -> min over anchors of f(y) + L d(x,y).

    The partial assignment must itself be L-Lipschitz; violations are
    rejected with a witness pair.  The result agrees with the assignment on
    its domain, is L-Lipschitz, and dominates every other L-Lipschitz
    function that agrees there.
    """
    if not partial:
        raise InvalidParameterError("partial assignment must be nonempty")
    exact = d.rational
    conv = as_fraction if exact else float
    anchors = sorted(partial)
    if anchors[0] < 0 or anchors[-1] >= d.n_points:
        raise InvalidParameterError("anchor index out of range")
    vals = {i: conv(partial[i]) for i in anchors}
    L = conv(L)
    if L < 0:
        raise InvalidParameterError("Lipschitz bound must be nonnegative")
    for a in anchors:
        for b in anchors:
            if a < b and abs(vals[a] - vals[b]) > L * d.entry(a, b):
                raise InvalidParameterError(
                    f"assignment violates the bound on pair ({a}, {b}): "
                    f"|{vals[a]} - {vals[b]}| > {L} * {d.entry(a, b)}")
    out = []
    for x in range(d.n_points):
        out.append(min(vals[y] + L * d.entry(x, y) for y in anchors))
    return LipFn(tuple(out), d.base_index)


def lip_full_norm(f: LipFn, d: DyadicMetric):
    """Lipschitz constant plus sup norm; the algebra norm of bounded Lipschitz
    functions."""
    return lip_const(f, d) + f.sup_norm()


def flatness_profile(f: LipFn, d: DyadicMetric, radii):
    """For each radius r, the worst local Lipschitz constant over open balls.

    Balls are open: B_r(x) = {y : d(y, x) < r}.  Singleton balls contribute 0.
    """
    _check_sizes(f, d)
    radii = list(radii)
    if any((as_fraction(r) if d.rational else float(r)) <= 0 for r in radii):
        raise InvalidParameterError("radii must be positive")
    dist = d.as_float()
    out = {}
    for r in radii:
        rr = as_fraction(r) if d.rational else float(r)
        worst = Fraction(0) if d.rational else 0.0
        for x in range(d.n_points):
            if d.rational:
                ball = [y for y in range(d.n_points) if d.entry(x, y) < rr]
            else:
                ball = np.flatnonzero(dist[x] < rr).tolist()
            if len(ball) >= 2:
                val = lip_const(f, d, subset=ball)
                if val > worst:
                    worst = val
        out[r] = worst
    return out


def random_lip(d: DyadicMetric, L, seed: int, max_anchors: int = 16,
               grid: int = 64) -> LipFn:
    """Seeded random function with Lipschitz constant at most L, zero at base.

    Random values on a random anchor set are clamped into the feasible
    interval dictated by the anchors already placed, then extended by
    mcshane_extend with bound 1 and scaled by L, so the scaling convention
    random_lip(d, L, s) = L * random_lip(d, 1, s) holds exactly.
    """
    exact = d.rational
    L = as_fraction(L) if exact else float(L)
    if L <= 0:
        raise InvalidParameterError("L must be positive")
    rng = np.random.default_rng(int(seed))
    n = d.n_points
    k = int(rng.integers(2, min(n, max_anchors) + 1))
    order = rng.permutation(n)
    anchors = [d.base_index] + [int(i) for i in order if i != d.base_index][:k - 1]
    diam = d.diameter()
    raws = rng.integers(-grid, grid + 1, size=len(anchors))
    vals = {d.base_index: Fraction(0) if exact else 0.0}
    for a, raw in zip(anchors[1:], raws[1:]):
        r = (Fraction(int(raw), grid) * diam) if exact \
            else float(raw) / grid * diam
        lo = max(vals[z] - d.entry(a, z) for z in vals)
        hi = min(vals[z] + d.entry(a, z) for z in vals)
        vals[a] = min(max(r, lo), hi)
    one = Fraction(1) if exact else 1.0
    f = mcshane_extend(vals, one, d)
    f = LipFn(tuple(v - f.values[d.base_index] for v in f.values), d.base_index)
    return f.scaled(L)
