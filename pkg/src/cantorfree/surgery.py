"""Metric surgery on cylinder unions.

Given a metric on the depth-m net, a clopen target that splits into small
pieces, and a replacement metric per piece, the surgery rebuilds distances so
that each piece becomes a rescaled copy of its replacement while everything
else moves by less than a prescribed epsilon:

  * off the target nothing changes;
  * between an outside point and a piece, the distance becomes the farthest
    original distance from the point to the piece;
  * between two distinct pieces, the constant farthest original cross
    distance;
  * inside a piece, the replacement scaled to diameter min(delta, original
    piece diameter).

The triangle inequality survives because every new cross value dominates the
old distances it replaces while piece diameters only shrink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .dyadic import (
    ROOT,
    Address,
    DyadicMetric,
    all_addresses,
    cylinder_spread,
    cylinder_stats,
    generate,
    spread_threshold,
    sup_distance,
)
from .errors import (
    InsufficientDepthError,
    InternalCheckError,
    InvalidParameterError,
)
from .numerics import (
    INT64_SAFE,
    RationalMatrix,
    as_fraction,
    as_number,
    triangle_defect,
)


def _coerce_address(a) -> Address:
    if isinstance(a, Address):
        return a
    if isinstance(a, str):
        return Address.parse(a)
    return Address(tuple(a))


@dataclass(frozen=True)
class PartitionSpec:
    """A clopen target and its split into cylinder-union pieces."""

    target: tuple
    pieces: tuple

    def __post_init__(self):
        target = tuple(_coerce_address(a) for a in self.target)
        pieces = tuple(tuple(_coerce_address(a) for a in piece)
                       for piece in self.pieces)
        if not target:
            raise InvalidParameterError("target must be nonempty")
        if not pieces or any(not piece for piece in pieces):
            raise InvalidParameterError("pieces must be nonempty")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def uniform(cls, level: int) -> "PartitionSpec":
        """Whole space split into all cylinders of one level."""
        return cls(target=(ROOT,), pieces=tuple((a,) for a in all_addresses(level)))

    def target_indices(self, depth: int) -> list:
        out = set()
        for a in self.target:
            out.update(a.block_at(depth))
        return sorted(out)

    def piece_indices(self, depth: int) -> list:
        out = []
        for piece in self.pieces:
            idx = set()
            for a in piece:
                block = a.block_at(depth)
                if idx & set(block):
                    raise InvalidParameterError("overlapping cylinders in a piece")
                idx.update(block)
            out.append(sorted(idx))
        return out

    def validate_on(self, depth: int) -> list:
        """Check disjointness and coverage; returns the piece index lists."""
        pieces = self.piece_indices(depth)
        union = [i for piece in pieces for i in piece]
        if len(union) != len(set(union)):
            raise InvalidParameterError("pieces overlap")
        if sorted(union) != self.target_indices(depth):
            raise InvalidParameterError("pieces do not cover the target exactly")
        return pieces


@dataclass(frozen=True)
class SurgeryPlan:
    """Partition plus per-piece replacement metrics and the (epsilon, delta)
    budget.  Singleton pieces carry None and keep their (empty) geometry."""

    partition: PartitionSpec
    replacements: tuple
    epsilon: object
    delta: object

    def __post_init__(self):
        if len(self.replacements) != len(self.partition.pieces):
            raise InvalidParameterError("one replacement per piece required")
        object.__setattr__(self, "replacements", tuple(self.replacements))


def _resolve_target(d: DyadicMetric, target):
    if isinstance(target, str) and target == "all":
        return (ROOT,)
    return tuple(_coerce_address(a) for a in target)


def greedy_partition(d: DyadicMetric, target, epsilon,
                     max_level: Optional[int] = None) -> PartitionSpec:
    """Smallest uniform cylinder level whose pieces all have diameter < eps/2.

    The target must be a union of cylinders; levels are scanned from the
    coarsest.  A level is admissible when every cylinder of that level lies
    fully inside or outside the target and the inside ones are small enough.
    Raises InsufficientDepthError when no level up to `max_level` (default:
    the full depth, where pieces are single points) qualifies.
    """
    target = _resolve_target(d, target)
    eps = as_number(epsilon, d.mode)
    if eps <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if max_level is None:
        max_level = d.depth
    tol = d.tolerance()
    mask = np.zeros(d.n_points, dtype=bool)
    for a in target:
        mask[list(a.block_at(d.depth))] = True
    if not mask.any():
        raise InvalidParameterError("target must be nonempty")
    half = eps / 2
    for level in range(0, max_level + 1):
        blocks = 1 << level
        view = mask.reshape(blocks, -1)
        full = view.all(axis=1)
        empty = ~view.any(axis=1)
        if not np.all(full | empty):
            continue
        inside = np.flatnonzero(full)
        if level == 0:
            diams = [d.diameter()]
        else:
            stats = cylinder_stats(d, level)
            diams = [stats.diam(int(b)) for b in inside]
        if all(tol.lt(v, half) for v in diams):
            addrs = all_addresses(level)
            pieces = tuple((addrs[int(b)],) for b in inside)
            return PartitionSpec(target=target, pieces=pieces)
    raise InsufficientDepthError(
        f"no cylinder level <= {max_level} has pieces of diameter below "
        f"epsilon/2 = {half}")


# ---------------------------------------------------------------------------
# the replacement construction


def _plan_numbers(d: DyadicMetric, plan: SurgeryPlan):
    eps = as_number(plan.epsilon, d.mode)
    delta = as_number(plan.delta, d.mode)
    if eps <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if not 0 < delta <= 1:
        raise InvalidParameterError("delta must lie in (0, 1]")
    return eps, delta


def _piece_sup(d: DyadicMetric, rows, cols):
    if d.rational:
        sub = d.data.num[np.ix_(rows, cols)]
        return Fraction(int(sub.max()), d.data.den)
    return float(d.as_float()[np.ix_(rows, cols)].max())


def apply_surgery(d: DyadicMetric, plan: SurgeryPlan, check: bool = True) -> DyadicMetric:
    """Rebuild d according to the plan; see the module docstring for the
    defining clauses.  Postconditions are asserted internally: the output is
    validated as a metric and must stay strictly within epsilon of d."""
    eps, delta = _plan_numbers(d, plan)
    pieces = plan.partition.validate_on(d.depth)
    tol = d.tolerance()
    half = eps / 2

    scales = []
    for k, (piece, rep) in enumerate(zip(pieces, plan.replacements)):
        diam_i = _piece_sup(d, piece, piece)
        if not tol.lt(diam_i, half):
            raise InvalidParameterError(
                f"piece {k} has diameter {diam_i}, not below epsilon/2 = {half}")
        if len(piece) == 1:
            if rep is not None:
                raise InvalidParameterError(
                    f"piece {k} is a singleton and admits no replacement")
            scales.append(None)
            continue
        if rep is None:
            raise InvalidParameterError(f"piece {k} needs a replacement metric")
        if not isinstance(rep, DyadicMetric):
            raise InvalidParameterError("replacements must be DyadicMetric values")
        if rep.mode != d.mode:
            raise InvalidParameterError("replacement number mode mismatch")
        if rep.n_points != len(piece):
            raise InvalidParameterError(
                f"replacement {k} has {rep.n_points} points, piece has {len(piece)}")
        if check:
            defect = triangle_defect(rep.data.num if rep.rational else rep.data)
            if (rep.rational and defect > 0) or \
                    (not rep.rational and defect > tol.tol):
                raise InvalidParameterError(f"replacement {k} is not a metric")
            if rep.min_offdiagonal() <= 0:
                raise InvalidParameterError(f"replacement {k} is degenerate")
        scales.append(min(delta, diam_i) / rep.diameter())

    if d.rational:
        out = _surgery_rational(d, plan, pieces, scales)
    else:
        out = _surgery_double(d, plan, pieces, scales)

    result = DyadicMetric(d.depth, out, d.mode, d.base_index, None,
                          {"kind": "surgery"})
    if check:
        defect = triangle_defect(result.data.num if result.rational else result.data)
        if (result.rational and defect > 0) or \
                (not result.rational and defect > tol.tol):
            raise InternalCheckError("surgery output violates the triangle inequality")
        moved = sup_distance(d, result)
        if not tol.lt(moved, eps):
            raise InternalCheckError(
                f"surgery moved the metric by {moved}, not strictly below {eps}")
    return result


def _surgery_rational(d, plan, pieces, scales):
    base = d.data
    dens = [base.den]
    factors = []
    for rep, s in zip(plan.replacements, scales):
        if s is None:
            factors.append(None)
            continue
        dens.append(rep.data.den * s.denominator)
        factors.append(s)
    out_den = 1
    for v in dens:
        out_den = out_den * v // math.gcd(out_den, v)

    mult_d = out_den // base.den
    bound = int(base.num.max()) * mult_d
    for rep, s in zip(plan.replacements, scales):
        if s is not None:
            mult = s.numerator * (out_den // (rep.data.den * s.denominator))
            bound = max(bound, int(rep.data.num.max()) * mult)
    dtype = np.int64 if 2 * bound < INT64_SAFE else object
    num = base.num.astype(dtype) * mult_d

    outside = np.array(sorted(set(range(d.n_points))
                              - {i for p in pieces for i in p}), dtype=np.int64)
    for k, piece in enumerate(pieces):
        pi = np.array(piece, dtype=np.int64)
        if outside.size:
            col = base.num[np.ix_(outside, pi)].max(axis=1).astype(dtype) * mult_d
            num[np.ix_(outside, pi)] = col[:, None]
            num[np.ix_(pi, outside)] = col[None, :]
        for l in range(k + 1, len(pieces)):
            pj = np.array(pieces[l], dtype=np.int64)
            const = int(base.num[np.ix_(pi, pj)].max()) * mult_d
            num[np.ix_(pi, pj)] = dtype(const) if dtype is np.int64 else const
            num[np.ix_(pj, pi)] = dtype(const) if dtype is np.int64 else const
        rep, s = plan.replacements[k], scales[k]
        if s is not None:
            mult = s.numerator * (out_den // (rep.data.den * s.denominator))
            num[np.ix_(pi, pi)] = rep.data.num.astype(dtype) * mult
    return RationalMatrix(num, out_den)


def _surgery_double(d, plan, pieces, scales):
    out = np.array(d.as_float())
    base = d.as_float()
    outside = np.array(sorted(set(range(d.n_points))
                              - {i for p in pieces for i in p}), dtype=np.int64)
    for k, piece in enumerate(pieces):
        pi = np.array(piece, dtype=np.int64)
        if outside.size:
            col = base[np.ix_(outside, pi)].max(axis=1)
            out[np.ix_(outside, pi)] = col[:, None]
            out[np.ix_(pi, outside)] = col[None, :]
        for l in range(k + 1, len(pieces)):
            pj = np.array(pieces[l], dtype=np.int64)
            const = base[np.ix_(pi, pj)].max()
            out[np.ix_(pi, pj)] = const
            out[np.ix_(pj, pi)] = const
        rep, s = plan.replacements[k], scales[k]
        if s is not None:
            out[np.ix_(pi, pi)] = rep.as_float() * s
    return out


# ---------------------------------------------------------------------------
# contract report (used by the verification suite)


@dataclass(frozen=True)
class SurgeryContract:
    """Pointwise audit of the six defining clauses of a surgery output."""

    off_target_agrees: bool
    boundary_uses_farthest: bool
    pieces_proportional: bool
    cross_pieces_constant: bool
    sup_distance_lt_epsilon: bool
    piece_diameters_le_delta: bool
    monotone_off_pieces: bool

    @property
    def ok(self) -> bool:
        return all((self.off_target_agrees, self.boundary_uses_farthest,
                    self.pieces_proportional, self.cross_pieces_constant,
                    self.sup_distance_lt_epsilon, self.piece_diameters_le_delta,
                    self.monotone_off_pieces))


def surgery_contract(d: DyadicMetric, plan: SurgeryPlan,
                     out: DyadicMetric) -> SurgeryContract:
    """Exhaustively check every clause of the surgery contract."""
    eps, delta = _plan_numbers(d, plan)
    pieces = plan.partition.validate_on(d.depth)
    tol = d.tolerance()
    n = d.n_points

    if d.rational and out.rational:
        a_num, b_num, _ = d.data.rebase(out.data)
    else:
        a_num, b_num = d.as_float(), out.as_float()

    piece_of = np.full(n, -1, dtype=np.int64)
    for k, piece in enumerate(pieces):
        piece_of[piece] = k
    outside = np.flatnonzero(piece_of < 0)

    eq = lambda x, y: bool(np.all(x == y)) if d.rational else \
        bool(np.all(np.abs(x - y) <= tol.tol))

    off_ok = eq(a_num[np.ix_(outside, outside)], b_num[np.ix_(outside, outside)]) \
        if outside.size else True

    boundary_ok = True
    cross_ok = True
    prop_ok = True
    diam_ok = True
    for k, piece in enumerate(pieces):
        pi = np.array(piece, dtype=np.int64)
        if outside.size:
            expected = a_num[np.ix_(outside, pi)].max(axis=1)[:, None]
            boundary_ok &= eq(b_num[np.ix_(outside, pi)], expected)
        for l in range(len(pieces)):
            if l == k:
                continue
            pj = np.array(pieces[l], dtype=np.int64)
            expected = a_num[np.ix_(pi, pj)].max()
            cross_ok &= eq(b_num[np.ix_(pi, pj)], expected)
        rep = plan.replacements[k]
        diam_orig = _piece_sup(d, piece, piece)
        target_diam = min(as_number(delta, d.mode), diam_orig)
        if rep is not None:
            block_out = _block_values(out, pi)
            scale = target_diam / rep.diameter()
            prop_ok &= _proportional(block_out, rep, scale, tol)
            diam_new = _piece_sup(out, piece, piece)
            diam_ok &= bool(tol.le(diam_new, delta)) and \
                (diam_new == target_diam if d.rational
                 else abs(diam_new - target_diam) <= tol.tol)

    moved = sup_distance(d, out)
    sup_ok = bool(tol.lt(moved, eps))

    same_piece = (piece_of[:, None] == piece_of[None, :]) & (piece_of[:, None] >= 0)
    off_pairs = ~same_piece
    mono_ok = bool(np.all(b_num[off_pairs] >= a_num[off_pairs])) if d.rational \
        else bool(np.all(b_num[off_pairs] >= a_num[off_pairs] - tol.tol))

    return SurgeryContract(
        off_target_agrees=bool(off_ok),
        boundary_uses_farthest=bool(boundary_ok),
        pieces_proportional=bool(prop_ok),
        cross_pieces_constant=bool(cross_ok),
        sup_distance_lt_epsilon=sup_ok,
        piece_diameters_le_delta=bool(diam_ok),
        monotone_off_pieces=mono_ok,
    )


def _block_values(metric: DyadicMetric, idx):
    if metric.rational:
        return metric.data.restrict(idx)
    return metric.as_float()[np.ix_(idx, idx)]


def _proportional(block, rep: DyadicMetric, scale, tol) -> bool:
    if rep.rational:
        # block/blockden == rep/repden * scale, checked by cross-multiplying
        lhs = block.num.astype(object) * (rep.data.den * scale.denominator)
        rhs = rep.data.num.astype(object) * (scale.numerator * block.den)
        return bool(np.all(lhs == rhs))
    return bool(np.all(np.abs(block - rep.as_float() * scale) <= tol.tol))


# ---------------------------------------------------------------------------
# derived procedures


def reduce_cylinder_spread(d: DyadicMetric, epsilon, min_level: int = 1,
                           check: bool = True):
    """Move d by less than epsilon so some level's cylinder spread drops
    strictly below 1 + 1/level.

    Finds the smallest admissible level n >= min_level whose cylinders have
    diameter below epsilon/2, shrinks every cylinder to a tiny copy of the
    canonical ultrametric (diameter at most half of (1/2n) times the
    smallest cross distance), and returns (n, rebuilt metric).  The rebuilt
    cross distances never drop, so the spread bound follows.
    """
    eps = as_number(epsilon, d.mode)
    if eps <= 0:
        raise InvalidParameterError("epsilon must be positive")
    if min_level < 1:
        raise InvalidParameterError("min_level must be at least 1")
    if min_level > d.depth - 1:
        raise InsufficientDepthError("no admissible level below the depth")
    tol = d.tolerance()
    half = eps / 2
    level = None
    stats = None
    for n in range(min_level, d.depth):
        stats = cylinder_stats(d, n)
        if tol.lt(stats.max_diam(), half):
            level = n
            break
    if level is None:
        raise InsufficientDepthError(
            f"no level in [{min_level}, {d.depth - 1}] has cylinder diameters "
            f"below epsilon/2 = {half}")
    min_cross = stats.min_cross_inf()
    one = Fraction(1) if d.rational else 1.0
    delta = min(one, min_cross / (4 * level))
    rep = generate("mu", d.depth - level, mode=d.mode)
    partition = PartitionSpec.uniform(level)
    plan = SurgeryPlan(partition=partition,
                       replacements=(rep,) * (1 << level),
                       epsilon=eps, delta=delta)
    out = apply_surgery(d, plan, check=check)
    if check:
        spread = cylinder_spread(out, level)
        if not tol.lt(spread.value, spread_threshold(level)):
            raise InternalCheckError(
                f"spread {spread.value} did not drop below {spread.threshold}")
    return level, out


def transplant(class_rep: DyadicMetric, dhat: DyadicMetric, epsilon,
               check: bool = True) -> DyadicMetric:
    """Rebuild dhat within epsilon so every piece is proportional to the
    matching cylinder block of class_rep.

    The partition is the greedy uniform one for dhat; the replacement for
    the piece at address a is class_rep restricted to a's own index block,
    matched in address order.
    """
    if class_rep.depth != dhat.depth:
        raise InvalidParameterError("depth mismatch")
    if class_rep.mode != dhat.mode:
        raise InvalidParameterError("number mode mismatch")
    partition = greedy_partition(dhat, "all", epsilon)
    replacements = []
    for piece in partition.pieces:
        addr = piece[0]
        idx = list(addr.block_at(dhat.depth))
        if len(idx) == 1:
            replacements.append(None)
            continue
        if class_rep.rational:
            block = class_rep.data.restrict(idx)
        else:
            block = class_rep.as_float()[np.ix_(idx, idx)]
        replacements.append(DyadicMetric(len(idx).bit_length() - 1, block,
                                         class_rep.mode))
    plan = SurgeryPlan(partition=partition, replacements=tuple(replacements),
                       epsilon=as_number(epsilon, dhat.mode),
                       delta=Fraction(1) if dhat.rational else 1.0)
    return apply_surgery(dhat, plan, check=check)
