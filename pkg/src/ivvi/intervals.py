"""Closed-interval arithmetic, the Hausdorff metric, and LU order relations.

Intervals are immutable values with finite endpoints; every operation is a
pure function, so the module is safe for unrestricted concurrent use.
Endpoint arithmetic is plain IEEE double with no outward rounding: callers
that need validated enclosures are out of scope here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence


class LuRelation(Enum):
    """How two intervals (or interval vectors) relate in the LU order.

    ``lu_compare`` and ``lu_vec_compare`` return one of EQUAL, PREC_STRICT,
    SUCC_STRICT or INCOMPARABLE.  PREC_EQ and SUCC_EQ name the non-strict
    relations; membership tests go through :meth:`implies`.
    """

    PREC_EQ = "prec-eq"
    PREC_STRICT = "prec-strict"
    SUCC_EQ = "succ-eq"
    SUCC_STRICT = "succ-strict"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"

    def implies(self, other: "LuRelation") -> bool:
        """True when this relation entails ``other`` (EQUAL implies both non-strict ones)."""
        if self is other:
            return True
        if other is LuRelation.PREC_EQ:
            return self in (LuRelation.EQUAL, LuRelation.PREC_STRICT)
        if other is LuRelation.SUCC_EQ:
            return self in (LuRelation.EQUAL, LuRelation.SUCC_STRICT)
        return False


def _require_finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise OverflowError(f"{what} is not finite: {value!r}")
    return value


@dataclass(frozen=True)
class Interval:
    """Closed real interval ``[lo, hi]`` with finite endpoints, ``lo <= hi``."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo = float(self.lo)
        hi = float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo!r}, {hi!r}]")
        if lo > hi:
            raise ValueError(f"interval requires lo <= hi, got [{lo!r}, {hi!r}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> "Interval":
        """Embed the real ``x`` as the degenerate interval ``[x, x]``."""
        return cls(x, x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, other: "Interval") -> "Interval":
        return interval_add(self, other)

    def __sub__(self, other: "Interval") -> "Interval":
        return interval_sub(self, other)

    def __neg__(self) -> "Interval":
        return interval_neg(self)

    def __mul__(self, other: "Interval") -> "Interval":
        return interval_mul(self, other)

    def __rmul__(self, alpha: float) -> "Interval":
        return interval_scale(alpha, self)

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


@dataclass(frozen=True)
class IntervalVector:
    """Ordered tuple of intervals, one per objective component."""

    components: tuple

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise ValueError("interval vector needs at least one component")
        for c in comps:
            if not isinstance(c, Interval):
                raise TypeError(f"interval vector component is not an Interval: {c!r}")
        object.__setattr__(self, "components", comps)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.components)

    def __getitem__(self, i: int) -> Interval:
        return self.components[i]

    def __repr__(self) -> str:
        return "(" + ", ".join(repr(c) for c in self.components) + ")"


def interval_add(x: Interval, y: Interval) -> Interval:
    """Minkowski sum ``[x.lo + y.lo, x.hi + y.hi]``."""
    return Interval(_require_finite(x.lo + y.lo, "sum endpoint"),
                    _require_finite(x.hi + y.hi, "sum endpoint"))


def interval_neg(x: Interval) -> Interval:
    """Pointwise negation ``[-x.hi, -x.lo]``."""
    return Interval(-x.hi, -x.lo)


def interval_sub(x: Interval, y: Interval) -> Interval:
    """Minkowski difference ``x + (-y) = [x.lo - y.hi, x.hi - y.lo]``."""
    return interval_add(x, interval_neg(y))


def interval_scale(alpha: float, x: Interval) -> Interval:
    """Scalar multiple ``{alpha * t : t in x}``."""
    alpha = _require_finite(alpha, "scale factor")
    if alpha >= 0:
        return Interval(alpha * x.lo, alpha * x.hi)
    return Interval(alpha * x.hi, alpha * x.lo)


def interval_mul(x: Interval, y: Interval) -> Interval:
    """Product hull ``[min Q, max Q]`` over the four corner products."""
    q = (x.lo * y.lo, x.lo * y.hi, x.hi * y.lo, x.hi * y.hi)
    return Interval(_require_finite(min(q), "product endpoint"),
                    _require_finite(max(q), "product endpoint"))


def hausdorff(x: Interval, y: Interval) -> float:
    """Hausdorff distance ``max(|x.lo - y.lo|, |x.hi - y.hi|)``."""
    return max(abs(x.lo - y.lo), abs(x.hi - y.hi))


def lu_compare(x: Interval, y: Interval) -> LuRelation:
    """Classify the ordered pair (x, y) in the LU order.

    Comparisons are exact; callers that need fuzzy ties must quantize
    upstream, otherwise the relation would not partition pairs.
    """
    if x.lo == y.lo and x.hi == y.hi:
        return LuRelation.EQUAL
    if x.lo <= y.lo and x.hi <= y.hi:
        return LuRelation.PREC_STRICT
    if x.lo >= y.lo and x.hi >= y.hi:
        return LuRelation.SUCC_STRICT
    return LuRelation.INCOMPARABLE


def lu_vec_compare(x: IntervalVector, y: IntervalVector) -> LuRelation:
    """Componentwise LU comparison of interval vectors.

    The vectors relate only when every component pair is comparable in the
    same direction; a strict relation needs at least one strict component.
    """
    if len(x) != len(y):
        raise ValueError(f"interval vectors have different lengths: {len(x)} vs {len(y)}")
    rels = [lu_compare(a, b) for a, b in zip(x, y)]
    if all(r is LuRelation.EQUAL for r in rels):
        return LuRelation.EQUAL
    if all(r.implies(LuRelation.PREC_EQ) for r in rels):
        return LuRelation.PREC_STRICT
    if all(r.implies(LuRelation.SUCC_EQ) for r in rels):
        return LuRelation.SUCC_STRICT
    return LuRelation.INCOMPARABLE
