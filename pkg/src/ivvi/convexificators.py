"""Nonsmooth calculus: Dini derivatives, convexificators, convexity, monotonicity.

A convexificator here is a finite set of vectors anchored at a point whose
support values bound the one-sided Dini derivatives from above and below in
every direction.  For the piecewise-smooth expression language the candidate
set is the active-branch gradient set, which this module can validate
directionally and use for gradient-inequality convexity and monotonicity
checks over a grid.

All functions are pure; grid checks scan pairs in canonical row-major order
so reported witnesses are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .expressions import Expr, active_branches, eval_many, evaluate, gradient_many
from .problems import BoxDomain, GridSpec, IntervalFunction, grid_points

TOL_ALG = 1e-9
TOL_DINI = 1e-6

# Geometric step schedule for Dini difference quotients.  Steps below ~2e-9
# are excluded: float64 rounding of f(x + lam*d) - f(x) would exceed the
# 1e-6 accuracy the estimates must deliver.
_DINI_STEPS = 1e-2 * 2.0 ** -np.arange(0, 23)
_DINI_TAIL = 15


@dataclass(frozen=True)
class DiniEstimate:
    """Lower/upper Dini derivative estimates from the tail of the step schedule."""

    lower: float
    upper: float
    steps_used: int


@dataclass(frozen=True)
class Convexificator:
    """Finite set of candidate generalized-gradient vectors anchored at a point."""

    vectors: tuple
    anchor: tuple

    def __post_init__(self) -> None:
        if not self.vectors:
            raise ValueError("convexificator must be nonempty")
        n = len(self.anchor)
        for v in self.vectors:
            if len(v) != n:
                raise ValueError("convexificator vector dimension mismatch")
            if not all(np.isfinite(v)):
                raise ValueError("convexificator vectors must be finite")

    def support_bounds(self, direction) -> tuple:
        """(min, max) of <v, direction> over the vector set."""
        d = np.asarray(direction, dtype=float)
        values = [float(np.dot(v, d)) for v in self.vectors]
        return min(values), max(values)


def dini(f: Expr, point, direction) -> DiniEstimate:
    """Estimate the lower/upper Dini derivatives of ``f`` at ``point`` along ``direction``.

    Difference quotients are taken over a geometric step schedule shrinking
    to zero from above; the estimate is the min/max over the schedule tail.
    """
    x = np.asarray(point, dtype=float)
    d = np.asarray(direction, dtype=float)
    if not np.any(d != 0.0):
        raise ValueError("direction must be nonzero")
    base = evaluate(f, x)
    pts = x[None, :] + _DINI_STEPS[:, None] * d[None, :]
    quotients = (eval_many(f, pts) - base) / _DINI_STEPS
    tail = quotients[_DINI_TAIL:]
    return DiniEstimate(float(tail.min()), float(tail.max()), tail.size)


def build_convexificator(f: Expr, point, tie_tol: float = 1e-9) -> Convexificator:
    """Candidate convexificator: the active-branch gradient set at ``point``."""
    x = np.asarray(point, dtype=float)
    branches = active_branches(f, x, tie_tol)
    return Convexificator(branches.gradients, tuple(float(v) for v in x))


@dataclass(frozen=True)
class DirectionFailure:
    direction: tuple
    kind: str  # "upper" or "lower"
    dini_value: float
    support: float


@dataclass(frozen=True)
class ValidationReport:
    """Directional check of the upper/lower convexificator inequalities."""

    upper_ok: bool
    lower_ok: bool
    failures: tuple


def validate_convexificator(candidate: Convexificator, f: Expr, directions,
                            tol: float = TOL_DINI) -> ValidationReport:
    """Check both convexificator inequalities over the given directions.

    upper: lower Dini derivative <= max support value + tol
    lower: upper Dini derivative >= min support value - tol
    """
    dirs = np.asarray(directions, dtype=float)
    if dirs.ndim == 1:
        dirs = dirs[None, :]
    if dirs.shape[0] == 0:
        raise ValueError("need at least one direction")
    x = np.asarray(candidate.anchor, dtype=float)
    base = evaluate(f, x)
    k = _DINI_STEPS.size
    pts = (x[None, None, :] + _DINI_STEPS[None, :, None] * dirs[:, None, :]).reshape(-1, x.size)
    quotients = (eval_many(f, pts).reshape(dirs.shape[0], k) - base) / _DINI_STEPS[None, :]
    tail = quotients[:, _DINI_TAIL:]
    lo_dini = tail.min(axis=1)
    hi_dini = tail.max(axis=1)

    vectors = np.array(candidate.vectors, dtype=float)
    support = vectors @ dirs.T  # (num_vectors, num_dirs)
    sup_max = support.max(axis=0)
    sup_min = support.min(axis=0)

    failures = []
    for j in range(dirs.shape[0]):
        if lo_dini[j] > sup_max[j] + tol:
            failures.append(DirectionFailure(tuple(dirs[j]), "upper",
                                             float(lo_dini[j]), float(sup_max[j])))
        if hi_dini[j] < sup_min[j] - tol:
            failures.append(DirectionFailure(tuple(dirs[j]), "lower",
                                             float(hi_dini[j]), float(sup_min[j])))
    upper_ok = not any(fl.kind == "upper" for fl in failures)
    lower_ok = not any(fl.kind == "lower" for fl in failures)
    return ValidationReport(upper_ok, lower_ok, tuple(failures))


# ---------------------------------------------------------------------------
# Convexity and monotonicity over a grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairWitness:
    """First grid pair violating a gradient inequality."""

    endpoint: str  # "lower" or "upper"
    anchor: tuple
    other: tuple
    gradient: tuple
    gap: float


@dataclass(frozen=True)
class GridCheckReport:
    holds: bool
    witness: Optional[PairWitness]


def _point_gradients(f: Expr, pts: np.ndarray, tie_tol: float):
    """Per-point gradient selections, padded to a rectangular (m, B, n) array."""
    sets = [active_branches(f, pts[k], tie_tol).gradients for k in range(pts.shape[0])]
    width = max(len(s) for s in sets)
    m, n = pts.shape
    padded = np.empty((m, width, n))
    counts = np.empty(m, dtype=int)
    for k, s in enumerate(sets):
        counts[k] = len(s)
        arr = np.array(s, dtype=float)
        padded[k, : len(s)] = arr
        padded[k, len(s):] = arr[0]  # padding duplicates never change min/max
    return padded, counts, sets


def _check_convex(f: Expr, pts: np.ndarray, tol: float, strict: bool,
                  endpoint: str, tie_tol: float) -> Optional[PairWitness]:
    values = eval_many(f, pts)
    m = pts.shape[0]
    for a in range(m):
        grads = active_branches(f, pts[a], tie_tol).gradients
        s = pts - pts[a]
        delta = values - values[a]
        for g in grads:
            rhs = s @ np.asarray(g)
            if strict:
                bad = delta <= rhs + tol
                bad[a] = False
            else:
                bad = delta < rhs - tol
            if np.any(bad):
                k = int(np.argmax(bad))
                return PairWitness(endpoint, tuple(pts[a]), tuple(pts[k]),
                                   tuple(g), float(delta[k] - rhs[k]))
    return None


def is_lu_convex(fn: IntervalFunction, domain: BoxDomain, spec: GridSpec,
                 tol: float = TOL_ALG, tie_tol: float = 1e-9) -> GridCheckReport:
    """Gradient inequality f(v) - f(w) >= <g, v - w> for both endpoint functions on the grid."""
    pts = grid_points(domain, spec)
    for endpoint, f in (("lower", fn.lower), ("upper", fn.upper)):
        witness = _check_convex(f, pts, tol, strict=False, endpoint=endpoint, tie_tol=tie_tol)
        if witness is not None:
            return GridCheckReport(False, witness)
    return GridCheckReport(True, None)


def is_strictly_lu_convex(fn: IntervalFunction, domain: BoxDomain, spec: GridSpec,
                          tol: float = TOL_ALG, tie_tol: float = 1e-9) -> GridCheckReport:
    """Strict variant: f(v) - f(w) > <g, v - w> + tol for every distinct grid pair."""
    pts = grid_points(domain, spec)
    for endpoint, f in (("lower", fn.lower), ("upper", fn.upper)):
        witness = _check_convex(f, pts, tol, strict=True, endpoint=endpoint, tie_tol=tie_tol)
        if witness is not None:
            return GridCheckReport(False, witness)
    return GridCheckReport(True, None)


def _check_monotone(f: Expr, pts: np.ndarray, tol: float, strict: bool,
                    endpoint: str, tie_tol: float) -> Optional[PairWitness]:
    padded, _, sets = _point_gradients(f, pts, tie_tol)
    m = pts.shape[0]
    for a in range(m):
        s = pts - pts[a]  # (m, n)
        prod_far = np.einsum("mbn,mn->mb", padded, s).min(axis=1)
        prod_anchor = (np.array(sets[a], dtype=float) @ s.T).max(axis=0)
        gap = prod_far - prod_anchor
        if strict:
            bad = gap <= tol
            bad[a] = False
        else:
            bad = gap < -tol
        if np.any(bad):
            k = int(np.argmax(bad))
            return PairWitness(endpoint, tuple(pts[a]), tuple(pts[k]),
                               tuple(sets[a][0]), float(gap[k]))
    return None


def is_monotone(fn: IntervalFunction, domain: BoxDomain, spec: GridSpec,
                tol: float = TOL_ALG, strict: bool = False,
                tie_tol: float = 1e-9) -> GridCheckReport:
    """Monotonicity of the candidate gradient map: <g_v - g_w, v - w> >= 0 on grid pairs.

    Checked for both endpoint functions over all selections; the strict
    variant requires > tol for distinct points.
    """
    pts = grid_points(domain, spec)
    for endpoint, f in (("lower", fn.lower), ("upper", fn.upper)):
        witness = _check_monotone(f, pts, tol, strict, endpoint, tie_tol)
        if witness is not None:
            return GridCheckReport(False, witness)
    return GridCheckReport(True, None)


# ---------------------------------------------------------------------------
# Mean value theorem witness search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MvtWitness:
    """Interior point whose convexificator hull contains the secant value."""

    c: tuple
    containment_gap: float


def _support_bounds(f: Expr, point: np.ndarray, direction: np.ndarray, tie_tol: float):
    grads = active_branches(f, point, tie_tol).gradients
    values = [float(np.dot(g, direction)) for g in grads]
    return min(values), max(values)


def mvt_witness(f: Expr, a, b, samples: int = 10_000, tol: float = TOL_ALG,
                tie_tol: float = 1e-9) -> Optional[MvtWitness]:
    """Search the open segment (a, b) for a mean-value point.

    A sample c qualifies when the secant value f(b) - f(a) lies in the
    interval [min, max] of <g, b - a> over the convexificator at c (the
    convex hull of finitely many reals is exactly that interval).  When no
    sample contains the value directly, a sign change of the support
    interval relative to the secant between consecutive samples is refined
    by bisection: for the piecewise-smooth language the crossing point
    carries a hull containing the value, so a bracket narrowed below 1e-12
    of the parameter range certifies containment (gap 0).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or not np.any(a != b):
        raise ValueError("segment endpoints must be distinct points of equal dimension")
    if samples < 1:
        raise ValueError("samples must be positive")
    direction = b - a
    delta = evaluate(f, b) - evaluate(f, a)

    ts = np.concatenate(([1e-12], np.arange(1, samples + 1) / (samples + 1), [1.0 - 1e-12]))
    cs = a[None, :] + ts[:, None] * direction[None, :]
    _, grads, tied = gradient_many(f, cs, tie_tol)
    dots = grads @ direction
    lows = dots.copy()
    highs = dots.copy()
    for k in np.nonzero(tied)[0]:
        lows[k], highs[k] = _support_bounds(f, cs[k], direction, tie_tol)

    gaps = np.maximum(np.maximum(lows - delta, delta - highs), 0.0)
    hit = gaps <= tol
    if np.any(hit):
        k = int(np.argmax(hit))
        return MvtWitness(tuple(cs[k]), float(gaps[k]))

    above = lows - delta > 0.0
    below = delta - highs > 0.0
    for k in range(ts.size - 1):
        if above[k] and below[k + 1]:
            bracket = (ts[k], ts[k + 1])
        elif below[k] and above[k + 1]:
            bracket = (ts[k + 1], ts[k])
        else:
            continue
        return _refine_bracket(f, a, direction, delta, bracket, tol, tie_tol)
    return None


def _refine_bracket(f: Expr, a: np.ndarray, direction: np.ndarray, delta: float,
                    bracket, tol: float, tie_tol: float) -> MvtWitness:
    t_above, t_below = bracket
    for _ in range(64):
        mid = 0.5 * (t_above + t_below)
        c = a + mid * direction
        low, high = _support_bounds(f, c, direction, tie_tol)
        gap = max(low - delta, delta - high, 0.0)
        if gap <= tol:
            return MvtWitness(tuple(c), float(gap))
        if low - delta > 0.0:
            t_above = mid
        else:
            t_below = mid
        if abs(t_above - t_below) <= 1e-12:
            break
    # Bracket narrowed to a kink: the support intervals on its two sides
    # straddle the secant value, so the crossing point's hull contains it.
    mid = 0.5 * (t_above + t_below)
    return MvtWitness(tuple(a + mid * direction), 0.0)
