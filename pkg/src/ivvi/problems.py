"""Interval-valued vector optimization problem instances.

A problem bundles p interval-valued objectives (each a lower/upper pair of
piecewise-smooth expressions), an axis-aligned box domain, and a grid
resolution.  Problems load from JSON documents with the exact field names::

    {
      "dimension": 1,
      "domain": {"lo": [-1.0], "hi": [2.0]},
      "objectives": [{"lower": "abs(x1)", "upper": "abs(x1) + 1"}, ...],
      "grid": {"points_per_axis": 49}          # optional
    }

Instances are immutable after load and safe to share between scanners.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .expressions import Expr, eval_many, evaluate, parse, to_text
from .intervals import Interval, IntervalVector

GRID_POINT_CAP = 10_000


class ProblemSchemaError(ValueError):
    """Raised when a problem document does not match the schema."""


class LowerUpperViolation(ValueError):
    """Raised when an objective's lower expression exceeds its upper on the grid."""

    def __init__(self, objective: int, point, lower: float, upper: float):
        self.objective = objective
        self.point = tuple(float(v) for v in point)
        super().__init__(
            f"objective {objective}: lower {lower!r} > upper {upper!r} at point {self.point}")


class OutOfDomainError(ValueError):
    """Raised when a point lies outside the problem's box domain."""


class GridCapError(ValueError):
    """Raised when a grid would exceed GRID_POINT_CAP total points."""


@dataclass(frozen=True)
class IntervalFunction:
    """Interval-valued function given by lower and upper expressions."""

    lower: Expr
    upper: Expr

    def __call__(self, point) -> Interval:
        return Interval(evaluate(self.lower, point), evaluate(self.upper, point))


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box ``{x : lo <= x <= hi}``; convex and compact."""

    lo: tuple
    hi: tuple

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("domain lo/hi must be nonempty and equal length")
        if not all(np.isfinite(lo)) or not all(np.isfinite(hi)):
            raise ValueError("domain bounds must be finite")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"domain requires lo <= hi, got lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dimension(self) -> int:
        return len(self.lo)

    def contains(self, point) -> bool:
        x = np.asarray(point, dtype=float)
        return x.shape == (self.dimension,) and bool(
            np.all(x >= self.lo) and np.all(x <= self.hi))


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice resolution: points per axis, endpoints included."""

    points_per_axis: int = 65

    def __post_init__(self) -> None:
        if not isinstance(self.points_per_axis, int) or self.points_per_axis < 2:
            raise ValueError(f"points_per_axis must be an integer >= 2, got {self.points_per_axis!r}")


def default_grid(dimension: int) -> GridSpec:
    """Default resolution keeping pairwise O(grid^2) checks at desk scale."""
    if dimension == 1:
        return GridSpec(65)
    if dimension == 2:
        return GridSpec(33)
    per_axis = int(GRID_POINT_CAP ** (1.0 / dimension))
    return GridSpec(max(2, per_axis))


@dataclass(frozen=True)
class IvopProblem:
    """An interval-valued vector optimization instance over a box domain."""

    dimension: int
    objectives: tuple
    domain: BoxDomain
    grid: GridSpec = field(default_factory=GridSpec)
    name: str = ""

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not self.objectives:
            raise ValueError("problem needs at least one objective")
        if self.domain.dimension != self.dimension:
            raise ValueError("domain dimension does not match problem dimension")
        object.__setattr__(self, "objectives", tuple(self.objectives))

    @property
    def num_objectives(self) -> int:
        return len(self.objectives)


def grid_points(domain: BoxDomain, spec: GridSpec) -> np.ndarray:
    """Row-major lattice over the box, both endpoints included per axis.

    Deterministic and duplicate-free; raises GridCapError beyond
    GRID_POINT_CAP total points.
    """
    n = domain.dimension
    total = spec.points_per_axis ** n
    if total > GRID_POINT_CAP:
        raise GridCapError(
            f"grid of {spec.points_per_axis}^{n} = {total} points exceeds cap {GRID_POINT_CAP}")
    axes = [np.linspace(domain.lo[k], domain.hi[k], spec.points_per_axis) for k in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def _parse_objective(entry, index: int, dimension: int) -> IntervalFunction:
    if not isinstance(entry, dict):
        raise ProblemSchemaError(f"objectives[{index}] must be an object")
    for key in ("lower", "upper"):
        if key not in entry:
            raise ProblemSchemaError(f"objectives[{index}] is missing field {key!r}")
        if not isinstance(entry[key], str):
            raise ProblemSchemaError(f"objectives[{index}].{key} must be an expression string")
    return IntervalFunction(parse(entry["lower"], dimension), parse(entry["upper"], dimension))


def load_problem(source: Union[str, Path], name: str = "") -> IvopProblem:
    """Load a problem from a JSON document (path, or the document text itself).

    Validates the schema, parses all expressions, and verifies lower <= upper
    for every objective at every grid point (first violation reported).
    """
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
        name = name or source.stem
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        path = Path(source)
        text = path.read_text(encoding="utf-8")
        name = name or path.stem

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ProblemSchemaError(f"problem document is not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ProblemSchemaError("problem document must be a JSON object")

    if "dimension" not in doc:
        raise ProblemSchemaError("missing field 'dimension'")
    dimension = doc["dimension"]
    if not isinstance(dimension, int) or dimension < 1:
        raise ProblemSchemaError(f"'dimension' must be a positive integer, got {dimension!r}")

    if "domain" not in doc or not isinstance(doc["domain"], dict):
        raise ProblemSchemaError("missing object field 'domain'")
    dom = doc["domain"]
    if "lo" not in dom or "hi" not in dom:
        raise ProblemSchemaError("'domain' needs array fields 'lo' and 'hi'")
    lo, hi = dom["lo"], dom["hi"]
    if not isinstance(lo, list) or not isinstance(hi, list) or len(lo) != dimension or len(hi) != dimension:
        raise ProblemSchemaError(f"'domain.lo' and 'domain.hi' must be arrays of length {dimension}")
    domain = BoxDomain(tuple(lo), tuple(hi))

    if "objectives" not in doc or not isinstance(doc["objectives"], list) or not doc["objectives"]:
        raise ProblemSchemaError("missing nonempty array field 'objectives'")
    objectives = tuple(
        _parse_objective(entry, i, dimension) for i, entry in enumerate(doc["objectives"]))

    if "grid" in doc:
        g = doc["grid"]
        if not isinstance(g, dict) or "points_per_axis" not in g or not isinstance(g["points_per_axis"], int):
            raise ProblemSchemaError("'grid' must be an object with integer 'points_per_axis'")
        spec = GridSpec(g["points_per_axis"])
    else:
        spec = default_grid(dimension)

    problem = IvopProblem(dimension, objectives, domain, spec, name=name)
    _check_lower_upper(problem)
    return problem


def _check_lower_upper(problem: IvopProblem) -> None:
    pts = grid_points(problem.domain, problem.grid)
    for i, obj in enumerate(problem.objectives):
        low = eval_many(obj.lower, pts)
        high = eval_many(obj.upper, pts)
        bad = low > high
        if np.any(bad):
            k = int(np.argmax(bad))
            raise LowerUpperViolation(i, pts[k], float(low[k]), float(high[k]))


def serialize_problem(problem: IvopProblem) -> str:
    """Canonical JSON text for a problem; load_problem round-trips it."""
    doc = {
        "dimension": problem.dimension,
        "domain": {"lo": list(problem.domain.lo), "hi": list(problem.domain.hi)},
        "objectives": [
            {"lower": to_text(obj.lower), "upper": to_text(obj.upper)}
            for obj in problem.objectives
        ],
        "grid": {"points_per_axis": problem.grid.points_per_axis},
    }
    return json.dumps(doc, indent=2) + "\n"


def evaluate_objectives(problem: IvopProblem, point) -> IntervalVector:
    """Evaluate all objectives at ``point`` in the domain."""
    x = np.asarray(point, dtype=float)
    if not problem.domain.contains(x):
        raise OutOfDomainError(f"point {tuple(x.tolist())} lies outside the domain")
    return IntervalVector(tuple(obj(x) for obj in problem.objectives))


@dataclass(frozen=True)
class LipschitzEstimate:
    """Grid estimates of Hausdorff-metric and endpoint Lipschitz constants."""

    hausdorff_constant: float
    lower_constant: float
    upper_constant: float


def estimate_lipschitz(fn: IntervalFunction, domain: BoxDomain, spec: GridSpec) -> LipschitzEstimate:
    """Largest grid-pair ratio d_H(G(w), G(v)) / ||w - v||, plus endpoint analogues."""
    pts = grid_points(domain, spec)
    if pts.shape[0] < 2:
        raise ValueError("lipschitz estimation needs at least two grid points")
    low = eval_many(fn.lower, pts)
    high = eval_many(fn.upper, pts)
    best_h = best_l = best_u = 0.0
    for k in range(pts.shape[0] - 1):
        d = np.linalg.norm(pts[k + 1:] - pts[k], axis=1)
        dl = np.abs(low[k + 1:] - low[k]) / d
        du = np.abs(high[k + 1:] - high[k]) / d
        best_l = max(best_l, float(dl.max()))
        best_u = max(best_u, float(du.max()))
        best_h = max(best_h, float(np.maximum(dl, du).max()))
    return LipschitzEstimate(best_h, best_l, best_u)
