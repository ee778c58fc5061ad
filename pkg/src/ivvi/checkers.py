"""Solution-concept checkers for interval-valued vector optimization.

Six grid-relative solution concepts for a candidate point w:

* ``eff`` / ``weak-eff``: no grid point LU-dominates w (strictly in every
  objective for the weak variant's negation).
* ``minty`` / ``weak-minty``: no roaming grid point v and selection from the
  convexificators *at v* make every inner product <g, v - w> non-positive
  with one negative (strictly negative throughout for the weak variant).
* ``stampacchia`` / ``weak-stampacchia``: some selection from the
  convexificators *at w* defeats every roaming grid point, i.e. the chosen
  gradients admit no blocking system of the corresponding kind.

Verdicts are deterministic: roaming points scan in canonical grid order and
selection tuples enumerate in sorted gradient order, so the first witness is
reproducible.  All checkers are pure functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .convexificators import TOL_ALG, build_convexificator
from .expressions import SelectionCapError, eval_many
from .intervals import Interval, IntervalVector, LuRelation, lu_vec_compare
from .problems import (BoxDomain, GridSpec, IvopProblem, OutOfDomainError,
                       evaluate_objectives, grid_points)

CHECKER_IDS = ("eff", "weak-eff", "minty", "stampacchia", "weak-minty", "weak-stampacchia")

_TUPLE_CAP = 4096


@dataclass(frozen=True)
class CheckWitness:
    """Roaming point (and selections, for inequality checkers) disproving a verdict."""

    point: tuple
    selections: Optional[tuple]
    detail: str


@dataclass(frozen=True)
class CheckVerdict:
    holds: bool
    witness: Optional[CheckWitness]

    def __post_init__(self) -> None:
        if self.holds == (self.witness is not None):
            raise ValueError("witness must be present exactly when the verdict fails")


def pareto_filter(vectors: Sequence[Sequence[float]]) -> set:
    """Indices of non-dominated vectors under componentwise <= with one strict."""
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("need a nonempty list of equal-length vectors")
    leq = (arr[:, None, :] <= arr[None, :, :]).all(axis=2)
    strict = (arr[:, None, :] < arr[None, :, :]).any(axis=2)
    dominated = (leq & strict).any(axis=0)
    return {int(i) for i in np.nonzero(~dominated)[0]}


@dataclass
class EvaluatedGrid:
    """Grid points with objective values and per-point gradient selections.

    Endpoint functions are indexed j = 2*i + e over objectives i with
    e = 0 (lower) and e = 1 (upper).  Padded gradient arrays repeat each
    point's first selection so branch-axis min/max are unaffected.
    """

    problem: IvopProblem
    spec: GridSpec
    points: np.ndarray          # (m, n)
    lower: np.ndarray           # (m, p)
    upper: np.ndarray           # (m, p)
    grad_sets: list             # 2p lists of per-point gradient tuples
    padded: list                # 2p arrays (m, B_j, n)
    tie_tol: float

    @classmethod
    def prepare(cls, problem: IvopProblem, spec: Optional[GridSpec] = None,
                tie_tol: float = 1e-9) -> "EvaluatedGrid":
        spec = spec or problem.grid
        pts = grid_points(problem.domain, spec)
        m = pts.shape[0]
        p = problem.num_objectives
        lower = np.empty((m, p))
        upper = np.empty((m, p))
        grad_sets = []
        padded = []
        for i, obj in enumerate(problem.objectives):
            lower[:, i] = eval_many(obj.lower, pts)
            upper[:, i] = eval_many(obj.upper, pts)
            for f in (obj.lower, obj.upper):
                sets = [build_convexificator(f, pts[k], tie_tol).vectors for k in range(m)]
                width = max(len(s) for s in sets)
                arr = np.empty((m, width, pts.shape[1]))
                for k, s in enumerate(sets):
                    block = np.array(s, dtype=float)
                    arr[k, : len(s)] = block
                    arr[k, len(s):] = block[0]
                grad_sets.append(sets)
                padded.append(arr)
        return cls(problem, spec, pts, lower, upper, grad_sets, padded, tie_tol)

    def endpoint_functions(self):
        for obj in self.problem.objectives:
            yield obj.lower
            yield obj.upper

    def candidate_sets(self, omega: np.ndarray) -> list:
        """Gradient selection sets of all endpoint functions at the candidate point."""
        match = np.nonzero((self.points == omega).all(axis=1))[0]
        if match.size:
            k = int(match[0])
            return [sets[k] for sets in self.grad_sets]
        return [build_convexificator(f, omega, self.tie_tol).vectors
                for f in self.endpoint_functions()]


def _require_in_domain(problem: IvopProblem, point) -> np.ndarray:
    x = np.asarray(point, dtype=float)
    if not problem.domain.contains(x):
        raise OutOfDomainError(f"candidate point {tuple(x.tolist())} lies outside the domain")
    return x


def _prepared(problem, spec, prepared, tie_tol) -> EvaluatedGrid:
    if prepared is not None:
        return prepared
    return EvaluatedGrid.prepare(problem, spec, tie_tol)


# ---------------------------------------------------------------------------
# Efficiency
# ---------------------------------------------------------------------------

def is_lu_efficient(point, problem: IvopProblem, spec: Optional[GridSpec] = None,
                    prepared: Optional[EvaluatedGrid] = None) -> CheckVerdict:
    """No grid point's objective vector strictly LU-precedes the candidate's."""
    omega = _require_in_domain(problem, point)
    eg = _prepared(problem, spec, prepared, 1e-9)
    target = evaluate_objectives(problem, omega)
    for k in range(eg.points.shape[0]):
        other = IntervalVector(tuple(
            Interval(eg.lower[k, i], eg.upper[k, i]) for i in range(eg.lower.shape[1])))
        if lu_vec_compare(other, target) is LuRelation.PREC_STRICT:
            return CheckVerdict(False, CheckWitness(
                tuple(eg.points[k]), None, "grid point LU-dominates the candidate"))
    return CheckVerdict(True, None)


def is_weak_lu_efficient(point, problem: IvopProblem, spec: Optional[GridSpec] = None,
                         prepared: Optional[EvaluatedGrid] = None) -> CheckVerdict:
    """No grid point strictly LU-precedes the candidate in every objective."""
    omega = _require_in_domain(problem, point)
    eg = _prepared(problem, spec, prepared, 1e-9)
    target = evaluate_objectives(problem, omega)
    p = eg.lower.shape[1]
    for k in range(eg.points.shape[0]):
        if all(
            lu_vec_compare(
                IntervalVector((Interval(eg.lower[k, i], eg.upper[k, i]),)),
                IntervalVector((target[i],)),
            ) is LuRelation.PREC_STRICT
            for i in range(p)
        ):
            return CheckVerdict(False, CheckWitness(
                tuple(eg.points[k]), None,
                "grid point strictly LU-dominates the candidate in every objective"))
    return CheckVerdict(True, None)


def _dominance_masks(eg: EvaluatedGrid):
    """(dominates, weak_dominates) boolean matrices indexed [roamer, candidate]."""
    low, up = eg.lower, eg.upper
    leq = (low[:, None, :] <= low[None, :, :]) & (up[:, None, :] <= up[None, :, :])
    lt = (low[:, None, :] < low[None, :, :]) | (up[:, None, :] < up[None, :, :])
    strict = leq & lt
    dominates = leq.all(axis=2) & strict.any(axis=2)
    weak_dominates = strict.all(axis=2)
    return dominates, weak_dominates


# ---------------------------------------------------------------------------
# Variational inequality checkers
# ---------------------------------------------------------------------------

def _roaming_min_products(eg: EvaluatedGrid, omega: np.ndarray) -> np.ndarray:
    """Per-roamer, per-endpoint-function minimum of <g, v - w> over selections at v."""
    s = eg.points - omega
    cols = [np.einsum("mbn,mn->mb", padded, s).min(axis=1) for padded in eg.padded]
    return np.stack(cols, axis=1)  # (m, 2p)


def _not_candidate(eg: EvaluatedGrid, omega: np.ndarray) -> np.ndarray:
    return ~(eg.points == omega).all(axis=1)


def _minty_blocked(eg: EvaluatedGrid, omega: np.ndarray, tol: float, strict: bool) -> np.ndarray:
    m = _roaming_min_products(eg, omega)
    roam = _not_candidate(eg, omega)
    if strict:
        return (m < -tol).all(axis=1) & roam
    return (m <= tol).all(axis=1) & (m < -tol).any(axis=1) & roam


def _minty_witness(eg: EvaluatedGrid, omega: np.ndarray, k: int) -> CheckWitness:
    v = eg.points[k]
    s = v - omega
    chosen = []
    for sets in eg.grad_sets:
        grads = sets[k]
        products = [float(np.dot(g, s)) for g in grads]
        chosen.append(grads[int(np.argmin(products))])
    return CheckWitness(tuple(v), tuple(chosen),
                        "blocking selection at the roaming point")


def solves_imvvlip(point, problem: IvopProblem, spec: Optional[GridSpec] = None,
                   tol: float = TOL_ALG, prepared: Optional[EvaluatedGrid] = None) -> CheckVerdict:
    """Minty-type inequality: selections anchored at the roaming point.

    Holds when no grid point v != w and selection make every inner product
    <g, v - w> non-positive with at least one strictly negative.
    """
    omega = _require_in_domain(problem, point)
    eg = _prepared(problem, spec, prepared, 1e-9)
    blocked = _minty_blocked(eg, omega, tol, strict=False)
    if not blocked.any():
        return CheckVerdict(True, None)
    return CheckVerdict(False, _minty_witness(eg, omega, int(np.argmax(blocked))))


def solves_iwmvvlip(point, problem: IvopProblem, spec: Optional[GridSpec] = None,
                    tol: float = TOL_ALG, prepared: Optional[EvaluatedGrid] = None) -> CheckVerdict:
    """Weak Minty-type inequality: the all-strictly-negative system cannot hold."""
    omega = _require_in_domain(problem, point)
    eg = _prepared(problem, spec, prepared, 1e-9)
    blocked = _minty_blocked(eg, omega, tol, strict=True)
    if not blocked.any():
        return CheckVerdict(True, None)
    return CheckVerdict(False, _minty_witness(eg, omega, int(np.argmax(blocked))))


def _candidate_tuples(eg: EvaluatedGrid, omega: np.ndarray):
    sets = eg.candidate_sets(omega)
    total = 1
    for s in sets:
        total *= len(s)
    if total > _TUPLE_CAP:
        raise SelectionCapError(
            f"candidate point admits {total} selection tuples (cap {_TUPLE_CAP})")
    return list(itertools.product(*sets))


def _stampacchia_verdict(eg: EvaluatedGrid, omega: np.ndarray, tol: float,
                         strict: bool) -> CheckVerdict:
    s = eg.points - omega
    roam = _not_candidate(eg, omega)
    tuples = _candidate_tuples(eg, omega)
    first_block = None
    for selection in tuples:
        products = np.stack([s @ np.asarray(g) for g in selection], axis=1)  # (m, 2p)
        if strict:
            blocked = (products < -tol).all(axis=1) & roam
        else:
            blocked = (products <= tol).all(axis=1) & (products < -tol).any(axis=1) & roam
        if not blocked.any():
            return CheckVerdict(True, None)
        if first_block is None:
            first_block = (selection, int(np.argmax(blocked)))
    selection, k = first_block
    return CheckVerdict(False, CheckWitness(
        tuple(eg.points[k]), tuple(selection),
        "every candidate selection admits a blocking roaming point"))


def solves_isvvlip(point, problem: IvopProblem, spec: Optional[GridSpec] = None,
                   tol: float = TOL_ALG, prepared: Optional[EvaluatedGrid] = None) -> CheckVerdict:
    """Stampacchia-type inequality: some selection anchored at the candidate
    defeats every roaming grid point (no non-positive, not-all-zero system)."""
    omega = _require_in_domain(problem, point)
    eg = _prepared(problem, spec, prepared, 1e-9)
    return _stampacchia_verdict(eg, omega, tol, strict=False)


def solves_iwsvvlip(point, problem: IvopProblem, spec: Optional[GridSpec] = None,
                    tol: float = TOL_ALG, prepared: Optional[EvaluatedGrid] = None) -> CheckVerdict:
    """Weak Stampacchia-type inequality: some candidate selection rules out
    the all-strictly-negative system at every roaming grid point."""
    omega = _require_in_domain(problem, point)
    eg = _prepared(problem, spec, prepared, 1e-9)
    return _stampacchia_verdict(eg, omega, tol, strict=True)


# ---------------------------------------------------------------------------
# Solution sets
# ---------------------------------------------------------------------------

def solution_mask(problem: IvopProblem, checker_id: str, spec: Optional[GridSpec] = None,
                  tol: float = TOL_ALG, prepared: Optional[EvaluatedGrid] = None) -> np.ndarray:
    """Boolean verdict per grid point, in canonical grid order."""
    if checker_id not in CHECKER_IDS:
        raise ValueError(f"unknown checker id {checker_id!r}; expected one of {CHECKER_IDS}")
    eg = _prepared(problem, spec, prepared, 1e-9)
    m = eg.points.shape[0]
    if checker_id in ("eff", "weak-eff"):
        dominates, weak_dominates = _dominance_masks(eg)
        matrix = dominates if checker_id == "eff" else weak_dominates
        return ~matrix.any(axis=0)
    mask = np.empty(m, dtype=bool)
    for k in range(m):
        omega = eg.points[k]
        if checker_id == "minty":
            mask[k] = not _minty_blocked(eg, omega, tol, strict=False).any()
        elif checker_id == "weak-minty":
            mask[k] = not _minty_blocked(eg, omega, tol, strict=True).any()
        elif checker_id == "stampacchia":
            mask[k] = _stampacchia_verdict(eg, omega, tol, strict=False).holds
        else:
            mask[k] = _stampacchia_verdict(eg, omega, tol, strict=True).holds
    return mask


def solution_set(problem: IvopProblem, checker_id: str, spec: Optional[GridSpec] = None,
                 tol: float = TOL_ALG, prepared: Optional[EvaluatedGrid] = None) -> np.ndarray:
    """Grid points whose verdict holds, in canonical grid order (shape (k, n))."""
    eg = _prepared(problem, spec, prepared, 1e-9)
    mask = solution_mask(problem, checker_id, spec, tol, prepared=eg)
    return eg.points[mask]
