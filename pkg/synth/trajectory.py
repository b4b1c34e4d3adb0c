"""Cartan trajectories: chamber points C0..Cn linking identity to a target.

Segment i joins C_{i-1} to C_i through gate G_i. The first two gates are
treated as one block (alpha = G1, beta = G2, delta = C2), so the free
variables of an n-gate sentence are C2..C_{n-1}.
"""

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from invariants import Coord, LogSpec, gamma_spectrum, logspec_to_coords, weyl_canonicalize
from lp import LpOutcome, LpProblem, feasible_point, solve
from matcore import TOL
from monodromy import SegmentConstraints, generate_qlr_rows, instantiate_segment, segment_slack
from synth.gates import GateDef


ZERO_SPEC: LogSpec = (0.0, 0.0, 0.0, 0.0)
_APEX_CAP = 1.0


@dataclass
class Trajectory:
    points: list[Coord]
    reflected: bool
    lp_ms: float = 0.0
    margin: float | None = None
    rows: int = 0

    @property
    def length(self) -> int:
        return len(self.points) - 1


@dataclass
class TrajectoryLp:
    problem: LpProblem
    qlr_rows: int
    chamber_rows: int
    blocks: list[SegmentConstraints] = field(default_factory=list, repr=False)


def _blocks(specs: list[LogSpec], final, n_free: int, mirror_final: bool = False) -> list[SegmentConstraints]:
    # final: fixed target spectrum, or the free index carrying C_n.
    n = len(specs)
    if n == 1:
        return [instantiate_segment(ZERO_SPEC, specs[0], final, n_free)]

    def point(j: int):
        # C_j for j >= 2.
        return final if j == n else j - 2

    def segment(before, gate: LogSpec, after) -> SegmentConstraints:
        if not isinstance(after, int):
            return instantiate_segment(before, gate, after, n_free, chamber_slots=())
        if mirror_final and after == final:
            return instantiate_segment(before, gate, after, n_free, chamber_slots=(), mirror_slots=(after,))
        return instantiate_segment(before, gate, after, n_free, chamber_slots=(after,))

    blocks = [segment(specs[0], specs[1], point(2))]
    for i in range(3, n + 1):
        blocks.append(segment(point(i - 1), specs[i - 1], point(i)))
    return blocks


def _stack(blocks: list[SegmentConstraints], n_free: int, objective=None) -> TrajectoryLp:
    a = np.vstack([blk.a for blk in blocks]) if blocks else np.zeros((0, 3 * n_free))
    b = np.concatenate([blk.b for blk in blocks]) if blocks else np.zeros(0)
    return TrajectoryLp(
        problem=LpProblem(a=a, b=b, objective=objective),
        qlr_rows=sum(blk.qlr_rows for blk in blocks),
        chamber_rows=sum(blk.chamber_rows for blk in blocks),
        blocks=blocks,
    )


def build_trajectory_lp(gates: list[GateDef], target: LogSpec) -> TrajectoryLp:
    # Feasibility LP over C2..C_{n-1} (zero variables for n <= 2).
    if not gates:
        raise ValueError("empty sentence has no trajectory LP")
    n = len(gates)
    n_free = max(n - 2, 0)
    return _stack(_blocks([g.logspec for g in gates], tuple(target), n_free), n_free)


def _points(gates: list[GateDef], x: np.ndarray, target: LogSpec) -> list[Coord]:
    n = len(gates)
    points: list[Coord] = [(0.0, 0.0, 0.0)]
    if n >= 2:
        points.append(logspec_to_coords(gates[0].logspec))
    for j in range(n - 2):
        points.append(tuple(float(v) for v in x[3 * j : 3 * j + 3]))
    points.append(logspec_to_coords(target))
    return points


def _direct_slack(gates: list[GateDef], spec: LogSpec) -> float:
    # Zero-variable sentences: the QLR rows are checked as they stand.
    if len(gates) == 1:
        return segment_slack(ZERO_SPEC, gates[0].logspec, spec)
    return segment_slack(gates[0].logspec, gates[1].logspec, spec)


def find_trajectory(
    gates: list[GateDef], target_matrix: np.ndarray, timing: dict[str, float] | None = None
) -> Trajectory | None:
    # Target lift first, then the reflected one. LP time lands in timing["lp_ms"]
    # whether or not a trajectory is found.
    logger = logging.getLogger(__name__)
    label = ",".join(g.id for g in gates)
    elapsed = 0.0
    found: Trajectory | None = None
    for reflected in (False, True):
        spec = gamma_spectrum(target_matrix, reflected=reflected)
        start = time.perf_counter()
        if len(gates) <= 2:
            slack = _direct_slack(gates, spec)
            elapsed += (time.perf_counter() - start) * 1000.0
            logger.debug("trajectory_direct ids=%s reflected=%s slack=%.3e", label, reflected, slack)
            if slack < -TOL["lp_feasible"]:
                continue
            found = Trajectory(
                points=_points(gates, np.zeros(0), spec),
                reflected=reflected,
                margin=slack,
                rows=len(generate_qlr_rows()),
            )
            break
        built = build_trajectory_lp(gates, spec)
        outcome: LpOutcome = feasible_point(built.problem)
        elapsed += (time.perf_counter() - start) * 1000.0
        logger.debug(
            "trajectory_lp ids=%s reflected=%s status=%s rows=%s",
            label,
            reflected,
            outcome.status,
            built.problem.n_rows,
        )
        if not outcome.feasible:
            continue
        margin = float(outcome.slack.min()) if outcome.slack is not None and outcome.slack.size else None
        found = Trajectory(
            points=_points(gates, outcome.x, spec),
            reflected=reflected,
            margin=margin,
            rows=built.problem.n_rows,
        )
        break
    if timing is not None:
        timing["lp_ms"] = timing.get("lp_ms", 0.0) + elapsed
    if found is None:
        logger.info("sentence_rejected ids=%s lp_ms=%.3f reflected=both", label, elapsed)
        return None
    found.lp_ms = elapsed
    return found


def polytope_apex(gate: GateDef, depth: int) -> Coord:
    # Final point with the largest smallest slack over the rows that touch it.
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if depth == 1:
        return weyl_canonicalize(logspec_to_coords(gate.logspec))
    n_free = depth - 1
    built = _stack(_blocks([gate.logspec] * depth, n_free - 1, n_free), n_free)
    a, b = built.problem.a, built.problem.b
    touches = np.linalg.norm(a[:, -3:], axis=1) > 0
    weights = np.where(touches, np.linalg.norm(a, axis=1), 0.0)
    objective = np.zeros(3 * n_free + 1)
    objective[-1] = -1.0
    bounds = [(None, None)] * (3 * n_free) + [(0.0, _APEX_CAP)]
    outcome = solve(LpProblem(a=np.hstack([a, weights[:, None]]), b=b, objective=objective, var_bounds=bounds))
    if not outcome.feasible:
        raise ValueError(f"depth-{depth} polytope of {gate.id} is empty")
    return weyl_canonicalize(tuple(float(v) for v in outcome.x[-4:-1]))


def polytope_extreme(gate: GateDef, depth: int) -> Coord:
    # Corner maximizing c1 + c2 + c3; the c3 <= 0 half is scored after folding.
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if depth == 1:
        return weyl_canonicalize(logspec_to_coords(gate.logspec))
    n_free = depth - 1
    specs = [gate.logspec] * depth
    best: Coord | None = None
    for mirror, weights in ((False, (1.0, 1.0, 1.0)), (True, (-1.0, 1.0, -1.0))):
        objective = np.zeros(3 * n_free)
        objective[-3:] = [-w for w in weights]
        built = _stack(_blocks(specs, n_free - 1, n_free, mirror_final=mirror), n_free, objective=objective)
        outcome = solve(built.problem)
        if not outcome.feasible:
            continue
        point = weyl_canonicalize(tuple(float(v) for v in outcome.x[-3:]))
        if best is None or sum(point) > sum(best):
            best = point
    if best is None:
        raise ValueError(f"depth-{depth} polytope of {gate.id} is empty")
    return best
