import logging
from dataclasses import dataclass, field

import numpy as np

import dual
from errors import NoConvergence, SegmentNoConvergence
from invariants import Coord, makhlin_of_coords, makhlin_residual, relate_locally
from matcore import can_gate, rv_gate
from synth.optimize import LmOptions, lm_minimize


RESTART_BOX = 2 * np.pi


@dataclass
class SegmentSolution:
    index: int
    v1: np.ndarray
    v2: np.ndarray
    residual: float
    exterior_left: tuple[np.ndarray, np.ndarray] = field(repr=False)
    exterior_right: tuple[np.ndarray, np.ndarray] = field(repr=False)
    exterior_phase: float = 0.0
    restarts_used: int = 0
    iterations: int = 0

    def interior(self) -> np.ndarray:
        return dual.kron(rv_gate(self.v1), rv_gate(self.v2))


def local_layer(x):
    # Six angles -> R(v1) (x) R(v2); dual-aware.
    return dual.kron(rv_gate(x[0:3]), rv_gate(x[3:6]))


def segment_residual(gate: np.ndarray, c_prev: Coord, c_next: Coord):
    # Residual x -> makhlin(G (R(v1) (x) R(v2)) CAN(c_prev)) - makhlin(CAN(c_next)).
    tail = can_gate(c_prev)
    det = complex(np.linalg.det(gate) * np.linalg.det(tail))
    target = makhlin_of_coords(c_next)

    def residual(x):
        return makhlin_residual(gate @ local_layer(x) @ tail, det, target)

    return residual


def solve_segment(
    c_prev: Coord,
    gate: np.ndarray,
    c_next: Coord,
    restarts: int,
    rng: np.random.Generator,
    lm: LmOptions | None = None,
    index: int = 0,
) -> SegmentSolution:
    logger = logging.getLogger(__name__)
    residual = segment_residual(gate, c_prev, c_next)
    best_x, best_r = None, np.inf
    for attempt in range(1, restarts + 1):
        x0 = rng.uniform(-RESTART_BOX, RESTART_BOX, size=6)
        try:
            result = lm_minimize(residual, x0, lm)
        except NoConvergence as exc:
            if exc.best_residual is not None and exc.best_residual < best_r:
                best_x, best_r = exc.best_x, exc.best_residual
            continue
        x = result.x
        interior = local_layer(x)
        s = gate @ interior @ can_gate(c_prev)
        left, right, phase = relate_locally(s, can_gate(c_next))
        logger.debug(
            "segment_solved index=%s attempt=%s residual=%.3e iters=%s",
            index,
            attempt,
            result.residual,
            result.iterations,
        )
        return SegmentSolution(
            index=index,
            v1=x[0:3].copy(),
            v2=x[3:6].copy(),
            residual=result.residual,
            exterior_left=left,
            exterior_right=right,
            exterior_phase=phase,
            restarts_used=attempt,
            iterations=result.iterations,
        )
    logger.warning("segment_failed index=%s restarts=%s best=%.3e", index, restarts, best_r)
    raise SegmentNoConvergence(
        f"segment {index} did not converge in {restarts} restarts",
        segment=index,
        best_x=best_x,
        best_residual=None if not np.isfinite(best_r) else float(best_r),
    )


def monolithic_residual(gate: np.ndarray, depth: int, target: Coord):
    # Residual over 6 (depth - 1) angles for G L G L ... G against a target class.
    if depth < 2:
        raise ValueError("monolithic residual needs depth >= 2")
    det = complex(np.linalg.det(gate) ** depth)
    goal = makhlin_of_coords(target)

    def residual(x):
        u = gate
        for layer in range(depth - 1):
            u = gate @ local_layer(x[6 * layer : 6 * layer + 6]) @ u
        return makhlin_residual(u, det, goal)

    return residual


def convergence_trial(
    gate: np.ndarray,
    depth: int,
    target: Coord,
    restarts: int,
    rng: np.random.Generator,
    lm: LmOptions | None = None,
) -> tuple[bool, int]:
    residual = monolithic_residual(gate, depth, target)
    for attempt in range(1, restarts + 1):
        x0 = rng.uniform(-RESTART_BOX, RESTART_BOX, size=6 * (depth - 1))
        try:
            lm_minimize(residual, x0, lm)
        except NoConvergence:
            continue
        return True, attempt
    return False, restarts
