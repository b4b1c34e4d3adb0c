import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from config import SynthBudget
from errors import AssemblyMismatch, BudgetExhausted, InputError, SegmentNoConvergence
from invariants import (
    canonical_coords,
    coords_to_logspec,
    makhlin_of_coords,
    makhlin_residual,
    relate_locally,
)
from matcore import TOL, I4, can_gate, is_unitary, kron, phase_distance, rv_gate
from monodromy import segment_slack
from synth.gates import GateDef, Isa
from synth.optimize import LmOptions
from synth.segments import SegmentSolution, solve_segment
from synth.sentences import Sentence, enumerate_sentences
from synth.trajectory import Trajectory, find_trajectory


Layer = tuple[np.ndarray, np.ndarray]


@dataclass
class Decomposition:
    sentence: Sentence
    gates: list[GateDef]
    trajectory: Trajectory | None
    segments: list[SegmentSolution]
    layers: list[Layer]
    global_phase: float
    timing: dict[str, float] = field(default_factory=dict)
    sentences_tried: int = 0

    def matrix(self) -> np.ndarray:
        # layers[0] acts first; gate i sits between layers[i-1] and layers[i].
        u = kron(*self.layers[0])
        for gate, layer in zip(self.gates, self.layers[1:]):
            u = kron(*layer) @ gate.matrix @ u
        return np.exp(1j * self.global_phase) * u


def assemble(
    trajectory: Trajectory,
    gates: list[GateDef],
    segments: list[SegmentSolution],
    target: np.ndarray,
) -> tuple[list[Layer], float]:
    # Chain segment locals into n + 1 layers whose product equals the target.
    logger = logging.getLogger(__name__)
    if len(segments) != len(gates) or trajectory.length != len(gates):
        raise ValueError("segments, gates and trajectory disagree on length")

    middles: list[Layer] = []
    carried: Layer | None = None
    for seg in segments:
        r1, r2 = rv_gate(seg.v1), rv_gate(seg.v2)
        if carried is None:
            middles.append((r1, r2))
        else:
            middles.append((r1 @ carried[0].conj().T, r2 @ carried[1].conj().T))
        carried = seg.exterior_left

    q = I4
    for gate, layer in zip(gates, middles):
        q = gate.matrix @ kron(*layer) @ q
    left, right, phase = relate_locally(target, q)
    layers = [(middles[0][0] @ right[0], middles[0][1] @ right[1])]
    layers.extend(middles[1:])
    layers.append(left)

    draft = Decomposition(
        sentence=Sentence(ids=tuple(g.id for g in gates), cost=Fraction(0)),
        gates=gates,
        trajectory=trajectory,
        segments=segments,
        layers=layers,
        global_phase=phase,
    )
    distance = phase_distance(draft.matrix(), target)
    logger.debug("assembly_check distance=%.3e", distance)
    if distance > TOL["assembly"]:
        raise AssemblyMismatch(f"assembled circuit is {distance:.3e} from the target", distance)
    return layers, phase


def _identity_decomposition(target: np.ndarray) -> Decomposition:
    left, right, phase = relate_locally(target, I4)
    layer = (left[0] @ right[0], left[1] @ right[1])
    return Decomposition(
        sentence=Sentence(ids=(), cost=Fraction(0)),
        gates=[],
        trajectory=Trajectory(points=[(0.0, 0.0, 0.0)], reflected=False),
        segments=[],
        layers=[layer],
        global_phase=phase,
    )


def _solve_segments(
    trajectory: Trajectory,
    gates: list[GateDef],
    budget: SynthBudget,
    seed_seq: np.random.SeedSequence,
    lm: LmOptions,
) -> list[SegmentSolution]:
    # One spawned stream pair per segment keeps results independent of scheduling;
    # only a segment that fails is retried, with the larger restart budget.
    logger = logging.getLogger(__name__)
    points = trajectory.points
    children = seed_seq.spawn(len(gates))
    retry_restarts = budget.scaled(budget.retry_factor).restarts

    def run(i: int) -> SegmentSolution:
        first, second = (np.random.default_rng(s) for s in children[i].spawn(2))
        try:
            return solve_segment(points[i], gates[i].matrix, points[i + 1], budget.restarts, first, lm, index=i + 1)
        except SegmentNoConvergence as exc:
            logger.warning(
                "segment_retry segment=%s restarts=%s best=%s",
                i + 1,
                retry_restarts,
                exc.best_residual,
            )
        return solve_segment(points[i], gates[i].matrix, points[i + 1], retry_restarts, second, lm, index=i + 1)

    if budget.jobs > 1 and len(gates) > 1:
        with ThreadPoolExecutor(max_workers=budget.jobs) as pool:
            return list(pool.map(run, range(len(gates))))
    return [run(i) for i in range(len(gates))]


def decompose(target: np.ndarray, isa: Isa, budget: SynthBudget | None = None) -> Decomposition:
    """Cheapest sentence with a feasible trajectory, solved segment by segment.

    A segment that fails twice raises ``SegmentNoConvergence``; costlier
    sentences are never tried in its place.
    """
    logger = logging.getLogger(__name__)
    budget = budget or SynthBudget()
    target = np.asarray(target, dtype=complex)
    if not is_unitary(target, TOL["input_unitary"]) or target.shape != (4, 4):
        raise InputError("target must be a 4x4 unitary")
    lm = LmOptions(max_iter=budget.max_iter, tol=budget.tol)
    start = time.perf_counter()

    if max(canonical_coords(target)) <= TOL["base_snap"]:
        out = _identity_decomposition(target)
        out.timing = {"search_ms": (time.perf_counter() - start) * 1000.0, "lp_ms": 0.0, "lm_ms": 0.0}
        logger.info("decompose_identity distance=%.3e", phase_distance(out.matrix(), target))
        return out

    max_cost = Fraction(str(budget.max_cost)) if budget.max_cost is not None else None
    timing = {"lp_ms": 0.0, "lm_ms": 0.0}
    tried = 0
    last_cost: float | None = None
    for sentence in enumerate_sentences(isa):
        if tried >= budget.max_sentences:
            raise BudgetExhausted(f"no decomposition within {tried} sentences", tried, last_cost)
        if max_cost is not None and sentence.cost > max_cost:
            raise BudgetExhausted(f"no decomposition with cost <= {budget.max_cost}", tried, last_cost)
        tried += 1
        last_cost = float(sentence.cost)
        gates = [isa.gate(gate_id) for gate_id in sentence.ids]
        trajectory = find_trajectory(gates, target, timing)
        if trajectory is None:
            continue
        logger.info(
            "sentence_accepted ids=%s cost=%s lp_ms=%.3f reflected=%s",
            sentence.label(),
            sentence.cost,
            trajectory.lp_ms,
            trajectory.reflected,
        )

        lm_start = time.perf_counter()
        try:
            segments = _solve_segments(trajectory, gates, budget, np.random.SeedSequence([budget.seed, tried]), lm)
        except SegmentNoConvergence as exc:
            logger.error("sentence_failed ids=%s segment=%s best=%s", sentence.label(), exc.segment, exc.best_residual)
            raise
        finally:
            timing["lm_ms"] += (time.perf_counter() - lm_start) * 1000.0

        layers, phase = assemble(trajectory, gates, segments, target)
        search_ms = (time.perf_counter() - start) * 1000.0
        logger.info(
            "decompose_done ids=%s cost=%s sentences=%s search_ms=%.1f lp_ms=%.1f lm_ms=%.1f",
            sentence.label(),
            sentence.cost,
            tried,
            search_ms,
            timing["lp_ms"],
            timing["lm_ms"],
        )
        return Decomposition(
            sentence=sentence,
            gates=gates,
            trajectory=trajectory,
            segments=segments,
            layers=layers,
            global_phase=phase,
            timing={"search_ms": search_ms, **timing},
            sentences_tried=tried,
        )
    raise BudgetExhausted("sentence stream ended", tried, last_cost)


@dataclass
class VerifyReport:
    distance: float | None
    segment_residuals: list[float | None]
    trajectory_slack: list[float | None]
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        if self.errors or self.distance is None or self.distance > TOL["assembly"]:
            return False
        return all(r is not None and r <= 1e-6 for r in self.segment_residuals)


def _segment_check(d: Decomposition, i: int) -> tuple[float | None, float | None]:
    points = d.trajectory.points
    seg = d.segments[i]
    gate = d.gates[i].matrix
    tail = can_gate(points[i])
    det = complex(np.linalg.det(gate) * np.linalg.det(tail))
    r = makhlin_residual(gate @ seg.interior() @ tail, det, makhlin_of_coords(points[i + 1]))
    before = coords_to_logspec(points[i])
    slack = segment_slack(before, d.gates[i].logspec, coords_to_logspec(points[i + 1]))
    return float(np.max(np.abs(r))), slack


def verify(d: Decomposition, target: np.ndarray) -> VerifyReport:
    # Recompute distance, segment residuals and trajectory slack; never raises on bad data.
    report = VerifyReport(distance=None, segment_residuals=[], trajectory_slack=[])
    try:
        report.distance = phase_distance(d.matrix(), np.asarray(target, dtype=complex))
    except (ValueError, IndexError, TypeError, np.linalg.LinAlgError) as exc:
        report.errors.append(f"distance: {exc}")
    for i in range(len(d.segments)):
        try:
            residual, slack = _segment_check(d, i)
        except Exception as exc:  # noqa: BLE001 - verify reports every failure
            report.errors.append(f"segment {i + 1}: {exc}")
            residual, slack = None, None
        report.segment_residuals.append(residual)
        report.trajectory_slack.append(slack)
    return report
