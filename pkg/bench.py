import csv
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np

from matcore import haar_random_su4
from synth.gates import Isa
from synth.optimize import LmOptions
from synth.segments import convergence_trial
from synth.sentences import enumerate_sentences
from synth.trajectory import find_trajectory, polytope_apex, polytope_extreme


TOOL_VERSION = "0.1.0"
HISTOGRAM_BINS = 10


@dataclass
class SentenceTimeRecord:
    target_seed: int
    sentence: str
    cost: float | None
    sentences_tried: int
    rejected: int
    search_ms: float
    lp_ms: float
    reflected: bool | None


@dataclass
class ConvergenceRecord:
    depth: int
    trial: int
    success: bool
    starts_used: int
    target_c1: float
    target_c2: float
    target_c3: float


TARGET_RULES = {"apex": polytope_apex, "extreme": polytope_extreme}


def time_sentence_search(target: np.ndarray, isa: Isa, max_sentences: int, seed: int = 0) -> SentenceTimeRecord:
    # First sentence whose trajectory LP is feasible, with wall-clock timing.
    start = time.perf_counter()
    timing = {"lp_ms": 0.0}
    tried = 0
    for sentence in enumerate_sentences(isa):
        if tried >= max_sentences:
            break
        tried += 1
        trajectory = find_trajectory([isa.gate(g) for g in sentence.ids], target, timing)
        if trajectory is None:
            continue
        return SentenceTimeRecord(
            target_seed=seed,
            sentence=sentence.label(),
            cost=float(sentence.cost),
            sentences_tried=tried,
            rejected=tried - 1,
            search_ms=(time.perf_counter() - start) * 1000.0,
            lp_ms=timing["lp_ms"],
            reflected=trajectory.reflected,
        )
    return SentenceTimeRecord(
        target_seed=seed,
        sentence="",
        cost=None,
        sentences_tried=tried,
        rejected=tried,
        search_ms=(time.perf_counter() - start) * 1000.0,
        lp_ms=timing["lp_ms"],
        reflected=None,
    )


def run_sentence_time(isa: Isa, n: int, seed: int, max_sentences: int, jobs: int = 1) -> list[SentenceTimeRecord]:
    logger = logging.getLogger(__name__)

    def one(i: int) -> SentenceTimeRecord:
        return time_sentence_search(haar_random_su4(seed + i), isa, max_sentences, seed=seed + i)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(one, range(n)))
    else:
        records = [one(i) for i in range(n)]
    logger.info("bench_sentence_time targets=%s isa=%s", n, isa.name)
    return records


def run_convergence(
    isa: Isa,
    depths: list[int],
    n: int,
    seed: int,
    restarts: int,
    lm: LmOptions,
    jobs: int = 1,
    target_rule: str = "apex",
) -> list[ConvergenceRecord]:
    # Whole-circuit LM toward the apex (or extreme point) of each depth polytope, first ISA gate.
    logger = logging.getLogger(__name__)
    gate = isa.gates[0]
    records: list[ConvergenceRecord] = []
    for depth in depths:
        target = TARGET_RULES[target_rule](gate, depth)
        streams = [np.random.default_rng(s) for s in np.random.SeedSequence([seed, depth]).spawn(n)]

        def one(trial: int) -> ConvergenceRecord:
            ok, used = convergence_trial(gate.matrix, depth, target, restarts, streams[trial], lm)
            return ConvergenceRecord(depth, trial, ok, used, *target)

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                batch = list(pool.map(one, range(n)))
        else:
            batch = [one(trial) for trial in range(n)]
        rate = sum(r.success for r in batch) / max(len(batch), 1)
        logger.info("bench_convergence gate=%s depth=%s trials=%s success_rate=%.3f", gate.id, depth, n, rate)
        records.extend(batch)
    return records


def write_records_csv(path: Path, records: list, flag_line: str) -> int:
    if not records:
        return 0
    columns = [f.name for f in fields(records[0])]
    path.parent.mkdir(parents=True, exist_ok=True)
    fresh = not path.exists() or path.stat().st_size == 0
    if not fresh:
        existing = _read_columns(path)
        if existing != columns:
            raise ValueError(f"{path} holds columns {existing}, expected {columns}")
    with path.open("a", encoding="utf-8", newline="") as handle:
        if fresh:
            handle.write(f"# two-qubit-synth {TOOL_VERSION}\n")
            handle.write(f"# flags: {flag_line}\n")
        writer = csv.DictWriter(handle, fieldnames=columns)
        if fresh:
            writer.writeheader()
        for record in records:
            writer.writerow(asdict(record))
    return len(records)


def _read_columns(path: Path) -> list[str] | None:
    with path.open("r", encoding="utf-8", newline="") as handle:
        for line in handle:
            if line.startswith("#") or not line.strip():
                continue
            return next(csv.reader([line]))
    return None


def summarize(records: list) -> dict[str, Any]:
    summary: dict[str, Any] = {"count": len(records)}
    timings = [r.search_ms for r in records if isinstance(r, SentenceTimeRecord)]
    if timings:
        values = np.array(timings)
        counts, edges = np.histogram(values, bins=HISTOGRAM_BINS)
        summary["search_ms"] = {
            "median": float(np.median(values)),
            "q10": float(np.quantile(values, 0.1)),
            "q90": float(np.quantile(values, 0.9)),
            "max": float(values.max()),
            "histogram": {"counts": counts.tolist(), "edges": edges.tolist()},
        }
        costs = [r.cost for r in records if isinstance(r, SentenceTimeRecord) and r.cost is not None]
        summary["unresolved"] = sum(1 for r in records if isinstance(r, SentenceTimeRecord) and r.cost is None)
        summary["cost_counts"] = {str(c): costs.count(c) for c in sorted(set(costs))}
    trials = [r for r in records if isinstance(r, ConvergenceRecord)]
    if trials:
        by_depth: dict[str, float] = {}
        for depth in sorted({r.depth for r in trials}):
            batch = [r for r in trials if r.depth == depth]
            by_depth[str(depth)] = sum(r.success for r in batch) / len(batch)
        summary["convergence_fraction"] = by_depth
    return summary


def write_summary(path: Path, summary: dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
