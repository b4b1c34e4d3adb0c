import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from uuid import uuid4

root = Path(__file__).resolve().parent
sys.path.insert(0, str(root))

import numpy as np

import bench
import formats
from config import configure_synth_defaults, load_budget
from errors import (
    AssemblyMismatch,
    BudgetExhausted,
    ConvergenceFailure,
    InputError,
    NumericalDegeneracy,
    SegmentNoConvergence,
)
from invariants import canonical_coords, weyl_canonicalize
from matcore import can_gate
from monodromy import polytope_contains, write_rows_csv
from run_io import create_run_dir, update_run_manifest, write_run_manifest
from synth.optimize import LmOptions
from synth.pipeline import decompose, verify


EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BUDGET = 2
EXIT_CONVERGENCE = 3
EXIT_NUMERICAL = 4

STATUS = {
    EXIT_OK: "ok",
    EXIT_INPUT: "input_error",
    EXIT_BUDGET: "budget_exhausted",
    EXIT_CONVERGENCE: "segment_no_convergence",
    EXIT_NUMERICAL: "numerical_failure",
}


def setup_logging(run_dir: Path, verbose: bool = False) -> str:
    # One log file per run, with a unique ID for correlation.
    run_id = uuid4().hex
    timestamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    log_path = run_dir / "logs" / f"run_{timestamp}_{run_id}.log"

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=[logging.FileHandler(log_path, encoding="utf-8"), logging.StreamHandler()],
        force=True,
    )
    return str(log_path)


def _parse_depths(raw: str) -> list[int]:
    # "2..6" or "2,3,5".
    if ".." in raw:
        low, high = raw.split("..", 1)
        return list(range(int(low), int(high) + 1))
    return [int(x) for x in raw.split(",") if x.strip()]


def _parse_coords(raw: str) -> tuple[float, float, float]:
    parts = [float(x) for x in raw.split(",")]
    if len(parts) != 3:
        raise ValueError("coordinates need three comma-separated values")
    return parts[0], parts[1], parts[2]


def cmd_decompose(args: argparse.Namespace) -> int:
    logger = logging.getLogger(__name__)
    isa, error = formats.load_isa(args.isa)
    if error:
        print(f"ISA error: {error}")
        return EXIT_INPUT
    target, error = formats.load_target(args.target)
    if error:
        print(f"Target error: {error}")
        return EXIT_INPUT
    budget = load_budget(
        seed=args.seed,
        restarts=args.restarts,
        max_iter=args.max_iter,
        tol=args.tol,
        jobs=args.jobs,
        max_sentences=args.max_sentences,
        max_cost=args.max_cost,
    )
    try:
        result = decompose(target, isa, budget)
    except BudgetExhausted as exc:
        logger.warning("budget_exhausted sentences=%s last_cost=%s", exc.sentences_tried, exc.last_cost)
        print(f"Budget exhausted: {exc}")
        return EXIT_BUDGET
    except InputError as exc:
        print(f"Input error: {exc}")
        return EXIT_INPUT
    except SegmentNoConvergence as exc:
        logger.error("segment_no_convergence segment=%s best=%s", exc.segment, exc.best_residual)
        print(f"Segment did not converge: {exc}")
        return EXIT_CONVERGENCE
    except AssemblyMismatch as exc:
        logger.error("assembly_mismatch distance=%.3e", exc.distance)
        print(f"Assembly failed: {exc}")
        return EXIT_NUMERICAL
    except (NumericalDegeneracy, ConvergenceFailure) as exc:
        logger.error("numerical_failure kind=%s", type(exc).__name__)
        print(f"Numerical failure: {exc}")
        return EXIT_NUMERICAL
    data = formats.decomposition_to_dict(result, target)
    formats.write_decomposition(Path(args.out), data)
    label = ",".join(result.sentence.ids) or "(empty)"
    print(f"sentence={label} cost={float(result.sentence.cost):g} distance={data['distance']:.3e}")
    return EXIT_OK


def cmd_trajectory(args: argparse.Namespace) -> int:
    loaded, error = formats.load_decomposition(Path(args.decomposition))
    if error:
        print(f"Decomposition error: {error}")
        return EXIT_INPUT
    d, _ = loaded
    report = verify(d, d.matrix())
    bad = [i + 1 for i, s in enumerate(report.trajectory_slack) if s is None or s < -1e-9]
    if bad:
        print(f"Trajectory segments outside their polytopes: {bad}")
        return EXIT_INPUT
    formats.write_trajectory_csv(Path(args.out), d.trajectory.points)
    print(f"wrote {len(d.trajectory.points)} points to {args.out}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    loaded, error = formats.load_decomposition(Path(args.decomposition))
    if error:
        print(f"Decomposition error: {error}")
        return EXIT_INPUT
    d, stored_target = loaded
    target = stored_target
    if args.target:
        target, error = formats.load_target(args.target)
        if error:
            print(f"Target error: {error}")
            return EXIT_INPUT
    report = verify(d, target)
    print(f"distance={report.distance}")
    for i, (res, slack) in enumerate(zip(report.segment_residuals, report.trajectory_slack), start=1):
        print(f"segment {i}: residual={res} slack={slack}")
    for message in report.errors:
        print(f"error: {message}")
    ok = report.ok
    if args.trajectory:
        points, error = formats.read_trajectory_csv(Path(args.trajectory))
        if error:
            print(f"Trajectory error: {error}")
            return EXIT_INPUT
        same = len(points) == len(d.trajectory.points) and np.allclose(points, d.trajectory.points, atol=1e-12)
        print(f"trajectory_match={same}")
        ok = ok and same
    return EXIT_OK if ok else EXIT_INPUT


def cmd_bench(args: argparse.Namespace) -> int:
    isa, error = formats.load_isa(args.isa)
    if error:
        print(f"ISA error: {error}")
        return EXIT_INPUT
    budget = load_budget(seed=args.seed, restarts=args.restarts, max_iter=args.max_iter, tol=args.tol, jobs=args.jobs)
    flag_line = args.flag_line
    if args.mode == "sentence-time":
        records = bench.run_sentence_time(isa, args.n, budget.seed, args.max_sentences, jobs=budget.jobs)
    else:
        lm = LmOptions(max_iter=budget.max_iter, tol=budget.tol)
        records = bench.run_convergence(
            isa,
            _parse_depths(args.depths),
            args.n,
            budget.seed,
            budget.restarts,
            lm,
            jobs=budget.jobs,
            target_rule=args.target_rule,
        )
    try:
        bench.write_records_csv(Path(args.out), records, flag_line)
    except ValueError as exc:
        print(f"Output error: {exc}")
        return EXIT_INPUT
    summary = bench.summarize(records)
    if args.summary:
        bench.write_summary(Path(args.summary), summary)
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def cmd_polytope(args: argparse.Namespace) -> int:
    isa, error = formats.load_isa(args.isa)
    if error:
        print(f"ISA error: {error}")
        return EXIT_INPUT
    ids = [x for x in args.sentence.split(",") if x]
    if len(ids) != 2:
        print("polytope needs a sentence of exactly two gates")
        return EXIT_INPUT
    try:
        gates = [isa.gate(gate_id) for gate_id in ids]
    except KeyError as exc:
        print(f"Sentence error: {exc}")
        return EXIT_INPUT
    if args.dump:
        count = write_rows_csv(Path(args.dump), alpha=gates[0].logspec, beta=gates[1].logspec)
        print(f"wrote {count} rows to {args.dump}")
    if args.contains:
        try:
            coords = weyl_canonicalize(_parse_coords(args.contains))
        except ValueError as exc:
            print(f"Coordinate error: {exc}")
            return EXIT_INPUT
        inside = polytope_contains(gates[0].logspec, gates[1].logspec, coords)
        print(f"contains={inside} coords={canonical_coords(can_gate(coords))}")
    return EXIT_OK


def _add_budget_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--restarts", type=int)
    parser.add_argument("--max-iter", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Two-qubit synthesis over a native gate set.")
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG logging (LP pivots)")
    parser.add_argument("--outputs-root", default=str(root), help="Directory that receives outputs/<date>/run_*")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="Decompose a target into the ISA")
    p.add_argument("--isa", required=True)
    p.add_argument("--target", required=True, help="file, name:<gate> or haar:<seed>")
    p.add_argument("--out", required=True)
    p.add_argument("--max-sentences", type=int)
    p.add_argument("--max-cost", type=float)
    _add_budget_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("trajectory", help="Export the trajectory of a decomposition as CSV")
    p.add_argument("decomposition")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("verify", help="Recheck a stored decomposition")
    p.add_argument("decomposition")
    p.add_argument("--target")
    p.add_argument("--trajectory")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="Benchmark campaigns")
    p.add_argument("--isa", required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["sentence-time", "convergence"], default="sentence-time")
    p.add_argument("--depths", default="2..6")
    p.add_argument("--target-rule", choices=sorted(bench.TARGET_RULES), default="apex")
    p.add_argument("--max-sentences", type=int, default=64)
    p.add_argument("--summary")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("polytope", help="Inspect the two-gate circuit polytope")
    p.add_argument("--isa", required=True)
    p.add_argument("--sentence", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--dump")
    group.add_argument("--contains")
    p.set_defaults(func=cmd_polytope)
    return parser


def _input_paths(args: argparse.Namespace) -> list[Path]:
    paths = []
    for key in ("isa", "target", "decomposition", "trajectory"):
        value = getattr(args, key, None)
        if value:
            paths.append(Path(value))
    return paths


def main(argv: list[str] | None = None) -> int:
    configure_synth_defaults()
    parser = build_parser()
    args = parser.parse_args(argv)
    args.flag_line = " ".join(sys.argv[1:] if argv is None else argv)

    run_dir, run_timestamp = create_run_dir(Path(args.outputs_root))
    log_path = setup_logging(run_dir, verbose=args.verbose)
    logger = logging.getLogger(__name__)
    logger.info("run_log path=%s command=%s", log_path, args.command)

    flags = {key: value for key, value in vars(args).items() if key != "func"}
    manifest_path = write_run_manifest(
        run_dir,
        run_timestamp,
        args.command,
        flags,
        _input_paths(args),
        load_budget(seed=getattr(args, "seed", None)).seed,
    )
    exit_code = args.func(args)
    status = STATUS.get(exit_code, "error")
    update_run_manifest(manifest_path, status, exit_code)
    logger.info("run_done command=%s exit_code=%s", args.command, exit_code)
    return exit_code


if __name__ == "__main__":
    raise SystemExit(main())
