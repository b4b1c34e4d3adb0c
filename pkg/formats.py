# Loaders return (data, error); a non-None error names the violated rule.

import csv
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from errors import InputError
from invariants import canonical_coords
from matcore import TOL, haar_random_su4, is_unitary, matrix_from_json, matrix_to_json, phase_distance
from synth.gates import GateDef, Isa, isa_from_dict, named_gate, parse_cost, preset_isa, preset_names
from synth.pipeline import Decomposition
from synth.segments import SegmentSolution
from synth.sentences import Sentence
from synth.trajectory import Trajectory


FORMAT_VERSION = 1

REQUIRED_KEYS = {
    "format_version": int,
    "sentence": dict,
    "gates": list,
    "trajectory": list,
    "reflected": bool,
    "segments": list,
    "layers": list,
    "global_phase": float,
    "target": list,
    "distance": float,
    "timing": dict,
}
TRAJECTORY_COLUMNS = ["step", "c1", "c2", "c3"]


def _read_structured(path: Path) -> tuple[Any, str | None]:
    if not path.exists():
        return None, f"file not found: {path}"
    raw_text = path.read_text(encoding="utf-8")
    if not raw_text.strip():
        return None, f"file is empty: {path}"
    try:
        # JSON is a subset of YAML.
        return yaml.safe_load(raw_text), None
    except yaml.YAMLError as exc:
        return None, f"invalid YAML/JSON: {exc}"


def _check_version(data: Any) -> str | None:
    if not isinstance(data, dict):
        return "document is not a mapping"
    if data.get("format_version") != FORMAT_VERSION:
        return f"format_version must be {FORMAT_VERSION}"
    return None


def load_target(spec: str) -> tuple[np.ndarray | None, str | None]:
    # name:<gate>, haar:<seed> or a JSON/YAML file with a matrix literal.
    if spec.startswith("name:"):
        try:
            return named_gate(spec[len("name:") :]), None
        except InputError as exc:
            return None, str(exc)
    if spec.startswith("haar:"):
        try:
            seed = int(spec[len("haar:") :])
        except ValueError:
            return None, f"invalid haar seed: {spec}"
        return haar_random_su4(seed), None

    data, error = _read_structured(Path(spec))
    if error:
        return None, error
    rows = data
    if isinstance(data, dict):
        error = _check_version(data)
        if error:
            return None, error
        rows = data.get("matrix")
    try:
        matrix = matrix_from_json(rows)
    except ValueError as exc:
        return None, f"invalid target matrix: {exc}"
    if not is_unitary(matrix, TOL["input_unitary"]):
        return None, "target matrix is not unitary"
    return matrix, None


def load_isa(spec: str) -> tuple[Isa | None, str | None]:
    if spec in preset_names():
        return preset_isa(spec), None
    path = Path(spec)
    data, error = _read_structured(path)
    if error:
        return None, f"{error} (presets: {', '.join(preset_names())})"
    error = _check_version(data)
    if error:
        return None, error
    try:
        return isa_from_dict(str(data.get("name", path.stem)), data), None
    except InputError as exc:
        return None, str(exc)


def _pair_to_json(pair) -> list:
    return [matrix_to_json(pair[0]), matrix_to_json(pair[1])]


def _pair_from_json(raw) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(raw, list) or len(raw) != 2:
        raise ValueError("local pair must hold two 2x2 matrices")
    return matrix_from_json(raw[0], size=2), matrix_from_json(raw[1], size=2)


def decomposition_to_dict(d: Decomposition, target: np.ndarray) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "sentence": {"ids": list(d.sentence.ids), "cost": float(d.sentence.cost), "cost_exact": str(d.sentence.cost)},
        "gates": [
            {
                "id": g.id,
                "cost": float(g.cost),
                "cost_exact": str(g.cost),
                "coords": list(g.coords),
                "matrix": matrix_to_json(g.matrix),
            }
            for g in d.gates
        ],
        "trajectory": [list(p) for p in d.trajectory.points],
        "reflected": bool(d.trajectory.reflected),
        "segments": [
            {
                "index": s.index,
                "v1": [float(x) for x in s.v1],
                "v2": [float(x) for x in s.v2],
                "residual": float(s.residual),
                "restarts_used": s.restarts_used,
                "exterior_left": _pair_to_json(s.exterior_left),
                "exterior_right": _pair_to_json(s.exterior_right),
                "exterior_phase": float(s.exterior_phase),
            }
            for s in d.segments
        ],
        "layers": [_pair_to_json(layer) for layer in d.layers],
        "global_phase": float(d.global_phase),
        "target": matrix_to_json(target),
        "distance": float(phase_distance(d.matrix(), target)),
        "timing": {key: float(value) for key, value in d.timing.items()},
        "sentences_tried": d.sentences_tried,
    }


def write_decomposition(path: Path, data: dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")


def _validate_decomposition(data: Any) -> str | None:
    error = _check_version(data)
    if error:
        return error
    for key, expected_type in REQUIRED_KEYS.items():
        if key not in data:
            return f"missing key: {key}"
        value = data[key]
        if expected_type is float and isinstance(value, int) and not isinstance(value, bool):
            continue
        if not isinstance(value, expected_type):
            return f"invalid type for {key}: expected {expected_type.__name__}"
    n = len(data["gates"])
    if len(data["sentence"].get("ids", [])) != n:
        return "sentence length does not match gates"
    if len(data["trajectory"]) != n + 1:
        return "trajectory must have one point more than the sentence"
    if len(data["segments"]) != n:
        return "one segment per gate is required"
    if len(data["layers"]) != n + 1:
        return "layers must number the sentence length plus one"
    for point in data["trajectory"]:
        if not isinstance(point, list) or len(point) != 3:
            return "trajectory points must be coordinate triples"
        if not all(isinstance(x, (int, float)) and math.isfinite(x) for x in point):
            return "trajectory coordinates must be finite numbers"
    return None


def decomposition_from_dict(data: dict[str, Any]) -> Decomposition:
    gates = []
    for entry in data["gates"]:
        matrix = matrix_from_json(entry["matrix"])
        gates.append(
            GateDef(
                id=str(entry["id"]),
                coords=canonical_coords(matrix),
                cost=parse_cost(entry.get("cost_exact", entry["cost"])),
                matrix=matrix,
            )
        )
    segments = [
        SegmentSolution(
            index=int(s["index"]),
            v1=np.array(s["v1"], dtype=float),
            v2=np.array(s["v2"], dtype=float),
            residual=float(s["residual"]),
            exterior_left=_pair_from_json(s["exterior_left"]),
            exterior_right=_pair_from_json(s["exterior_right"]),
            exterior_phase=float(s.get("exterior_phase", 0.0)),
            restarts_used=int(s.get("restarts_used", 0)),
        )
        for s in data["segments"]
    ]
    return Decomposition(
        sentence=Sentence(ids=tuple(data["sentence"]["ids"]), cost=sum((g.cost for g in gates), Fraction(0))),
        gates=gates,
        trajectory=Trajectory(
            points=[tuple(float(x) for x in p) for p in data["trajectory"]],
            reflected=bool(data["reflected"]),
        ),
        segments=segments,
        layers=[_pair_from_json(layer) for layer in data["layers"]],
        global_phase=float(data["global_phase"]),
        timing=dict(data.get("timing", {})),
        sentences_tried=int(data.get("sentences_tried", 0)),
    )


def load_decomposition(path: Path) -> tuple[tuple[Decomposition, np.ndarray] | None, str | None]:
    if not path.exists():
        return None, "decomposition file not found"
    raw_text = path.read_text(encoding="utf-8")
    if not raw_text.strip():
        return None, "decomposition file is empty"
    try:
        data = json.loads(raw_text)
    except json.JSONDecodeError as exc:
        return None, f"invalid JSON: {exc}"
    error = _validate_decomposition(data)
    if error:
        return None, error
    try:
        return (decomposition_from_dict(data), matrix_from_json(data["target"])), None
    except (KeyError, TypeError, ValueError) as exc:
        return None, f"malformed decomposition: {exc}"


def write_trajectory_csv(path: Path, points) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRAJECTORY_COLUMNS)
        for step, point in enumerate(points):
            writer.writerow([step] + [repr(float(x)) for x in point])


def read_trajectory_csv(path: Path) -> tuple[list[tuple[float, float, float]] | None, str | None]:
    if not path.exists():
        return None, "trajectory file not found"
    with path.open("r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != TRAJECTORY_COLUMNS:
            return None, f"trajectory header must be {','.join(TRAJECTORY_COLUMNS)}"
        points = []
        for expected, row in enumerate(reader):
            if len(row) != 4:
                return None, f"row {expected} must have 4 columns"
            try:
                step = int(row[0])
                point = tuple(float(x) for x in row[1:])
            except ValueError:
                return None, f"row {expected} is not numeric"
            if step != expected:
                return None, f"steps must count up from 0 (row {expected})"
            points.append(point)
    if not points:
        return None, "trajectory file has no points"
    return points, None
