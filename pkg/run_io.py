import hashlib
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from uuid import uuid4


def ensure_paths(run_dir: Path) -> None:
    (run_dir / "logs").mkdir(parents=True, exist_ok=True)


def create_run_dir(root: Path) -> tuple[Path, str]:
    # Date folders with run-specific IDs keep runs sortable.
    date_dir = datetime.now(timezone.utc).strftime("%Y-%m-%d")
    run_id = uuid4().hex
    timestamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    run_dir = root / "outputs" / date_dir / f"run_{timestamp}_{run_id}"
    ensure_paths(run_dir)
    return run_dir, timestamp


def _hash_file(path: Path) -> str:
    data = path.read_bytes()
    return hashlib.sha256(data).hexdigest()


def input_records(paths: list[Path]) -> list[dict[str, str]]:
    # Only real files are hashed; preset names and generated targets are skipped.
    logger = logging.getLogger(__name__)
    records = []
    for path in paths:
        if path.is_file():
            records.append({"path": str(path), "sha256": _hash_file(path)})
        else:
            logger.debug("manifest_input_skipped path=%s", str(path))
    return records


def write_run_manifest(
    run_dir: Path,
    run_timestamp: str,
    command: str,
    flags: dict,
    inputs: list[Path],
    seed: int | None,
) -> Path:
    manifest = {
        "timestamp": run_timestamp,
        "run_dir": str(run_dir),
        "command": command,
        "flags": {key: value for key, value in flags.items() if _jsonable(value)},
        "inputs": input_records(inputs),
        "seed": seed,
        "status": "running",
        "exit_code": None,
    }
    manifest_path = run_dir / "run_manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return manifest_path


def update_run_manifest(manifest_path: Path, status: str, exit_code: int, **extra) -> None:
    # Completion status is written back once the command finishes.
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    data["status"] = status
    data["exit_code"] = exit_code
    data.update(extra)
    manifest_path.write_text(json.dumps(data, indent=2), encoding="utf-8")


def _jsonable(value) -> bool:
    try:
        json.dumps(value)
    except TypeError:
        return False
    return True
