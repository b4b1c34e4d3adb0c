import json
import sys
from pathlib import Path


ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from run_io import create_run_dir, input_records, update_run_manifest, write_run_manifest


def _make_input(root: Path, name: str, text: str) -> Path:
    path = root / name
    path.write_text(text, encoding="utf-8")
    return path


def test_run_dir_is_dated_and_has_logs(tmp_path: Path) -> None:
    run_dir, timestamp = create_run_dir(tmp_path)
    assert run_dir.parent.parent == tmp_path / "outputs"
    assert run_dir.name.startswith(f"run_{timestamp}_")
    assert (run_dir / "logs").is_dir()


def test_two_runs_never_share_a_directory(tmp_path: Path) -> None:
    first, _ = create_run_dir(tmp_path)
    second, _ = create_run_dir(tmp_path)
    assert first != second


def test_input_records_hash_files_and_skip_specs(tmp_path: Path) -> None:
    isa = _make_input(tmp_path, "isa.yaml", "format_version: 1\n")
    records = input_records([isa, Path("haar:3"), tmp_path / "missing.json"])
    assert len(records) == 1
    assert records[0]["path"] == str(isa)
    assert len(records[0]["sha256"]) == 64


def test_manifest_is_written_then_completed(tmp_path: Path) -> None:
    run_dir, timestamp = create_run_dir(tmp_path)
    target = _make_input(tmp_path, "target.json", "[]")
    manifest_path = write_run_manifest(
        run_dir,
        timestamp,
        "decompose",
        {"isa": "cx", "restarts": 128, "func": object()},
        [target],
        seed=5,
    )
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    assert data["status"] == "running"
    assert data["exit_code"] is None
    assert data["seed"] == 5
    assert data["flags"] == {"isa": "cx", "restarts": 128}
    assert data["inputs"][0]["path"] == str(target)

    update_run_manifest(manifest_path, "ok", 0, sentences_tried=3)
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    assert data["status"] == "ok"
    assert data["exit_code"] == 0
    assert data["sentences_tried"] == 3
    assert data["command"] == "decompose"
