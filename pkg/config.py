import os
from dataclasses import dataclass, replace


# Centralized environment defaults for synthesis budgets.

DEFAULTS = {
    "SYNTH_SEED": "0",
    "SYNTH_RESTARTS": "128",
    "SYNTH_MAX_ITER": "2048",
    "SYNTH_TOL": "1e-8",
    "SYNTH_JOBS": "1",
}


@dataclass(frozen=True)
class SynthBudget:
    seed: int = 0
    restarts: int = 128
    max_iter: int = 2048
    tol: float = 1e-8
    jobs: int = 1
    max_sentences: int = 64
    max_cost: float | None = None
    retry_factor: int = 4

    def scaled(self, factor: int) -> "SynthBudget":
        return replace(self, restarts=self.restarts * factor)


def configure_synth_defaults() -> None:
    # Explicit env wins; otherwise fill in the documented defaults.
    for key, value in DEFAULTS.items():
        os.environ.setdefault(key, value)


def load_budget(**overrides) -> SynthBudget:
    # Env values first (GULPS_SEED over SYNTH_SEED), then non-None CLI overrides.
    values = {
        "seed": int(os.environ.get("GULPS_SEED") or os.environ.get("SYNTH_SEED", DEFAULTS["SYNTH_SEED"])),
        "restarts": int(os.environ.get("SYNTH_RESTARTS", DEFAULTS["SYNTH_RESTARTS"])),
        "max_iter": int(os.environ.get("SYNTH_MAX_ITER", DEFAULTS["SYNTH_MAX_ITER"])),
        "tol": float(os.environ.get("SYNTH_TOL", DEFAULTS["SYNTH_TOL"])),
        "jobs": int(os.environ.get("SYNTH_JOBS", DEFAULTS["SYNTH_JOBS"])),
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    return SynthBudget(**values)
