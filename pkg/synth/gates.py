import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from errors import InputError
from invariants import Coord, LogSpec, canonical_coords, gamma_spectrum, kak
from matcore import CNOT, CZ, ISWAP, SWAP, can_gate, is_unitary, kron, matrix_from_json, TOL


NAMED_GATES: dict[str, np.ndarray] = {
    "CX": CNOT,
    "CNOT": CNOT,
    "CZ": CZ,
    "iSWAP": ISWAP,
    "SWAP": SWAP,
    "B": can_gate((0.25, 0.125, 0.0)),
}

_POWER = re.compile(r"^(?P<base>[A-Za-z]+)\^(?P<num>\d+)/(?P<den>\d+)$")


@dataclass(frozen=True)
class GateDef:
    id: str
    coords: Coord
    cost: Fraction
    matrix: np.ndarray = field(repr=False, compare=False)

    @cached_property
    def logspec(self) -> LogSpec:
        return gamma_spectrum(self.matrix)


@dataclass(frozen=True)
class Isa:
    name: str
    gates: tuple[GateDef, ...]

    def gate(self, gate_id: str) -> GateDef:
        for g in self.gates:
            if g.id == gate_id:
                return g
        raise KeyError(f"gate not in ISA {self.name}: {gate_id}")

    @property
    def ids(self) -> list[str]:
        return sorted(g.id for g in self.gates)


def parse_cost(raw) -> Fraction:
    # Numbers or "p/q" strings, kept exact so sentence totals compare exactly.
    if isinstance(raw, bool):
        raise InputError(f"invalid cost: {raw!r}")
    try:
        value = Fraction(str(raw).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"invalid cost: {raw!r}") from exc
    if value <= 0:
        raise InputError(f"cost must be positive and finite: {raw!r}")
    return value


def fractional_power(u: np.ndarray, exponent: Fraction) -> np.ndarray:
    # Interaction content scaled by exponent inside u's own KAK frame.
    d = kak(u)
    scaled = tuple(float(exponent) * x for x in d.coord)
    return kron(*d.k1) @ can_gate(scaled) @ kron(*d.k2)


def named_gate(name: str) -> np.ndarray:
    if name in NAMED_GATES:
        return NAMED_GATES[name]
    match = _POWER.match(name)
    if not match or match.group("base") not in NAMED_GATES:
        raise InputError(f"unknown gate name: {name}")
    den = int(match.group("den"))
    if den == 0:
        raise InputError(f"zero denominator in gate name: {name}")
    return fractional_power(NAMED_GATES[match.group("base")], Fraction(int(match.group("num")), den))


def gate_from_entry(entry: dict) -> GateDef:
    # One ISA entry: id plus exactly one of (named id, coords, matrix).
    if not isinstance(entry, dict) or "id" not in entry:
        raise InputError("gate entry must be a mapping with an id")
    gate_id = str(entry["id"])
    cost = parse_cost(entry.get("cost", 1))
    if "coords" in entry and "matrix" in entry:
        raise InputError(f"gate {gate_id}: give coords or matrix, not both")
    if "coords" in entry:
        raw = entry["coords"]
        if not isinstance(raw, list) or len(raw) != 3:
            raise InputError(f"gate {gate_id}: coords must be three numbers")
        try:
            coords = tuple(float(Fraction(str(x))) for x in raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"gate {gate_id}: coords must be three numbers") from exc
        matrix = can_gate(coords)
    elif "matrix" in entry:
        try:
            matrix = matrix_from_json(entry["matrix"])
        except ValueError as exc:
            raise InputError(f"gate {gate_id}: {exc}") from exc
        if not is_unitary(matrix, TOL["input_unitary"]):
            raise InputError(f"gate {gate_id}: matrix is not unitary")
    else:
        matrix = named_gate(gate_id)
    return GateDef(id=gate_id, coords=canonical_coords(matrix), cost=cost, matrix=matrix)


def isa_from_dict(name: str, data: dict) -> Isa:
    gates_raw = data.get("gates") if isinstance(data, dict) else None
    if not isinstance(gates_raw, list) or not gates_raw:
        raise InputError(f"ISA {name}: gates must be a non-empty list")
    gates = tuple(gate_from_entry(entry) for entry in gates_raw)
    ids = [g.id for g in gates]
    if len(set(ids)) != len(ids):
        raise InputError(f"ISA {name}: duplicate gate ids")
    return Isa(name=name, gates=gates)


@lru_cache(maxsize=1)
def _load_presets() -> dict[str, dict]:
    config_path = Path(__file__).resolve().parent / "config" / "isas.yaml"
    if not config_path.exists():
        raise FileNotFoundError(f"Missing ISA presets: {config_path}")
    return yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}


def preset_names() -> list[str]:
    return sorted(_load_presets())


@lru_cache(maxsize=None)
def preset_isa(name: str) -> Isa:
    presets = _load_presets()
    if name not in presets:
        raise KeyError(f"ISA preset not found: {name}")
    return isa_from_dict(name, presets[name])
