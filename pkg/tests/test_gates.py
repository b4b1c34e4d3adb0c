import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest


ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from errors import InputError
from invariants import canonical_coords
from matcore import CNOT, matrix_to_json
from synth.gates import gate_from_entry, isa_from_dict, named_gate, parse_cost, preset_isa, preset_names
from synth.sentences import enumerate_sentences


def _make_isa(*entries: dict):
    return isa_from_dict("test", {"gates": list(entries)})


@pytest.mark.parametrize("raw, expected", [(1, 1.0), ("1/2", 0.5), (0.25, 0.25), (" 2/3 ", 2.0 / 3.0)])
def test_parse_cost_accepts_numbers_and_fractions(raw, expected) -> None:
    assert parse_cost(raw) == pytest.approx(expected)


@pytest.mark.parametrize("raw", ["abc", "1/0", 0, -1, True, "nan"])
def test_parse_cost_rejects_bad_values(raw) -> None:
    with pytest.raises(InputError):
        parse_cost(raw)


@pytest.mark.parametrize(
    "name, expected",
    [
        ("CX", (0.25, 0.0, 0.0)),
        ("CX^1/2", (0.125, 0.0, 0.0)),
        ("CX^1/3", (1.0 / 12.0, 0.0, 0.0)),
        ("iSWAP^1/2", (0.125, 0.125, 0.0)),
        ("B", (0.25, 0.125, 0.0)),
        ("SWAP", (0.25, 0.25, 0.25)),
    ],
)
def test_named_gates_have_expected_coordinates(name, expected) -> None:
    assert np.allclose(canonical_coords(named_gate(name)), expected, atol=1e-9)


@pytest.mark.parametrize("name", ["FOO", "CX^1/0", "FOO^1/2", "CX^-1/2"])
def test_named_gate_rejects_unknown_names(name) -> None:
    with pytest.raises(InputError):
        named_gate(name)


def test_gate_entry_by_coordinates() -> None:
    gate = gate_from_entry({"id": "G", "coords": ["1/8", 0, 0], "cost": "1/2"})
    assert gate.cost == 0.5
    assert np.allclose(gate.coords, (0.125, 0.0, 0.0))
    assert len(gate.logspec) == 4


def test_gate_entry_by_matrix() -> None:
    gate = gate_from_entry({"id": "M", "matrix": matrix_to_json(CNOT)})
    assert np.allclose(gate.coords, (0.25, 0.0, 0.0))


def test_gate_entry_rejects_non_unitary_matrix() -> None:
    rows = matrix_to_json(2.0 * CNOT)
    with pytest.raises(InputError):
        gate_from_entry({"id": "M", "matrix": rows})


def test_gate_entry_rejects_coords_and_matrix_together() -> None:
    with pytest.raises(InputError):
        gate_from_entry({"id": "M", "coords": [0.1, 0, 0], "matrix": matrix_to_json(CNOT)})


def test_isa_rejects_duplicates_and_empty_lists() -> None:
    with pytest.raises(InputError):
        _make_isa({"id": "CX"}, {"id": "CX"})
    with pytest.raises(InputError):
        isa_from_dict("empty", {"gates": []})


def test_isa_lookup() -> None:
    isa = _make_isa({"id": "CX"}, {"id": "CZ", "cost": 2})
    assert isa.ids == ["CX", "CZ"]
    assert isa.gate("CZ").cost == 2.0
    with pytest.raises(KeyError):
        isa.gate("SWAP")


def test_presets_load() -> None:
    names = preset_names()
    assert {"cx", "cx_family", "mixed4"} <= set(names)
    family = preset_isa("cx_family")
    assert family.gate("CX^1/2").cost == 0.5
    with pytest.raises(KeyError):
        preset_isa("missing")


def test_sentences_are_cheapest_first_with_lexicographic_ties() -> None:
    isa = _make_isa({"id": "B", "cost": 1}, {"id": "A", "cost": 1}, {"id": "C", "cost": "1/2"})
    stream = enumerate_sentences(isa)
    first = [next(stream) for _ in range(6)]
    assert [s.ids for s in first] == [
        ("C",),
        ("A",),
        ("B",),
        ("C", "C"),
        ("A", "C"),
        ("B", "C"),
    ]
    assert [s.cost for s in first] == [0.5, 1.0, 1.0, 1.0, 1.5, 1.5]


def test_sentences_cover_each_multiset_once() -> None:
    isa = _make_isa({"id": "A", "cost": 1}, {"id": "B", "cost": 1})
    stream = enumerate_sentences(isa)
    seen = [next(stream).ids for _ in range(9)]
    assert len(set(seen)) == len(seen)
    assert ("A", "B") in seen and ("B", "A") not in seen
    assert all(len(s) <= 3 for s in seen)


def test_fractional_costs_tie_exactly() -> None:
    stream = enumerate_sentences(preset_isa("cx_family"))
    at_one = []
    for sentence in stream:
        if sentence.cost > 1:
            break
        if sentence.cost == 1:
            at_one.append(sentence.ids)
    assert at_one == [("CX",), ("CX^1/2", "CX^1/2"), ("CX^1/3", "CX^1/3", "CX^1/3")]
    assert parse_cost("1/3") * 3 == Fraction(1)


def test_mixed_family_keeps_costs_nondecreasing() -> None:
    stream = enumerate_sentences(preset_isa("mixed4"))
    first = [next(stream) for _ in range(5)]
    assert [s.ids for s in first] == [
        ("CX^1/3",),
        ("CX^1/2",),
        ("CX^1/3", "CX^1/3"),
        ("iSWAP^1/3",),
        ("CX^1/2", "CX^1/3"),
    ]
    assert [s.cost for s in first] == [Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(2, 3), Fraction(5, 6)]
