import sys
from pathlib import Path

import numpy as np
import pytest


ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from config import SynthBudget
from errors import BudgetExhausted, InputError, SegmentNoConvergence
from matcore import CNOT, SWAP, X, can_gate, haar_random_su4, phase_distance, random_local
from synth.gates import preset_isa
from synth.pipeline import decompose, verify
from synth.sentences import enumerate_sentences
from synth.trajectory import find_trajectory


def _budget(**overrides) -> SynthBudget:
    values = {"seed": 7, "restarts": 64, "max_iter": 2048, "tol": 1e-10, "jobs": 1, "max_sentences": 16}
    values.update(overrides)
    return SynthBudget(**values)


def test_cnot_needs_one_cx() -> None:
    d = decompose(CNOT, preset_isa("cx"), _budget())
    assert d.sentence.ids == ("CX",)
    assert len(d.layers) == 2
    assert phase_distance(d.matrix(), CNOT) < 1e-6
    assert d.sentences_tried == 1


def test_locally_dressed_cnot_still_needs_one_cx() -> None:
    rng = np.random.default_rng(4)
    target = random_local(rng) @ CNOT @ random_local(rng)
    d = decompose(target, preset_isa("cx"), _budget())
    assert d.sentence.length == 1
    assert phase_distance(d.matrix(), target) < 1e-6


def test_swap_needs_three_cx() -> None:
    d = decompose(SWAP, preset_isa("cx"), _budget())
    assert d.sentence.ids == ("CX", "CX", "CX")
    assert d.sentence.cost == pytest.approx(3.0)
    assert len(d.layers) == 4
    assert phase_distance(d.matrix(), SWAP) < 1e-6


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_haar_targets_use_three_cx(seed) -> None:
    target = haar_random_su4(seed)
    d = decompose(target, preset_isa("cx"), _budget())
    assert d.sentence.length == 3
    assert phase_distance(d.matrix(), target) < 1e-6
    assert set(d.timing) == {"search_ms", "lp_ms", "lm_ms"}
    assert all(s.residual <= 1e-10 for s in d.segments)


def test_identity_class_needs_no_gates() -> None:
    rng = np.random.default_rng(6)
    target = np.exp(0.4j) * random_local(rng)
    d = decompose(target, preset_isa("cx"), _budget())
    assert d.sentence.ids == ()
    assert len(d.layers) == 1
    assert phase_distance(d.matrix(), target) < 1e-6


def test_non_unitary_target_is_rejected() -> None:
    with pytest.raises(InputError):
        decompose(2.0 * CNOT, preset_isa("cx"), _budget())
    with pytest.raises(InputError):
        decompose(np.eye(2), preset_isa("cx"), _budget())


def test_sentence_budget_is_enforced() -> None:
    with pytest.raises(BudgetExhausted) as exc_info:
        decompose(SWAP, preset_isa("cx"), _budget(max_sentences=2))
    assert exc_info.value.sentences_tried == 2
    assert exc_info.value.last_cost == pytest.approx(2.0)


def test_cost_budget_is_enforced() -> None:
    with pytest.raises(BudgetExhausted):
        decompose(SWAP, preset_isa("cx"), _budget(max_cost=2.5))


def test_parallel_segments_match_serial_results() -> None:
    target = haar_random_su4(9)
    serial = decompose(target, preset_isa("cx"), _budget(jobs=1))
    parallel = decompose(target, preset_isa("cx"), _budget(jobs=3))
    assert serial.sentence == parallel.sentence
    for a, b in zip(serial.segments, parallel.segments):
        assert np.array_equal(a.v1, b.v1) and np.array_equal(a.v2, b.v2)
    assert np.allclose(serial.matrix(), parallel.matrix())


def test_cx_family_prefers_the_single_cx_on_a_cost_tie() -> None:
    d = decompose(CNOT, preset_isa("cx_family"), _budget())
    assert d.sentence.ids == ("CX",)
    assert d.sentence.cost == 1


def test_unconverged_segment_is_an_error(caplog: pytest.LogCaptureFixture) -> None:
    caplog.set_level("WARNING")
    with pytest.raises(SegmentNoConvergence) as exc_info:
        decompose(haar_random_su4(5), preset_isa("cx"), _budget(restarts=1, max_iter=1))
    assert exc_info.value.segment is not None
    assert "segment_retry" in caplog.text
    assert "sentence_failed ids=CX,CX,CX" in caplog.text


@pytest.mark.parametrize("seed", [2, 8])
def test_global_sign_does_not_change_the_cost(seed) -> None:
    target = haar_random_su4(seed)
    isa = preset_isa("mixed4")
    plus = decompose(target, isa, _budget(max_sentences=64))
    minus = decompose(-target, isa, _budget(max_sentences=64))
    assert plus.sentence.cost == minus.sentence.cost
    assert phase_distance(minus.matrix(), -target) < 1e-6


def test_every_cheaper_sentence_is_infeasible() -> None:
    isa = preset_isa("mixed4")
    target = haar_random_su4(4)
    d = decompose(target, isa, _budget(max_sentences=64))
    for sentence in enumerate_sentences(isa):
        if sentence == d.sentence:
            break
        assert find_trajectory([isa.gate(g) for g in sentence.ids], target) is None, sentence.ids


def test_base_of_the_alcove_takes_two_cx() -> None:
    target = can_gate((0.2, 0.15, 0.0))
    d = decompose(target, preset_isa("cx"), _budget())
    assert d.sentence.ids == ("CX", "CX")
    assert phase_distance(d.matrix(), target) < 1e-6


def test_verify_accepts_a_fresh_decomposition() -> None:
    target = haar_random_su4(3)
    d = decompose(target, preset_isa("cx"), _budget())
    report = verify(d, target)
    assert report.ok
    assert len(report.segment_residuals) == 3
    assert all(s is not None and s >= -1e-7 for s in report.trajectory_slack)


def test_verify_flags_a_tampered_layer() -> None:
    target = haar_random_su4(3)
    d = decompose(target, preset_isa("cx"), _budget())
    first, second = d.layers[0]
    d.layers[0] = (first @ X, second)
    report = verify(d, target)
    assert not report.ok
    assert report.distance > 1e-3


def test_verify_collects_errors_without_raising() -> None:
    d = decompose(SWAP, preset_isa("cx"), _budget())
    d.segments[1].v1 = np.array([np.nan])
    report = verify(d, SWAP)
    assert not report.ok
    assert report.errors


@pytest.mark.slow
@pytest.mark.parametrize("isa_name", ["cx_family", "mixed4", "sqrt_iswap"])
def test_haar_targets_across_presets(isa_name) -> None:
    for seed in range(5):
        target = haar_random_su4(100 + seed)
        d = decompose(target, preset_isa(isa_name), _budget(max_sentences=64, restarts=128))
        assert phase_distance(d.matrix(), target) < 1e-6
