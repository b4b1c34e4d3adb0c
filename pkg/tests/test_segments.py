import sys
from pathlib import Path

import numpy as np
import pytest


ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

import dual
from errors import SegmentNoConvergence
from invariants import canonical_coords, makhlin, makhlin_of_coords
from matcore import CNOT, can_gate, kron
from synth.optimize import LmOptions
from synth.segments import (
    convergence_trial,
    local_layer,
    monolithic_residual,
    segment_residual,
    solve_segment,
)


def test_local_layer_is_a_tensor_product_of_rotations() -> None:
    x = np.array([0.1, 0.2, 0.3, -0.4, 0.5, -0.6])
    layer = local_layer(x)
    assert layer.shape == (4, 4)
    assert np.allclose(layer.conj().T @ layer, np.eye(4), atol=1e-12)


def test_segment_residual_jacobian_matches_central_differences() -> None:
    residual = segment_residual(CNOT, (0.25, 0.0, 0.0), (0.25, 0.25, 0.0))
    x = np.array([0.3, -0.7, 1.1, 0.2, 0.9, -1.4])
    _, jac = dual.jacobian(residual, x)
    numeric = dual.central_difference(lambda y: np.real(residual(y)), x)
    assert np.allclose(jac, numeric, atol=1e-6)


def test_segment_residual_vanishes_on_a_known_solution() -> None:
    x = np.array([0.4, -1.0, 0.3, 2.0, 0.1, -0.5])
    c_prev = (0.25, 0.0, 0.0)
    c_next = canonical_coords(CNOT @ local_layer(x) @ can_gate(c_prev))
    residual = segment_residual(CNOT, c_prev, c_next)
    assert np.max(np.abs(residual(x))) < 1e-10


def test_solve_segment_pins_the_next_point() -> None:
    rng = np.random.default_rng(0)
    c_prev, c_next = (0.25, 0.0, 0.0), (0.25, 0.25, 0.0)
    seg = solve_segment(c_prev, CNOT, c_next, restarts=32, rng=rng, index=2)
    assert seg.index == 2
    assert seg.residual <= 1e-8
    assert 1 <= seg.restarts_used <= 32
    s = CNOT @ seg.interior() @ can_gate(c_prev)
    rebuilt = np.exp(1j * seg.exterior_phase) * kron(*seg.exterior_left) @ can_gate(c_next) @ kron(
        *seg.exterior_right
    )
    assert np.allclose(rebuilt, s, atol=1e-7)


def test_solve_segment_is_reproducible_for_a_seed() -> None:
    args = ((0.25, 0.0, 0.0), CNOT, (0.2, 0.1, 0.0))
    a = solve_segment(*args, restarts=16, rng=np.random.default_rng(5))
    b = solve_segment(*args, restarts=16, rng=np.random.default_rng(5))
    assert np.array_equal(a.v1, b.v1) and np.array_equal(a.v2, b.v2)


def test_unreachable_segment_raises_after_all_restarts() -> None:
    # One CNOT from the identity cannot produce a SWAP class.
    with pytest.raises(SegmentNoConvergence) as exc_info:
        solve_segment(
            (0.0, 0.0, 0.0),
            CNOT,
            (0.25, 0.25, 0.25),
            restarts=3,
            rng=np.random.default_rng(1),
            lm=LmOptions(max_iter=100),
            index=1,
        )
    assert exc_info.value.segment == 1
    assert exc_info.value.best_residual is not None


def test_monolithic_residual_depth_and_target() -> None:
    with pytest.raises(ValueError):
        monolithic_residual(CNOT, 1, (0.0, 0.0, 0.0))
    residual = monolithic_residual(CNOT, 2, (0.0, 0.0, 0.0))
    # CNOT . I . CNOT is the identity.
    assert np.max(np.abs(residual(np.zeros(6)))) < 1e-12
    assert np.allclose(makhlin(CNOT @ CNOT).as_array(), makhlin_of_coords((0.0, 0.0, 0.0)).as_array())


def test_convergence_trial_finds_swap_with_three_cnots() -> None:
    ok, used = convergence_trial(CNOT, 3, (0.25, 0.25, 0.25), restarts=32, rng=np.random.default_rng(2))
    assert ok
    assert 1 <= used <= 32


def test_convergence_trial_reports_failure() -> None:
    ok, used = convergence_trial(
        CNOT, 2, (0.25, 0.25, 0.25), restarts=2, rng=np.random.default_rng(3), lm=LmOptions(max_iter=50)
    )
    assert not ok
    assert used == 2
