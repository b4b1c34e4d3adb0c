import sys
from pathlib import Path

import numpy as np
import pytest


ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT))

from invariants import (
    alcove_coords,
    canonical_coords,
    chamber_mirror,
    coords_to_logspec,
    gamma_spectrum,
    kak,
    kron_factor,
    local_equiv_distance,
    logspec_to_coords,
    makhlin,
    makhlin_of_coords,
    relate_locally,
    rho_reflect,
    weyl_canonicalize,
)
from matcore import CNOT, CZ, I4, ISWAP, SWAP, can_gate, haar_random_su2, haar_random_su4, kron, random_local


def _random_chamber_point(rng: np.random.Generator) -> tuple[float, float, float]:
    while True:
        c = np.sort(rng.uniform(0.0, 0.5, size=3))[::-1]
        if c[0] + c[1] <= 0.5 and c[2] > 1e-3 and c[0] - c[1] > 1e-3 and c[1] - c[2] > 1e-3:
            return tuple(float(x) for x in c)


@pytest.mark.parametrize(
    "gate, expected",
    [
        (I4, (0.0, 0.0, 0.0)),
        (CNOT, (0.25, 0.0, 0.0)),
        (CZ, (0.25, 0.0, 0.0)),
        (ISWAP, (0.25, 0.25, 0.0)),
        (SWAP, (0.25, 0.25, 0.25)),
    ],
)
def test_canonical_coords_of_named_gates(gate, expected) -> None:
    assert np.allclose(canonical_coords(gate), expected, atol=1e-9)


def test_canonical_coords_ignore_locals_and_phase() -> None:
    rng = np.random.default_rng(5)
    for _ in range(20):
        c = _random_chamber_point(rng)
        u = np.exp(0.7j) * random_local(rng) @ can_gate(c) @ random_local(rng)
        assert np.allclose(canonical_coords(u), c, atol=1e-8)


def test_gamma_spectrum_of_canonical_gate_matches_logspec_map() -> None:
    rng = np.random.default_rng(9)
    for _ in range(20):
        c = _random_chamber_point(rng)
        assert np.allclose(gamma_spectrum(can_gate(c)), coords_to_logspec(c), atol=1e-8)


def test_logspec_and_coords_are_inverse_on_the_chamber() -> None:
    c = (0.3, 0.15, 0.05)
    assert np.allclose(logspec_to_coords(coords_to_logspec(c)), c)


def test_reflected_lift_is_rho_image() -> None:
    rng = np.random.default_rng(13)
    for _ in range(10):
        c = _random_chamber_point(rng)
        assert np.allclose(alcove_coords(can_gate(c), reflected=True), rho_reflect(c), atol=1e-8)


def test_reflected_spectrum_is_half_turn_shift() -> None:
    u = haar_random_su4(21)
    plain = np.array(gamma_spectrum(u))
    shifted = np.array(gamma_spectrum(u, reflected=True))
    assert abs(shifted.sum()) < 1e-9
    assert shifted[0] - shifted[-1] <= 1.0 + 1e-9
    assert not np.allclose(plain, shifted)


@pytest.mark.parametrize(
    "raw, expected",
    [
        ((0.1, 0.2, 0.05), (0.2, 0.1, 0.05)),
        ((0.6, 0.1, 0.0), (0.1, 0.1, 0.0)),
        ((-0.1, 0.0, 0.0), (0.1, 0.0, 0.0)),
        ((0.4, 0.3, 0.1), (0.2, 0.1, 0.1)),
        ((0.3, 0.1, 0.0), (0.2, 0.1, 0.0)),
    ],
)
def test_weyl_canonicalize_folds_into_the_chamber(raw, expected) -> None:
    assert np.allclose(weyl_canonicalize(raw), expected, atol=1e-12)


def test_weyl_canonicalize_matches_matrix_route() -> None:
    rng = np.random.default_rng(17)
    for _ in range(20):
        raw = rng.uniform(-1.0, 1.0, size=3)
        assert np.allclose(weyl_canonicalize(raw), canonical_coords(can_gate(raw)), atol=1e-8)


def test_chamber_mirror_is_class_of_inverse() -> None:
    rng = np.random.default_rng(23)
    for _ in range(10):
        u = haar_random_su4(int(rng.integers(1000)))
        assert np.allclose(chamber_mirror(canonical_coords(u)), canonical_coords(u.conj().T), atol=1e-8)


@pytest.mark.parametrize(
    "gate, expected",
    [(I4, (1.0, 0.0, 3.0)), (CNOT, (0.0, 0.0, 1.0)), (SWAP, (-1.0, 0.0, -3.0))],
)
def test_makhlin_of_named_gates(gate, expected) -> None:
    assert np.allclose(makhlin(gate).as_array(), expected, atol=1e-12)


def test_makhlin_closed_form_matches_matrix() -> None:
    rng = np.random.default_rng(29)
    for _ in range(20):
        c = rng.uniform(-0.5, 0.5, size=3)
        assert np.allclose(makhlin_of_coords(c).as_array(), makhlin(can_gate(c)).as_array(), atol=1e-10)


def test_makhlin_of_inverse_conjugates_g1() -> None:
    u = haar_random_su4(9)
    g, g_inv = makhlin(u), makhlin(u.conj().T)
    assert g_inv.g1_re == pytest.approx(g.g1_re, abs=1e-10)
    assert g_inv.g1_im == pytest.approx(-g.g1_im, abs=1e-10)
    assert g_inv.g2 == pytest.approx(g.g2, abs=1e-10)


def test_local_equiv_distance_separates_classes() -> None:
    rng = np.random.default_rng(31)
    u = haar_random_su4(1)
    assert local_equiv_distance(u, random_local(rng) @ u @ random_local(rng)) < 1e-9
    assert local_equiv_distance(CNOT, SWAP) > 1.0


def test_kron_factor_recovers_tensor_product() -> None:
    rng = np.random.default_rng(37)
    a, b = haar_random_su2(rng), haar_random_su2(rng)
    fa, fb = kron_factor(1j * kron(a, b))
    assert np.allclose(kron(fa, fb), 1j * kron(a, b), atol=1e-12)


@pytest.mark.parametrize("seed", range(8))
def test_kak_reconstructs_haar_unitaries(seed) -> None:
    u = haar_random_su4(seed) * np.exp(0.3j * seed)
    d = kak(u)
    assert np.allclose(d.matrix(), u, atol=1e-8)
    assert np.allclose(d.coord, canonical_coords(u), atol=1e-8)
    for factor in (*d.k1, *d.k2):
        assert abs(np.linalg.det(factor) - 1.0) < 1e-9


@pytest.mark.parametrize("gate", [I4, CNOT, ISWAP, SWAP, can_gate((0.25, 0.125, 0.0))])
def test_kak_handles_degenerate_spectra(gate) -> None:
    rng = np.random.default_rng(41)
    u = random_local(rng) @ gate @ random_local(rng)
    assert np.allclose(kak(u).matrix(), u, atol=1e-8)


def test_relate_locally_pins_the_representative() -> None:
    rng = np.random.default_rng(43)
    c = _random_chamber_point(rng)
    u = random_local(rng) @ can_gate(c) @ random_local(rng)
    left, right, phase = relate_locally(u, can_gate(c))
    rebuilt = np.exp(1j * phase) * kron(*left) @ can_gate(c) @ kron(*right)
    assert np.allclose(rebuilt, u, atol=1e-8)
