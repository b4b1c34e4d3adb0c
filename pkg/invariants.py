"""Local invariants of two-qubit unitaries and the KAK decomposition.

Coordinates are in units of pi: CAN(c) = exp(-i pi (c1 XX + c2 YY + c3 ZZ)),
so CNOT sits at (1/4, 0, 0) and SWAP at (1/4, 1/4, 1/4). The chamber is
1/2 >= c1 >= c2 >= c3 >= 0 with c1 + c2 <= 1/2.

Log spectra are the phases of the Cartan double m = u_B^T u_B of the SU(4)
lift, written as eigenvalues exp(-2 pi i alpha) and normalized into the
alcove (sorted non-increasing, zero sum, alpha_1 - alpha_4 <= 1).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

import dual
from errors import NumericalDegeneracy
from matcore import MAGIC, MAGIC_DAG, TOL, PAULIS, can_gate, eig4, kron, to_su4


Coord = tuple[float, float, float]
LogSpec = tuple[float, float, float, float]

# alpha = LOGSPEC_MAP @ c on the chamber (already sorted there).
LOGSPEC_MAP = np.array(
    [[1, 1, -1], [1, -1, 1], [-1, 1, 1], [-1, -1, -1]],
    dtype=float,
)

_EIGENBASIS_SEED = 20240601
_EIGENBASIS_ATTEMPTS = 16


@dataclass(frozen=True)
class MakhlinInv:
    g1_re: float
    g1_im: float
    g2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.g1_re, self.g1_im, self.g2])


@dataclass
class KakDecomp:
    k1: tuple[np.ndarray, np.ndarray]
    coord: Coord
    k2: tuple[np.ndarray, np.ndarray]
    global_phase: float

    def matrix(self) -> np.ndarray:
        return (
            np.exp(1j * self.global_phase)
            * kron(*self.k1)
            @ can_gate(self.coord)
            @ kron(*self.k2)
        )


def _alcove_normalize(alpha: np.ndarray) -> np.ndarray:
    # Phases in (-1/2, 1/2], then shift the extremes until the sum is zero.
    alpha = np.where(alpha <= -0.5, alpha + 1.0, alpha)
    alpha = np.sort(alpha)[::-1].copy()
    total = int(round(float(np.sum(alpha))))
    while total > 0:
        alpha[0] -= 1.0
        alpha = np.sort(alpha)[::-1].copy()
        total -= 1
    while total < 0:
        alpha[-1] += 1.0
        alpha = np.sort(alpha)[::-1].copy()
        total += 1
    return alpha


def _cartan_double(w: np.ndarray) -> np.ndarray:
    ub = MAGIC_DAG @ w @ MAGIC
    return ub.T @ ub


def gamma_spectrum(u: np.ndarray, *, reflected: bool = False) -> LogSpec:
    # reflected=True: the lift times i, a half-turn shift of the spectrum.
    w = to_su4(u)
    if reflected:
        w = 1j * w
    values, _ = eig4(_cartan_double(w))
    alpha = -np.angle(values) / (2 * np.pi)
    return tuple(float(a) for a in _alcove_normalize(alpha))


def coords_to_logspec(c) -> LogSpec:
    alpha = LOGSPEC_MAP @ np.asarray(c, dtype=float)
    return tuple(float(a) for a in np.sort(alpha)[::-1])


def logspec_to_coords(alpha) -> Coord:
    a = np.asarray(alpha, dtype=float)
    return (float((a[0] + a[1]) / 2), float((a[0] + a[2]) / 2), float((a[1] + a[2]) / 2))


def alcove_coords(u: np.ndarray, *, reflected: bool = False) -> Coord:
    # SU(4)-level class: c1 >= c2 >= |c3|, c1 + c2 <= 1/2.
    return logspec_to_coords(gamma_spectrum(u, reflected=reflected))


def rho_reflect(c) -> Coord:
    c1, c2, c3 = (float(x) for x in c)
    return (0.5 - c1, c2, -c3)


def _sort_with_moves(c: np.ndarray, moves: list) -> None:
    for _ in range(3):
        for i in range(2):
            if c[i] < c[i + 1]:
                c[i], c[i + 1] = c[i + 1], c[i]
                moves.append(("swap", i, i + 1))


def _weyl_moves(raw) -> tuple[np.ndarray, list]:
    # Moves: ("shift", j, t) adds t/2 to c_j; ("swap", i, j); ("negate", i, j).
    c = np.array(raw, dtype=float)
    moves: list = []
    for j in range(3):
        t = -math.floor(c[j] / 0.5)
        if t:
            c[j] += t * 0.5
            moves.append(("shift", j, t))
        if c[j] >= 0.5:
            c[j] -= 0.5
            moves.append(("shift", j, -1))
    _sort_with_moves(c, moves)
    if c[0] + c[1] > 0.5:
        c[0], c[1] = -c[0], -c[1]
        moves.append(("negate", 0, 1))
        for j in (0, 1):
            c[j] += 0.5
            moves.append(("shift", j, 1))
        _sort_with_moves(c, moves)
    if c[2] < TOL["base_snap"] and c[0] > 0.25:
        # Base face: (c1, c2, 0) and (1/2 - c1, c2, 0) are the same class.
        c[0], c[2] = -c[0], -c[2]
        moves.append(("negate", 0, 2))
        c[0] += 0.5
        moves.append(("shift", 0, 1))
    return c, moves


def weyl_canonicalize(raw) -> Coord:
    c, _ = _weyl_moves(raw)
    return (float(c[0]), float(c[1]), float(max(c[2], 0.0)))


def canonical_coords(u: np.ndarray) -> Coord:
    return weyl_canonicalize(alcove_coords(u))


def chamber_mirror(c) -> Coord:
    # Class of the inverse gate: CAN(c)^dagger = CAN(-c).
    return weyl_canonicalize(-np.asarray(c, dtype=float))


def _makhlin_terms(u, det):
    ub = MAGIC_DAG @ u @ MAGIC
    m = ub.T @ ub
    tr = dual.trace(m)
    tr2 = tr * tr
    g1 = tr2 / (16 * det)
    g2 = (tr2 - dual.trace(m @ m)) / (4 * det)
    return dual.real(g1), dual.imag(g1), dual.real(g2)


def makhlin(u: np.ndarray) -> MakhlinInv:
    u = np.asarray(u, dtype=complex)
    g1_re, g1_im, g2 = _makhlin_terms(u, np.linalg.det(u))
    return MakhlinInv(float(g1_re), float(g1_im), float(g2))


def makhlin_residual(u, det: complex, target: MakhlinInv):
    # det is the primal determinant, constant under local variations.
    g1_re, g1_im, g2 = _makhlin_terms(u, det)
    return dual.stack([g1_re - target.g1_re, g1_im - target.g1_im, g2 - target.g2])


def makhlin_of_coords(c) -> MakhlinInv:
    theta = 2 * np.pi * np.asarray(c, dtype=float)
    cos_p = float(np.prod(np.cos(theta)))
    sin_p = float(np.prod(np.sin(theta)))
    g1_re = cos_p * cos_p - sin_p * sin_p
    g1_im = -0.25 * float(np.prod(np.sin(2 * theta)))
    g2 = 4 * g1_re - float(np.prod(np.cos(2 * theta)))
    return MakhlinInv(g1_re, g1_im, g2)


def local_equiv_distance(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.linalg.norm(makhlin(u).as_array() - makhlin(v).as_array()))


def kron_factor(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Nearest Kronecker factorization a (x) b of a 4x4 matrix.
    r = np.asarray(m, dtype=complex).reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, sv, vh = np.linalg.svd(r)
    a = np.sqrt(sv[0]) * u[:, 0].reshape(2, 2)
    b = np.sqrt(sv[0]) * vh[0, :].reshape(2, 2)
    return a, b


def _real_eigenbasis(m: np.ndarray) -> np.ndarray:
    # m = X + iY with commuting real symmetric X, Y; diagonalize a random
    # real combination and keep the first basis that diagonalizes m.
    logger = logging.getLogger(__name__)
    rng = np.random.default_rng(_EIGENBASIS_SEED)
    re, im = m.real, m.imag
    best, best_off = None, np.inf
    for attempt in range(_EIGENBASIS_ATTEMPTS):
        t = rng.uniform(0, 2 * np.pi)
        _, p = np.linalg.eigh(np.cos(t) * re + np.sin(t) * im)
        if np.linalg.det(p) < 0:
            p[:, 0] = -p[:, 0]
        d = p.T @ m @ p
        off = float(np.linalg.norm(d - np.diag(np.diag(d))))
        if off < best_off:
            best, best_off = p, off
        if off <= TOL["construct"]:
            return p
        logger.debug("real_eigenbasis_retry attempt=%s off=%.3e", attempt, off)
    if best_off <= TOL["eig_residual"]:
        return best
    raise NumericalDegeneracy(f"no real eigenbasis found (off-diagonal {best_off:.3e})")


def _apply_moves(state: dict, moves: list) -> None:
    # u = e^{i phase} (a1 (x) a2) CAN(c) (b1 (x) b2) is kept invariant.
    for kind, i, j in moves:
        if kind == "shift":
            p = PAULIS[i]
            if j % 2:
                state["b1"] = p @ state["b1"]
                state["b2"] = p @ state["b2"]
            state["phase"] += j * np.pi / 2
        elif kind == "swap":
            v = (PAULIS[i] + PAULIS[j]) / np.sqrt(2)
            state["a1"] = state["a1"] @ v
            state["a2"] = state["a2"] @ v
            state["b1"] = v @ state["b1"]
            state["b2"] = v @ state["b2"]
        elif kind == "negate":
            k = 3 - i - j
            p = PAULIS[k]
            state["a1"] = state["a1"] @ p
            state["b1"] = p @ state["b1"]
        else:
            raise ValueError(f"unknown Weyl move: {kind}")


def _to_su2(m: np.ndarray) -> tuple[np.ndarray, float]:
    root = np.sqrt(np.linalg.det(m) + 0j)
    return m / root, float(np.angle(root))


def kak(u: np.ndarray) -> KakDecomp:
    # u = e^{i phase} (k1l (x) k1r) CAN(coord) (k2l (x) k2r), coord canonical.
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    w = u / det ** 0.25
    ub = MAGIC_DAG @ w @ MAGIC
    m = ub.T @ ub
    p = _real_eigenbasis(m)
    h = np.angle(np.diag(p.T @ m @ p)) / 2
    o1 = ub @ p @ np.diag(np.exp(-1j * h))
    if np.linalg.det(o1).real < 0:
        h[0] += np.pi
        o1[:, 0] = -o1[:, 0]
    if float(np.max(np.abs(o1.imag))) > 1e-6:
        raise NumericalDegeneracy("outer magic-basis factor is not real orthogonal")
    o1 = o1.real

    psi = float(np.mean(h))
    lam = -(h - psi) / np.pi
    raw = ((lam[0] + lam[1]) / 2, (lam[1] + lam[3]) / 2, (lam[0] + lam[3]) / 2)

    a1, a2 = kron_factor(MAGIC @ o1 @ MAGIC_DAG)
    b1, b2 = kron_factor(MAGIC @ p.T @ MAGIC_DAG)
    state = {"a1": a1, "a2": a2, "b1": b1, "b2": b2, "phase": float(np.angle(det)) / 4 + psi}
    c, moves = _weyl_moves(raw)
    _apply_moves(state, moves)

    phase = state["phase"]
    factors = {}
    for key in ("a1", "a2", "b1", "b2"):
        factors[key], shift = _to_su2(state[key])
        phase += shift

    decomp = KakDecomp(
        k1=(factors["a1"], factors["a2"]),
        coord=(float(c[0]), float(c[1]), float(c[2])),
        k2=(factors["b1"], factors["b2"]),
        global_phase=float(np.angle(np.exp(1j * phase))),
    )
    error = float(np.linalg.norm(decomp.matrix() - u))
    if error > TOL["eig_residual"]:
        raise NumericalDegeneracy(f"KAK reconstruction error {error:.3e}")
    return decomp


def relate_locally(u: np.ndarray, v: np.ndarray):
    # Locals with u ~= e^{i phase} (a1 (x) a2) v (b1 (x) b2) for u locally equivalent to v.
    ku = kak(u)
    kv = kak(v)
    gap = float(np.max(np.abs(np.subtract(ku.coord, kv.coord))))
    if gap > 1e-6:
        logging.getLogger(__name__).warning(
            "relate_locally_coord_gap gap=%.3e u=%s v=%s", gap, ku.coord, kv.coord
        )
    a = (ku.k1[0] @ kv.k1[0].conj().T, ku.k1[1] @ kv.k1[1].conj().T)
    b = (kv.k2[0].conj().T @ ku.k2[0], kv.k2[1].conj().T @ ku.k2[1])
    return a, b, ku.global_phase - kv.global_phase
