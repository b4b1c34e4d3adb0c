import logging

import numpy as np

import dual
from errors import ConvergenceFailure


TOL = {
    "construct": 1e-10,
    "verify": 1e-9,
    "eig_residual": 1e-8,
    "lp_feasible": 1e-9,
    "lp_infeasible": 1e-7,
    "assembly": 1e-6,
    "base_snap": 1e-7,
    "input_unitary": 1e-8,
}

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = (X, Y, Z)

I4 = np.eye(4, dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=complex,
)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
ISWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]],
    dtype=complex,
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
    dtype=complex,
)

# Bell basis with i-phases: columns Phi+, i Psi+, Psi-, i Phi-.
# Local SU(2) x SU(2) becomes SO(4) and XX, YY, ZZ become diagonal.
MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]],
    dtype=complex,
) / np.sqrt(2)
MAGIC_DAG = MAGIC.conj().T

# Eigenvalues of XX, YY, ZZ on the MAGIC columns (rows: XX, YY, ZZ).
MAGIC_SIGNS = np.array(
    [[1, 1, -1, -1], [-1, 1, -1, 1], [1, -1, -1, 1]],
    dtype=float,
)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _cos_half(s):
    return np.cos(np.sqrt(s) / 2)


def _cos_half_ds(s):
    return -_sinc_half(s) / 4


def _sinc_half(s):
    # sin(theta/2)/theta with s = theta^2; series near zero.
    s = np.asarray(s, dtype=float)
    theta = np.sqrt(np.maximum(s, 1e-4))
    exact = np.sin(theta / 2) / theta
    series = 0.5 - s / 48 + s * s / 3840
    return np.where(s < 1e-4, series, exact)


def _sinc_half_ds(s):
    s = np.asarray(s, dtype=float)
    theta = np.sqrt(np.maximum(s, 1e-4))
    exact = (theta * np.cos(theta / 2) / 2 - np.sin(theta / 2)) / (2 * theta**3)
    series = -1 / 48 + s / 1920
    return np.where(s < 1e-4, series, exact)


def rv_gate(v):
    # exp(-i v.sigma / 2); v may be a dual.Dual vector.
    if not isinstance(v, dual.Dual):
        v = np.asarray(v, dtype=float)
    s = v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
    c = dual.apply(s, _cos_half, _cos_half_ds)
    sn = dual.apply(s, _sinc_half, _sinc_half_ds)
    generator = v[0] * X + v[1] * Y + v[2] * Z
    return c * I2 + (-1j) * (sn * generator)


def can_gate(c) -> np.ndarray:
    # exp(-i pi (c1 XX + c2 YY + c3 ZZ)), built in the magic basis.
    c = np.asarray(c, dtype=float)
    lam = c @ MAGIC_SIGNS
    return MAGIC @ np.diag(np.exp(-1j * np.pi * lam)) @ MAGIC_DAG


def to_su4(u: np.ndarray) -> np.ndarray:
    # Principal fourth root of the determinant.
    u = np.asarray(u, dtype=complex)
    det = np.linalg.det(u)
    return u / det ** 0.25


def haar_random_su4(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return to_su4(q)


def haar_random_su2(rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    return q / np.sqrt(np.linalg.det(q))


def random_local(rng: np.random.Generator) -> np.ndarray:
    return kron(haar_random_su2(rng), haar_random_su2(rng))


def eig4(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Eigenpairs of a 4x4 matrix with a residual check per pair.
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise ValueError(f"eig4 expects a 4x4 matrix, got {m.shape}")
    try:
        values, vectors = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"eigen iteration did not settle: {exc}") from exc
    residual = np.linalg.norm(m @ vectors - vectors * values, axis=0)
    worst = float(np.max(residual))
    if not np.isfinite(worst) or worst > TOL["eig_residual"]:
        logging.getLogger(__name__).warning("eig4_residual worst=%.3e", worst)
        raise ConvergenceFailure(f"eigenpair residual {worst:.3e} exceeds {TOL['eig_residual']}")
    return values, vectors


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    overlap = abs(np.trace(np.asarray(u).conj().T @ np.asarray(v)))
    return float(np.sqrt(max(0.0, 8.0 - 2.0 * overlap)))


def unitarity_error(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=complex)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])))


def is_unitary(u: np.ndarray, tol: float = TOL["construct"]) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    if not np.all(np.isfinite(u)):
        return False
    return unitarity_error(u) <= tol


def matrix_to_json(u: np.ndarray) -> list[list[list[float]]]:
    u = np.asarray(u, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in u]


def matrix_from_json(rows, size: int = 4) -> np.ndarray:
    # Strict shape: size rows of size [re, im] pairs.
    if not isinstance(rows, list) or len(rows) != size:
        raise ValueError(f"matrix must have {size} rows")
    out = np.zeros((size, size), dtype=complex)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != size:
            raise ValueError(f"row {i} must have {size} entries")
        for j, entry in enumerate(row):
            if not isinstance(entry, list) or len(entry) != 2:
                raise ValueError(f"entry ({i},{j}) must be a [re, im] pair")
            re, im = entry
            if isinstance(re, bool) or isinstance(im, bool):
                raise ValueError(f"entry ({i},{j}) must be numeric")
            if not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
                raise ValueError(f"entry ({i},{j}) must be numeric")
            out[i, j] = complex(re, im)
    if not np.all(np.isfinite(out)):
        raise ValueError("matrix entries must be finite")
    return out
