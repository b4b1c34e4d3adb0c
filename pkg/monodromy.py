"""Quantum Littlewood-Richardson inequalities for products in SU(4).

For A, B in SU(4) with log spectra alpha, beta (alcove representatives) the
product AB has log spectrum delta exactly when, for every triple of
partitions with quantum structure constant N^{c,d}_{a,b} = 1 in the
quantum cohomology of Gr(r, 4),

    d - sum_i alpha[k+i-a_i] - sum_i beta[k+i-b_i] + sum_i delta[k+i-c_i] >= 0

with 1-based indices into spectra sorted non-increasing and k = 4 - r.
Rows are kept as exact rationals and only turned into floats when a segment
is instantiated.
"""

import csv
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from errors import InvalidBox
from invariants import LOGSPEC_MAP, Coord, LogSpec, canonical_coords, gamma_spectrum
from matcore import TOL, can_gate


N_LEVEL = 4

Partition = tuple[int, ...]
QlrTriple = tuple[Partition, Partition, Partition, int]

# Variable layout of a row: alpha_1..4, beta_1..4, delta_1..4.
ROW_WIDTH = 3 * N_LEVEL

# c1 >= c2, c2 >= c3, c3 >= 0, c1 + c2 <= 1/2 written as a c <= b.
_CHAMBER_A = np.array([[-1, 1, 0], [0, -1, 1], [0, 0, -1], [1, 1, 0]], dtype=float)
_CHAMBER_B = np.array([0.0, 0.0, 0.0, 0.5])
# Reflected half of the alcove (c3 <= 0): c1 >= c2, c2 + c3 >= 0, c3 <= 0, c1 + c2 <= 1/2.
_MIRROR_A = np.array([[-1, 1, 0], [0, -1, -1], [0, 0, 1], [1, 1, 0]], dtype=float)


@dataclass(frozen=True)
class IneqRow:
    coeffs: tuple[Fraction, ...]
    constant: Fraction
    provenance: tuple[int, int, Partition, Partition, Partition, int]

    def slack(self, alpha, beta, delta) -> float:
        v = np.concatenate([np.asarray(alpha, float), np.asarray(beta, float), np.asarray(delta, float)])
        return float(self.constant) + float(np.dot([float(x) for x in self.coeffs], v))


@dataclass
class SegmentConstraints:
    a: np.ndarray
    b: np.ndarray
    qlr_rows: int
    chamber_rows: int

    @property
    def n_rows(self) -> int:
        return self.a.shape[0]


def partitions_in_box(r: int, k: int) -> list[Partition]:
    # Partitions with at most r parts each at most k, padded to length r.
    if r < 1 or k < 1 or r + k != N_LEVEL:
        raise InvalidBox(f"box {r}x{k} is not in the r + k = {N_LEVEL} family")
    out: list[Partition] = []

    def extend(prefix: list[int]) -> None:
        if len(prefix) == r:
            out.append(tuple(prefix))
            return
        cap = prefix[-1] if prefix else k
        for part in range(cap + 1):
            extend(prefix + [part])

    extend([])
    return sorted(out)


def _trim(p) -> Partition:
    parts = [int(x) for x in p]
    while parts and parts[-1] == 0:
        parts.pop()
    return tuple(parts)


def _pad(p, length: int) -> Partition:
    parts = list(_trim(p))
    return tuple(parts + [0] * (length - len(parts)))


def lr_coefficient(a, b, c) -> int:
    a, b, c = _trim(a), _trim(b), _trim(c)
    if sum(a) + sum(b) != sum(c) or len(a) > len(c):
        return 0
    inner = _pad(a, len(c))
    if any(inner[i] > c[i] for i in range(len(c))):
        return 0
    if not b:
        return 1

    # Reading order: rows top to bottom, each row right to left.
    cells = [(i, j) for i in range(len(c)) for j in range(c[i] - 1, inner[i] - 1, -1)]
    filling: dict[tuple[int, int], int] = {}
    counts = [0] * len(b)

    def place(pos: int) -> int:
        if pos == len(cells):
            return 1
        i, j = cells[pos]
        total = 0
        right = filling.get((i, j + 1))
        above = filling.get((i - 1, j))
        for v in range(len(b)):
            if right is not None and v > right:
                break
            if above is not None and v <= above:
                continue
            if counts[v] >= b[v]:
                continue
            if v > 0 and counts[v] + 1 > counts[v - 1]:
                continue
            filling[(i, j)] = v
            counts[v] += 1
            total += place(pos + 1)
            counts[v] -= 1
            del filling[(i, j)]
        return total

    return place(0)


def _partitions_of(size: int, rows: int, cap: int) -> list[Partition]:
    out: list[Partition] = []

    def extend(prefix: list[int], left: int) -> None:
        if left == 0:
            out.append(tuple(prefix))
            return
        if len(prefix) == rows:
            return
        top = min(left, prefix[-1] if prefix else cap)
        for part in range(top, 0, -1):
            extend(prefix + [part], left - part)

    extend([], size)
    return out


def _rim_reduce(c: Partition, r: int, k: int) -> tuple[int, int, Partition] | None:
    # Strip rim hooks on beta numbers; (sign, d, reduced) or None if the class vanishes.
    beta = [part + (r - 1 - i) for i, part in enumerate(_pad(c, r))]
    sign, d = 1, 0
    while beta[0] - (r - 1) > k:
        top = beta[0] - N_LEVEL
        if top < 0 or top in beta[1:]:
            return None
        leg = sum(1 for x in beta[1:] if top < x < beta[0])
        height = leg + 1
        sign *= -1 if (r - height) % 2 else 1
        d += 1
        beta = sorted([top] + beta[1:], reverse=True)
    reduced = tuple(x - (r - 1 - i) for i, x in enumerate(beta))
    return sign, d, reduced


def quantum_product(r: int, a, b) -> dict[tuple[Partition, int], int]:
    # Structure constants {(c, d): N} of sigma_a * sigma_b in QH*(Gr(r, 4)).
    k = N_LEVEL - r
    a, b = _pad(a, r), _pad(b, r)
    size = sum(a) + sum(b)
    out: dict[tuple[Partition, int], int] = {}
    for c in _partitions_of(size, r, a[0] + b[0]):
        coeff = lr_coefficient(a, b, c)
        if not coeff:
            continue
        reduced = _rim_reduce(c, r, k)
        if reduced is None:
            continue
        sign, d, core = reduced
        key = (core, d)
        out[key] = out.get(key, 0) + sign * coeff
    return {key: value for key, value in out.items() if value}


def qlr_coefficient(r: int, k: int, a, b, c, d: int) -> int:
    if r + k != N_LEVEL:
        raise InvalidBox(f"box {r}x{k} is not in the r + k = {N_LEVEL} family")
    return quantum_product(r, a, b).get((_pad(c, r), int(d)), 0)


def _row_for(r: int, a: Partition, b: Partition, c: Partition, d: int) -> IneqRow:
    k = N_LEVEL - r
    coeffs = [Fraction(0)] * ROW_WIDTH
    for i in range(1, r + 1):
        coeffs[k + i - a[i - 1] - 1] -= 1
        coeffs[N_LEVEL + k + i - b[i - 1] - 1] -= 1
        coeffs[2 * N_LEVEL + k + i - c[i - 1] - 1] += 1
    return IneqRow(coeffs=tuple(coeffs), constant=Fraction(d), provenance=(r, k, a, b, c, d))


@lru_cache(maxsize=1)
def generate_qlr_rows() -> tuple[IneqRow, ...]:
    logger = logging.getLogger(__name__)
    rows: list[IneqRow] = []
    seen: set[tuple] = set()
    for r in (1, 2, 3):
        box = partitions_in_box(r, N_LEVEL - r)
        for a in box:
            for b in box:
                for (c, d), coeff in sorted(quantum_product(r, a, b).items()):
                    if coeff != 1 or d > 2:
                        continue
                    row = _row_for(r, a, b, c, d)
                    key = (row.coeffs, row.constant)
                    if key in seen:
                        continue
                    seen.add(key)
                    rows.append(row)
    logger.info("qlr_rows_generated count=%s", len(rows))
    return tuple(rows)


def _slot_values(slot) -> np.ndarray | None:
    if isinstance(slot, (int, np.integer)):
        return None
    return np.asarray(slot, dtype=float)


def instantiate_segment(
    before, gate, after, n_free: int, chamber_slots=None, mirror_slots=()
) -> SegmentConstraints:
    """Rewrite every QLR row as a float row ``a x <= b`` over free coordinates.

    Each of ``before``, ``gate``, ``after`` is either a fixed LogSpec or the
    index of a free chamber coordinate triple (x[3i:3i+3]). Free slots are
    mapped to spectra with ``LOGSPEC_MAP``; chamber rows are appended for the
    free slots in ``chamber_slots`` (default: every free slot given), and
    reflected-half rows (c3 <= 0) for those in ``mirror_slots``.
    """
    slots = (before, gate, after)
    width = 3 * n_free
    a_rows: list[np.ndarray] = []
    b_rows: list[float] = []
    for row in generate_qlr_rows():
        coeffs = np.array([float(x) for x in row.coeffs])
        a_row = np.zeros(width)
        constant = float(row.constant)
        for s, slot in enumerate(slots):
            block = coeffs[s * N_LEVEL : (s + 1) * N_LEVEL]
            values = _slot_values(slot)
            if values is None:
                a_row[3 * slot : 3 * slot + 3] += block @ LOGSPEC_MAP
            else:
                constant += float(block @ values)
        # constant + a_row . x >= 0  ->  -a_row . x <= constant
        a_rows.append(-a_row)
        b_rows.append(constant)
    qlr_count = len(a_rows)

    if chamber_slots is None:
        chamber_slots = [s for s in slots if _slot_values(s) is None]
    for slot in dict.fromkeys(chamber_slots):
        for row, bound in zip(_CHAMBER_A, _CHAMBER_B):
            a_row = np.zeros(width)
            a_row[3 * slot : 3 * slot + 3] = row
            a_rows.append(a_row)
            b_rows.append(bound)
    for slot in dict.fromkeys(mirror_slots):
        for row, bound in zip(_MIRROR_A, _CHAMBER_B):
            a_row = np.zeros(width)
            a_row[3 * slot : 3 * slot + 3] = row
            a_rows.append(a_row)
            b_rows.append(bound)

    a = np.array(a_rows).reshape(len(a_rows), width)
    return SegmentConstraints(
        a=a,
        b=np.array(b_rows),
        qlr_rows=qlr_count,
        chamber_rows=len(a_rows) - qlr_count,
    )


def segment_slack(before: LogSpec, gate: LogSpec, after: LogSpec) -> float:
    # Smallest QLR slack of a fully fixed segment; >= 0 means consistent.
    return min(row.slack(before, gate, after) for row in generate_qlr_rows())


def polytope_contains(g1: LogSpec, g2: LogSpec, target: Coord) -> bool:
    # Both lifts of the target are tried.
    logger = logging.getLogger(__name__)
    target_matrix = can_gate(target)
    for reflected in (False, True):
        delta = gamma_spectrum(target_matrix, reflected=reflected)
        slack = segment_slack(tuple(g1), tuple(g2), delta)
        logger.debug("polytope_check reflected=%s slack=%.3e", reflected, slack)
        if slack >= -TOL["lp_feasible"]:
            return True
    return False


def product_contains(g1: np.ndarray, g2: np.ndarray, target: np.ndarray) -> bool:
    # Matrix form: g1 (locals) g2 against a target unitary.
    return polytope_contains(gamma_spectrum(g1), gamma_spectrum(g2), canonical_coords(target))


def write_rows_csv(path: Path, rows=None, alpha: LogSpec | None = None, beta: LogSpec | None = None) -> int:
    # Dump rows as CSV; with both factor spectra given, a folded constant over delta is added.
    rows = generate_qlr_rows() if rows is None else rows
    folded = alpha is not None and beta is not None
    path.parent.mkdir(parents=True, exist_ok=True)
    header = (
        [f"alpha{i}" for i in range(1, 5)]
        + [f"beta{i}" for i in range(1, 5)]
        + [f"delta{i}" for i in range(1, 5)]
        + ["constant", "r", "k", "a", "b", "c", "d"]
        + (["folded_constant"] if folded else [])
    )
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write("# row: constant + sum(coeff * spectrum) >= 0\n")
        handle.write("# spectra sorted non-increasing, 1-based columns; d used unscaled\n")
        if folded:
            handle.write(f"# folded_constant: alpha={list(alpha)} beta={list(beta)} substituted\n")
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            r, k, a, b, c, d = row.provenance
            line = (
                [str(x) for x in row.coeffs]
                + [str(row.constant), r, k]
                + ["-".join(map(str, p)) for p in (a, b, c)]
                + [d]
            )
            if folded:
                line.append(repr(row.slack(alpha, beta, (0.0, 0.0, 0.0, 0.0))))
            writer.writerow(line)
    return len(rows)
