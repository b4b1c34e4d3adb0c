"""Forward-mode dual numbers over numpy arrays.

A ``Dual`` carries a primal ``value`` and a stacked ``tangent`` with one slice
per seed direction, so a single evaluation yields every column of a Jacobian.
``tangent.shape == (m,) + value.shape`` where ``m`` is the number of seeded
inputs.
"""

from typing import Callable

import numpy as np


def _spread(tangent: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    # Align a (m, *s) tangent with a broadcast value shape.
    m = tangent.shape[0]
    inner = tangent.shape[1:]
    pad = len(shape) - len(inner)
    if pad < 0:
        raise ValueError(f"cannot broadcast tangent {tangent.shape} to {shape}")
    tangent = tangent.reshape((m,) + (1,) * pad + inner)
    return np.broadcast_to(tangent, (m,) + tuple(shape))


def _kron(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.einsum("...ik,...jl->...ijkl", x, y)
    lead = out.shape[:-4]
    p, r, q, s = out.shape[-4:]
    return out.reshape(lead + (p * r, q * s))


class Dual:
    # Lets ndarray operators defer to the reflected Dual methods.
    __array_ufunc__ = None

    def __init__(self, value, tangent) -> None:
        self.value = np.asarray(value)
        self.tangent = np.asarray(tangent)
        if self.tangent.shape[1:] != self.value.shape:
            raise ValueError(
                f"tangent shape {self.tangent.shape} does not match value shape {self.value.shape}"
            )

    @property
    def directions(self) -> int:
        return self.tangent.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __repr__(self) -> str:
        return f"Dual(value={self.value!r}, directions={self.directions})"

    def _wrap(self, other) -> "Dual":
        if isinstance(other, Dual):
            return other
        value = np.asarray(other)
        return Dual(value, np.zeros((self.directions,) + value.shape, dtype=value.dtype))

    def __add__(self, other):
        other = self._wrap(other)
        value = self.value + other.value
        return Dual(value, _spread(self.tangent, value.shape) + _spread(other.tangent, value.shape))

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.value, -self.tangent)

    def __sub__(self, other):
        return self + (-self._wrap(other))

    def __rsub__(self, other):
        return self._wrap(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Dual):
            other = np.asarray(other)
            value = self.value * other
            return Dual(value, _spread(self.tangent, value.shape) * other)
        value = self.value * other.value
        tangent = _spread(self.tangent, value.shape) * other.value + self.value * _spread(
            other.tangent, value.shape
        )
        return Dual(value, tangent)

    __rmul__ = __mul__

    def reciprocal(self) -> "Dual":
        inv = 1.0 / self.value
        return Dual(inv, -self.tangent * (inv * inv))

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __matmul__(self, other):
        if not isinstance(other, Dual):
            other = np.asarray(other)
            return Dual(self.value @ other, self.tangent @ other)
        return Dual(self.value @ other.value, self.tangent @ other.value + self.value @ other.tangent)

    def __rmatmul__(self, other):
        other = np.asarray(other)
        return Dual(other @ self.value, other @ self.tangent)

    def __getitem__(self, index):
        if not isinstance(index, tuple):
            index = (index,)
        return Dual(self.value[index], self.tangent[(slice(None),) + index])

    @property
    def T(self) -> "Dual":
        if self.value.ndim < 2:
            return self
        return Dual(self.value.T, np.swapaxes(self.tangent, -1, -2))

    @property
    def real(self) -> "Dual":
        return Dual(self.value.real, self.tangent.real)

    @property
    def imag(self) -> "Dual":
        return Dual(self.value.imag, self.tangent.imag)

    def conj(self) -> "Dual":
        return Dual(self.value.conj(), self.tangent.conj())


def value_of(x):
    return x.value if isinstance(x, Dual) else x


def seed(x) -> Dual:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("seed expects a 1-D parameter vector")
    return Dual(x.copy(), np.eye(x.size))


def apply(x, f: Callable, df: Callable):
    # Elementwise scalar function with a supplied derivative.
    if isinstance(x, Dual):
        return Dual(f(x.value), df(x.value) * x.tangent)
    return f(x)


def sin(x):
    return apply(x, np.sin, np.cos)


def cos(x):
    return apply(x, np.cos, lambda v: -np.sin(v))


def trace(x):
    if isinstance(x, Dual):
        return Dual(np.trace(x.value), np.trace(x.tangent, axis1=-2, axis2=-1))
    return np.trace(x)


def kron(a, b):
    if not isinstance(a, Dual) and not isinstance(b, Dual):
        return np.kron(a, b)
    if not isinstance(a, Dual):
        return Dual(np.kron(a, b.value), _kron(a, b.tangent))
    if not isinstance(b, Dual):
        return Dual(np.kron(a.value, b), _kron(a.tangent, b))
    return Dual(np.kron(a.value, b.value), _kron(a.tangent, b.value) + _kron(a.value, b.tangent))


def real(x):
    return x.real if isinstance(x, Dual) else np.real(x)


def imag(x):
    return x.imag if isinstance(x, Dual) else np.imag(x)


def stack(items: list) -> "Dual | np.ndarray":
    duals = [item for item in items if isinstance(item, Dual)]
    if not duals:
        return np.stack([np.asarray(item) for item in items])
    m = duals[0].directions
    values = []
    tangents = []
    for item in items:
        if isinstance(item, Dual):
            values.append(item.value)
            tangents.append(item.tangent)
        else:
            value = np.asarray(item)
            values.append(value)
            tangents.append(np.zeros((m,) + value.shape, dtype=value.dtype))
    return Dual(np.stack(values), np.stack(tangents, axis=1))


def jacobian(f: Callable, x) -> tuple[np.ndarray, np.ndarray]:
    out = f(seed(x))
    if not isinstance(out, Dual):
        value = np.asarray(out, dtype=float)
        return value, np.zeros((value.size, np.size(x)))
    return np.real(out.value).astype(float), np.real(out.tangent).T.astype(float)


def central_difference(f: Callable, x, step: float = 1e-7) -> np.ndarray:
    # Cross-check path for the dual-number Jacobian.
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * step))
    return np.stack(cols, axis=1)
