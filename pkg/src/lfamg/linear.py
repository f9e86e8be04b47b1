"""Minimal matrix-free linear maps with guarded dense materialization."""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

DENSE_LIMIT = 10_000


class SizeGuardError(ValueError):
    """Raised when a dense materialization would exceed the configured size."""


class LinearMap:
    """A linear map given by an ``apply`` callable.

    ``apply`` must accept arrays of shape ``(cols,)`` or ``(cols, k)`` and
    act column-wise; real and complex inputs are both allowed.
    """

    def __init__(self, shape: tuple[int, int], apply: Callable[[np.ndarray], np.ndarray], name: str = ""):
        self.shape = (int(shape[0]), int(shape[1]))
        self._apply = apply
        self.name = name

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[0] != self.shape[1]:
            raise ValueError(f"{self.name or 'map'} expects {self.shape[1]} rows, got {x.shape}")
        return self._apply(x)

    __call__ = apply

    def __matmul__(self, other):
        if isinstance(other, LinearMap):
            if other.shape[0] != self.shape[1]:
                raise ValueError("shape mismatch in composition")
            return LinearMap(
                (self.shape[0], other.shape[1]),
                lambda x: self.apply(other.apply(x)),
                f"{self.name}@{other.name}",
            )
        return self.apply(other)

    def dense(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        return materialize(self, limit)

    def __repr__(self):
        return f"LinearMap({self.name!r}, shape={self.shape})"


def materialize(op, limit: int = DENSE_LIMIT) -> np.ndarray:
    """Dense matrix whose column j is ``op.apply(e_j)``."""
    rows, cols = op.shape
    if max(rows, cols) > limit:
        raise SizeGuardError(f"refusing to materialize a {rows}x{cols} operator (limit {limit})")
    return np.asarray(op.apply(np.eye(cols)))


def from_matrix(M: np.ndarray, name: str = "") -> LinearMap:
    M = np.asarray(M)
    return LinearMap(M.shape, lambda x: M @ x, name)


def identity(size: int) -> LinearMap:
    return LinearMap((size, size), lambda x: np.array(x, copy=True), "I")


def zero(size: int) -> LinearMap:
    return LinearMap((size, size), lambda x: np.zeros_like(x), "0")


class DenseSolver:
    """LU factorization of a dense matrix that also solves complex right-hand sides."""

    def __init__(self, matrix: np.ndarray):
        self.matrix = np.asarray(matrix, dtype=float)
        self._lu = scipy.linalg.lu_factor(self.matrix)

    @property
    def shape(self):
        return self.matrix.shape

    def apply(self, b) -> np.ndarray:
        b = np.asarray(b)
        if np.iscomplexobj(b):
            return self.apply(b.real) + 1j * self.apply(b.imag)
        return scipy.linalg.lu_solve(self._lu, b)

    __call__ = apply
