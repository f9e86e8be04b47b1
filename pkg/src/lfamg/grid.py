"""Uniform tensor-product grids, lexicographic indexing and Fourier modes.

Storage conventions
-------------------
Grid functions are flat vectors ordered lexicographically with the first
direction varying fastest.  Internally they are viewed as arrays of shape
``(m, ..., m)`` in Fortran order, optionally with a trailing batch axis.

Each boundary kind stores a fixed window of the nodes ``x_k = k*h``:

=========  ===============  ==============
bc         nodes stored     storage offset
=========  ===============  ==============
dirichlet  x_1 .. x_{n-1}   1
neumann    x_0 .. x_n       0
mixed      x_1 .. x_n       1
periodic   x_1 .. x_N       1   (x_N == x_0, N = 2*span*n)
=========  ===============  ==============

so that node index = storage index + offset.  A periodic grid covers
(0, 2*span); span=2 hosts the period-4 embedding of mixed problems.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np


class BC(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    MIXED = "mixed"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, value: "BC | str") -> "BC":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"mixeddn": "mixed", "mixed_dn": "mixed"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown boundary kind {value!r}") from None


_OFFSET = {BC.DIRICHLET: 1, BC.NEUMANN: 0, BC.MIXED: 1, BC.PERIODIC: 1}


@dataclass(frozen=True)
class GridSpec:
    d: int
    n: int
    bc: BC
    span: int = 1

    def __post_init__(self):
        object.__setattr__(self, "bc", BC.parse(self.bc))
        if self.span not in (1, 2) or (self.span != 1 and self.bc is not BC.PERIODIC):
            raise ValueError(f"span must be 1, or 2 on a periodic grid; got {self.span!r}")
        if not isinstance(self.d, (int, np.integer)) or not 1 <= self.d <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if self.n % 2:
            raise ValueError(f"n must be even, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def m(self) -> int:
        """Unknowns per direction."""
        return {
            BC.DIRICHLET: self.n - 1,
            BC.NEUMANN: self.n + 1,
            BC.MIXED: self.n,
            BC.PERIODIC: 2 * self.span * self.n,
        }[self.bc]

    @property
    def N(self) -> int:
        """Number of points per direction of the periodic lattice (periodic grids only)."""
        if self.bc is not BC.PERIODIC:
            raise ValueError("N is only defined for periodic grids")
        return self.m

    @property
    def size(self) -> int:
        return self.m**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.m,) * self.d

    @property
    def offset(self) -> int:
        return _OFFSET[self.bc]

    def nodes(self) -> np.ndarray:
        """Node indices k of the stored points along one direction."""
        return np.arange(self.m) + self.offset

    def coarse(self) -> "GridSpec":
        if self.n // 2 < 2 or (self.n // 2) % 2:
            raise ValueError(f"grid with n={self.n} cannot be coarsened to an even n")
        return GridSpec(self.d, self.n // 2, self.bc, self.span)


def make_grid(d: int, n: int, bc: BC | str) -> GridSpec:
    return GridSpec(d, n, bc)


def lex_index(multi, grid: GridSpec) -> int:
    """Flat position of a multi-index; the first coordinate varies fastest."""
    multi = tuple(int(i) for i in np.atleast_1d(multi))
    if len(multi) != grid.d:
        raise ValueError(f"expected {grid.d} indices, got {len(multi)}")
    flat, stride = 0, 1
    for i in multi:
        if not 0 <= i < grid.m:
            raise IndexError(f"index {i} outside [0, {grid.m})")
        flat += i * stride
        stride *= grid.m
    return flat


def lex_unindex(flat: int, grid: GridSpec) -> tuple[int, ...]:
    if not 0 <= flat < grid.size:
        raise IndexError(f"flat index {flat} outside [0, {grid.size})")
    out = []
    for _ in range(grid.d):
        flat, r = divmod(flat, grid.m)
        out.append(r)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A flat vector of values living on ``grid``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.shape[0] != self.grid.size:
            raise ValueError(
                f"grid function needs {self.grid.size} values, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return self.values.shape[0]

    def field(self) -> np.ndarray:
        return as_field(self.values, self.grid)


def as_field(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """View flat values (optionally with a trailing batch axis) as a d-dim field."""
    v = np.asarray(v)
    if v.shape[0] != grid.size:
        raise ValueError(f"expected leading dimension {grid.size}, got {v.shape}")
    return v.reshape(grid.shape + v.shape[1:], order="F")


def as_flat(field: np.ndarray, grid: GridSpec) -> np.ndarray:
    return field.reshape((grid.size,) + field.shape[grid.d :], order="F")


def checked(v, grid: GridSpec) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim not in (1, 2) or v.shape[0] != grid.size:
        raise ValueError(f"expected {grid.size} values (optionally batched), got shape {v.shape}")
    return v


def node_phase(grid: GridSpec, theta) -> np.ndarray:
    """exp(i θ·k) at the node multi-indices k of ``grid`` (flat, lexicographic)."""
    return _plane_wave(grid, theta, grid.nodes())


def _plane_wave(grid: GridSpec, theta, coords: np.ndarray) -> np.ndarray:
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (grid.d,))
    field = np.ones(grid.shape, dtype=complex)
    for axis in range(grid.d):
        shape = [1] * grid.d
        shape[axis] = grid.m
        field = field * np.exp(1j * theta[axis] * coords).reshape(shape)
    return as_flat(field, grid)


def fourier_mode(grid: GridSpec, theta) -> GridFunction:
    """exp(i θ·j) over storage multi-indices j of a periodic grid."""
    if grid.bc is not BC.PERIODIC:
        raise ValueError("Fourier modes are only defined on periodic grids")
    return GridFunction(grid, _plane_wave(grid, theta, np.arange(grid.m)))


def discrete_frequencies(N: int, d: int) -> list[tuple[float, ...]]:
    """All lattice frequencies 2πk/N, k = 0..N-1 per direction."""
    axis = [2 * np.pi * k / N for k in range(N)]
    return list(itertools.product(axis, repeat=d))
