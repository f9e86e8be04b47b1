"""Matrix-free reaction-diffusion operators on tensor-product grids.

The d-dimensional operator is the Kronecker sum of one 1D second-difference
stencil per direction plus ``c`` times the identity.  The reaction term is
added once at the tensor level, never inside the directional stencils.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .grid import BC, GridSpec, as_field, as_flat, checked
from .linear import DENSE_LIMIT, materialize


class Rule(str, enum.Enum):
    TRUNCATE = "truncate"  # neighbor outside the grid is a zero Dirichlet value
    REFLECT = "reflect"  # ghost point mirrors the first interior neighbor
    WRAP = "wrap"  # periodic neighbor


_RULES = {
    BC.DIRICHLET: (Rule.TRUNCATE, Rule.TRUNCATE),
    BC.NEUMANN: (Rule.REFLECT, Rule.REFLECT),
    BC.MIXED: (Rule.TRUNCATE, Rule.REFLECT),
    BC.PERIODIC: (Rule.WRAP, Rule.WRAP),
}


@dataclass(frozen=True)
class Stencil1D:
    """Three-point stencil ``off*u[i-1] + center*u[i] + off*u[i+1]``.

    ``wrap_scale`` multiplies the wrap-around coefficient only; it exists to
    reproduce the unscaled corner terms of the printed periodic matrix.
    """

    center: float
    off: float
    low: Rule
    high: Rule
    wrap_scale: float = 1.0

    def __post_init__(self):
        if (self.low is Rule.WRAP) != (self.high is Rule.WRAP):
            raise ValueError("wrap must be used at both ends")

    def apply_along(self, field: np.ndarray, axis: int) -> np.ndarray:
        u = np.moveaxis(field, axis, 0)
        out = self.center * u
        if u.shape[0] > 1:
            out[1:] += self.off * u[:-1]
            out[:-1] += self.off * u[1:]
            if self.low is Rule.REFLECT:
                out[0] += self.off * u[1]
            elif self.low is Rule.WRAP:
                out[0] += self.wrap_scale * self.off * u[-1]
            if self.high is Rule.REFLECT:
                out[-1] += self.off * u[-2]
            elif self.high is Rule.WRAP:
                out[-1] += self.wrap_scale * self.off * u[0]
        return np.moveaxis(out, 0, axis)

    def dense(self, m: int) -> np.ndarray:
        return self.apply_along(np.eye(m), 0)


def _check_reaction(c: float) -> float:
    c = float(c)
    if not np.isfinite(c) or c <= 0:
        raise ValueError(f"reaction coefficient must be strictly positive, got {c}")
    return c


def laplacian_stencil(grid: GridSpec, corner_scaled: bool = True) -> Stencil1D:
    """(-1, 2, -1)/h^2 with the boundary rules of ``grid.bc``."""
    low, high = _RULES[grid.bc]
    inv_h2 = float(grid.n) ** 2
    wrap_scale = 1.0 if corner_scaled else grid.h**2
    return Stencil1D(2.0 * inv_h2, -inv_h2, low, high, wrap_scale)


@dataclass(frozen=True)
class DiscreteOperator:
    """``sum_j I ⊗ .. ⊗ T ⊗ .. ⊗ I + c I`` applied matrix-free."""

    grid: GridSpec
    stencil: Stencil1D
    c: float

    def __post_init__(self):
        object.__setattr__(self, "c", _check_reaction(self.c))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.grid.size, self.grid.size)

    @property
    def diagonal(self) -> float:
        """Every row has the same diagonal entry, boundary rows included."""
        return self.grid.d * self.stencil.center + self.c

    def apply(self, u) -> np.ndarray:
        u = checked(u, self.grid)
        field = as_field(u, self.grid)
        out = self.c * field
        for axis in range(self.grid.d):
            out = out + self.stencil.apply_along(field, axis)
        return as_flat(out, self.grid)

    __call__ = apply

    def dense(self, limit: int = DENSE_LIMIT) -> np.ndarray:
        return materialize(self, limit)

    def line_matrix(self, axis: int) -> np.ndarray:
        """Block of the operator coupling the points of one grid line along ``axis``.

        Transverse stencils contribute only their center coefficient.
        """
        del axis  # all directions share one stencil
        m = self.grid.m
        shift = (self.grid.d - 1) * self.stencil.center + self.c
        return self.stencil.dense(m) + shift * np.eye(m)

    def coarse(self) -> "DiscreteOperator":
        """Rediscretization with doubled step size."""
        grid = self.grid.coarse()
        corner_scaled = self.stencil.wrap_scale == 1.0
        return DiscreteOperator(grid, laplacian_stencil(grid, corner_scaled), self.c)


def make_operator(grid: GridSpec, c: float, corner_scaled: bool = True) -> DiscreteOperator:
    return DiscreteOperator(grid, laplacian_stencil(grid, corner_scaled), c)


def dirichlet_operator_1d(n: int, c: float) -> DiscreteOperator:
    return make_operator(GridSpec(1, n, BC.DIRICHLET), c)


def periodic_operator_1d(n: int, c: float, corner_scaled: bool = True) -> DiscreteOperator:
    """Circulant operator on N = 2n points.

    ``corner_scaled=False`` gives corner entries -1 instead of -1/h^2; this
    breaks the odd-symmetry invariance and is kept only for fault injection.
    """
    return make_operator(GridSpec(1, n, BC.PERIODIC), c, corner_scaled)


def neumann_operator_1d(n: int, c: float) -> DiscreteOperator:
    return make_operator(GridSpec(1, n, BC.NEUMANN), c)


def mixed_operator_1d(n: int, c: float) -> DiscreteOperator:
    """Dirichlet at x=0, Neumann at x=1; n unknowns at x_1..x_n."""
    return make_operator(GridSpec(1, n, BC.MIXED), c)


def assemble_tensor_operator(op1d: DiscreteOperator, d: int, c: float | None = None) -> DiscreteOperator:
    if op1d.grid.d != 1:
        raise ValueError(f"expected a 1D operator, got d={op1d.grid.d}")
    grid = GridSpec(d, op1d.grid.n, op1d.grid.bc)
    return DiscreteOperator(grid, op1d.stencil, op1d.c if c is None else c)


def materialize_dense(op, limit: int = DENSE_LIMIT) -> np.ndarray:
    return materialize(op, limit)

