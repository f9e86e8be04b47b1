"""Relaxation methods for the constant-coefficient operators.

Every smoother is an affine map ``u -> u + S(f - A u)``.  Colorings use the
parity of the node-index sum, so a periodic grid colored this way restricts
to the same coloring on any symmetric sub-window (N is always even).
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, as_field, as_flat, checked
from .linear import DenseSolver, LinearMap
from .operators import DiscreteOperator


class SmootherKind(str, enum.Enum):
    JACOBI = "jacobi"
    RBGS = "rbgs"
    LINE = "line"
    POLYNOMIAL = "polynomial"
    EXACT = "exact"  # S = A^{-1}; reference smoother for tests and limits


_ALIASES = {
    "weighted_jacobi": "jacobi",
    "weightedjacobi": "jacobi",
    "redblackgs": "rbgs",
    "red_black_gs": "rbgs",
    "red_black_gauss_seidel": "rbgs",
    "linerelaxation": "line",
    "line_relaxation": "line",
    "richardson": "polynomial",
}


@dataclass(frozen=True)
class SmootherSpec:
    """Smoother selection.

    ``omega`` is used by Jacobi, ``direction`` by line relaxation and
    ``coefficients`` by the polynomial smoother, whose k-th stage is
    ``u += coefficients[k] * D^{-1} (f - A u)``.  ``steps`` repeats the
    whole smoother.
    """

    kind: SmootherKind = SmootherKind.JACOBI
    omega: float = 2.0 / 3.0
    steps: int = 1
    direction: int = 0
    coefficients: tuple[float, ...] = field(default=(0.6, 0.9))

    def __post_init__(self):
        kind = str(getattr(self.kind, "value", self.kind)).lower()
        object.__setattr__(self, "kind", SmootherKind(_ALIASES.get(kind, kind)))
        object.__setattr__(self, "coefficients", tuple(float(a) for a in self.coefficients))
        if self.kind is SmootherKind.JACOBI and not 0.0 < self.omega <= 1.0:
            raise ValueError(f"Jacobi weight must lie in (0, 1], got {self.omega}")
        if self.kind is SmootherKind.POLYNOMIAL and not self.coefficients:
            raise ValueError("polynomial smoother needs at least one coefficient")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be a positive integer, got {self.steps}")
        if self.direction < 0:
            raise ValueError("line direction must be non-negative")

    @property
    def label(self) -> str:
        if self.kind is SmootherKind.JACOBI:
            return f"jacobi(omega={self.omega:.6g})"
        if self.kind is SmootherKind.LINE:
            return f"line(direction={self.direction})"
        if self.kind is SmootherKind.POLYNOMIAL:
            return "polynomial(" + ",".join(f"{a:.6g}" for a in self.coefficients) + ")"
        return self.kind.value

    def validate_for(self, grid: GridSpec) -> None:
        if self.kind is SmootherKind.LINE:
            if grid.d < 2:
                raise ValueError("line relaxation needs d >= 2")
            if self.direction >= grid.d:
                raise ValueError(f"line direction {self.direction} not < d={grid.d}")


def _broadcast(mask: np.ndarray, v: np.ndarray) -> np.ndarray:
    return mask if v.ndim == 1 else mask[:, None]


@functools.lru_cache(maxsize=64)
def color_masks(grid: GridSpec, skip_axis: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(red, black) indicator vectors; red = even node-index sum.

    With ``skip_axis`` the parity ignores that axis, which colors whole lines.
    """
    parity = np.zeros(grid.shape, dtype=int)
    k = grid.nodes()
    for axis in range(grid.d):
        if axis == skip_axis:
            continue
        shape = [1] * grid.d
        shape[axis] = grid.m
        parity = parity + k.reshape(shape)
    red = as_flat((parity % 2 == 0).astype(float), grid)
    return red, 1.0 - red


@functools.lru_cache(maxsize=64)
def _line_inverse(A: DiscreteOperator, axis: int) -> np.ndarray:
    return np.linalg.inv(A.line_matrix(axis))


@functools.lru_cache(maxsize=64)
def exact_solver(A: DiscreteOperator) -> DenseSolver:
    return DenseSolver(A.dense())


def _line_solve(A: DiscreteOperator, r: np.ndarray, axis: int) -> np.ndarray:
    Linv = _line_inverse(A, axis)
    field = as_field(r, A.grid)
    out = np.moveaxis(np.tensordot(Linv, field, axes=([1], [axis])), 0, axis)
    return as_flat(out, A.grid)


def _sweep(spec: SmootherSpec, A: DiscreteOperator, u: np.ndarray, f: np.ndarray) -> np.ndarray:
    D = A.diagonal
    kind = spec.kind
    if kind is SmootherKind.JACOBI:
        return u + (spec.omega / D) * (f - A.apply(u))
    if kind is SmootherKind.POLYNOMIAL:
        for alpha in spec.coefficients:
            u = u + (alpha / D) * (f - A.apply(u))
        return u
    if kind is SmootherKind.RBGS:
        for mask in color_masks(A.grid):
            u = u + _broadcast(mask, u) * (f - A.apply(u)) / D
        return u
    if kind is SmootherKind.LINE:
        axis = spec.direction
        for mask in color_masks(A.grid, axis):
            u = u + _broadcast(mask, u) * _line_solve(A, f - A.apply(u), axis)
        return u
    if kind is SmootherKind.EXACT:
        return u + exact_solver(A).apply(f - A.apply(u))
    raise ValueError(f"unknown smoother {kind}")


def smoother_step(spec: SmootherSpec, A: DiscreteOperator, u, f) -> np.ndarray:
    """``spec.steps`` sweeps of the smoother; returns a new array."""
    spec.validate_for(A.grid)
    u = checked(u, A.grid)
    f = checked(f, A.grid)
    if u.shape != f.shape:
        raise ValueError(f"u and f shapes differ: {u.shape} vs {f.shape}")
    for _ in range(spec.steps):
        u = _sweep(spec, A, u, f)
    return u


def error_propagator(spec: SmootherSpec, A: DiscreteOperator) -> LinearMap:
    """e -> (I - S A) e."""
    spec.validate_for(A.grid)
    return LinearMap(A.shape, lambda e: smoother_step(spec, A, e, np.zeros_like(e)), f"I-SA[{spec.label}]")


def smoother_iterator(spec: SmootherSpec, A: DiscreteOperator) -> LinearMap:
    """The iterator S itself: f -> S f."""
    spec.validate_for(A.grid)
    return LinearMap(A.shape, lambda f: smoother_step(spec, A, np.zeros_like(f), f), f"S[{spec.label}]")
