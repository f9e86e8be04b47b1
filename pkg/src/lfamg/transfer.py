"""Full-weighting restriction and d-linear interpolation.

Both act direction by direction.  Coarse node K sits on fine node 2K.  Values
at nodes outside the stored window come from the boundary symmetry of the
grid (zero for Dirichlet ends, mirrored for Neumann ends, wrapped for
periodic grids), see :func:`lfamg.extension.node_lookup`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .extension import node_lookup
from .grid import GridSpec, as_field, as_flat, checked
from .linear import LinearMap


def _gather(field: np.ndarray, grid: GridSpec, nodes: np.ndarray) -> np.ndarray:
    """Values at node indices ``nodes`` along axis 0 of ``field``."""
    idx, sign = node_lookup(grid, nodes)
    shape = (len(nodes),) + (1,) * (field.ndim - 1)
    return field[idx] * sign.reshape(shape)


def _restrict_axis(field, fine: GridSpec, coarse: GridSpec, axis: int):
    u = np.moveaxis(field, axis, 0)
    K = 2 * coarse.nodes()
    out = 0.25 * (_gather(u, fine, K - 1) + 2.0 * _gather(u, fine, K) + _gather(u, fine, K + 1))
    return np.moveaxis(out, 0, axis)


def _interpolate_axis(field, coarse: GridSpec, fine: GridSpec, axis: int):
    U = np.moveaxis(field, axis, 0)
    k = fine.nodes()
    out = 0.5 * (_gather(U, coarse, k // 2) + _gather(U, coarse, (k + 1) // 2))
    return np.moveaxis(out, 0, axis)


def full_weighting_restrict(u, fine: GridSpec) -> np.ndarray:
    """Tensor-product ¼(1, 2, 1) restriction to ``fine.coarse()``."""
    coarse = fine.coarse()
    field = as_field(checked(u, fine), fine)
    for axis in range(fine.d):
        field = _restrict_axis(field, fine, coarse, axis)
    return as_flat(field, coarse)


def dlinear_interpolate(u_coarse, fine: GridSpec) -> np.ndarray:
    """Tensor-product linear interpolation from ``fine.coarse()`` to ``fine``."""
    coarse = fine.coarse()
    field = as_field(checked(u_coarse, coarse), coarse)
    for axis in range(fine.d):
        field = _interpolate_axis(field, coarse, fine, axis)
    return as_flat(field, fine)


@dataclass(frozen=True)
class TransferSpec:
    restriction: str = "full_weighting"
    prolongation: str = "dlinear"

    def __post_init__(self):
        if self.restriction != "full_weighting" or self.prolongation != "dlinear":
            raise ValueError("only full weighting with d-linear interpolation is supported")

    def restrict(self, u, fine: GridSpec) -> np.ndarray:
        return full_weighting_restrict(u, fine)

    def prolongate(self, u_coarse, fine: GridSpec) -> np.ndarray:
        return dlinear_interpolate(u_coarse, fine)


def restriction_map(fine: GridSpec) -> LinearMap:
    return LinearMap((fine.coarse().size, fine.size), lambda u: full_weighting_restrict(u, fine), "FW")


def prolongation_map(fine: GridSpec) -> LinearMap:
    return LinearMap((fine.size, fine.coarse().size), lambda u: dlinear_interpolate(u, fine), "P")
