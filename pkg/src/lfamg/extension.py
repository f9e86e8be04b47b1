"""Symmetric extensions of boundary-value grids into periodic ones.

A Dirichlet grid function is extended oddly about x=0 and x=1, a Neumann one
evenly, and a mixed (Dirichlet at 0, Neumann at 1) one evenly about x=1 and
then oddly about x=0, which gives period 4 instead of 2.  In every case the
extension E has entries in {0, +1, -1} and the restriction is
R = (E^T E)^{-1} E^T, a diagonal rescaling of E^T, so that R E = I exactly.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import BC, GridSpec, as_field, as_flat, checked
from .linear import DENSE_LIMIT, SizeGuardError, materialize


class Kind(str, enum.Enum):
    ODD = "odd"
    EVEN = "even"
    MIXED = "mixed"


KIND_FOR_BC = {BC.DIRICHLET: Kind.ODD, BC.NEUMANN: Kind.EVEN, BC.MIXED: Kind.MIXED}
BC_FOR_KIND = {v: k for k, v in KIND_FOR_BC.items()}


def node_lookup(grid: GridSpec, nodes) -> tuple[np.ndarray, np.ndarray]:
    """Storage index and sign holding the value at integer node ``j``.

    Nodes outside the stored window are resolved through the symmetry of the
    boundary kind; a sign of 0 marks a node whose value is pinned to zero.
    """
    bc, n = grid.bc, grid.n
    j = np.asarray(nodes, dtype=int)
    sign = np.ones_like(j)
    if bc is BC.PERIODIC:
        return (j - 1) % grid.m, sign
    if bc is BC.NEUMANN:
        k = j % (2 * n)
        k = np.where(k > n, 2 * n - k, k)
        return k, sign
    if bc is BC.DIRICHLET:
        k = j % (2 * n)
        sign = np.where(k > n, -1, 1)
        k = np.where(k > n, 2 * n - k, k)
        sign = np.where((k == 0) | (k == n), 0, sign)
        return np.where(sign == 0, 0, k - 1), sign
    if bc is BC.MIXED:
        k = j % (4 * n)
        sign = np.where(k > 2 * n, -1, 1)
        k = np.where(k > 2 * n, 4 * n - k, k)
        sign = np.where((k == 0) | (k == 2 * n), 0, sign)
        k = np.where(k > n, 2 * n - k, k)
        return np.where(sign == 0, 0, k - 1), sign
    raise ValueError(f"unsupported boundary kind {bc}")


def _apply_along_axes(M: np.ndarray, v: np.ndarray, grid_in: GridSpec, grid_out: GridSpec) -> np.ndarray:
    field_ = as_field(v, grid_in)
    for axis in range(grid_in.d):
        field_ = np.moveaxis(np.tensordot(M, field_, axes=([1], [axis])), 0, axis)
    return as_flat(field_, grid_out)


@dataclass(frozen=True)
class ExtensionPair:
    """Extension E and restriction R between a boundary grid and its periodic embedding."""

    kind: Kind
    n: int
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        GridSpec(self.d, self.n, BC.DIRICHLET)  # validates d and n

    @classmethod
    def for_grid(cls, grid: GridSpec) -> "ExtensionPair":
        if grid.bc not in KIND_FOR_BC:
            raise ValueError(f"no extension for {grid.bc.value} grids")
        return cls(KIND_FOR_BC[grid.bc], grid.n, grid.d)

    @property
    def source(self) -> GridSpec:
        return GridSpec(self.d, self.n, BC_FOR_KIND[self.kind])

    @property
    def target(self) -> GridSpec:
        return GridSpec(self.d, self.n, BC.PERIODIC, span=2 if self.kind is Kind.MIXED else 1)

    def coarse(self) -> "ExtensionPair":
        return ExtensionPair(self.kind, self.source.coarse().n, self.d)

    @property
    def E1(self) -> np.ndarray:
        """1D extension matrix, shape (N, m)."""
        src, tgt = self.source, self.target
        idx, sign = node_lookup(src, tgt.nodes())
        E = np.zeros((tgt.m, src.m))
        rows = np.nonzero(sign)[0]
        E[rows, idx[rows]] = sign[rows]
        return E

    @property
    def R1(self) -> np.ndarray:
        E = self.E1
        return E.T / np.sum(E * E, axis=0)[:, None]

    def extend(self, u) -> np.ndarray:
        u = checked(u, self.source)
        return _apply_along_axes(self.E1, u, self.source, self.target)

    def restrict(self, v) -> np.ndarray:
        v = checked(v, self.target)
        return _apply_along_axes(self.R1, v, self.target, self.source)

    def projector_defect(self, v) -> np.ndarray:
        """max |E R v - v| per column (a scalar for a single vector)."""
        v = np.asarray(v)
        return np.max(np.abs(self.extend(self.restrict(v)) - v), axis=0)


def odd_extend(u, n: int, d: int = 1) -> np.ndarray:
    return ExtensionPair(Kind.ODD, n, d).extend(u)


def odd_restrict(v, n: int, d: int = 1) -> np.ndarray:
    return ExtensionPair(Kind.ODD, n, d).restrict(v)


def even_extend(u, n: int, d: int = 1) -> np.ndarray:
    return ExtensionPair(Kind.EVEN, n, d).extend(u)


def even_restrict(v, n: int, d: int = 1) -> np.ndarray:
    return ExtensionPair(Kind.EVEN, n, d).restrict(v)


def mixed_extend(u, n: int, d: int = 1) -> np.ndarray:
    return ExtensionPair(Kind.MIXED, n, d).extend(u)


def mixed_restrict(v, n: int, d: int = 1) -> np.ndarray:
    return ExtensionPair(Kind.MIXED, n, d).restrict(v)


def in_range_of_extension(v, pair: ExtensionPair, tol: float = 1e-12) -> bool:
    return bool(np.max(pair.projector_defect(v)) <= tol)


@dataclass
class CompatReport:
    name: str
    pair_in: str
    pair_out: str
    operator_defect: float
    operator_scale: float
    invariance_defect: float
    invariance_scale: float
    worst_basis_vector: int | None
    tol: float
    verdict: bool
    probe: str = field(default="")

    @property
    def relative_operator_defect(self) -> float:
        return self.operator_defect / max(1.0, self.operator_scale)

    @property
    def relative_invariance_defect(self) -> float:
        return self.invariance_defect / max(1.0, self.invariance_scale)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["relative_operator_defect"] = self.relative_operator_defect
        out["relative_invariance_defect"] = self.relative_invariance_defect
        return out


def check_lfa_compatible(
    M_D,
    M_P,
    pair_in: ExtensionPair,
    pair_out: ExtensionPair | None = None,
    tol: float = 1e-11,
    name: str = "",
    limit: int = DENSE_LIMIT,
) -> CompatReport:
    """Check R_out M_P E_in == M_D and M_P(range E_in) ⊂ range E_out.

    Both checks sweep every basis vector of the source space.  Defects are
    compared against ``tol`` relative to max(1, largest entry involved).
    """
    pair_out = pair_in if pair_out is None else pair_out
    m = pair_in.source.size
    if m > limit:
        raise SizeGuardError(f"source space has {m} unknowns (limit {limit})")
    if M_D.shape != (pair_out.source.size, m):
        raise ValueError(f"M_D has shape {M_D.shape}, expected {(pair_out.source.size, m)}")
    if M_P.shape != (pair_out.target.size, pair_in.target.size):
        raise ValueError(f"M_P has shape {M_P.shape}, expected {(pair_out.target.size, pair_in.target.size)}")

    dense_D = materialize(M_D, limit)
    images = np.asarray(M_P.apply(pair_in.extend(np.eye(m))))
    compressed = pair_out.restrict(images)
    op_defect = float(np.max(np.abs(compressed - dense_D)))
    column_defects = np.atleast_1d(pair_out.projector_defect(images))
    worst = int(np.argmax(column_defects))
    inv_defect = float(column_defects[worst])
    op_scale = float(np.max(np.abs(dense_D)))
    inv_scale = float(np.max(np.abs(images)))
    verdict = op_defect <= tol * max(1.0, op_scale) and inv_defect <= tol * max(1.0, inv_scale)
    return CompatReport(
        name=name,
        pair_in=f"{pair_in.kind.value}(n={pair_in.n}, d={pair_in.d})",
        pair_out=f"{pair_out.kind.value}(n={pair_out.n}, d={pair_out.d})",
        operator_defect=op_defect,
        operator_scale=op_scale,
        invariance_defect=inv_defect,
        invariance_scale=inv_scale,
        worst_basis_vector=worst if inv_defect > tol * max(1.0, inv_scale) else None,
        tol=tol,
        verdict=bool(verdict),
        probe=f"exhaustive sweep over {m} basis vectors",
    )
