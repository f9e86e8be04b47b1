"""Local Fourier analysis on harmonic spaces of periodic grids.

Modes are plane waves in node coordinates, ``phi_theta(k) = exp(i theta·k)``
at node multi-index k.  With this phase convention a coarse mode
``exp(i 2theta·K)`` sits on fine node 2K for every harmonic of theta, so the
full-weighting and interpolation symbols are real.

Operator, Jacobi and transfer symbols have closed forms.  Smoother symbols
are extracted numerically by applying the smoother to the harmonic modes and
projecting back; the projection residual is checked, so a smoother that does
not leave the harmonic space invariant is reported instead of silently
approximated.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import BC, GridSpec, node_phase
from .multigrid import CycleSpec
from .operators import DiscreteOperator, make_operator
from .smoothers import SmootherSpec, error_propagator

_EPS = 1e-12


class SymbolExtractionError(RuntimeError):
    """The harmonic modes do not span an invariant subspace of the operator."""


def wrap_frequency(theta: float) -> float:
    """Map to (-pi, pi]."""
    w = (theta + math.pi) % (2 * math.pi) - math.pi  # [-pi, pi)
    return math.pi if abs(w + math.pi) < _EPS else w


def harmonic_shifts(d: int) -> list[tuple[int, ...]]:
    """s in {0,1}^d, first direction fastest."""
    return [tuple(reversed(p)) for p in itertools.product((0, 1), repeat=d)]


def harmonic_tuple(theta_low, d: int | None = None) -> list[tuple[float, ...]]:
    theta_low = tuple(float(t) for t in np.atleast_1d(theta_low))
    d = len(theta_low) if d is None else d
    if len(theta_low) != d:
        raise ValueError(f"frequency has {len(theta_low)} components, expected {d}")
    for t in theta_low:
        if not -math.pi / 2 - _EPS <= t < math.pi / 2 - _EPS:
            raise ValueError(f"low frequency component {t} outside [-pi/2, pi/2)")
    return [tuple(wrap_frequency(t + math.pi * sj) for t, sj in zip(theta_low, s)) for s in harmonic_shifts(d)]


@dataclass(frozen=True)
class FrequencySet:
    """Low frequencies 2πk/N in [-π/2, π/2) per direction, sorted lexicographically."""

    N: int
    d: int

    def __post_init__(self):
        if self.N % 4:
            raise ValueError(f"N must be divisible by 4, got {self.N}")

    @property
    def axis(self) -> list[float]:
        return [2 * math.pi * k / self.N for k in range(-self.N // 4, self.N // 4)]

    def __iter__(self):
        return iter(itertools.product(self.axis, repeat=self.d))

    def __len__(self):
        return (self.N // 2) ** self.d


@dataclass
class SymbolBlock:
    base: tuple[float, ...]
    harmonics: list[tuple[float, ...]]
    matrix: np.ndarray
    residual: float = 0.0

    @property
    def spectral_radius(self) -> float:
        if self.matrix.size == 0:
            return 0.0
        return float(np.max(np.abs(np.linalg.eigvals(self.matrix))))


def _require_periodic(grid: GridSpec):
    if grid.bc is not BC.PERIODIC:
        raise ValueError("symbols are defined for periodic operators only")


def laplacian_symbol(op: DiscreteOperator, theta) -> float:
    """Symbol of the reaction-free part, summed over directions."""
    _require_periodic(op.grid)
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (op.grid.d,))
    st = op.stencil
    return float(np.sum(st.center + 2.0 * st.off * np.cos(theta)))


def operator_symbol(op: DiscreteOperator, theta) -> float:
    return laplacian_symbol(op, theta) + op.c


def jacobi_symbol(op: DiscreteOperator, omega: float, theta) -> float:
    return 1.0 - omega * operator_symbol(op, theta) / op.diagonal


def restriction_symbol(theta_low) -> np.ndarray:
    """Full-weighting weights over the harmonics of ``theta_low`` (row vector)."""
    theta_low = np.atleast_1d(np.asarray(theta_low, dtype=float))
    harmonics = np.array(harmonic_tuple(theta_low))
    return np.prod(0.5 * (1.0 + np.cos(harmonics)), axis=1)


def prolongation_symbol(theta_low) -> np.ndarray:
    """Interpolation coefficients onto the harmonics (column vector).

    In the unit-modulus mode basis these coincide with the restriction
    weights; the factor 2^d of P = 2^d R^T is absorbed by the fine/coarse
    grid size ratio.
    """
    return restriction_symbol(theta_low)


def transfer_symbol(kind: str, theta_low) -> np.ndarray:
    if kind in ("restriction", "full_weighting", "fw"):
        return restriction_symbol(theta_low)
    if kind in ("prolongation", "interpolation", "dlinear"):
        return prolongation_symbol(theta_low)
    raise ValueError(f"unknown transfer kind {kind!r}")


def harmonic_basis(grid: GridSpec, theta_low) -> np.ndarray:
    _require_periodic(grid)
    return np.stack([node_phase(grid, t) for t in harmonic_tuple(theta_low, grid.d)], axis=1)


def extract_blocks(propagator, grid: GridSpec, lows, tol: float = 1e-11, chunk: int = 512) -> list[SymbolBlock]:
    """Compress ``propagator`` onto the harmonic space of every frequency in ``lows``."""
    _require_periodic(grid)
    lows = [tuple(float(t) for t in np.atleast_1d(th)) for th in lows]
    k = 2**grid.d
    per_chunk = max(1, chunk // k)
    blocks = []
    for start in range(0, len(lows), per_chunk):
        group = lows[start:start + per_chunk]
        basis = np.concatenate([harmonic_basis(grid, th) for th in group], axis=1)
        images = np.asarray(propagator.apply(basis))
        for i, th in enumerate(group):
            Phi = basis[:, i * k:(i + 1) * k]
            Y = images[:, i * k:(i + 1) * k]
            block = Phi.conj().T @ Y / grid.size
            residual = float(np.max(np.abs(Y - Phi @ block), initial=0.0))
            scale = max(1.0, float(np.max(np.abs(Y), initial=0.0)))
            if residual > tol * scale:
                raise SymbolExtractionError(
                    f"harmonic space of theta={th} is not invariant (residual {residual:.3e})"
                )
            blocks.append(SymbolBlock(th, harmonic_tuple(th, grid.d), block, residual / scale))
    return blocks


def extract_block(propagator, grid: GridSpec, theta_low, tol: float = 1e-11) -> SymbolBlock:
    return extract_blocks(propagator, grid, [theta_low], tol)[0]


def smoother_symbol_block(spec: SmootherSpec, A: DiscreteOperator, theta_low, tol: float = 1e-11) -> SymbolBlock:
    _require_periodic(A.grid)
    return extract_block(error_propagator(spec, A), A.grid, theta_low, tol)


def smoother_symbol_blocks(spec: SmootherSpec, A: DiscreteOperator, lows=None, tol: float = 1e-11) -> list[SymbolBlock]:
    _require_periodic(A.grid)
    lows = list(FrequencySet(A.grid.m, A.grid.d)) if lows is None else lows
    return extract_blocks(error_propagator(spec, A), A.grid, lows, tol)


def coarse_correction_symbol(A: DiscreteOperator, theta_low, coarse: str = "rediscretized") -> np.ndarray:
    """I - P Â_2h^{-1} R Â_h on the harmonic space.

    ``coarse="rediscretized"`` uses the symbol of the coarse-grid stencil at
    2θ; ``coarse="galerkin"`` uses R Â_h P instead, for which the correction
    is an exact projector.
    """
    harmonics = harmonic_tuple(theta_low, A.grid.d)
    a_fine = np.array([operator_symbol(A, t) for t in harmonics])
    R = restriction_symbol(theta_low)[None, :]
    P = prolongation_symbol(theta_low)[:, None]
    if coarse == "rediscretized":
        a_coarse = operator_symbol(A.coarse(), 2.0 * np.atleast_1d(np.asarray(theta_low, dtype=float)))
    elif coarse == "galerkin":
        a_coarse = float(((R * a_fine[None, :]) @ P).item())
    else:
        raise ValueError(f"unknown coarse operator kind {coarse!r}")
    if abs(a_coarse) < _EPS:
        raise ZeroDivisionError(f"singular coarse symbol at theta={theta_low}")
    return np.eye(len(harmonics)) - (P @ R) * (a_fine[None, :] / a_coarse)


def two_grid_symbol_block(cycle: CycleSpec, A: DiscreteOperator, theta_low, *, nu1: int | None = None,
                          nu2: int | None = None, smoother_block: SymbolBlock | None = None,
                          coarse: str = "rediscretized") -> SymbolBlock:
    """S^nu2 (I - P Â_2h^{-1} R Â_h) S^nu1 on the harmonic space of ``theta_low``.

    ``nu1``/``nu2`` override the cycle's smoothing counts (both may be zero).
    """
    _require_periodic(A.grid)
    nu1 = cycle.nu1 if nu1 is None else nu1
    nu2 = cycle.nu2 if nu2 is None else nu2
    K = coarse_correction_symbol(A, theta_low, coarse)
    if nu1 or nu2:
        S = smoother_block if smoother_block is not None else smoother_symbol_block(cycle.smoother, A, theta_low)
        K = np.linalg.matrix_power(S.matrix, nu2) @ K @ np.linalg.matrix_power(S.matrix, nu1)
    theta_low = tuple(float(t) for t in np.atleast_1d(theta_low))
    return SymbolBlock(theta_low, harmonic_tuple(theta_low, A.grid.d), K)


@dataclass
class LFAResult:
    rho: float
    argmax: tuple[float, ...]
    table: list[tuple[tuple[float, ...], float]] = field(default_factory=list)

    def argmax_is_sine_representable(self) -> bool:
        """True if no component of the maximizer is 0 mod π (a mode present in the odd range)."""
        return all(abs(math.sin(t)) > 1e-12 for t in self.argmax)


def _select_max(values) -> tuple[float, tuple[float, ...]]:
    best, arg = -1.0, ()
    for theta, rho in values:
        # lows arrive in lexicographic order; ties keep the first
        if rho > best * (1 + 1e-13) + 1e-300 or not arg:
            best, arg = rho, theta
    return best, arg


def lfa_convergence_factor(cycle: CycleSpec, grid: GridSpec, c: float) -> LFAResult:
    """Two-grid convergence factor predicted on the discrete frequencies of a periodic grid."""
    _require_periodic(grid)
    A = make_operator(grid, c)
    lows = list(FrequencySet(grid.m, grid.d))
    smoother_blocks = smoother_symbol_blocks(cycle.smoother, A, lows)
    table = []
    for th, sb in zip(lows, smoother_blocks):
        block = two_grid_symbol_block(cycle, A, th, smoother_block=sb)
        table.append((th, block.spectral_radius))
    rho, arg = _select_max(table)
    return LFAResult(rho, arg, table)


def lfa_smoothing_factor(spec: SmootherSpec, grid: GridSpec, c: float) -> LFAResult:
    """max over low frequencies of ρ(Q Ŝ), Q the projector onto the high harmonics (s ≠ 0)."""
    _require_periodic(grid)
    A = make_operator(grid, c)
    lows = list(FrequencySet(grid.m, grid.d))
    Q = np.eye(2**grid.d)
    Q[0, 0] = 0.0
    table = []
    for th, sb in zip(lows, smoother_symbol_blocks(spec, A, lows)):
        table.append((th, float(np.max(np.abs(np.linalg.eigvals(Q @ sb.matrix))))))
    rho, arg = _select_max(table)
    return LFAResult(rho, arg, table)


def embedding_grid(grid: GridSpec) -> GridSpec:
    """Periodic grid whose symmetric sub-window is ``grid``."""
    if grid.bc is BC.PERIODIC:
        return grid
    return GridSpec(grid.d, grid.n, BC.PERIODIC, span=2 if grid.bc is BC.MIXED else 1)
