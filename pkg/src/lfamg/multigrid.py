"""Two-grid and V-cycle iterations, stationary iterations and rate measurement."""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridSpec, checked
from .linear import DenseSolver, LinearMap, materialize
from .operators import DiscreteOperator, make_operator
from .smoothers import SmootherSpec, smoother_step
from .transfer import TransferSpec


class CycleType(str, enum.Enum):
    TWO_GRID = "two_grid"
    V_CYCLE = "v_cycle"


@dataclass(frozen=True)
class CycleSpec:
    type: CycleType = CycleType.TWO_GRID
    nu1: int = 1
    nu2: int = 0
    smoother: SmootherSpec = field(default_factory=SmootherSpec)
    transfer: TransferSpec = field(default_factory=TransferSpec)
    coarsest_n: int = 2

    def __post_init__(self):
        kind = str(getattr(self.type, "value", self.type)).lower().replace("-", "_")
        kind = {"twogrid": "two_grid", "vcycle": "v_cycle", "v": "v_cycle", "tg": "two_grid"}.get(kind, kind)
        object.__setattr__(self, "type", CycleType(kind))
        if self.nu1 < 0 or self.nu2 < 0 or self.nu1 + self.nu2 < 1:
            raise ValueError(f"need nu1, nu2 >= 0 and nu1 + nu2 >= 1, got ({self.nu1}, {self.nu2})")
        if self.coarsest_n < 2 or self.coarsest_n % 2:
            raise ValueError(f"coarsest_n must be even and >= 2, got {self.coarsest_n}")


@dataclass(frozen=True)
class Level:
    grid: GridSpec
    A: DiscreteOperator


class Hierarchy:
    """Rediscretized operators from fine to coarse; consecutive levels halve n."""

    def __init__(self, levels: list[Level]):
        if not levels:
            raise ValueError("empty hierarchy")
        for fine, coarse in zip(levels, levels[1:]):
            if coarse.grid != fine.grid.coarse() or coarse.A.c != fine.A.c:
                raise ValueError("levels must halve n and share bc and c")
        self.levels = list(levels)
        self._truncated: dict[int, Hierarchy] = {len(levels): self}

    @classmethod
    def build(cls, grid: GridSpec, c: float, coarsest_n: int = 2, corner_scaled: bool = True,
              depth: int | None = None) -> "Hierarchy":
        """Levels n, n/2, ... down to ``coarsest_n`` (or ``depth`` levels)."""
        n = grid.n
        if n & (n - 1):
            raise ValueError(f"multigrid needs n a power of two, got {n}")
        if n < 2 * coarsest_n:
            raise ValueError(f"n={n} too small for coarsest_n={coarsest_n}")
        levels = [Level(grid, make_operator(grid, c, corner_scaled))]
        while levels[-1].grid.n > coarsest_n and (depth is None or len(levels) < depth):
            A = levels[-1].A.coarse()
            levels.append(Level(A.grid, A))
        if depth is not None and len(levels) < depth:
            raise ValueError(f"cannot build {depth} levels from n={n}")
        return cls(levels)

    @classmethod
    def for_cycle(cls, grid: GridSpec, c: float, cycle: CycleSpec, corner_scaled: bool = True) -> "Hierarchy":
        if cycle.type is CycleType.TWO_GRID:
            return cls.build(grid, c, min(cycle.coarsest_n, grid.n // 2), corner_scaled, depth=2)
        return cls.build(grid, c, cycle.coarsest_n, corner_scaled)

    def truncated(self, depth: int) -> "Hierarchy":
        if depth < 1 or depth > len(self.levels):
            raise ValueError(f"depth {depth} not in [1, {len(self.levels)}]")
        if depth not in self._truncated:
            self._truncated[depth] = Hierarchy(self.levels[:depth])
        return self._truncated[depth]

    def __len__(self):
        return len(self.levels)

    @property
    def fine(self) -> Level:
        return self.levels[0]

    @functools.cached_property
    def coarse_solver(self) -> DenseSolver:
        return DenseSolver(self.levels[-1].A.dense())


def _cycle(cycle: CycleSpec, hier: Hierarchy, level: int, f: np.ndarray, u: np.ndarray) -> np.ndarray:
    A = hier.levels[level].A
    if level == len(hier) - 1:
        return u + hier.coarse_solver.apply(f - A.apply(u))
    grid = hier.levels[level].grid
    for _ in range(cycle.nu1):
        u = smoother_step(cycle.smoother, A, u, f)
    r_coarse = cycle.transfer.restrict(f - A.apply(u), grid)
    if level + 1 == len(hier) - 1:
        e_coarse = hier.coarse_solver.apply(r_coarse)
    else:
        e_coarse = _cycle(cycle, hier, level + 1, r_coarse, np.zeros_like(r_coarse))
    u = u + cycle.transfer.prolongate(e_coarse, grid)
    for _ in range(cycle.nu2):
        u = smoother_step(cycle.smoother, A, u, f)
    return u


def v_cycle_apply(cycle: CycleSpec, hierarchy: Hierarchy, f, u) -> np.ndarray:
    """One V(nu1, nu2) cycle over every level of ``hierarchy``."""
    if len(hierarchy) < 2:
        raise ValueError("a cycle needs at least two levels")
    grid = hierarchy.fine.grid
    f, u = checked(f, grid), checked(u, grid)
    if f.shape != u.shape:
        f, u = np.broadcast_arrays(f, u)
    return _cycle(cycle, hierarchy, 0, f, u)


def two_grid_apply(cycle: CycleSpec, hierarchy: Hierarchy, f, u) -> np.ndarray:
    return v_cycle_apply(cycle, hierarchy.truncated(2), f, u)


def cycle_apply(cycle: CycleSpec, hierarchy: Hierarchy, f, u) -> np.ndarray:
    if cycle.type is CycleType.TWO_GRID:
        return two_grid_apply(cycle, hierarchy, f, u)
    return v_cycle_apply(cycle, hierarchy, f, u)


def cycle_error_propagator(cycle: CycleSpec, hierarchy: Hierarchy) -> LinearMap:
    """e -> e after one cycle with f = 0."""
    shape = hierarchy.fine.A.shape
    return LinearMap(shape, lambda e: cycle_apply(cycle, hierarchy, np.zeros_like(e), e), f"E[{cycle.type.value}]")


def two_grid_error_propagator(cycle: CycleSpec, hierarchy: Hierarchy) -> LinearMap:
    tg = CycleSpec(CycleType.TWO_GRID, cycle.nu1, cycle.nu2, cycle.smoother, cycle.transfer, cycle.coarsest_n)
    return cycle_error_propagator(tg, hierarchy.truncated(2))


def cycle_iterator(cycle: CycleSpec, hierarchy: Hierarchy) -> LinearMap:
    """The iterator B of one cycle: f -> cycle(f, u=0)."""
    shape = hierarchy.fine.A.shape
    return LinearMap(shape, lambda f: cycle_apply(cycle, hierarchy, f, np.zeros_like(f)), f"B[{cycle.type.value}]")


def stationary_iterate(B, A, f, u0, k: int) -> np.ndarray:
    """Iterates u^{j+1} = u^j + B(f - A u^j); returns array of shape (k+1, size)."""
    if k < 1:
        raise ValueError("need at least one step")
    f, u = np.asarray(f), np.asarray(u0)
    if f.shape != u.shape or f.shape[0] != A.shape[0] or B.shape != A.shape:
        raise ValueError("size mismatch between B, A, f and u0")
    history = [u]
    for _ in range(k):
        u = u + B.apply(f - A.apply(u))
        history.append(u)
    return np.array(history)


@dataclass
class RateEstimate:
    rho: float
    ratios: np.ndarray
    norms: np.ndarray
    diverged: bool = False


_LOG_OVERFLOW = math.log(1e150)


def measure_asymptotic_rate(propagator, size: int | None = None, iterations: int = 100, seed: int = 0,
                            transient: int = 20, window: int = 10) -> RateEstimate:
    """Power iteration with renormalization.

    The rate is the geometric mean of the last ``window`` norm ratios; the
    first ``transient`` ratios are never used.  ``norms`` holds the error
    norm relative to the start, length ``iterations + 1``.  If that norm
    exceeds 1e150 the run stops early, ``diverged`` is set and the rate of
    the last steps taken (> 1) is reported.
    """
    if iterations < 30:
        raise ValueError("need at least 30 iterations")
    if iterations < transient + window:
        raise ValueError("iterations must cover the transient and the averaging window")
    size = propagator.shape[1] if size is None else size
    x = np.random.default_rng(seed).standard_normal(size)
    x /= np.linalg.norm(x)
    ratios = np.zeros(iterations)
    log_norm = np.full(iterations + 1, np.nan)
    log_norm[0] = 0.0
    diverged = False
    done = iterations
    for k in range(iterations):
        y = propagator.apply(x)
        r = float(np.linalg.norm(y))
        if not math.isfinite(r):
            diverged, done = True, k
            break
        ratios[k] = r
        if r == 0.0:
            log_norm[k + 1:] = -np.inf
            done = iterations
            break
        log_norm[k + 1] = log_norm[k] + math.log(r)
        if log_norm[k + 1] > _LOG_OVERFLOW:
            diverged, done = True, k + 1
            break
        x = y / r
    tail = ratios[max(0, done - window):done]
    if diverged and tail.size == 0:
        rho = math.inf
    elif tail.size == 0 or np.any(tail == 0.0):
        rho = 0.0
    else:
        rho = float(np.exp(np.mean(np.log(tail))))
    if diverged:
        ratios, log_norm = ratios[:done], log_norm[:done + 1]
    with np.errstate(over="ignore"):
        norms = np.exp(log_norm)
    return RateEstimate(rho, ratios, norms, diverged)


def dense_spectrum(propagator, limit: int = 4096) -> np.ndarray:
    """Eigenvalues sorted by decreasing modulus."""
    M = materialize(propagator, limit)
    eig = np.linalg.eigvals(M)
    return eig[np.argsort(-np.abs(eig), kind="stable")]


def dense_spectral_radius(propagator, limit: int = 4096) -> float:
    eig = dense_spectrum(propagator, limit)
    return float(np.abs(eig[0])) if eig.size else 0.0


def spectral_gap(eigenvalues: np.ndarray, rtol: float = 1e-8) -> float:
    """1 - |lambda_2| / |lambda_1| where lambda_2 is the largest eigenvalue distinct from lambda_1.

    Equal-modulus but distinct eigenvalues (e.g. -lambda_1 or a conjugate)
    give a gap of zero.
    """
    if eigenvalues.size == 0 or abs(eigenvalues[0]) == 0.0:
        return 1.0
    lead = eigenvalues[0]
    scale = abs(lead)
    others = eigenvalues[np.abs(eigenvalues - lead) > rtol * scale]
    if others.size == 0:
        return 1.0
    return float(1.0 - np.max(np.abs(others)) / scale)


@dataclass
class ConvergenceReport:
    config: dict
    rho_lfa: float | None
    rho_dense: float | None
    rho_observed: float
    residual_history: list[float]
    iterations: int
    seed: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.residual_history) != self.iterations + 1:
            raise ValueError("history length must equal iterations + 1")

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rho_lfa": self.rho_lfa,
            "rho_dense": self.rho_dense,
            "rho_observed": self.rho_observed,
            "residual_history": list(self.residual_history),
            "iterations": self.iterations,
            "seed": self.seed,
            **self.extra,
        }
