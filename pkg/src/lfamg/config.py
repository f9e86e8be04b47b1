"""Experiment configuration: strict YAML schema with defaults and sweeps.

Every section is optional.  Unknown keys abort loading with the offending
dotted key in the message, and all constructor preconditions are checked at
load time so that no experiment starts from an invalid configuration.
"""

from __future__ import annotations

import copy
import dataclasses
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .grid import BC, GridSpec
from .multigrid import CycleSpec, CycleType
from .smoothers import SmootherSpec


class ConfigError(ValueError):
    """Invalid or unknown configuration entry."""


@dataclass(frozen=True)
class SmootherConfig:
    kind: str = "jacobi"
    omega: float = 2.0 / 3.0
    steps: int = 1
    direction: int = 0
    coefficients: tuple[float, ...] = (0.6, 0.9)


@dataclass(frozen=True)
class ProblemConfig:
    d: int = 1
    n: int = 8
    c: float = 1.0
    bc: str = "dirichlet"


@dataclass(frozen=True)
class CycleConfig:
    type: str = "two_grid"
    nu1: int = 1
    nu2: int = 0
    coarsest_n: int = 2
    smoother: SmootherConfig = field(default_factory=SmootherConfig)


@dataclass(frozen=True)
class ToleranceConfig:
    compat: float = 1e-11
    track: float = 1e-10
    lfa: float = 1e-10
    observed: float = 1e-3


@dataclass(frozen=True)
class RunConfig:
    iterations: int = 100
    seed: int = 0
    track_steps: int = 20
    track_iterator: str = "cycle"
    dense_limit: int = 4096
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)


@dataclass(frozen=True)
class OutputConfig:
    csv: str | None = None
    json: str | None = None


@dataclass(frozen=True)
class DebugConfig:
    corrupt_corners: bool = False
    mismatch_initial: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    cycle: CycleConfig = field(default_factory=CycleConfig)
    run: RunConfig = field(default_factory=RunConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    debug: DebugConfig = field(default_factory=DebugConfig)
    sweep: tuple[tuple[str, tuple], ...] = ()

    def __post_init__(self):
        validate(self)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.problem.d, self.problem.n, BC.parse(self.problem.bc))

    @property
    def smoother_spec(self) -> SmootherSpec:
        s = self.cycle.smoother
        return SmootherSpec(s.kind, s.omega, s.steps, s.direction, s.coefficients)

    @property
    def cycle_spec(self) -> CycleSpec:
        cy = self.cycle
        return CycleSpec(cy.type, cy.nu1, cy.nu2, self.smoother_spec, coarsest_n=cy.coarsest_n)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["cycle"]["smoother"]["coefficients"] = list(self.cycle.smoother.coefficients)
        out["sweep"] = {k: list(v) for k, v in self.sweep}
        return out

    def with_override(self, dotted: str, value) -> "ExperimentConfig":
        raw = self.to_dict()
        raw.pop("sweep")
        node = raw
        *parents, leaf = dotted.split(".")
        for key in parents:
            if not isinstance(node.get(key), dict):
                raise ConfigError(f"unknown config key '{dotted}'")
            node = node[key]
        if leaf not in node or isinstance(node[leaf], dict):
            raise ConfigError(f"unknown config key '{dotted}'")
        node[leaf] = value
        return config_from_dict(raw)

    def expand(self) -> list["ExperimentConfig"]:
        """Cartesian product of the sweep axes, first key slowest."""
        if not self.sweep:
            return [self]
        return list(_expand_axes(self, self.sweep))


def _build(cls, raw, path: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"'{path}' must be a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        dotted = f"{path}.{key}" if path else str(key)
        if key not in fields:
            raise ConfigError(f"unknown config key '{dotted}'")
        sub = _SECTIONS.get((cls, key))
        if sub is not None:
            kwargs[key] = _build(sub, value, dotted)
        else:
            kwargs[key] = _coerce(cls, key, value, dotted)
    return cls(**kwargs)


def _coerce(cls, key, value, dotted):
    default = next(f for f in dataclasses.fields(cls) if f.name == key)
    ref = default.default if default.default is not dataclasses.MISSING else None
    try:
        if key == "coefficients":
            return tuple(float(a) for a in value)
        if isinstance(ref, bool):
            if not isinstance(value, bool):
                raise TypeError
            return value
        if isinstance(ref, int):
            if isinstance(value, bool) or int(value) != value:
                raise TypeError
            return int(value)
        if isinstance(ref, float):
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if isinstance(ref, str) or ref is None:
            if value is not None and not isinstance(value, str):
                raise TypeError
            return value
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value {value!r} for '{dotted}'") from None
    return value


_SECTIONS = {
    (ExperimentConfig, "problem"): ProblemConfig,
    (ExperimentConfig, "cycle"): CycleConfig,
    (ExperimentConfig, "run"): RunConfig,
    (ExperimentConfig, "outputs"): OutputConfig,
    (ExperimentConfig, "debug"): DebugConfig,
    (CycleConfig, "smoother"): SmootherConfig,
    (RunConfig, "tolerances"): ToleranceConfig,
}


def config_from_dict(raw: dict | None) -> ExperimentConfig:
    raw = copy.deepcopy(raw) if raw else {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    sweep = raw.pop("sweep", None) or {}
    if not isinstance(sweep, dict):
        raise ConfigError("'sweep' must map dotted keys to value lists")
    base = _build(ExperimentConfig, raw, "")
    axes = []
    for key, values in sweep.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep axis '{key}' needs a non-empty list")
        base.with_override(key, values[0])  # fail fast on unknown keys
        axes.append((str(key), tuple(values)))
    for _ in _expand_axes(base, axes):
        pass  # every sweep point must validate before anything runs
    return dataclasses.replace(base, sweep=tuple(axes))


def _expand_axes(base, axes):
    for combo in itertools.product(*(vals for _, vals in axes)):
        cfg = base
        for (key, _), value in zip(axes, combo):
            cfg = cfg.with_override(key, value)
        yield cfg


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return config_from_dict(raw)


def validate(cfg: ExperimentConfig) -> None:
    """Run every constructor precondition; raise ConfigError on failure."""
    try:
        grid = cfg.grid
        cycle = cfg.cycle_spec
        cycle.smoother.validate_for(grid)
        if cfg.problem.c <= 0:
            raise ValueError(f"reaction coefficient must be positive, got {cfg.problem.c}")
        n = grid.n
        if n & (n - 1):
            raise ValueError(f"n must be a power of two, got {n}")
        if cycle.type is CycleType.V_CYCLE and n < 2 * cycle.coarsest_n:
            raise ValueError(f"n={n} too small for coarsest_n={cycle.coarsest_n}")
        if n < 4:
            raise ValueError("n must be at least 4 for a coarse level")
        run = cfg.run
        if run.iterations < 30:
            raise ValueError("run.iterations must be at least 30")
        if not 1 <= run.track_steps <= 100:
            raise ValueError("run.track_steps must lie in [1, 100]")
        if run.track_iterator not in ("cycle", "smoother"):
            raise ValueError("run.track_iterator must be 'cycle' or 'smoother'")
        if run.seed < 0:
            raise ValueError("run.seed must be non-negative")
        for name, tol in dataclasses.asdict(run.tolerances).items():
            if not tol > 0:
                raise ValueError(f"run.tolerances.{name} must be positive")
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
