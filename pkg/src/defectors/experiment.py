"""Payoff cases, population set-up, multi-seed runs and their summaries."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .evolution import (EvolutionConfig, GenerationStats, Grid, evaluate_fitness,
                        generation_stats, next_generation)
from .game import PayoffConfig, payoff_matrix_from
from .strategy import (CHROMOSOME_LENGTH, DEFAULT_THRESHOLDS, ClassificationThresholds,
                       StrategyClass, sample_class_member)


class ConfigError(ValueError):
    pass


class CaseId(enum.Enum):
    CASE_I = "I"
    CASE_IIA = "IIA"
    CASE_IIB = "IIB"
    CUSTOM = "Custom"


_COMPENSATION_SHARE = {CaseId.CASE_I: 0.0, CaseId.CASE_IIA: 0.5, CaseId.CASE_IIB: 1.0}


@dataclass(frozen=True)
class CaseSpec:
    id: CaseId
    reward_value: float = 10
    compensation: Optional[float] = None  # explicit delta, Custom cases only

    @property
    def label(self) -> str:
        return "case" + self.id.value

    @classmethod
    def parse(cls, name: str, reward_value: float = 10) -> "CaseSpec":
        key = name.strip().upper().removeprefix("CASE").strip("_ ")
        for cid in (CaseId.CASE_I, CaseId.CASE_IIA, CaseId.CASE_IIB):
            if key == cid.value:
                return cls(cid, reward_value)
        raise ConfigError(f"unknown case {name!r}; expected I, IIA or IIB")


CASE_I = CaseSpec(CaseId.CASE_I)
CASE_IIA = CaseSpec(CaseId.CASE_IIA)
CASE_IIB = CaseSpec(CaseId.CASE_IIB)
ALL_CASES = (CASE_I, CASE_IIA, CASE_IIB)


def build_case(spec: CaseSpec) -> PayoffConfig:
    if spec.id is CaseId.CUSTOM:
        if spec.compensation is None:
            raise ConfigError("a Custom case needs an explicit compensation")
        delta = spec.compensation
    else:
        share = _COMPENSATION_SHARE[spec.id]
        delta = spec.reward_value * share
        if float(delta).is_integer():
            delta = int(delta)
    return PayoffConfig(goods_price=spec.reward_value, compensation=delta)


@dataclass(frozen=True)
class RunConfig:
    grid_width: int = 50
    grid_height: int = 50
    generations: int = 1000
    runs: int = 5
    base_seed: int = 0
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    thresholds: ClassificationThresholds = DEFAULT_THRESHOLDS
    initial_cooperator_share: float = 0.80

    def __post_init__(self):
        if self.grid_width < 3 or self.grid_height < 3:
            raise ConfigError(f"grid must be at least 3x3, got {self.grid_width}x{self.grid_height}")
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.generations < 0:
            raise ConfigError(f"generations must be >= 0, got {self.generations}")
        if not 0.0 <= self.initial_cooperator_share <= 1.0:
            raise ConfigError(
                f"initial_cooperator_share must lie in [0, 1], got {self.initial_cooperator_share}")

    @property
    def population(self) -> int:
        return self.grid_width * self.grid_height

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


DESK = dict(grid_width=20, grid_height=20, generations=300, runs=5)
DESK_ROUNDS = 50


def desk_config(**overrides) -> RunConfig:
    evo = overrides.pop("evolution", EvolutionConfig(rounds_per_pair=DESK_ROUNDS))
    return RunConfig(**{**DESK, **overrides, "evolution": evo})


def init_population(rng: np.random.Generator, cfg: RunConfig) -> Grid:
    """Exactly round(share * N) cooperators, the rest defectors, shuffled over cells."""
    n = cfg.population
    n_coop = int(round(cfg.initial_cooperator_share * n))
    targets = [StrategyClass.COOPERATOR] * n_coop + [StrategyClass.DEFECTOR] * (n - n_coop)
    cells = np.empty((n, CHROMOSOME_LENGTH), dtype=np.uint8)
    for i, target in enumerate(targets):
        cells[i] = sample_class_member(rng, target, cfg.thresholds)
    cells = cells[rng.permutation(n)]
    return Grid(cfg.grid_width, cfg.grid_height, cells)


_FIELDS = ("fraction_cooperator", "fraction_defector", "fraction_top_defector",
           "fraction_neutral", "fitness_mean", "fitness_max", "fitness_min")


class TimeSeries:
    """Per-generation statistics held column-wise (generation 0 first)."""

    fields = _FIELDS

    def __init__(self, generation, **columns):
        self.generation = np.asarray(generation, dtype=np.int64)
        for name in _FIELDS:
            col = np.asarray(columns[name], dtype=np.float64)
            if col.shape != self.generation.shape:
                raise ValueError(f"column {name} has shape {col.shape}")
            setattr(self, name, col)

    @classmethod
    def from_stats(cls, stats: Sequence[GenerationStats]) -> "TimeSeries":
        return cls([s.generation for s in stats],
                   **{name: [getattr(s, name) for s in stats] for name in _FIELDS})

    def __len__(self):
        return len(self.generation)

    def __getitem__(self, i) -> GenerationStats:
        return GenerationStats(int(self.generation[i]),
                               *(float(getattr(self, name)[i]) for name in _FIELDS))

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return np.array_equal(self.generation, other.generation) and all(
            np.array_equal(getattr(self, n), getattr(other, n)) for n in _FIELDS)

    def column(self, name: str) -> np.ndarray:
        return getattr(self, name)


def run_simulation(case: CaseSpec, cfg: RunConfig, seed: int, *, progress=None) -> TimeSeries:
    rng = np.random.default_rng(seed)
    matrix = payoff_matrix_from(build_case(case))
    grid = init_population(rng, cfg)
    stats = []
    for gen in range(cfg.generations + 1):
        fitness = evaluate_fitness(grid, cfg.evolution, matrix)
        stats.append(generation_stats(grid, fitness, cfg.thresholds, gen))
        if gen < cfg.generations:
            grid = next_generation(grid, fitness, cfg.evolution, rng)
        if progress is not None:
            progress(gen)
    return TimeSeries.from_stats(stats)


def run_seeds(cfg: RunConfig) -> list[int]:
    return [cfg.base_seed + i for i in range(cfg.runs)]


def run_case(case: CaseSpec, cfg: RunConfig) -> list[TimeSeries]:
    return [run_simulation(case, cfg, seed) for seed in run_seeds(cfg)]


def average_runs(series: Sequence[TimeSeries]) -> TimeSeries:
    if not series:
        raise ValueError("nothing to average")
    n = len(series[0])
    if any(len(s) != n for s in series):
        raise ValueError("all series must have the same length")
    cols = {name: np.mean([s.column(name) for s in series], axis=0) for name in _FIELDS}
    return TimeSeries(series[0].generation, **cols)


_PEAK_FIELDS = {"defector": "fraction_defector", "top_defector": "fraction_top_defector"}


def peak(series, field: str = "defector") -> tuple[float, int]:
    """Largest value of a fraction column and the earliest generation reaching it."""
    if isinstance(series, TimeSeries):
        values = series.column(_PEAK_FIELDS.get(field, field))
        gens = series.generation
    else:
        values = np.asarray(series, dtype=np.float64)
        gens = np.arange(len(values))
    if len(values) == 0:
        raise ValueError("cannot take the peak of an empty series")
    i = int(np.argmax(values))
    return float(values[i]), int(gens[i])


def final_window_mean(series: TimeSeries, field: str = "defector", share: float = 0.10) -> float:
    values = series.column(_PEAK_FIELDS.get(field, field))
    k = max(1, int(round(len(values) * share)))
    return float(values[-k:].mean())


@dataclass(frozen=True)
class Summary:
    case: str
    peak_defector: float
    peak_defector_generation: int
    peak_top_defector: float
    peak_top_defector_generation: int
    final_window_defector: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def summarize(case: CaseSpec, averaged: TimeSeries) -> Summary:
    pd, gd = peak(averaged, "defector")
    pt, gt = peak(averaged, "top_defector")
    return Summary(case.label, pd, gd, pt, gt, final_window_mean(averaged))
