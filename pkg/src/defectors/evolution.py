"""Spatial population and the genetic algorithm that evolves it.

Players sit on a torus and play each Moore neighbour once per generation.
Reproduction is a generational GA: linear fitness scaling, roulette
selection, single-point crossover at a shared cut, per-bit mutation.

Randomness is consumed only by reproduction.  For one generation under
global selection the draws are, in this order::

    rng.random((pairs, 2))          parent selection
    rng.random(pairs)               crossover coin
    rng.integers(1, 71, pairs)      cut points
    rng.random((2 * pairs, 71))     mutation, child-major then locus order

Local selection draws ``(cells, 2)`` selection uniforms instead and makes
one child per cell, so every other block is sized by ``cells``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .game import PayoffMatrix, outcome_payoffs
from .strategy import (CHROMOSOME_LENGTH, DEFAULT_THRESHOLDS, ClassificationThresholds,
                       as_chromosome)

MOORE_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
# half of the Moore offsets; each unordered neighbour pair is generated once
_FORWARD_OFFSETS = ((0, 1), (1, -1), (1, 0), (1, 1))


class SelectionScope(enum.Enum):
    GLOBAL = "global"
    LOCAL = "local"


@dataclass(frozen=True)
class EvolutionConfig:
    rounds_per_pair: int = 200
    crossover_probability: float = 0.98
    mutation_probability: float = 0.01
    scaling_multiple: float = 2.0
    selection_scope: SelectionScope = SelectionScope.GLOBAL

    def __post_init__(self):
        if int(self.rounds_per_pair) != self.rounds_per_pair or self.rounds_per_pair < 1:
            raise ValueError(f"rounds_per_pair must be a positive integer, got {self.rounds_per_pair}")
        for name in ("crossover_probability", "mutation_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if not self.scaling_multiple > 1.0:
            raise ValueError(f"scaling_multiple must exceed 1, got {self.scaling_multiple}")
        object.__setattr__(self, "selection_scope", SelectionScope(self.selection_scope))


class Grid:
    """Toroidal grid of chromosomes stored row-major as an (N, 71) uint8 array."""

    def __init__(self, width: int, height: int, cells):
        if width < 3 or height < 3:
            raise ValueError(f"grid must be at least 3x3, got {width}x{height}")
        cells = np.array(cells, dtype=np.uint8)
        if cells.shape != (width * height, CHROMOSOME_LENGTH):
            raise ValueError(
                f"cells must have shape {(width * height, CHROMOSOME_LENGTH)}, got {cells.shape}")
        if cells.max(initial=0) > 1:
            raise ValueError("chromosome loci must be 0 or 1")
        cells.flags.writeable = False
        self.width = int(width)
        self.height = int(height)
        self.cells = cells

    @classmethod
    def uniform(cls, width, height, chromosome):
        c = as_chromosome(chromosome)
        return cls(width, height, np.tile(c, (width * height, 1)))

    @property
    def size(self) -> int:
        return self.width * self.height

    def __len__(self):
        return self.size

    def __getitem__(self, index):
        return self.cells[index]

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and \
            np.array_equal(self.cells, other.cells)

    def __repr__(self):
        return f"Grid({self.width}x{self.height})"

    def index(self, row: int, col: int) -> int:
        return row * self.width + col

    def coords(self, index: int) -> tuple[int, int]:
        return divmod(index, self.width)

    @cached_property
    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return _edge_arrays(self.width, self.height)

    @cached_property
    def neighborhood_table(self) -> np.ndarray:
        """(N, 9) cell indices: the cell itself then its 8 Moore neighbours."""
        return _neighborhood_table(self.width, self.height)


def _edge_arrays(width, height):
    rows, cols = np.divmod(np.arange(width * height), width)
    a, b = [], []
    for dr, dc in _FORWARD_OFFSETS:
        a.append(rows * width + cols)
        b.append(((rows + dr) % height) * width + (cols + dc) % width)
    ea = np.stack(a, axis=1).reshape(-1)
    eb = np.stack(b, axis=1).reshape(-1)
    return ea.astype(np.int64), eb.astype(np.int64)


def _neighborhood_table(width, height):
    rows, cols = np.divmod(np.arange(width * height), width)
    table = [rows * width + cols]
    for dr, dc in MOORE_OFFSETS:
        table.append(((rows + dr) % height) * width + (cols + dc) % width)
    return np.stack(table, axis=1).astype(np.int64)


def neighbors(g: Grid, cell: tuple[int, int]) -> list[tuple[int, int]]:
    """The 8 Moore neighbours of ``(row, col)`` with wraparound."""
    r, c = cell
    if not (0 <= r < g.height and 0 <= c < g.width):
        raise IndexError(f"cell {cell} outside {g.height}x{g.width} grid")
    return [((r + dr) % g.height, (c + dc) % g.width) for dr, dc in MOORE_OFFSETS]


def edges(g: Grid) -> set[frozenset]:
    ea, eb = g.edge_arrays
    return {frozenset((g.coords(int(i)), g.coords(int(j)))) for i, j in zip(ea, eb)}


def evaluate_fitness(g: Grid, cfg: EvolutionConfig, m: PayoffMatrix) -> np.ndarray:
    """Sum of each player's payoffs over its 8 neighbour matches."""
    ea, eb = g.edge_arrays
    counts = _kernels.count_outcomes(g.cells, ea, eb, cfg.rounds_per_pair)
    pay_a, pay_b = outcome_payoffs(counts, m)
    fitness = np.zeros(g.size, dtype=pay_a.dtype)
    np.add.at(fitness, ea, pay_a)
    np.add.at(fitness, eb, pay_b)
    return fitness


def linear_scale(f, scaling_multiple: float = 2.0) -> np.ndarray:
    """Goldberg linear scaling, mean preserving, never negative.

    The line maps the mean to itself and the max to ``scaling_multiple``
    times the mean; if that would push the min below zero the line is
    pinned to (min -> 0) instead.  A vector with non-positive mean is first
    shifted by ``-min``.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.size == 0:
        raise ValueError("cannot scale an empty fitness vector")
    fmin, fmax = f.min(), f.max()
    favg = f.mean()
    if favg <= 0:
        f = f - fmin
        fmin, fmax, favg = 0.0, fmax - fmin, f.mean()
    # spread within rounding of the mean counts as flat
    if fmax - fmin <= 1e-12 * max(abs(fmax), abs(fmin), 1.0) or fmax <= favg or favg <= 0:
        return f.copy()
    c = float(scaling_multiple)
    if fmin > (c * favg - fmax) / (c - 1.0):
        scaled = favg + (c - 1.0) * favg * (f - favg) / (fmax - favg)
    else:
        scaled = favg * (f - fmin) / (favg - fmin)
    return np.maximum(scaled, 0.0)


def _roulette(weights: np.ndarray, u) -> np.ndarray:
    """Map uniforms ``u`` in [0, 1) to indices drawn proportionally to ``weights``."""
    n = weights.shape[-1]
    total = weights.sum()
    if total <= 0:
        return np.minimum((np.asarray(u) * n).astype(np.int64), n - 1)
    cum = np.cumsum(weights)
    idx = np.searchsorted(cum, np.asarray(u) * cum[-1], side="right")
    return np.minimum(idx, n - 1)


def select_parent(scaled, rng: np.random.Generator) -> int:
    """Roulette-wheel index; uniform when every weight is zero."""
    w = np.asarray(scaled, dtype=np.float64)
    return int(_roulette(w, rng.random()))


def crossover(p1, p2, rng: np.random.Generator, pc: float):
    """Single-point crossover at a cut shared by both parents, cut in [1, 70]."""
    p1, p2 = as_chromosome(p1), as_chromosome(p2)
    if rng.random() >= pc:
        return p1, p2
    k = int(rng.integers(1, CHROMOSOME_LENGTH))
    return (as_chromosome(np.concatenate([p1[:k], p2[k:]])),
            as_chromosome(np.concatenate([p2[:k], p1[k:]])))


def mutate(c, rng: np.random.Generator, pm: float):
    c = as_chromosome(c)
    flips = rng.random(CHROMOSOME_LENGTH) < pm
    return as_chromosome(c ^ flips.astype(np.uint8))


def _breed(pop, mothers, fathers, rng, cfg, n_pairs):
    cross = rng.random(n_pairs) < cfg.crossover_probability
    cuts = rng.integers(1, CHROMOSOME_LENGTH, n_pairs)
    p1 = pop[mothers]
    p2 = pop[fathers]
    head = np.arange(CHROMOSOME_LENGTH)[None, :] < np.where(cross, cuts, CHROMOSOME_LENGTH)[:, None]
    child1 = np.where(head, p1, p2)
    child2 = np.where(head, p2, p1)
    return cross, child1, child2


def next_generation(g: Grid, f, cfg: EvolutionConfig, rng: np.random.Generator) -> Grid:
    """Produce a fresh grid of the same size by selection, crossover and mutation."""
    f = np.asarray(f)
    if f.shape != (g.size,):
        raise ValueError(f"fitness has shape {f.shape}, grid has {g.size} cells")
    scaled = linear_scale(f, cfg.scaling_multiple)
    n = g.size
    if cfg.selection_scope is SelectionScope.GLOBAL:
        n_pairs = (n + 1) // 2
        u = rng.random((n_pairs, 2))
        parents = _roulette(scaled, u)
        _, c1, c2 = _breed(g.cells, parents[:, 0], parents[:, 1], rng, cfg, n_pairs)
        children = np.stack([c1, c2], axis=1).reshape(2 * n_pairs, CHROMOSOME_LENGTH)
    else:
        hood = g.neighborhood_table
        u = rng.random((n, 2))
        local = scaled[hood]
        cum = np.cumsum(local, axis=1)
        total = cum[:, -1:]
        slot = (cum[:, None, :] <= (u * total)[:, :, None]).sum(axis=2)
        flat = np.minimum((u * hood.shape[1]).astype(np.int64), hood.shape[1] - 1)
        slot = np.where(total > 0, np.minimum(slot, hood.shape[1] - 1), flat)
        picks = np.take_along_axis(hood, slot, axis=1)
        _, children, _ = _breed(g.cells, picks[:, 0], picks[:, 1], rng, cfg, n)
    flips = rng.random(children.shape) < cfg.mutation_probability
    children = children ^ flips.astype(np.uint8)
    return Grid(g.width, g.height, children[:n])


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    fraction_cooperator: float
    fraction_defector: float
    fraction_top_defector: float
    fraction_neutral: float
    fitness_mean: float
    fitness_max: float
    fitness_min: float


def cooperation_fractions(cells) -> np.ndarray:
    cells = np.asarray(cells)
    return (CHROMOSOME_LENGTH - cells.sum(axis=1, dtype=np.int64)) / CHROMOSOME_LENGTH


def generation_stats(g: Grid, f, t: ClassificationThresholds = DEFAULT_THRESHOLDS,
                     gen: int = 0) -> GenerationStats:
    f = np.asarray(f)
    if f.shape != (g.size,):
        raise ValueError(f"fitness has shape {f.shape}, grid has {g.size} cells")
    frac = cooperation_fractions(g.cells)
    n = g.size
    coop = int(np.count_nonzero(frac > t.cooperator_min))
    top = int(np.count_nonzero(frac < t.top_defector_max))
    defect = int(np.count_nonzero(frac < t.defector_max))
    return GenerationStats(
        generation=int(gen),
        fraction_cooperator=coop / n,
        fraction_defector=defect / n,
        fraction_top_defector=top / n,
        fraction_neutral=(n - coop - defect) / n,
        fitness_mean=float(f.mean()),
        fitness_max=float(f.max()),
        fitness_min=float(f.min()),
    )
