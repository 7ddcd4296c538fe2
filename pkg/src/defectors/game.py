"""Business-game payoffs, dilemma classification and pairwise matches."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from numbers import Real

import numpy as np

from . import _kernels
from .strategy import Action, as_chromosome


def _exact(x):
    # keep whole-pound amounts as ints so fitness totals stay exact
    if isinstance(x, (int, np.integer)):
        return int(x)
    xf = float(x)
    return int(xf) if xf.is_integer() else xf


@dataclass(frozen=True)
class PayoffConfig:
    """Goods price and the compensation refunded to a cheated cooperator."""

    goods_price: Real = 10
    compensation: Real = 0

    def __post_init__(self):
        if not self.goods_price > 0:
            raise ValueError(f"goods_price must be positive, got {self.goods_price}")
        if not 0 <= self.compensation <= self.goods_price:
            raise ValueError(
                f"compensation must lie in [0, goods_price], got {self.compensation}")


@dataclass(frozen=True)
class PayoffMatrix:
    temptation: Real
    reward: Real
    punishment: Real
    sucker: Real
    compensation: Real = 0  # refund already folded into ``sucker``

    @property
    def T(self):
        return self.temptation

    @property
    def R(self):
        return self.reward

    @property
    def P(self):
        return self.punishment

    @property
    def S(self):
        return self.sucker

    def as_tuple(self):
        return (self.temptation, self.reward, self.punishment, self.sucker)

    def own_payoffs(self) -> np.ndarray:
        """Own payoff indexed by outcome code CC, CD, DC, DD."""
        return np.array([self.reward, self.sucker, self.temptation, self.punishment],
                        dtype=np.float64)

    def is_integral(self) -> bool:
        return all(isinstance(v, int) for v in self.as_tuple())


class DilemmaKind(enum.Enum):
    STRONG = "Strong"
    WEAK = "Weak"
    NONE = "None"


@dataclass(frozen=True)
class DilemmaClass:
    kind: DilemmaKind
    iterated_condition_holds: bool


@dataclass(frozen=True)
class MatchResult:
    payoff_a: Real
    payoff_b: Real
    cooperations_a: int
    cooperations_b: int
    rounds: int


def payoff_matrix_from(cfg: PayoffConfig) -> PayoffMatrix:
    g = _exact(cfg.goods_price)
    d = _exact(cfg.compensation)
    return PayoffMatrix(temptation=_exact(2 * g), reward=g, punishment=0,
                        sucker=_exact(-g + d), compensation=d)


def classify_dilemma(m: PayoffMatrix) -> DilemmaClass:
    """Strong needs T > R > P > S and no compensation.

    Any compensated matrix that still satisfies T > R > P >= S is Weak: the
    refund is what softens the dilemma, even when S stays below P.  The
    iterated condition 2R > T + S is reported on its own.
    """
    T, R, P, S = m.as_tuple()
    if T > R > P > S and not m.compensation > 0:
        kind = DilemmaKind.STRONG
    elif T > R > P >= S:
        kind = DilemmaKind.WEAK
    else:
        kind = DilemmaKind.NONE
    return DilemmaClass(kind, bool(2 * R > T + S))


def payoffs(a: Action, b: Action, m: PayoffMatrix):
    """Payoffs to (a, b) for one round."""
    a, b = Action(a), Action(b)
    if a is Action.C:
        return (m.reward, m.reward) if b is Action.C else (m.sucker, m.temptation)
    return (m.temptation, m.sucker) if b is Action.C else (m.punishment, m.punishment)


def outcome_payoffs(counts: np.ndarray, m: PayoffMatrix):
    """Payoff totals for both sides from CC/CD/DC/DD counts (last axis)."""
    counts = np.asarray(counts)
    if m.is_integral():
        own = np.array([m.reward, m.sucker, m.temptation, m.punishment], dtype=np.int64)
    else:
        own = m.own_payoffs()
    other = own[[0, 2, 1, 3]]
    return counts @ own, counts @ other


def play_match(a, b, rounds: int, m: PayoffMatrix) -> MatchResult:
    """Play ``rounds`` rounds between two chromosomes from an empty history."""
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    pop = np.stack([as_chromosome(a), as_chromosome(b)])
    counts = _kernels.count_outcomes(pop, np.array([0]), np.array([1]), rounds)[0]
    pa, pb = outcome_payoffs(counts, m)
    return MatchResult(payoff_a=_exact(pa), payoff_b=_exact(pb),
                       cooperations_a=int(counts[0] + counts[1]),
                       cooperations_b=int(counts[0] + counts[2]),
                       rounds=int(rounds))


def match_moves(a, b, rounds: int):
    """Per-round move sequences ``(moves_a, moves_b)`` as uint8 arrays (0=C, 1=D)."""
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    return _kernels.trace_moves(as_chromosome(a), as_chromosome(b), int(rounds))
