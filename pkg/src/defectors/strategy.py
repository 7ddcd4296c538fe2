"""Memory-3 strategy chromosomes.

A chromosome is a read-only ``uint8`` numpy array of 71 loci, each 0
(cooperate) or 1 (defect)::

    loci 0..63   history table, indexed by the last three joint outcomes
    locus 64     first move
    loci 65..66  second move, given opponent's first move (C, D)
    loci 67..70  third move, given opponent's first two moves (CC, CD, DC, DD)

History tables are indexed base-4 with the oldest round most significant,
and a joint outcome is coded ``2 * own + opponent`` (CC=0, CD=1, DC=2, DD=3).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

CHROMOSOME_LENGTH = 71
TABLE_SIZE = 64
OPENING_OFFSET = 64
HEX_DIGITS = 18


class Action(enum.IntEnum):
    C = 0
    D = 1

    COOPERATE = 0
    DEFECT = 1


class StrategyClass(enum.Enum):
    COOPERATOR = "Cooperator"
    DEFECTOR = "Defector"
    TOP_DEFECTOR = "TopDefector"
    NEUTRAL = "Neutral"

    @property
    def is_defector(self) -> bool:
        return self in (StrategyClass.DEFECTOR, StrategyClass.TOP_DEFECTOR)


@dataclass(frozen=True)
class ClassificationThresholds:
    """Cooperation-fraction cut-offs; all bounds are exclusive."""

    cooperator_min: float = 0.60
    defector_max: float = 0.40
    top_defector_max: float = 0.25

    def __post_init__(self):
        if not (0.0 <= self.top_defector_max <= self.defector_max
                <= self.cooperator_min <= 1.0):
            raise ValueError(f"thresholds out of order: {self}")


DEFAULT_THRESHOLDS = ClassificationThresholds()


def outcome_code(own, opponent) -> int:
    return 2 * int(own) + int(opponent)


def as_chromosome(loci) -> np.ndarray:
    """Validate ``loci`` and return it as a read-only uint8 chromosome."""
    arr = np.array(loci, dtype=np.int64).reshape(-1)
    if arr.shape[0] != CHROMOSOME_LENGTH:
        raise ValueError(f"chromosome must have {CHROMOSOME_LENGTH} loci, got {arr.shape[0]}")
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError("chromosome loci must be 0 (C) or 1 (D)")
    out = arr.astype(np.uint8)
    out.flags.writeable = False
    return out


def all_cooperate() -> np.ndarray:
    return as_chromosome(np.zeros(CHROMOSOME_LENGTH))


def all_defect() -> np.ndarray:
    return as_chromosome(np.ones(CHROMOSOME_LENGTH))


def tit_for_tat() -> np.ndarray:
    """Tit-for-tat: open with C, then copy the opponent's previous move."""
    loci = np.zeros(CHROMOSOME_LENGTH, dtype=np.uint8)
    for idx in range(TABLE_SIZE):
        loci[idx] = idx & 1  # opponent bit of the most recent outcome
    loci[64] = 0
    loci[65], loci[66] = 0, 1
    loci[67:71] = (0, 1, 0, 1)
    return as_chromosome(loci)


def history_index(history: Sequence[tuple]) -> int:
    """Table locus for a three-round history of ``(own, opponent)`` pairs, oldest first."""
    if len(history) != 3:
        raise ValueError(f"history_index needs exactly 3 rounds, got {len(history)}")
    idx = 0
    for own, opp in history:
        idx = idx * 4 + outcome_code(own, opp)
    return idx


def locus_for(history: Sequence[tuple]) -> int:
    """Locus read by :func:`decide` for a history of 0..3 rounds."""
    n = len(history)
    if n == 0:
        return OPENING_OFFSET
    if n == 1:
        return 65 + int(history[0][1])
    if n == 2:
        return 67 + 2 * int(history[0][1]) + int(history[1][1])
    if n == 3:
        return history_index(history)
    raise ValueError(f"memory-3 strategies see at most 3 rounds, got {n}")


def decide(chromosome, history: Sequence[tuple]) -> Action:
    return Action(int(chromosome[locus_for(history)]))


def cooperation_fraction(chromosome) -> float:
    c = np.asarray(chromosome)
    return float(CHROMOSOME_LENGTH - int(c.sum())) / CHROMOSOME_LENGTH


def classify_fraction(f: float, t: ClassificationThresholds = DEFAULT_THRESHOLDS) -> StrategyClass:
    if f > t.cooperator_min:
        return StrategyClass.COOPERATOR
    if f < t.top_defector_max:
        return StrategyClass.TOP_DEFECTOR
    if f < t.defector_max:
        return StrategyClass.DEFECTOR
    return StrategyClass.NEUTRAL


def classify(chromosome, t: ClassificationThresholds = DEFAULT_THRESHOLDS) -> StrategyClass:
    return classify_fraction(cooperation_fraction(chromosome), t)


def random_chromosome(rng: np.random.Generator, bit_cooperate_probability: float) -> np.ndarray:
    """Independent loci, each C with the given probability (locus 0 drawn first)."""
    p = float(bit_cooperate_probability)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    u = rng.random(CHROMOSOME_LENGTH)
    return as_chromosome((u >= p).astype(np.uint8))


CLASS_BIAS = {StrategyClass.COOPERATOR: 0.8, StrategyClass.DEFECTOR: 0.2}


def sample_class_member(rng: np.random.Generator, target: StrategyClass,
                        t: ClassificationThresholds = DEFAULT_THRESHOLDS,
                        *, return_rejections: bool = False):
    """Draw biased random chromosomes until one lands in ``target``.

    A Defector target also accepts TopDefector draws.
    """
    if target not in CLASS_BIAS:
        raise ValueError(f"can only sample Cooperator or Defector, not {target}")
    bias = CLASS_BIAS[target]
    rejections = 0
    while True:
        c = random_chromosome(rng, bias)
        cls = classify(c, t)
        if cls is target or (target is StrategyClass.DEFECTOR and cls.is_defector):
            return (c, rejections) if return_rejections else c
        rejections += 1


def encode_hex(chromosome) -> str:
    """18 uppercase hex digits; a zero pad bit precedes locus 0 (the MSB)."""
    value = 0
    for bit in np.asarray(chromosome, dtype=np.uint8):
        value = (value << 1) | int(bit)
    return f"{value:0{HEX_DIGITS}X}"


def decode_hex(text: str) -> np.ndarray:
    s = text.strip()
    if len(s) != HEX_DIGITS:
        raise ValueError(f"expected {HEX_DIGITS} hex digits, got {len(s)}")
    try:
        value = int(s, 16)
    except ValueError:
        raise ValueError(f"not a hex string: {text!r}") from None
    if not all(ch in "0123456789abcdefABCDEF" for ch in s):
        raise ValueError(f"not a hex string: {text!r}")
    if value >> CHROMOSOME_LENGTH:
        raise ValueError("pad bit must be 0")
    bits = [(value >> (CHROMOSOME_LENGTH - 1 - i)) & 1 for i in range(CHROMOSOME_LENGTH)]
    return as_chromosome(bits)
