"""Four BB84 states, the Bell-basis measurement on a pair of them, and seeded sampling.

Probabilities are exact :class:`fractions.Fraction` values. For every pair of
BB84 states they are multiples of 1/4, so sampling draws a uniform integer in
``[0, 4)`` and maps it through a quarter table. An outcome of probability zero
therefore has no quarter assigned and cannot be emitted.
"""

from __future__ import annotations

from enum import IntEnum
from fractions import Fraction
from typing import Dict, Iterable, Sequence

import numpy as np

__all__ = [
    "PreparedQubit",
    "BellOutcome",
    "OutcomeDistribution",
    "bell_distribution",
    "outcome_probability",
    "measure_bell",
    "sample_bell",
    "make_rng",
    "spawn_streams",
    "check_seed",
    "QUARTER_TABLE",
]

SEED_MAX = 2**64 - 1


class PreparedQubit(IntEnum):
    """Single-qubit state emitted by a party. Value = message bit + 2 * key bit."""

    Z0 = 0  # |0>
    Z1 = 1  # |1>
    XPlus = 2  # |+>
    XMinus = 3  # |->

    @property
    def basis(self) -> int:
        return int(self) >> 1

    @property
    def bit(self) -> int:
        return int(self) & 1

    @property
    def ket(self) -> str:
        return _KETS[self]


_KETS = {
    PreparedQubit.Z0: "|0>",
    PreparedQubit.Z1: "|1>",
    PreparedQubit.XPlus: "|+>",
    PreparedQubit.XMinus: "|->",
}


class BellOutcome(IntEnum):
    PhiPlus = 0
    PhiMinus = 1
    PsiPlus = 2
    PsiMinus = 3


OutcomeDistribution = Dict[BellOutcome, Fraction]

# Unnormalised real amplitudes and their squared norms.
_STATE_VEC = {
    PreparedQubit.Z0: ((1, 0), 1),
    PreparedQubit.Z1: ((0, 1), 1),
    PreparedQubit.XPlus: ((1, 1), 2),
    PreparedQubit.XMinus: ((1, -1), 2),
}
# Bell vectors over |00>, |01>, |10>, |11>; each has squared norm 2.
_BELL_VEC = {
    BellOutcome.PhiPlus: (1, 0, 0, 1),
    BellOutcome.PhiMinus: (1, 0, 0, -1),
    BellOutcome.PsiPlus: (0, 1, 1, 0),
    BellOutcome.PsiMinus: (0, 1, -1, 0),
}


def _distribution(qa: PreparedQubit, qb: PreparedQubit) -> OutcomeDistribution:
    (a, na), (b, nb) = _STATE_VEC[qa], _STATE_VEC[qb]
    product = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    norm = 2 * na * nb
    out = {}
    for m, bell in _BELL_VEC.items():
        overlap = sum(x * y for x, y in zip(bell, product))
        out[m] = Fraction(overlap * overlap, norm)
    return out


_DIST = {
    (qa, qb): _distribution(qa, qb) for qa in PreparedQubit for qb in PreparedQubit
}


def bell_distribution(qa: PreparedQubit, qb: PreparedQubit) -> OutcomeDistribution:
    """Born-rule distribution of a Bell measurement on ``qa (x) qb``.

    Returns a fresh dict keyed by every :class:`BellOutcome`, so callers may
    mutate it.
    """
    return dict(_DIST[PreparedQubit(qa), PreparedQubit(qb)])


def outcome_probability(qa: PreparedQubit, qb: PreparedQubit, m: BellOutcome) -> Fraction:
    return _DIST[PreparedQubit(qa), PreparedQubit(qb)][BellOutcome(m)]


def _quarter_table() -> np.ndarray:
    table = np.empty((4, 4, 4), dtype=np.int8)
    for (qa, qb), dist in _DIST.items():
        quarters = []
        for m in BellOutcome:
            weight = dist[m] * 4
            assert weight.denominator == 1, "non-dyadic probability"
            quarters.extend([int(m)] * int(weight))
        table[qa, qb] = quarters
    return table


# QUARTER_TABLE[qa, qb, r] is the outcome selected by the uniform draw r in 0..3.
QUARTER_TABLE = _quarter_table()


def measure_bell(qa: PreparedQubit, qb: PreparedQubit, rng: np.random.Generator) -> BellOutcome:
    """Sample one Bell outcome for the pair, consuming one integer draw from ``rng``."""
    r = int(rng.integers(0, 4))
    return BellOutcome(int(QUARTER_TABLE[int(qa), int(qb), r]))


def sample_bell(qa: Sequence[int], qb: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Vectorised :func:`measure_bell`; returns an int8 array of outcome codes."""
    qa = np.asarray(qa, dtype=np.int64)
    qb = np.asarray(qb, dtype=np.int64)
    if qa.shape != qb.shape:
        raise ValueError(f"shape mismatch: {qa.shape} vs {qb.shape}")
    r = rng.integers(0, 4, size=qa.shape)
    return QUARTER_TABLE[qa, qb, r]


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= SEED_MAX:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(check_seed(seed))))


def spawn_streams(seed: int, names: Iterable[str]) -> Dict[str, np.random.Generator]:
    """Independent child streams, one per name, in the order given.

    The i-th name gets the PCG64 stream of ``SeedSequence(seed).spawn(...)[i]``,
    so adding a name at the end never perturbs earlier streams.
    """
    names = list(names)
    children = np.random.SeedSequence(check_seed(seed)).spawn(len(names))
    return {name: np.random.Generator(np.random.PCG64(ss)) for name, ss in zip(names, children)}
