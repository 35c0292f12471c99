"""Message/key encoding into BB84 states and decoding of the other party's bit.

Both parties decode with the same table: given their own bit, the shared key
bit and the announced Bell outcome, the table yields the partner's bit.
"""

from __future__ import annotations

from typing import List

import numpy as np

from .bits import BitsLike, as_bits
from .qcore import BellOutcome, PreparedQubit

__all__ = [
    "encode_bit",
    "encode_message",
    "encode_bits",
    "decode_guess",
    "decode_bits",
    "GUESS_TABLE",
]

# GUESS_TABLE[key][own] lists the partner's bit for PhiPlus, PhiMinus, PsiPlus, PsiMinus.
GUESS_TABLE = (
    ((0, 0, 1, 1), (1, 1, 0, 0)),
    ((0, 1, 0, 1), (1, 0, 1, 0)),
)
_GUESS = np.array(GUESS_TABLE, dtype=np.uint8)


def encode_bit(msg: int, key: int) -> PreparedQubit:
    """Key bit picks the basis (0 -> Z, 1 -> X), message bit picks the state within it."""
    if msg not in (0, 1) or key not in (0, 1):
        raise ValueError(f"bits must be 0/1, got msg={msg!r} key={key!r}")
    return PreparedQubit(msg + 2 * key)


def encode_bits(msg: BitsLike, key: BitsLike) -> np.ndarray:
    """Vectorised encoding; int8 array of :class:`PreparedQubit` codes."""
    m = as_bits(msg, "msg")
    k = as_bits(key, "key")
    if m.shape != k.shape:
        raise ValueError(f"message length {m.size} != key length {k.size}")
    return (m + 2 * k).astype(np.int8)


def encode_message(msg: BitsLike, key: BitsLike) -> List[PreparedQubit]:
    return [PreparedQubit(int(q)) for q in encode_bits(msg, key)]


def decode_guess(own_msg: int, key: int, m: BellOutcome) -> int:
    """Partner's bit from the guess table.

    The table is total: an outcome that could not have occurred for the
    prepared pair still maps to a bit. Consistency is checked elsewhere.
    """
    return GUESS_TABLE[key][own_msg][BellOutcome(m)]


def decode_bits(own: BitsLike, key: BitsLike, m_seq) -> np.ndarray:
    o = as_bits(own, "own")
    k = as_bits(key, "key")
    m = np.asarray(m_seq, dtype=np.int64)
    if not (o.shape == k.shape == m.shape):
        raise ValueError("own bits, key and outcomes must have equal length")
    return _GUESS[k, o, m]
