"""Classical post-processing: indicator sequences X, Y, Z and keep/discard sets.

X marks rounds whose outcome reveals nothing to the measuring party
(PhiMinus, PsiPlus). Y and Z assign the remaining rounds, the ones where the
outcome leaks ``a XOR b``, to a keep set using the j-th key bit at the j-th zero
of X, so the key is consumed in order of zeros rather than by round position.

Round indices are 1-based throughout.
"""

from __future__ import annotations

import numpy as np

from .bits import BitsLike, as_bits
from .qcore import BellOutcome

__all__ = [
    "build_x",
    "build_y",
    "build_z",
    "kept_indices",
    "filter_message",
    "baseline_kept_indices",
    "zero_positions",
]

_SECRET_OUTCOMES = (int(BellOutcome.PhiMinus), int(BellOutcome.PsiPlus))


def _outcomes(m_seq) -> np.ndarray:
    m = np.asarray(m_seq, dtype=np.int64).reshape(-1)
    if m.size and (m.min() < 0 or m.max() > 3):
        raise ValueError("outcome codes must be in 0..3")
    return m


def build_x(m_seq) -> np.ndarray:
    m = _outcomes(m_seq)
    return np.isin(m, _SECRET_OUTCOMES).astype(np.uint8)


def zero_positions(x: BitsLike) -> np.ndarray:
    """1-based positions of the zeros of ``x``."""
    return np.flatnonzero(as_bits(x, "x") == 0) + 1


def _fill_zeros(x: BitsLike, key: BitsLike, invert: bool) -> np.ndarray:
    x = as_bits(x, "x")
    k = as_bits(key, "key")
    zeros = np.flatnonzero(x == 0)
    if k.size < zeros.size:
        raise ValueError(f"key has {k.size} bits but X has {zeros.size} zeros")
    out = np.zeros_like(x)
    fill = k[: zeros.size]
    out[zeros] = (1 - fill) if invert else fill
    return out


def build_y(x: BitsLike, key: BitsLike, c: int) -> np.ndarray:
    """Y is 0 on ones of X; at the j-th zero it is k_j if c == 1, else NOT k_j."""
    return _fill_zeros(x, key, invert=(c == 0))


def build_z(x: BitsLike, key: BitsLike, c: int) -> np.ndarray:
    """Complement of :func:`build_y` on the zeros of X: k_j if c == 0, else NOT k_j."""
    return _fill_zeros(x, key, invert=(c == 1))


def kept_indices(x: BitsLike, selector: BitsLike) -> np.ndarray:
    x = as_bits(x, "x")
    s = as_bits(selector, "selector")
    if x.shape != s.shape:
        raise ValueError(f"length mismatch: {x.size} vs {s.size}")
    return np.flatnonzero(x ^ s) + 1


def filter_message(msg: BitsLike, kept) -> np.ndarray:
    msg = as_bits(msg, "msg")
    idx = np.asarray(kept, dtype=np.int64)
    if idx.size and (idx.min() < 1 or idx.max() > msg.size):
        raise IndexError(f"kept index out of range 1..{msg.size}")
    return msg[idx - 1]


def baseline_kept_indices(m_seq) -> np.ndarray:
    """Keep rule of the original dialogue protocol: only PhiMinus/PsiPlus rounds."""
    return np.flatnonzero(build_x(m_seq)) + 1
