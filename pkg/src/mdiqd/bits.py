"""Bit-string helpers shared by every module."""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

BitsLike = Union[str, Sequence[int], np.ndarray]


def as_bits(bits: BitsLike, name: str = "bits") -> np.ndarray:
    """Coerce ``"0110"``, a list of ints or an array to a uint8 0/1 array."""
    if isinstance(bits, str):
        s = bits.replace(",", "").replace(" ", "")
        if any(ch not in "01" for ch in s):
            raise ValueError(f"{name}: not a bit string: {bits!r}")
        return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.asarray(bits)
    if arr.size == 0:
        return np.zeros(0, dtype=np.uint8)
    if arr.ndim != 1 or not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name}: elements must be 0 or 1")
    return arr.astype(np.uint8)


def bits_to_str(bits: BitsLike) -> str:
    return "".join("1" if b else "0" for b in as_bits(bits))


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, 2, size=n, dtype=np.uint8)
