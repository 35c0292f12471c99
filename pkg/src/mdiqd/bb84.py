"""Textbook BB84 key establishment with optional intercept-resend eavesdropper.

No error correction and no privacy amplification: the returned key is the
sender's unsampled sifted bits, gated only by the sampled error rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .bits import BitsLike, as_bits, random_bits
from .qcore import check_seed, spawn_streams

__all__ = [
    "Bb84Config",
    "KeyMaterial",
    "Bb84Result",
    "Bb84Abort",
    "InsufficientBits",
    "simulate_bb84",
    "run_bb84",
    "key_parity",
]

EveMode = Literal["off", "intercept_resend"]


@dataclass(frozen=True)
class Bb84Config:
    target_key_length: int
    raw_multiplier: int = 4
    eve_mode: EveMode = "off"
    channel_flip_prob: float = 0.0
    sample_fraction: float = 0.25
    error_threshold: float = 0.11
    seed: int = 0

    def __post_init__(self):
        if self.target_key_length < 1:
            raise ValueError("target_key_length must be positive")
        if self.raw_multiplier < 1:
            raise ValueError("raw_multiplier must be positive")
        if self.eve_mode not in ("off", "intercept_resend"):
            raise ValueError(f"unknown eve_mode {self.eve_mode!r}")
        if not 0.0 <= self.channel_flip_prob <= 1.0:
            raise ValueError("channel_flip_prob must lie in [0, 1]")
        if not 0.0 < self.sample_fraction < 1.0:
            raise ValueError("sample_fraction must lie in (0, 1)")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ValueError("error_threshold must lie in [0, 1]")
        check_seed(self.seed)

    @property
    def raw_rounds(self) -> int:
        return self.raw_multiplier * self.target_key_length


@dataclass(frozen=True)
class KeyMaterial:
    bits: np.ndarray
    parity_c: int
    estimated_qber: float

    def __post_init__(self):
        if self.bits.size and self.parity_c != key_parity(self.bits):
            raise ValueError("parity_c does not match the key bits")

    @classmethod
    def from_bits(cls, bits: BitsLike, estimated_qber: float = 0.0) -> "KeyMaterial":
        b = as_bits(bits, "key")
        return cls(bits=b, parity_c=key_parity(b), estimated_qber=estimated_qber)


@dataclass(frozen=True)
class Bb84Result:
    """Everything observable in one simulated BB84 run, before the abort gate."""

    raw_rounds: int
    sifted: int
    sample_size: int
    estimated_qber: float
    sifted_qber: float  # over all sifted bits; not observable by the parties
    alice_key: np.ndarray
    bob_key: np.ndarray


class Bb84Abort(Exception):
    def __init__(self, estimated_qber: float, threshold: float):
        super().__init__(f"BB84 aborted: sampled QBER {estimated_qber:.4f} > {threshold}")
        self.estimated_qber = estimated_qber
        self.threshold = threshold


class InsufficientBits(Exception):
    def __init__(self, available: int, target: int):
        super().__init__(f"sifting left {available} key bits, {target} requested")
        self.available = available
        self.target = target


def key_parity(bits: BitsLike) -> int:
    b = as_bits(bits, "bits")
    if b.size == 0:
        raise ValueError("parity of an empty key is undefined")
    return int(np.bitwise_xor.reduce(b))


def _measure(state_bits, state_bases, meas_bases, rng):
    # matching basis reproduces the bit, otherwise the outcome is a fair coin
    coin = random_bits(rng, state_bits.size)
    return np.where(state_bases == meas_bases, state_bits, coin).astype(np.uint8)


def simulate_bb84(cfg: Bb84Config) -> Bb84Result:
    s = spawn_streams(cfg.seed, ["alice", "eve", "channel", "bob", "sample"])
    n = cfg.raw_rounds
    a_bits = random_bits(s["alice"], n)
    a_bases = random_bits(s["alice"], n)

    bits, bases = a_bits, a_bases
    if cfg.eve_mode == "intercept_resend":
        e_bases = random_bits(s["eve"], n)
        bits = _measure(bits, bases, e_bases, s["eve"])
        bases = e_bases
    if cfg.channel_flip_prob > 0:
        flips = s["channel"].random(n) < cfg.channel_flip_prob
        bits = bits ^ flips.astype(np.uint8)

    b_bases = random_bits(s["bob"], n)
    b_bits = _measure(bits, bases, b_bases, s["bob"])

    sift = np.flatnonzero(a_bases == b_bases)
    a_sift, b_sift = a_bits[sift], b_bits[sift]
    m = a_sift.size
    k = min(m, max(1, int(round(cfg.sample_fraction * m)))) if m else 0
    sample = np.sort(s["sample"].choice(m, size=k, replace=False)) if k else np.zeros(0, int)
    errs = a_sift[sample] != b_sift[sample]
    est = float(errs.mean()) if k else 0.0
    keep = np.ones(m, dtype=bool)
    keep[sample] = False
    return Bb84Result(
        raw_rounds=n,
        sifted=m,
        sample_size=k,
        estimated_qber=est,
        sifted_qber=float(np.mean(a_sift != b_sift)) if m else 0.0,
        alice_key=a_sift[keep],
        bob_key=b_sift[keep],
    )


def run_bb84(cfg: Bb84Config) -> KeyMaterial:
    """Run BB84 and return the agreed key truncated to ``cfg.target_key_length``.

    Raises
    ------
    Bb84Abort
        Sampled error rate above ``cfg.error_threshold``.
    InsufficientBits
        Fewer unsampled sifted bits than requested.
    """
    res = simulate_bb84(cfg)
    if res.estimated_qber > cfg.error_threshold:
        raise Bb84Abort(res.estimated_qber, cfg.error_threshold)
    if res.alice_key.size < cfg.target_key_length:
        raise InsufficientBits(res.alice_key.size, cfg.target_key_length)
    return KeyMaterial.from_bits(res.alice_key[: cfg.target_key_length], res.estimated_qber)
