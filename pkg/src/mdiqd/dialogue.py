"""Full protocol runs: Alice, Bob and the untrusted measuring party (UTP).

The three roles are small state machines exchanging messages over an ordered
in-process :class:`Channel`. Quantum payloads are whole qubit sequences, as in
the protocol where each party sends all of its qubits to the UTP and the UTP
announces all outcomes. A :class:`Scheduler` steps the roles round-robin until
every role has finished.

Three variants share the pipeline and differ only in their keep rule:

* ``baseline_mdiqd``: keep only PhiMinus/PsiPlus rounds.
* ``protocol1``: keep rounds with ``X xor Y = 1`` for both messages.
* ``protocol2``: keep Alice's bit where ``X xor Y = 1`` and Bob's where
  ``X xor Z = 1``; the two recovered messages may differ in length.
"""

from __future__ import annotations

import hashlib
import warnings
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Deque, Dict, List, Optional, Tuple, Union

import numpy as np

from .bb84 import Bb84Abort, Bb84Config, InsufficientBits, KeyMaterial, run_bb84
from .bits import BitsLike, as_bits, random_bits
from .codec import decode_bits, encode_bits
from .qcore import QUARTER_TABLE, check_seed, sample_bell, spawn_streams
from .seqfilter import baseline_kept_indices, build_x, build_y, build_z, kept_indices

__all__ = [
    "ProtocolVariant",
    "NoiseModel",
    "DialogueConfig",
    "DialogueTranscript",
    "InconsistentOutcome",
    "EmptySampleWarning",
    "Channel",
    "Message",
    "run_dialogue",
    "inject_replay",
    "estimate_error",
    "estimation_sample",
    "check_consistency",
]


class ProtocolVariant(str, Enum):
    BASELINE = "baseline_mdiqd"
    PROTOCOL1 = "protocol1"
    PROTOCOL2 = "protocol2"

    @classmethod
    def parse(cls, value: Union[str, "ProtocolVariant"]) -> "ProtocolVariant":
        if isinstance(value, cls):
            return value
        aliases = {"baseline": cls.BASELINE, "p1": cls.PROTOCOL1, "p2": cls.PROTOCOL2}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ValueError(f"unknown protocol variant {value!r}") from None


@dataclass(frozen=True)
class NoiseModel:
    """Independent per-round noise.

    ``outcome_misreport_prob``: the UTP announces a uniformly chosen wrong outcome.
    ``qubit_flip_prob``: each transmitted qubit suffers a Pauli-Y error, which
    flips the encoded bit in either basis.
    """

    outcome_misreport_prob: float = 0.0
    qubit_flip_prob: float = 0.0

    def __post_init__(self):
        for name in ("outcome_misreport_prob", "qubit_flip_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")

    @property
    def noiseless(self) -> bool:
        return self.outcome_misreport_prob == 0 and self.qubit_flip_prob == 0


KeySource = Union[None, Bb84Config, str, np.ndarray, List[int]]


@dataclass(frozen=True)
class DialogueConfig:
    """One protocol run.

    ``key_source`` is either a :class:`Bb84Config` (target length must equal
    ``n``), an injected bit string of length ``n``, or ``None`` for BB84 with
    default settings seeded from ``seed``. ``messages`` optionally fixes
    ``(a, b)``; otherwise both are uniformly random.
    """

    n: int
    gamma: float = 0.1
    error_threshold: float = 0.05
    variant: ProtocolVariant = ProtocolVariant.PROTOCOL1
    noise: NoiseModel = field(default_factory=NoiseModel)
    seed: int = 0
    key_source: KeySource = None
    messages: Optional[Tuple[BitsLike, BitsLike]] = None

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.gamma > 0 and self.sample_size < 1:
            raise ValueError(f"gamma*n = {self.gamma * self.n} < 1; no rounds to estimate on")
        if not 0.0 <= self.error_threshold <= 1.0:
            raise ValueError("error_threshold must lie in [0, 1]")
        object.__setattr__(self, "variant", ProtocolVariant.parse(self.variant))
        check_seed(self.seed)
        ks = self.key_source
        if isinstance(ks, Bb84Config):
            if ks.target_key_length != self.n:
                raise ValueError("BB84 target_key_length must equal n")
        elif ks is not None and as_bits(ks, "key").size != self.n:
            raise ValueError("injected key length must equal n")
        if self.messages is not None:
            a, b = (as_bits(m, "message") for m in self.messages)
            if a.size != self.n or b.size != self.n:
                raise ValueError("injected messages must have length n")

    @property
    def sample_size(self) -> int:
        return int(np.floor(self.gamma * self.n + 1e-9))


class InconsistentOutcome(Exception):
    """An announced outcome has probability zero for the prepared pair (1-based round)."""

    def __init__(self, round_index: int):
        super().__init__(f"outcome at round {round_index} is impossible for the prepared qubits")
        self.round_index = round_index


class EmptySampleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DialogueTranscript:
    """Immutable record of one run.

    Sequences are numpy arrays; round indices (estimation sample, kept sets)
    are 1-based. Indices in ``kept_a``/``kept_b`` refer to the relabelled
    rounds ``1..n'``. ``alice_recovered`` is Alice's message as decoded by Bob,
    ``bob_recovered`` is Bob's as decoded by Alice.
    """

    variant: ProtocolVariant
    key: KeyMaterial
    a: np.ndarray
    b: np.ndarray
    qubits_a: np.ndarray
    qubits_b: np.ndarray
    m_seq: np.ndarray
    public_nonce: str
    estimation_indices: np.ndarray
    estimated_error: float
    aborted: bool
    abort_stage: Optional[str]
    relabeled_key: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    kept_a: np.ndarray
    kept_b: np.ndarray
    alice_recovered: np.ndarray
    bob_recovered: np.ndarray
    messages_log: Tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return int(self.a.size)

    @property
    def n_prime(self) -> int:
        return self.n - int(self.estimation_indices.size)

    @property
    def remaining_rounds(self) -> np.ndarray:
        """1-based original round numbers that survive estimation, in order."""
        mask = np.ones(self.n, dtype=bool)
        mask[self.estimation_indices - 1] = False
        return np.flatnonzero(mask) + 1

    @property
    def m_relabeled(self) -> np.ndarray:
        return self.m_seq[self.remaining_rounds - 1]

    @property
    def a_relabeled(self) -> np.ndarray:
        return self.a[self.remaining_rounds - 1]

    @property
    def b_relabeled(self) -> np.ndarray:
        return self.b[self.remaining_rounds - 1]

    @property
    def synchronized(self) -> bool:
        return np.array_equal(self.kept_a, self.kept_b)

    def __eq__(self, other):
        if not isinstance(other, DialogueTranscript):
            return NotImplemented
        for name in self.__dataclass_fields__:
            u, v = getattr(self, name), getattr(other, name)
            if name == "key":
                if not (np.array_equal(u.bits, v.bits) and u.parity_c == v.parity_c
                        and u.estimated_qber == v.estimated_qber):
                    return False
            elif isinstance(u, np.ndarray):
                if not np.array_equal(u, v):
                    return False
            elif u != v:
                return False
        return True

    __hash__ = None


# ---------------------------------------------------------------------------
# error estimation


def estimation_sample(public_nonce: str, n: int, count: int) -> np.ndarray:
    """Sorted 1-based sample of ``count`` rounds out of ``n``, expanded from a public nonce.

    Both parties evaluate this locally; nobody chooses the rounds.
    """
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    digest = hashlib.sha256(public_nonce.encode("ascii")).digest()
    rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "big")))
    return np.sort(rng.choice(n, size=count, replace=False)).astype(np.int64) + 1


def estimate_error(a: BitsLike, b: BitsLike, key: BitsLike, m_seq, sample) -> float:
    """Fraction of wrong guesses on the sampled rounds, both directions pooled.

    On each sampled round Alice's guess of ``b_i`` and Bob's guess of ``a_i``
    are compared with the revealed true bits, so the denominator is
    ``2 * len(sample)``. An empty sample yields 0 with an
    :class:`EmptySampleWarning`.
    """
    a, b, k = as_bits(a, "a"), as_bits(b, "b"), as_bits(key, "key")
    m = np.asarray(m_seq, dtype=np.int64)
    idx = np.asarray(sample, dtype=np.int64)
    if idx.size == 0:
        warnings.warn("empty estimation sample; error defined as 0", EmptySampleWarning)
        return 0.0
    if idx.min() < 1 or idx.max() > a.size:
        raise IndexError(f"sample index out of range 1..{a.size}")
    s = idx - 1
    wrong_b = decode_bits(a[s], k[s], m[s]) != b[s]
    wrong_a = decode_bits(b[s], k[s], m[s]) != a[s]
    return float(wrong_a.sum() + wrong_b.sum()) / (2 * idx.size)


def check_consistency(qubits_a, qubits_b, m_seq) -> None:
    """Raise :class:`InconsistentOutcome` at the first zero-probability announcement."""
    qa = np.asarray(qubits_a, dtype=np.int64)
    qb = np.asarray(qubits_b, dtype=np.int64)
    m = np.asarray(m_seq, dtype=np.int64)
    possible = (QUARTER_TABLE[qa, qb] == m[:, None]).any(axis=1)
    bad = np.flatnonzero(~possible)
    if bad.size:
        raise InconsistentOutcome(int(bad[0]) + 1)


# ---------------------------------------------------------------------------
# channel and roles


@dataclass(frozen=True)
class Message:
    sender: str
    recipient: str
    kind: str
    payload: object


class Channel:
    """Ordered, lossless in-process delivery.

    Messages to one recipient are delivered in the order they were sent. Every
    message is appended to ``log`` so a run can be audited afterwards.
    """

    def __init__(self):
        self._queues: Dict[str, Deque[Message]] = {}
        self.log: List[Message] = []

    def send(self, sender: str, recipient: str, kind: str, payload) -> None:
        msg = Message(sender, recipient, kind, payload)
        self._queues.setdefault(recipient, deque()).append(msg)
        self.log.append(msg)

    def receive(self, recipient: str, kind: str) -> Optional[Message]:
        """Pop the next message for ``recipient`` if it has the expected kind."""
        q = self._queues.get(recipient)
        if not q:
            return None
        if q[0].kind != kind:
            raise RuntimeError(f"{recipient} expected {kind!r}, got {q[0].kind!r}")
        return q.popleft()


class _Role:
    name = ""

    def __init__(self):
        self.state = "start"

    @property
    def finished(self) -> bool:
        return self.state in ("done", "aborted")

    def step(self, ch: Channel) -> bool:
        """Advance by at most one transition; return whether anything happened."""
        handler = getattr(self, f"_on_{self.state}", None)
        return bool(handler and handler(ch))


class Utp(_Role):
    """Measures each qubit pair in the Bell basis and announces the outcome."""

    name = "utp"

    def __init__(self, noise: NoiseModel, rng: np.random.Generator):
        super().__init__()
        self.noise = noise
        self.rng = rng
        self._received = {}

    def _on_start(self, ch):
        msg = ch.receive(self.name, "qubits")
        if msg is None:
            return False
        self._received[msg.sender] = msg.payload
        if len(self._received) < 2:
            return True
        m = sample_bell(self._received["alice"], self._received["bob"], self.rng).astype(np.int8)
        p = self.noise.outcome_misreport_prob
        if p > 0:
            lie = self.rng.random(m.size) < p
            shift = self.rng.integers(1, 4, size=m.size)
            m = np.where(lie, (m + shift) % 4, m).astype(np.int8)
        for party in ("alice", "bob"):
            ch.send(self.name, party, "outcomes", m.copy())
        self.state = "done"
        return True


class QuantumLink:
    """Carries a qubit sequence to the UTP, applying independent Pauli-Y errors."""

    def __init__(self, flip_prob: float, rng: np.random.Generator):
        self.flip_prob = flip_prob
        self.rng = rng

    def transmit(self, qubits: np.ndarray) -> np.ndarray:
        if self.flip_prob <= 0:
            return qubits.copy()
        flips = (self.rng.random(qubits.size) < self.flip_prob).astype(np.int8)
        return qubits ^ flips


class Party(_Role):
    """Alice or Bob. Both run the same program with the roles of a and b swapped."""

    def __init__(self, name, partner, own, key: KeyMaterial, cfg: DialogueConfig,
                 nonce: str, link: QuantumLink):
        super().__init__()
        self.name = name
        self.partner = partner
        self.own = own
        self.key = key
        self.cfg = cfg
        self.nonce = nonce
        self.link = link
        self.qubits = None
        self.m_seq = None
        self.sample = None
        self.estimated_error = 0.0
        self.result = {}

    def _on_start(self, ch):
        self.qubits = encode_bits(self.own, self.key.bits)
        ch.send(self.name, "utp", "qubits", self.link.transmit(self.qubits))
        self.state = "await_outcomes"
        return True

    def _on_await_outcomes(self, ch):
        msg = ch.receive(self.name, "outcomes")
        if msg is None:
            return False
        self.m_seq = msg.payload
        self.sample = estimation_sample(self.nonce, self.cfg.n, self.cfg.sample_size)
        s = self.sample - 1
        guesses = decode_bits(self.own[s], self.key.bits[s], self.m_seq[s])
        # reveal own bits and guesses on sampled rounds only
        ch.send(self.name, self.partner, "reveal",
                {"indices": self.sample, "bits": self.own[s], "guesses": guesses})
        self.state = "await_reveal"
        return True

    def _on_await_reveal(self, ch):
        msg = ch.receive(self.name, "reveal")
        if msg is None:
            return False
        rev = msg.payload
        if not np.array_equal(rev["indices"], self.sample):
            raise RuntimeError("parties disagree on the estimation sample")
        s = self.sample - 1
        if s.size == 0:
            self.estimated_error = 0.0
        else:
            mine = decode_bits(self.own[s], self.key.bits[s], self.m_seq[s]) != rev["bits"]
            theirs = rev["guesses"] != self.own[s]
            self.estimated_error = float(mine.sum() + theirs.sum()) / (2 * s.size)
        if self.estimated_error > self.cfg.error_threshold:
            self.state = "aborted"
            return True
        self._postprocess()
        self.state = "done"
        return True

    def _postprocess(self):
        keep = np.ones(self.cfg.n, dtype=bool)
        keep[self.sample - 1] = False
        m = self.m_seq[keep]
        k = self.key.bits[keep]
        own = self.own[keep]
        c = self.key.parity_c
        x = build_x(m)
        y = build_y(x, k, c)
        z = build_z(x, k, c)
        variant = self.cfg.variant
        if variant is ProtocolVariant.BASELINE:
            kept_a = kept_b = baseline_kept_indices(m)
        elif variant is ProtocolVariant.PROTOCOL1:
            kept_a = kept_b = kept_indices(x, y)
        else:
            kept_a, kept_b = kept_indices(x, y), kept_indices(x, z)
        partner_kept = kept_b if self.name == "alice" else kept_a
        guesses = decode_bits(own, k, m)
        self.result = dict(relabeled_key=k, x=x, y=y, z=z, kept_a=kept_a, kept_b=kept_b,
                           recovered_partner=guesses[partner_kept - 1])


class Scheduler:
    def __init__(self, roles):
        self.roles = list(roles)

    def run(self, ch: Channel, max_idle: int = 2) -> None:
        idle = 0
        while not all(r.finished for r in self.roles):
            progressed = False
            for r in self.roles:
                if not r.finished:
                    progressed |= r.step(ch)
            idle = 0 if progressed else idle + 1
            if idle >= max_idle:
                stuck = {r.name: r.state for r in self.roles if not r.finished}
                raise RuntimeError(f"protocol deadlock: {stuck}")


# ---------------------------------------------------------------------------
# drivers

_EMPTY_BITS = np.zeros(0, dtype=np.uint8)
_EMPTY_IDX = np.zeros(0, dtype=np.int64)


def _establish_key(cfg: DialogueConfig, rng: np.random.Generator) -> KeyMaterial:
    ks = cfg.key_source
    if ks is None:
        ks = Bb84Config(target_key_length=cfg.n, seed=int(rng.integers(0, 2**63)))
    if isinstance(ks, Bb84Config):
        return run_bb84(ks)
    return KeyMaterial.from_bits(ks)


def _aborted_transcript(cfg, key, a, b, stage, error=0.0, qa=None, qb=None, m=None,
                        nonce="", sample=_EMPTY_IDX, log=()):
    e8 = np.zeros(0, dtype=np.int8)
    return DialogueTranscript(
        variant=cfg.variant, key=key, a=a, b=b,
        qubits_a=e8 if qa is None else qa, qubits_b=e8 if qb is None else qb,
        m_seq=e8 if m is None else m, public_nonce=nonce, estimation_indices=sample,
        estimated_error=error, aborted=True, abort_stage=stage,
        relabeled_key=_EMPTY_BITS, x=_EMPTY_BITS, y=_EMPTY_BITS, z=_EMPTY_BITS,
        kept_a=_EMPTY_IDX, kept_b=_EMPTY_IDX,
        alice_recovered=_EMPTY_BITS, bob_recovered=_EMPTY_BITS, messages_log=tuple(log),
    )


def run_dialogue(cfg: DialogueConfig) -> DialogueTranscript:
    """Execute one complete run. Protocol aborts are recorded, not raised.

    ``transcript.aborted`` is set with ``abort_stage`` equal to ``"bb84"``
    (key establishment failed) or ``"estimation"`` (sampled dialogue error
    above ``cfg.error_threshold``).
    """
    streams = spawn_streams(cfg.seed, ["key", "messages", "link", "utp", "coin"])
    if cfg.messages is not None:
        a, b = (as_bits(mm, "message") for mm in cfg.messages)
    else:
        a = random_bits(streams["messages"], cfg.n)
        b = random_bits(streams["messages"], cfg.n)
    try:
        key = _establish_key(cfg, streams["key"])
    except (Bb84Abort, InsufficientBits) as exc:
        qber = getattr(exc, "estimated_qber", 0.0)
        key = KeyMaterial(bits=_EMPTY_BITS, parity_c=0, estimated_qber=qber)
        return _aborted_transcript(cfg, key, a, b, "bb84", error=qber)

    nonce = streams["coin"].bytes(16).hex()
    link = QuantumLink(cfg.noise.qubit_flip_prob, streams["link"])
    alice = Party("alice", "bob", a, key, cfg, nonce, link)
    bob = Party("bob", "alice", b, key, cfg, nonce, link)
    utp = Utp(cfg.noise, streams["utp"])
    ch = Channel()
    Scheduler([alice, bob, utp]).run(ch)
    log = tuple(f"{msg.sender}->{msg.recipient}:{msg.kind}" for msg in ch.log)

    if alice.estimated_error != bob.estimated_error:
        raise RuntimeError("parties computed different error estimates")
    if alice.state == "aborted" or bob.state == "aborted":
        return _aborted_transcript(cfg, key, a, b, "estimation", alice.estimated_error,
                                   alice.qubits, bob.qubits, alice.m_seq, nonce,
                                   alice.sample, log)
    ra, rb = alice.result, bob.result
    for name in ("x", "y", "z", "kept_a", "kept_b"):
        if not np.array_equal(ra[name], rb[name]):
            raise RuntimeError(f"parties diverged on {name}")
    return DialogueTranscript(
        variant=cfg.variant, key=key, a=a, b=b,
        qubits_a=alice.qubits, qubits_b=bob.qubits, m_seq=alice.m_seq,
        public_nonce=nonce, estimation_indices=alice.sample,
        estimated_error=alice.estimated_error, aborted=False, abort_stage=None,
        relabeled_key=ra["relabeled_key"], x=ra["x"], y=ra["y"], z=ra["z"],
        kept_a=ra["kept_a"], kept_b=ra["kept_b"],
        alice_recovered=rb["recovered_partner"], bob_recovered=ra["recovered_partner"],
        messages_log=log,
    )


def inject_replay(key: BitsLike, a: BitsLike, b: BitsLike, m_seq,
                  variant: Union[str, ProtocolVariant] = ProtocolVariant.PROTOCOL1,
                  check: bool = True) -> DialogueTranscript:
    """Replay fixed announcements from the post-measurement step onward, without estimation.

    Raises :class:`InconsistentOutcome` if ``check`` is set and some
    announcement is impossible for the encoded qubits.
    """
    key_m = KeyMaterial.from_bits(key)
    a, b = as_bits(a, "a"), as_bits(b, "b")
    m = np.asarray(m_seq, dtype=np.int8)
    if not (key_m.bits.size == a.size == b.size == m.size):
        raise ValueError("key, a, b and m must have equal length")
    qa, qb = encode_bits(a, key_m.bits), encode_bits(b, key_m.bits)
    if check:
        check_consistency(qa, qb, m)

    cfg = DialogueConfig(n=a.size, gamma=0.0, variant=variant, key_source=key_m.bits,
                         messages=(a, b))
    ch = Channel()
    alice = Party("alice", "bob", a, key_m, cfg, "", QuantumLink(0.0, None))
    bob = Party("bob", "alice", b, key_m, cfg, "", QuantumLink(0.0, None))
    for p in (alice, bob):
        p.step(ch)  # encode and send qubits
    for who in ("alice", "bob"):
        ch.send("utp", who, "outcomes", m.copy())
    ch.receive("utp", "qubits")
    ch.receive("utp", "qubits")
    Scheduler([alice, bob]).run(ch)
    ra, rb = alice.result, bob.result
    return DialogueTranscript(
        variant=cfg.variant, key=key_m, a=a, b=b, qubits_a=qa, qubits_b=qb, m_seq=m,
        public_nonce="", estimation_indices=_EMPTY_IDX, estimated_error=0.0,
        aborted=False, abort_stage=None, relabeled_key=ra["relabeled_key"],
        x=ra["x"], y=ra["y"], z=ra["z"], kept_a=ra["kept_a"], kept_b=ra["kept_b"],
        alice_recovered=rb["recovered_partner"], bob_recovered=ra["recovered_partner"],
        messages_log=tuple(f"{x.sender}->{x.recipient}:{x.kind}" for x in ch.log),
    )
