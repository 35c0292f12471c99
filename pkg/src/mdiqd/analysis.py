"""Adversary advantage, leakage accounting and Monte-Carlo aggregation.

The closed-form advantages substitute the expected number of kept leak
rounds (half of them) into the success probabilities, so they are functions
of the leak count ``l`` alone. :func:`expected_success_p1` and
:func:`utp_guess_experiment` give the exact expectation and an empirical
estimate for comparison.

Logarithms are base 2 throughout.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .bits import BitsLike, as_bits, random_bits
from .dialogue import DialogueConfig, DialogueTranscript, ProtocolVariant, run_dialogue
from .qcore import BellOutcome, PreparedQubit, check_seed, make_rng
from .seqfilter import zero_positions

__all__ = [
    "advantage_p1",
    "advantage_p2",
    "advantage",
    "min_l_p1",
    "min_l_p2",
    "min_l",
    "secure_min_l",
    "LeakageStats",
    "leakage_stats",
    "expected_success_p1",
    "expected_success_p2",
    "utp_guess_experiment",
    "pad_messages",
    "padding_for_target_l",
    "TrialStats",
    "MonteCarloReport",
    "trial_seeds",
    "run_trial",
    "aggregate",
    "monte_carlo",
]


# ---------------------------------------------------------------------------
# closed forms


def _check_l(l: int) -> int:
    if int(l) != l or l < 0:
        raise ValueError(f"l must be a non-negative integer, got {l!r}")
    return int(l)


def advantage_p1(l: int) -> float:
    """``2**-l * (1 - 2**(-l/2))``."""
    l = _check_l(l)
    return math.ldexp(-math.expm1(-0.5 * l * math.log(2)), -l)


def advantage_p2(l: int) -> float:
    """``2**-l * (1 - 2**-l)``."""
    l = _check_l(l)
    return math.ldexp(-math.expm1(-l * math.log(2)), -l)


def _variant(protocol) -> ProtocolVariant:
    v = ProtocolVariant.parse(protocol)
    if v is ProtocolVariant.BASELINE:
        raise ValueError("advantage formulas exist for protocol1 and protocol2 only")
    return v


def advantage(protocol, l: int) -> float:
    return advantage_p1(l) if _variant(protocol) is ProtocolVariant.PROTOCOL1 else advantage_p2(l)


def _log2_inv(epsilon: float) -> Fraction:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    # exact for powers of two, which keeps integer thresholds from drifting
    return Fraction(-math.log2(epsilon))


def min_l_p1(epsilon: float) -> int:
    """Smallest integer strictly above ``max(2, (2/3) log2(1/eps))``."""
    bound = max(Fraction(2), Fraction(2, 3) * _log2_inv(epsilon))
    return math.floor(bound) + 1


def min_l_p2(epsilon: float) -> int:
    """Smallest integer strictly above ``max(1, (1/2) log2(1/eps))``."""
    bound = max(Fraction(1), Fraction(1, 2) * _log2_inv(epsilon))
    return math.floor(bound) + 1


def min_l(protocol, epsilon: float) -> int:
    return min_l_p1(epsilon) if _variant(protocol) is ProtocolVariant.PROTOCOL1 else min_l_p2(epsilon)


def secure_min_l(protocol, epsilon: float) -> int:
    """Smallest ``l`` with ``advantage(l) < epsilon``, searched directly.

    Starts at 3 (protocol1) or 2 (protocol2), from where both advantages are
    strictly decreasing. Unlike :func:`min_l`, the result always satisfies
    the bound, because the closed-form thresholds only bound a lower
    estimate of the advantage.
    """
    v = _variant(protocol)
    _log2_inv(epsilon)
    l = 3 if v is ProtocolVariant.PROTOCOL1 else 2
    while advantage(v, l) >= epsilon:
        l += 1
    return l


# ---------------------------------------------------------------------------
# leakage


@dataclass(frozen=True)
class LeakageStats:
    """What the UTP learns from the announcements of one run.

    ``zero_positions`` are 1-based relabelled rounds where X is 0. ``k_prime``
    is the key consumed on those rounds: the j-th zero uses ``k_j``, the same
    indexing as the Y/Z sequences, so ``c1`` counts kept leak rounds exactly.
    """

    l: int
    c1: int
    zero_positions: np.ndarray
    e: np.ndarray
    f: np.ndarray
    k_prime: np.ndarray
    xor_view: np.ndarray


def leakage_stats(t: DialogueTranscript) -> LeakageStats:
    if t.aborted:
        raise ValueError("leakage is undefined for an aborted run")
    zeros = zero_positions(t.x)
    m = t.m_relabeled[zeros - 1]
    if not np.all((m == BellOutcome.PhiPlus) | (m == BellOutcome.PsiMinus)):
        raise AssertionError("zero of X at a round that is not PhiPlus/PsiMinus")
    xor_view = (m == BellOutcome.PsiMinus).astype(np.uint8)
    k_prime = t.relabeled_key[: zeros.size]
    return LeakageStats(
        l=int(zeros.size),
        c1=int(np.count_nonzero(k_prime == t.key.parity_c)),
        zero_positions=zeros,
        e=t.a_relabeled[zeros - 1],
        f=t.b_relabeled[zeros - 1],
        k_prime=k_prime,
        xor_view=xor_view,
    )


def expected_success_p1(l: int) -> Tuple[Fraction, Fraction]:
    """Exact ``(E[Pr(UTP recovers kept pairs)], E[Pr(random pair guess)])`` for protocol1.

    The UTP guesses the keep pattern (``2**-l``) and one bit per kept pair,
    the other following from the known XOR (``2**-c1``). A blind guesser
    needs both bits of every kept pair (``4**-c1``). ``c1 ~ Binomial(l, 1/2)``
    gives ``(3/8)**l`` and ``(5/8)**l``.
    """
    l = _check_l(l)
    e1 = e2 = Fraction(0)
    for c1 in range(l + 1):
        w = Fraction(math.comb(l, c1), 2**l)
        e1 += w * Fraction(1, 2 ** (l + c1))
        e2 += w * Fraction(1, 4**c1)
    return e1, e2


def expected_success_p2(l: int) -> Tuple[Fraction, Fraction]:
    """Protocol2 counterpart: ``(2**-2l, 2**-l)``, independent of ``c1``."""
    l = _check_l(l)
    return Fraction(1, 4**l), Fraction(1, 2**l)


def utp_guess_experiment(protocol, l: int, trials: int, seed: int = 0) -> Dict[str, float]:
    """Monte-Carlo estimate of the UTP's success against a blind guesser on ``l`` leak rounds.

    Each trial draws fresh message bits, key bits and parity. The UTP knows
    ``e XOR f`` and guesses which rounds are kept and the kept bits; the blind
    guesser knows which rounds are kept but not the XOR.
    """
    v = _variant(protocol)
    l = _check_l(l)
    rng = make_rng(seed)
    e = rng.integers(0, 2, size=(trials, l), dtype=np.uint8)
    f = rng.integers(0, 2, size=(trials, l), dtype=np.uint8)
    k = rng.integers(0, 2, size=(trials, l), dtype=np.uint8)
    c = rng.integers(0, 2, size=(trials, 1), dtype=np.uint8)
    keep_a = k == c  # protocol1: pair kept; protocol2: Alice's bit kept, else Bob's
    guess_keep = rng.integers(0, 2, size=(trials, l), dtype=np.uint8).astype(bool)
    ge = rng.integers(0, 2, size=(trials, l), dtype=np.uint8)
    gf_blind = rng.integers(0, 2, size=(trials, l), dtype=np.uint8)
    ge_blind = rng.integers(0, 2, size=(trials, l), dtype=np.uint8)
    pattern_ok = np.all(guess_keep == keep_a, axis=1)
    if v is ProtocolVariant.PROTOCOL1:
        gf = ge ^ e ^ f  # XOR known
        pair_ok = (ge == e) & (gf == f)
        utp = pattern_ok & np.all(pair_ok | ~keep_a, axis=1)
        blind = np.all(((ge_blind == e) & (gf_blind == f)) | ~keep_a, axis=1)
        exact = expected_success_p1(l)
    else:
        bit_ok = np.where(keep_a, ge == e, ge == f)
        utp = pattern_ok & np.all(bit_ok, axis=1)
        blind = np.all(np.where(keep_a, ge_blind == e, gf_blind == f), axis=1)
        exact = expected_success_p2(l)
    return {
        "l": l,
        "trials": trials,
        "utp_success": float(utp.mean()),
        "blind_success": float(blind.mean()),
        "empirical_advantage": float(abs(blind.mean() - utp.mean())),
        "exact_utp_success": float(exact[0]),
        "exact_blind_success": float(exact[1]),
        "exact_advantage": float(abs(exact[1] - exact[0])),
        "closed_form_advantage": advantage(v, l),
    }


def pad_messages(a: BitsLike, b: BitsLike, count: int, rng: np.random.Generator):
    """Append ``count`` random bits to both messages; returns ``(a, b, pad_mask)``.

    Padding rounds raise the number of leak rounds by about ``count / 2``.
    The caller needs ``count`` extra key bits as well.
    """
    a, b = as_bits(a, "a"), as_bits(b, "b")
    if count < 0:
        raise ValueError("count must be non-negative")
    mask = np.concatenate([np.zeros(a.size, bool), np.ones(count, bool)])
    return (np.concatenate([a, random_bits(rng, count)]),
            np.concatenate([b, random_bits(rng, count)]), mask)


def padding_for_target_l(n_prime: int, target_l: int) -> int:
    """Pad rounds needed so the expected leak count ``(n' + pad) / 2`` reaches ``target_l``."""
    return max(0, 2 * int(target_l) - int(n_prime))


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass
class TrialStats:
    """Integer tallies of one trial; sums of these are order-independent."""

    trials: int = 0
    aborted: int = 0
    n_prime: int = 0
    kept_a: int = 0
    kept_b: int = 0
    correct_a: int = 0
    correct_b: int = 0
    leak_rounds: int = 0
    kept_leak: int = 0
    xor_view_errors: int = 0
    utp_pair_hits: int = 0
    blind_pair_hits: int = 0
    guessed_pairs: int = 0
    estimation_wrong: int = 0
    estimation_checks: int = 0
    # counts[qa][qb][m], prepared qubits vs announced outcome
    counts: List[List[List[int]]] = field(
        default_factory=lambda: [[[0] * 4 for _ in range(4)] for _ in range(4)])

    def __add__(self, other: "TrialStats") -> "TrialStats":
        out = TrialStats()
        for name in self.__dataclass_fields__:
            if name != "counts":
                setattr(out, name, getattr(self, name) + getattr(other, name))
        out.counts = (np.asarray(self.counts) + np.asarray(other.counts)).tolist()
        return out


def trial_seeds(master_seed: int, trials: int) -> List[int]:
    """64-bit per-trial seeds; trial i's seed depends only on (master_seed, i)."""
    children = np.random.SeedSequence(check_seed(master_seed)).spawn(trials)
    return [int(ss.generate_state(1, dtype=np.uint64)[0]) for ss in children]


def run_trial(cfg: DialogueConfig, seed: int) -> TrialStats:
    t = run_dialogue(replace(cfg, seed=seed))
    checks = 2 * int(t.estimation_indices.size)
    s = TrialStats(trials=1, estimation_checks=checks,
                   estimation_wrong=int(round(t.estimated_error * checks)))
    if t.aborted:
        s.aborted = 1
        return s
    counts = np.zeros((4, 4, 4), dtype=np.int64)
    np.add.at(counts, (t.qubits_a.astype(int), t.qubits_b.astype(int), t.m_seq.astype(int)), 1)
    s.counts = counts.tolist()
    a_rel, b_rel = t.a_relabeled, t.b_relabeled
    s.n_prime = t.n_prime
    s.kept_a, s.kept_b = int(t.kept_a.size), int(t.kept_b.size)
    s.correct_a = int(np.count_nonzero(t.alice_recovered == a_rel[t.kept_a - 1]))
    s.correct_b = int(np.count_nonzero(t.bob_recovered == b_rel[t.kept_b - 1]))
    leak = leakage_stats(t)
    s.leak_rounds = leak.l
    s.kept_leak = leak.c1
    s.xor_view_errors = int(np.count_nonzero(leak.xor_view != (leak.e ^ leak.f)))
    # UTP guesses one bit of each kept leak pair and completes it with the XOR;
    # a blind guesser picks both bits.
    kept = leak.k_prime == t.key.parity_c
    rng = make_rng(seed ^ 0x5EED)
    g = random_bits(rng, leak.l)
    blind_e, blind_f = random_bits(rng, leak.l), random_bits(rng, leak.l)
    utp_hit = (g == leak.e) & ((g ^ leak.xor_view) == leak.f)
    blind_hit = (blind_e == leak.e) & (blind_f == leak.f)
    s.guessed_pairs = int(kept.sum())
    s.utp_pair_hits = int((utp_hit & kept).sum())
    s.blind_pair_hits = int((blind_hit & kept).sum())
    return s


def _run_chunk(args) -> TrialStats:
    cfg, seeds = args
    total = TrialStats()
    for sd in seeds:
        total = total + run_trial(cfg, sd)
    return total


def aggregate(parts: Sequence[TrialStats]) -> TrialStats:
    total = TrialStats()
    for p in parts:
        total = total + p
    return total


def _ratio(num, den) -> float:
    return float(num) / den if den else 0.0


@dataclass
class MonteCarloReport:
    variant: str
    trials: int
    n: int
    master_seed: int
    abort_rate: float
    keep_fraction_a: float
    keep_fraction_b: float
    keep_fraction: float
    decode_accuracy_a: float
    decode_accuracy_b: float
    decode_accuracy: float
    mean_estimated_error: float
    mean_leak_fraction: float
    kept_leak_fraction: float
    xor_view_error_rate: float
    utp_pair_success: float
    blind_pair_success: float
    outcome_frequencies: Dict[str, Dict[str, float]]
    totals: Dict[str, object]

    def to_dict(self) -> dict:
        return asdict(self)


def _report(cfg: DialogueConfig, trials: int, tot: TrialStats) -> MonteCarloReport:
    freqs = {}
    counts = np.asarray(tot.counts)
    for qa in PreparedQubit:
        for qb in PreparedQubit:
            row = counts[qa, qb]
            if row.sum():
                freqs[f"{qa.name},{qb.name}"] = {
                    m.name: float(row[m]) / float(row.sum()) for m in BellOutcome}
    kept_total = tot.kept_a + tot.kept_b
    return MonteCarloReport(
        variant=cfg.variant.value,
        trials=trials,
        n=cfg.n,
        master_seed=cfg.seed,
        abort_rate=_ratio(tot.aborted, tot.trials),
        keep_fraction_a=_ratio(tot.kept_a, tot.n_prime),
        keep_fraction_b=_ratio(tot.kept_b, tot.n_prime),
        keep_fraction=_ratio(kept_total, 2 * tot.n_prime),
        decode_accuracy_a=_ratio(tot.correct_a, tot.kept_a),
        decode_accuracy_b=_ratio(tot.correct_b, tot.kept_b),
        decode_accuracy=_ratio(tot.correct_a + tot.correct_b, kept_total),
        mean_estimated_error=_ratio(tot.estimation_wrong, tot.estimation_checks),
        mean_leak_fraction=_ratio(tot.leak_rounds, tot.n_prime),
        kept_leak_fraction=_ratio(tot.kept_leak, tot.leak_rounds),
        xor_view_error_rate=_ratio(tot.xor_view_errors, tot.leak_rounds),
        utp_pair_success=_ratio(tot.utp_pair_hits, tot.guessed_pairs),
        blind_pair_success=_ratio(tot.blind_pair_hits, tot.guessed_pairs),
        outcome_frequencies=freqs,
        totals={k: v for k, v in asdict(tot).items() if k != "counts"},
    )


def monte_carlo(cfg: DialogueConfig, trials: int, workers: int = 1) -> MonteCarloReport:
    """Run ``trials`` independent dialogues and pool their tallies.

    Trial seeds come from :func:`trial_seeds`. Tallies are integer sums, so
    the report does not depend on how trials are split across ``workers``
    or on completion order.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seeds = trial_seeds(cfg.seed, trials)
    if workers <= 1:
        tot = _run_chunk((cfg, seeds))
    else:
        chunks = [(cfg, seeds[i::workers]) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tot = aggregate(list(pool.map(_run_chunk, chunks)))
    return _report(cfg, trials, tot)
