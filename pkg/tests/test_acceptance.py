"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a PASS/FAIL line that is printed in the terminal summary
under "acceptance criteria".
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from mdiqd.analysis import advantage, advantage_p1, advantage_p2, min_l, monte_carlo
from mdiqd.bb84 import Bb84Config, simulate_bb84
from mdiqd.bits import bits_to_str, random_bits
from mdiqd.codec import decode_guess, encode_bits
from mdiqd.dialogue import DialogueConfig, NoiseModel, ProtocolVariant, inject_replay
from mdiqd.qcore import (
    BellOutcome as B,
    PreparedQubit as Q,
    bell_distribution,
    make_rng,
    outcome_probability,
    sample_bell,
)
from mdiqd.seqfilter import build_x, build_y, build_z, kept_indices

from conftest import A, A_PRIME, B_MSG, B_PRIME_P1, B_PRIME_P2, KEY, M, X, X_XOR_Y, X_XOR_Z, Y, Z
from test_qcore import TABLE1


def _s(bits):
    return "".join(str(int(v)) for v in bits)


def test_ac1_golden_protocol1(acceptance):
    t0 = time.perf_counter()
    t = inject_replay(KEY, A, B_MSG, M, ProtocolVariant.PROTOCOL1)
    elapsed = time.perf_counter() - t0
    got = (_s(t.x), _s(t.y), _s(t.x ^ t.y), bits_to_str(t.alice_recovered),
           bits_to_str(t.bob_recovered))
    want = (_s(X), _s(Y), _s(X_XOR_Y), A_PRIME, B_PRIME_P1)
    ok = got == want and elapsed < 1.0
    acceptance("1 golden replay, protocol1", ok, f"exact={got == want} runtime={elapsed:.3f}s")
    assert got == want
    assert elapsed < 1.0


def test_ac2_golden_protocol2(acceptance):
    t = inject_replay(KEY, A, B_MSG, M, ProtocolVariant.PROTOCOL2)
    got = (_s(t.z), _s(t.x ^ t.z), bits_to_str(t.alice_recovered), bits_to_str(t.bob_recovered))
    want = (_s(Z), _s(X_XOR_Z), A_PRIME, B_PRIME_P2)
    acceptance("2 golden replay, protocol2", got == want, f"observed={got}")
    assert got == want


def test_ac3_bell_table(acceptance):
    t0 = time.perf_counter()
    exact = all([bell_distribution(*pair)[m] for m in B] == list(row)
                for pair, row in TABLE1.items())
    rng = make_rng(2024)
    n = 10**5
    worst = 0.0
    for (qa, qb), row in TABLE1.items():
        m = sample_bell(np.full(n, qa), np.full(n, qb), rng)
        counts = np.bincount(m, minlength=4)
        for o in B:
            p = float(row[o])
            sigma = math.sqrt(n * p * (1 - p))
            dev = abs(counts[o] - n * p)
            if sigma == 0:
                worst = max(worst, math.inf if dev else 0.0)
            else:
                worst = max(worst, dev / sigma)
    elapsed = time.perf_counter() - t0
    ok = exact and worst <= 4 and elapsed < 10
    acceptance("3 Bell outcome table", ok,
               f"exact={exact} worst={worst:.2f} sigma runtime={elapsed:.2f}s")
    assert exact
    assert worst <= 4
    assert elapsed < 10


def test_ac4_decode_exhaustive(acceptance):
    checks = failures = 0
    for a in (0, 1):
        for b in (0, 1):
            for k in (0, 1):
                qa, qb = encode_bits([a], [k])[0], encode_bits([b], [k])[0]
                for m in B:
                    if outcome_probability(qa, qb, m) == 0:
                        continue
                    checks += 2
                    failures += decode_guess(a, k, m) != b
                    failures += decode_guess(b, k, m) != a
    ok = checks == 32 and failures == 0
    acceptance("4 decode correctness", ok, f"checks={checks} failures={failures}")
    assert checks == 32
    assert failures == 0


@pytest.mark.slow
def test_ac5_keep_fractions(acceptance):
    t0 = time.perf_counter()
    res = {}
    for v in ProtocolVariant:
        mc = monte_carlo(DialogueConfig(n=10**5, variant=v, seed=5), trials=1)
        res[v] = (mc.keep_fraction_a, mc.keep_fraction_b)
    elapsed = time.perf_counter() - t0
    p1 = res[ProtocolVariant.PROTOCOL1]
    p2 = res[ProtocolVariant.PROTOCOL2]
    base = res[ProtocolVariant.BASELINE]
    ok = (abs(p1[0] - 0.75) <= 0.02 and p1[0] == p1[1]
          and all(abs(f - 0.75) <= 0.02 for f in p2)
          and abs(base[0] - 0.5) <= 0.02 and elapsed < 30)
    detail = (f"p1={p1[0]:.4f} p2=({p2[0]:.4f},{p2[1]:.4f}) baseline={base[0]:.4f} "
              f"runtime={elapsed:.2f}s")
    acceptance("5 keep fractions", ok, detail)
    assert ok, detail


def test_ac6_xor_leakage(acceptance):
    rng = make_rng(6)
    n = 1000
    a, b, k = random_bits(rng, n), random_bits(rng, n), random_bits(rng, n)
    m = sample_bell(encode_bits(a, k), encode_bits(b, k), rng)
    x = a ^ b
    phi_plus_ok = bool(np.all(x[m == B.PhiPlus] == 0))
    psi_minus_ok = bool(np.all(x[m == B.PsiMinus] == 1))
    secret = np.isin(m, (B.PhiMinus, B.PsiPlus))
    share = float(x[secret].mean())
    ok = phi_plus_ok and psi_minus_ok and abs(share - 0.5) <= 0.05
    acceptance("6 XOR leakage", ok,
               f"PhiPlus={phi_plus_ok} PsiMinus={psi_minus_ok} "
               f"secret-round XOR=1 share={share:.3f} over {int(secret.sum())}")
    assert phi_plus_ok and psi_minus_ok
    assert abs(share - 0.5) <= 0.05


def test_ac7a_advantage_values(acceptance):
    got = (advantage_p1(2), advantage_p1(4), advantage_p2(1))
    want = (1 / 8, 3 / 64, 1 / 4)
    acceptance("7a advantage closed forms", got == want, f"values={got}")
    assert got == want


def test_ac7b_min_l_bound(acceptance):
    # log-uniform epsilon over (2^-40, 1)
    rng = make_rng(7)
    eps = np.exp2(-40 * rng.random(1000))
    eps = eps[(eps > 2.0**-40) & (eps < 1.0)]
    bad = {}
    for v in (ProtocolVariant.PROTOCOL1, ProtocolVariant.PROTOCOL2):
        bad[v.value] = [float(e) for e in eps if not advantage(v, min_l(v, e)) < e]
    n_bad = sum(len(x) for x in bad.values())
    example = ""
    if bad["protocol1"]:
        e = bad["protocol1"][0]
        example = (f" e.g. protocol1 eps={e:.3g} min_l={min_l('protocol1', e)} "
                   f"adv={advantage('protocol1', min_l('protocol1', e)):.3g}")
    acceptance("7b advantage(min_l(eps)) < eps", n_bad == 0,
               f"violations p1={len(bad['protocol1'])} p2={len(bad['protocol2'])} "
               f"of {eps.size} each{example}")
    assert n_bad == 0


def test_ac8_sequence_invariants(acceptance):
    rng = make_rng(8)
    failures = 0
    instances = 10**4
    for _ in range(instances):
        n = int(rng.integers(1, 65))
        m = rng.integers(0, 4, size=n)
        key = random_bits(rng, n)
        c = int(rng.integers(0, 2))
        x = build_x(m)
        y, z = build_y(x, key, c), build_z(x, key, c)
        ones = x == 1
        if np.any(y[ones]) or np.any(z[ones]) or not np.all((y ^ z)[~ones] == 1):
            failures += 1
            continue
        kept_y, kept_z = kept_indices(x, y), kept_indices(x, z)
        zeros = int((~ones).sum())
        # every X=1 round is kept by both; each X=0 round by exactly one of them
        if (kept_y.size != int(ones.sum()) + int(y.sum())
                or kept_z.size != int(ones.sum()) + int(z.sum())
                or kept_y.size + kept_z.size != 2 * int(ones.sum()) + zeros
                or np.intersect1d(kept_y, kept_z).size != int(ones.sum())):
            failures += 1
    acceptance("8 sequence invariants", failures == 0,
               f"instances={instances} failures={failures}")
    assert failures == 0


@pytest.mark.slow
def test_ac9_abort_path(acceptance):
    trials = 500
    noisy = DialogueConfig(n=2000, gamma=0.1, error_threshold=0.05,
                           variant=ProtocolVariant.BASELINE, seed=9,
                           noise=NoiseModel(outcome_misreport_prob=0.5))
    clean = DialogueConfig(n=2000, gamma=0.1, error_threshold=0.05,
                           variant=ProtocolVariant.BASELINE, seed=9)
    assert noisy.sample_size == 200
    noisy_rate = monte_carlo(noisy, trials).abort_rate
    clean_aborts = monte_carlo(clean, trials).totals["aborted"]
    ok = noisy_rate >= 0.99 and clean_aborts == 0
    acceptance("9 abort path", ok,
               f"noisy abort rate={noisy_rate:.3f} noiseless aborts={clean_aborts}/{trials}")
    assert noisy_rate >= 0.99
    assert clean_aborts == 0


@pytest.mark.slow
def test_ac10_bb84_eve(acceptance):
    runs = 100
    eve, clean = [], []
    for i in range(runs):
        base = dict(target_key_length=2500, raw_multiplier=4, seed=1000 + i)
        r = simulate_bb84(Bb84Config(eve_mode="intercept_resend", **base))
        eve.append(r.sifted_qber)
        assert r.raw_rounds == 10**4
        clean.append(simulate_bb84(Bb84Config(**base)).sifted_qber)
    mean = float(np.mean(eve))
    ok = 0.23 <= mean <= 0.27 and max(clean) == 0
    acceptance("10 BB84 intercept-resend", ok,
               f"mean QBER={mean:.4f} eve-off max QBER={max(clean)}")
    assert 0.23 <= mean <= 0.27
    assert max(clean) == 0
