from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdiqd.qcore import (
    BellOutcome as B,
    PreparedQubit as Q,
    bell_distribution,
    make_rng,
    measure_bell,
    outcome_probability,
    sample_bell,
    spawn_streams,
)

from oracles import born

PAIRS = [(qa, qb) for qa in Q for qb in Q]
half, quarter = Fraction(1, 2), Fraction(1, 4)

# rows of the published table: prepared pair -> (PhiPlus, PhiMinus, PsiPlus, PsiMinus)
TABLE1 = {
    (Q.Z0, Q.Z0): (half, half, 0, 0),
    (Q.Z0, Q.Z1): (0, 0, half, half),
    (Q.Z1, Q.Z0): (0, 0, half, half),
    (Q.Z1, Q.Z1): (half, half, 0, 0),
    (Q.XPlus, Q.XPlus): (half, 0, half, 0),
    (Q.XPlus, Q.XMinus): (0, half, 0, half),
    (Q.XMinus, Q.XPlus): (0, half, 0, half),
    (Q.XMinus, Q.XMinus): (half, 0, half, 0),
}


@pytest.mark.parametrize("pair", list(TABLE1))
def test_same_basis_rows_match_table(pair):
    dist = bell_distribution(*pair)
    assert [dist[m] for m in B] == list(TABLE1[pair])


@pytest.mark.parametrize("pair", PAIRS)
def test_matches_float_state_vector_oracle(pair):
    dist = bell_distribution(*pair)
    ref = born(*pair)
    for m in B:
        assert float(dist[m]) == pytest.approx(ref[m], abs=1e-12)


@pytest.mark.parametrize("pair", PAIRS)
def test_normalised_and_dyadic(pair):
    dist = bell_distribution(*pair)
    assert sum(dist.values()) == 1
    assert all((4 * p).denominator == 1 for p in dist.values())


def test_mixed_basis_is_uniform():
    assert bell_distribution(Q.Z0, Q.XPlus) == {m: quarter for m in B}


def test_outcome_probability_examples():
    assert outcome_probability(Q.XMinus, Q.XPlus, B.PhiMinus) == half
    assert outcome_probability(Q.Z0, Q.Z1, B.PhiPlus) == 0
    assert outcome_probability(Q.Z0, Q.XPlus, B.PsiMinus) == quarter


def test_measure_bell_support():
    rng = make_rng(42)
    assert {measure_bell(Q.Z0, Q.Z0, rng) for _ in range(200)} == {B.PhiPlus, B.PhiMinus}
    assert {measure_bell(Q.Z1, Q.Z0, rng) for _ in range(200)} == {B.PsiPlus, B.PsiMinus}


def test_measure_bell_deterministic():
    first = [measure_bell(Q.XPlus, Q.Z1, make_rng(42)) for _ in range(3)]
    assert len(set(first)) == 1
    a = [measure_bell(Q.XPlus, Q.Z1, r) for r in [make_rng(42)] for _ in range(50)]
    r = make_rng(42)
    b = [measure_bell(Q.XPlus, Q.Z1, r) for _ in range(50)]
    assert a == b


def test_sampling_within_four_sigma_and_support():
    N = 100_000
    rng = make_rng(2024)
    for qa, qb in PAIRS:
        draws = sample_bell(np.full(N, qa), np.full(N, qb), rng)
        counts = np.bincount(draws, minlength=4)
        for m in B:
            p = float(outcome_probability(qa, qb, m))
            if p == 0:
                assert counts[m] == 0
                continue
            sigma = np.sqrt(N * p * (1 - p))
            assert abs(counts[m] - N * p) <= 4 * sigma, (qa, qb, m)


@given(st.integers(0, 2**64 - 1))
@settings(max_examples=25)
def test_same_seed_same_samples(seed):
    qa = np.arange(64) % 4
    qb = (np.arange(64) // 4) % 4
    assert np.array_equal(sample_bell(qa, qb, make_rng(seed)), sample_bell(qa, qb, make_rng(seed)))


def test_spawn_streams_prefix_stable():
    a = spawn_streams(5, ["x", "y"])
    b = spawn_streams(5, ["x", "y", "z"])
    assert a["y"].integers(0, 2**32, 8).tolist() == b["y"].integers(0, 2**32, 8).tolist()


@pytest.mark.parametrize("bad", [-1, 2**64])
def test_seed_range(bad):
    with pytest.raises(ValueError):
        make_rng(bad)


def test_shape_mismatch():
    with pytest.raises(ValueError):
        sample_bell([0, 1], [0], make_rng(0))
