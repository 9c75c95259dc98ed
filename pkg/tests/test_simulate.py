"""Code-simulation tests.

Oracles, written before the assertions they feed:

* chi-square uniformity over the 6-member type class of [.5,.5] at n=4,
  threshold from the 1e-3 quantile at 5 degrees of freedom.
* a hand decision table for a concrete 4-word codebook on the xor channel,
  built by evaluating the keep test pair by pair in the test itself.
* exhaustive reasoning for deterministic channels: one flip cannot move an
  output within distance 1 of a codeword 8 flips away.
"""

import numpy as np
import pytest
from scipy.stats import chi2

from avckit.channel import Avc, Dist, bsc_avc, type_class_sequences
from avckit.errors import ChannelFormatError, GuardExceeded, InfeasibleError
from avckit.rcu import PairTest, nletter_test
from avckit.simulate import (
    Codebook,
    SimResult,
    decode,
    sample_codebook,
    simulate_worst_case,
    validate_bound,
)

HALF = Dist([0.5, 0.5])


def hamming_test() -> PairTest:
    # strict-distance comparison; never keeps both orders
    return PairTest(
        z=lambda x, xb, y: 1
        if int((np.asarray(x) != np.asarray(y)).sum()) < int((np.asarray(xb) != np.asarray(y)).sum())
        else 0
    )


def test_codebook_type_membership():
    book = sample_codebook(HALF, m=20, n=4, seed=0, constraint=bsc_avc(0.5, 0.1))
    assert book.codewords.shape == (20, 4)
    assert book.constant_composition
    assert np.all(book.codewords.sum(axis=1) == 2)


def test_codebook_singleton_and_determinism():
    b1 = sample_codebook(HALF, m=1, n=4, seed=9)
    b2 = sample_codebook(HALF, m=1, n=4, seed=9)
    assert b1.m == 1
    assert np.array_equal(b1.codewords, b2.codewords)
    b3 = sample_codebook(HALF, m=1, n=4, seed=10)
    assert b1.codewords.shape == b3.codewords.shape


def test_codebook_infeasible_type():
    with pytest.raises(InfeasibleError):
        sample_codebook(Dist([0.25, 0.75]), m=2, n=4, seed=0, constraint=bsc_avc(0.5, 0.1))
    with pytest.raises(ChannelFormatError):
        sample_codebook(Dist([0.3, 0.7]), m=2, n=4, seed=0)


def test_codebook_uniform_chi_square():
    # 1e5 i.i.d. codewords over the 6 arrangements of (2, 2)
    book = sample_codebook(HALF, m=100_000, n=4, seed=1)
    members = type_class_sequences((2, 2))
    index = {seq: k for k, seq in enumerate(members)}
    counts = np.zeros(len(members))
    for row in map(tuple, book.codewords.tolist()):
        counts[index[row]] += 1
    expected = book.m / len(members)
    stat = float(((counts - expected) ** 2 / expected).sum())
    assert stat < chi2.ppf(1 - 1e-3, df=len(members) - 1)


def test_decode_single_message_always_decodes():
    book = Codebook(codewords=np.array([[0, 1, 0, 1]], dtype=np.intp), constant_composition=True)
    assert decode([1, 1, 1, 1], book, hamming_test()) == 0


def test_decode_identical_codewords_erase():
    c = np.array([0, 0, 1, 1], dtype=np.intp)
    book = Codebook(codewords=np.stack([c, c]), constant_composition=True)
    assert decode(c, book, hamming_test()) is None


def test_decode_hand_table_xor_n8():
    avc = bsc_avc(0.5, 0.125)
    test = nletter_test(avc, 8, HALF, m=4, eta=0.05)
    z = PairTest(z=test.z)
    words = np.array(
        [
            [0, 0, 0, 0, 1, 1, 1, 1],
            [1, 1, 1, 1, 0, 0, 0, 0],
            [0, 1, 0, 1, 0, 1, 0, 1],
            [1, 0, 1, 0, 1, 0, 1, 0],
        ],
        dtype=np.intp,
    )
    book = Codebook(codewords=words, constant_composition=True)
    for y in (words[0], words[2], words[0] ^ np.eye(8, dtype=np.intp)[3]):
        # oracle: evaluate the keep test for every ordered pair directly
        qualifiers = [
            i
            for i in range(4)
            if all(test.z(words[i], words[j], y) for j in range(4) if j != i)
        ]
        assert len(qualifiers) <= 1
        want = qualifiers[0] if qualifiers else None
        assert decode(y, book, z) == want


def test_decode_rejects_two_sided_test():
    book = Codebook(
        codewords=np.array([[0, 1, 0, 1], [1, 0, 1, 0]], dtype=np.intp),
        constant_composition=True,
    )
    with pytest.raises(ChannelFormatError):
        decode([0, 1, 0, 1], book, PairTest(z=lambda x, xb, y: 1))


def test_noiseless_channel_zero_error():
    # state budget 0 pins the state to the identity letter
    avc = bsc_avc(0.5, 0.0)
    test = nletter_test(avc, 8, HALF, m=2, eta=0.05)
    book = sample_codebook(HALF, m=2, n=8, seed=2, constraint=avc)
    assert not np.array_equal(book.codewords[0], book.codewords[1])
    res = simulate_worst_case(avc, book, PairTest(z=test.z), "exhaustive")
    assert res.worst_error == 0.0
    assert res.adversary_mode == "exhaustive"
    assert res.trials == 0  # deterministic channel, exact scoring
    assert res.per_state_errors == {tuple([0] * 8): 0.0}


def test_repetition_pair_survives_single_flip():
    avc = bsc_avc(1.0, 0.125)
    words = np.array([[0] * 8, [1] * 8], dtype=np.intp)
    book = Codebook(codewords=words, constant_composition=False)
    res = simulate_worst_case(avc, book, hamming_test(), "exhaustive")
    assert len(res.per_state_errors) == 9
    assert res.worst_error == 0.0


def test_sampled_and_representative_below_exhaustive():
    avc = bsc_avc(0.5, 0.25)
    test = nletter_test(avc, 6, Dist([0.5, 0.5]), m=2, eta=0.05)
    z = PairTest(z=test.z)
    book = sample_codebook(HALF, m=2, n=6, seed=4, constraint=avc)
    full = simulate_worst_case(avc, book, z, "exhaustive")
    rep = simulate_worst_case(avc, book, z, "type-representative", seed=5)
    sub = simulate_worst_case(avc, book, z, "sampled", trials=3, seed=6)
    assert rep.worst_error <= full.worst_error + 1e-12
    assert sub.worst_error <= full.worst_error + 1e-12


def test_worst_error_monotone_in_state_budget():
    words = np.array([[0, 0, 0, 1, 1, 1], [1, 1, 1, 0, 0, 0]], dtype=np.intp)
    book = Codebook(codewords=words, constant_composition=True)
    z = hamming_test()
    errs = [
        simulate_worst_case(bsc_avc(1.0, lam), book, z, "exhaustive").worst_error
        for lam in (0.0, 1 / 6, 2 / 6, 3 / 6)
    ]
    assert all(a <= b + 1e-12 for a, b in zip(errs, errs[1:]))


def test_noisy_channel_monte_carlo_path():
    w = np.zeros((2, 2, 2))
    w[:, 0] = [[0.9, 0.1], [0.1, 0.9]]
    w[:, 1] = [[0.6, 0.4], [0.4, 0.6]]
    avc = Avc(w=w, g=np.array([0.0, 1.0]), ell=np.array([0.0, 1.0]), gamma=1.0, lam=0.25)
    words = np.array([[0, 0, 0, 0], [1, 1, 1, 1]], dtype=np.intp)
    book = Codebook(codewords=words, constant_composition=False)
    r1 = simulate_worst_case(avc, book, hamming_test(), "exhaustive", trials=300, seed=7)
    r2 = simulate_worst_case(avc, book, hamming_test(), "exhaustive", trials=300, seed=7)
    assert r1 == r2  # counter-derived randomness, reproducible
    assert 0.0 <= r1.worst_error <= 1.0
    assert r1.trials == 300


def test_state_guard():
    avc = bsc_avc(0.5, 1.0)  # every state sequence admissible
    book = Codebook(codewords=np.zeros((1, 24), dtype=np.intp), constant_composition=False)
    with pytest.raises(GuardExceeded):
        simulate_worst_case(avc, book, hamming_test(), "exhaustive")


def test_unknown_adversary_mode():
    avc = bsc_avc(0.5, 0.125)
    book = sample_codebook(HALF, m=2, n=4, seed=0)
    with pytest.raises(ChannelFormatError):
        simulate_worst_case(avc, book, hamming_test(), "all-of-them")


def test_validate_bound_desk_scale():
    avc = bsc_avc(0.5, 0.125)
    out = validate_bound(
        avc, 8, HALF, m=2, seed=0, codebooks=8, bound_samples=5_000, eta=0.05
    )
    assert isinstance(out["measured"], SimResult)
    assert out["bound"].n == 8 and out["bound"].m == 2
    assert out["holds"] in (True, "vacuous")
    if out["bound"].total >= 1.0:
        assert out["holds"] == "vacuous"
