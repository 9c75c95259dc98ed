"""Finite-blocklength bound tests.

Oracles, written before the assertions they feed:

* singleshot 16-tuple sum: every term of the four-term bound recomputed by
  plain loops over (x, xbar, s, y) for a two-state binary channel.
* classical 8-tuple sum: the single-state union bound recomputed the same way.
* xor-channel enumeration at n=8: terms recomputed over the full 70-sequence
  input type class and all nine admissible state sequences, with the state
  pattern in the pairwise test forced by determinism (s = x xor y).
* Bernoulli simulation: empirical tail frequencies to sit under the Chernoff
  expression.
"""

import math

import numpy as np
import pytest

from avckit.channel import Avc, Dist, bsc_avc, type_class_sequences
from avckit.errors import ChannelFormatError, GuardExceeded, InfeasibleError, SolverError
from avckit.rcu import (
    PairTest,
    TypicalSet,
    chernoff_bound,
    classical_rcu,
    nletter_test,
    rcu_exact_singleshot,
    rcu_mc_avc,
)

LOG2E = math.log2(math.e)


def two_state_binary() -> Avc:
    w = np.zeros((2, 2, 2))
    w[:, 0] = [[0.9, 0.1], [0.1, 0.9]]
    w[:, 1] = [[0.7, 0.3], [0.3, 0.7]]
    return Avc(w=w, g=np.zeros(2), ell=np.zeros(2), gamma=0.0, lam=0.0)


def density_table(avc: Avc, px: Dist) -> np.ndarray:
    k = np.einsum("xsy->xy", avc.w) / avc.ns
    out = px.p @ k
    return np.log2(k) - np.log2(out)[None, :]


def oracle_singleshot(avc: Avc, px: Dist, z, a, m: int):
    """Four-term bound by plain loops; returns per-state triples plus slack."""
    states = [s for s in range(avc.ns) if avc.ell[s] <= avc.lam]
    n_s = len(states)
    rows = []
    for s in states:
        miss = 0.0
        conf = 0.0
        per_xb = np.zeros(avc.nx)
        for x in range(avc.nx):
            for y in range(avc.ny):
                p_xy = px[x] * avc.w[x, s, y]
                if not a(x, y):
                    miss += p_xy
                    continue
                for xb in range(avc.nx):
                    if z(x, xb, y) == 0:
                        conf += p_xy * px[xb]
                        per_xb[xb] += p_xy
        sup = [x for x in range(avc.nx) if px[x] > 0]
        rows.append(
            (miss, 2 * LOG2E * m * conf, 2 * math.log2(3 * n_s) * max(per_xb[x] for x in sup))
        )
    return rows, math.sqrt(2 * math.log(3 * n_s) / m)


def test_singleshot_sixteen_tuple_oracle():
    avc = two_state_binary()
    px = Dist([0.5, 0.5])
    dens = density_table(avc, px)
    z_fn = lambda x, xb, y: 1 if dens[x, y] > dens[xb, y] else 0
    a_fn = lambda x, y: dens[x, y] >= 0.2
    rows, slack = oracle_singleshot(avc, px, z_fn, a_fn, m=2)
    rep = rcu_exact_singleshot(avc, px, PairTest(z=z_fn), TypicalSet(membership=a_fn, gamma=0.2), 2)
    assert rep.n_states == 2 and rep.eval_mode == "exact"
    assert rep.term_miss == pytest.approx(max(r[0] for r in rows), abs=1e-12)
    assert rep.term_confusion == pytest.approx(max(r[1] for r in rows), abs=1e-12)
    assert rep.term_esssup == pytest.approx(max(r[2] for r in rows), abs=1e-12)
    assert rep.term_slack == pytest.approx(slack, abs=1e-12)
    assert rep.total == pytest.approx(rep.term_miss + rep.term_confusion + rep.term_esssup + slack)
    assert rep.total_joint == pytest.approx(max(sum(r) for r in rows) + slack, abs=1e-12)
    assert rep.total_joint <= rep.total + 1e-12
    assert all(v == 0.0 for v in rep.std_error.values())


def test_singleshot_empty_region():
    avc = two_state_binary()
    px = Dist([0.5, 0.5])
    z = PairTest(z=lambda x, xb, y: 1 if x < xb else 0)
    a = TypicalSet(membership=lambda x, y: False, gamma=math.inf)
    rep = rcu_exact_singleshot(avc, px, z, a, m=3)
    assert rep.term_miss == 1.0
    assert rep.term_confusion == 0.0
    assert rep.term_esssup == 0.0
    assert rep.vacuous


def test_singleshot_single_message():
    # strict-order test with the full region; miss vanishes and the slack is
    # the closed form, while the confusion term keeps its m-independent floor
    avc = two_state_binary()
    px = Dist([0.5, 0.5])
    z_fn = lambda x, xb, y: 1 if x < xb else 0
    a = TypicalSet(membership=lambda x, y: True, gamma=-math.inf)
    rep = rcu_exact_singleshot(avc, px, PairTest(z=z_fn), a, m=1)
    assert rep.term_miss == 0.0
    assert rep.term_slack == pytest.approx(math.sqrt(2 * math.log(6.0)), abs=1e-12)
    # P(xbar <= x) = 3/4 under independent fair bits
    assert rep.term_confusion == pytest.approx(2 * LOG2E * 0.75, abs=1e-12)


def test_singleshot_rejects_two_way_test():
    avc = two_state_binary()
    px = Dist([0.5, 0.5])
    z = PairTest(z=lambda x, xb, y: 1 if x != xb else 0)
    a = TypicalSet(membership=lambda x, y: True, gamma=0.0)
    with pytest.raises(ChannelFormatError):
        rcu_exact_singleshot(avc, px, z, a, m=2)


def test_singleshot_confusion_linear_in_m():
    avc = two_state_binary()
    px = Dist([0.4, 0.6])
    dens = density_table(avc, px)
    z = PairTest(z=lambda x, xb, y: 1 if dens[x, y] > dens[xb, y] else 0)
    a = TypicalSet(membership=lambda x, y: dens[x, y] >= 0.0, gamma=0.0)
    reps = [rcu_exact_singleshot(avc, px, z, a, m) for m in (1, 2, 4, 8)]
    base = reps[0].term_confusion
    for m, rep in zip((1, 2, 4, 8), reps):
        assert rep.term_confusion == pytest.approx(m * base, rel=1e-12)
    assert all(a.term_confusion < b.term_confusion for a, b in zip(reps, reps[1:]))


def test_singleshot_n_states_override():
    avc = two_state_binary()
    px = Dist([0.5, 0.5])
    z = PairTest(z=lambda x, xb, y: 1 if x < xb else 0)
    a = TypicalSet(membership=lambda x, y: True, gamma=0.0)
    rep = rcu_exact_singleshot(avc, px, z, a, m=2, n_states=5)
    assert rep.n_states == 5
    assert rep.term_slack == pytest.approx(math.sqrt(2 * math.log(15.0) / 2), abs=1e-12)


def test_chernoff_plug_in_values():
    assert chernoff_bound(100, 0.0, 1.0, 0.5) == pytest.approx(
        min(2.0**-50, math.exp(-50.0)), rel=1e-12
    )
    assert chernoff_bound(10, 0.3, 1.0, 0.3) == 1.0
    assert chernoff_bound(7, 0.0, 1.0, 0.0) == 1.0


def test_chernoff_monotone():
    ts = np.linspace(0.2, 1.0, 30)
    vals = [chernoff_bound(50, 0.2, 1.0, float(t)) for t in ts]
    assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
    ms = [1, 2, 5, 10, 50, 200]
    vals_m = [chernoff_bound(m, 0.1, 1.0, 0.4) for m in ms]
    assert all(b <= a + 1e-15 for a, b in zip(vals_m, vals_m[1:]))


def test_chernoff_domain_errors():
    with pytest.raises(ChannelFormatError):
        chernoff_bound(10, 0.5, 1.0, 0.4)
    with pytest.raises(ChannelFormatError):
        chernoff_bound(10, 0.1, 0.5, 0.7)
    with pytest.raises(ChannelFormatError):
        chernoff_bound(0, 0.1, 1.0, 0.2)


def test_chernoff_empirical_bernoulli():
    # simulation oracle: tail frequency of a mean of m coins never beats the bound
    m, mu, t = 1000, 0.1, 0.2
    rng = np.random.default_rng(0)
    freq = float((rng.binomial(m, mu, size=100_000) >= m * t).mean())
    assert freq <= chernoff_bound(m, mu, 1.0, t)


def oracle_classical(k: np.ndarray, px: Dist, m: int) -> float:
    """Single-state union bound by plain loops over the 8 (x, xbar, y) tuples."""
    out = px.p @ k
    dens = np.log2(k) - np.log2(out)[None, :]
    total = 0.0
    per_xb = np.zeros(px.size)
    in_a = {}
    for x in range(px.size):
        for y in range(k.shape[1]):
            tail = sum(px[xb] for xb in range(px.size) if dens[xb, y] >= dens[x, y])
            in_a[x, y] = 2 * LOG2E * m * tail <= 1.0
            total += px[x] * k[x, y] * min(1.0, 2 * LOG2E * m * tail)
    for xb in range(px.size):
        per_xb[xb] = sum(
            px[x] * k[x, y]
            for x in range(px.size)
            for y in range(k.shape[1])
            if in_a[x, y] and dens[x, y] <= dens[xb, y]
        )
    sup = [x for x in range(px.size) if px[x] > 0]
    return total + 2 * math.log2(3.0) * max(per_xb[x] for x in sup) + math.sqrt(2 * math.log(3.0) / m)


def test_classical_eight_tuple_oracle():
    k = np.array([[0.89, 0.11], [0.11, 0.89]])
    avc = Avc(w=k[:, None, :], g=np.zeros(2), ell=np.zeros(1), gamma=0.0, lam=0.0)
    px = Dist([0.5, 0.5])
    for m in (1, 2, 5):
        assert classical_rcu(avc, px, m) == pytest.approx(oracle_classical(k, px, m), abs=1e-12)


def test_classical_dominates_plain_union_bound():
    # the scaled-tail expectation is at least the plain (m-1)-factor version
    k = np.array([[0.89, 0.11], [0.11, 0.89]])
    px = Dist([0.5, 0.5])
    out = px.p @ k
    dens = np.log2(k) - np.log2(out)[None, :]
    for m in (2, 4, 16):
        scaled = 0.0
        plain = 0.0
        for x in range(2):
            for y in range(2):
                tail = sum(px[xb] for xb in range(2) if dens[xb, y] >= dens[x, y])
                scaled += px[x] * k[x, y] * min(1.0, 2 * LOG2E * m * tail)
                plain += px[x] * k[x, y] * min(1.0, (m - 1) * tail)
        assert scaled >= plain - 1e-15


def test_classical_requires_single_state():
    with pytest.raises(ChannelFormatError):
        classical_rcu(two_state_binary(), Dist([0.5, 0.5]), 2)


# ---------------------------------------------------------------------------
# n-letter machinery


def noisy_two_state() -> Avc:
    w = np.zeros((2, 2, 2))
    w[:, 0] = [[0.8, 0.2], [0.2, 0.8]]
    w[:, 1] = [[0.65, 0.35], [0.35, 0.65]]
    return Avc(w=w, g=np.array([0.0, 1.0]), ell=np.zeros(2), gamma=1.0, lam=0.0)


def test_nletter_n1_matches_singleshot():
    # 1-types are point masses; every noisy transition keeps the pairwise
    # test one-sided, so both evaluators accept the same test family
    avc = noisy_two_state()
    px = Dist([1.0, 0.0])
    test = nletter_test(avc, 1, px, m=2, eta=0.1, n_states=2)
    z = PairTest(z=lambda x, xb, y: test.z([x], [xb], [y]))
    a = TypicalSet(membership=lambda x, y: test.a_member([x], [y]), gamma=test.gamma)
    exact = rcu_exact_singleshot(avc, px, z, a, m=2, n_states=2)
    with pytest.warns(UserWarning):
        mc = rcu_mc_avc(avc, 1, px, m=2, samples=40_000, seed=3, eta=0.1, n_states=2)
    for term in ("term_miss", "term_confusion", "term_esssup"):
        gap = abs(getattr(mc, term) - getattr(exact, term))
        assert gap <= 3 * mc.std_error[term] + 1e-9
    assert mc.term_slack == exact.term_slack


def xor_oracle(avc: Avc, n: int, m: int, eta: float):
    """Term-by-term enumeration for the xor channel at blocklength n.

    Maximizes over admissible state sequences directly (not types), so it
    also checks the type reduction used by the library.  The pairwise-test
    state pattern is forced by determinism: s = x xor y.
    """
    seqs = [np.array(t) for t in type_class_sequences((n // 2, n - n // 2))]
    feas = [np.zeros(n, dtype=int)]
    feas += [np.eye(n, dtype=int)[i] for i in range(n) if 1 <= n * avc.lam]
    n_types = n + 1
    gamma_thr = math.log2(math.sqrt(n) * n_types * m)

    def lik(y, x, j):
        p = j / n
        neq = int((y != x).sum())
        if p == 0.0:
            return -math.inf if neq else 0.0
        if p == 1.0:
            return -math.inf if neq < n else 0.0
        return neq * math.log2(p) + (n - neq) * math.log2(1 - p)

    def out_law(y, j):
        tot = sum(2.0 ** lik(y, x, j) for x in seqs if lik(y, x, j) > -math.inf)
        return math.log2(tot / len(seqs)) if tot > 0 else -math.inf

    a_memo: dict = {}

    def in_a(x, y):
        key = (x.tobytes(), y.tobytes())
        if key not in a_memo:
            a_memo[key] = any(
                lik(y, x, j) - out_law(y, j) >= gamma_thr
                for j in range(n_types)
                if lik(y, x, j) > -math.inf
            )
        return a_memo[key]

    def plausible(x, xb, y):
        s = x ^ y
        if s.sum() > n * avc.lam:
            return False
        mxs: dict = {}
        cnt: dict = {}
        for xi, xbi, si, yi in zip(x, xb, s, y):
            mxs[xbi, si] = mxs.get((xbi, si), 0) + 1
            cnt[xi, xbi, si, yi] = cnt.get((xi, xbi, si, yi), 0) + 1
        d = sum(
            (c / n) * (math.log2(c / n) - math.log2(0.5) - math.log2(mxs[xbi, si] / n))
            for (xi, xbi, si, yi), c in cnt.items()
        )
        return d <= eta + 1e-12

    def z_val(x, xb, y):
        if not in_a(x, y):
            return 0
        if not in_a(xb, y):
            return 1
        return 1 if plausible(x, xb, y) else 0

    rows = []
    for s in feas:
        ys = [x ^ s for x in seqs]
        flags = [in_a(x, y) for x, y in zip(seqs, ys)]
        miss = 1.0 - sum(flags) / len(seqs)
        per_xb = []
        for xb in seqs:
            v = sum(1 for x, y, f in zip(seqs, ys, flags) if f and z_val(x, xb, y) == 0)
            per_xb.append(v / len(seqs))
        conf = 2 * LOG2E * m * sum(per_xb) / len(seqs)
        ess = 2 * math.log2(3 * n_types) * max(per_xb)
        rows.append((miss, conf, ess))
    slack = math.sqrt(2 * math.log(3 * n_types) / m)
    return (
        max(r[0] for r in rows),
        max(r[1] for r in rows),
        max(r[2] for r in rows),
        slack,
    )


def test_mc_matches_enumeration_xor_n8():
    avc = bsc_avc(0.5, 0.125)
    eta = 0.05
    miss, conf, ess, slack = xor_oracle(avc, 8, 2, eta)
    rep = rcu_mc_avc(avc, 8, Dist([0.5, 0.5]), m=2, samples=100_000, seed=1, eta=eta)
    assert rep.term_slack == pytest.approx(slack, abs=1e-12)
    assert abs(rep.term_miss - miss) <= 3 * rep.std_error["term_miss"] + 1e-9
    assert abs(rep.term_confusion - conf) <= 3 * rep.std_error["term_confusion"] + 1e-9
    assert abs(rep.term_esssup - ess) <= 3 * rep.std_error["term_esssup"] + 1e-9
    total = miss + conf + ess + slack
    assert abs(rep.total - total) <= 3 * rep.std_error["total"] + 1e-9
    assert rep.eval_mode == "monte-carlo" and rep.mc_samples == 100_000 and rep.seed == 1


def test_mc_confusion_within_proof_ceiling():
    # the confusion term never exceeds 2 log2(e) / sqrt(n), whatever m is
    avc = bsc_avc(0.5, 0.125)
    for m in (2, 4):
        rep = rcu_mc_avc(avc, 8, Dist([0.5, 0.5]), m=m, samples=30_000, seed=7, eta=0.05)
        ceiling = 2 * LOG2E / math.sqrt(8)
        assert rep.term_confusion <= ceiling + 3 * rep.std_error["term_confusion"] + 1e-9


def test_mc_seed_reproducible():
    avc = bsc_avc(0.5, 0.125)
    px = Dist([0.5, 0.5])
    r1 = rcu_mc_avc(avc, 8, px, m=2, samples=5_000, seed=11, eta=0.05)
    r2 = rcu_mc_avc(avc, 8, px, m=2, samples=5_000, seed=11, eta=0.05)
    assert r1 == r2


def test_nletter_default_eta_positive():
    avc = bsc_avc(0.5, 0.125)
    test = nletter_test(avc, 4, Dist([0.5, 0.5]), m=2)
    assert 0.0 < test.eta < math.inf
    assert test.n_states == 5
    assert test.gamma == pytest.approx(math.log2(math.sqrt(4) * 5 * 2), abs=1e-12)


def test_nletter_default_eta_degenerate_raises():
    # with the state budget at the symmetrizing cost the radius collapses to 0
    avc = bsc_avc(0.5, 0.5)
    with pytest.raises(SolverError):
        nletter_test(avc, 4, Dist([0.5, 0.5]), m=2)


def test_mc_warns_on_symmetrizable_type():
    # xor channel with the state budget above the symmetrizing cost of 1/2
    avc = bsc_avc(0.5, 0.6)
    with pytest.warns(UserWarning):
        rcu_mc_avc(avc, 2, Dist([0.5, 0.5]), m=2, samples=200, seed=5, eta=0.02)


def test_state_pattern_guard():
    # a dense three-way type over a full-support channel overflows the
    # four-way enumeration cap
    avc = noisy_two_state()
    n = 64
    test = nletter_test(avc, n, Dist([0.5, 0.5]), m=2, eta=0.05)
    c3 = np.full((2, 2, 2), n // 8, dtype=np.intp)
    with pytest.raises(GuardExceeded):
        test.deta_by_counts(c3)


def test_nletter_input_type_checks():
    avc = bsc_avc(0.5, 0.125)
    with pytest.raises(ChannelFormatError):
        nletter_test(avc, 4, Dist([0.3, 0.7]), m=2, eta=0.05)  # not a 4-type
    with pytest.raises(InfeasibleError):
        nletter_test(avc, 4, Dist([0.25, 0.75]), m=2, eta=0.05)  # budget
