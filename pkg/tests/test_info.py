import itertools
import math

import numpy as np
import pytest

from avckit.channel import (
    Avc,
    Dist,
    adding_avc,
    bsc_avc,
    induced_channel,
    type_class_sequences,
    type_counts,
)
from avckit.errors import ChannelFormatError
from avckit.info import (
    centered_density,
    dispersion_v,
    info_density,
    info_stats,
    mutual_information,
    sigma_n_exact,
    third_moment_t,
)

# ---------------------------------------------------------------- oracles
# Independent, loop-based recomputations.  These deliberately avoid the
# library's vectorized tables.


def oracle_density(avc, px, ps, x, y):
    k = np.zeros((avc.nx, avc.ny))
    for xx in range(avc.nx):
        for s in range(avc.ns):
            for yy in range(avc.ny):
                k[xx, yy] += ps.p[s] * avc.w[xx, s, yy]
    out = np.zeros(avc.ny)
    for xx in range(avc.nx):
        for yy in range(avc.ny):
            out[yy] += px.p[xx] * k[xx, yy]
    return math.log2(k[x, y] / out[y])


def oracle_moments(avc, px, ps):
    """(I, V, T) by explicit triple loops."""
    k = np.zeros((avc.nx, avc.ny))
    for x in range(avc.nx):
        for s in range(avc.ns):
            for y in range(avc.ny):
                k[x, y] += ps.p[s] * avc.w[x, s, y]
    out = px.p @ k

    def dens(x, y):
        return math.log2(k[x, y] / out[y])

    mean_x = np.zeros(avc.nx)
    for x in range(avc.nx):
        for y in range(avc.ny):
            if k[x, y] > 0:
                mean_x[x] += k[x, y] * dens(x, y)
    mean_s = np.zeros(avc.ns)
    for s in range(avc.ns):
        for x in range(avc.nx):
            for y in range(avc.ny):
                if px.p[x] > 0 and avc.w[x, s, y] > 0:
                    mean_s[s] += px.p[x] * avc.w[x, s, y] * dens(x, y)
    mi = float(px.p @ mean_x)
    v = t = 0.0
    for x in range(avc.nx):
        for s in range(avc.ns):
            for y in range(avc.ny):
                w = px.p[x] * ps.p[s] * avc.w[x, s, y]
                if w > 0:
                    c = dens(x, y) - mean_x[x] - mean_s[s] + mi
                    v += w * c * c
                    t += w * abs(c) ** 3
    return mi, v, t


def oracle_sigma_n(avc, px_t, ps_t, n):
    """Full enumeration over both type classes and all output sequences."""
    xseqs = type_class_sequences(type_counts(px_t, n))
    sseqs = type_class_sequences(type_counts(ps_t, n))
    k = np.zeros((avc.nx, avc.ny))
    for x in range(avc.nx):
        for s in range(avc.ns):
            for y in range(avc.ny):
                k[x, y] += ps_t.p[s] * avc.w[x, s, y]
    out = px_t.p @ k

    ez = ez2 = 0.0
    base = 1.0 / (len(xseqs) * len(sseqs))
    for xs in xseqs:
        for ss in sseqs:
            for ys in itertools.product(range(avc.ny), repeat=n):
                prob = base
                for i in range(n):
                    prob *= avc.w[xs[i], ss[i], ys[i]]
                if prob == 0.0:
                    continue
                z = sum(math.log2(k[xs[i], ys[i]] / out[ys[i]]) for i in range(n))
                ez += prob * z
                ez2 += prob * z * z
    return (ez2 - ez * ez) / n


def closed_form_v_xor(p, q):
    """Centered second moment of the xor channel at input bias p, flip rate q."""
    r = p + q - 2 * p * q
    big_l = math.log2((1 - r) / r)
    return 4 * p * (1 - p) * q * (1 - q) * big_l * big_l


HALF = Dist(np.array([0.5, 0.5]))
PX64 = Dist(np.array([0.6, 0.4]))
PS91 = Dist(np.array([0.9, 0.1]))


# ------------------------------------------------------------ info_density
def test_density_noiseless_identity():
    ch = bsc_avc()
    ps0 = Dist(np.array([1.0, 0.0]))
    assert info_density(0, 0, HALF, ps0, ch) == pytest.approx(1.0, abs=1e-15)
    assert info_density(1, 1, PX64, ps0, ch) == pytest.approx(math.log2(1 / 0.4), abs=1e-12)


def test_density_independent_channel_zero():
    w = np.zeros((2, 2, 2))
    w[:, :, 0] = 0.3
    w[:, :, 1] = 0.7
    ch = Avc(w=w, g=np.zeros(2), ell=np.zeros(2), gamma=1.0, lam=1.0)
    for x, y in itertools.product(range(2), range(2)):
        assert info_density(x, y, HALF, HALF, ch) == pytest.approx(0.0, abs=1e-15)


def test_density_bsc_frozen_value():
    # hand value: log2(.9/.58), induced flip rate .1, output P(0) = .58
    ch = bsc_avc()
    v = info_density(0, 0, PX64, PS91, ch)
    assert v == pytest.approx(math.log2(0.9 / 0.58), abs=1e-14)
    assert v == pytest.approx(oracle_density(ch, PX64, PS91, 0, 0), abs=1e-14)


def test_density_minus_inf_and_unreachable():
    ch = adding_avc()
    ps0 = Dist(np.array([1.0, 0.0]))
    # y = 2 unreachable when s = 0 a.s. and px has support {0,1}: x+0 <= 1
    with pytest.raises(ChannelFormatError):
        info_density(0, 2, HALF, ps0, ch)
    # y = 1 reachable only from x = 1; density at (0, 1) is -inf
    assert info_density(0, 1, HALF, ps0, ch) == -np.inf


# ----------------------------------------------------- mutual_information
def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p) if 0 < p < 1 else 0.0


def test_mutual_information_bsc_entropy_form():
    ch = bsc_avc()
    k = induced_channel(ch, PS91)
    assert mutual_information(PX64, k) == pytest.approx(h2(0.42) - h2(0.1), abs=1e-14)


def test_mutual_information_zero_rows_convention():
    k = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert mutual_information(Dist(np.array([1.0, 0.0])), k) == pytest.approx(0.0, abs=1e-15)


def test_mutual_information_matches_density_mean():
    ch = adding_avc()
    stats = info_stats(PX64, PS91, ch)
    k = induced_channel(ch, PS91)
    assert stats.mutual_info == pytest.approx(mutual_information(PX64, k), abs=1e-14)


# ------------------------------------------------------- centered density
def test_centered_density_conditional_means_vanish():
    for ch in (bsc_avc(), adding_avc()):
        k = induced_channel(ch, PS91)
        out = PX64.p @ k
        for x in range(ch.nx):
            acc = 0.0
            for s in range(ch.ns):
                for y in range(ch.ny):
                    w = PS91.p[s] * ch.w[x, s, y]
                    if w > 0:
                        acc += w * centered_density(x, s, y, PX64, PS91, ch)
            assert acc == pytest.approx(0.0, abs=1e-12)
        for s in range(ch.ns):
            acc = 0.0
            for x in range(ch.nx):
                for y in range(ch.ny):
                    w = PX64.p[x] * ch.w[x, s, y]
                    if w > 0:
                        acc += w * centered_density(x, s, y, PX64, PS91, ch)
            assert acc == pytest.approx(0.0, abs=1e-12)
    del out


def test_centered_density_zero_probability_cell_rejected():
    ch = bsc_avc()
    with pytest.raises(ChannelFormatError):
        centered_density(0, 0, 1, PX64, PS91, ch)  # w[0,0,1] = 0


def test_moments_match_loop_oracle_random_channels():
    rng = np.random.default_rng(7)
    for _ in range(10):
        w = rng.dirichlet(np.ones(3), size=(2, 2))
        ch = Avc(w=w, g=np.array([0.0, 1.0]), ell=np.array([0.0, 1.0]),
                 gamma=1.0, lam=1.0)
        px = Dist(rng.dirichlet(np.ones(2)))
        ps = Dist(rng.dirichlet(np.ones(2)))
        mi_o, v_o, t_o = oracle_moments(ch, px, ps)
        st = info_stats(px, ps, ch)
        assert st.mutual_info == pytest.approx(mi_o, abs=1e-12)
        assert st.dispersion == pytest.approx(v_o, abs=1e-12)
        assert st.third_moment == pytest.approx(t_o, abs=1e-12)
        assert dispersion_v(px, ps, ch) == pytest.approx(v_o, abs=1e-12)
        assert third_moment_t(px, ps, ch) == pytest.approx(t_o, abs=1e-12)


def test_dispersion_xor_closed_form():
    ch = bsc_avc()
    for p, q in [(0.4, 0.1), (0.6, 0.4), (0.3, 0.2), (0.25, 0.05)]:
        got = dispersion_v(Dist(np.array([1 - p, p])), Dist(np.array([1 - q, q])), ch)
        assert got == pytest.approx(closed_form_v_xor(p, q), abs=1e-12)


def test_dispersion_zero_cases():
    ch = bsc_avc()
    # uniform input makes the xor channel density depend on the state only
    assert dispersion_v(HALF, PS91, ch) == pytest.approx(0.0, abs=1e-15)
    # a noiseless state distribution pins the density to its conditional means
    assert dispersion_v(PX64, Dist(np.array([1.0, 0.0])), ch) == pytest.approx(0.0, abs=1e-15)
    # point-mass input carries no information density variance
    assert dispersion_v(Dist(np.array([1.0, 0.0])), PS91, ch) == pytest.approx(0.0, abs=1e-15)


# ------------------------------------------------------------ sigma_n_exact
def test_sigma_one_equals_single_letter_var():
    ch = bsc_avc()
    one = Dist(np.array([1.0, 0.0]))
    got = sigma_n_exact(one, one, ch, 1)
    # single-letter var of density under point masses is zero
    assert got == pytest.approx(0.0, abs=1e-15)


def test_sigma_n_matches_enumeration_oracle_binary():
    chs = [bsc_avc(), adding_avc()]
    cases = {
        2: (Dist(np.array([0.5, 0.5])), Dist(np.array([0.5, 0.5]))),
        3: (Dist(np.array([2 / 3, 1 / 3])), Dist(np.array([2 / 3, 1 / 3]))),
        4: (Dist(np.array([0.75, 0.25])), Dist(np.array([0.5, 0.5]))),
    }
    for ch in chs:
        for n, (pxt, pst) in cases.items():
            got = sigma_n_exact(pxt, pst, ch, n)
            want = oracle_sigma_n(ch, pxt, pst, n)
            assert got == pytest.approx(want, abs=1e-12), (ch.name, n)


def test_sigma_n_noisy_channel_oracle():
    rng = np.random.default_rng(3)
    w = rng.dirichlet(np.ones(2), size=(2, 2))
    ch = Avc(w=w, g=np.zeros(2), ell=np.zeros(2), gamma=1.0, lam=1.0)
    pxt = Dist(np.array([0.5, 0.5]))
    pst = Dist(np.array([0.25, 0.75]))
    got = sigma_n_exact(pxt, pst, ch, 4)
    want = oracle_sigma_n(ch, pxt, pst, 4)
    assert got == pytest.approx(want, abs=1e-12)


def test_sigma_n_sandwich_small_n():
    # variance overshoot is nonnegative and at most 3 var(i) / (n - 1)
    ch = adding_avc()
    for n, pxt, pst in [
        (3, Dist(np.array([2 / 3, 1 / 3])), Dist(np.array([2 / 3, 1 / 3]))),
        (4, Dist(np.array([0.75, 0.25])), Dist(np.array([0.75, 0.25]))),
        (5, Dist(np.array([0.6, 0.4])), Dist(np.array([0.8, 0.2]))),
    ]:
        v = dispersion_v(pxt, pst, ch)
        stats = info_stats(pxt, pst, ch)
        s_n = sigma_n_exact(pxt, pst, ch, n)
        assert s_n - v >= -1e-12
        assert s_n - v <= 3.0 / (n - 1) * stats.density_var + 1e-12


def test_sigma_n_point_mass_types_zero():
    ch = bsc_avc()
    one = Dist(np.array([1.0, 0.0]))
    assert sigma_n_exact(one, one, ch, 4) == pytest.approx(0.0, abs=1e-15)
