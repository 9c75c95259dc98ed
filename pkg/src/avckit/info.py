"""Information density, its centered variant, and exact finite-n variance.

All logarithms are base 2.  Expectations use the 0 * log(0/q) = 0
convention: cells with zero joint probability contribute nothing, whatever
the density value there.  The centered density subtracts both conditional
means, so it has zero mean given the input alone and given the state
alone; its second and third absolute moments drive the second-order
analysis downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .channel import Avc, Dist, induced_channel, output_dist, type_counts
from .errors import ChannelFormatError


def _density_table(avc: Avc, px: Dist, ps: Dist) -> NDArray[np.float64]:
    """i(x; y) = log2 K(y|x) / out(y) for the state-averaged channel.

    Cells with K(y|x) = 0 get -inf; unreachable outputs (out(y) = 0) get
    +inf so that any accidental use surfaces, but both carry zero joint
    probability wherever they are consulted by the moment code.
    """
    k = induced_channel(avc, ps)
    out = px.p @ k
    tab = np.full((avc.nx, avc.ny), -np.inf)
    pos = k > 0.0
    reach = out > 0.0
    both = pos & reach[None, :]
    tab[both] = np.log2(k[both] / np.broadcast_to(out, k.shape)[both])
    tab[pos & ~reach[None, :]] = np.inf
    return tab


def info_density(x: int, y: int, px: Dist, ps: Dist, avc: Avc) -> float:
    """Pointwise information density i(x; y) in bits."""
    out = output_dist(avc, px, ps)
    if out[y] <= 0.0:
        raise ChannelFormatError(f"output {y} has zero probability; density undefined")
    k = induced_channel(avc, ps)
    if k[x, y] <= 0.0:
        return -np.inf
    return float(np.log2(k[x, y] / out[y]))


def mutual_information(px: Dist, channel: NDArray[np.float64]) -> float:
    """I(px, channel) in bits for a row-stochastic matrix channel[x, y]."""
    k = np.asarray(channel, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != px.size:
        raise ChannelFormatError("channel shape does not match px")
    out = px.p @ k
    w = px.p[:, None] * k
    mask = w > 0.0
    return float(np.sum(w[mask] * np.log2(k[mask] / np.broadcast_to(out, k.shape)[mask])))


def _centered_table(avc: Avc, px: Dist, ps: Dist):
    """itilde[x, s, y] plus joint weights and the scalar mean.

    Entries whose joint probability is zero are forced to 0.0 so that
    moment sums never meet inf * 0.
    """
    dens = _density_table(avc, px, ps)
    joint = px.p[:, None, None] * ps.p[None, :, None] * avc.w
    fin = np.where(np.isfinite(dens), dens, 0.0)

    k = induced_channel(avc, ps)
    # conditional means; zero-probability cells of dens are unreachable there
    mean_x = np.einsum("xy,xy->x", k, fin)
    mean_s = np.einsum("x,xsy,xy->s", px.p, avc.w, fin)
    mean = float(px.p @ mean_x)

    tab = dens[:, None, :] - mean_x[:, None, None] - mean_s[None, :, None] + mean
    tab = np.where(joint > 0.0, tab, 0.0)
    if not np.all(np.isfinite(tab)):
        raise ChannelFormatError("centered density diverges on a positive-probability cell")
    return tab, joint, mean


def centered_density(x: int, s: int, y: int, px: Dist, ps: Dist, avc: Avc) -> float:
    """itilde(x; s; y): density minus both conditional means plus the mean."""
    tab, joint, _ = _centered_table(avc, px, ps)
    if joint[x, s, y] <= 0.0:
        raise ChannelFormatError(f"triple ({x},{s},{y}) has zero probability; value unused")
    return float(tab[x, s, y])


def dispersion_v(px: Dist, ps: Dist, avc: Avc) -> float:
    """V = E itilde^2 in bits^2."""
    tab, joint, _ = _centered_table(avc, px, ps)
    return float(np.sum(joint * tab * tab))


def third_moment_t(px: Dist, ps: Dist, avc: Avc) -> float:
    """T = E |itilde|^3 in bits^3."""
    tab, joint, _ = _centered_table(avc, px, ps)
    return float(np.sum(joint * np.abs(tab) ** 3))


@dataclass(frozen=True)
class InfoStats:
    """Single-letter summary at a fixed (px, ps) pair."""

    mutual_info: float
    dispersion: float
    third_moment: float
    density_var: float  # var of i(X;Y), the uncentered density


def _density_var(avc: Avc, px: Dist, ps: Dist) -> float:
    dens = _density_table(avc, px, ps)
    k = induced_channel(avc, ps)
    w = px.p[:, None] * k
    mask = w > 0.0
    fin = np.where(mask, np.where(np.isfinite(dens), dens, 0.0), 0.0)
    mean = float(np.sum(w * fin))
    return float(np.sum(w * (fin - mean) ** 2))


def info_stats(px: Dist, ps: Dist, avc: Avc) -> InfoStats:
    tab, joint, mean = _centered_table(avc, px, ps)
    return InfoStats(
        mutual_info=mean,
        dispersion=float(np.sum(joint * tab * tab)),
        third_moment=float(np.sum(joint * np.abs(tab) ** 3)),
        density_var=_density_var(avc, px, ps),
    )


def sigma_n_exact(px_type: Dist, ps_type: Dist, avc: Avc, n: int) -> float:
    """(1/n) var of the n-letter density sum under uniform type-class inputs.

    Both sequences are drawn uniformly from their type classes
    (independently of each other); outputs pass letterwise through w.  The
    variance decomposes over positions by exchangeability: n identical
    diagonal terms plus n(n-1) identical cross terms whose pair law is
    sampling without replacement from the type multiset.
    """
    if n < 1:
        raise ChannelFormatError("sigma_n_exact: need n >= 1")
    cx = type_counts(px_type, n)
    cs = type_counts(ps_type, n)

    dens = _density_table(avc, px_type, ps_type)
    fin = np.where(np.isfinite(dens), dens, 0.0)
    # mean of i(x;Y) given (x, s); only cells with w > 0 contribute
    m = np.einsum("xsy,xy->xs", avc.w, fin)
    bad = (avc.w > 0.0) & ~np.isfinite(dens)[:, None, :]
    if np.any(bad & (px_type.p[:, None, None] > 0) & (ps_type.p[None, :, None] > 0)):
        raise ChannelFormatError("density diverges on a positive-probability cell")

    joint = px_type.p[:, None, None] * ps_type.p[None, :, None] * avc.w
    mean = float(np.sum(joint * fin[:, None, :]))
    e2 = float(np.sum(joint * fin[:, None, :] ** 2))
    var1 = e2 - mean * mean
    if n == 1:
        return var1

    def pair_law(counts: NDArray[np.intp]) -> NDArray[np.float64]:
        c = counts.astype(np.float64)
        p2 = np.outer(c, c) - np.diag(c)
        return p2 / (n * (n - 1))

    p2x = pair_law(cx)
    p2s = pair_law(cs)
    cross = float(np.sum(p2x * (m @ p2s @ m.T))) - mean * mean
    return var1 + (n - 1) * cross
