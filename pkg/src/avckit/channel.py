"""Core model objects: cost-constrained adversarial channels and types.

A channel instance holds a transition tensor w[x, s, y] together with an
input cost vector g, a state cost vector ell, and per-letter budgets gamma
and lam.  Alphabets are index sets 0..k-1.  All probabilities are float64;
distributions are validated to 1e-12 and then renormalized exactly.  Cost
feasibility of a sequence is the closed comparison sum(costs) <= n * budget
with no epsilon: costs may be negative, so no slack is safe to add.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ChannelFormatError, InfeasibleError

_NORM_TOL = 1e-12


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def _check_prob_vector(p: np.ndarray, what: str) -> np.ndarray:
    if p.ndim != 1 or p.size == 0:
        raise ChannelFormatError(f"{what}: expected a nonempty 1-d probability vector")
    if not np.all(np.isfinite(p)):
        raise ChannelFormatError(f"{what}: non-finite entry")
    if np.any(p < -_NORM_TOL):
        raise ChannelFormatError(f"{what}: negative entry {p.min():.3e}")
    s = float(p.sum())
    if abs(s - 1.0) > _NORM_TOL * max(1.0, p.size):
        raise ChannelFormatError(f"{what}: sums to {s!r}, not 1")
    q = np.clip(p, 0.0, None)
    q = q / q.sum()
    # land the float sum exactly on 1.0 by absorbing the residual ulp
    for _ in range(3):
        r = 1.0 - float(q.sum())
        if r == 0.0:
            break
        q[int(np.argmax(q))] += r
    return q


@dataclass(frozen=True)
class Dist:
    """Probability vector over an index alphabet, immutable after validation."""

    p: NDArray[np.float64]

    def __post_init__(self) -> None:
        q = _check_prob_vector(np.asarray(self.p, dtype=np.float64), "Dist")
        object.__setattr__(self, "p", _freeze(q))

    @property
    def size(self) -> int:
        return int(self.p.size)

    def support(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.p > 0.0)

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, i: int) -> float:
        return float(self.p[i])


@dataclass(frozen=True)
class Avc:
    """Adversarial channel with per-letter input and state cost budgets.

    w[x, s, y] is the probability of output y given input x and state s.
    g[x] and ell[s] are per-letter costs; an input sequence is admissible
    when its total g-cost is at most n*gamma, a state sequence when its
    total ell-cost is at most n*lam.
    """

    w: NDArray[np.float64]
    g: NDArray[np.float64]
    ell: NDArray[np.float64]
    gamma: float
    lam: float
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=np.float64)
        g = np.asarray(self.g, dtype=np.float64)
        ell = np.asarray(self.ell, dtype=np.float64)
        if w.ndim != 3:
            raise ChannelFormatError(f"w: expected 3-d tensor, got shape {w.shape}")
        nx, ns, ny = w.shape
        if min(nx, ns, ny) == 0:
            raise ChannelFormatError(f"w: empty alphabet in shape {w.shape}")
        if g.shape != (nx,):
            raise ChannelFormatError(f"g: expected shape ({nx},), got {g.shape}")
        if ell.shape != (ns,):
            raise ChannelFormatError(f"ell: expected shape ({ns},), got {ell.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(g)) and np.all(np.isfinite(ell))):
            raise ChannelFormatError("non-finite entry in w, g, or ell")
        if not (np.isfinite(self.gamma) and np.isfinite(self.lam)):
            raise ChannelFormatError("non-finite budget")
        rows = np.empty_like(w)
        for x in range(nx):
            for s in range(ns):
                rows[x, s] = _check_prob_vector(w[x, s], f"w[{x},{s}]")
        object.__setattr__(self, "w", _freeze(rows))
        object.__setattr__(self, "g", _freeze(g))
        object.__setattr__(self, "ell", _freeze(ell))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def nx(self) -> int:
        return self.w.shape[0]

    @property
    def ns(self) -> int:
        return self.w.shape[1]

    @property
    def ny(self) -> int:
        return self.w.shape[2]


def validate(avc: Avc) -> None:
    """Raise unless both per-letter budget sets admit at least one distribution.

    The construction of Avc already checks shapes and stochasticity; this
    adds the feasibility checks that depend on the budgets: some input
    symbol must cost at most gamma and some state symbol at most lam.
    """
    if float(avc.g.min()) > avc.gamma:
        raise InfeasibleError(
            f"input budget gamma={avc.gamma} below the cheapest input cost {avc.g.min()}"
        )
    if float(avc.ell.min()) > avc.lam:
        raise InfeasibleError(
            f"state budget lam={avc.lam} below the cheapest state cost {avc.ell.min()}"
        )


def induced_channel(avc: Avc, ps: Dist) -> NDArray[np.float64]:
    """Average the state out of w: rows K[x, y] = sum_s ps[s] w[x, s, y]."""
    if ps.size != avc.ns:
        raise ChannelFormatError(f"ps has size {ps.size}, channel has {avc.ns} states")
    return np.einsum("s,xsy->xy", ps.p, avc.w)


def output_dist(avc: Avc, px: Dist, ps: Dist) -> NDArray[np.float64]:
    """Output distribution of px through the state-averaged channel."""
    if px.size != avc.nx:
        raise ChannelFormatError(f"px has size {px.size}, channel has {avc.nx} inputs")
    return px.p @ induced_channel(avc, ps)


def check_sequence(seq, k: int) -> NDArray[np.intp]:
    """Validate a symbol sequence against alphabet size k; returns an int array."""
    a = np.asarray(seq)
    if a.ndim != 1 or a.size == 0:
        raise ChannelFormatError("sequence: expected a nonempty 1-d array of symbols")
    if not np.issubdtype(a.dtype, np.integer):
        b = a.astype(np.intp)
        if np.any(b != a):
            raise ChannelFormatError("sequence: non-integer symbol")
        a = b
    if a.min() < 0 or a.max() >= k:
        raise ChannelFormatError(f"sequence: symbol outside 0..{k - 1}")
    return a.astype(np.intp)


def empirical_type(seq, k: int) -> Dist:
    """Empirical distribution of a sequence over alphabet 0..k-1."""
    a = check_sequence(seq, k)
    counts = np.bincount(a, minlength=k).astype(np.float64)
    return Dist(counts / a.size)


def cost_feasible(seq, costs, budget: float) -> bool:
    """Closed-budget test sum_i costs[seq_i] <= n * budget, no epsilon."""
    costs = np.asarray(costs, dtype=np.float64)
    a = check_sequence(seq, costs.size)
    return float(costs[a].sum()) <= a.size * budget


def enumerate_type_counts(k: int, n: int) -> list[tuple[int, ...]]:
    """All count vectors (c_0..c_{k-1}) with sum n, lexicographic order."""
    if k <= 0 or n <= 0:
        raise ChannelFormatError("enumerate_type_counts: need k >= 1 and n >= 1")
    out: list[tuple[int, ...]] = []

    def rec(prefix: list[int], left: int, slots: int) -> None:
        if slots == 1:
            out.append(tuple(prefix + [left]))
            return
        for c in range(left + 1):
            rec(prefix + [c], left - c, slots - 1)

    rec([], n, k)
    return out


def enumerate_types(k: int, n: int) -> list[Dist]:
    """All length-n types over alphabet 0..k-1 (denominator-n distributions)."""
    return [Dist(np.asarray(c, dtype=np.float64) / n) for c in enumerate_type_counts(k, n)]


def num_types(k: int, n: int) -> int:
    """|P_n| = C(n + k - 1, k - 1)."""
    return math.comb(n + k - 1, k - 1)


def type_class_size(counts) -> int:
    """Multinomial count of sequences with the given symbol counts."""
    counts = [int(c) for c in counts]
    n = sum(counts)
    out = math.factorial(n)
    for c in counts:
        out //= math.factorial(c)
    return out


def nearest_type(dist: Dist, n: int) -> Dist:
    """Largest-remainder rounding of a distribution to an exact n-type."""
    scaled = dist.p * n
    base = np.floor(scaled).astype(int)
    short = n - int(base.sum())
    if short:
        order = np.argsort(-(scaled - base), kind="stable")
        base[order[:short]] += 1
    return Dist(base.astype(np.float64) / n)


def type_counts(dist: Dist, n: int) -> NDArray[np.intp]:
    """Integer counts n*dist for an exact n-type; raises if dist is not one."""
    scaled = dist.p * n
    counts = np.rint(scaled).astype(np.intp)
    if np.any(np.abs(scaled - counts) > 1e-9) or counts.sum() != n:
        raise ChannelFormatError(f"distribution is not an exact {n}-type")
    return counts


def type_class_sequences(counts) -> list[tuple[int, ...]]:
    """All distinct sequences with the given symbol counts (can be large)."""
    base: list[int] = []
    for sym, c in enumerate(counts):
        base.extend([sym] * int(c))
    return sorted(set(itertools.permutations(base)))


def feasible_state_types(avc: Avc, n: int) -> list[Dist]:
    """Length-n state types whose per-letter cost is within the state budget."""
    return [t for t in enumerate_types(avc.ns, n) if float(t.p @ avc.ell) <= avc.lam]


def bsc_avc(gamma: float = 0.4, lam: float = 0.1) -> Avc:
    """Binary channel where the state flips the input bit: y = x xor s.

    Unit costs g(x) = x, ell(s) = s; the state budget caps the mean flip rate.
    """
    w = np.zeros((2, 2, 2))
    for x in range(2):
        for s in range(2):
            w[x, s, x ^ s] = 1.0
    return Avc(w=w, g=np.array([0.0, 1.0]), ell=np.array([0.0, 1.0]),
               gamma=gamma, lam=lam, name="bsc_avc")


def adding_avc(gamma: float = 0.4, lam: float = 0.1) -> Avc:
    """Binary-input channel with real addition: y = x + s over {0, 1, 2}.

    Same unit costs as bsc_avc, but the two symbols never cancel, so the
    output reveals more than the xor channel does.
    """
    w = np.zeros((2, 2, 3))
    for x in range(2):
        for s in range(2):
            w[x, s, x + s] = 1.0
    return Avc(w=w, g=np.array([0.0, 1.0]), ell=np.array([0.0, 1.0]),
               gamma=gamma, lam=lam, name="adding_avc")
