"""Desk-scale adversarial code simulation.

Builds explicit codebooks from a type class, decodes with an all-pairs keep
test, searches for the worst admissible state sequence, and compares the
measured worst-case error of the best of several sampled codebooks against
the finite-blocklength bound.  Deterministic channels are evaluated exactly;
noisy ones by seeded Monte Carlo with per-(codeword, state) counter blocks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .channel import Avc, Dist, type_class_size, type_counts, validate
from .errors import ChannelFormatError, GuardExceeded, InfeasibleError
from .rcu import PairTest, _stream, nletter_test, rcu_mc_avc

_STATE_GUARD = 1_000_000
_PER_STATE_MAP_CAP = 10_000


@dataclass(frozen=True)
class Codebook:
    """Explicit list of codewords, one row per message."""

    codewords: NDArray[np.intp]
    constant_composition: bool

    @property
    def m(self) -> int:
        return int(self.codewords.shape[0])

    @property
    def n(self) -> int:
        return int(self.codewords.shape[1])


@dataclass(frozen=True)
class SimResult:
    """Worst-case average error over the evaluated adversarial states.

    per_state_errors maps each evaluated state sequence to its average error
    when few enough states were evaluated, else None.  trials is 0 when the
    channel is deterministic and the evaluation was exact.
    """

    worst_error: float
    worst_state: tuple[int, ...]
    per_state_errors: dict[tuple[int, ...], float] | None
    adversary_mode: str
    trials: int
    seed: int | None


def sample_codebook(
    px_type: Dist, m: int, n: int, seed: int, constraint: Avc | None = None
) -> Codebook:
    """Draw m codewords i.i.d. uniform on the type class of px_type.

    Deterministic per seed: codeword i permutes the sorted base sequence by
    the ranks of counter block i.  With a constraint channel given, checks
    the type against its input budget first.
    """
    counts = type_counts(px_type, n)
    if m < 1:
        raise ChannelFormatError("sample_codebook: m must be a positive count")
    if constraint is not None:
        if px_type.size != constraint.nx:
            raise ChannelFormatError(
                f"px_type has size {px_type.size}, channel has {constraint.nx} inputs"
            )
        if float(counts @ constraint.g) > n * constraint.gamma:
            raise InfeasibleError("px_type exceeds the input budget")
    base = np.repeat(np.arange(px_type.size, dtype=np.intp), counts)
    words = n + (-n) % 4
    keys = _stream(seed, 0, m, words)[:, :n]
    return Codebook(codewords=base[np.argsort(keys, axis=1)], constant_composition=True)


def decode(y, codebook: Codebook, z: PairTest) -> int | None:
    """Return the unique message kept against every rival, or None.

    Message i is declared when z(c_i, c_j, y) = 1 for all j != i.  A valid
    test admits at most one such i; two qualifiers mean the test lost its
    one-sidedness and raise.
    """
    ys = np.asarray(y, dtype=np.intp)
    winner: int | None = None
    for i in range(codebook.m):
        ci = codebook.codewords[i]
        if all(
            z.z(ci, codebook.codewords[j], ys) for j in range(codebook.m) if j != i
        ):
            if winner is not None:
                raise ChannelFormatError(
                    f"pair test kept both messages {winner} and {i}; invalid test"
                )
            winner = i
    return winner


def _feasible_state_sequences(avc: Avc, n: int) -> list[NDArray[np.intp]]:
    """All state sequences within the budget, depth-first with cost pruning."""
    budget = n * avc.lam
    min_ell = float(avc.ell.min())
    out: list[NDArray[np.intp]] = []

    def rec(prefix: list[int], cost: float) -> None:
        if len(prefix) == n:
            if len(out) >= _STATE_GUARD:
                raise GuardExceeded(
                    f"more than {_STATE_GUARD} admissible state sequences; "
                    "use the sampled adversary"
                )
            out.append(np.asarray(prefix, dtype=np.intp))
            return
        tail = (n - len(prefix) - 1) * min_ell
        for s in range(avc.ns):
            c2 = cost + float(avc.ell[s])
            if c2 + tail <= budget:
                rec(prefix + [s], c2)

    rec([], 0.0)
    return out


def _feasible_type_counts(avc: Avc, n: int) -> list[NDArray[np.intp]]:
    from .channel import enumerate_type_counts

    budget = n * avc.lam
    return [
        np.asarray(c, dtype=np.intp)
        for c in enumerate_type_counts(avc.ns, n)
        if float(np.asarray(c) @ avc.ell) <= budget
    ]


def _adversary_states(
    avc: Avc, n: int, mode: str, trials: int, rng: np.random.Generator
) -> list[NDArray[np.intp]]:
    if mode == "exhaustive":
        return _feasible_state_sequences(avc, n)
    if mode == "type-representative":
        reps = []
        for counts in _feasible_type_counts(avc, n):
            rep = np.repeat(np.arange(avc.ns, dtype=np.intp), counts)
            reps.append(rng.permutation(rep))
        return reps
    if mode == "sampled":
        counts_list = _feasible_type_counts(avc, n)
        sizes = np.array([type_class_size(c) for c in counts_list], dtype=np.float64)
        probs = sizes / sizes.sum()
        picks = rng.choice(len(counts_list), size=max(trials, 1), p=probs)
        return [
            rng.permutation(np.repeat(np.arange(avc.ns, dtype=np.intp), counts_list[k]))
            for k in picks
        ]
    raise ChannelFormatError(
        f"unknown adversary mode {mode!r}; expected exhaustive, type-representative, or sampled"
    )


def simulate_worst_case(
    avc: Avc,
    codebook: Codebook,
    z: PairTest,
    adversary_mode: str = "exhaustive",
    trials: int = 200,
    seed: int = 0,
) -> SimResult:
    """Maximize the average decoding error over admissible state sequences.

    For each evaluated state sequence the average error is (1/m) times the
    sum over messages of the probability that the decoder does not return
    that message.  Deterministic channels are scored exactly (one output per
    codeword and state; trials ignored); noisy channels use `trials` Monte
    Carlo outputs per (message, state) with counter-derived randomness.
    Only the exhaustive mode searches every admissible sequence; the other
    two modes evaluate subsets, so their maxima are lower bounds.
    """
    validate(avc)
    n = codebook.n
    if codebook.codewords.min() < 0 or codebook.codewords.max() >= avc.nx:
        raise ChannelFormatError("codebook symbol outside the channel input alphabet")
    rng = np.random.Generator(np.random.Philox(key=seed))
    states = _adversary_states(avc, n, adversary_mode, trials, rng)
    deterministic = bool(np.all((avc.w == 0.0) | (avc.w == 1.0)))
    det_y = np.argmax(avc.w, axis=2).astype(np.intp)
    cum_w = np.cumsum(avc.w, axis=2)
    words = n + (-n) % 4

    per_state: dict[tuple[int, ...], float] = {}
    worst_err = -1.0
    worst_state: tuple[int, ...] = ()
    used_trials = 0 if deterministic else trials
    for s_idx, sseq in enumerate(states):
        wrong = 0.0
        for i in range(codebook.m):
            ci = codebook.codewords[i]
            if deterministic:
                yseq = det_y[ci, sseq]
                wrong += float(decode(yseq, codebook, z) != i)
            else:
                u = _stream(seed, (s_idx * codebook.m + i) * trials, trials, words)[:, :n]
                rows = cum_w[ci, sseq, :]
                ys = np.minimum((u[:, :, None] >= rows[None, :, :]).sum(axis=2), avc.ny - 1)
                miss = sum(decode(yt, codebook, z) != i for yt in ys.astype(np.intp))
                wrong += miss / trials
        err = wrong / codebook.m
        if len(per_state) < _PER_STATE_MAP_CAP:
            per_state[tuple(int(v) for v in sseq)] = err
        if err > worst_err:
            worst_err = err
            worst_state = tuple(int(v) for v in sseq)
    mapping = per_state if len(states) <= _PER_STATE_MAP_CAP else None
    return SimResult(
        worst_error=worst_err,
        worst_state=worst_state,
        per_state_errors=mapping,
        adversary_mode=adversary_mode,
        trials=used_trials,
        seed=seed,
    )


def validate_bound(
    avc: Avc,
    n: int,
    px_type: Dist,
    m: int,
    trials: int = 200,
    seed: int = 0,
    codebooks: int = 50,
    bound_samples: int = 20_000,
    eta: float | None = None,
    adversary_mode: str = "exhaustive",
    workers: int = 1,
) -> dict:
    """Compare the best measured worst-case error of sampled codebooks to the bound.

    Draws `codebooks` codebooks from the type class, scores each against the
    chosen adversary with the same n-letter test the bound analyzes, and
    keeps the smallest worst-case error; the bound is the Monte Carlo report
    at `bound_samples` draws.  holds is True when that error is at most
    bound.total, the string "vacuous" when bound.total >= 1 (the bound then
    says nothing), False otherwise.  Codebooks are scored independently, so
    workers > 1 changes wall time only, never the result.
    """
    test = nletter_test(avc, n, px_type, m, eta=eta)
    z = PairTest(z=test.z)
    bound = rcu_mc_avc(avc, n, px_type, m, samples=bound_samples, seed=seed, eta=test.eta)

    def score(j: int) -> SimResult:
        book = sample_codebook(px_type, m, n, seed=seed + 1 + j, constraint=avc)
        return simulate_worst_case(avc, book, z, adversary_mode, trials=trials, seed=seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(score, range(codebooks)))
    else:
        scored = [score(j) for j in range(codebooks)]
    # ties break toward the lowest codebook index
    best = min(scored, key=lambda r: r.worst_error)
    if bound.total >= 1.0:
        verdict: bool | str = "vacuous"
    else:
        verdict = bool(best.worst_error <= bound.total)
    return {"measured": best, "bound": bound, "holds": verdict}
