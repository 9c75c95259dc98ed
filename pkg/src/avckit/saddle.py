"""Max-min mutual information over cost-constrained input and state mixtures.

The shared-randomness value maximizes, over inputs meeting the input
budget, the worst-case mutual information against state mixtures meeting
the state budget.  The deterministic-code value restricts the outer
maximization to inputs that are too expensive to symmetrize.  Both
problems are concave in the input law and convex in the state law, so a
recomputed best-response gap certifies the reported value.  Dispersion
extrema over the optimizer sets are evaluated on representative points,
with a level-set pattern search when a set looks like a continuum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .channel import Avc, Dist, validate
from .errors import SolverError
from .info import info_stats, mutual_information
from .symmetrize import is_symmetrizable, lambda0

_LOG2E = float(np.log2(np.e))


@dataclass(frozen=True)
class SaddleSolution:
    """Saddle value with optimizer-set representatives and dispersion extrema.

    v_plus and v_minus are evaluated over this solution's own representative
    sets: take v_plus from capacity() and v_minus from random_code_capacity().
    pi_unique is False when a representative set shows a flat direction at
    the probe scale, i.e. the optimizer set is likely a continuum and the
    dispersion extrema are heuristic.
    """

    value: float
    px_opt: list[Dist]
    ps_opt: list[Dist]
    v_plus: float
    v_minus: float
    gap: float
    symmetrizable: bool = False
    pi_unique: bool = True


# ------------------------------------------------------- feasible sets

def _interval(cost: np.ndarray, budget: float) -> tuple[float, float] | None:
    """Feasible weight-on-second-symbol range for a two-point alphabet."""
    a, b = float(cost[0]), float(cost[1]) - float(cost[0])
    if b > 0:
        hi = (budget - a) / b
        return None if hi < 0 else (0.0, min(1.0, hi))
    if b < 0:
        lo = (budget - a) / b
        return None if lo > 1 else (max(0.0, lo), 1.0)
    return (0.0, 1.0) if a <= budget else None


def _repair(p: np.ndarray, cost: np.ndarray, budget: float) -> np.ndarray:
    """Clip, renormalize, and blend toward the cheapest vertex until affordable."""
    p = np.clip(np.asarray(p, dtype=np.float64), 0.0, None)
    s = p.sum()
    p = np.full_like(p, 1.0 / p.size) if s <= 0 else p / s
    c = float(p @ cost)
    if c <= budget:
        return p
    j = int(np.argmin(cost))
    cmin = float(cost[j])
    if c - cmin <= 0:
        return p
    t = min(1.0, (c - budget) / (c - cmin))
    q = (1.0 - t) * p
    q[j] += t
    if float(q @ cost) > budget:  # final nudge for roundoff
        q = (1.0 - 1e-12) * q
        q[j] += 1e-12
    return q / q.sum()


def _feasible_starts(k: int, cost: np.ndarray, budget: float, extra: int = 3):
    starts = [_repair(np.full(k, 1.0 / k), cost, budget)]
    v = np.zeros(k)
    v[int(np.argmin(cost))] = 1.0
    starts.append(v)
    rng = np.random.default_rng(0)  # fixed seed keeps the solver deterministic
    for _ in range(extra):
        starts.append(_repair(rng.dirichlet(np.ones(k)), cost, budget))
    return starts


# ------------------------------------------------ objective and gradients

def _mi_and_state_grad(px: np.ndarray, ps: np.ndarray, avc: Avc):
    """I(px; induced channel) and its gradient in the state weights, in bits."""
    kxy = np.einsum("s,xsy->xy", ps, avc.w)
    out = px @ kxy
    with np.errstate(divide="ignore", invalid="ignore"):
        logratio = np.where(kxy > 0, np.log2(np.maximum(kxy, 1e-300))
                            - np.log2(np.maximum(out, 1e-300))[None, :], 0.0)
    mi = float(np.einsum("x,xy,xy->", px, kxy, logratio))
    grad = np.einsum("x,xsy,xy->s", px, avc.w, logratio)
    return mi, grad


def _mi_and_input_grad(px: np.ndarray, ps: np.ndarray, avc: Avc):
    """I and its gradient in the input weights: D(K_x || out) - log2 e."""
    kxy = np.einsum("s,xsy->xy", ps, avc.w)
    out = px @ kxy
    with np.errstate(divide="ignore", invalid="ignore"):
        logratio = np.where(kxy > 0, np.log2(np.maximum(kxy, 1e-300))
                            - np.log2(np.maximum(out, 1e-300))[None, :], 0.0)
    mi = float(np.einsum("x,xy,xy->", px, kxy, logratio))
    grad = np.einsum("xy,xy->x", kxy, logratio) - _LOG2E
    return mi, np.clip(grad, -1e3, 1e3)


def _mi(px: np.ndarray, ps: np.ndarray, avc: Avc) -> float:
    return _mi_and_state_grad(px, ps, avc)[0]


# ------------------------------------------------------- one-sided solves

def _scalar_extremize(f, lo: float, hi: float, maximize: bool):
    if hi - lo <= 1e-14:
        return f(lo), lo
    sgn = -1.0 if maximize else 1.0
    res = minimize_scalar(lambda t: sgn * f(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 500})
    cands = [(f(t), t) for t in (lo, hi, float(res.x))]
    best = min(cands, key=lambda c: sgn * c[0])
    return best


def _slsqp_extremize(fg, k: int, cost: np.ndarray, budget: float,
                     starts, maximize: bool, maxiter: int = 300):
    """Best of several SLSQP runs; every candidate is repaired to exact feasibility."""
    sgn = -1.0 if maximize else 1.0

    def wrapped(z):
        v, g = fg(np.clip(z, 0.0, None))
        return sgn * v, sgn * g

    cons = [
        {"type": "eq", "fun": lambda z: z.sum() - 1.0, "jac": lambda z: np.ones(k)},
        {"type": "ineq", "fun": lambda z: budget - z @ cost, "jac": lambda z: -cost},
    ]
    cands = []
    for z0 in starts:
        try:
            res = minimize(wrapped, z0, jac=True, method="SLSQP",
                           bounds=[(0.0, 1.0)] * k, constraints=cons,
                           options={"maxiter": maxiter, "ftol": 1e-13})
            z = _repair(res.x, cost, budget)
        except (ValueError, FloatingPointError):
            z = _repair(z0, cost, budget)
        cands.append((fg(z)[0], z))
    best = min(cands, key=lambda c: sgn * c[0])
    return best[0], best[1], cands


def _min_over_states(px: np.ndarray, avc: Avc, warm: list):
    """Worst-case mutual information over affordable state mixtures."""
    if avc.ns == 1:
        return _mi(px, np.ones(1), avc), np.ones(1), [( _mi(px, np.ones(1), avc), np.ones(1))]
    if avc.ns == 2:
        lo, hi = _interval(avc.ell, avc.lam)
        v, t = _scalar_extremize(lambda q: _mi(px, np.array([1.0 - q, q]), avc),
                                 lo, hi, maximize=False)
        ps = np.array([1.0 - t, t])
        return v, ps, [(v, ps)]
    starts = _feasible_starts(avc.ns, avc.ell, avc.lam)
    if warm:
        starts = [warm[0]] + starts
    v, ps, cands = _slsqp_extremize(lambda q: _mi_and_state_grad(px, q, avc),
                                    avc.ns, avc.ell, avc.lam, starts, maximize=False)
    warm[:] = [ps]
    return v, ps, cands


def _max_over_inputs(ps: np.ndarray, avc: Avc, lo_hi=None):
    """Best-response input against a fixed state mixture (concave maximization)."""
    if avc.nx == 1:
        return _mi(np.ones(1), ps, avc), np.ones(1), [( _mi(np.ones(1), ps, avc), np.ones(1))]
    if avc.nx == 2:
        span = lo_hi if lo_hi is not None else _interval(avc.g, avc.gamma)
        v, t = _scalar_extremize(lambda p: _mi(np.array([1.0 - p, p]), ps, avc),
                                 span[0], span[1], maximize=True)
        px = np.array([1.0 - t, t])
        return v, px, [(v, px)]
    starts = _feasible_starts(avc.nx, avc.g, avc.gamma)
    v, px, cands = _slsqp_extremize(lambda p: _mi_and_input_grad(p, ps, avc),
                                    avc.nx, avc.g, avc.gamma, starts, maximize=True)
    return v, px, cands


# ----------------------------------------------------- representative sets

def _cluster(points: list[np.ndarray], eps: float = 1e-4) -> list[np.ndarray]:
    reps: list[np.ndarray] = []
    for z in points:
        if all(np.max(np.abs(z - r)) > eps for r in reps):
            reps.append(z)
    return reps


def _probe_directions(k: int):
    for i in range(k):
        for j in range(k):
            if i != j:
                d = np.zeros(k)
                d[i], d[j] = 1.0, -1.0
                yield d


def _level_set_reps(center: np.ndarray, value: float, f, cost, budget,
                    opt_tol: float, delta: float = 0.01):
    """Probe simplex directions; points still optimal at scale delta join the set."""
    hits = [center]
    for d in _probe_directions(center.size):
        z = _repair(center + delta * d, cost, budget)
        if np.max(np.abs(z - center)) < 1e-9:
            continue
        if f(z) >= value - opt_tol:
            hits.append(z)
    return hits


def _v_of(px: np.ndarray, ps: np.ndarray, avc: Avc) -> float:
    return info_stats(Dist(px), Dist(ps), avc).dispersion


def _v_extrema(px_reps, ps_reps, avc: Avc):
    """min over inputs of max over states of V, and the reversed order."""
    table = np.array([[_v_of(px, ps, avc) for ps in ps_reps] for px in px_reps])
    vp = float(table.max(axis=1).min())
    vm = float(table.min(axis=0).max())
    return vp, vm


# --------------------------------------------------------------- solvers

def random_code_capacity(avc: Avc, tol: float = 1e-7) -> SaddleSolution:
    """Saddle value when the code may be randomized secretly from the adversary."""
    validate(avc)
    opt_tol = 10.0 * tol
    warm: list = []

    def phi(px: np.ndarray) -> float:
        return _min_over_states(px, avc, warm)[0]

    if avc.nx == 1:
        px_star = np.ones(1)
    elif avc.nx == 2:
        lo, hi = _interval(avc.g, avc.gamma)
        _, t = _scalar_extremize(lambda p: phi(np.array([1.0 - p, p])), lo, hi,
                                 maximize=True)
        px_star = np.array([1.0 - t, t])
    else:
        def phi_and_supergrad(px):
            v, ps, _ = _min_over_states(px, avc, warm)
            _, g = _mi_and_input_grad(px, ps, avc)
            return v, g

        _, px_star, outer_cands = _slsqp_extremize(
            phi_and_supergrad, avc.nx, avc.g, avc.gamma,
            _feasible_starts(avc.nx, avc.g, avc.gamma, extra=4), maximize=True)

    lower, ps_star, inner_cands = _min_over_states(px_star, avc, [])
    upper, _, _ = _max_over_inputs(ps_star, avc)
    gap = abs(upper - lower)
    if gap > max(tol, 50 * tol * max(1.0, abs(lower))):
        raise SolverError(
            f"saddle certificate failed: value={lower:.12g} gap={gap:.3g} tol={tol:.1g}")
    value = 0.5 * (lower + upper)

    px_pts = [px_star] + _level_set_reps(px_star, lower, phi, avc.g, avc.gamma, opt_tol)
    ps_pts = [ps_star] + [z for v, z in inner_cands if v <= lower + opt_tol]
    ps_pts += _level_set_reps(
        ps_star, -upper, lambda q: -_max_over_inputs(q, avc)[0],
        avc.ell, avc.lam, opt_tol)
    px_reps = _cluster(px_pts)
    ps_reps = _cluster(ps_pts)
    vp, vm = _v_extrema(px_reps, ps_reps, avc)
    return SaddleSolution(
        value=float(value),
        px_opt=[Dist(p) for p in px_reps],
        ps_opt=[Dist(p) for p in ps_reps],
        v_plus=vp, v_minus=vm, gap=float(gap),
        symmetrizable=False,
        pi_unique=(len(px_reps) == 1 and len(ps_reps) == 1))


def capacity(avc: Avc, tol: float = 1e-7,
             grid_resolution: float = 0.01) -> SaddleSolution:
    """Deterministic-code saddle value; zero when every input is attackable.

    The extra outer constraint keeps only inputs whose cheapest symmetrizing
    attack exceeds the state budget.  Candidates are filtered through the
    attack-cost LP rather than reformulated.
    """
    validate(avc)
    verdict = is_symmetrizable(avc, resolution=grid_resolution)
    if verdict.symmetrizable:
        return SaddleSolution(0.0, [], [], 0.0, 0.0, 0.0, symmetrizable=True)

    unconstrained = random_code_capacity(avc, tol)
    feasible_reps = [px for px in unconstrained.px_opt
                     if lambda0(px, avc).lambda0 >= avc.lam - 1e-12]
    if feasible_reps:
        px_reps = [px.p for px in feasible_reps]
        ps_reps = [ps.p for ps in unconstrained.ps_opt]
        vp, vm = _v_extrema(px_reps, ps_reps, avc)
        return SaddleSolution(
            value=unconstrained.value,
            px_opt=feasible_reps, ps_opt=unconstrained.ps_opt,
            v_plus=vp, v_minus=vm, gap=unconstrained.gap,
            symmetrizable=False, pi_unique=unconstrained.pi_unique)

    opt_tol = 10.0 * tol
    warm: list = []

    def phi(px: np.ndarray) -> float:
        return _min_over_states(px, avc, warm)[0]

    def lam0_of(px: np.ndarray) -> float:
        return lambda0(Dist(px), avc).lambda0

    if avc.nx == 2:
        span = _interval(avc.g, avc.gamma)
        ts = np.linspace(span[0], span[1], max(2, int(np.ceil((span[1] - span[0]) / 0.005)) + 1))
        ok = np.array([lam0_of(np.array([1.0 - t, t])) >= avc.lam - 1e-12 for t in ts])
        if not ok.any():
            return SaddleSolution(0.0, [], [], 0.0, 0.0, 0.0, symmetrizable=True)

        def bisect_edge(t_in: float, t_out: float) -> float:
            for _ in range(60):
                mid = 0.5 * (t_in + t_out)
                if lam0_of(np.array([1.0 - mid, mid])) >= avc.lam - 1e-12:
                    t_in = mid
                else:
                    t_out = mid
            return t_in

        best = None
        i = 0
        while i < ts.size:  # maximize over each feasible run of the scan
            if not ok[i]:
                i += 1
                continue
            j = i
            while j + 1 < ts.size and ok[j + 1]:
                j += 1
            lo = ts[i] if i == 0 else bisect_edge(ts[i], ts[i - 1])
            hi = ts[j] if j == ts.size - 1 else bisect_edge(ts[j], ts[j + 1])
            v, t = _scalar_extremize(lambda p: phi(np.array([1.0 - p, p])),
                                     lo, hi, maximize=True)
            if best is None or v > best[0]:
                best = (v, t, lo, hi)
            i = j + 1
        value, t_star, lo, hi = best
        px_star = np.array([1.0 - t_star, t_star])
        lower, ps_star, inner_cands = _min_over_states(px_star, avc, [])

        def psi_constrained(q: np.ndarray) -> float:
            return _max_over_inputs(q, avc, lo_hi=(lo, hi))[0]

        upper = psi_constrained(ps_star)
        gap = abs(upper - lower)
        px_pts = [px_star] + [
            z for z in _level_set_reps(px_star, lower, phi, avc.g, avc.gamma, opt_tol)
            if lam0_of(z) >= avc.lam - 1e-12]
    else:
        # coarse rejection grid plus refinement; flagged through pi_unique
        grid = _grid_candidates(avc, 0.05)
        survivors = [p for p in grid if lam0_of(p) >= avc.lam - 1e-12]
        if not survivors:
            return SaddleSolution(0.0, [], [], 0.0, 0.0, 0.0, symmetrizable=True)
        vals = [phi(p) for p in survivors]
        k = int(np.argmax(vals))
        px_star, value = survivors[k], vals[k]
        px_star, value = _pattern_max(px_star, value, phi, lam0_of, avc)
        lower, ps_star, inner_cands = _min_over_states(px_star, avc, [])
        cons_cands = [(_mi(p, ps_star, avc), p) for p in survivors] + [(lower, px_star)]
        upper = max(v for v, _ in cons_cands)
        gap = abs(upper - lower)
        px_pts = [px_star]

    if gap > max(tol, 50 * tol * max(1.0, abs(lower))) and avc.nx == 2:
        raise SolverError(
            f"constrained saddle certificate failed: value={lower:.12g} gap={gap:.3g}")
    ps_pts = [ps_star] + [z for v, z in inner_cands if v <= lower + opt_tol]
    px_reps = _cluster(px_pts)
    ps_reps = _cluster(ps_pts)
    vp, vm = _v_extrema(px_reps, ps_reps, avc)
    return SaddleSolution(
        value=float(lower), px_opt=[Dist(p) for p in px_reps],
        ps_opt=[Dist(p) for p in ps_reps],
        v_plus=vp, v_minus=vm, gap=float(gap),
        symmetrizable=False,
        pi_unique=(len(px_reps) == 1 and len(ps_reps) == 1 and avc.nx == 2))


def _grid_candidates(avc: Avc, resolution: float) -> list[np.ndarray]:
    from .channel import enumerate_type_counts

    m = max(1, int(round(1.0 / resolution)))
    out = []
    for counts in enumerate_type_counts(avc.nx, m):
        p = np.asarray(counts, dtype=np.float64) / m
        if float(p @ avc.g) <= avc.gamma:
            out.append(p)
    return out


def _pattern_max(z: np.ndarray, val: float, f, feas, avc: Avc):
    for delta in (0.02, 0.005, 0.001, 2e-4):
        for _ in range(40):
            moved = False
            for d in _probe_directions(z.size):
                cand = _repair(z + delta * d, avc.g, avc.gamma)
                if feas(cand) < avc.lam - 1e-12:
                    continue
                v = f(cand)
                if v > val + 1e-12:
                    z, val, moved = cand, v, True
            if not moved:
                break
    return z, val


def v_plus(avc: Avc, tol: float = 1e-7) -> float:
    """Dispersion seen by the best deterministic-code input against the worst state."""
    sol = capacity(avc, tol)
    if sol.symmetrizable:
        raise SolverError("v_plus undefined: channel is symmetrizable under its budgets")
    return sol.v_plus


def v_minus(avc: Avc, tol: float = 1e-7) -> float:
    """Dispersion granted by the worst state mixture against the best input."""
    return random_code_capacity(avc, tol).v_minus
