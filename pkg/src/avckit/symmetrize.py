"""Symmetrizing attacks: their cheapest cost, and how far a channel is from one.

lambda0 solves the linear program for the cheapest state kernel that makes
the channel's output law insensitive to swapping the true input with a
decoy.  A channel is symmetrizable under its budgets when every admissible
input distribution can be attacked within the state budget; capacity is
then zero.  eta_star brackets the divergence threshold that separates
attackable joint statistics from unattackable ones; it is strictly
positive exactly when the cheapest attack on px is out of budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import linprog as _scipy_linprog

from .channel import Avc, Dist, enumerate_type_counts
from .errors import ChannelFormatError, SolverError
from .lp import solve_lp

_LN2 = float(np.log(2.0))


@dataclass(frozen=True)
class SymResult:
    """Cheapest symmetrizing cost for one input distribution."""

    lambda0: float  # +inf when no symmetrizing kernel exists
    witness: NDArray[np.float64] | None  # rows P(s|x) on the support, nan elsewhere
    px: Dist


@dataclass(frozen=True)
class SymVerdict:
    symmetrizable: bool
    certificate: Dist  # maximizer of lambda0 found by the scan
    max_lambda0: float
    exact: bool  # non-symmetrizable verdicts carry an exact LP witness


@dataclass(frozen=True)
class EtaResult:
    eta_star_lower: float
    eta_star_upper: float
    method: str  # "construction" | "optimization" | "infeasible"
    certified: bool  # False when the iteration budget ran out before closing the bracket


def lambda0(px: Dist, avc: Avc) -> SymResult:
    """Minimum state cost of a symmetrizing kernel for px; +inf if none exists.

    Variables are the kernel rows on the support of px only.  The defining
    identity couples every pair of supported inputs at every output.
    """
    if px.size != avc.nx:
        raise ChannelFormatError("px size does not match channel input alphabet")
    supp = px.support()
    k, ns, ny = supp.size, avc.ns, avc.ny
    nv = k * ns
    c = np.empty(nv)
    for i, x in enumerate(supp):
        c[i * ns:(i + 1) * ns] = px.p[x] * avc.ell

    rows, rhs = [], []
    for i in range(k):
        r = np.zeros(nv)
        r[i * ns:(i + 1) * ns] = 1.0
        rows.append(r)
        rhs.append(1.0)
    for i in range(k):
        for j in range(i + 1, k):
            xi, xj = supp[i], supp[j]
            for y in range(ny):
                r = np.zeros(nv)
                r[i * ns:(i + 1) * ns] = avc.w[xj, :, y]
                r[j * ns:(j + 1) * ns] -= avc.w[xi, :, y]
                rows.append(r)
                rhs.append(0.0)

    res = solve_lp(c, A_eq=np.vstack(rows), b_eq=np.asarray(rhs))
    if res.status != "optimal":
        return SymResult(np.inf, None, px)
    witness = np.full((avc.nx, ns), np.nan)
    for i, x in enumerate(supp):
        row = np.clip(res.x[i * ns:(i + 1) * ns], 0.0, None)
        witness[x] = row / row.sum()
    return SymResult(float(res.value), witness, px)


def _grid_distributions(avc: Avc, resolution: float) -> list[Dist]:
    m = max(1, int(round(1.0 / resolution)))
    out = []
    for counts in enumerate_type_counts(avc.nx, m):
        p = np.asarray(counts, dtype=np.float64) / m
        if float(p @ avc.g) <= avc.gamma:
            out.append(Dist(p))
    return out


def _refine_max_lambda0(avc: Avc, best: Dist, best_val: float, step: float):
    """Pattern search around a grid maximizer; lambda0 may jump at support edges."""
    k = avc.nx
    for _ in range(6):
        improved = False
        for i in range(k):
            for j in range(k):
                if i == j:
                    continue
                p = best.p.copy()
                delta = min(step, p[j])
                if delta <= 0:
                    continue
                p[i] += delta
                p[j] -= delta
                if float(p @ avc.g) > avc.gamma:
                    continue
                cand = Dist(p)
                v = lambda0(cand, avc).lambda0
                if v > best_val + 1e-15:
                    best, best_val, improved = cand, v, True
        if not improved:
            step /= 2.0
    return best, best_val


def is_symmetrizable(avc: Avc, resolution: float = 0.01) -> SymVerdict:
    """Scan admissible input distributions for one the attacker cannot afford.

    Finding lambda0(px) > lam anywhere is an exact non-symmetrizability
    certificate.  The symmetrizable verdict is grid-plus-refinement
    evidence, not proof, and is flagged exact=False.
    """
    grid = _grid_distributions(avc, resolution)
    if not grid:
        raise ChannelFormatError("no admissible input distribution at this resolution")
    best, best_val = None, -np.inf
    for px in grid:
        v = lambda0(px, avc).lambda0
        if v > best_val:
            best, best_val = px, v
    if np.isfinite(best_val):
        best, best_val = _refine_max_lambda0(avc, best, best_val, resolution)
    if best_val > avc.lam + 1e-9:
        return SymVerdict(False, best, best_val, exact=True)
    return SymVerdict(True, best, best_val, exact=False)


# --------------------------------------------------------------- eta_star

def _allowed_mask(avc: Avc) -> NDArray[np.bool_]:
    """Joint cells (x, x', s, s', y) reachable in both reference factorizations."""
    nx, ns, ny = avc.nx, avc.ns, avc.ny
    w_pos = avc.w > 0.0
    m1 = w_pos[:, None, :, None, :]  # W(y|x,s) > 0
    m2 = w_pos[None, :, None, :, :]  # W(y|x',s') > 0
    return np.broadcast_to(m1 & m2, (nx, nx, ns, ns, ny)).copy()


def eta_objective(q5: NDArray[np.float64], px: Dist, avc: Avc):
    """(D1, D2) in bits for a joint law over (x, x', s, s', y).

    D1 tests the (x, x', s, y) marginal against px x Q_{x's} x W; D2 tests
    the reordered (x', x, s', y) marginal the same way.  Either is +inf
    when the marginal escapes its reference support.
    """
    q5 = np.asarray(q5, dtype=np.float64)
    q4a = q5.sum(axis=3)                 # (x, x', s, y)
    q4b = q5.sum(axis=2)                 # (x, x', s', y)
    qxs_a = q5.sum(axis=(0, 3, 4))       # (x', s)
    qxs_b = q5.sum(axis=(1, 2, 4))       # (x, s')

    def div(q4, ref):
        pos = q4 > 0.0
        if np.any(pos & (ref <= 0.0)):
            return np.inf
        vals = q4[pos] * np.log2(q4[pos] / ref[pos])
        return float(vals.sum())

    ref1 = px.p[:, None, None, None] * qxs_a[None, :, :, None] * \
        avc.w[:, None, :, :]
    # ref2 indexed as (x, x', s', y): px(x') Q_{xs'}(x, s') W(y | x', s')
    ref2 = px.p[None, :, None, None] * qxs_b[:, None, :, None] * \
        avc.w[None, :, :, :]
    return div(q4a, ref1), div(q4b, ref2)


def _eta_grad(q5: NDArray[np.float64], px: Dist, avc: Avc):
    """Value and subgradient of max(D1, D2) at an interior point of the face."""
    d1, d2 = eta_objective(q5, px, avc)
    q4a = q5.sum(axis=3)
    q4b = q5.sum(axis=2)
    qxs_a = q5.sum(axis=(0, 3, 4))
    qxs_b = q5.sum(axis=(1, 2, 4))
    if d1 >= d2:
        ref = px.p[:, None, None, None] * qxs_a[None, :, :, None] * avc.w[:, None, :, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            g4 = np.where(q4a > 0, np.log2(np.maximum(q4a, 1e-300) / np.maximum(ref, 1e-300)), 0.0)
        g5 = np.repeat(g4[:, :, :, None, :], avc.ns, axis=3)
        val = d1
    else:
        ref = px.p[None, :, None, None] * qxs_b[:, None, :, None] * avc.w[None, :, :, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            g4 = np.where(q4b > 0, np.log2(np.maximum(q4b, 1e-300) / np.maximum(ref, 1e-300)), 0.0)
        g5 = np.repeat(g4[:, :, None, :, :], avc.ns, axis=2)
        val = d2
    return val, g5


def symmetrizing_joint(px: Dist, avc: Avc, witness: NDArray[np.float64]):
    """Joint law built from a symmetrizing kernel; both divergences are zero.

    X, X' are i.i.d. px; S follows the kernel row of X'; Y follows W given
    (X, S); S' is the posterior draw that explains Y as W given (X', S').
    """
    nx, ns, ny = avc.nx, avc.ns, avc.ny
    q5 = np.zeros((nx, nx, ns, ns, ny))
    for x in range(nx):
        if px.p[x] <= 0:
            continue
        for xp in range(nx):
            if px.p[xp] <= 0:
                continue
            base = px.p[x] * px.p[xp]
            # forward law through (S | X') and backward weights through (S' | X)
            for y in range(ny):
                marg = sum(witness[xp, s] * avc.w[x, s, y] for s in range(ns))
                if marg <= 0:
                    continue
                for s in range(ns):
                    fwd = witness[xp, s] * avc.w[x, s, y]
                    if fwd <= 0:
                        continue
                    for sp in range(ns):
                        back = witness[x, sp] * avc.w[xp, sp, y] / marg
                        if back > 0:
                            q5[x, xp, s, sp, y] += base * fwd * back
    return q5


def _interior_feasible(cs, csp, lam, n_allowed):
    """Max-min-entry feasible point via one LP; None when the face is empty."""
    k = n_allowed
    c = np.zeros(k + 1)
    c[-1] = -1.0
    A_ub = []
    b_ub = []
    for i in range(k):
        r = np.zeros(k + 1)
        r[i] = -1.0
        r[-1] = 1.0
        A_ub.append(r)
        b_ub.append(0.0)
    A_ub.append(np.concatenate([cs, [0.0]]))
    b_ub.append(lam)
    A_ub.append(np.concatenate([csp, [0.0]]))
    b_ub.append(lam)
    A_eq = np.concatenate([np.ones(k), [0.0]]).reshape(1, -1)
    r = _scipy_linprog(c, A_ub=np.asarray(A_ub), b_ub=np.asarray(b_ub),
                       A_eq=A_eq, b_eq=[1.0], bounds=[(0, 1)] * k + [(0, 1)],
                       method="highs")
    if r.status != 0 or r.x is None:
        return None
    q = np.clip(r.x[:k], 0.0, None)
    return q / q.sum() if q.sum() > 0 else None


def _eta_upper_cvxpy(px: Dist, avc: Avc, lam: float, allowed, cs, csp):
    import cvxpy as cp

    nx, ns, ny = avc.nx, avc.ns, avc.ny
    k = allowed.shape[0]
    q = cp.Variable(k, nonneg=True)
    cons = [cp.sum(q) == 1, cs @ q <= lam, csp @ q <= lam]

    cells = [tuple(c) for c in allowed]
    pos = {c: i for i, c in enumerate(cells)}

    def marg_expr(keep_axes):
        groups: dict[tuple, list[int]] = {}
        for c, i in pos.items():
            key = tuple(c[a] for a in keep_axes)
            groups.setdefault(key, []).append(i)
        return {key: cp.sum(q[idx]) for key, idx in groups.items()}

    q4a = marg_expr((0, 1, 2, 4))
    q4b = marg_expr((0, 1, 3, 4))
    qxs_a = marg_expr((1, 2))
    qxs_b = marg_expr((0, 3))

    t = cp.Variable()
    terms1 = [cp.rel_entr(expr, px.p[x] * avc.w[x, s, y] * qxs_a[(xp, s)])
              for (x, xp, s, y), expr in q4a.items()]
    terms2 = [cp.rel_entr(expr, px.p[xp] * avc.w[xp, sp, y] * qxs_b[(x, sp)])
              for (x, xp, sp, y), expr in q4b.items()]
    cons += [cp.sum(terms1) <= t * _LN2, cp.sum(terms2) <= t * _LN2]
    prob = cp.Problem(cp.Minimize(t), cons)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        return None
    if prob.status not in ("optimal", "optimal_inaccurate") or q.value is None:
        return None
    sol = np.clip(q.value, 0.0, None)
    return sol / sol.sum()


def eta_star(px: Dist, avc: Avc, lam: float | None = None,
             tol: float = 1e-3, budget: int = 160) -> EtaResult:
    """Bracket the smallest divergence level admitting a two-way attackable joint.

    Below lambda0(px) budget, the explicit symmetrizing joint certifies
    zero.  Otherwise the value is the minimum of a convex function over a
    polytope face: a conic solve supplies feasible points (upper bound)
    and an accumulating cutting-plane relaxation supplies the certified
    lower bound.
    """
    if lam is None:
        lam = avc.lam
    if np.any(px.p <= 0.0):
        raise ChannelFormatError("eta_star requires a full-support input distribution")

    l0 = lambda0(px, avc)
    if l0.lambda0 <= lam:
        q5 = symmetrizing_joint(px, avc, l0.witness)
        d1, d2 = eta_objective(q5, px, avc)
        if max(d1, d2) > 1e-8:
            raise SolverError("symmetrizing construction failed to certify zero")
        return EtaResult(0.0, float(max(d1, d2, 0.0)), "construction", True)

    mask = _allowed_mask(avc)
    allowed = np.argwhere(mask)
    k = allowed.shape[0]
    cs = avc.ell[allowed[:, 2]]
    csp = avc.ell[allowed[:, 3]]

    q0 = _interior_feasible(cs, csp, lam, k)
    if q0 is None:
        return EtaResult(np.inf, np.inf, "infeasible", True)

    shape = (avc.nx, avc.nx, avc.ns, avc.ns, avc.ny)
    flat_ids = np.ravel_multi_index(allowed.T, shape)

    def unpack(qa):
        q = np.zeros(int(np.prod(shape)))
        q[flat_ids] = qa
        return q.reshape(shape)

    best_ub, best_q = np.inf, None
    sol = _eta_upper_cvxpy(px, avc, lam, allowed, cs, csp)
    cand = [q0] if sol is None else [sol, 0.5 * sol + 0.5 * q0, q0]
    for qa in cand:
        val, _ = _eta_grad(unpack(qa), px, avc)
        if np.isfinite(val) and val < best_ub and cs @ qa <= lam + 1e-12 \
                and csp @ qa <= lam + 1e-12:
            best_ub, best_q = val, qa.copy()

    cuts: list[tuple[float, np.ndarray]] = []
    qk = q0.copy()
    lb = 0.0
    rng = np.random.default_rng(0)
    for _ in range(budget):
        q_eval = 0.995 * qk + 0.005 * q0   # keep strictly inside the face
        val, g5 = _eta_grad(unpack(q_eval), px, avc)
        g = g5.reshape(-1)[flat_ids]
        if np.isfinite(val):
            cuts.append((val - float(g @ q_eval), g))
            feas = cs @ q_eval <= lam + 1e-12 and csp @ q_eval <= lam + 1e-12
            if feas and val < best_ub:
                best_ub, best_q = val, q_eval.copy()
        ncut = len(cuts)
        A_ub = np.zeros((ncut + 2, k + 1))
        b_ub = np.zeros(ncut + 2)
        for i, (c0, gv) in enumerate(cuts):
            A_ub[i, :k] = gv
            A_ub[i, k] = -1.0
            b_ub[i] = -c0
        A_ub[-2, :k] = cs
        b_ub[-2] = lam
        A_ub[-1, :k] = csp
        b_ub[-1] = lam
        A_eq = np.zeros((1, k + 1))
        A_eq[0, :k] = 1.0
        denom = np.zeros(k + 1)
        denom[k] = 1.0
        r = _scipy_linprog(denom, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                           bounds=[(0, 1)] * k + [(None, None)], method="highs")
        if r.status != 0:
            break
        lb = max(lb, float(r.x[k]))
        q_next = np.clip(r.x[:k], 0.0, None)
        q_next /= q_next.sum()
        mix = rng.uniform(0.3, 0.7)
        qk = mix * q_next + (1.0 - mix) * (best_q if best_q is not None else q0)
        if best_ub - lb <= tol:
            break

    lb = max(lb, 0.0)
    if np.isfinite(best_ub):
        lb = min(lb, best_ub)  # the true value sits in [lb, best_ub]
    certified = np.isfinite(best_ub) and best_ub - lb <= tol and lb > 0.0
    return EtaResult(float(lb), float(best_ub), "optimization", bool(certified))
