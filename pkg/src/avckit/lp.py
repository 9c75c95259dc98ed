"""Dense two-phase simplex for small linear programs.

Standard form min c.z with A_eq z = b_eq, A_ub z <= b_ub, z >= 0.
Bland's rule throughout, so the method terminates even on the heavily
degenerate 0/1 data produced by deterministic channels.  Intended for
problems with at most a few hundred variables; everything is dense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import SolverError

_TOL = 1e-9


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: NDArray[np.float64] | None
    value: float


def _pivot(t: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    t[row] /= t[row, col]
    for r in range(t.shape[0]):
        if r != row and t[r, col] != 0.0:
            t[r] -= t[r, col] * t[row]
    basis[row] = col


def _simplex_phase(t: np.ndarray, basis: np.ndarray, ncols: int) -> str:
    """Run Bland-rule simplex on a tableau whose last row is the objective."""
    m = t.shape[0] - 1
    for _ in range(200000):
        obj = t[-1, :ncols]
        enter = -1
        for j in range(ncols):
            if obj[j] < -_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        # ratio test, Bland tie-break on basis index
        leave, best = -1, np.inf
        for r in range(m):
            a = t[r, enter]
            if a > _TOL:
                ratio = t[r, -1] / a
                if ratio < best - 1e-12 or (abs(ratio - best) <= 1e-12 and
                                            (leave < 0 or basis[r] < basis[leave])):
                    leave, best = r, ratio
        if leave < 0:
            return "unbounded"
        _pivot(t, basis, leave, enter)
    raise SolverError("simplex iteration budget exhausted")


def solve_lp(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None) -> LpResult:
    """Minimize c.z over z >= 0 subject to equalities and upper bounds."""
    c = np.asarray(c, dtype=np.float64)
    n = c.size
    rows: list[np.ndarray] = []
    rhs: list[float] = []
    n_slack = 0 if A_ub is None else np.asarray(A_ub).shape[0]
    if A_eq is not None:
        A_eq = np.asarray(A_eq, dtype=np.float64).reshape(-1, n)
        for r, b in zip(A_eq, np.asarray(b_eq, dtype=np.float64).ravel()):
            rows.append(np.concatenate([r, np.zeros(n_slack)]))
            rhs.append(float(b))
    if A_ub is not None:
        A_ub = np.asarray(A_ub, dtype=np.float64).reshape(-1, n)
        for i, (r, b) in enumerate(zip(A_ub, np.asarray(b_ub, dtype=np.float64).ravel())):
            s = np.zeros(n_slack)
            s[i] = 1.0
            rows.append(np.concatenate([r, s]))
            rhs.append(float(b))
    if not rows:
        if np.all(c >= -_TOL):
            return LpResult("optimal", np.zeros(n), 0.0)
        return LpResult("unbounded", None, -np.inf)

    A = np.vstack(rows)
    b = np.asarray(rhs)
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0
    m, ntot = A.shape

    # phase 1 tableau: [A | I | b], objective = sum of artificials
    t = np.zeros((m + 1, ntot + m + 1))
    t[:m, :ntot] = A
    t[:m, ntot:ntot + m] = np.eye(m)
    t[:m, -1] = b
    basis = np.arange(ntot, ntot + m)
    t[-1, :ntot] = -A.sum(axis=0)
    t[-1, -1] = -b.sum()

    status = _simplex_phase(t, basis, ntot + m)
    if status != "optimal" or -t[-1, -1] > 1e-7:
        return LpResult("infeasible", None, np.inf)

    # drive artificials out of the basis where a real pivot exists
    for r in range(m):
        if basis[r] >= ntot:
            for j in range(ntot):
                if abs(t[r, j]) > _TOL:
                    _pivot(t, basis, r, j)
                    break

    keep = [r for r in range(m) if basis[r] < ntot or abs(t[r, -1]) <= 1e-9]
    t2 = np.zeros((len(keep) + 1, ntot + 1))
    live = [r for r in keep if basis[r] < ntot]
    t2[:len(keep), :ntot] = t[keep][:, :ntot]
    t2[:len(keep), -1] = t[keep][:, -1]
    basis2 = basis[keep].copy()
    # redundant rows held by artificials at zero level are dropped entirely
    drop = [i for i, r in enumerate(keep) if r not in live]
    if drop:
        mask = np.ones(len(keep), bool)
        mask[drop] = False
        t2 = np.vstack([t2[:len(keep)][mask], t2[-1:]])
        basis2 = basis2[mask]
    full_c = np.concatenate([c, np.zeros(n_slack)])
    t2[-1, :ntot] = full_c
    for r, bv in enumerate(basis2):
        if full_c[bv] != 0.0:
            t2[-1] -= full_c[bv] * t2[r]

    status = _simplex_phase(t2, basis2, ntot)
    if status == "unbounded":
        return LpResult("unbounded", None, -np.inf)
    z = np.zeros(ntot)
    for r, bv in enumerate(basis2):
        z[bv] = t2[r, -1]
    x = z[:n]
    return LpResult("optimal", x, float(c @ x))
