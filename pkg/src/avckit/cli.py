"""Command-line front end: spec files in, tables and CSV out.

Channel spec files are single JSON objects with a canonical field order:

    name     string label
    x_size   input alphabet size
    s_size   state alphabet size
    y_size   output alphabet size
    w        nested [x][s][y] transition probabilities
    g        per-letter input costs, length x_size
    ell      per-letter state costs, length s_size
    gamma    input cost budget per letter
    lambda   state cost budget per letter

The writer formats every real with 17 significant digits ("%.17g"), which
round trips IEEE doubles exactly, so write -> parse -> write is
byte-identical.  Example specs ship under avckit/specs/.

CSV schemas (column order is fixed; reals use "%.17g"):

    capacity  name,c_bits,c_r_bits,gap_bits,symmetrizable,pi_x_size,pi_s_size,pi_unique
    na        n,converse_bits,achievability_bits,converse_rate,achievability_rate
    rcu       n,m,n_states,eval_mode,mc_samples,seed,term_miss,term_confusion,
              term_esssup,term_slack,total,total_joint,vacuous,
              se_miss,se_confusion,se_esssup,se_total

Exit codes: 0 ok, 2 parse or usage error, 3 solver failure, 4 infeasible
constraint, 5 enumeration guard tripped.  Every command accepts --seed and
produces byte-identical output for identical seeds; capacity and na ignore
the seed (they are deterministic).  AVCKIT_THREADS caps the worker pool used
to score simulated codebooks.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .channel import Avc, Dist
from .errors import ChannelFormatError, GuardExceeded, InfeasibleError, SolverError
from .normal_approx import na_curve
from .rcu import PairTest, TypicalSet, nletter_test, rcu_exact_singleshot, rcu_mc_avc
from .saddle import capacity, random_code_capacity
from .simulate import validate_bound

_SPEC_FIELDS = ("name", "x_size", "s_size", "y_size", "w", "g", "ell", "gamma", "lambda")


# ------------------------------------------------------- spec file format

def _fmt(v: float) -> str:
    return "%.17g" % float(v)


def _vec(v) -> str:
    return "[" + ", ".join(_fmt(t) for t in v) + "]"


def dumps_spec(avc: Avc) -> str:
    """Serialize a channel to the canonical spec text."""
    w_rows = ",\n".join(
        "    [" + ", ".join(_vec(avc.w[x, s]) for s in range(avc.ns)) + "]"
        for x in range(avc.nx)
    )
    return "\n".join([
        "{",
        f'  "name": {json.dumps(avc.name)},',
        f'  "x_size": {avc.nx},',
        f'  "s_size": {avc.ns},',
        f'  "y_size": {avc.ny},',
        '  "w": [',
        w_rows,
        "  ],",
        f'  "g": {_vec(avc.g)},',
        f'  "ell": {_vec(avc.ell)},',
        f'  "gamma": {_fmt(avc.gamma)},',
        f'  "lambda": {_fmt(avc.lam)}',
        "}",
    ]) + "\n"


def _spec_real(obj: dict, key: str, origin: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ChannelFormatError(f"{origin}: field '{key}': expected a real number")
    return float(v)


def _spec_size(obj: dict, key: str, origin: str) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ChannelFormatError(f"{origin}: field '{key}': expected a positive integer")
    return v


def _spec_array(obj: dict, key: str, shape: tuple[int, ...], origin: str) -> np.ndarray:
    try:
        arr = np.asarray(obj[key], dtype=np.float64)
    except (TypeError, ValueError):
        raise ChannelFormatError(
            f"{origin}: field '{key}': ragged or non-numeric array") from None
    if arr.shape != shape:
        raise ChannelFormatError(
            f"{origin}: field '{key}': shape {arr.shape}, expected {shape}")
    return arr


def loads_spec(text: str, origin: str = "<spec>") -> Avc:
    """Parse canonical spec text; all failures raise ChannelFormatError."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ChannelFormatError(
            f"{origin}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ChannelFormatError(f"{origin}: top level must be an object")
    missing = [k for k in _SPEC_FIELDS if k not in obj]
    if missing:
        raise ChannelFormatError(f"{origin}: missing field(s): {', '.join(missing)}")
    extra = [k for k in obj if k not in _SPEC_FIELDS]
    if extra:
        raise ChannelFormatError(f"{origin}: unknown field(s): {', '.join(extra)}")
    if not isinstance(obj["name"], str):
        raise ChannelFormatError(f"{origin}: field 'name': expected a string")
    nx = _spec_size(obj, "x_size", origin)
    ns = _spec_size(obj, "s_size", origin)
    ny = _spec_size(obj, "y_size", origin)
    w = _spec_array(obj, "w", (nx, ns, ny), origin)
    g = _spec_array(obj, "g", (nx,), origin)
    ell = _spec_array(obj, "ell", (ns,), origin)
    gamma = _spec_real(obj, "gamma", origin)
    lam = _spec_real(obj, "lambda", origin)
    try:
        return Avc(w=w, g=g, ell=ell, gamma=gamma, lam=lam, name=obj["name"])
    except ChannelFormatError as exc:
        raise ChannelFormatError(f"{origin}: {exc}") from None


def load_spec(path: str | Path) -> Avc:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ChannelFormatError(f"{path}: {exc.strerror or exc}") from None
    return loads_spec(text, origin=str(path))


def save_spec(avc: Avc, path: str | Path) -> None:
    Path(path).write_text(dumps_spec(avc))


# ------------------------------------------------------- shared helpers

def thread_cap() -> int:
    """Worker count for codebook scoring, capped by AVCKIT_THREADS."""
    raw = os.environ.get("AVCKIT_THREADS", "").strip()
    if raw:
        try:
            v = int(raw)
        except ValueError:
            raise ChannelFormatError(f"AVCKIT_THREADS: not an integer: {raw!r}") from None
        if v < 1:
            raise ChannelFormatError("AVCKIT_THREADS: must be at least 1")
        return v
    return os.cpu_count() or 1


def _parse_dist(text: str) -> Dist:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise ChannelFormatError(f"--type: not a comma-separated vector: {text!r}") from None
    return Dist(np.array(vals))


def _parse_n_range(text: str) -> list[int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected a:b:step")
    try:
        a, b, step = (int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError("expected integers a:b:step") from None
    if a < 1 or b < a or step < 1:
        raise argparse.ArgumentTypeError("need 1 <= a <= b and step >= 1")
    return list(range(a, b + 1, step))


def _bool(v: bool) -> str:
    return "true" if v else "false"


def _show(v: float) -> str:
    return "%.12g" % v


def _emit_csv(lines: list[str], path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
        print(f"wrote {len(lines) - 1} rows to {path}")
    else:
        sys.stdout.write(text)


# ------------------------------------------------------- subcommands

def cmd_capacity(args: argparse.Namespace) -> int:
    avc = load_spec(args.file)
    det = capacity(avc, tol=args.tol)
    rc = random_code_capacity(avc, tol=args.tol)
    gap = rc.value - det.value
    print(f"channel: {avc.name or args.file}")
    if det.symmetrizable:
        print("symmetrizable, C = 0")
    else:
        print(f"C (deterministic) = {_show(det.value)} bits/letter")
    print(f"C_r (random)      = {_show(rc.value)} bits/letter")
    print(f"gap (C_r - C)     = {_show(gap)} bits/letter")
    print(f"|Pi_X| = {len(rc.px_opt)}, |Pi_S| = {len(rc.ps_opt)}, "
          f"pi_unique: {_bool(rc.pi_unique)}")
    if args.csv is not None:
        header = "name,c_bits,c_r_bits,gap_bits,symmetrizable,pi_x_size,pi_s_size,pi_unique"
        row = ",".join([
            avc.name, _fmt(det.value), _fmt(rc.value), _fmt(gap),
            _bool(det.symmetrizable), str(len(rc.px_opt)), str(len(rc.ps_opt)),
            _bool(rc.pi_unique),
        ])
        _emit_csv([header, row], args.csv)
    return 0


def cmd_na(args: argparse.Namespace) -> int:
    avc = load_spec(args.file)
    curve = na_curve(avc, args.n_range, args.eps, tol=args.tol)
    lines = ["n,converse_bits,achievability_bits,converse_rate,achievability_rate"]
    for n, cb, ab in zip(curve.n_values, curve.converse_bits, curve.achievability_bits):
        lines.append(",".join([str(n), _fmt(cb), _fmt(ab), _fmt(cb / n), _fmt(ab / n)]))
    _emit_csv(lines, args.csv)
    return 0


def _rcu_report(args: argparse.Namespace):
    avc = load_spec(args.file)
    px = _parse_dist(args.type)
    if args.exact:
        if args.n != 1:
            raise ChannelFormatError("--exact evaluates the single-shot bound; use --n 1")
        test = nletter_test(avc, 1, px, args.m, eta=args.eta, n_states=args.n_states)
        z = PairTest(z=lambda x, xb, y: test.z([x], [xb], [y]))
        a = TypicalSet(membership=lambda x, y: test.a_member([x], [y]), gamma=test.gamma)
        return avc, rcu_exact_singleshot(avc, px, z, a, args.m, n_states=test.n_states)
    rep = rcu_mc_avc(avc, args.n, px, args.m, samples=args.samples, seed=args.seed,
                     eta=args.eta, n_states=args.n_states)
    return avc, rep


def cmd_rcu(args: argparse.Namespace) -> int:
    avc, rep = _rcu_report(args)
    se = rep.std_error
    print(f"channel: {avc.name or args.file}  n={rep.n}  M={rep.m}  N_s={rep.n_states}  "
          f"mode={rep.eval_mode}  samples={rep.mc_samples}  seed={rep.seed}")
    for key in ("term_miss", "term_confusion", "term_esssup"):
        print(f"{key:<15} = {_show(getattr(rep, key))}  (se {_show(se[key])})")
    print(f"{'term_slack':<15} = {_show(rep.term_slack)}")
    print(f"{'total':<15} = {_show(rep.total)}  (se {_show(se['total'])})")
    print(f"{'total_joint':<15} = {_show(rep.total_joint)}")
    print(f"vacuous: {_bool(rep.vacuous)}")
    if args.csv is not None:
        header = ("n,m,n_states,eval_mode,mc_samples,seed,term_miss,term_confusion,"
                  "term_esssup,term_slack,total,total_joint,vacuous,"
                  "se_miss,se_confusion,se_esssup,se_total")
        row = ",".join([
            str(rep.n), str(rep.m), str(rep.n_states), rep.eval_mode,
            str(rep.mc_samples), "" if rep.seed is None else str(rep.seed),
            _fmt(rep.term_miss), _fmt(rep.term_confusion), _fmt(rep.term_esssup),
            _fmt(rep.term_slack), _fmt(rep.total), _fmt(rep.total_joint),
            _bool(rep.vacuous), _fmt(se["term_miss"]), _fmt(se["term_confusion"]),
            _fmt(se["term_esssup"]), _fmt(se["total"]),
        ])
        _emit_csv([header, row], args.csv)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    avc = load_spec(args.file)
    px = _parse_dist(args.type)
    out = validate_bound(
        avc, args.n, px, args.m, trials=args.trials, seed=args.seed,
        codebooks=args.codebooks, bound_samples=args.samples, eta=args.eta,
        adversary_mode=args.adversary, workers=thread_cap(),
    )
    bound = out["bound"]
    meas = out["measured"]
    print(f"channel: {avc.name or args.file}  n={args.n}  M={args.m}  "
          f"codebooks={args.codebooks}  adversary={args.adversary}  "
          f"trials={meas.trials}  seed={args.seed}")
    print(f"bound: total = {_show(bound.total)}  (miss {_show(bound.term_miss)}, "
          f"confusion {_show(bound.term_confusion)}, esssup {_show(bound.term_esssup)}, "
          f"slack {_show(bound.term_slack)})  vacuous: {_bool(bound.vacuous)}")
    print(f"measured: worst_error = {_show(meas.worst_error)}  "
          f"worst_state = {meas.worst_state}")
    if out["holds"] == "vacuous":
        print("verdict: VACUOUS (bound >= 1)")
    elif out["holds"]:
        print("verdict: HOLDS")
    else:
        print("verdict: VIOLATED")
    return 0


# ------------------------------------------------------- parser and entry

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="avckit",
        description="Capacity, dispersion, finite-blocklength bounds, and "
                    "desk-scale simulation for cost-constrained adversarial channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="deterministic and random-code saddle values")
    p.add_argument("file", help="channel spec file")
    p.add_argument("--tol", type=float, default=1e-7, help="solver tolerance")
    p.add_argument("--csv", default=None, help="also write a one-row CSV here")
    p.add_argument("--seed", type=int, default=0, help="accepted for interface "
                   "uniformity; the solver is deterministic")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("na", help="second-order rate approximations over a blocklength grid")
    p.add_argument("file", help="channel spec file")
    p.add_argument("--eps", type=float, required=True, help="target error in (0, 0.5)")
    p.add_argument("--n-range", type=_parse_n_range, default="100:10000:100",
                   help="blocklength grid a:b:step, endpoints inclusive")
    p.add_argument("--tol", type=float, default=1e-7, help="solver tolerance")
    p.add_argument("--csv", default=None, help="write CSV here instead of stdout")
    p.add_argument("--seed", type=int, default=0, help="accepted for interface "
                   "uniformity; the curve is deterministic")
    p.set_defaults(func=cmd_na)

    p = sub.add_parser("rcu", help="finite-blocklength achievability bound")
    p.add_argument("file", help="channel spec file")
    p.add_argument("--n", type=int, required=True, help="blocklength")
    p.add_argument("--type", required=True, help="input type, comma-separated, e.g. 0.5,0.5")
    p.add_argument("--M", dest="m", type=int, required=True, help="number of messages")
    p.add_argument("--samples", type=int, default=20_000, help="Monte Carlo draws per state type")
    p.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    p.add_argument("--eta", type=float, default=None, help="pairwise-test divergence radius")
    p.add_argument("--n-states", dest="n_states", type=int, default=None,
                   help="override the N_s factor of the last two terms")
    p.add_argument("--exact", action="store_true",
                   help="full enumeration at n=1; std_error columns become 0")
    p.add_argument("--csv", default=None, help="also write a one-row CSV here")
    p.set_defaults(func=cmd_rcu)

    p = sub.add_parser("simulate", help="compare sampled codebooks against the bound")
    p.add_argument("file", help="channel spec file")
    p.add_argument("--n", type=int, required=True, help="blocklength")
    p.add_argument("--type", required=True, help="input type, comma-separated")
    p.add_argument("--M", dest="m", type=int, required=True, help="number of messages")
    p.add_argument("--codebooks", type=int, default=50, help="codebooks to sample")
    p.add_argument("--adversary", choices=("exhaustive", "type-representative", "sampled"),
                   default="exhaustive", help="state search mode")
    p.add_argument("--trials", type=int, default=200, help="decode trials per state "
                   "(noisy channels only)")
    p.add_argument("--samples", type=int, default=20_000, help="Monte Carlo draws for the bound")
    p.add_argument("--eta", type=float, default=None, help="pairwise-test divergence radius")
    p.add_argument("--seed", type=int, default=0, help="seed for codebooks, bound, and trials")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except ChannelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 4
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    raise SystemExit(main())
