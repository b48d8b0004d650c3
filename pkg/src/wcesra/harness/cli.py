"""Command line interface.

Exit codes: 0 success, 1 hard-assertion failure, 2 usage error,
3 numerical failure.  Tolerances come from the defaults, then ``WCESRA_*``
environment variables, then the global flags.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .. import __version__, sra
from ..config import ENV_PREFIX, from_env, override
from ..errors import NumericalFailure, UsageError
from ..hilbert import LinOperator, op_norm
from ..majorize import majorizes
from ..wce import (
    aluthge,
    aluthge_polar,
    aluthge_weight,
    e_mu,
    spectral_radius,
    wce_norm,
)
from .audit import emit_report, exit_status, run_audit
from .claims import CATALOG
from .instances import PROFILES, Instance, gen_instance, load_instance

EXIT_OK, EXIT_HARD, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


def _pairs(values) -> list:
    return [[float(np.real(z)), float(np.imag(z))] for z in np.asarray(values)]


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n")


def _m_list(text: str) -> list[int]:
    try:
        ms = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not ms or any(m < 1 for m in ms):
        raise argparse.ArgumentTypeError("m values must be positive integers")
    return ms


def _named_operator(inst: Instance, name: str) -> LinOperator:
    T = inst.wce
    if name == "EMu" and "EMu" not in inst.operators:
        return e_mu(T)
    return inst.operator(name)


# -- subcommands -------------------------------------------------------------


def cmd_info(args) -> int:
    inst = load_instance(args.file)
    T = inst.wce
    dec = sra.block_decompose(T)
    P = inst.partition
    _emit(
        {
            "atoms": inst.space.n,
            "blocks": [list(b) for b in P.blocks],
            "digest": inst.digest(),
            "E|u|^2": [float(np.real(x)) for x in P.block_values(T.eu2)],
            "E|w|^2": [float(np.real(x)) for x in P.block_values(T.ew2)],
            "E(uw)": _pairs(P.block_values(T.euw)),
            "norm": wce_norm(T),
            "spectral_radius": spectral_radius(T),
            "dim_H1": dec.H1.dim,
            "dim_H2": dec.H2.dim,
            "divergent_dim": dec.divergent.dim,
            "homogeneous": sra.is_homogeneous(T),
            "operators": sorted(inst.operators),
            "rank_one": sorted(inst.rank_one),
        }
    )
    return EXIT_OK


def cmd_generate(args) -> int:
    inst = gen_instance(args.gen_seed, args.profile, args.atoms, args.blocks)
    text = inst.dumps() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_rm(args) -> int:
    inst = load_instance(args.file)
    T = inst.wce
    fam = sra.WCEFamily(T)
    P = inst.partition
    rows, worst = [], 0.0
    for m in args.m:
        closed = fam.rm(m)
        dist = closed.distance(sra.rm_series(T, m))
        worst = max(worst, dist)
        rows.append(
            {
                "m": m,
                "d": fam.d(m),
                "v": [float(x) for x in P.block_values(inst.space.function(fam.v(m))).real],
                "q": [float(x) for x in P.block_values(inst.space.function(fam.q(m))).real],
                "norm_rm": float(np.sqrt(fam.norm_rm_squared(m))),
                "norm_rm_inverse": float(np.sqrt(fam.norm_rm_inverse_squared(m))),
                "closed_vs_series": dist,
            }
        )
    _emit({"spectral_radius": fam.r, "rows": rows, "agree": worst <= 1e-9})
    return EXIT_OK if worst <= 1e-9 else EXIT_HARD


def cmd_membership(args) -> int:
    inst = load_instance(args.file)
    S = _named_operator(inst, args.op)
    grid = None if args.m is None else sorted(set(args.m))
    if args.source == "T":
        T = inst.wce
        if args.algebra == "bt":
            crit = sra.bt_member_kernel_criterion(T, S)
            verdict = sra.bt_member_definitional(T, S, grid)
        else:
            crit, verdict = sra.qt_member(T, S, grid)
    else:
        if args.source not in inst.rank_one:
            raise UsageError(f"no rank-one pair named {args.source!r}")
        op = inst.rank_one[args.source]
        if args.algebra == "bt":
            crit = sra.rank_one_bt_member(op.x, op.y, S)
            verdict = sra.bt_member_definitional(op, S, grid)
        else:
            crit, verdict = sra.rank_one_qt_member(op, S, grid)
    _emit({"algebra": args.algebra, "source": args.source, "operator": args.op,
           "criterion": crit, **verdict.as_dict()})
    return EXIT_OK


def cmd_aluthge(args) -> int:
    inst = load_instance(args.file)
    T = inst.wce
    closed = aluthge(T)
    dist = closed.distance(aluthge_polar(T.matrix))
    positive = bool(
        np.all(np.abs(T.u.values.imag) == 0) and np.all(T.u.values.real > 0)
        and np.all(np.abs(T.w.values.imag) == 0) and np.all(T.w.values.real > 0)
    )
    _emit(
        {
            "weight": _pairs(aluthge_weight(T).values),
            "distance_to_polar": dist,
            "spectral_radius": spectral_radius(T),
            "norm": op_norm(closed),
            "positive_symbols": positive,
        }
    )
    return EXIT_HARD if positive and dist > 1e-8 else EXIT_OK


def cmd_majorize(args) -> int:
    inst = load_instance(args.file)
    res = majorizes(_named_operator(inst, args.t), _named_operator(inst, args.s))
    _emit(
        {
            "holds": res.holds,
            "constant": res.constant,
            "witness": None if res.witness is None else _pairs(res.witness.values),
        }
    )
    return EXIT_OK


def cmd_audit(args) -> int:
    report = run_audit(args.claims, args.trials, args.audit_seed, args.profile, args.jobs)
    data = emit_report(report, args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
    return exit_status(report)


def cmd_report(args) -> int:
    if args.file in (None, "-"):
        text = sys.stdin.read()
    else:
        with open(args.file) as fh:
            text = fh.read()
    try:
        report = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"report: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(report, dict) or "records" not in report:
        raise UsageError("report: not an audit report")
    sys.stdout.buffer.write(emit_report(report, args.format))
    return EXIT_OK


def cmd_claims(args) -> int:
    for c in CATALOG:
        kind = "hard" if c.hard else "soft"
        sys.stdout.write(f"{c.id:30s} {kind}  {','.join(c.profiles):40s} {c.summary}\n")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g = p.add_argument_group("tolerances")
    g.add_argument("--tol-rank", type=float, default=default, help="relative pivot threshold")
    g.add_argument("--tol-inv", type=float, default=default, help="invariance tolerance")
    g.add_argument("--m-max", type=int, default=default, help="largest m of the default grid")
    g.add_argument("--seed", type=int, default=default, help="power-iteration seed")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wcesra",
        allow_abbrev=False,
        description="WCE operators and spectral radius algebras on finite measure spaces.",
        parents=[_global_flags(False)],
        epilog=f"Environment overrides use the {ENV_PREFIX} prefix "
        f"(e.g. {ENV_PREFIX}TOL_RANK, {ENV_PREFIX}M_MAX).",
    )
    parser.add_argument("--version", action="version", version=f"wcesra {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(True)]

    p = sub.add_parser("info", parents=common, allow_abbrev=False, help="summarize an instance file")
    p.add_argument("file")
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("generate", parents=common, allow_abbrev=False, help="write a random instance")
    p.add_argument("--gen-seed", type=int, default=0)
    p.add_argument("--profile", choices=PROFILES, default="generic")
    p.add_argument("--atoms", type=int)
    p.add_argument("--blocks", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("rm", parents=common, allow_abbrev=False, help="R_m scalars and closed-form vs series")
    p.add_argument("file")
    p.add_argument("--m", type=_m_list, default=[1, 2, 4, 8, 16])
    p.set_defaults(func=cmd_rm)

    p = sub.add_parser("membership", parents=common, allow_abbrev=False, help="B_T / Q_T membership of an operator")
    p.add_argument("file")
    p.add_argument("--op", required=True, help="operator name (file operator, rank-one, T or EMu)")
    p.add_argument("--algebra", choices=("bt", "qt"), default="bt")
    p.add_argument("--source", default="T", help="T (the WCE operator) or a rank-one pair name")
    p.add_argument("--m", type=_m_list, help="m grid (default powers of two up to --m-max)")
    p.set_defaults(func=cmd_membership)

    p = sub.add_parser("aluthge", parents=common, allow_abbrev=False, help="Aluthge transform, closed form vs polar")
    p.add_argument("file")
    p.set_defaults(func=cmd_aluthge)

    p = sub.add_parser("majorize", parents=common, allow_abbrev=False, help="does T majorize S")
    p.add_argument("file")
    p.add_argument("--t", required=True)
    p.add_argument("--s", required=True)
    p.set_defaults(func=cmd_majorize)

    p = sub.add_parser("audit", parents=common, allow_abbrev=False, help="run the claim audit")
    p.add_argument("--claims", default="all", help="'all' or comma-separated claim ids")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--audit-seed", dest="audit_seed", type=int, default=None,
                   help="audit seed (defaults to --seed, else 0)")
    p.add_argument("--profile", choices=PROFILES)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("report", parents=common, allow_abbrev=False, help="re-emit a saved audit report")
    p.add_argument("file", nargs="?")
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("claims", parents=common, allow_abbrev=False, help="list the claim catalog")
    p.set_defaults(func=cmd_claims)
    return parser


def _tolerances(args):
    tol = from_env()
    changes = {}
    if args.tol_rank is not None:
        changes["rank"] = args.tol_rank
    if args.tol_inv is not None:
        changes["inv"] = args.tol_inv
    if args.m_max is not None:
        changes["m_max"] = args.m_max
    if args.seed is not None:
        changes["seed"] = args.seed
    return dataclasses.replace(tol, **changes)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = _tolerances(args)
        if args.command == "audit" and args.audit_seed is None:
            args.audit_seed = tol.seed
        with override(tol):
            return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"wcesra: error: {exc}\n")
        return EXIT_USAGE
    except NumericalFailure as exc:
        sys.stderr.write(f"wcesra: numerical failure: {exc} (best {exc.best})\n")
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"wcesra: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
