"""Seeded claim audits and their reports.

Each (claim, trial) pair gets its own instance seed derived from
``(seed, crc32(claim id), trial)``, so a record can be replayed on its own
with :func:`replay`.  Reports carry no timestamps or host data: the same
claims, trials, seed and tolerances give byte-identical JSON.
"""

from __future__ import annotations

import json
import math
import zlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import __version__
from ..config import Tolerances, override, tolerances
from ..errors import NumericalFailure, UsageError
from .claims import BY_ID, CATALOG, COUNTEREXAMPLE, PASS, SKIPPED, Claim
from .instances import PROFILES, gen_instance

SCHEMA = "wcesra-audit-report/1"
VERDICTS = (PASS, COUNTEREXAMPLE, SKIPPED)


def resolve_claims(spec) -> list[str]:
    """Claim ids from ``"all"``, a comma-separated string or a list."""
    if spec is None or spec == "all" or spec == ["all"]:
        return [c.id for c in CATALOG]
    ids = spec.split(",") if isinstance(spec, str) else list(spec)
    ids = [i.strip() for i in ids if i.strip()]
    unknown = [i for i in ids if i not in BY_ID]
    if unknown:
        raise UsageError(f"unknown claim(s): {', '.join(unknown)}")
    return ids


def trial_seed(seed: int, claim_id: str, trial: int) -> int:
    ss = np.random.SeedSequence([seed, zlib.crc32(claim_id.encode()), trial])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _jsonable(x):
    """Plain JSON values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if x is None or isinstance(x, str):
        return x
    return repr(x)


def evaluate_trial(claim: Claim, seed: int, profile: str) -> dict:
    """Run one claim on the instance generated from ``seed``."""
    record = {
        "claim": claim.id,
        "hard": claim.hard,
        "profile": profile,
        "seed": seed,
    }
    if profile not in claim.profiles:
        record.update(
            digest=None,
            verdict=SKIPPED,
            evidence={"reason": f"claim does not apply to profile {profile}"},
        )
        return record
    inst = gen_instance(seed, profile)
    record["digest"] = inst.digest()
    rng = np.random.default_rng([seed, 1])
    try:
        out = claim.evaluate(inst, rng)
        verdict, evidence = out.verdict, out.evidence
    except NumericalFailure as exc:
        verdict, evidence = SKIPPED, {"error": str(exc), "best": exc.best}
    record["verdict"] = verdict
    record["evidence"] = _jsonable(evidence)
    if verdict == COUNTEREXAMPLE:
        record["instance"] = inst.to_json()
    return record


def _run_one(args):
    claim_id, trial, seed, profile, tol = args
    with override(tol):
        rec = evaluate_trial(BY_ID[claim_id], seed, profile)
    rec["trial"] = trial
    return rec


def run_audit(claims="all", trials: int = 10, seed: int = 0, profile: str | None = None,
              jobs: int = 1) -> dict:
    """Evaluate every claim ``trials`` times; records ordered by (claim, trial)."""
    ids = resolve_claims(claims)
    if trials < 0:
        raise UsageError("trials must be nonnegative")
    if profile is not None and profile not in PROFILES:
        raise UsageError(f"unknown profile {profile!r}; choose from {', '.join(PROFILES)}")
    tol = tolerances()
    tasks = []
    for cid in sorted(ids):
        claim = BY_ID[cid]
        prof = profile or claim.profile
        for t in range(trials):
            tasks.append((cid, t, trial_seed(seed, cid, t), prof, tol))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one, tasks, chunksize=8))
    else:
        records = [_run_one(t) for t in tasks]
    records.sort(key=lambda r: (r["claim"], r["trial"]))
    return {
        "schema": SCHEMA,
        "tool": {"name": "wcesra", "version": __version__},
        "tolerances": tol.as_dict(),
        "parameters": {"claims": sorted(ids), "trials": trials, "seed": seed, "profile": profile},
        "summary": summarize(records),
        "records": records,
    }


def summarize(records) -> dict:
    per_claim: dict = {}
    totals = {v: 0 for v in VERDICTS}
    hard_cx = 0
    errors = 0
    for r in records:
        totals[r["verdict"]] += 1
        entry = per_claim.setdefault(r["claim"], {"hard": r["hard"], **{v: 0 for v in VERDICTS}})
        entry[r["verdict"]] += 1
        if r["hard"] and r["verdict"] == COUNTEREXAMPLE:
            hard_cx += 1
        if "error" in r.get("evidence", {}):
            errors += 1
    return {
        "records": len(records),
        **totals,
        "hard_counterexamples": hard_cx,
        "numerical_failures": errors,
        "per_claim": per_claim,
    }


def exit_status(report: dict) -> int:
    """0 clean, 1 hard counterexample, 3 numerical failure.  Soft claims never fail a run."""
    s = report["summary"]
    if s["hard_counterexamples"]:
        return 1
    if s["numerical_failures"]:
        return 3
    return 0


def replay(record: dict) -> dict:
    """Re-run a record from its embedded seed and profile (tolerances of the caller)."""
    rec = evaluate_trial(BY_ID[record["claim"]], record["seed"], record["profile"])
    rec["trial"] = record.get("trial")
    return rec


def empty_report() -> dict:
    return {
        "schema": SCHEMA,
        "tool": {"name": "wcesra", "version": __version__},
        "tolerances": Tolerances().as_dict(),
        "parameters": {"claims": [], "trials": 0, "seed": 0, "profile": None},
        "summary": summarize([]),
        "records": [],
    }


def _dumps(x) -> str:
    return json.dumps(x, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _table(report: dict) -> str:
    header = ("claim", "hard", "trial", "profile", "seed", "digest", "verdict", "evidence")
    rows = [
        (
            r["claim"],
            "hard" if r["hard"] else "soft",
            str(r.get("trial")),
            r["profile"],
            str(r["seed"]),
            r["digest"] or "-",
            r["verdict"],
            _dumps({k: v for k, v in r.items() if k in ("evidence", "instance")}),
        )
        for r in report["records"]
    ]
    widths = [max([len(h)] + [len(row[i]) for row in rows]) for i, h in enumerate(header[:-1])]
    widths.append(0)

    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()

    out = [
        f"{report['schema']}  {report['tool']['name']} {report['tool']['version']}",
        "parameters: " + _dumps(report["parameters"]),
        "tolerances: " + _dumps(report["tolerances"]),
        "",
        line(header),
        line(["-" * w for w in widths[:-1]] + ["-" * len("evidence")]),
    ]
    out += [line(r) for r in rows]
    s = report["summary"]
    out += [
        "",
        f"summary: {s['records']} records, {s[PASS]} {PASS}, {s[COUNTEREXAMPLE]} {COUNTEREXAMPLE}, "
        f"{s[SKIPPED]} {SKIPPED}, {s['hard_counterexamples']} hard counterexamples, "
        f"{s['numerical_failures']} numerical failures",
    ]
    cw = max([len("claim")] + [len(c) for c in s["per_claim"]])
    out.append(f"{'claim'.ljust(cw)}  kind  {PASS:>5}  {COUNTEREXAMPLE:>14}  {SKIPPED:>7}")
    for cid, e in sorted(s["per_claim"].items()):
        kind = "hard" if e["hard"] else "soft"
        out.append(
            f"{cid.ljust(cw)}  {kind}  {e[PASS]:>5}  {e[COUNTEREXAMPLE]:>14}  {e[SKIPPED]:>7}"
        )
    return "\n".join(out) + "\n"


def emit_report(report: dict, fmt: str = "json") -> bytes:
    """Serialize a report as canonical JSON or an aligned plain-text table."""
    if fmt == "json":
        return (json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n").encode()
    if fmt == "table":
        return _table(report).encode()
    raise UsageError(f"unknown report format {fmt!r}; choose json or table")
