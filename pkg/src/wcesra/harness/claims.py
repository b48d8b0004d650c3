"""The claim catalog.

Each claim pairs a closed-form statement with an independent check and runs
on a freshly generated instance.  ``hard`` claims must never produce a
counterexample; ``soft`` claims are audited and their counterexamples are
reported, not enforced.  Registering a new claim only needs a :class:`Claim`
entry in :data:`CATALOG`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import sra
from ..condexp import Partition, cond_expect, is_measurable, tower_check
from ..hilbert import (
    LinOperator,
    MFunction,
    adjoint,
    identity,
    kernel,
    multiplication,
    norm,
    op_norm,
    project,
    rank_one,
)
from ..majorize import majorizes, qt_majorization_suite, rank_one_majorization
from ..sra import RankOne, Verdict
from ..wce import (
    WCEOp,
    aluthge,
    aluthge_polar,
    aluthge_wce,
    e_mu,
    gelfand_check,
    spectral_radius,
    wce_adjoint,
    wce_norm,
    wce_power,
)
from . import construct
from .instances import Instance

PASS = "PASS"
COUNTEREXAMPLE = "COUNTEREXAMPLE"
SKIPPED = "SKIPPED"

SMALL_GRID = (1, 2, 4, 8, 16)


@dataclass(frozen=True)
class Outcome:
    verdict: str
    evidence: dict = field(default_factory=dict)


def _outcome(ok: bool, **evidence) -> Outcome:
    return Outcome(PASS if ok else COUNTEREXAMPLE, evidence)


@dataclass(frozen=True)
class Claim:
    id: str
    profiles: tuple[str, ...]
    hard: bool
    evaluate: Callable[[Instance, np.random.Generator], Outcome]
    summary: str

    @property
    def profile(self) -> str:
        return self.profiles[0]


def _maxabs(A: LinOperator, B: LinOperator) -> float:
    return float(np.max(np.abs(A.matrix - B.matrix)))


def _stdmax(A: LinOperator) -> float:
    return float(np.max(np.abs(A.std), initial=0.0))


# -- conditional expectation ------------------------------------------------


def _condexp_axioms(inst: Instance, rng) -> Outcome:
    P = inst.partition
    E = cond_expect(P)
    one = inst.space.constant(1.0)
    f = construct.random_function(rng, inst.space)
    ef = E(f)
    mu = inst.space.mu
    integral = max(
        abs(np.sum(mu[list(b)] * (ef.values - f.values)[list(b)])) for b in P.blocks
    )
    checks = {
        "idempotent": _maxabs(E @ E, E),
        "selfadjoint": _maxabs(adjoint(E), E),
        "unit": float(np.max(np.abs(E(one).values - 1.0))),
        "integral": float(integral),
    }
    return _outcome(max(checks.values()) <= 1e-12 and is_measurable(P, ef), **checks)


def _random_refinement(rng, P: Partition) -> Partition:
    blocks = []
    for b in P.blocks:
        b = list(b)
        rng.shuffle(b)
        cut = int(rng.integers(1, len(b) + 1))
        blocks.append(tuple(b[:cut]))
        if cut < len(b):
            blocks.append(tuple(b[cut:]))
    return Partition(P.space, tuple(blocks))


def _tower(inst: Instance, rng) -> Outcome:
    A = inst.partition
    B = _random_refinement(rng, A)
    u = construct.random_measurable(rng, inst.wce)
    return _outcome(tower_check(A, B, u), blocks_A=len(A.blocks), blocks_B=len(B.blocks))


# -- WCE closed forms -------------------------------------------------------


def _norm_formula(inst: Instance, rng) -> Outcome:
    T = inst.wce
    closed = wce_norm(T)
    iterated = op_norm(T.matrix)
    rel = abs(closed - iterated) / max(iterated, np.finfo(float).tiny)
    return _outcome(rel <= 1e-8 or closed == iterated, closed=closed, iterated=iterated, rel=rel)


def _power_formula(inst: Instance, rng) -> Outcome:
    T = inst.wce
    t = wce_norm(T)
    worst = 0.0
    for adj in (False, True):
        base = adjoint(T.matrix) if adj else T.matrix
        prod = base
        for n in range(1, 9):
            if n > 1:
                prod = prod @ base
            diff = _stdmax(wce_power(T, n, adjoint=adj) - prod)
            worst = max(worst, diff / max(t**n, np.finfo(float).tiny))
    return _outcome(worst <= 1e-10, worst_relative=worst)


def _spectral_radius(inst: Instance, rng) -> Outcome:
    T = inst.wce
    r = spectral_radius(T)
    if r <= 1e-6:
        return Outcome(SKIPPED, {"radius": r, "reason": "radius below 1e-6"})
    check = gelfand_check(T)
    eig = float(np.max(np.abs(np.linalg.eigvals(T.matrix.matrix))))
    return _outcome(check.pop("ok"), eigenvalue_radius=eig, **check)


def _nilpotent_square(inst: Instance, rng) -> Outcome:
    T = inst.wce
    closed = float(np.max(np.abs(wce_power(T, 2).matrix)))
    product = float(np.max(np.abs((T.matrix @ T.matrix).matrix)))
    scale = max(_stdmax(T.matrix) ** 2, np.finfo(float).tiny)
    return _outcome(
        closed < 1e-14 and product <= 1e-12 * scale,
        closed_max=closed,
        product_max=product,
        radius=spectral_radius(T),
    )


def _adjoint_formula(inst: Instance, rng) -> Outcome:
    T = inst.wce
    diff = _maxabs(adjoint(T.matrix), wce_adjoint(T).matrix)
    return _outcome(diff < 1e-12, max_entry_difference=diff)


# -- R_m family -----------------------------------------------------------------


def _rm_closed_vs_series(inst: Instance, rng) -> Outcome:
    T = inst.wce
    diffs = {str(m): sra.rm_closed(T, m).distance(sra.rm_series(T, m)) for m in SMALL_GRID}
    return _outcome(max(diffs.values()) <= 1e-9, distance=diffs)


def _rm_inverse(inst: Instance, rng) -> Outcome:
    T = inst.wce
    fam = sra.WCEFamily(T)
    dec = sra.block_decompose(T)
    I = identity(T.space)
    worst = {"product": 0.0, "inverse_norm_excess": 0.0, "generic_inverse": 0.0, "h2_fixed": 0.0}
    for m in SMALL_GRID:
        R, Ri = fam.rm(m), fam.rm_inverse(m)
        oracle = LinOperator(T.space, np.linalg.inv(R.matrix))
        worst["product"] = max(worst["product"], op_norm(R @ Ri - I))
        worst["inverse_norm_excess"] = max(worst["inverse_norm_excess"], op_norm(Ri) - 1.0)
        worst["generic_inverse"] = max(worst["generic_inverse"], Ri.distance(oracle))
        for h in dec.H2.vectors():
            worst["h2_fixed"] = max(worst["h2_fixed"], norm(R(h) - h))
    ok = (
        worst["product"] < 1e-9
        and worst["inverse_norm_excess"] <= 1e-9
        and worst["generic_inverse"] <= 1e-9
        and worst["h2_fixed"] < 1e-9
    )
    return _outcome(ok, **worst)


def _rm_scalars(inst: Instance, rng) -> Outcome:
    T = inst.wce
    fam = sra.WCEFamily(T)
    ms = range(1, 65)
    d = [fam.d(m) for m in ms]
    q = [fam.q(m) for m in ms]
    monotone_d = all(b > a for a, b in zip(d, d[1:]))
    below_one = all(x * fam.r < 1.0 for x in d)
    v_nonneg = all(np.all(fam.v(m) >= 0) for m in ms)
    q_monotone = all(np.all(b >= a - 1e-12) for a, b in zip(q, q[1:]))
    q_at_least_one = all(np.all(x >= 1.0) for x in q)
    norm_gap = max(
        abs(op_norm(fam.rm(m)) ** 2 - fam.norm_rm_squared(m)) / fam.norm_rm_squared(m)
        for m in SMALL_GRID
    )
    ok = monotone_d and below_one and v_nonneg and q_monotone and q_at_least_one and norm_gap <= 1e-8
    return _outcome(
        ok,
        d_increasing=monotone_d,
        d_r_below_one=below_one,
        v_nonnegative=v_nonneg,
        q_monotone=q_monotone,
        q_at_least_one=q_at_least_one,
        norm_identity_relative=norm_gap,
    )


def _rm_inverse_printed(inst: Instance, rng) -> Outcome:
    T = inst.wce
    fam = sra.WCEFamily(T)
    mismatch = {}
    for m in SMALL_GRID:
        oracle = LinOperator(T.space, np.linalg.inv(fam.rm_squared(m).matrix))
        mismatch[str(m)] = fam.rm_inverse_squared_printed(m).distance(oracle)
    corrected = max(
        fam.rm_inverse_squared(m).distance(
            LinOperator(T.space, np.linalg.inv(fam.rm_squared(m).matrix))
        )
        for m in SMALL_GRID
    )
    return _outcome(
        max(mismatch.values()) <= 1e-9,
        printed_distance=mismatch,
        corrected_distance=corrected,
    )


# -- membership ---------------------------------------------------------------


def _route(crit: bool, verdict: Verdict) -> str:
    if verdict is Verdict.INCONCLUSIVE:
        return "inconclusive"
    agree = crit == (verdict is Verdict.MEMBER)
    return "agree" if agree else "disagree"


def _membership_table(rows) -> dict:
    routes = [r["route"] for r in rows]
    return {
        "operators": rows,
        "disagreements": routes.count("disagree"),
        "inconclusive": routes.count("inconclusive"),
    }


def _bt_rows(T: WCEOp, ops, criterion) -> list[dict]:
    rows = []
    for kind, S in ops:
        v = sra.bt_member_definitional(T, S)
        crit = criterion(T, S)
        rows.append(
            {
                "kind": kind,
                "criterion": crit,
                "definitional": v.verdict.value,
                "g_last": v.evidence[-1][1],
                "route": _route(crit, v.verdict),
            }
        )
    return rows


def _bt_kernel_homogeneous(inst: Instance, rng) -> Outcome:
    T = inst.wce
    ops = [("member", S) for S in construct.bt_members(rng, T, 5)]
    ops += [("nonmember", S) for S in construct.bt_nonmembers(rng, T, 5)]
    table = _membership_table(_bt_rows(T, ops, sra.bt_member_kernel_criterion))
    return _outcome(table["disagreements"] == 0 and table["inconclusive"] == 0, **table)


def _audit_outcome(table: dict) -> Outcome:
    if table["disagreements"]:
        return Outcome(COUNTEREXAMPLE, table)
    if table["inconclusive"] == len(table["operators"]):
        return Outcome(SKIPPED, table)
    return Outcome(PASS, table)


def _bt_kernel_general(inst: Instance, rng) -> Outcome:
    T = inst.wce
    ops = [("member", S) for S in construct.bt_members(rng, T, 3)]
    ops += [("nonmember", S) for S in construct.bt_nonmembers(rng, T, 3)]
    return _audit_outcome(_membership_table(_bt_rows(T, ops, sra.bt_member_kernel_criterion)))


def _peak_members(rng, T: WCEOp, count: int):
    dec = sra.block_decompose(T)
    Pd, Pb = project(dec.divergent), project(dec.bounded)
    out = []
    for _ in range(count):
        M = construct.random_matrix(rng, T.space)
        out.append(M - Pd @ M @ Pb)
    return out


def _bt_peak_general(inst: Instance, rng) -> Outcome:
    T = inst.wce
    ops = [("member", S) for S in _peak_members(rng, T, 3)]
    ops += [("kernel-member", S) for S in construct.bt_members(rng, T, 2)]
    ops += [("nonmember", S) for S in construct.bt_nonmembers(rng, T, 2)]
    return _audit_outcome(_membership_table(_bt_rows(T, ops, sra.bt_member_peak_criterion)))


def _qt_rows(T: WCEOp, ops) -> list[dict]:
    rows = []
    for kind, S in ops:
        crit, v = sra.qt_member(T, S)
        rate = Verdict(v.criterion_flags["rate_verdict"])
        rows.append(
            {
                "kind": kind,
                "criterion": crit,
                "compression_zero": v.criterion_flags["compression_zero"],
                "classifier": v.verdict.value,
                "rate_verdict": rate.value,
                "g_last": v.evidence[-1][1],
                "route": _route(crit, rate),
            }
        )
    return rows


def _qt_homogeneous(inst: Instance, rng) -> Outcome:
    T = inst.wce
    ops = [("member", S) for S in construct.qt_members(rng, T, 5)]
    ops += [("nonmember", S) for S in construct.qt_nonmembers(rng, T, 5)]
    table = _membership_table(_qt_rows(T, ops))
    table["classifier_inconclusive"] = sum(
        r["classifier"] == Verdict.INCONCLUSIVE.value for r in table["operators"]
    )
    return _outcome(table["disagreements"] == 0 and table["inconclusive"] == 0, **table)


def _qt_kernel_only(inst: Instance, rng) -> Outcome:
    T = inst.wce
    ops = [("kernel-only", S) for S in construct.qt_kernel_only(rng, T, 3)]
    return _audit_outcome(_membership_table(_qt_rows(T, ops)))


def _commutation(inst: Instance, rng) -> Outcome:
    T = inst.wce
    fam = sra.WCEFamily(T)
    S = construct.commuting_wce(rng, T)
    s_norm = op_norm(S)
    comm, drift = 0.0, 0.0
    for m in sra.tolerances().m_grid():
        R = fam.rm(m)
        comm = max(comm, op_norm(R @ S - S @ R))
        g = op_norm(R @ S @ fam.rm_inverse(m))
        drift = max(drift, abs(g - s_norm) / max(s_norm, np.finfo(float).tiny))
    a = construct.random_measurable(rng, T)
    ma_member = sra.bt_member_kernel_criterion(T, multiplication(a))
    ma_peak = sra.bt_member_peak_criterion(T, multiplication(a))
    return _outcome(
        comm < 1e-9 and drift <= 1e-8 and ma_member and ma_peak,
        commutator=comm,
        g_relative_drift=drift,
        multiplication_member=ma_member,
        multiplication_peak=ma_peak,
    )


# -- Aluthge ------------------------------------------------------------------


def _aluthge_core(T: WCEOp) -> dict:
    closed = aluthge(T)
    oracle = aluthge_polar(T.matrix)
    Tt = aluthge_wce(T)
    return {
        "distance": closed.distance(oracle),
        "euw_difference": float(np.max(np.abs(Tt.euw.values - T.euw.values))),
        "radius": spectral_radius(T),
        "radius_transform": spectral_radius(Tt),
    }


def _aluthge_ok(ev: dict) -> bool:
    return (
        ev["distance"] <= 1e-8
        and ev["euw_difference"] < 1e-12
        and abs(ev["radius"] - ev["radius_transform"]) <= 1e-12 * max(ev["radius"], 1.0)
    )


def _aluthge_positive(inst: Instance, rng) -> Outcome:
    ev = _aluthge_core(inst.wce)
    return _outcome(_aluthge_ok(ev), **ev)


def _aluthge_general(inst: Instance, rng) -> Outcome:
    ev = _aluthge_core(inst.wce)
    return _outcome(_aluthge_ok(ev), **ev)


def _aluthge_in_bt(inst: Instance, rng) -> Outcome:
    T = inst.wce
    S = aluthge(T)
    v = sra.bt_member_definitional(T, S)
    ok = v.criterion_flags["kernel"] and v.criterion_flags["peak"] and v.verdict is Verdict.MEMBER
    return _outcome(ok, definitional=v.verdict.value, **v.criterion_flags)


def _same_algebra(T1: WCEOp, T2: WCEOp, ops) -> dict:
    rows = []
    for kind, S in ops:
        a = sra.bt_member_definitional(T1, S).verdict
        b = sra.bt_member_definitional(T2, S).verdict
        if Verdict.INCONCLUSIVE in (a, b):
            route = "inconclusive"
        else:
            route = "agree" if a == b else "disagree"
        rows.append({"kind": kind, "first": a.value, "second": b.value, "route": route})
    return _membership_table(rows)


def _aluthge_algebra(inst: Instance, rng) -> Outcome:
    T = inst.wce
    Tt = aluthge_wce(T)
    ops = [("member", S) for S in construct.bt_members(rng, T, 2)]
    ops += [("peak-member", S) for S in _peak_members(rng, T, 2)]
    ops += [("random", S) for S in construct.bt_nonmembers(rng, T, 2)]
    return _audit_outcome(_same_algebra(T, Tt, ops))


def _equal_algebras(inst: Instance, rng) -> Outcome:
    T = inst.wce
    T2 = T.with_weight(construct.random_function(rng, T.space))
    ops = [("member", S) for S in construct.bt_members(rng, T, 2)]
    ops += [("peak-member", S) for S in _peak_members(rng, T, 2)]
    ops += [("peak-member-other", S) for S in _peak_members(rng, T2, 2)]
    ops += [("random", S) for S in construct.bt_nonmembers(rng, T, 1)]
    return _audit_outcome(_same_algebra(T, T2, ops))


# -- whole-algebra statements --------------------------------------------------


def _bt_equals_full(inst: Instance, rng) -> Outcome:
    """Compare the structural answer, the printed sup condition and a witness."""
    T = inst.wce
    structural, ev = sra.bt_equals_full(T)
    dec = sra.block_decompose(T)
    n = T.space.n
    truth = dec.divergent.dim in (0, n)
    witness = None
    if not truth:
        d = dec.divergent.vectors()[0]
        b = dec.bounded.vectors()[0]
        v = sra.bt_member_definitional(T, rank_one(d, b))
        witness = v.verdict.value
        if v.verdict is not Verdict.NONMEMBER:
            return Outcome(SKIPPED, {"reason": "witness not conclusive", "witness": witness})
    printed = ev["printed_sup_verdict"]
    evidence = {
        "dim_H2": ev["dim_H2"],
        "divergent_dim": dec.divergent.dim,
        "structural": structural,
        "full_algebra": truth,
        "witness": witness,
        "printed_sup_verdict": printed,
        "condition_verdict": ev["condition_verdict"],
    }
    disagreements = []
    if structural != truth:
        disagreements.append("structural")
    if printed != Verdict.INCONCLUSIVE.value and (printed == Verdict.MEMBER.value) != truth:
        disagreements.append("printed_sup")
    evidence["disagreements"] = disagreements
    return _outcome(not disagreements, **evidence)


def _isometry_variant(rng, inst: Instance) -> WCEOp:
    """``M_{uw}`` on singletons with ``|uw|`` constant: a multiple of an isometry."""
    space = inst.space
    u = construct.random_function(rng, space)
    c = rng.uniform(0.5, 2.0)
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi, space.n))
    w = MFunction(space, c * phase / u.values)
    return WCEOp(Partition.discrete(space), u, w)


def _isometry_multiple(inst: Instance, rng) -> Outcome:
    rows = {}
    for name, T in (("instance", inst.wce), ("isometry_variant", _isometry_variant(rng, inst))):
        direct, ev = sra.isometry_multiple_check(T)
        printed = ev["printed_sup_verdict"]
        if printed == Verdict.INCONCLUSIVE.value:
            agree = None
        else:
            agree = direct == (printed == Verdict.MEMBER.value)
        rows[name] = {"direct": direct, "c": ev["c"], "printed_sup_verdict": printed, "agree": agree}
    ok = all(r["agree"] is not False for r in rows.values())
    return _outcome(ok, **rows)


def _quasinilpotent(inst: Instance, rng) -> Outcome:
    T = inst.wce
    witness = sra.invariant_subspace_witness(T)
    if witness is None:
        return Outcome(SKIPPED, {"reason": "ker(E M_u) is trivial or everything"})
    invariant = witness.is_invariant(T.matrix)
    crit, v = sra.qt_member(T, T.matrix)
    rate = v.criterion_flags["rate_verdict"]
    a = construct.random_measurable(rng, T)
    ma = sra.bt_member_kernel_criterion(T, multiplication(a))
    ok = invariant and crit and rate == Verdict.MEMBER.value and ma
    return _outcome(
        ok,
        witness_dim=witness.dim,
        invariant=invariant,
        qt_criterion=crit,
        rate_verdict=rate,
        classifier=v.verdict.value,
        g_last=v.evidence[-1][1],
        multiplication_member=ma,
    )


# -- rank-one ---------------------------------------------------------------------


def _rank_one_rm(inst: Instance, rng) -> Outcome:
    op = inst.rank_one["R"]
    fam = sra.RankOneFamily(op)
    dist, eig, lams = {}, 0.0, []
    for m in SMALL_GRID:
        closed = sra.rank_one_rm(op.x, op.y, m)
        dist[str(m)] = closed.distance(sra.rm_series(op, m))
        lam = fam.lam(m)
        lams.append(lam)
        eig = max(eig, norm(fam.rm_squared(m)(op.y) - op.y * lam**2) / norm(op.y))
    increasing = all(b > a for a, b in zip(lams, lams[1:]))
    ok = max(dist.values()) <= 1e-9 and eig <= 1e-9 * lams[-1] ** 2 and increasing
    return _outcome(ok, distance=dist, eigen_residual=eig, lambda_increasing=increasing)


def _rank_one_qt(inst: Instance, rng) -> Outcome:
    op = inst.rank_one["R"]
    P = construct.rank_one_projector(op.y)
    Q = identity(op.space) - P
    ops = [("member", S) for S in construct.rank_one_q_members(rng, op, 5)]
    ops += [("nonmember", construct.random_matrix(rng, op.space)) for _ in range(3)]
    ops += [("nonmember", Q @ construct.random_matrix(rng, op.space) @ Q)]
    ops += [("nonmember", P)]
    rows = []
    for kind, S in ops:
        crit, v = sra.rank_one_qt_member(op, S)
        rate = Verdict(v.criterion_flags["rate_verdict"])
        route = _route(crit, rate)
        if crit and not v.criterion_flags["decay_bound"]:
            route = "disagree"
        rows.append(
            {
                "kind": kind,
                "criterion": crit,
                "classifier": v.verdict.value,
                "rate_verdict": rate.value,
                "decay_bound": v.criterion_flags["decay_bound"],
                "g_last": v.evidence[-1][1],
                "route": route,
            }
        )
    table = _membership_table(rows)
    return _outcome(table["disagreements"] == 0 and table["inconclusive"] == 0, **table)


def _unit(rng, space) -> MFunction:
    f = construct.random_function(rng, space)
    return f * (1.0 / norm(f))


def _rank_one_bt_invariance(inst: Instance, rng) -> Outcome:
    op = inst.rank_one["R"]
    w, x = op.y, op.x
    y = _unit(rng, inst.space)
    anchor = RankOne(x, w)
    batch = construct.rank_one_b_members(rng, anchor, 25)
    batch += [construct.random_matrix(rng, inst.space) for _ in range(25)]
    same = sra.rank_one_bt_invariance(w, x, y, batch)
    accepted = sum(sra.rank_one_bt_member(x, w, S) for S in batch)
    checked = []
    for S in (batch[0], batch[-1]):
        for src in (anchor, RankOne(y, w)):
            v = sra.bt_member_definitional(src, S)
            checked.append(_route(v.criterion_flags["rank_one"], v.verdict))
    ok = same and "disagree" not in checked and "inconclusive" not in checked
    return _outcome(ok, same_member_sets=same, accepted=accepted, definitional_routes=checked)


def _rank_one_in_bt_wce(inst: Instance, rng) -> Outcome:
    T = inst.wce
    dec = sra.block_decompose(T)
    pools = {"H1": dec.H1, "H2": dec.H2}

    def pick(name):
        V = pools[name]
        if V.dim == 0:
            return None
        c = rng.standard_normal(V.dim) + 1j * rng.standard_normal(V.dim)
        return MFunction(T.space, V.basis @ c)

    rows = []
    for fk, gk in (("H2", "H2"), ("H1", "H2"), ("H1", "H1"), ("any", "any")):
        if fk == "any":
            f = construct.random_function(rng, T.space)
            g = construct.random_function(rng, T.space)
        else:
            f, g = pick(fk), pick(gk)
            if f is None or g is None:
                continue
        member, v = sra.rank_one_in_bt_wce(T, f, g)
        d = sra.bt_member_definitional(T, rank_one(f, g))
        if Verdict.INCONCLUSIVE in (v.verdict, d.verdict):
            route = "inconclusive"
        else:
            route = "agree" if v.verdict == d.verdict else "disagree"
        mismatch = v.criterion_flags["inverse_norm_mismatch"]
        if mismatch > 1e-9:
            route = "disagree"
        rows.append(
            {
                "f": fk,
                "g": gk,
                "criterion": v.verdict.value,
                "definitional": d.verdict.value,
                "inverse_norm_mismatch": mismatch,
                "route": route,
            }
        )
    table = _membership_table(rows)
    return _outcome(table["disagreements"] == 0, **table)


# -- majorization -------------------------------------------------------------


def _brute_kernel_violation(T: LinOperator, S: LinOperator, rng) -> bool:
    """True if some kernel direction of ``T`` is moved by ``S``."""
    K = kernel(T)
    if K.dim == 0:
        return False
    coeffs = rng.standard_normal((K.dim, 20)) + 1j * rng.standard_normal((K.dim, 20))
    dirs = np.concatenate([np.eye(K.dim), coeffs], axis=1)
    vecs = K.std @ dirs
    vecs /= np.linalg.norm(vecs, axis=0)
    moved = np.linalg.norm(S.std @ vecs, axis=0)
    return bool(np.max(moved) > 1e-8 * max(op_norm(S), np.finfo(float).tiny))


def _majorize_kernel(inst: Instance, rng) -> Outcome:
    space = inst.space
    n = space.n
    rows = []
    for i in range(4):
        k = int(rng.integers(1, n + 1))
        T = LinOperator(
            space,
            construct.random_matrix(rng, space).matrix[:, :k]
            @ construct.random_matrix(rng, space).matrix[:k, :],
        )
        S = construct.random_matrix(rng, space)
        if i % 2 == 0:
            S = S @ T
        res = majorizes(T, S)
        violated = _brute_kernel_violation(T, S, rng)
        agree = res.holds == (not violated)
        if res.holds and res.constant:
            xs = [construct.random_function(rng, space) for _ in range(100)]
            worst = max(
                norm(S(x)) / (res.constant * max(norm(T(x)), np.finfo(float).tiny)) for x in xs
            )
            agree = agree and worst <= 1.0 + 1e-8
        rows.append({"rank": k, "holds": res.holds, "brute_force_violation": violated, "agree": agree})
    return _outcome(all(r["agree"] for r in rows), pairs=rows)


def _qt_majorization_wce(inst: Instance, rng) -> Outcome:
    T = inst.wce
    ops = construct.qt_kernel_only(rng, T, 2) + construct.qt_members(rng, T, 2)
    results = [qt_majorization_suite(T, S) for S in ops]
    return _outcome(all(results), implications=results)


def _qt_majorization_rank_one(inst: Instance, rng) -> Outcome:
    op = inst.rank_one["R"]
    ops = construct.rank_one_q_members(rng, op, 3)
    results = [rank_one_majorization(op.x, op.y, S) for S in ops]
    crits = [sra.rank_one_qt(op.x, op.y, S) for S in ops]
    return _outcome(all(results) and all(crits), implications=results, in_q=crits)


CATALOG: tuple[Claim, ...] = (
    Claim("condexp-axioms", ("generic", "homogeneous", "nilpotent", "nonneg", "rank-one"), True,
          _condexp_axioms, "E is an idempotent self-adjoint unital block average"),
    Claim("tower", ("generic", "nonneg", "nilpotent", "homogeneous"), True, _tower,
          "E^A M_u E^B = E^B E^A M_u for nested algebras and A-measurable u"),
    Claim("norm-formula", ("generic", "homogeneous", "nilpotent", "nonneg"), True,
          _norm_formula, "||T|| = ||(E|w|^2 E|u|^2)^(1/2)||_inf"),
    Claim("power-formula", ("generic", "homogeneous", "nilpotent", "nonneg"), True,
          _power_formula, "T^n and T*^n closed forms"),
    Claim("spectral-radius", ("generic", "homogeneous", "nonneg"), True, _spectral_radius,
          "r(T) = ||E(uw)||_inf against the Gelfand estimate"),
    Claim("nilpotent-square", ("nilpotent",), True, _nilpotent_square,
          "E(uw) = 0 forces T^2 = 0"),
    Claim("adjoint-formula", ("generic", "homogeneous", "nilpotent", "nonneg"), True,
          _adjoint_formula, "(M_w E M_u)* = M_conj(u) E M_conj(w)"),
    Claim("rm-closed-vs-series", ("generic", "homogeneous", "nilpotent", "nonneg"), True,
          _rm_closed_vs_series, "closed-form R_m equals the series"),
    Claim("rm-inverse", ("generic", "homogeneous", "nilpotent", "nonneg"), True, _rm_inverse,
          "closed-form R_m^-1 inverts R_m, has norm <= 1 and fixes ker(E M_u)"),
    Claim("rm-scalars", ("generic", "homogeneous", "nilpotent", "nonneg"), True, _rm_scalars,
          "d_m, v_m, q_m invariants and ||R_m||^2 = 1 + ||E|u|^2 v_m||_inf"),
    Claim("rm-inverse-printed-denominator", ("generic", "homogeneous", "nonneg"), False,
          _rm_inverse_printed, "printed R_m^-2 coefficient v_m/(v_m E|u|^2 - 1)"),
    Claim("bt-kernel-criterion", ("homogeneous",), True, _bt_kernel_homogeneous,
          "S in B_T iff ker(E M_u) is S-invariant (homogeneous instances)"),
    Claim("bt-kernel-general", ("generic", "nonneg", "nilpotent"), False, _bt_kernel_general,
          "S in B_T iff ker(E M_u) is S-invariant (any instance)"),
    Claim("bt-peak-criterion", ("generic", "nonneg", "nilpotent", "homogeneous"), False,
          _bt_peak_general, "S in B_T iff the non-divergent part is S-invariant"),
    Claim("qt-criterion", ("homogeneous",), True, _qt_homogeneous,
          "S in Q_T iff S = P2 S P1 (homogeneous instances)"),
    Claim("qt-kernel-only-criterion", ("homogeneous", "generic"), False, _qt_kernel_only,
          "ker(E M_u) invariant and inside ker S suffices for Q_T"),
    Claim("commutation", ("generic", "homogeneous", "nilpotent", "nonneg"), True, _commutation,
          "M_{a conj(u)} E M_u commutes with R_m; M_a lies in B_T"),
    Claim("aluthge-closed-vs-polar", ("nonneg",), True, _aluthge_positive,
          "Aluthge closed form equals the polar-decomposition transform (u, w > 0)"),
    Claim("aluthge-general", ("generic", "nilpotent"), False, _aluthge_general,
          "Aluthge closed form for complex u, w"),
    Claim("aluthge-in-bt", ("nonneg", "generic"), True, _aluthge_in_bt,
          "the Aluthge transform lies in B_T"),
    Claim("aluthge-algebra", ("nonneg", "generic", "nilpotent"), False, _aluthge_algebra,
          "B_T equals the algebra of the Aluthge transform"),
    Claim("equal-algebras", ("generic", "homogeneous", "nonneg"), False, _equal_algebras,
          "B_{M_w E M_u} does not depend on w"),
    Claim("bt-equals-full", ("generic", "nonneg", "homogeneous"), False, _bt_equals_full,
          "B_T = B(H) iff the sup condition holds; ker(E M_u) = 0 suffices"),
    Claim("isometry-multiple", ("generic",), False, _isometry_multiple,
          "T is a multiple of an isometry iff the sup condition holds"),
    Claim("quasinilpotent-subspace", ("nilpotent",), True, _quasinilpotent,
          "E(uw) = 0: ker(E M_u) is invariant, T in Q_T and M_a in B_T"),
    Claim("rank-one-rm", ("rank-one",), True, _rank_one_rm,
          "R_m^2 = I + c_m y (x) y for x (x) y"),
    Claim("rank-one-qt", ("rank-one",), True, _rank_one_qt,
          "S in Q_{x (x) y} iff S = (I - P) S P"),
    Claim("rank-one-bt-invariance", ("rank-one",), True, _rank_one_bt_invariance,
          "B_{x (x) w} = B_{y (x) w}"),
    Claim("rank-one-in-bt-wce", ("generic", "homogeneous", "nonneg"), True, _rank_one_in_bt_wce,
          "f (x) g in B_T criterion via ||R_m f|| ||R_m^-1 g||"),
    Claim("majorize-kernel", ("generic",), True, _majorize_kernel,
          "majorization iff kernel inclusion, with a verified minimal constant"),
    Claim("qt-majorization-wce", ("nonneg",), True, _qt_majorization_wce,
          "u >= 0, E(u) >= delta and S in Q_T imply E M_u majorizes S"),
    Claim("qt-majorization-rank-one", ("rank-one",), True, _qt_majorization_rank_one,
          "S in Q_{x (x) y} implies x (x) y majorizes S"),
)

BY_ID = {c.id: c for c in CATALOG}
