"""Majorization: ``T`` majorizes ``S`` when ``||S x|| <= M ||T x||`` for all x.

In finite dimension every range is closed, so majorization is equivalent to
``ker T ⊆ ker S``.  The minimal constant is the square root of the largest
generalized Rayleigh quotient of ``(S* S, T* T)`` on ``(ker T)^perp``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import tolerances
from .errors import NumericalFailure, UsageError
from .hilbert import (
    LinOperator,
    MFunction,
    _same_space,
    eigh_psd,
    kernel,
    norm,
    rank_one,
)
from .sra import qt_kernel_criterion, rank_one_qt
from .wce import WCEOp, e_mu, support

SPOT_CHECKS = 100


@dataclass(frozen=True, eq=False)
class MajorizationResult:
    holds: bool
    constant: float | None = None
    witness: MFunction | None = None


def _spot_check(T: LinOperator, S: LinOperator, M: float, seed: int) -> float:
    """Worst ratio ``||Sx|| / (M ||Tx||)`` over random directions."""
    rng = np.random.default_rng(seed)
    n = T.space.n
    xs = rng.standard_normal((n, SPOT_CHECKS)) + 1j * rng.standard_normal((n, SPOT_CHECKS))
    s_norm = np.linalg.norm(S.std @ xs, axis=0)
    t_norm = np.linalg.norm(T.std @ xs, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(s_norm == 0.0, 0.0, s_norm / (M * t_norm))
    return float(np.max(ratios))


def majorizes(T: LinOperator, S: LinOperator) -> MajorizationResult:
    """Decide whether ``T`` majorizes ``S`` and compute the minimal constant.

    Kernel containment is a principal-angle test at ``tol.angle``.  When it
    fails the witness is the unit kernel vector of ``T`` that ``S`` moves
    the most.
    """
    _same_space(T.space, S.space)
    tol = tolerances()
    kt = kernel(T)
    ks = kernel(S)
    if not kt.contained_in(ks):
        img = S.std @ kt.std
        j = int(np.argmax(np.linalg.norm(img, axis=0)))
        return MajorizationResult(False, witness=kt.vectors()[j])
    comp = kt.complement()
    if comp.dim == 0:
        return MajorizationResult(True, constant=0.0)
    q = comp.std
    a = q.conj().T @ T.std.conj().T @ T.std @ q
    b = q.conj().T @ S.std.conj().T @ S.std @ q
    chol = np.linalg.cholesky((a + a.conj().T) / 2)
    linv = np.linalg.inv(chol)
    c = linv @ b @ linv.conj().T
    vals, _ = eigh_psd(c)
    M = float(np.sqrt(max(vals[0], 0.0)))
    if M > 0.0:
        worst = _spot_check(T, S, M, tol.seed)
        if worst > 1.0 + 1e-8:
            raise NumericalFailure(
                f"majorization constant {M} violated by a sampled direction", best=M * worst
            )
    return MajorizationResult(True, constant=M)


def closed_range_hypothesis(T: WCEOp, delta: float) -> bool:
    """``supp E(u) = supp E(|u|^2)`` and ``E(u) >= delta`` there.

    ``E(u)`` must be real on that support (imaginary part below the support
    threshold) for the inequality to make sense.
    """
    if delta <= 0:
        raise UsageError("delta must be positive")
    eu = T.partition.expect(T.u)
    s1, s2 = support(eu), support(T.eu2)
    if not np.array_equal(s1, s2):
        return False
    vals = eu.values[s2]
    scale = max(float(np.max(np.abs(eu.values), initial=0.0)), 1.0)
    if np.any(np.abs(vals.imag) > tolerances().supp * scale):
        return False
    return bool(np.all(vals.real >= delta))


def qt_majorization_suite(T: WCEOp, S: LinOperator, delta: float | None = None) -> bool:
    """If ``S ∈ Q_T`` (kernel criterion) then ``E M_u`` majorizes ``S``.

    Requires ``u >= 0`` and the closed-range hypothesis; returns the truth
    of the implication (vacuously true when ``S ∉ Q_T``).
    """
    u = T.u.values
    if np.any(np.abs(u.imag) > 0) or np.any(u.real < 0):
        raise UsageError("the majorization proposition needs u >= 0")
    if delta is None:
        eu = np.real(T.partition.expect(T.u).values)
        pos = eu[eu > 0]
        delta = float(pos.min()) if pos.size else 1.0
    if not closed_range_hypothesis(T, delta):
        raise UsageError("E(u) >= delta fails on the support of E(|u|^2)")
    if not qt_kernel_criterion(T, S):
        return True
    return majorizes(e_mu(T), S).holds


def rank_one_majorization(x: MFunction, y: MFunction, S: LinOperator) -> bool:
    """If ``S ∈ Q_{x (x) y}`` then ``x (x) y`` majorizes ``S``."""
    if norm(x) == 0.0 or norm(y) == 0.0:
        raise UsageError("x and y must be nonzero")
    if not rank_one_qt(x, y, S):
        return True
    return majorizes(rank_one(x, y), S).holds
