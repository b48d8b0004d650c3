"""Spectral radius algebras: the R_m family and membership tests.

For ``T`` with spectral radius ``r`` and ``d_m = 1/(1/m + r)``,

    R_m = (sum_{n>=0} d_m^{2n} T*^n T^n)^{1/2},

``B_T`` is the set of ``S`` with ``sup_m ||R_m S R_m^{-1}|| < inf`` and ``Q_T``
those with ``||R_m S R_m^{-1}|| -> 0``.

For a WCE operator ``R_m^2 = I + M_{v_m conj(u)} E M_u`` with
``v_m = d_m^2 E(|w|^2) / (1 - d_m^2 |E(uw)|^2)``; it acts as the identity on
``H2 = ker(E M_u)`` and as multiplication by ``q_m = 1 + v_m E(|u|^2)`` on
``H1 = span{conj(u) chi_B}``.  For a rank-one ``x (x) y`` it is
``I + c_m y (x) y``.

Each membership question is answered twice: by a closed-form criterion and
by sampling ``g(m) = ||R_m S R_m^{-1}||`` on a grid of ``m`` and classifying
the sequence.  Finite samples cannot decide a supremum over all ``m``; the
classifier is a heuristic and its verdict is reported as evidence.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field

import numpy as np

from .condexp import Partition
from .config import tolerances
from .errors import NumericalFailure, UsageError
from .hilbert import (
    LinOperator,
    MeasureSpace,
    MFunction,
    Subspace,
    _leak,
    _same_space,
    eigh_psd,
    identity,
    inner,
    kernel,
    norm,
    op_norm,
    positive_sqrt,
    project,
    rank_one,
)
from .wce import WCEOp, e_mu, peak_mask, spectral_radius, support

K_MAX = 10**6
SERIES_TAIL = 1e-12
STABLE_REL = 0.01
GROWTH_SLOPE = 0.25
VANISH_REL = 1e-3


@dataclass(frozen=True, eq=False)
class RankOne:
    """The rank-one operator ``x (x) y : h -> <h, y> x``."""

    x: MFunction
    y: MFunction

    def __post_init__(self):
        _same_space(self.x.space, self.y.space)

    @property
    def space(self) -> MeasureSpace:
        return self.x.space

    @functools.cached_property
    def matrix(self) -> LinOperator:
        return rank_one(self.x, self.y)


def _d(m: int, r: float) -> float:
    return m / (1.0 + m * r)


def _one_minus_d2e2(m: int, r: float, e: np.ndarray) -> np.ndarray:
    """``1 - d_m^2 e^2`` without cancellation for ``e <= r``."""
    d = _d(m, r)
    one_minus_de = (1.0 + m * (r - e)) / (1.0 + m * r)
    return one_minus_de * (1.0 + d * e)


# -- R_m families ---------------------------------------------------------


class WCEFamily:
    """Closed-form R_m data for ``T = M_w E M_u``."""

    def __init__(self, T: WCEOp):
        self.T = T
        self.r = spectral_radius(T)
        self._abs_euw = np.abs(T.euw.values)
        self._eu2 = np.real(T.eu2.values)
        self._ew2 = np.real(T.ew2.values)

    @property
    def space(self) -> MeasureSpace:
        return self.T.space

    def d(self, m: int) -> float:
        return _d(m, self.r)

    def v(self, m: int) -> np.ndarray:
        d = self.d(m)
        e = np.minimum(self._abs_euw, self.r)
        return d * d * self._ew2 / _one_minus_d2e2(m, self.r, e)

    def q(self, m: int) -> np.ndarray:
        return 1.0 + self.v(m) * self._eu2

    def alpha(self, m: int) -> np.ndarray:
        """``v_m / q_m``, the magnitude of the coefficient in ``R_m^{-2}``."""
        return self.v(m) / self.q(m)

    def alpha_printed(self, m: int) -> np.ndarray:
        """The printed variant ``v_m / (v_m E(|u|^2) - 1)``."""
        v = self.v(m)
        with np.errstate(divide="ignore", invalid="ignore"):
            return v / (v * self._eu2 - 1.0)

    def _scaled(self, c: np.ndarray) -> LinOperator:
        """``I + M_{c conj(u)} E M_u`` for block-constant ``c``."""
        return identity(self.space) + LinOperator(
            self.space, c[:, None] * np.conj(self.T.u.values)[:, None] * e_mu(self.T).matrix
        )

    def rm_squared(self, m: int) -> LinOperator:
        return self._scaled(self.v(m))

    def rm(self, m: int) -> LinOperator:
        v = self.v(m)
        return self._scaled(v / (1.0 + np.sqrt(1.0 + v * self._eu2)))

    def rm_inverse(self, m: int) -> LinOperator:
        v = self.v(m)
        s = np.sqrt(1.0 + v * self._eu2)
        return self._scaled(-v / (s * (1.0 + s)))

    def rm_inverse_squared(self, m: int) -> LinOperator:
        return self._scaled(-self.alpha(m))

    def rm_inverse_squared_printed(self, m: int) -> LinOperator:
        """``I + M_{alpha' conj(u)} E M_u`` with the printed coefficient (may be singular)."""
        a = self.alpha_printed(m)
        a = np.where(np.isfinite(a), a, 0.0)
        return self._scaled(a)

    @functools.cached_property
    def divergent(self) -> np.ndarray:
        """Atoms where ``q_m -> inf``: peak blocks with ``E|u|^2 E|w|^2 > 0``."""
        return support(self.T.eu2) & support(self.T.ew2) & peak_mask(self.T)

    def norm_rm_squared(self, m: int) -> float:
        """``||R_m||^2 = 1 + ||E(|u|^2) v_m||_inf``."""
        return 1.0 + float(np.max(self._eu2 * self.v(m)))

    def norm_rm_inverse_squared(self, m: int) -> float:
        """``||R_m^{-1}||^2``; equals 1 unless ``H2 = {0}``."""
        if block_decompose(self.T).H2.dim > 0:
            return 1.0
        return float(np.max(1.0 / self.q(m)))


class RankOneFamily:
    """R_m data for ``x (x) y``: ``R_m^2 = I + c_m y (x) y``."""

    def __init__(self, op: RankOne):
        self.op = op
        self.r = abs(inner(op.x, op.y))
        self._xx = norm(op.x) ** 2
        self._yy = norm(op.y) ** 2
        if self._yy == 0.0:
            raise UsageError("rank-one operator needs y != 0")
        self._py = rank_one(op.y, op.y) * (1.0 / self._yy)

    @property
    def space(self) -> MeasureSpace:
        return self.op.space

    def d(self, m: int) -> float:
        return _d(m, self.r)

    def coefficient(self, m: int) -> float:
        """``d_m^2 ||x||^2 / (1 - d_m^2 r^2)``."""
        d = self.d(m)
        return d * d * self._xx / float(_one_minus_d2e2(m, self.r, np.array(self.r)))

    def lam(self, m: int) -> float:
        """Square root of the eigenvalue of ``R_m^2`` on ``span{y}``."""
        return float(np.sqrt(1.0 + self.coefficient(m) * self._yy))

    def rm_squared(self, m: int) -> LinOperator:
        return identity(self.space) + rank_one(self.op.y, self.op.y) * self.coefficient(m)

    def rm(self, m: int) -> LinOperator:
        return identity(self.space) + self._py * (self.lam(m) - 1.0)

    def rm_inverse(self, m: int) -> LinOperator:
        return identity(self.space) + self._py * (1.0 / self.lam(m) - 1.0)


def family(source):
    if isinstance(source, WCEOp):
        return WCEFamily(source)
    if isinstance(source, RankOne):
        return RankOneFamily(source)
    if isinstance(source, (WCEFamily, RankOneFamily)):
        return source
    raise UsageError(f"no closed-form R_m family for {type(source).__name__}")


# -- R_m by series and in closed form ---------------------------------------


def _matrix_and_radius(T, radius):
    if isinstance(T, WCEOp):
        return T.matrix, spectral_radius(T)
    if isinstance(T, RankOne):
        return T.matrix, abs(inner(T.x, T.y))
    if isinstance(T, LinOperator):
        if radius is None:
            radius = float(np.max(np.abs(np.linalg.eigvals(T.matrix))))
        return T, radius
    raise UsageError(f"cannot build a series for {type(T).__name__}")


def rm_series_squared(T, m: int, radius: float | None = None) -> LinOperator:
    """Truncated ``sum_n d_m^{2n} T*^n T^n`` with a certified tail below 1e-12.

    Partial sums are doubled, ``S_{2k} = S_k + (a^k)* S_k a^k`` with
    ``a = d_m T``; after ``K`` terms the tail is at most
    ``tr(S_K) beta / (1 - beta)`` where ``beta = ||a^K||_F^2``.
    """
    A, r = _matrix_and_radius(T, radius)
    d = _d(m, r)
    a = d * A.std
    n = a.shape[0]
    total = np.eye(n, dtype=complex)
    power = a
    terms = 1
    while True:
        beta = float(np.linalg.norm(power) ** 2)
        if beta == 0.0:
            break
        if beta < 1.0 and np.real(np.trace(total)) * beta / (1.0 - beta) < SERIES_TAIL:
            break
        if terms * 2 > K_MAX:
            raise NumericalFailure(
                f"R_m series tail bound not reached within {K_MAX} terms", best=beta
            )
        total = total + power.conj().T @ total @ power
        power = power @ power
        terms *= 2
    return LinOperator.from_std(A.space, (total + total.conj().T) / 2)


def rm_series(T, m: int, radius: float | None = None) -> LinOperator:
    return positive_sqrt(rm_series_squared(T, m, radius))


def rm_closed(T: WCEOp, m: int) -> LinOperator:
    return WCEFamily(T).rm(m)


def rm_inverse(T: WCEOp, m: int) -> LinOperator:
    return WCEFamily(T).rm_inverse(m)


def rank_one_rm(x: MFunction, y: MFunction, m: int) -> LinOperator:
    return RankOneFamily(RankOne(x, y)).rm(m)


# -- block decomposition ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockDecomp:
    H1: Subspace
    H2: Subspace
    P1: LinOperator
    P2: LinOperator
    routes_agree: bool
    divergent: Subspace
    bounded: Subspace

    @property
    def homogeneous_rates(self) -> bool:
        """True when every H1 direction has a divergent ``q_m`` (then ``R_m`` is scalar on H1)."""
        return self.divergent.dim == self.H1.dim


@functools.lru_cache(maxsize=256)
def _block_decompose_cached(T: WCEOp, tol) -> BlockDecomp:
    P: Partition = T.partition
    space = T.space
    u_bar = T.u.conj()
    has_u = support(T.eu2)
    fam = WCEFamily(T)
    h1_vecs, div_vecs = [], []
    for k, block in enumerate(P.blocks):
        atom = block[0]
        if not has_u[atom]:
            continue
        vec = u_bar * P.indicator(k)
        vec = vec * (1.0 / norm(vec))
        h1_vecs.append(vec)
        if fam.divergent[atom]:
            div_vecs.append(vec)

    def _subspace(vecs):
        if not vecs:
            return Subspace.trivial(space)
        return Subspace(space, np.array([v.values for v in vecs]).T)

    H1 = _subspace(h1_vecs)
    H2 = H1.complement()
    H2_kernel = kernel(e_mu(T))
    divergent = _subspace(div_vecs)
    return BlockDecomp(
        H1=H1,
        H2=H2,
        P1=project(H1),
        P2=project(H2),
        routes_agree=H2.same_as(H2_kernel),
        divergent=divergent,
        bounded=divergent.complement(),
    )


def block_decompose(T: WCEOp) -> BlockDecomp:
    """``H2 = ker(E M_u)`` and ``H1 = span{conj(u) chi_B}``.

    ``H2`` is built from the explicit block constraints
    ``sum_{i in B} mu_i u_i f_i = 0`` and compared against :func:`kernel`
    of ``E M_u`` (``routes_agree``).  Also splits ``H1`` into the divergent
    part (peak blocks, ``q_m -> inf``) and the rest.
    """
    return _block_decompose_cached(T, tolerances())


# -- classification of g(m) ------------------------------------------------


class Verdict(str, enum.Enum):
    MEMBER = "Member"
    NONMEMBER = "NonMember"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class MembershipVerdict:
    verdict: Verdict
    evidence: tuple[tuple[int, float], ...]
    criterion_flags: dict = field(default_factory=dict)

    @property
    def conclusive(self) -> bool:
        return self.verdict is not Verdict.INCONCLUSIVE

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "evidence": [[m, g] for m, g in self.evidence],
            "criterion_flags": dict(self.criterion_flags),
        }


def _tail_slope(ms, gs, k: int = 4) -> float:
    lm = np.log(np.asarray(ms[-k:], dtype=float))
    lg = np.log(np.maximum(np.asarray(gs[-k:], dtype=float), np.finfo(float).tiny))
    return float(np.polyfit(lm, lg, 1)[0])


def _stable(gs, rel: float = STABLE_REL) -> bool:
    last = np.asarray(gs[-3:], dtype=float)
    return bool(last.max() <= (1.0 + rel) * last.min())


def classify_bounded(ms, gs) -> Verdict:
    """NonMember if the log-log slope of the last four samples exceeds 0.25,
    Member if the last three agree within 1%, else Inconclusive."""
    if len(gs) < 4:
        return Verdict.INCONCLUSIVE
    if max(gs) == 0.0:
        return Verdict.MEMBER
    if _tail_slope(ms, gs) > GROWTH_SLOPE:
        return Verdict.NONMEMBER
    if _stable(gs):
        return Verdict.MEMBER
    return Verdict.INCONCLUSIVE


def classify_vanishing(ms, gs, scale: float) -> Verdict:
    """Member if g is non-increasing at the end and below ``1e-3 * scale``
    at the largest m; NonMember if it grows or levels off above that."""
    if len(gs) < 4:
        return Verdict.INCONCLUSIVE
    if scale == 0.0 or max(gs) == 0.0:
        return Verdict.MEMBER
    g = np.asarray(gs, dtype=float)
    floor = VANISH_REL * scale
    decreasing = bool(np.all(g[-3:][1:] <= g[-3:][:-1] * (1.0 + 1e-9)))
    if g[-1] <= floor and decreasing:
        return Verdict.MEMBER
    if _tail_slope(ms, gs) > GROWTH_SLOPE or (_stable(gs) and g[-1] > floor):
        return Verdict.NONMEMBER
    return Verdict.INCONCLUSIVE


def conjugated_norms(source, S: LinOperator, m_grid=None) -> tuple[tuple[int, float], ...]:
    """``(m, ||R_m S R_m^{-1}||)`` in ascending ``m``."""
    fam = family(source)
    _same_space(fam.space, S.space)
    grid = sorted(tolerances().m_grid() if m_grid is None else m_grid)
    if any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise UsageError("m grid must be strictly increasing positive integers")
    return tuple((m, op_norm(fam.rm(m) @ S @ fam.rm_inverse(m))) for m in grid)


# -- criteria -------------------------------------------------------------


def _scale(S: LinOperator) -> float:
    return max(op_norm(S), np.finfo(float).tiny)


def bt_member_kernel_criterion(T: WCEOp, S: LinOperator) -> bool:
    """``S`` leaves ``ker(E M_u)`` invariant (``||P1 S h|| <= tol.inv ||S||``)."""
    dec = block_decompose(T)
    if dec.H2.dim == 0:
        return True
    return _leak(S, dec.H2, dec.H2) <= tolerances().inv * _scale(S)


def bt_member_peak_criterion(T: WCEOp, S: LinOperator) -> bool:
    """``S`` leaves the complement of the divergent part of ``H1`` invariant.

    Coincides with :func:`bt_member_kernel_criterion` when every block of
    ``H1`` is a peak block.
    """
    dec = block_decompose(T)
    if dec.bounded.dim == 0:
        return True
    return _leak(S, dec.bounded, dec.bounded) <= tolerances().inv * _scale(S)


def qt_kernel_criterion(T: WCEOp, S: LinOperator) -> bool:
    """``ker(E M_u)`` is S-invariant and contained in ``ker S``, i.e. ``S P2 = 0``."""
    dec = block_decompose(T)
    if dec.H2.dim == 0:
        return True
    img = S.std @ dec.H2.std
    return float(np.max(np.linalg.norm(img, axis=0))) <= tolerances().inv * _scale(S)


def qt_peak_criterion(T: WCEOp, S: LinOperator) -> bool:
    """``S`` maps the divergent part of ``H1`` into its complement and kills the complement."""
    dec = block_decompose(T)
    Pb = project(dec.bounded)
    Pd = project(dec.divergent)
    return (S - Pb @ S @ Pd).frobenius() <= tolerances().inv * max(S.frobenius(), 1e-300)


def _compression_zero(T: WCEOp, S: LinOperator) -> bool:
    dec = block_decompose(T)
    return op_norm(dec.P1 @ S @ dec.P1) <= tolerances().inv * _scale(S)


def bt_member_definitional(source, S: LinOperator, m_grid=None) -> MembershipVerdict:
    evidence = conjugated_norms(source, S, m_grid)
    ms, gs = zip(*evidence)
    flags = {}
    if isinstance(source, WCEOp):
        flags = {
            "kernel": bt_member_kernel_criterion(source, S),
            "peak": bt_member_peak_criterion(source, S),
        }
    elif isinstance(source, RankOne):
        flags = {"rank_one": rank_one_bt_member(source.x, source.y, S)}
    return MembershipVerdict(classify_bounded(ms, gs), evidence, flags)


def qt_member_definitional(source, S: LinOperator, m_grid=None) -> MembershipVerdict:
    evidence = conjugated_norms(source, S, m_grid)
    ms, gs = zip(*evidence)
    return MembershipVerdict(classify_vanishing(ms, gs, op_norm(S)), evidence)


def _slowest_rate(fam, m: int) -> float:
    """Smallest divergent eigenvalue of ``R_m^2`` (1.0 when nothing diverges)."""
    if isinstance(fam, RankOneFamily):
        return fam.lam(m) ** 2
    mask = fam.divergent
    if not mask.any():
        return 1.0
    return float(np.min(fam.q(m)[mask]))


def rate_verdict(source, evidence, scale: float) -> Verdict:
    """Decay classification relative to the slowest divergent rate.

    Member when ``g(m) sqrt(q*_m)`` stays bounded (so ``g -> 0`` because
    ``q*_m -> inf``); otherwise the verdict of :func:`classify_vanishing`.
    Unlike the fixed ``1e-3`` floor alone this does not depend on how far
    the grid reaches.
    """
    fam = family(source)
    ms, gs = zip(*evidence)
    if scale == 0.0 or max(gs) == 0.0:
        return Verdict.MEMBER
    rates = [_slowest_rate(fam, m) for m in ms]
    diverges = rates[-1] > 1.0 and _tail_slope(ms, rates) > GROWTH_SLOPE
    scaled = [g * np.sqrt(q) for g, q in zip(gs, rates)]
    if diverges and classify_bounded(ms, scaled) is Verdict.MEMBER:
        return Verdict.MEMBER
    return classify_vanishing(ms, gs, scale)


def qt_member(T: WCEOp, S: LinOperator, m_grid=None) -> tuple[bool, MembershipVerdict]:
    """Kernel criterion for ``Q_T`` plus definitional evidence.

    The returned bool is the kernel criterion (``ker(E M_u)`` invariant and
    inside ``ker S``).  ``criterion_flags['compression_zero']`` records whether
    ``P1 S P1 = 0`` as well; the sampled norms can only decay when it is.
    ``criterion_flags['rate_verdict']`` is :func:`rate_verdict` on the same
    samples.
    """
    crit = qt_kernel_criterion(T, S)
    definitional = qt_member_definitional(T, S, m_grid)
    flags = {
        "kernel": crit,
        "compression_zero": _compression_zero(T, S),
        "peak": qt_peak_criterion(T, S),
        "rate_verdict": rate_verdict(T, definitional.evidence, op_norm(S)).value,
    }
    return crit, MembershipVerdict(definitional.verdict, definitional.evidence, flags)


# -- rank-one operators -------------------------------------------------------


def _projector_onto(y: MFunction) -> LinOperator:
    return rank_one(y, y) * (1.0 / norm(y) ** 2)


def rank_one_bt_member(x: MFunction, y: MFunction, S: LinOperator) -> bool:
    """``S`` in ``B_{x (x) y}`` iff ``P S (I - P) = 0`` with ``P`` onto ``span{y}``."""
    P = _projector_onto(y)
    off = P @ S @ (identity(S.space) - P)
    return op_norm(off) <= tolerances().inv * _scale(S)


def rank_one_qt(x: MFunction, y: MFunction, S: LinOperator) -> bool:
    """``S`` in ``Q_{x (x) y}`` iff ``S = (I - P) S P`` with ``P`` onto ``span{y}``."""
    if norm(y) == 0.0:
        raise UsageError("y must be nonzero")
    P = _projector_onto(y)
    resid = S - (identity(S.space) - P) @ S @ P
    return op_norm(resid) <= 1e-9 * op_norm(S)


def rank_one_qt_member(op: RankOne, S: LinOperator, m_grid=None) -> tuple[bool, MembershipVerdict]:
    """:func:`rank_one_qt` plus definitional evidence.

    ``criterion_flags['decay_bound']`` checks ``g(m) <= ||S|| min(1, 1/lambda_m)``
    (relative slack ``1e-8``) at every sampled ``m``.
    """
    crit = rank_one_qt(op.x, op.y, S)
    definitional = qt_member_definitional(op, S, m_grid)
    fam = RankOneFamily(op)
    s_norm = op_norm(S)
    bound_ok = all(
        g <= s_norm * min(1.0, 1.0 / fam.lam(m)) * (1.0 + 1e-8) for m, g in definitional.evidence
    )
    flags = {
        "criterion": crit,
        "decay_bound": bound_ok,
        "rate_verdict": rate_verdict(op, definitional.evidence, s_norm).value,
    }
    return crit, MembershipVerdict(definitional.verdict, definitional.evidence, flags)


def rank_one_bt_invariance(w: MFunction, x: MFunction, y: MFunction, batch) -> bool:
    """``B_{x (x) w}`` and ``B_{y (x) w}`` accept exactly the same operators of ``batch``."""
    return all(rank_one_bt_member(x, w, S) == rank_one_bt_member(y, w, S) for S in batch)


def rank_one_in_bt_wce(
    T: WCEOp, f: MFunction, g: MFunction, m_grid=None
) -> tuple[bool, MembershipVerdict]:
    """Is ``f (x) g`` in ``B_T``?

    ``R_m (f (x) g) R_m^{-1} = (R_m f) (x) (R_m^{-1} g)``, so the criterion
    sequence is ``||R_m f||^2 ||R_m^{-1} g||^2`` with
    ``||R_m f||^2 = ||f||^2 + ||v_m^{1/2} E(uf)||^2`` and
    ``||R_m^{-1} g||^2 = ||g||^2 - ||(v_m/q_m)^{1/2} E(ug)||^2``.  The printed
    expression (with ``v_m / (v_m E|u|^2 - 1)``) is evaluated alongside.
    """
    fam = WCEFamily(T)
    grid = sorted(tolerances().m_grid() if m_grid is None else m_grid)
    P = T.partition
    mu = T.space.mu
    euf2 = np.abs(P.expect(T.u * f).values) ** 2
    eug2 = np.abs(P.expect(T.u * g).values) ** 2
    ff, gg = norm(f) ** 2, norm(g) ** 2
    closed, printed, mismatch = [], [], 0.0
    for m in grid:
        v = fam.v(m)
        rf2 = ff + float(np.sum(mu * v * euf2))
        rg2 = gg - float(np.sum(mu * fam.alpha(m) * eug2))
        direct = norm(fam.rm_inverse(m)(g)) ** 2
        mismatch = max(mismatch, abs(direct - rg2) / max(gg, 1e-300))
        closed.append((m, float(np.sqrt(max(rf2 * rg2, 0.0)))))
        ap = fam.alpha_printed(m)
        a_term = float(np.sum(mu * ap * eug2))
        v_term = rf2 - ff
        printed.append(a_term * ff + v_term * (gg + a_term))
    ms, gs = zip(*closed)
    verdict = classify_bounded(ms, gs)
    flags = {
        "inverse_norm_mismatch": mismatch,
        "printed_expression": printed,
    }
    return verdict is Verdict.MEMBER, MembershipVerdict(verdict, tuple(closed), flags)


# -- whole-algebra questions -------------------------------------------------


def _sup_condition(fam: WCEFamily, m: int, printed: bool) -> float:
    a = float(np.max(fam._eu2 * fam.v(m)))
    if printed:
        with np.errstate(divide="ignore", invalid="ignore"):
            b = float(np.max(np.abs(fam._eu2 * fam.alpha_printed(m))))
    else:
        b = float(np.max(fam._eu2 * fam.alpha(m)))
    return a + b * (1.0 + a)


def bt_equals_full(T: WCEOp, m_grid=None) -> tuple[bool, dict]:
    """Structural answer ``dim H2 in {0, n}``, with the sup conditions as evidence.

    ``condition_number`` samples ``||R_m|| ||R_m^{-1}||``, whose boundedness
    is the definitional test for ``B_T = B(H)``.
    """
    fam = WCEFamily(T)
    dec = block_decompose(T)
    grid = sorted(tolerances().m_grid() if m_grid is None else m_grid)
    structural = dec.H2.dim in (0, T.space.n)
    printed = [(m, _sup_condition(fam, m, printed=True)) for m in grid]
    corrected = [(m, _sup_condition(fam, m, printed=False)) for m in grid]
    cond = [
        (m, float(np.sqrt(fam.norm_rm_squared(m) * fam.norm_rm_inverse_squared(m))))
        for m in grid
    ]
    ms = [m for m, _ in cond]
    evidence = {
        "dim_H2": dec.H2.dim,
        "printed_sup": printed,
        "printed_sup_verdict": classify_bounded(ms, [x for _, x in printed]).value,
        "corrected_sup": corrected,
        "condition_number": cond,
        "condition_verdict": classify_bounded(ms, [x for _, x in cond]).value,
    }
    if not structural:
        h1 = dec.H1.vectors()[0]
        h2 = dec.H2.vectors()[0]
        evidence["counterexample"] = rank_one(h1, h2)
    return structural, evidence


def isometry_multiple_check(T: WCEOp, m_grid=None) -> tuple[bool, dict]:
    """Direct test ``T* T = c I`` (least squares ``c``), plus the sup condition."""
    from .hilbert import adjoint

    A = T.matrix
    gram = adjoint(A) @ A
    n = T.space.n
    c = float(np.real(np.trace(gram.std))) / n
    resid = op_norm(gram - identity(T.space) * c)
    scale = op_norm(A) ** 2
    direct = resid <= 1e-9 * scale if scale > 0 else True
    fam = WCEFamily(T)
    grid = sorted(tolerances().m_grid() if m_grid is None else m_grid)
    printed = [(m, _sup_condition(fam, m, printed=True)) for m in grid]
    ms = [m for m, _ in printed]
    return direct, {
        "c": c,
        "residual": resid,
        "printed_sup": printed,
        "printed_sup_verdict": classify_bounded(ms, [x for _, x in printed]).value,
    }


def invariant_subspace_witness(T: WCEOp) -> Subspace | None:
    """``ker(E M_u)`` when it is a nontrivial proper subspace, else None."""
    h2 = block_decompose(T).H2
    return h2 if 0 < h2.dim < T.space.n else None


def is_homogeneous(T: WCEOp, rel: float = 1e-9) -> bool:
    """``E|u|^2``, ``E|w|^2`` and ``|E(uw)|`` are constant across atoms."""
    for vals in (np.real(T.eu2.values), np.real(T.ew2.values), np.abs(T.euw.values)):
        if vals.max() - vals.min() > rel * max(vals.max(), 1e-300):
            return False
    return True
