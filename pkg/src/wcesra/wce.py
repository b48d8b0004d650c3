"""Weighted conditional expectation operators ``T f = w E(u f)``.

Closed forms for the norm, powers, spectral radius and Aluthge transform are
evaluated from the derived block functions ``E(|u|^2)``, ``E(|w|^2)`` and
``E(uw)``.  :func:`polar` is deliberately generic (it only sees a matrix) so
that it can audit the closed forms.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .condexp import Partition, cond_expect
from .config import tolerances
from .errors import UsageError
from .hilbert import (
    LinOperator,
    MeasureSpace,
    MFunction,
    _same_space,
    adjoint,
    eigh_psd,
    identity,
    kernel,
    op_norm,
)


def support(f: MFunction) -> np.ndarray:
    """Boolean mask of atoms where ``|f|`` exceeds ``tol.supp * max|f|``."""
    mag = np.abs(f.values)
    top = mag.max(initial=0.0)
    if top == 0.0:
        return np.zeros(mag.shape, dtype=bool)
    return mag > tolerances().supp * top


def _wce_matrix(P: Partition, u: MFunction, w: MFunction) -> np.ndarray:
    return w.values[:, None] * cond_expect(P).matrix * u.values[None, :]


@dataclass(frozen=True, eq=False)
class WCEOp:
    """``T = M_w E M_u`` with its derived block functions cached."""

    partition: Partition
    u: MFunction
    w: MFunction

    def __post_init__(self):
        _same_space(self.partition.space, self.u.space)
        _same_space(self.partition.space, self.w.space)

    @property
    def space(self) -> MeasureSpace:
        return self.partition.space

    @functools.cached_property
    def matrix(self) -> LinOperator:
        return LinOperator(self.space, _wce_matrix(self.partition, self.u, self.w))

    @functools.cached_property
    def eu2(self) -> MFunction:
        """``E(|u|^2)``"""
        return self.partition.expect(self.u.abs2())

    @functools.cached_property
    def ew2(self) -> MFunction:
        """``E(|w|^2)``"""
        return self.partition.expect(self.w.abs2())

    @functools.cached_property
    def euw(self) -> MFunction:
        """``E(uw)``; its block values are the nonzero eigenvalues of T."""
        return self.partition.expect(self.u * self.w)

    def __call__(self, f: MFunction) -> MFunction:
        return self.w * self.partition.expect(self.u * f)

    def with_weight(self, w: MFunction) -> "WCEOp":
        return WCEOp(self.partition, self.u, w)


def wce_build(P: Partition, u: MFunction, w: MFunction) -> WCEOp:
    return WCEOp(P, u, w)


def e_mu(T: WCEOp) -> LinOperator:
    """``E M_u``, whose kernel drives the spectral radius algebra."""
    return LinOperator(T.space, cond_expect(T.partition).matrix * T.u.values[None, :])


def wce_adjoint(T: WCEOp) -> WCEOp:
    """``(M_w E M_u)* = M_{conj u} E M_{conj w}``."""
    return WCEOp(T.partition, T.w.conj(), T.u.conj())


def wce_norm(T: WCEOp) -> float:
    return float(np.sqrt(np.max(np.real(T.ew2.values * T.eu2.values))))


def wce_power(T: WCEOp, n: int, adjoint: bool = False) -> LinOperator:
    """``T^n`` (or ``T*^n``) from the closed form.

    ``T^n f = E(uw)^(n-1) w E(uf)`` and
    ``T*^n f = conj(E(uw))^(n-1) conj(u) E(conj(w) f)``.  ``n = 0`` gives the
    identity.
    """
    if n < 0:
        raise UsageError("power must be nonnegative")
    if n == 0:
        return identity(T.space)
    if adjoint:
        weight = np.conj(T.euw.values) ** (n - 1) * np.conj(T.u.values)
        u = T.w.conj()
    else:
        weight = T.euw.values ** (n - 1) * T.w.values
        u = T.u
    return LinOperator(T.space, _wce_matrix(T.partition, u, MFunction(T.space, weight)))


def power_norm(T: WCEOp, n: int) -> float:
    """Closed-form ``||T^n||``: the norm of the WCE operator with weight ``E(uw)^(n-1) w``."""
    if n == 0:
        return 1.0
    scale = np.abs(T.euw.values) ** (n - 1)
    return float(np.sqrt(np.max(scale**2 * np.real(T.ew2.values * T.eu2.values))))


def spectral_radius(T: WCEOp) -> float:
    return T.euw.sup()


def peak_mask(T: WCEOp) -> np.ndarray:
    """Atoms where ``|E(uw)|`` attains the spectral radius.

    The slack is ``tol.peak * r``, widened to ``tol.supp * ||T||`` so that a
    radius made only of rounding dust counts as zero (every atom peaks).
    """
    r = spectral_radius(T)
    tol = tolerances()
    slack = max(tol.peak * r, tol.supp * wce_norm(T))
    return np.abs(T.euw.values) >= r - slack


def gelfand_estimate(A: LinOperator, k: int = 50) -> float:
    """``||A^k||^(1/k)`` from the matrix, with rescaling against overflow."""
    scale = op_norm(A)
    if scale == 0.0:
        return 0.0
    pk = (A * (1.0 / scale)).power(k)
    return scale * op_norm(pk) ** (1.0 / k)


def gelfand_check(T: WCEOp, k: int = 50, rel: float = 0.05) -> dict:
    """Compare ``r(T) = ||E(uw)||_inf`` with ``||T^k||^(1/k)`` computed both ways."""
    r = spectral_radius(T)
    norm_t = wce_norm(T)
    closed = power_norm(T, k) ** (1.0 / k)
    matrix = gelfand_estimate(T.matrix, k)
    bound = rel * max(r, norm_t)
    return {
        "radius": r,
        "norm": norm_t,
        "closed_estimate": closed,
        "matrix_estimate": matrix,
        "ok": abs(closed - r) <= bound and abs(matrix - r) <= bound,
    }


# -- polar decomposition and Aluthge transform ---------------------------


@dataclass(frozen=True, eq=False)
class PolarParts:
    U: LinOperator
    absT: LinOperator
    sqrt_abs: LinOperator


def polar(A: LinOperator) -> PolarParts:
    """``A = U |A|`` with ``ker U = ker |A|``.

    ``|A|`` comes from the spectral decomposition of ``A* A`` by deflated
    power iteration.  Singular values ``||A v_i||`` at or below
    ``tol.rank * max`` are treated as zero.
    """
    a = A.std
    _, vecs = eigh_psd(a.conj().T @ a)
    img = a @ vecs
    sig = np.linalg.norm(img, axis=0)
    keep = sig > tolerances().rank * sig.max(initial=0.0)
    v = vecs[:, keep]
    s = sig[keep]
    abs_std = (v * s) @ v.conj().T
    root_std = (v * np.sqrt(s)) @ v.conj().T
    u_std = (img[:, keep] / s) @ v.conj().T
    space = A.space
    return PolarParts(
        U=LinOperator.from_std(space, u_std),
        absT=LinOperator.from_std(space, abs_std),
        sqrt_abs=LinOperator.from_std(space, root_std),
    )


def aluthge_polar(A: LinOperator) -> LinOperator:
    """``|A|^(1/2) U |A|^(1/2)`` from :func:`polar`."""
    parts = polar(A)
    return parts.sqrt_abs @ parts.U @ parts.sqrt_abs


def aluthge_weight(T: WCEOp) -> MFunction:
    """Weight ``w~ = chi_z E(uw) conj(u) / E(|u|^2)`` with ``z`` the support of ``E(|u|^2)``."""
    eu2 = T.eu2.values
    mask = support(T.eu2)
    coeff = np.zeros(T.space.n, dtype=complex)
    coeff[mask] = T.euw.values[mask] / eu2[mask]
    return MFunction(T.space, coeff * np.conj(T.u.values))


def aluthge_wce(T: WCEOp) -> WCEOp:
    """The Aluthge transform as the WCE operator ``M_{w~} E M_u``."""
    return T.with_weight(aluthge_weight(T))


def aluthge(T: WCEOp) -> LinOperator:
    return aluthge_wce(T).matrix


def polar_check(A: LinOperator) -> dict:
    """Reassembly residual and kernel agreement for :func:`polar`."""
    parts = polar(A)
    ku, ka = kernel(parts.U), kernel(parts.absT)
    return {
        "reassembly": (parts.U @ parts.absT).distance(A),
        "kernels_agree": ku.same_as(ka, 1e-7),
        "abs_selfadjoint": parts.absT.distance(adjoint(parts.absT)),
    }
