"""Finite weighted L^2 spaces.

A :class:`MeasureSpace` is a finite set of atoms with positive weights
``mu_i``.  Functions are complex vectors indexed by atom and the inner
product is ``<f, g> = sum_i mu_i f_i conj(g_i)``.  Operators are stored as
ordinary matrices acting on value vectors; adjoints, norms and
orthonormality are always taken with respect to the weighted inner product.

Internally most numerics run in "standard" coordinates ``x = D^{1/2} f``
(``D = diag(mu)``), where the weighted inner product becomes the Euclidean
one and the weighted adjoint becomes the conjugate transpose.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .config import tolerances
from .errors import NumericalFailure, UsageError

_RESTARTS = 8
_COLLAPSE = 1e-250


@dataclass(frozen=True)
class MeasureSpace:
    weights: tuple[float, ...]

    def __post_init__(self):
        weights = tuple(float(x) for x in self.weights)
        if len(weights) < 1:
            raise UsageError("a measure space needs at least one atom")
        if not all(np.isfinite(x) and x > 0 for x in weights):
            raise UsageError("weights must be positive")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, n: int, total: float = 1.0) -> "MeasureSpace":
        return cls((total / n,) * n)

    @property
    def n(self) -> int:
        return len(self.weights)

    @functools.cached_property
    def mu(self) -> np.ndarray:
        arr = np.array(self.weights, dtype=float)
        arr.setflags(write=False)
        return arr

    @functools.cached_property
    def sqrt_mu(self) -> np.ndarray:
        arr = np.sqrt(self.mu)
        arr.setflags(write=False)
        return arr

    def function(self, values) -> "MFunction":
        return MFunction(self, values)

    def constant(self, c: complex = 1.0) -> "MFunction":
        return MFunction(self, np.full(self.n, c, dtype=complex))

    def basis_vector(self, i: int) -> "MFunction":
        v = np.zeros(self.n, dtype=complex)
        v[i] = 1.0
        return MFunction(self, v)


def _same_space(a: MeasureSpace, b: MeasureSpace) -> None:
    if a is not b and a != b:
        raise UsageError("objects live on different measure spaces")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MFunction:
    """A complex function on the atoms of ``space``."""

    space: MeasureSpace
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex).reshape(-1)
        if vals.shape[0] != self.space.n:
            raise UsageError(
                f"function has {vals.shape[0]} values but the space has {self.space.n} atoms"
            )
        if not np.all(np.isfinite(vals)):
            raise UsageError("function values must be finite")
        object.__setattr__(self, "values", _frozen(vals))

    def _wrap(self, values) -> "MFunction":
        return MFunction(self.space, values)

    def _other(self, other):
        if isinstance(other, MFunction):
            _same_space(self.space, other.space)
            return other.values
        return other

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other(other))

    def __neg__(self):
        return self._wrap(-self.values)

    def conj(self) -> "MFunction":
        return self._wrap(np.conj(self.values))

    def abs2(self) -> "MFunction":
        return self._wrap(np.abs(self.values) ** 2)

    def sup(self) -> float:
        """Essential sup of ``|f|``; every atom has positive measure."""
        return float(np.max(np.abs(self.values)))

    def allclose(self, other: "MFunction", atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.values - self._other(other))) <= atol)

    def __repr__(self):
        return f"MFunction({np.array2string(self.values, precision=4)})"


@dataclass(frozen=True, eq=False)
class LinOperator:
    """A linear operator on ``L^2(space)`` in value coordinates."""

    space: MeasureSpace
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        n = self.space.n
        if mat.shape != (n, n):
            raise UsageError(f"operator matrix must be {n}x{n}, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise UsageError("operator entries must be finite")
        object.__setattr__(self, "matrix", _frozen(mat))

    @classmethod
    def from_std(cls, space: MeasureSpace, std: np.ndarray) -> "LinOperator":
        s = space.sqrt_mu
        return cls(space, std / s[:, None] * s[None, :])

    @functools.cached_property
    def std(self) -> np.ndarray:
        """Matrix in standard coordinates, ``D^{1/2} A D^{-1/2}``."""
        s = self.space.sqrt_mu
        return _frozen(self.matrix * s[:, None] / s[None, :])

    def _other(self, other: "LinOperator") -> np.ndarray:
        _same_space(self.space, other.space)
        return other.matrix

    def __call__(self, f: MFunction) -> MFunction:
        _same_space(self.space, f.space)
        return MFunction(self.space, self.matrix @ f.values)

    def __matmul__(self, other):
        if isinstance(other, MFunction):
            return self(other)
        return LinOperator(self.space, self.matrix @ self._other(other))

    def __add__(self, other):
        return LinOperator(self.space, self.matrix + self._other(other))

    def __sub__(self, other):
        return LinOperator(self.space, self.matrix - self._other(other))

    def __mul__(self, c):
        return LinOperator(self.space, self.matrix * c)

    __rmul__ = __mul__

    def __neg__(self):
        return LinOperator(self.space, -self.matrix)

    def adjoint(self) -> "LinOperator":
        return adjoint(self)

    def power(self, k: int) -> "LinOperator":
        return LinOperator(self.space, np.linalg.matrix_power(self.matrix, k))

    def frobenius(self) -> float:
        """Hilbert-Schmidt norm; an upper bound for :func:`op_norm`."""
        return float(np.linalg.norm(self.std))

    def distance(self, other: "LinOperator") -> float:
        """Hilbert-Schmidt distance, used as a strict comparator in checks."""
        _same_space(self.space, other.space)
        return float(np.linalg.norm(self.std - other.std))


def identity(space: MeasureSpace) -> LinOperator:
    return LinOperator(space, np.eye(space.n))


def zero(space: MeasureSpace) -> LinOperator:
    return LinOperator(space, np.zeros((space.n, space.n)))


def multiplication(a: MFunction) -> LinOperator:
    """The multiplication operator ``M_a``."""
    return LinOperator(a.space, np.diag(a.values))


def inner(f: MFunction, g: MFunction) -> complex:
    _same_space(f.space, g.space)
    return complex(np.sum(f.space.mu * f.values * np.conj(g.values)))


def norm(f: MFunction) -> float:
    return float(np.sqrt(np.sum(f.space.mu * np.abs(f.values) ** 2)))


def adjoint(A: LinOperator) -> LinOperator:
    mu = A.space.mu
    return LinOperator(A.space, A.matrix.conj().T * mu[None, :] / mu[:, None])


def rank_one(f: MFunction, g: MFunction) -> LinOperator:
    """``(f (x) g) h = <h, g> f``."""
    _same_space(f.space, g.space)
    row = g.space.mu * np.conj(g.values)
    return LinOperator(f.space, np.outer(f.values, row))


# -- power iteration ---------------------------------------------------------


def _top_eigpair(h: np.ndarray, *, seed: int, tol: float, max_iter: int):
    """Dominant eigenpair of a Hermitian positive semidefinite matrix.

    Power iteration where the iteration matrix is squared after every sweep,
    so sweep k applies ``h^(2^k)``.  Stops once the Rayleigh quotient changes
    by less than ``tol`` relative.  A start vector that collapses (orthogonal
    to the dominant eigenspace) triggers a restart from the next seed.
    """
    n = h.shape[0]
    scale = float(np.linalg.norm(h))
    if scale == 0.0:
        x = np.zeros(n, dtype=complex)
        x[0] = 1.0
        return 0.0, x
    best = 0.0
    for attempt in range(_RESTARTS):
        rng = np.random.default_rng(seed + attempt)
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        x /= np.linalg.norm(x)
        op = h / scale
        lam_prev = None
        for _ in range(max_iter):
            y = op @ x
            ny = np.linalg.norm(y)
            if ny <= _COLLAPSE:
                break
            x = y / ny
            lam = float(np.real(np.vdot(x, h @ x)))
            best = max(best, lam)
            if lam_prev is not None and abs(lam - lam_prev) <= tol * abs(lam):
                y = op @ x
                ny = np.linalg.norm(y)
                if ny > _COLLAPSE:
                    x = y / ny
                    lam = float(np.real(np.vdot(x, h @ x)))
                return lam, x
            lam_prev = lam
            op = op @ op
            nop = np.linalg.norm(op)
            if nop <= _COLLAPSE:
                break
            op /= nop
        else:
            raise NumericalFailure(
                f"power iteration did not converge in {max_iter} sweeps", best=best
            )
    raise NumericalFailure("power iteration collapsed from every seeded start", best=best)


def _orthonormalize(v: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    for _ in range(2):
        for q in basis:
            v = v - q * np.vdot(q, v)
    return v / np.linalg.norm(v)


def _pivoted_orth(cols: np.ndarray, tol: float, limit: int | None = None) -> np.ndarray:
    """Orthonormal basis of the column span by pivoted Gram-Schmidt.

    Pivots whose residual norm falls below ``tol`` times the largest initial
    column norm are treated as dependent.  ``limit`` caps the basis size.
    """
    n, m = cols.shape
    resid = np.array(cols, dtype=complex)
    norms = np.linalg.norm(resid, axis=0)
    if m == 0 or norms.max(initial=0.0) == 0.0:
        return np.zeros((n, 0), dtype=complex)
    threshold = tol * norms.max()
    basis: list[np.ndarray] = []
    limit = n if limit is None else limit
    while len(basis) < limit:
        norms = np.linalg.norm(resid, axis=0)
        j = int(np.argmax(norms))
        if norms[j] <= threshold:
            break
        q = _orthonormalize(resid[:, j], basis)
        basis.append(q)
        for _ in range(2):
            resid = resid - np.outer(q, q.conj() @ resid)
    return np.array(basis).T if basis else np.zeros((n, 0), dtype=complex)


def _complete(q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the columns of ``q``."""
    n, k = q.shape
    if k == n:
        return np.zeros((n, 0), dtype=complex)
    resid = np.eye(n, dtype=complex) - q @ q.conj().T
    return _pivoted_orth(resid, 0.0, limit=n - k)


def eigh_psd(h: np.ndarray, *, seed: int | None = None, floor: float = 1e-13):
    """Spectral decomposition of a Hermitian PSD matrix (standard coordinates).

    Eigenpairs are peeled off by power iteration with projection deflation.
    Once the remaining spectrum falls below ``floor`` times the top eigenvalue
    the rest of the space is completed with eigenvalue 0.  Returns
    ``(values, vectors)`` with values in descending order and orthonormal
    columns.
    """
    tol = tolerances()
    seed = tol.seed if seed is None else seed
    h = (h + h.conj().T) / 2
    n = h.shape[0]
    vals: list[float] = []
    vecs: list[np.ndarray] = []
    top = None
    resid = h
    for _ in range(n):
        lam, x = _top_eigpair(resid, seed=seed, tol=tol.iter, max_iter=tol.max_iter)
        if top is None:
            top = lam
        if top <= 0.0 or lam <= floor * top:
            break
        x = _orthonormalize(x, vecs)
        vals.append(float(np.real(np.vdot(x, h @ x))))
        vecs.append(x)
        q = np.array(vecs).T
        proj = np.eye(n) - q @ q.conj().T
        resid = proj @ h @ proj
        resid = (resid + resid.conj().T) / 2
    q = np.array(vecs).T if vecs else np.zeros((n, 0), dtype=complex)
    rest = _complete(q)
    values = np.concatenate([np.array(vals), np.zeros(rest.shape[1])])
    return values, np.hstack([q, rest])


def op_norm(A: LinOperator) -> float:
    """Largest singular value w.r.t. the weighted inner product.

    Power iteration on ``A* A``; raises :class:`NumericalFailure` carrying
    the best lower bound if the iteration does not settle.
    """
    tol = tolerances()
    a = A.std
    lam, _ = _top_eigpair(a.conj().T @ a, seed=tol.seed, tol=tol.iter, max_iter=tol.max_iter)
    return float(np.sqrt(max(lam, 0.0)))


def positive_sqrt(A: LinOperator) -> LinOperator:
    """Positive square root of a positive (self-adjoint) operator."""
    vals, vecs = eigh_psd(A.std)
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    return LinOperator.from_std(A.space, root)


# -- subspaces ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Subspace:
    """Span of weighted-orthonormal columns of ``basis`` (value coordinates)."""

    space: MeasureSpace
    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex).reshape(self.space.n, -1)
        object.__setattr__(self, "basis", _frozen(b))
        gram = (b.conj().T * self.space.mu) @ b
        if gram.size and np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e3 * tolerances().orth:
            raise UsageError("subspace basis is not orthonormal")

    @classmethod
    def from_std(cls, space: MeasureSpace, q: np.ndarray) -> "Subspace":
        return cls(space, q / space.sqrt_mu[:, None])

    @classmethod
    def span(cls, vectors: list[MFunction], tol: float | None = None) -> "Subspace":
        """Orthonormalized span of arbitrary vectors."""
        if not vectors:
            raise UsageError("span of no vectors needs an explicit space")
        space = vectors[0].space
        cols = np.array([v.values * space.sqrt_mu for v in vectors]).T
        tol = tolerances().rank if tol is None else tol
        return cls.from_std(space, _pivoted_orth(cols, tol))

    @classmethod
    def full(cls, space: MeasureSpace) -> "Subspace":
        return cls.from_std(space, np.eye(space.n))

    @classmethod
    def trivial(cls, space: MeasureSpace) -> "Subspace":
        return cls(space, np.zeros((space.n, 0)))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @functools.cached_property
    def std(self) -> np.ndarray:
        return _frozen(self.basis * self.space.sqrt_mu[:, None])

    def vectors(self) -> list[MFunction]:
        return [MFunction(self.space, self.basis[:, j]) for j in range(self.dim)]

    def complement(self) -> "Subspace":
        return Subspace.from_std(self.space, _complete(self.std))

    def projector(self) -> LinOperator:
        return project(self)

    def max_sine_into(self, other: "Subspace") -> float:
        """Largest principal-angle sine between ``self`` and its shadow in ``other``.

        Zero exactly when ``self`` is contained in ``other``.
        """
        _same_space(self.space, other.space)
        if self.dim == 0:
            return 0.0
        q = other.std
        resid = self.std - q @ (q.conj().T @ self.std)
        return float(np.linalg.norm(resid, 2))

    def contained_in(self, other: "Subspace", tol: float | None = None) -> bool:
        tol = tolerances().angle if tol is None else tol
        return self.max_sine_into(other) <= tol

    def same_as(self, other: "Subspace", tol: float | None = None) -> bool:
        return (
            self.dim == other.dim
            and self.contained_in(other, tol)
            and other.contained_in(self, tol)
        )

    def is_invariant(self, S: LinOperator, tol: float | None = None) -> bool:
        """``S V ⊆ V`` up to ``tol * ||S||`` on each basis vector."""
        tol = tolerances().inv if tol is None else tol
        if self.dim == 0:
            return True
        leak = _leak(S, self, self)
        return leak <= tol * max(op_norm(S), np.finfo(float).tiny)


def _leak(S: LinOperator, source: Subspace, target: Subspace) -> float:
    """Largest norm of the component of ``S h`` outside ``target``, h ∈ source basis."""
    img = S.std @ source.std
    q = target.std
    out = img - q @ (q.conj().T @ img)
    return float(np.max(np.linalg.norm(out, axis=0), initial=0.0))


def kernel(A: LinOperator) -> Subspace:
    """Null space of ``A`` with relative pivot threshold ``tol.rank``.

    Pivoted Gram-Schmidt on the (conjugated) rows yields the co-range;
    the kernel is its orthogonal complement, so ``dim ker + rank = n``.
    """
    rows = _pivoted_orth(A.std.conj().T, tolerances().rank)
    return Subspace.from_std(A.space, _complete(rows))


def rank(A: LinOperator) -> int:
    return A.space.n - kernel(A).dim


def project(V: Subspace) -> LinOperator:
    """Orthogonal projection onto ``V``."""
    q = V.std
    return LinOperator.from_std(V.space, q @ q.conj().T)
