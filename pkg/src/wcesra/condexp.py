"""Sub-sigma-algebras of a finite space and their conditional expectations.

On a finite atomic space every sub-sigma-algebra is generated by a partition
of the atoms, measurable functions are those constant on each block, and the
conditional expectation is the mu-weighted block average.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .config import tolerances
from .errors import UsageError
from .hilbert import LinOperator, MeasureSpace, MFunction, _same_space, multiplication


@dataclass(frozen=True)
class Partition:
    space: MeasureSpace
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = self.space.n
        blocks = []
        seen: set[int] = set()
        for b in self.blocks:
            block = tuple(sorted(int(i) for i in b))
            if not block:
                raise UsageError("partition blocks must be nonempty")
            for i in block:
                if not 0 <= i < n:
                    raise UsageError(f"atom index {i} out of range for {n} atoms")
                if i in seen:
                    raise UsageError(f"atom {i} appears in more than one block")
                seen.add(i)
            blocks.append(block)
        if len(seen) != n:
            missing = sorted(set(range(n)) - seen)
            raise UsageError(f"blocks do not cover atoms {missing}")
        blocks.sort(key=lambda b: b[0])
        object.__setattr__(self, "blocks", tuple(blocks))

    @classmethod
    def trivial(cls, space: MeasureSpace) -> "Partition":
        return cls(space, (tuple(range(space.n)),))

    @classmethod
    def discrete(cls, space: MeasureSpace) -> "Partition":
        return cls(space, tuple((i,) for i in range(space.n)))

    @classmethod
    def from_labels(cls, space: MeasureSpace, labels) -> "Partition":
        groups: dict = {}
        for i, lab in enumerate(labels):
            groups.setdefault(lab, []).append(i)
        return cls(space, tuple(tuple(g) for g in groups.values()))

    @functools.cached_property
    def labels(self) -> np.ndarray:
        """Block index of every atom."""
        lab = np.empty(self.space.n, dtype=int)
        for k, b in enumerate(self.blocks):
            lab[list(b)] = k
        lab.setflags(write=False)
        return lab

    @functools.cached_property
    def block_measure(self) -> np.ndarray:
        return np.bincount(self.labels, weights=self.space.mu)

    def indicator(self, k: int) -> MFunction:
        return MFunction(self.space, (self.labels == k).astype(complex))

    def block_values(self, f: MFunction) -> np.ndarray:
        """Value of an A-measurable function on each block (first atom)."""
        return f.values[[b[0] for b in self.blocks]]

    def lift(self, block_values) -> MFunction:
        """The measurable function taking ``block_values[k]`` on block ``k``."""
        return MFunction(self.space, np.asarray(block_values, dtype=complex)[self.labels])

    def expect(self, f: MFunction) -> MFunction:
        """``E(f)``: weighted block averages, broadcast back to atoms."""
        _same_space(self.space, f.space)
        mu = self.space.mu
        re = np.bincount(self.labels, weights=mu * f.values.real)
        im = np.bincount(self.labels, weights=mu * f.values.imag)
        avg = (re + 1j * im) / self.block_measure
        return MFunction(self.space, avg[self.labels])


def cond_expect(P: Partition) -> LinOperator:
    """Matrix of the conditional expectation onto P-measurable functions."""
    same = P.labels[:, None] == P.labels[None, :]
    mat = np.where(same, P.space.mu[None, :] / P.block_measure[P.labels][:, None], 0.0)
    return LinOperator(P.space, mat)


def is_measurable(P: Partition, f: MFunction) -> bool:
    _same_space(P.space, f.space)
    scale = f.sup()
    if scale == 0.0:
        return True
    spread = np.abs(f.values - P.block_values(f)[P.labels])
    return bool(np.max(spread) <= tolerances().orth * scale)


def refines(Q: Partition, P: Partition) -> bool:
    """True iff every block of ``Q`` lies inside a block of ``P``."""
    _same_space(Q.space, P.space)
    return all(len({int(P.labels[i]) for i in b}) == 1 for b in Q.blocks)


def tower_check(A: Partition, B: Partition, u: MFunction, atol: float = 1e-12) -> bool:
    """Check ``E^A M_u E^B = E^B E^A M_u`` for nested ``A ⊆ B``.

    ``B`` must refine ``A`` and ``u`` must be A-measurable.
    """
    if not refines(B, A):
        raise UsageError("tower check needs the B-partition to refine the A-partition")
    if not is_measurable(A, u):
        raise UsageError("u must be measurable with respect to the coarser algebra")
    ea, eb, mu_ = cond_expect(A), cond_expect(B), multiplication(u)
    lhs = ea @ mu_ @ eb
    rhs = eb @ ea @ mu_
    return bool(np.max(np.abs(lhs.matrix - rhs.matrix)) <= atol)
