"""Test operators with a known relation to ``B_T`` and ``Q_T``.

With ``P1``, ``P2`` the projections onto ``H1`` and ``H2 = ker(E M_u)``:

* ``M - P1 M P2`` leaves ``H2`` invariant (a ``B_T`` member),
* ``P2 M P1`` maps ``H1`` into ``H2`` and kills ``H2`` (a ``Q_T`` member),
* ``M P1`` kills ``H2`` but keeps its ``H1`` compression (kernel criterion
  for ``Q_T`` holds, yet ``g(m)`` does not vanish),
* a dense random ``M`` is almost surely in neither.
"""

from __future__ import annotations

import numpy as np

from ..hilbert import LinOperator, MeasureSpace, MFunction, identity, multiplication, rank_one
from ..sra import RankOne, block_decompose
from ..wce import WCEOp, e_mu


def random_matrix(rng: np.random.Generator, space: MeasureSpace) -> LinOperator:
    n = space.n
    return LinOperator(space, rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


def random_function(rng: np.random.Generator, space: MeasureSpace) -> MFunction:
    return MFunction(space, rng.standard_normal(space.n) + 1j * rng.standard_normal(space.n))


def random_measurable(rng, T: WCEOp, nonneg: bool = False) -> MFunction:
    """A random block-constant function (``>= 0`` when ``nonneg``)."""
    k = len(T.partition.blocks)
    if nonneg:
        vals = rng.uniform(0.0, 2.0, k)
    else:
        vals = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return T.partition.lift(vals)


def bt_members(rng, T: WCEOp, count: int) -> list[LinOperator]:
    dec = block_decompose(T)
    out = []
    for _ in range(count):
        M = random_matrix(rng, T.space)
        out.append(M - dec.P1 @ M @ dec.P2)
    return out


def bt_nonmembers(rng, T: WCEOp, count: int) -> list[LinOperator]:
    return [random_matrix(rng, T.space) for _ in range(count)]


def qt_members(rng, T: WCEOp, count: int) -> list[LinOperator]:
    dec = block_decompose(T)
    return [dec.P2 @ random_matrix(rng, T.space) @ dec.P1 for _ in range(count)]


def qt_nonmembers(rng, T: WCEOp, count: int) -> list[LinOperator]:
    """Alternates dense random operators with ``P2 M P2`` (bounded, not vanishing)."""
    dec = block_decompose(T)
    out = []
    for i in range(count):
        M = random_matrix(rng, T.space)
        out.append(M if i % 2 == 0 else dec.P2 @ M @ dec.P2)
    return out


def qt_kernel_only(rng, T: WCEOp, count: int) -> list[LinOperator]:
    """``M P1``: satisfies ``ker(E M_u) ⊆ ker S`` with ``P1 S P1 != 0``."""
    dec = block_decompose(T)
    return [random_matrix(rng, T.space) @ dec.P1 for _ in range(count)]


def commuting_wce(rng, T: WCEOp) -> LinOperator:
    """``M_{a conj(u)} E M_u`` for a random block-constant ``a >= 0``."""
    a = random_measurable(rng, T, nonneg=True)
    return multiplication(a * T.u.conj()) @ e_mu(T)


def rank_one_projector(y: MFunction) -> LinOperator:
    return rank_one(y, y) * (1.0 / np.real(np.sum(y.space.mu * np.abs(y.values) ** 2)))


def rank_one_q_members(rng, op: RankOne, count: int) -> list[LinOperator]:
    """``(I - P) M P`` with ``P`` onto ``span{y}``."""
    P = rank_one_projector(op.y)
    Q = identity(op.space) - P
    return [Q @ random_matrix(rng, op.space) @ P for _ in range(count)]


def rank_one_b_members(rng, op: RankOne, count: int) -> list[LinOperator]:
    """``M - P M (I - P)``: leaves the orthocomplement of ``y`` invariant."""
    P = rank_one_projector(op.y)
    Q = identity(op.space) - P
    out = []
    for _ in range(count):
        M = random_matrix(rng, op.space)
        out.append(M - P @ M @ Q)
    return out
