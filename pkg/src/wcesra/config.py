"""Numerical tolerances and the membership m-grid.

The active settings live in a context variable so the CLI (or a test) can
override them for a block of code without threading a ``tol`` argument
through every call::

    with override(rank=1e-8):
        kernel(A)

Environment variables with the ``WCESRA_`` prefix (``WCESRA_TOL_RANK``,
``WCESRA_TOL_INV``, ``WCESRA_M_MAX``, ...) seed the defaults via
:func:`from_env`.
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
import os
from dataclasses import dataclass

ENV_PREFIX = "WCESRA_"


@dataclass(frozen=True)
class Tolerances:
    orth: float = 1e-10
    rank: float = 1e-10
    iter: float = 1e-12
    max_iter: int = 10_000
    inv: float = 1e-8
    supp: float = 1e-12
    peak: float = 1e-9
    angle: float = 1e-8
    m_max: int = 2**14
    seed: int = 0

    def m_grid(self) -> tuple[int, ...]:
        """Powers of two from 1 up to ``m_max`` inclusive."""
        grid = []
        m = 1
        while m <= self.m_max:
            grid.append(m)
            m *= 2
        return tuple(grid)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_ENV_FIELDS = {
    "TOL_ORTH": ("orth", float),
    "TOL_RANK": ("rank", float),
    "TOL_ITER": ("iter", float),
    "MAX_ITER": ("max_iter", int),
    "TOL_INV": ("inv", float),
    "TOL_SUPP": ("supp", float),
    "TOL_PEAK": ("peak", float),
    "TOL_ANGLE": ("angle", float),
    "M_MAX": ("m_max", int),
    "SEED": ("seed", int),
}


def from_env(environ=None) -> Tolerances:
    environ = os.environ if environ is None else environ
    kwargs = {}
    for suffix, (name, cast) in _ENV_FIELDS.items():
        raw = environ.get(ENV_PREFIX + suffix)
        if raw is not None:
            kwargs[name] = cast(raw)
    return Tolerances(**kwargs)


_active: contextvars.ContextVar[Tolerances] = contextvars.ContextVar(
    "wcesra_tolerances", default=Tolerances()
)


def tolerances() -> Tolerances:
    return _active.get()


@contextlib.contextmanager
def override(tol: Tolerances | None = None, **changes):
    base = tol if tol is not None else _active.get()
    token = _active.set(dataclasses.replace(base, **changes))
    try:
        yield _active.get()
    finally:
        _active.reset(token)
