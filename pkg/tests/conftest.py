import numpy as np
import pytest

from wcesra.condexp import Partition
from wcesra.hilbert import MeasureSpace, MFunction
from wcesra.wce import WCEOp

_ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def _wce(weights, blocks, u, w) -> WCEOp:
    space = MeasureSpace(tuple(weights))
    return WCEOp(Partition(space, blocks), MFunction(space, u), MFunction(space, w))


@pytest.fixture
def i1() -> WCEOp:
    return _wce([0.25] * 4, ((0, 1), (2, 3)), [1, 2, 1, 1], [2, 0, 1, 1])


@pytest.fixture
def i2() -> WCEOp:
    return _wce([0.25] * 4, ((0, 1), (2, 3)), [1, -1, 1, 1], [1, 1, 0, 0])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def acceptance():
    """Record one part of an acceptance criterion for the end-of-run summary."""

    def record(criterion: int, part: str, ok: bool, detail: str = "") -> None:
        _ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion in sorted(_ACCEPTANCE):
        parts = _ACCEPTANCE[criterion]
        ok = all(p[1] for p in parts)
        tr.write_line(f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}")
        for part, pok, detail in parts:
            tr.write_line(f"    {'pass' if pok else 'FAIL'}  {part}: {detail}")
