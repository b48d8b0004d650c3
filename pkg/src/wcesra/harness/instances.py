"""Instance files and seeded random instances.

An instance file is one JSON document::

    {
      "format": "wcesra-instance/1",
      "weights": [0.25, 0.25, 0.25, 0.25],
      "blocks": [[0, 1], [2, 3]],
      "u": [[1, 0], [2, 0], [1, 0], [1, 0]],
      "w": [[2, 0], [0, 0], [1, 0], [1, 0]],
      "operators": {"S": [[[re, im], ...], ...]},
      "rank_one": {"R": {"x": [...], "y": [...]}}
    }

Complex numbers are ``[re, im]`` pairs (a bare real is accepted on input),
atoms are zero-indexed, and operators are row-major matrices acting on the
value vectors of functions.  ``operators`` and ``rank_one`` are optional.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..condexp import Partition
from ..errors import UsageError
from ..hilbert import LinOperator, MeasureSpace, MFunction
from ..sra import RankOne
from ..wce import WCEOp

FORMAT = "wcesra-instance/1"
PROFILES = ("generic", "homogeneous", "nilpotent", "nonneg", "rank-one")


class InstanceError(UsageError):
    """A malformed or invalid instance, with the offending location."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where
        self.message = message


@dataclass(frozen=True, eq=False)
class Instance:
    space: MeasureSpace
    partition: Partition
    u: MFunction
    w: MFunction
    operators: dict[str, LinOperator] = field(default_factory=dict)
    rank_one: dict[str, RankOne] = field(default_factory=dict)
    profile: str | None = None
    seed: int | None = None

    @property
    def wce(self) -> WCEOp:
        return WCEOp(self.partition, self.u, self.w)

    def operator(self, name: str) -> LinOperator:
        if name in self.operators:
            return self.operators[name]
        if name in self.rank_one:
            return self.rank_one[name].matrix
        if name == "T":
            return self.wce.matrix
        known = sorted(self.operators) + sorted(self.rank_one) + ["T"]
        raise UsageError(f"no operator named {name!r} (known: {', '.join(known)})")

    def to_json(self) -> dict:
        doc = {
            "format": FORMAT,
            "weights": list(self.space.weights),
            "blocks": [list(b) for b in self.partition.blocks],
            "u": _encode_vec(self.u.values),
            "w": _encode_vec(self.w.values),
        }
        if self.operators:
            doc["operators"] = {
                k: [_encode_vec(row) for row in op.matrix] for k, op in sorted(self.operators.items())
            }
        if self.rank_one:
            doc["rank_one"] = {
                k: {"x": _encode_vec(r.x.values), "y": _encode_vec(r.y.values)}
                for k, r in sorted(self.rank_one.items())
            }
        if self.profile is not None:
            doc["profile"] = self.profile
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)

    def digest(self) -> str:
        """sha256 of the canonical (sorted-key, compact) JSON form."""
        canon = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def _encode_vec(values) -> list[list[float]]:
    return [[float(np.real(z)), float(np.imag(z))] for z in values]


def _complex(item, where: str) -> complex:
    if isinstance(item, bool):
        raise InstanceError(where, "expected a number or [re, im] pair")
    if isinstance(item, (int, float)):
        return complex(item)
    if isinstance(item, list) and len(item) == 2 and all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in item
    ):
        return complex(item[0], item[1])
    raise InstanceError(where, "expected a number or [re, im] pair")


def _vector(raw, n: int, where: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise InstanceError(where, "expected a list")
    if len(raw) != n:
        raise InstanceError(where, f"expected {n} entries, found {len(raw)}")
    vals = np.array([_complex(x, f"{where}[{i}]") for i, x in enumerate(raw)], dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise InstanceError(where, "entries must be finite")
    return vals


def _matrix(raw, n: int, where: str) -> np.ndarray:
    if not isinstance(raw, list) or len(raw) != n:
        found = len(raw) if isinstance(raw, list) else type(raw).__name__
        raise InstanceError(where, f"expected {n} rows, found {found}")
    return np.array([_vector(row, n, f"{where}[{i}]") for i, row in enumerate(raw)])


def parse_instance(doc) -> Instance:
    """Validate a decoded JSON document and build an :class:`Instance`."""
    if not isinstance(doc, dict):
        raise InstanceError("$", "top level must be an object")
    fmt = doc.get("format", FORMAT)
    if fmt != FORMAT:
        raise InstanceError("format", f"unsupported format {fmt!r}")
    for key in ("weights", "blocks", "u", "w"):
        if key not in doc:
            raise InstanceError(key, "missing required field")
    weights = doc["weights"]
    if not isinstance(weights, list) or not weights:
        raise InstanceError("weights", "expected a nonempty list")
    for i, x in enumerate(weights):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise InstanceError(f"weights[{i}]", "expected a real number")
        if not x > 0 or not np.isfinite(x):
            raise InstanceError(f"weights[{i}]", "weights must be positive")
    space = MeasureSpace(tuple(weights))
    n = space.n

    blocks = doc["blocks"]
    if not isinstance(blocks, list):
        raise InstanceError("blocks", "expected a list of index lists")
    for k, b in enumerate(blocks):
        if not isinstance(b, list) or not all(
            isinstance(i, int) and not isinstance(i, bool) for i in b
        ):
            raise InstanceError(f"blocks[{k}]", "expected a list of atom indices")
    try:
        partition = Partition(space, tuple(tuple(b) for b in blocks))
    except UsageError as exc:
        raise InstanceError("blocks", str(exc)) from None

    u = MFunction(space, _vector(doc["u"], n, "u"))
    w = MFunction(space, _vector(doc["w"], n, "w"))

    operators = {}
    raw_ops = doc.get("operators", {})
    if not isinstance(raw_ops, dict):
        raise InstanceError("operators", "expected an object of named matrices")
    for name, raw in raw_ops.items():
        operators[name] = LinOperator(space, _matrix(raw, n, f"operators.{name}"))

    rank_ones = {}
    raw_r1 = doc.get("rank_one", {})
    if not isinstance(raw_r1, dict):
        raise InstanceError("rank_one", "expected an object of {x, y} pairs")
    for name, pair in raw_r1.items():
        where = f"rank_one.{name}"
        if not isinstance(pair, dict) or set(pair) != {"x", "y"}:
            raise InstanceError(where, "expected an object with keys x and y")
        rank_ones[name] = RankOne(
            MFunction(space, _vector(pair["x"], n, f"{where}.x")),
            MFunction(space, _vector(pair["y"], n, f"{where}.y")),
        )
    return Instance(
        space,
        partition,
        u,
        w,
        operators,
        rank_ones,
        profile=doc.get("profile"),
        seed=doc.get("seed"),
    )


def loads_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return parse_instance(doc)


def load_instance(path) -> Instance:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(str(path), exc.strerror or "cannot read file") from None
    try:
        return loads_instance(text)
    except InstanceError as exc:
        raise InstanceError(f"{path}: {exc.where}", exc.message) from None


# -- random instances -------------------------------------------------------


def _cnormal(rng: np.random.Generator, size) -> np.ndarray:
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def _random_partition(rng, space: MeasureSpace, n_blocks: int, min_size: int = 1) -> Partition:
    n = space.n
    perm = rng.permutation(n)
    sizes = np.full(n_blocks, min_size)
    for _ in range(n - min_size * n_blocks):
        sizes[rng.integers(n_blocks)] += 1
    cuts = np.cumsum(sizes)[:-1]
    return Partition(space, tuple(tuple(int(i) for i in b) for b in np.split(perm, cuts)))


def _block_inner(mu, a, b) -> complex:
    """``E``-style block average of ``a conj(b)``."""
    return complex(np.sum(mu * a * np.conj(b)) / np.sum(mu))


def _homogeneous_uw(rng, space: MeasureSpace, P: Partition):
    """Per block: ``E|u|^2 = U``, ``E|w|^2 = W`` and ``|E(uw)| = kappa sqrt(UW)``."""
    n = space.n
    U = rng.uniform(0.5, 2.0)
    W = rng.uniform(0.5, 2.0)
    kappa = rng.uniform(0.1, 0.95)
    u = np.zeros(n, dtype=complex)
    w = np.zeros(n, dtype=complex)
    for block in P.blocks:
        idx = list(block)
        mu = space.mu[idx]
        ub = _cnormal(rng, len(idx))
        ub *= np.sqrt(U / _block_inner(mu, ub, ub).real)
        e = np.conj(ub) / np.sqrt(U)
        z = _cnormal(rng, len(idx))
        z -= _block_inner(mu, z, e) * e
        z /= np.sqrt(_block_inner(mu, z, z).real)
        phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
        u[idx] = ub
        w[idx] = np.sqrt(W) * (kappa * phase * e + np.sqrt(1 - kappa**2) * z)
    return u, w


def _nilpotent_w(rng, space: MeasureSpace, P: Partition, u: np.ndarray) -> np.ndarray:
    """Random ``w`` projected per block onto ``sum mu_i u_i w_i = 0``."""
    w = _cnormal(rng, space.n)
    for block in P.blocks:
        idx = list(block)
        a = space.mu[idx] * u[idx]
        w[idx] -= (np.sum(a * w[idx]) / np.sum(np.abs(a) ** 2)) * np.conj(a)
    return w


def gen_instance(
    seed: int,
    profile: str = "generic",
    n_atoms: int | None = None,
    n_blocks: int | None = None,
) -> Instance:
    """Deterministic random instance for ``seed`` and ``profile``.

    ``rank-one`` instances also carry a generic WCE part and one rank-one
    pair ``R`` with unit vectors.
    """
    if profile not in PROFILES:
        raise UsageError(f"unknown profile {profile!r}; choose from {', '.join(PROFILES)}")
    rng = np.random.default_rng(seed)
    min_size = 2 if profile == "homogeneous" else 1
    n = int(rng.integers(2, 11)) if n_atoms is None else int(n_atoms)
    if n < 1:
        raise UsageError("need at least one atom")
    max_blocks = max(1, min(4, n // min_size))
    if profile == "nilpotent" and n > 1:
        # keep one block with two atoms so E(uw) = 0 is feasible
        max_blocks = min(max_blocks, n - 1)
    k = int(rng.integers(1, max_blocks + 1)) if n_blocks is None else int(n_blocks)
    if not 1 <= k <= n // min_size:
        raise UsageError(f"cannot split {n} atoms into {k} blocks for profile {profile}")
    space = MeasureSpace(tuple(rng.uniform(0.1, 1.0, n)))
    P = _random_partition(rng, space, k, min_size)

    if profile == "homogeneous":
        u, w = _homogeneous_uw(rng, space, P)
    elif profile == "nonneg":
        u, w = rng.uniform(0.1, 2.0, n).astype(complex), rng.uniform(0.1, 2.0, n).astype(complex)
    else:
        u = _cnormal(rng, n)
        if profile == "nilpotent":
            if all(len(b) == 1 for b in P.blocks):
                raise UsageError(
                    "nilpotent profile needs a block with two atoms when u is nowhere zero"
                )
            w = _nilpotent_w(rng, space, P, u)
        else:
            w = _cnormal(rng, n)

    rank_ones = {}
    if profile == "rank-one":
        x, y = _cnormal(rng, n), _cnormal(rng, n)
        x /= np.sqrt(np.sum(space.mu * np.abs(x) ** 2))
        y /= np.sqrt(np.sum(space.mu * np.abs(y) ** 2))
        rank_ones["R"] = RankOne(MFunction(space, x), MFunction(space, y))
    return Instance(
        space,
        P,
        MFunction(space, u),
        MFunction(space, w),
        rank_one=rank_ones,
        profile=profile,
        seed=int(seed),
    )
