"""Random MDP generators: constant out-degree and G(n, p).

Every generator takes either an integer seed or a numpy Generator. Trial k
of an experiment with master seed s draws from the stream
``numpy.random.default_rng([s, k])``, so trials do not depend on the order
in which they run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import PLAYER1, RANDOM, Mdp
from .errors import InputError, SpecError


def make_rng(seed, stream: int | None = None) -> np.random.Generator:
    """Generator for `seed`, or for the counter-derived stream (seed, stream)."""
    if isinstance(seed, np.random.Generator):
        if stream is not None:
            raise InputError("cannot derive a stream from a Generator")
        return seed
    if stream is None:
        return np.random.default_rng(seed)
    return np.random.default_rng([int(seed), int(stream)])


@dataclass(frozen=True)
class DegreeClass:
    degree: int
    count: int
    targets: int


@dataclass(frozen=True)
class DegreeSpec:
    """Constant out-degree model: `count` vertices of each `degree`, of
    which the first `targets` are Büchi vertices.

    Vertex ids are assigned class by class in increasing degree order.
    """

    entries: tuple[DegreeClass, ...]
    n: int = field(default=0)

    def __post_init__(self) -> None:
        entries = tuple(
            e if isinstance(e, DegreeClass) else DegreeClass(*map(int, e)) for e in self.entries
        )
        object.__setattr__(self, "entries", entries)
        total = sum(e.count for e in entries)
        if self.n and self.n != total:
            raise SpecError(f"class sizes sum to {total}, not n={self.n}")
        object.__setattr__(self, "n", total)
        if not entries:
            raise SpecError("at least one degree class is required")
        degrees = [e.degree for e in entries]
        if any(a >= b for a, b in zip(degrees, degrees[1:])):
            raise SpecError("degrees must be strictly increasing")
        if degrees[0] < 2:
            raise SpecError("minimum degree must be at least 2")
        if degrees[-1] >= total:
            raise SpecError(f"maximum degree {degrees[-1]} must be below n={total}")
        for e in entries:
            if e.count < 1:
                raise SpecError(f"degree {e.degree}: class must be non-empty")
            if not 0 <= e.targets <= e.count:
                raise SpecError(f"degree {e.degree}: need 0 <= targets <= count")
        if sum(e.targets for e in entries) < 1:
            raise SpecError("at least one Büchi vertex is required")

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> DegreeSpec:
        """Parse ``d:a:t,d:a:t,...``."""
        entries = []
        for part in text.split(","):
            bits = part.strip().split(":")
            if len(bits) != 3:
                raise SpecError(f"bad degree entry {part!r}; expected d:a:t")
            try:
                entries.append(DegreeClass(*(int(b) for b in bits)))
            except ValueError:
                raise SpecError(f"bad degree entry {part!r}") from None
        return cls(tuple(entries), n or 0)

    def __str__(self) -> str:
        return ",".join(f"{e.degree}:{e.count}:{e.targets}" for e in self.entries)

    @property
    def x(self) -> int:
        return len(self.entries)

    @property
    def t(self) -> int:
        return sum(e.targets for e in self.entries)

    @property
    def d_min(self) -> int:
        return self.entries[0].degree

    @property
    def d_max(self) -> int:
        return self.entries[-1].degree

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(e.degree for e in self.entries)

    @property
    def counts(self) -> tuple[int, ...]:
        return tuple(e.count for e in self.entries)

    @property
    def target_counts(self) -> tuple[int, ...]:
        return tuple(e.targets for e in self.entries)

    def offsets(self) -> list[int]:
        out, start = [], 0
        for e in self.entries:
            out.append(start)
            start += e.count
        return out

    def vertex_degrees(self) -> list[int]:
        return [e.degree for e in self.entries for _ in range(e.count)]

    def buchi(self) -> frozenset[int]:
        return frozenset(
            start + j for start, e in zip(self.offsets(), self.entries) for j in range(e.targets)
        )

    @property
    def model_name(self) -> str:
        return "const-deg"


@dataclass(frozen=True)
class GnpSpec:
    """G(n, p) digraph; kinds and a uniformly placed target set are drawn per sample."""

    n: int
    p: float | Fraction
    player1_prob: float = 0.5
    target_count: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise SpecError("n must be positive")
        if not 0 <= self.p <= 1:
            raise SpecError("p must lie in [0, 1]")
        if not 0 <= self.player1_prob <= 1:
            raise SpecError("player1_prob must lie in [0, 1]")
        if not 1 <= self.target_count <= self.n:
            raise SpecError("target_count must lie in 1..n")

    @classmethod
    def with_log_density(cls, n: int, c: float, **kw) -> GnpSpec:
        """p = c·ln(n)/n (capped at 1)."""
        return cls(n, min(1.0, c * math.log(n) / n), **kw)

    @property
    def model_name(self) -> str:
        return "gnp"

    def __str__(self) -> str:
        return f"n={self.n},p={self.p},player1_prob={self.player1_prob},targets={self.target_count}"


def _distinct_rows(rng: np.random.Generator, rows: int, d: int, n: int) -> np.ndarray:
    """`rows` uniform random d-subsets of range(n), one per row (sorted)."""
    if rows * n <= 1 << 22:
        keys = rng.random((rows, n))
        out = np.argpartition(keys, d - 1, axis=1)[:, :d]
        return np.sort(out, axis=1)
    out = rng.integers(0, n, size=(rows, d))
    while True:
        out.sort(axis=1)
        dup = np.flatnonzero((out[:, 1:] == out[:, :-1]).any(axis=1))
        if dup.size == 0:
            return out
        out[dup] = rng.integers(0, n, size=(dup.size, d))


def sample_neighbours(spec: DegreeSpec, rng: np.random.Generator, count: int = 1) -> np.ndarray:
    """Neighbour ids for `count` graphs as an array of shape (count, Σ a_i·d_i).

    Row layout follows vertex ids: vertex v's d_v neighbours are contiguous
    and in increasing order, so all samples share one offset table.
    """
    blocks = []
    for e in spec.entries:
        rows = _distinct_rows(rng, count * e.count, e.degree, spec.n)
        blocks.append(rows.reshape(count, e.count * e.degree))
    return np.concatenate(blocks, axis=1)


def neighbour_offsets(spec: DegreeSpec) -> np.ndarray:
    return np.concatenate([[0], np.cumsum(spec.vertex_degrees())])


def sample_constant_outdegree(spec: DegreeSpec, seed) -> list[tuple[int, ...]]:
    """Each vertex gets a uniform random d_v-subset of all n vertices
    (itself included), independently of every other vertex."""
    rng = make_rng(seed)
    flat = sample_neighbours(spec, rng, 1)[0].tolist()
    off = neighbour_offsets(spec).tolist()
    return [tuple(flat[off[v] : off[v + 1]]) for v in range(spec.n)]


def sample_gnp(spec: GnpSpec, seed) -> list[tuple[int, ...]]:
    """Each ordered pair u≠v is an edge independently with probability p.

    Drawn as a Binomial(n(n-1), p) edge count followed by a uniform subset
    of that size, which has the same law as independent coin flips.
    """
    rng = make_rng(seed)
    n = spec.n
    pairs = n * (n - 1)
    succ: list[list[int]] = [[] for _ in range(n)]
    if pairs == 0:
        return [tuple(s) for s in succ]
    m = int(rng.binomial(pairs, float(spec.p)))
    pos = np.sort(rng.choice(pairs, size=m, replace=False)) if m else np.empty(0, dtype=np.int64)
    src = pos // (n - 1)
    rem = pos % (n - 1)
    dst = rem + (rem >= src)
    for u, v in zip(src.tolist(), dst.tolist()):
        succ[u].append(v)
    return [tuple(s) for s in succ]


def to_mdp(
    graph: Sequence[Sequence[int]],
    player1_prob: float,
    targets: int | Iterable[int],
    seed,
    validate: bool = True,
) -> Mdp:
    """Attach kinds (player 1 with probability `player1_prob`) and a Büchi set.

    `targets` is either a size, for a uniformly random subset, or an explicit
    set. Vertices without successors get a self-loop. `validate=False` skips
    the Mdp checks for graphs straight from the samplers here.
    """
    rng = make_rng(seed)
    n = len(graph)
    kinds = "".join(
        PLAYER1 if u < player1_prob else RANDOM for u in rng.random(n).tolist()
    )
    if isinstance(targets, int):
        if not 0 <= targets <= n:
            raise InputError(f"cannot pick {targets} targets among {n} vertices")
        buchi = frozenset(rng.choice(n, size=targets, replace=False).tolist())
    else:
        buchi = frozenset(targets)
    succ = tuple(tuple(s) if len(s) else (v,) for v, s in enumerate(graph))
    if not validate:
        return Mdp.unchecked(succ, kinds, buchi)
    return Mdp(succ, kinds, buchi)
