"""MDP graphs, reachability, random attractors and the classical Büchi algorithm.

Only the graph of an MDP matters for qualitative analysis, so an `Mdp`
stores successor lists, a per-vertex kind tag and the Büchi set; no
transition probabilities are kept.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, InputError, ParseError

PLAYER1 = "P"
RANDOM = "R"

Graph = Sequence[Sequence[int]]

ORACLE_LIMIT = 10**7


@dataclass(frozen=True)
class Mdp:
    """Directed graph with a player-1/random partition and a Büchi set.

    `succ[v]` lists the out-neighbours of v (no duplicates, at least one),
    `kinds[v]` is ``"P"`` or ``"R"``.
    """

    succ: tuple[tuple[int, ...], ...]
    kinds: str
    buchi: frozenset[int]

    def __post_init__(self) -> None:
        n = len(self.succ)
        lens = np.fromiter(map(len, self.succ), dtype=np.int64, count=n)
        flat = np.fromiter(
            itertools.chain.from_iterable(self.succ), dtype=np.int64, count=int(lens.sum())
        )
        kinds = "".join(self.kinds)
        if len(kinds) != n:
            raise InputError(f"{len(kinds)} kind tags for {n} vertices")
        for v, kind in enumerate(kinds):
            if kind not in (PLAYER1, RANDOM):
                raise InputError(f"vertex {v}: unknown kind {kind!r}")
        empty = np.flatnonzero(lens == 0)
        if empty.size:
            raise InputError(f"vertex {empty[0]} has no outgoing edge")
        src = np.repeat(np.arange(n, dtype=np.int64), lens)
        bad = np.flatnonzero((flat < 0) | (flat >= n))
        if bad.size:
            raise InputError(f"edge {src[bad[0]]}->{flat[bad[0]]} leaves the vertex range")
        keys = np.sort(src * n + flat)
        dup = np.flatnonzero(keys[1:] == keys[:-1])
        if dup.size:
            raise InputError(f"vertex {keys[dup[0]] // n} has duplicate successors")
        ends = np.cumsum(lens).tolist()
        values = flat.tolist()
        succ = tuple(tuple(values[a:b]) for a, b in zip([0] + ends, ends))
        object.__setattr__(self, "succ", succ)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "buchi", frozenset(int(b) for b in self.buchi))
        for b in self.buchi:
            if not 0 <= b < n:
                raise InputError(f"Büchi vertex {b} out of range")

    @classmethod
    def unchecked(cls, succ, kinds: str, buchi: frozenset[int]) -> Mdp:
        """Build without validation; for generators that guarantee the invariants."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "succ", succ)
        object.__setattr__(obj, "kinds", kinds)
        object.__setattr__(obj, "buchi", buchi)
        return obj

    @property
    def n(self) -> int:
        return len(self.succ)

    @property
    def edge_count(self) -> int:
        return sum(len(s) for s in self.succ)

    @cached_property
    def preds(self) -> tuple[list[int], ...]:
        return predecessors(self.succ)

    def is_random(self, v: int) -> bool:
        return self.kinds[v] == RANDOM


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one run of the classical algorithm.

    `removals[i]` is the attractor deleted at iteration i+1; the last
    iteration deletes nothing, so ``len(removals) == iterations - 1``.
    `reach_sizes[i]` is |Z| at iteration i+1 and `work` counts edge scans.
    """

    winning: frozenset[int]
    iterations: int
    removals: tuple[frozenset[int], ...]
    work: int
    reach_sizes: tuple[int, ...]


def predecessors(succ: Graph) -> tuple[list[int], ...]:
    """Predecessor lists; sources appear in increasing order."""
    preds: tuple[list[int], ...] = tuple([] for _ in range(len(succ)))
    for v, s in enumerate(succ):
        for w in s:
            preds[w].append(v)
    return preds


def _check_ids(ids: Iterable[int], n: int, what: str) -> list[int]:
    out = []
    for v in ids:
        if not 0 <= v < n:
            raise InputError(f"{what} vertex {v} out of range 0..{n - 1}")
        out.append(v)
    return out


def _alive_mask(alive: Iterable[int] | None, n: int) -> bytearray:
    if alive is None:
        return bytearray(b"\x01") * n
    mask = bytearray(n)
    for v in _check_ids(alive, n, "alive"):
        mask[v] = 1
    return mask


def _backward_bfs(preds, targets: Iterable[int], alive: bytearray):
    """Backward BFS from `targets` inside `alive`; returns (order, seen, work)."""
    seen = bytearray(len(alive))
    order = []
    for t in targets:
        if alive[t] and not seen[t]:
            seen[t] = 1
            order.append(t)
    work = 0
    i = 0
    while i < len(order):
        pv = preds[order[i]]
        i += 1
        work += len(pv)
        for u in pv:
            if alive[u] and not seen[u]:
                seen[u] = 1
                order.append(u)
    return order, seen, work


def _attract(preds, kinds: str, alive: bytearray, count: list[int], seeds: list[int]):
    """Random attractor of `seeds` inside `alive`.

    `count[v]` must hold the number of alive successors of v that are not
    yet attracted; it is decremented in place. Returns (members, work).
    """
    inside = bytearray(len(alive))
    for v in seeds:
        inside[v] = 1
    queue = list(seeds)
    work = 0
    i = 0
    while i < len(queue):
        pw = preds[queue[i]]
        i += 1
        work += len(pw)
        for u in pw:
            if alive[u] and not inside[u]:
                if kinds[u] == RANDOM:
                    inside[u] = 1
                    queue.append(u)
                else:
                    count[u] -= 1
                    if count[u] == 0:
                        inside[u] = 1
                        queue.append(u)
    return queue, work


def reverse_reachable(
    graph: Mdp | Graph, targets: Iterable[int], alive: Iterable[int] | None = None
) -> frozenset[int]:
    """Vertices of `alive` with a path inside `alive` to some target."""
    if isinstance(graph, Mdp):
        n, preds = graph.n, graph.preds
    else:
        n, preds = len(graph), predecessors(graph)
    mask = _alive_mask(alive, n)
    targets = _check_ids(targets, n, "target")
    if any(not mask[t] for t in targets):
        raise InputError("targets must lie inside the alive set")
    order, _, _ = _backward_bfs(preds, targets, mask)
    return frozenset(order)


def random_attractor(
    mdp: Mdp, u: Iterable[int], alive: Iterable[int] | None = None
) -> frozenset[int]:
    """Least set containing `u` that absorbs random vertices with an edge
    into it and player-1 vertices with all (alive) successors in it."""
    mask = _alive_mask(alive, mdp.n)
    seeds = sorted(set(_check_ids(u, mdp.n, "attractor")))
    if any(not mask[v] for v in seeds):
        raise InputError("attractor seed must lie inside the alive set")
    count = [sum(mask[w] for w in s) for s in mdp.succ]
    inside = set(seeds)
    # player-1 vertices with no alive successor satisfy the rule vacuously
    for v in range(mdp.n):
        if mask[v] and v not in inside and mdp.kinds[v] == PLAYER1 and count[v] == 0:
            inside.add(v)
            seeds.append(v)
    members, _ = _attract(mdp.preds, mdp.kinds, mask, count, seeds)
    return frozenset(members)


def classical_buchi(mdp: Mdp) -> SolveResult:
    """Almost-sure winning set by repeated reachability and attractor removal.

    Each iteration computes the vertices Z that reach B inside the current
    graph; if Z covers the graph it is returned, otherwise the random
    attractor of the complement is deleted. A graph emptied by deletion
    ends with one more (empty) reachability pass and winning = ∅.
    """
    n = mdp.n
    preds, kinds = mdp.preds, mdp.kinds
    buchi = sorted(mdp.buchi)
    alive = bytearray(b"\x01") * n
    count = [len(s) for s in mdp.succ]
    alive_count = n
    removals = []
    reach_sizes = []
    work = 0
    while True:
        order, seen, w = _backward_bfs(preds, buchi, alive)
        work += w
        reach_sizes.append(len(order))
        if len(order) == alive_count:
            return SolveResult(
                frozenset(order), len(reach_sizes), tuple(removals), work, tuple(reach_sizes)
            )
        rest = [v for v in range(n) if alive[v] and not seen[v]]
        members, w = _attract(preds, kinds, alive, count, rest)
        work += w
        for v in members:
            alive[v] = 0
        alive_count -= len(members)
        removals.append(frozenset(members))


def bsccs(graph: Graph, alive: Iterable[int] | None = None) -> list[frozenset[int]]:
    """Bottom strongly connected components of `graph` restricted to `alive`.

    Iterative Tarjan; components are returned in the order Tarjan closes them.
    """
    n = len(graph)
    mask = _alive_mask(alive, n)
    index = [-1] * n
    low = [0] * n
    on_stack = bytearray(n)
    stack: list[int] = []
    comp_of = [-1] * n
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if not mask[root] or index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = 1
        while work:
            v, i = work[-1]
            succ = graph[v]
            if i < len(succ):
                work[-1] = (v, i + 1)
                w = succ[i]
                if not mask[w]:
                    continue
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = 1
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = 0
                    comp_of[w] = len(comps)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    bottom = []
    for c, comp in enumerate(comps):
        if all(comp_of[w] == c for v in comp for w in graph[v] if mask[w]):
            bottom.append(frozenset(comp))
    return bottom


def _forward_closure(graph: Graph) -> list[int]:
    """reach[v] as a bitmask of vertices reachable from v (v included)."""
    n = len(graph)
    reach = [0] * n
    for v in range(n):
        seen = 1 << v
        frontier = [v]
        while frontier:
            u = frontier.pop()
            for w in graph[u]:
                bit = 1 << w
                if not seen & bit:
                    seen |= bit
                    frontier.append(w)
        reach[v] = seen
    return reach


def _strategies(mdp: Mdp) -> tuple[list[int], list[tuple[int, ...]]]:
    p1 = [v for v in range(mdp.n) if mdp.kinds[v] == PLAYER1]
    return p1, [mdp.succ[v] for v in p1]


def _chain_data(succ, p1, choice):
    chain = list(succ)
    for v, w in zip(p1, choice):
        chain[v] = (w,)
    reach = _forward_closure(chain)
    bottoms = [sum(1 << v for v in comp) for comp in bsccs(chain)]
    return tuple(reach), tuple(bottoms)


@lru_cache(maxsize=1 << 16)
def _cached_chains(succ, kinds):
    p1 = [v for v, k in enumerate(kinds) if k == PLAYER1]
    return tuple(
        _chain_data(succ, p1, choice)
        for choice in itertools.product(*(succ[v] for v in p1))
    )


def strategy_count(mdp: Mdp) -> int:
    return math.prod(len(mdp.succ[v]) for v in range(mdp.n) if mdp.kinds[v] == PLAYER1)


def oracle_almost_sure(mdp: Mdp, limit: int = ORACLE_LIMIT) -> frozenset[int]:
    """Almost-sure winning set by brute force over pure memoryless strategies.

    Under a fixed strategy the MDP is a Markov chain, and Büchi holds
    with probability one from v iff every bottom SCC reachable from v
    meets B. A vertex wins iff some strategy makes it win. Strategies are
    enumerated lexicographically by vertex id, then successor rank.
    """
    total = strategy_count(mdp)
    if total > limit:
        raise CapacityError(f"{total} player-1 strategies exceed the oracle limit {limit}")
    if total <= 256:
        chains = _cached_chains(mdp.succ, mdp.kinds)
    else:
        p1, options = _strategies(mdp)
        chains = (_chain_data(mdp.succ, p1, c) for c in itertools.product(*options))
    bmask = sum(1 << b for b in mdp.buchi)
    full = (1 << mdp.n) - 1
    won = 0
    for reach, bottoms in chains:
        bad = 0
        for comp in bottoms:
            if not comp & bmask:
                bad |= comp
        for v, r in enumerate(reach):
            if not r & bad:
                won |= 1 << v
        if won == full:
            break
    return frozenset(v for v in range(mdp.n) if won >> v & 1)


def gen_worst_case(stages: int) -> Mdp:
    """Gadget on which the classical algorithm needs stages+1 iterations.

    Vertex 0 is the Büchi sink b. Stage i owns u_i=3i-2, c_i=3i-1 (player 1)
    and r_i=3i (random) with u_i→{c_i, r_{i-1}}, c_i→{u_i, r_{i-1}} and
    r_i→{u_i, b}; stage 1 has no r_0 edges. Iteration i deletes stage i.
    """
    if stages < 1:
        raise InputError("stages must be at least 1")
    n = 3 * stages + 1
    succ: list[tuple[int, ...]] = [()] * n
    kinds = [PLAYER1] * n
    succ[0] = (0,)
    for i in range(1, stages + 1):
        u, c, r = 3 * i - 2, 3 * i - 1, 3 * i
        prev = (3 * (i - 1),) if i > 1 else ()
        succ[u] = (c,) + prev
        succ[c] = (u,) + prev
        succ[r] = (u, 0)
        kinds[r] = RANDOM
    return Mdp(tuple(succ), "".join(kinds), frozenset({0}))


def format_mdp(mdp: Mdp, comments: Sequence[str] = ()) -> str:
    """Serialise to the line format ``id kind buchi k succ_1 .. succ_k``."""
    lines = [f"# {c}" for c in comments]
    lines.append(str(mdp.n))
    for v, s in enumerate(mdp.succ):
        flag = 1 if v in mdp.buchi else 0
        lines.append(" ".join(map(str, (v, mdp.kinds[v], flag, len(s), *s))))
    return "\n".join(lines) + "\n"


def parse_mdp(text: str) -> Mdp:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line.split()))
    if not rows:
        raise ParseError("empty input")
    lineno, head = rows[0]
    if len(head) != 1:
        raise ParseError("first line must hold the vertex count", lineno)
    try:
        n = int(head[0])
    except ValueError:
        raise ParseError(f"bad vertex count {head[0]!r}", lineno) from None
    if n < 1:
        raise ParseError("vertex count must be positive", lineno)
    if len(rows) - 1 != n:
        raise ParseError(f"expected {n} vertex lines, found {len(rows) - 1}", rows[-1][0])
    succ: list[tuple[int, ...] | None] = [None] * n
    kinds = [""] * n
    buchi = set()
    for lineno, fields in rows[1:]:
        if len(fields) < 4:
            raise ParseError("expected 'id kind buchi count succ...'", lineno)
        try:
            v, flag, k = int(fields[0]), int(fields[2]), int(fields[3])
            targets = tuple(int(f) for f in fields[4:])
        except ValueError:
            raise ParseError("non-integer field", lineno) from None
        if not 0 <= v < n:
            raise ParseError(f"vertex id {v} out of range", lineno)
        if succ[v] is not None:
            raise ParseError(f"vertex {v} defined twice", lineno)
        if fields[1] not in (PLAYER1, RANDOM):
            raise ParseError(f"unknown kind {fields[1]!r} (expected P or R)", lineno)
        if flag not in (0, 1):
            raise ParseError(f"Büchi flag must be 0 or 1, got {flag}", lineno)
        if k != len(targets) or k < 1:
            raise ParseError(f"successor count {k} does not match {len(targets)} ids", lineno)
        for w in targets:
            if not 0 <= w < n:
                raise ParseError(f"successor {w} out of range", lineno)
        if len(set(targets)) != k:
            raise ParseError("duplicate successor", lineno)
        succ[v] = targets
        kinds[v] = fields[1]
        if flag:
            buchi.add(v)
    return Mdp(tuple(succ), "".join(kinds), frozenset(buchi))  # type: ignore[arg-type]
