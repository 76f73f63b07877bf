"""Exact rational recurrences for reachability in random digraphs, with
brute-force enumeration oracles for tiny graphs.

All values are `fractions.Fraction`; nothing in this module rounds.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import CapacityError, InputError
from .models import DegreeSpec

ENUMERATION_LIMIT = 10**7
BRUTE_FORCE_MAX_N = 5


def parse_rational(text: str) -> Fraction:
    """``num/den`` (or an integer) as a Fraction; decimals are rejected."""
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        return Fraction(int(text))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"expected a rational num/den, got {text!r}") from None


def format_rational(value: Fraction, digits: int = 12) -> str:
    return f"{value.numerator}/{value.denominator} ≈ {float(value):.{digits}g}"


def _as_probability(p) -> Fraction:
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise InputError(f"probability {p} outside [0, 1]")
    return p


@lru_cache(maxsize=None)
def _r_np(n: int, p: Fraction) -> Fraction:
    q = 1 - p
    total = Fraction(0)
    for i in range(1, n):
        total += math.comb(n - 1, i - 1) * q ** (i * (n - i)) * _r_np(i, p)
    return 1 - total


def r_np_exact(n: int, p) -> Fraction:
    """Probability that every vertex of G(n, p) reaches a fixed target.

    R(n) = 1 - Σ_{i<n} C(n-1, i-1) (1-p)^{i(n-i)} R(i), with R(1) = 1.
    """
    if n < 1:
        raise InputError("n must be at least 1")
    p = _as_probability(p)
    for i in range(1, n):  # fill the memo bottom-up to keep recursion shallow
        _r_np(i, p)
    return _r_np(n, p)


@lru_cache(maxsize=None)
def _qualifying_by_edge_count(n: int) -> tuple[int, ...]:
    """counts[e] = number of labelled digraphs on n vertices (no loops) with e
    edges in which every vertex reaches vertex 0."""
    m = n * (n - 1)
    if n == 1:
        return (1,)
    graphs = np.arange(1 << m, dtype=np.int64)
    # bits (v*(n-1) + r) encode edge v -> r + (r >= v)
    out = np.zeros((n, graphs.size), dtype=np.int64)
    for v in range(n):
        chunk = (graphs >> (v * (n - 1))) & ((1 << (n - 1)) - 1)
        for r in range(n - 1):
            w = r + (r >= v)
            out[v] |= ((chunk >> r) & 1) << w
    reach = np.ones(graphs.size, dtype=np.int64)
    for _ in range(n - 1):
        for v in range(1, n):
            reach |= ((out[v] & reach) != 0).astype(np.int64) << v
    ok = reach == (1 << n) - 1
    edges = np.zeros(graphs.size, dtype=np.int64)
    for b in range(m):
        edges += (graphs >> b) & 1
    return tuple(np.bincount(edges[ok], minlength=m + 1).tolist())


def brute_force_r_np(n: int, p, target: int = 0) -> Fraction:
    """R(n, p) by summing p^e (1-p)^{n(n-1)-e} over every labelled digraph
    in which all vertices reach the target. The target label is immaterial
    by symmetry; vertex 0 is used."""
    if n < 1:
        raise InputError("n must be at least 1")
    if not 0 <= target < n:
        raise InputError("target out of range")
    if n > BRUTE_FORCE_MAX_N:
        raise CapacityError(f"2^{n * (n - 1)} digraphs is beyond the enumeration guard")
    p = _as_probability(p)
    m = n * (n - 1)
    counts = _qualifying_by_edge_count(n)
    return sum(
        (c * p**e * (1 - p) ** (m - e) for e, c in enumerate(counts) if c), Fraction(0)
    )


def t_term(n: int, p, i: int) -> Fraction:
    """C(n-1, i-1)·(1-p)^{i(n-i)} for 1 <= i <= n-1."""
    if not 1 <= i <= n - 1:
        raise InputError(f"t_i needs 1 <= i <= n-1, got i={i}, n={n}")
    p = _as_probability(p)
    return math.comb(n - 1, i - 1) * (1 - p) ** (i * (n - i))


def g_term(n: int, p, i: int) -> Fraction:
    """C(n, i)·(1-p)^{i(n-i)} for 1 <= i <= n/2; equals t_i + t_{n-i}."""
    if not 1 <= i <= n // 2:
        raise InputError(f"g_i needs 1 <= i <= n/2, got i={i}, n={n}")
    p = _as_probability(p)
    return math.comb(n, i) * (1 - p) ** (i * (n - i))


def compositions(spec: DegreeSpec, k: int) -> Iterator[tuple[int, ...]]:
    """Per-class counts (k_1..k_x) with t_i <= k_i <= a_i summing to k."""
    ranges = [range(e.targets, e.count + 1) for e in spec.entries]
    for comp in itertools.product(*ranges):
        if sum(comp) == k:
            yield comp


def _check_composition(spec: DegreeSpec, comp) -> tuple[int, ...]:
    comp = tuple(int(c) for c in comp)
    if len(comp) != spec.x:
        raise InputError(f"composition has {len(comp)} parts, spec has {spec.x} classes")
    for c, e in zip(comp, spec.entries):
        if not e.targets <= c <= e.count:
            raise InputError(f"k_i={c} outside [{e.targets}, {e.count}] for degree {e.degree}")
    return comp


def canonical_set(spec: DegreeSpec, comp) -> list[int]:
    """First k_i ids of each class; contains the canonical Büchi vertices."""
    comp = _check_composition(spec, comp)
    return [start + j for start, k in zip(spec.offsets(), comp) for j in range(k)]


def _reach_mask(out_masks, target_mask: int, n: int) -> int:
    reach = target_mask
    while True:
        grown = reach
        for v in range(n):
            if not grown >> v & 1 and out_masks[v] & grown:
                grown |= 1 << v
        if grown == reach:
            return reach
        reach = grown


def r_multi_exact(spec: DegreeSpec, comp, limit: int = ENUMERATION_LIMIT) -> Fraction:
    """Probability that every vertex of the canonical set S with composition
    `comp` reaches B through S, by enumerating the neighbour sets of the
    non-target vertices of S (Büchi vertices need no path)."""
    members = canonical_set(spec, comp)
    degrees = spec.vertex_degrees()
    buchi = spec.buchi()
    free = [v for v in members if v not in buchi]
    total = math.prod(math.comb(spec.n, degrees[v]) for v in free)
    if total > limit:
        raise CapacityError(f"{total} joint neighbour choices exceed the guard {limit}")
    n = spec.n
    in_s = sum(1 << v for v in members)
    b_mask = sum(1 << b for b in buchi)
    want = b_mask | sum(1 << v for v in free)
    options = [
        [sum(1 << w for w in c) & in_s for c in itertools.combinations(range(n), degrees[v])]
        for v in free
    ]
    out = [0] * n
    good = 0
    for choice in itertools.product(*options):
        for v, mask in zip(free, choice):
            out[v] = mask
        if _reach_mask(out, b_mask, n) == want:
            good += 1
    return Fraction(good, total)


def alpha_term(spec: DegreeSpec, comp, limit: int = ENUMERATION_LIMIT) -> Fraction:
    """a_{k_1..k_x}: probability that the canonical-shaped set is the reverse
    reachable set, times the number of such sets."""
    comp = _check_composition(spec, comp)
    n, k = spec.n, sum(comp)
    value = Fraction(1)
    for e, ki in zip(spec.entries, comp):
        outside = e.count - ki
        value *= math.comb(e.count - e.targets, ki - e.targets)
        # a class entirely inside S contributes 1 (0^0 convention)
        value *= Fraction(math.comb(n - k, e.degree), math.comb(n, e.degree)) ** outside
    if value == 0:
        return value
    return value * r_multi_exact(spec, comp, limit)


def alpha_k_exact(spec: DegreeSpec, k: int, limit: int = ENUMERATION_LIMIT) -> Fraction:
    """Probability that the reverse reachable set of B has exactly k vertices,
    summed over compositions of k."""
    if not 0 <= k <= spec.n:
        raise InputError(f"k={k} outside 0..{spec.n}")
    return sum((alpha_term(spec, c, limit) for c in compositions(spec, k)), Fraction(0))


def alpha_enumerated(spec: DegreeSpec, limit: int = ENUMERATION_LIMIT) -> dict[int, Fraction]:
    """Distribution of the reverse-reachable-set size over every graph of the
    model, each equally likely."""
    degrees = spec.vertex_degrees()
    n = spec.n
    total = math.prod(math.comb(n, d) for d in degrees)
    if total > limit:
        raise CapacityError(f"{total} graphs exceed the enumeration guard {limit}")
    per_degree = {
        d: [sum(1 << w for w in c) for c in itertools.combinations(range(n), d)]
        for d in set(degrees)
    }
    b_mask = sum(1 << b for b in spec.buchi())
    hist = [0] * (n + 1)
    for out in itertools.product(*(per_degree[d] for d in degrees)):
        hist[bin(_reach_mask(out, b_mask, n)).count("1")] += 1
    return {k: Fraction(c, total) for k, c in enumerate(hist) if c}


def verify_eq1(spec: DegreeSpec, limit: int = ENUMERATION_LIMIT) -> bool:
    """Σ_k α_k = 1 exactly, and formula α_k equals the enumerated mass for every k."""
    formula = {k: alpha_k_exact(spec, k, limit) for k in range(spec.t, spec.n + 1)}
    if sum(formula.values()) != 1:
        return False
    counted = alpha_enumerated(spec, limit)
    return all(formula.get(k, Fraction(0)) == counted.get(k, Fraction(0)) for k in range(spec.n + 1))
