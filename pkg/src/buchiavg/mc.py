"""Seeded Monte Carlo harness: per-trial records, mergeable summaries,
size-distribution estimates and work-scaling fits."""

from __future__ import annotations

import csv
import io
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence, TextIO, Union

import numpy as np
from scipy import stats

from .core import Mdp, classical_buchi, gen_worst_case, reverse_reachable
from .errors import InputError
from .models import (
    DegreeSpec,
    GnpSpec,
    make_rng,
    neighbour_offsets,
    sample_constant_outdegree,
    sample_gnp,
    sample_neighbours,
    to_mdp,
)

CSV_FIELDS = (
    "trial", "model", "n", "param", "seed_stream",
    "size_s", "iterations", "removed", "work", "wall_ns",
)
DEFAULT_PLAYER1_PROB = 0.5
SMALL_SET_FACTOR = 30.0
BLOCK = 4096


@dataclass(frozen=True)
class WorstCaseSpec:
    """The deterministic gadget family; every trial is the same MDP."""

    stages: int

    def __post_init__(self) -> None:
        if self.stages < 1:
            raise InputError("stages must be at least 1")

    @property
    def n(self) -> int:
        return 3 * self.stages + 1

    @property
    def model_name(self) -> str:
        return "worst-case"

    def __str__(self) -> str:
        return f"stages={self.stages}"


ModelSpec = Union[DegreeSpec, GnpSpec, WorstCaseSpec]


def describe(spec: ModelSpec) -> str:
    if isinstance(spec, GnpSpec):
        return f"p={spec.p}"
    return str(spec)


def sample_mdp(spec: ModelSpec, seed: int, stream: int, player1_prob: float | None = None) -> Mdp:
    """Draw the MDP for trial `stream` of an experiment with master `seed`."""
    if isinstance(spec, WorstCaseSpec):
        return gen_worst_case(spec.stages)
    rng = make_rng(seed, stream)
    if isinstance(spec, DegreeSpec):
        prob = DEFAULT_PLAYER1_PROB if player1_prob is None else player1_prob
        return to_mdp(sample_constant_outdegree(spec, rng), prob, spec.buchi(), rng, validate=False)
    if isinstance(spec, GnpSpec):
        prob = spec.player1_prob if player1_prob is None else player1_prob
        return to_mdp(sample_gnp(spec, rng), prob, spec.target_count, rng, validate=False)
    raise InputError(f"unknown model spec {spec!r}")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    model: str
    n: int
    param: str
    seed_stream: str
    size_s: int
    iterations: int
    removed: int
    work: int
    wall_ns: int = field(compare=False)
    edges: int = field(default=0, compare=False)

    def row(self) -> list:
        return [getattr(self, f) for f in CSV_FIELDS]


def run_trial(
    spec: ModelSpec, seed: int, trial: int, player1_prob: float | None = None
) -> TrialRecord:
    mdp = sample_mdp(spec, seed, trial, player1_prob)
    start = time.perf_counter_ns()
    res = classical_buchi(mdp)
    wall = time.perf_counter_ns() - start
    return TrialRecord(
        trial=trial,
        model=spec.model_name,
        n=mdp.n,
        param=describe(spec),
        seed_stream=f"{seed}:{trial}",
        size_s=res.reach_sizes[0],
        iterations=res.iterations,
        removed=mdp.n - len(res.winning),
        work=res.work,
        wall_ns=wall,
        edges=mdp.edge_count,
    )


@dataclass
class ExperimentSummary:
    """Order-independent accumulator over trial records.

    Only integer (or exact rational) sums are stored, so merging is exactly
    associative and commutative.
    """

    trials: int = 0
    iter_sum: int = 0
    iter_sq: int = 0
    multi_iteration: int = 0
    work_sum: int = 0
    work_sq: int = 0
    work_per_vertex: Fraction = Fraction(0)
    wall_ns_sum: int = 0
    sizes: Counter = field(default_factory=Counter)

    def add(self, rec: TrialRecord) -> None:
        self.trials += 1
        self.iter_sum += rec.iterations
        self.iter_sq += rec.iterations**2
        self.multi_iteration += rec.iterations > 1
        self.work_sum += rec.work
        self.work_sq += rec.work**2
        self.work_per_vertex += Fraction(rec.work, rec.n)
        self.wall_ns_sum += rec.wall_ns
        self.sizes[rec.size_s] += 1

    def merge(self, other: ExperimentSummary) -> ExperimentSummary:
        return ExperimentSummary(
            self.trials + other.trials,
            self.iter_sum + other.iter_sum,
            self.iter_sq + other.iter_sq,
            self.multi_iteration + other.multi_iteration,
            self.work_sum + other.work_sum,
            self.work_sq + other.work_sq,
            self.work_per_vertex + other.work_per_vertex,
            self.wall_ns_sum + other.wall_ns_sum,
            self.sizes + other.sizes,
        )

    @classmethod
    def of(cls, records: Iterable[TrialRecord]) -> ExperimentSummary:
        out = cls()
        for r in records:
            out.add(r)
        return out

    def _mean_var(self, total: int, squares: int) -> tuple[float, float]:
        if self.trials == 0:
            return math.nan, math.nan
        mean = Fraction(total, self.trials)
        if self.trials < 2:
            return float(mean), 0.0
        var = (Fraction(squares) - self.trials * mean * mean) / (self.trials - 1)
        return float(mean), float(var)

    @property
    def mean_iterations(self) -> float:
        return self._mean_var(self.iter_sum, self.iter_sq)[0]

    @property
    def var_iterations(self) -> float:
        return self._mean_var(self.iter_sum, self.iter_sq)[1]

    @property
    def mean_work(self) -> float:
        return self._mean_var(self.work_sum, self.work_sq)[0]

    @property
    def mean_work_per_vertex(self) -> float:
        return float(self.work_per_vertex / self.trials) if self.trials else math.nan

    @property
    def fraction_multi_iteration(self) -> float:
        return self.multi_iteration / self.trials if self.trials else math.nan

    def iterations_ci(self, level: float = 0.95) -> tuple[float, float]:
        mean, var = self._mean_var(self.iter_sum, self.iter_sq)
        half = stats.norm.ppf(0.5 + level / 2) * math.sqrt(var / max(self.trials, 1))
        return mean - half, mean + half

    def multi_iteration_ci(self, level: float = 0.95) -> tuple[float, float]:
        p = self.fraction_multi_iteration
        half = stats.norm.ppf(0.5 + level / 2) * math.sqrt(p * (1 - p) / max(self.trials, 1))
        return max(0.0, p - half), min(1.0, p + half)

    def size_distribution(self) -> dict[int, float]:
        return {k: c / self.trials for k, c in sorted(self.sizes.items())}

    def report(self) -> str:
        lo, hi = self.iterations_ci()
        plo, phi = self.multi_iteration_ci()
        lines = [
            f"trials = {self.trials}",
            f"mean_iterations = {self.mean_iterations:.6g}",
            f"var_iterations = {self.var_iterations:.6g}",
            f"iterations_ci95 = [{lo:.6g}, {hi:.6g}]",
            f"fraction_multi_iteration = {self.fraction_multi_iteration:.6g}",
            f"fraction_multi_iteration_ci95 = [{plo:.6g}, {phi:.6g}]",
            f"mean_work = {self.mean_work:.6g}",
            f"mean_work_per_vertex = {self.mean_work_per_vertex:.6g}",
            f"mean_wall_ms = {self.wall_ns_sum / max(self.trials, 1) / 1e6:.6g}",
            "size_histogram = "
            + " ".join(f"{k}:{c}" for k, c in sorted(self.sizes.items())),
        ]
        return "\n".join(lines)


def _run_chunk(args) -> list[TrialRecord]:
    spec, seed, indices, player1_prob = args
    return [run_trial(spec, seed, k, player1_prob) for k in indices]


def run_experiment(
    spec: ModelSpec,
    trials: int,
    seed: int,
    jobs: int = 1,
    player1_prob: float | None = None,
) -> tuple[ExperimentSummary, list[TrialRecord]]:
    """Run `trials` independent trials; records come back sorted by index."""
    if trials < 1:
        raise InputError("trials must be at least 1")
    if jobs <= 1:
        records = _run_chunk((spec, seed, range(trials), player1_prob))
    else:
        chunks = [range(j, trials, jobs) for j in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_run_chunk, [(spec, seed, c, player1_prob) for c in chunks])
            records = sorted((r for part in parts for r in part), key=lambda r: r.trial)
    return ExperimentSummary.of(records), records


def write_csv(
    records: Sequence[TrialRecord], out: TextIO, seed: int, spec: ModelSpec, extra: Sequence[str] = ()
) -> None:
    out.write(f"# master_seed: {seed}\n# model: {spec.model_name} {spec}\n")
    for line in extra:
        out.write(f"# {line}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow(r.row())


def read_csv(text: str) -> list[TrialRecord]:
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    out = []
    for row in csv.DictReader(io.StringIO(body)):
        ints = {k: int(row[k]) for k in CSV_FIELDS if k not in ("model", "param", "seed_stream")}
        out.append(TrialRecord(model=row["model"], param=row["param"], seed_stream=row["seed_stream"], **ints))
    return out


# ------------------------------------------------------- size distribution


@dataclass
class SizeDistribution:
    """Empirical law of the reverse-reachable-set size."""

    n: int
    x: int
    trials: int
    counts: dict[int, int]

    def alpha_hat(self, k: int) -> float:
        return self.counts.get(k, 0) / self.trials

    def standard_error(self, k: int) -> float:
        p = self.alpha_hat(k)
        return math.sqrt(p * (1 - p) / self.trials)

    def clopper_pearson(self, k: int, level: float = 0.95) -> tuple[float, float]:
        c, m = self.counts.get(k, 0), self.trials
        a = 1 - level
        lo = 0.0 if c == 0 else float(stats.beta.ppf(a / 2, c, m - c + 1))
        hi = 1.0 if c == m else float(stats.beta.ppf(1 - a / 2, c + 1, m - c))
        return lo, hi

    @property
    def middle_range(self) -> tuple[float, int]:
        return SMALL_SET_FACTOR * self.x * math.log(self.n), self.n - 1

    @property
    def middle_mass(self) -> float:
        lo, hi = self.middle_range
        return sum(c for k, c in self.counts.items() if lo <= k <= hi) / self.trials

    @property
    def flagged(self) -> bool:
        return self.middle_mass > 0

    def as_dict(self) -> dict[int, float]:
        return {k: c / self.trials for k, c in sorted(self.counts.items())}


def _popcount(values: np.ndarray, bits: int) -> np.ndarray:
    out = np.zeros(values.shape, dtype=np.int64)
    for b in range(bits):
        out += (values >> b) & 1
    return out


def _bitmask_sizes(spec: DegreeSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """Reverse-reachable-set sizes for `count` graphs, all vertices as bits of an int64."""
    n = spec.n
    nbrs = sample_neighbours(spec, rng, count)
    off = neighbour_offsets(spec)
    one = np.int64(1)
    out = np.zeros((n, count), dtype=np.int64)
    for v in range(n):
        for col in range(off[v], off[v + 1]):
            out[v] |= one << nbrs[:, col].astype(np.int64)
    reach = np.full(count, sum(1 << b for b in spec.buchi()), dtype=np.int64)
    while True:
        grown = reach.copy()
        for v in range(n):
            grown |= ((out[v] & grown) != 0).astype(np.int64) << v
        if np.array_equal(grown, reach):
            return _popcount(reach, n)
        reach = grown


def estimate_size_distribution(
    spec: ModelSpec, trials: int, seed: int, block: int = BLOCK
) -> SizeDistribution:
    """Histogram of |S| for the reverse reachable set of B.

    Constant out-degree models with n <= 62 run vectorised in blocks of
    `block` graphs, block j drawing from stream (seed, j). Larger models
    draw trial k from stream (seed, k) and run a backward search.
    """
    if trials < 1:
        raise InputError("trials must be at least 1")
    counts: Counter = Counter()
    if isinstance(spec, DegreeSpec) and spec.n <= 62:
        done = 0
        for j in range(math.ceil(trials / block)):
            size = min(block, trials - done)
            sizes = _bitmask_sizes(spec, make_rng(seed, j), size)
            binc = np.bincount(sizes, minlength=spec.n + 1)
            for k in np.flatnonzero(binc).tolist():
                counts[k] += int(binc[k])
            done += size
    else:
        for k in range(trials):
            mdp = sample_mdp(spec, seed, k)
            counts[len(reverse_reachable(mdp, mdp.buchi))] += 1
    x = spec.x if isinstance(spec, DegreeSpec) else 1
    return SizeDistribution(spec.n, x, trials, dict(sorted(counts.items())))


# ---------------------------------------------------------------- scaling


@dataclass
class ScalingPoint:
    n: int
    trials: int
    mean_work: float
    mean_iterations: float
    mean_edges: float


@dataclass
class ScalingTable:
    points: list[ScalingPoint]
    slope: float

    def to_text(self) -> str:
        lines = ["n,trials,mean_work,mean_iterations,mean_edges"]
        lines += [
            f"{p.n},{p.trials},{p.mean_work:.6g},{p.mean_iterations:.6g},{p.mean_edges:.6g}"
            for p in self.points
        ]
        lines.append(f"# work_growth_exponent = {self.slope:.4f}")
        return "\n".join(lines)


def scaling_study(
    family: Callable[[int], ModelSpec],
    grid: Sequence[int],
    trials: int,
    seed: int,
    jobs: int = 1,
) -> ScalingTable:
    """Mean work and iterations per grid size, plus the log-log slope of
    mean work against n. Grid point i uses master seed (seed, i)."""
    if len(grid) < 4:
        raise InputError("a scaling study needs at least 4 sizes")
    points = []
    for i, size in enumerate(grid):
        spec = family(size)
        sub_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        summary, records = run_experiment(spec, trials, sub_seed, jobs)
        points.append(
            ScalingPoint(
                n=records[0].n,
                trials=trials,
                mean_work=summary.mean_work,
                mean_iterations=summary.mean_iterations,
                mean_edges=float(np.mean([r.edges for r in records])),
            )
        )
    xs = np.log([p.n for p in points])
    ys = np.log([p.mean_work for p in points])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return ScalingTable(points, slope)


def summary_dict(summary: ExperimentSummary) -> dict:
    d = asdict(summary)
    d["work_per_vertex"] = str(summary.work_per_vertex)
    d["sizes"] = dict(summary.sizes)
    return d
