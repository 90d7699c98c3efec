"""Batch experiments and the analyses run on their results.

Run ``i`` of a batch uses seed ``derive_seed(master_seed, i)`` for its
dynamics. When the batch samples a fresh random geometric graph per run,
that graph comes from a separate stream seeded with
``derive_seed(seed_i ^ GRAPH_SALT, 0)``. Results therefore do not depend on
the number of workers or on completion order.

Timed-out runs carry ``tau = None`` (censored). The tail estimate counts
them as surviving every threshold. The catastrophe ratio replaces them by
``horizon + 1``, i.e. they exceed every ``t <= horizon``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .engine import Outcome, RunResult, SimConfig, run
from .graphs import Graph, GraphMetrics, circulant, compute_metrics, connected_random_geometric, load_edge_list
from .rng import Stream, derive_seed

GRAPH_SALT = 0x6A09E667F3BCC909
GRAPH_KINDS = ("rgg", "circulant", "file")


class RunFailed(RuntimeError):
    def __init__(self, run_index: int, cause: Exception):
        self.run_index = run_index
        super().__init__(f"run {run_index}: {cause}")


@dataclass(frozen=True)
class GraphSource:
    kind: str
    n: int = 50
    r_g: float | None = None
    l: int | None = None
    path: str | None = None
    max_attempts: int = 1_000_000

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"graph kind must be one of {GRAPH_KINDS}, got {self.kind!r}")
        if self.kind == "rgg":
            if self.r_g is None or not 0.0 < self.r_g < 1.0:
                raise ValueError(f"r_g must lie in (0, 1), got {self.r_g}")
            if self.n < 1:
                raise ValueError("n must be at least 1")
            if self.max_attempts < 1:
                raise ValueError("max_attempts must be at least 1")
        elif self.kind == "circulant":
            if self.l is None or self.l % 2:
                raise ValueError(f"l must be even, got {self.l}")
            if not 2 <= self.l <= self.n - 1:
                raise ValueError(f"l must satisfy 2 <= l <= n - 1, got l={self.l}, n={self.n}")
        elif not self.path:
            raise ValueError("file graphs need a path")

    @property
    def parameter(self):
        """``r_g`` for geometric graphs, ``l`` for circulants, else None."""
        return {"rgg": self.r_g, "circulant": self.l}.get(self.kind)

    def build(self, seed: int) -> Graph:
        if self.kind == "rgg":
            return connected_random_geometric(self.n, self.r_g, Stream(seed), self.max_attempts)
        if self.kind == "circulant":
            return circulant(self.n, self.l)
        return load_edge_list(self.path)


@dataclass(frozen=True)
class BatchSpec:
    source: GraphSource
    n_runs: int = 500
    cfg: SimConfig = SimConfig()
    master_seed: int = 0
    # default: a fresh graph per run only for random geometric graphs
    fresh_graph_per_run: bool | None = None
    parallelism: int = 1

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError(f"n_runs must be at least 1, got {self.n_runs}")
        if self.parallelism < 1:
            raise ValueError("parallelism must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        if self.fresh_graph_per_run is None:
            object.__setattr__(self, "fresh_graph_per_run", self.source.kind == "rgg")


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    graph_id: str
    seed: int
    r_g_or_l: float | int | None
    n: int
    alpha: float
    m: float
    T: int
    converged: Outcome
    tau: int | None
    final_mean_belief: float
    mean_degree: float
    triangle_count: int
    max_degree: int
    graph_attempts: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class BatchResult:
    records: tuple[RunRecord, ...]
    master_seed: int
    spec: BatchSpec
    runs: tuple[RunResult, ...] = field(default=(), repr=False, compare=False)

    @property
    def taus(self) -> list[int | None]:
        return [r.tau for r in self.records]


def run_seed(master_seed: int, index: int) -> int:
    return derive_seed(master_seed, index)


def graph_seed(seed: int) -> int:
    return derive_seed(seed ^ GRAPH_SALT, 0)


def run_batch(spec: BatchSpec) -> BatchResult:
    shared = None
    shared_metrics = None
    if not spec.fresh_graph_per_run:
        shared = spec.source.build(graph_seed(spec.master_seed))
        shared_metrics = compute_metrics(shared)

    def one(i: int):
        seed = run_seed(spec.master_seed, i)
        if shared is None:
            try:
                g = spec.source.build(graph_seed(seed))
            except Exception as exc:
                raise RunFailed(i, exc) from exc
            metrics = compute_metrics(g)
        else:
            g, metrics = shared, shared_metrics
        result = run(g, replace(spec.cfg, seed=seed))
        return _record(i, g, metrics, spec, result), result

    if spec.parallelism == 1:
        done = [one(i) for i in range(spec.n_runs)]
    else:
        with ThreadPoolExecutor(max_workers=spec.parallelism) as pool:
            done = list(pool.map(one, range(spec.n_runs)))
    return BatchResult(
        records=tuple(d[0] for d in done),
        master_seed=spec.master_seed,
        spec=spec,
        runs=tuple(d[1] for d in done),
    )


def _record(i: int, g: Graph, metrics: GraphMetrics, spec: BatchSpec, result: RunResult) -> RunRecord:
    cfg = spec.cfg
    return RunRecord(
        run_id=i,
        graph_id=g.graph_id,
        seed=result.seed,
        r_g_or_l=spec.source.parameter,
        n=g.n,
        alpha=cfg.alpha,
        m=cfg.m,
        T=cfg.max_rounds,
        converged=result.converged,
        tau=result.tau,
        final_mean_belief=result.final_mean_belief,
        mean_degree=metrics.mean_degree,
        triangle_count=metrics.triangle_count,
        max_degree=metrics.max_degree,
        graph_attempts=g.attempts,
    )


def _records(batches) -> list[RunRecord]:
    """Flatten a batch, a record, or any nesting of iterables of them."""
    if isinstance(batches, BatchResult):
        return list(batches.records)
    if isinstance(batches, RunRecord):
        return [batches]
    out = []
    for b in batches:
        out.extend(_records(b))
    return out


@dataclass(frozen=True)
class OutcomeTable:
    contribute: Fraction
    defect: Fraction
    timeout: Fraction
    n_runs: int

    def __iter__(self):
        return iter((self.contribute, self.defect, self.timeout))

    def __str__(self):
        return (
            f"runs={self.n_runs} contribute={float(self.contribute):.3f} "
            f"defect={float(self.defect):.3f} timeout={float(self.timeout):.3f}"
        )


def outcome_table(batch) -> OutcomeTable:
    """Exact fractions of runs ending in each corner or timing out."""
    records = _records(batch)
    n = len(records)
    if n == 0:
        raise ValueError("no runs")
    counts = {o: 0 for o in Outcome}
    for r in records:
        counts[r.converged] += 1
    return OutcomeTable(
        Fraction(counts[Outcome.CONTRIBUTE], n),
        Fraction(counts[Outcome.DEFECT], n),
        Fraction(counts[Outcome.TIMEOUT], n),
        n,
    )


def log_grid(t_max: int, per_decade: int = 20) -> np.ndarray:
    """Distinct integers from 1 to ``t_max``, log-spaced ``per_decade`` per decade."""
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    num = max(2, int(math.ceil(math.log10(t_max) * per_decade)) + 1)
    return np.unique(np.rint(np.logspace(0, math.log10(t_max), num)).astype(np.int64))


def tail_probability(taus: Iterable[int | None], grid: Sequence[int]) -> np.ndarray:
    """Empirical survival ``P(tau >= t)`` at each grid point.

    Returns an ``(len(grid), 2)`` array of ``(t, survival)``. ``None``
    entries are censored runs and count as surviving.
    """
    taus = list(taus)
    if not taus:
        raise ValueError("empty sample")
    grid = np.asarray(grid, dtype=np.float64)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be ascending")
    observed = np.sort(np.array([t for t in taus if t is not None], dtype=np.float64))
    censored = len(taus) - observed.size
    below = np.searchsorted(observed, grid, side="left")
    survival = (observed.size - below + censored) / len(taus)
    return np.column_stack([grid, survival])


@dataclass(frozen=True)
class CatastropheEstimate:
    t: float
    n_pairs: int
    replacement: bool
    count_max: int
    count_sum: int

    @property
    def p_max(self) -> float:
        return self.count_max / self.n_pairs

    @property
    def p_sum(self) -> float:
        return self.count_sum / self.n_pairs

    @property
    def ratio(self) -> float | None:
        """``P(max > t) / P(sum > t)``; None when no pair sum exceeds ``t``."""
        return self.count_max / self.count_sum if self.count_sum else None


def catastrophe_ratio(
    samples: Sequence[float | None],
    t: float,
    n_pairs: int = 250,
    with_replacement: bool = False,
    rng: Stream | None = None,
    horizon: int | None = None,
) -> CatastropheEstimate:
    """Estimate ``P(max(X1, X2) > t)`` and ``P(X1 + X2 > t)`` from paired samples.

    Without replacement sample ``i`` is paired with ``i + n_pairs``. With
    replacement each pair is two independent uniform picks from ``rng``.
    Censored samples (None) stand for ``horizon + 1``.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be at least 1")
    if any(s is None for s in samples):
        if horizon is None:
            raise ValueError("censored samples need a horizon")
        values = np.array([horizon + 1 if s is None else s for s in samples], dtype=np.float64)
    else:
        values = np.asarray(samples, dtype=np.float64)
    if with_replacement:
        if rng is None:
            raise ValueError("resampling needs a random stream")
        if values.size == 0:
            raise ValueError("empty sample")
        picks = np.array([rng.integers(values.size) for _ in range(2 * n_pairs)])
        a, b = values[picks[0::2]], values[picks[1::2]]
    else:
        if values.size < 2 * n_pairs:
            raise ValueError(
                f"pairing without replacement needs {2 * n_pairs} samples, got {values.size}"
            )
        a, b = values[:n_pairs], values[n_pairs:2 * n_pairs]
    return CatastropheEstimate(
        t=t,
        n_pairs=n_pairs,
        replacement=with_replacement,
        count_max=int(np.count_nonzero(np.maximum(a, b) > t)),
        count_sum=int(np.count_nonzero(a + b > t)),
    )


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or x.std() == 0 or y.std() == 0:
        return float("nan")
    return float(np.corrcoef(x, y)[0, 1])


@dataclass(frozen=True)
class ScatterReport:
    mean_degree: np.ndarray
    triangle_count: np.ndarray
    final_mean_belief: np.ndarray
    r_g_or_l: tuple
    correlation: dict[str, float]

    def __len__(self):
        return len(self.final_mean_belief)


def belief_metric_scatter(batches) -> ScatterReport:
    """Final mean belief against graph metrics.

    Accepts one batch or a sequence of batches (pooled), or run records.
    """
    records = _records(batches)
    deg = np.array([r.mean_degree for r in records])
    tri = np.array([r.triangle_count for r in records])
    belief = np.array([r.final_mean_belief for r in records])
    return ScatterReport(
        mean_degree=deg,
        triangle_count=tri,
        final_mean_belief=belief,
        r_g_or_l=tuple(r.r_g_or_l for r in records),
        correlation={
            "mean_degree": pearson(deg, belief),
            "triangle_count": pearson(tri, belief),
        },
    )


@dataclass(frozen=True)
class Plateau:
    start_round: int
    end_round: int
    exit_round: int | None
    level: float
    samples: int

    @property
    def length(self) -> int:
        return self.end_round - self.start_round


@dataclass(frozen=True)
class MetastabilityReport:
    plateaus: tuple[Plateau, ...]
    window: int
    band: float

    @property
    def longest(self) -> Plateau | None:
        return max(self.plateaus, key=lambda p: p.length, default=None)


def windowed_mean(values: np.ndarray, window: int) -> np.ndarray:
    """Trailing moving average; the first ``window - 1`` entries average what is available."""
    c = np.concatenate([[0.0], np.cumsum(values, dtype=np.float64)])
    idx = np.arange(1, values.size + 1)
    lo = np.maximum(idx - window, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def metastability_report(
    run_or_series,
    window: int = 100,
    band: float = 2.5,
    n: int | None = None,
    min_samples: int = 10,
) -> MetastabilityReport:
    """Find intermediate plateaus of the total belief.

    The total-belief series is smoothed by a trailing mean over ``window``
    samples. Scanning left to right, a plateau is grown while every smoothed
    value in it stays within ``band`` of the plateau's mean; values below
    ``band`` or above ``n - band`` are corner values and end a plateau.
    Plateaus shorter than ``min_samples`` samples are dropped.
    """
    if isinstance(run_or_series, RunResult):
        if run_or_series.series is None:
            raise ValueError("run has no recorded total-belief series")
        series = run_or_series.series
        n = run_or_series.final_beliefs.size if n is None else n
    else:
        if run_or_series is None:
            raise ValueError("series absent")
        series = np.asarray(run_or_series, dtype=np.float64)
        if n is None:
            raise ValueError("population size n is required with a raw series")
    if window < 1 or band <= 0:
        raise ValueError("window must be positive and band positive")
    rounds = series[:, 0]
    smooth = windowed_mean(series[:, 1], window)
    inner = (smooth >= band) & (smooth <= n - band)

    plateaus = []
    i = 0
    size = smooth.size
    while i < size:
        if not inner[i]:
            i += 1
            continue
        j = i + 1
        total = lo = hi = smooth[i]
        while j < size and inner[j]:
            v = smooth[j]
            new_total = total + v
            mean = new_total / (j - i + 1)
            if max(hi, v) - mean > band or mean - min(lo, v) > band:
                break
            total, lo, hi = new_total, min(lo, v), max(hi, v)
            j += 1
        if j - i >= min_samples:
            plateaus.append(
                Plateau(
                    start_round=int(rounds[i]),
                    end_round=int(rounds[j - 1]),
                    exit_round=int(rounds[j]) if j < size else None,
                    level=float(total / (j - i)),
                    samples=j - i,
                )
            )
        i = j
    return MetastabilityReport(tuple(plateaus), window, band)
