"""Round-by-round belief dynamics on a graph.

Each round a focal vertex is drawn uniformly; its closed neighborhood plays
one all-or-nothing game and every participant moves its belief towards the
fraction of *other* participants who contributed. Non-participants keep
their beliefs.

Random draws per round, in this order: the focal index, then one reward
per participant in ascending vertex id. Actions are a deterministic
function of belief and reward, so nothing else is drawn. Rewards are drawn
even when a participant's action is forced (belief 0 or 1) so that the
stream schedule depends only on the sequence of focal vertices.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from .core import Action, PayoffModel, _contributes, _sample_lambda, _updated, check_alpha
from .graphs import Graph, is_connected
from .rng import Stream, next_below

_NONE, _CONTRIBUTE, _DEFECT = 0, 1, 2


class Outcome(enum.Enum):
    CONTRIBUTE = "contribute"
    DEFECT = "defect"
    TIMEOUT = "timeout"


_STATUS = {_CONTRIBUTE: Outcome.CONTRIBUTE, _DEFECT: Outcome.DEFECT}


@dataclass(frozen=True)
class SimConfig:
    alpha: float = 0.3
    m: float = 4.0
    eps_stop: float = 1e-4
    max_rounds: int = 10**7
    seed: int = 0
    record_stride: int = 0

    def __post_init__(self):
        check_alpha(self.alpha)
        PayoffModel(self.m)
        if not 0.0 < self.eps_stop < 0.5:
            raise ValueError(f"eps_stop must lie in (0, 0.5), got {self.eps_stop}")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.record_stride < 0:
            raise ValueError("record_stride must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass
class SimState:
    beliefs: np.ndarray
    round: int = 0


@dataclass(frozen=True)
class RoundOutcome:
    focal: int
    participants: np.ndarray
    actions: tuple[Action, ...]
    lambdas: np.ndarray

    @property
    def group_size(self) -> int:
        return len(self.participants)

    @property
    def all_contributed(self) -> bool:
        return all(a == Action.CONTRIBUTE for a in self.actions)


@dataclass(frozen=True)
class RunResult:
    converged: Outcome
    tau: int | None
    final_beliefs: np.ndarray
    rounds_executed: int
    seed: int
    series: np.ndarray | None = field(default=None, repr=False)
    """``(rows, 2)`` array of ``(round, total belief)``, or None if not recorded."""

    @property
    def final_mean_belief(self) -> float:
        return float(self.final_beliefs.mean())


@numba.njit(nogil=True, cache=True)
def _play_round(x, indptr, indices, alpha, m, s, members, lams, acts, eps, counts):
    focal = next_below(s, x.size)
    start = indptr[focal]
    stop = indptr[focal + 1]
    k = stop - start + 1
    if k < 2:
        # isolated vertex: no game is played
        members[0] = focal
        return focal, 1
    j = 0
    placed = False
    for p in range(start, stop):
        v = indices[p]
        if not placed and focal < v:
            members[j] = focal
            j += 1
            placed = True
        members[j] = v
        j += 1
    if not placed:
        members[j] = focal

    for i in range(k):
        lams[i] = _sample_lambda(s, m)
    total = 0
    for i in range(k):
        acts[i] = 1 if _contributes(x[members[i]], k, lams[i]) else 0
        total += acts[i]
    hi = 1.0 - eps
    for i in range(k):
        v = members[i]
        old = x[v]
        new = _updated(old, alpha, total - acts[i], k)
        counts[0] += (new < eps) - (old < eps)
        counts[1] += (new > hi) - (old > hi)
        x[v] = new
    return focal, k


@numba.njit(nogil=True, cache=True)
def _corner_counts(x, eps, counts):
    counts[0] = 0
    counts[1] = 0
    for v in x:
        if v < eps:
            counts[0] += 1
        if v > 1.0 - eps:
            counts[1] += 1


@numba.njit(inline="always")
def _status(counts, n):
    if counts[0] == n:
        return _DEFECT
    if counts[1] == n:
        return _CONTRIBUTE
    return _NONE


@numba.njit(nogil=True, cache=True)
def _run_kernel(x, indptr, indices, alpha, m, eps, max_rounds, stride, s, series):
    n = x.size
    width = 1
    for v in range(n):
        width = max(width, indptr[v + 1] - indptr[v] + 1)
    members = np.empty(width, dtype=np.int64)
    lams = np.empty(width, dtype=np.float64)
    acts = np.empty(width, dtype=np.int64)
    counts = np.zeros(2, dtype=np.int64)
    _corner_counts(x, eps, counts)

    rows = 0
    if stride > 0:
        series[0, 0] = 0.0
        series[0, 1] = x.sum()
        rows = 1
    t = 0
    status = _status(counts, n)
    while status == _NONE and t < max_rounds:
        _play_round(x, indptr, indices, alpha, m, s, members, lams, acts, eps, counts)
        t += 1
        status = _status(counts, n)
        if stride > 0 and t % stride == 0:
            series[rows, 0] = t
            series[rows, 1] = x.sum()
            rows += 1
    if stride > 0 and series[rows - 1, 0] != t:
        series[rows, 0] = t
        series[rows, 1] = x.sum()
        rows += 1
    return status, t, rows


@numba.njit(nogil=True, cache=True)
def _advance_kernel(x, indptr, indices, alpha, m, eps, rounds, s, focal_counts):
    width = 1
    for v in range(x.size):
        width = max(width, indptr[v + 1] - indptr[v] + 1)
    members = np.empty(width, dtype=np.int64)
    lams = np.empty(width, dtype=np.float64)
    acts = np.empty(width, dtype=np.int64)
    counts = np.zeros(2, dtype=np.int64)
    for _ in range(rounds):
        focal, _k = _play_round(x, indptr, indices, alpha, m, s, members, lams, acts, eps, counts)
        focal_counts[focal] += 1


def _check_state(state: SimState, g: Graph):
    if state.beliefs.shape != (g.n,):
        raise ValueError(f"belief vector has shape {state.beliefs.shape}, graph has {g.n} vertices")


def init_state(n: int, rng: Stream) -> SimState:
    """Independent uniform initial beliefs."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return SimState(rng.random(n), 0)


def step(state: SimState, g: Graph, cfg: SimConfig, rng: Stream) -> RoundOutcome:
    """Play one round in place and report who played and how."""
    _check_state(state, g)
    width = g.max_degree + 1
    members = np.empty(width, dtype=np.int64)
    lams = np.empty(width, dtype=np.float64)
    acts = np.empty(width, dtype=np.int64)
    counts = np.zeros(2, dtype=np.int64)
    focal, k = _play_round(
        state.beliefs, g.indptr, g.indices, cfg.alpha, float(cfg.m), rng.state,
        members, lams, acts, cfg.eps_stop, counts,
    )
    state.round += 1
    if k < 2:
        return RoundOutcome(int(focal), members[:1].copy(), (), np.empty(0))
    return RoundOutcome(
        int(focal),
        members[:k].copy(),
        tuple(Action(int(a)) for a in acts[:k]),
        lams[:k].copy(),
    )


def advance(state: SimState, g: Graph, cfg: SimConfig, rng: Stream, rounds: int) -> np.ndarray:
    """Play ``rounds`` rounds without convergence checks.

    Returns how often each vertex was focal. Equivalent to calling
    :func:`step` ``rounds`` times.
    """
    _check_state(state, g)
    focal_counts = np.zeros(g.n, dtype=np.int64)
    _advance_kernel(
        state.beliefs, g.indptr, g.indices, cfg.alpha, float(cfg.m),
        cfg.eps_stop, rounds, rng.state, focal_counts,
    )
    state.round += rounds
    return focal_counts


def check_convergence(beliefs, eps_stop: float) -> Outcome | None:
    beliefs = np.asarray(beliefs)
    if beliefs.max() < eps_stop:
        return Outcome.DEFECT
    if beliefs.min() > 1.0 - eps_stop:
        return Outcome.CONTRIBUTE
    return None


def run(g: Graph, cfg: SimConfig, beliefs=None) -> RunResult:
    """Simulate until every belief sits in one corner or ``max_rounds`` pass.

    Initial beliefs are drawn from the ``cfg.seed`` stream unless given.
    ``tau`` is the number of completed rounds when convergence is first
    seen (0 if the initial state already converged).
    """
    if not is_connected(g):
        warnings.warn("graph is not connected; corner convergence is not guaranteed", stacklevel=2)
    stream = Stream(cfg.seed)
    if beliefs is None:
        x = init_state(g.n, stream).beliefs
    else:
        x = np.array(beliefs, dtype=np.float64)
        if x.shape != (g.n,) or (x < 0).any() or (x > 1).any():
            raise ValueError("initial beliefs must be n values in [0, 1]")
    stride = cfg.record_stride
    series = np.empty((cfg.max_rounds // stride + 2 if stride else 1, 2))
    status, t, rows = _run_kernel(
        x, g.indptr, g.indices, cfg.alpha, float(cfg.m), cfg.eps_stop,
        cfg.max_rounds, stride, stream.state, series,
    )
    outcome = _STATUS.get(int(status), Outcome.TIMEOUT)
    return RunResult(
        converged=outcome,
        tau=None if outcome is Outcome.TIMEOUT else int(t),
        final_beliefs=x,
        rounds_executed=int(t),
        seed=cfg.seed,
        series=series[:rows].copy() if stride else None,
    )


def absorption_horizon(alpha: float, eps: float) -> int:
    """Rounds of unanimous defection that take any belief at or below ``eps``."""
    check_alpha(alpha)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    return math.ceil(math.log(eps) / math.log(1.0 - alpha))


def corner_epsilon_bound(g: Graph, alpha: float) -> float:
    """Upper bound ``alpha / (max_degree - 1)`` on corner widths for absorption."""
    check_alpha(alpha)
    if g.max_degree < 2:
        raise ValueError(f"maximum degree must be at least 2, got {g.max_degree}")
    return alpha / (g.max_degree - 1)
