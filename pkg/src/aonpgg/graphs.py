"""Undirected simple graphs: generators, neighborhoods, metrics and edge-list I/O.

Graphs are stored as CSR arrays (``indptr``, ``indices``) with every
neighbor list sorted, which is the layout the simulation kernel consumes.
"""

from __future__ import annotations

import hashlib
import io
import os
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable

import numba
import numpy as np

from .rng import Stream, next_double


class GraphGenerationError(RuntimeError):
    def __init__(self, r_g: float, attempts: int, n: int):
        self.r_g = r_g
        self.attempts = attempts
        self.n = n
        super().__init__(
            f"no connected random geometric graph with n={n}, r_g={r_g} after "
            f"{attempts} attempts; r_g is likely too small for n"
        )


class EdgeListError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    indptr: np.ndarray
    indices: np.ndarray
    positions: np.ndarray | None = None
    # rejection-sampling attempts for generated connected graphs
    attempts: int | None = field(default=None, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], positions=None, attempts=None):
        """Build a graph, rejecting self-loops, duplicates and out-of-range ids."""
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        adj: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has an id outside 0..{n - 1}")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if v in adj[u]:
                raise ValueError(f"duplicate edge ({min(u, v)}, {max(u, v)})")
            adj[u].add(v)
            adj[v].add(u)
        return cls._from_adjacency(adj, positions, attempts)

    @classmethod
    def _from_adjacency(cls, adj, positions=None, attempts=None):
        n = len(adj)
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in adj])
        indices = np.fromiter(
            (v for a in adj for v in sorted(a)), dtype=np.int64, count=int(indptr[-1])
        )
        if positions is not None:
            positions = np.array(positions, dtype=np.float64).reshape(n, 2)
            positions.flags.writeable = False
        indptr.flags.writeable = False
        indices.flags.writeable = False
        return cls(n, indptr, indices, positions, attempts)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def edge_count(self) -> int:
        return int(self.indptr[-1]) // 2

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.n else 0

    def edges(self) -> np.ndarray:
        """All edges as an ``(E, 2)`` array of ``u < v`` pairs in lexicographic order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = src < self.indices
        return np.column_stack([src[keep], self.indices[keep]])

    @property
    def graph_id(self) -> str:
        """Content hash of the vertex count and edge set."""
        h = hashlib.sha1(f"n {self.n}\n".encode())
        h.update(np.ascontiguousarray(self.edges()).tobytes())
        return h.hexdigest()[:12]

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self):
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class GraphMetrics:
    mean_degree: float
    triangle_count: int
    max_degree: int
    edge_count: int
    connected: bool


def _geometric_edges(positions: np.ndarray, r_g: float):
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))
    iu, ju = np.triu_indices(len(positions), k=1)
    close = dist[iu, ju] < r_g
    return zip(iu[close], ju[close])


def random_geometric(n: int, r_g: float, rng: Stream | None = None, positions=None) -> Graph:
    """Random geometric graph on the unit square (no wrap-around).

    Points are drawn iid uniform, ``x`` then ``y`` per vertex, unless
    ``positions`` is given. Vertices are joined iff their Euclidean distance
    is strictly less than ``r_g``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < r_g < 1.0:
        raise ValueError(f"r_g must lie in (0, 1), got {r_g}")
    if positions is None:
        if rng is None:
            raise ValueError("need a random stream or explicit positions")
        positions = rng.random(2 * n).reshape(n, 2)
    positions = np.asarray(positions, dtype=np.float64).reshape(n, 2)
    return Graph.from_edges(n, _geometric_edges(positions, r_g), positions)


@numba.njit(nogil=True, cache=True)
def _draw_until_connected(s, n, r_g, max_attempts, pos):
    seen = np.empty(n, dtype=np.bool_)
    stack = np.empty(n, dtype=np.int64)
    for attempt in range(1, max_attempts + 1):
        for v in range(n):
            pos[v, 0] = next_double(s)
            pos[v, 1] = next_double(s)
        seen[:] = False
        seen[0] = True
        stack[0] = 0
        top = 1
        reached = 1
        while top > 0:
            top -= 1
            u = stack[top]
            for w in range(n):
                if not seen[w]:
                    dx = pos[u, 0] - pos[w, 0]
                    dy = pos[u, 1] - pos[w, 1]
                    if np.sqrt(dx * dx + dy * dy) < r_g:
                        seen[w] = True
                        stack[top] = w
                        top += 1
                        reached += 1
        if reached == n:
            return attempt
    return -1


def connected_random_geometric(
    n: int, r_g: float, rng: Stream, max_attempts: int = 1_000_000
) -> Graph:
    """Redraw random geometric graphs until one is connected.

    Consumes the stream exactly like repeated :func:`random_geometric`
    calls. The returned graph's ``attempts`` attribute holds the number of
    draws. Raises :class:`GraphGenerationError` after ``max_attempts``
    failures.
    """
    if max_attempts < 1:
        raise ValueError("max_attempts must be at least 1")
    if not 0.0 < r_g < 1.0:
        raise ValueError(f"r_g must lie in (0, 1), got {r_g}")
    if n < 1:
        raise ValueError("n must be at least 1")
    pos = np.empty((n, 2))
    attempts = _draw_until_connected(rng.state, n, r_g, max_attempts, pos)
    if attempts < 0:
        raise GraphGenerationError(r_g, max_attempts, n)
    g = random_geometric(n, r_g, positions=pos)
    return Graph(g.n, g.indptr, g.indices, g.positions, int(attempts))


def circulant(n: int, l: int) -> Graph:
    """Ring of ``n`` vertices, each joined to its ``l`` nearest neighbors."""
    if l % 2:
        raise ValueError(f"l must be even, got {l}")
    if not 2 <= l <= n - 1:
        raise ValueError(f"l must satisfy 2 <= l <= n - 1, got l={l}, n={n}")
    edges = {
        (min(i, (i + s) % n), max(i, (i + s) % n))
        for i in range(n)
        for s in range(1, l // 2 + 1)
    }
    return Graph.from_edges(n, sorted(edges))


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    seen = np.zeros(g.n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in g.neighbors(v):
            if not seen[w]:
                seen[w] = True
                queue.append(int(w))
    return bool(seen.all())


def closed_neighborhood(g: Graph, v: int) -> np.ndarray:
    """``adj(v) | {v}`` as a sorted array."""
    if not 0 <= v < g.n:
        raise IndexError(f"vertex {v} not in graph with {g.n} vertices")
    return np.sort(np.append(g.neighbors(v), v))


def triangle_count(g: Graph) -> int:
    adj = [set(g.neighbors(v).tolist()) for v in range(g.n)]
    count = 0
    for u in range(g.n):
        for v in adj[u]:
            if v > u:
                count += sum(1 for w in adj[u] & adj[v] if w > v)
    return count


def compute_metrics(g: Graph) -> GraphMetrics:
    return GraphMetrics(
        mean_degree=2 * g.edge_count / g.n if g.n else 0.0,
        triangle_count=triangle_count(g),
        max_degree=g.max_degree,
        edge_count=g.edge_count,
        connected=is_connected(g),
    )


def _open_text(target, mode):
    if isinstance(target, (str, os.PathLike)):
        return open(target, mode, newline="\n"), True
    return target, False


def save_edge_list(g: Graph, sink: str | os.PathLike | IO[str]):
    """Write ``n <count>`` followed by one ``u v`` line per edge (``u < v``)."""
    f, owned = _open_text(sink, "w")
    try:
        f.write(f"n {g.n}\n")
        for u, v in g.edges():
            f.write(f"{u} {v}\n")
    finally:
        if owned:
            f.close()


def load_edge_list(source: str | os.PathLike | IO[str]) -> Graph:
    """Parse the format written by :func:`save_edge_list`.

    Blank lines and ``#`` comments are skipped. Raises :class:`EdgeListError`
    naming the offending line for malformed lines, bad ids, self-loops or
    duplicate edges.
    """
    f, owned = _open_text(source, "r")
    try:
        lines = f.read().splitlines()
    finally:
        if owned:
            f.close()
    n = None
    seen = set()
    edges = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n" or not parts[1].isdigit():
                raise EdgeListError(f"expected header 'n <count>', got {raw!r}", lineno)
            n = int(parts[1])
            continue
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise EdgeListError(f"expected 'u v', got {raw!r}", lineno)
        u, v = int(parts[0]), int(parts[1])
        if u >= n or v >= n:
            raise EdgeListError(f"vertex id out of range 0..{n - 1}", lineno)
        if u == v:
            raise EdgeListError(f"self-loop at vertex {u}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise EdgeListError(f"duplicate edge {key}", lineno)
        seen.add(key)
        edges.append(key)
    if n is None:
        raise EdgeListError("missing header 'n <count>'")
    return Graph.from_edges(n, edges)


def save_positions(g: Graph, sink: str | os.PathLike | IO[str]):
    """Write ``v x y`` lines (17 significant digits) for a geometric graph."""
    if g.positions is None:
        raise ValueError("graph has no positions")
    f, owned = _open_text(sink, "w")
    try:
        for v, (x, y) in enumerate(g.positions):
            f.write(f"{v} {x:.17g} {y:.17g}\n")
    finally:
        if owned:
            f.close()


def load_positions(source: str | os.PathLike | IO[str], n: int) -> np.ndarray:
    f, owned = _open_text(source, "r")
    try:
        text = f.read()
    finally:
        if owned:
            f.close()
    pos = np.full((n, 2), np.nan)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        parts = raw.split()
        try:
            v, x, y = int(parts[0]), float(parts[1]), float(parts[2])
        except (IndexError, ValueError):
            raise EdgeListError(f"expected 'v x y', got {raw!r}", lineno) from None
        if not 0 <= v < n or len(parts) != 3:
            raise EdgeListError(f"bad position line {raw!r}", lineno)
        pos[v] = x, y
    if np.isnan(pos).any():
        raise EdgeListError("positions missing for some vertices")
    return pos


def with_positions(g: Graph, positions) -> Graph:
    return Graph(g.n, g.indptr, g.indices, np.asarray(positions, dtype=np.float64), g.attempts)


def to_text(g: Graph) -> str:
    buf = io.StringIO()
    save_edge_list(g, buf)
    return buf.getvalue()
