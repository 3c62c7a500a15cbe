"""Radius-R balls of Cayley graphs and their exact window metrics."""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import BudgetExceeded, PreconditionError
from .groups import GroupModel

DEFAULT_VERTEX_BUDGET = 2_000_000
BUDGET_ENV = "COARSE_VERTEX_BUDGET"


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_VERTEX_BUDGET


@dataclass(eq=False)
class CayleyBall:
    """Induced subgraph of Cay(G, S) on B(1, R).

    Vertices are ordered by (word length, discovery order), so every
    smaller ball B(1, r) is a prefix of ``vertices``. ``adjacency[i]`` lists
    ``(neighbour index, generator id)`` for neighbours inside the ball.
    """

    group: GroupModel
    radius: int
    vertices: list
    word_length: list[int]
    adjacency: list[list[tuple[int, int]]]
    exhausted: bool
    base: int = 0
    index: dict = field(default_factory=dict, repr=False)
    _csr: csr_matrix | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.vertices)

    def size_at(self, r: int) -> int:
        """|B(1, r)| for r <= radius."""
        if r < 0:
            return 0
        return self._level_ends()[min(r, self.radius)]

    def _level_ends(self):
        ends = getattr(self, "_ends", None)
        if ends is None:
            ends = [0] * (self.radius + 1)
            for w in self.word_length:
                ends[w] += 1
            for i in range(1, len(ends)):
                ends[i] += ends[i - 1]
            self._ends = ends
        return ends

    def growth(self) -> list[int]:
        return list(self._level_ends())

    def sphere(self, r: int) -> range:
        return range(self.size_at(r - 1), self.size_at(r))

    def label(self, i: int) -> str:
        return self.group.format(self.vertices[i])

    def neighbours(self, i: int) -> Iterable[int]:
        return (j for j, _ in self.adjacency[i])

    def edge_count(self) -> int:
        return len(undirected_edges(self))

    def restrict(self, r: int) -> "CayleyBall":
        """The ball B(1, r) for r <= radius, as its own CayleyBall."""
        if not 0 <= r <= self.radius:
            raise PreconditionError(f"cannot restrict radius-{self.radius} ball to {r}")
        n = self.size_at(r)
        adj = [[(j, g) for j, g in self.adjacency[i] if j < n] for i in range(n)]
        exhausted = self.exhausted and self.size_at(self.radius) == n
        return CayleyBall(self.group, r, self.vertices[:n], self.word_length[:n], adj,
                          exhausted, 0, {v: i for i, v in enumerate(self.vertices[:n])})

    def csr(self) -> csr_matrix:
        if self._csr is None:
            n = len(self.vertices)
            counts = np.fromiter((len(a) for a in self.adjacency), dtype=np.int64, count=n)
            indptr = np.concatenate(([0], np.cumsum(counts)))
            indices = np.fromiter((j for a in self.adjacency for j, _ in a),
                                  dtype=np.int32, count=int(indptr[-1]))
            data = np.ones(indices.size, dtype=np.int8)
            self._csr = csr_matrix((data, indices, indptr), shape=(n, n))
        return self._csr


def ball(group: GroupModel, R: int, budget: int | None = None) -> CayleyBall:
    """Breadth-first enumeration of B(1, R).

    Raises :class:`BudgetExceeded` rather than truncating when the ball
    would exceed ``budget`` vertices.
    """
    if not isinstance(R, int) or R < 0:
        raise PreconditionError(f"radius must be a non-negative integer, got {R!r}")
    budget = default_budget() if budget is None else budget
    steps = group.steps
    vertices = [group.identity]
    word_length = [0]
    index = {group.identity: 0}
    adjacency: list[list[tuple[int, int]]] = []
    level_start, level_end = 0, 1
    level = 0
    while level_start < level_end:
        for i in range(level_start, level_end):
            v = vertices[i]
            nbrs = []
            for g, step in enumerate(steps):
                w = step(v)
                j = index.get(w)
                if j is None:
                    if level == R:
                        continue
                    j = len(vertices)
                    if j >= budget:
                        raise BudgetExceeded(
                            f"B(1,{R}) of {group.name} exceeds {budget} vertices")
                    index[w] = j
                    vertices.append(w)
                    word_length.append(level + 1)
                nbrs.append((j, g))
            adjacency.append(nbrs)
        if level == R:
            break
        level_start, level_end = level_end, len(vertices)
        level += 1
    # every vertex has all |S| neighbours inside, i.e. the group is finite
    exhausted = all(len(nbrs) == len(steps) for nbrs in adjacency)
    return CayleyBall(group, R, vertices, word_length, adjacency, exhausted, 0, index)


def bfs_from(ball: CayleyBall, sources: Sequence[int], limit: int | None = None,
             allowed=None) -> dict[int, int]:
    """Multi-source BFS distances inside the ball graph.

    ``allowed`` optionally restricts the vertices the search may enter.
    Vertices farther than ``limit`` are omitted.
    """
    dist = {}
    queue = deque()
    for s in sources:
        if s not in dist and (allowed is None or allowed(s)):
            dist[s] = 0
            queue.append(s)
    adjacency = ball.adjacency
    while queue:
        u = queue.popleft()
        du = dist[u]
        if limit is not None and du >= limit:
            continue
        for v, _ in adjacency[u]:
            if v not in dist and (allowed is None or allowed(v)):
                dist[v] = du + 1
                queue.append(v)
    return dist


@dataclass(eq=False)
class GraphMetricWindow:
    """All-pairs word metric on B(1, r), computed inside a ball of radius >= 2r.

    ``matrix[i, j]`` is indexed by ball vertex order, which for a window is
    the prefix ``0 .. size-1``.
    """

    ball: CayleyBall
    r: int
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def d(self, i: int, j: int) -> int:
        return int(self.matrix[i, j])


def window_metric(cball: CayleyBall, r: int, chunk: int = 512) -> GraphMetricWindow:
    """Exact distances among vertices of word length <= r.

    A geodesic between two points of B(1, r) never leaves B(1, 2r), so
    ``2r <= R`` makes the result equal the true word metric.
    """
    if r < 0:
        raise PreconditionError("window radius must be non-negative")
    if 2 * r > cball.radius:
        raise PreconditionError(
            f"window radius {r} needs a ball of radius >= {2 * r}, have {cball.radius}")
    inner = cball.restrict(min(cball.radius, 2 * r))
    n = inner.size_at(r)
    graph = inner.csr()
    out = np.empty((n, n), dtype=np.int64)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        rows = shortest_path(graph, method="D", unweighted=True, directed=False,
                             indices=np.arange(lo, hi))
        # integer hop counts are exact in float64
        out[lo:hi] = rows[:, :n].astype(np.int64)
    return GraphMetricWindow(cball, r, out)


# -- export ----------------------------------------------------------------

def undirected_edges(cball: CayleyBall) -> list[tuple[int, int, int]]:
    """One (u, v, generator) triple per undirected edge, u <= v.

    Self-loops from generators acting trivially are kept once per inverse
    pair of generator symbols.
    """
    gens = cball.group.generators
    edges = []
    for u, nbrs in enumerate(cball.adjacency):
        for v, g in nbrs:
            if u < v or (u == v and g <= gens[g].inverse_id):
                edges.append((u, v, g))
    return edges


def export_graph(cball: CayleyBall, format: str = "edge-list") -> str:
    labels = [cball.label(i) for i in range(len(cball))]
    gens = cball.group.generators
    edges = undirected_edges(cball)
    if format == "edge-list":
        lines = [f"# group {cball.group.name} R {cball.radius} "
                 f"vertices {len(labels)} edges {len(edges)}"]
        touched = set()
        for u, v, g in edges:
            touched.update((u, v))
        lines += [f"# vertex {labels[i]}" for i in range(len(labels)) if i not in touched]
        lines += [f"{labels[u]} {labels[v]} {gens[g].label}" for u, v, g in edges]
        return "\n".join(lines) + "\n"
    if format in ("dot", "dot-like"):
        lines = [f'graph "{cball.group.name}" {{']
        lines += [f'  "{lab}";' for lab in labels]
        lines += [f'  "{labels[u]}" -- "{labels[v]}" [label="{gens[g].label}"];'
                  for u, v, g in edges]
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise PreconditionError(f"unknown export format {format!r}")


def parse_edge_list(text: str) -> tuple[list[str], list[tuple[str, str, str]]]:
    """Read back :func:`export_graph` edge-list output.

    Returns vertex labels in first-seen order and the edge triples.
    """
    vertices: dict[str, None] = {}
    edges = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "vertex":
                vertices.setdefault(parts[1])
            continue
        u, v, g = line.split()
        vertices.setdefault(u)
        vertices.setdefault(v)
        edges.append((u, v, g))
    return list(vertices), edges


def summary(cball: CayleyBall) -> dict:
    return {
        "group": cball.group.name,
        "R": cball.radius,
        "vertices": len(cball),
        "edges": cball.edge_count(),
        "growth": cball.growth(),
        "exhausted": cball.exhausted,
    }
