"""Finite pointed metric snapshots and the coarse primitives on them.

A snapshot stands in for a radius-``scale_note`` window of an unbounded
space. "Bounded" is operationalized by a shell margin: a set counts as
bounded at this scale when it stays out of the outer shell
``{x : d(x0, x) > scale_note - margin}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra, shortest_path

from .cayley import CayleyBall, bfs_from, window_metric
from .errors import PreconditionError

SNAPSHOT_HEADER = "coarse-snapshot v1"


class MetricSnapshot:
    """Finite pointed metric space with exact distances.

    ``matrix`` holds integers (``int64``) or, for rational inputs, an
    ``object`` array of :class:`fractions.Fraction`.
    """

    def __init__(self, labels: Sequence[str], matrix, base: int = 0,
                 scale_note=None):
        self.labels = list(labels)
        self._matrix = matrix
        self.base = base
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != len(self.labels):
            raise PreconditionError("snapshot labels must be unique")
        if not 0 <= base < len(self.labels):
            raise PreconditionError("base point index out of range")
        if scale_note is None:
            scale_note = self.base_distances().max()
        self.scale_note = scale_note

    def __len__(self):
        return len(self.labels)

    def __repr__(self):
        return f"{type(self).__name__}(n={len(self)}, scale={self.scale_note})"

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def d(self, i: int, j: int):
        return self.matrix[i, j]

    def row(self, i: int) -> np.ndarray:
        return self.matrix[i]

    def base_distances(self) -> np.ndarray:
        return self.row(self.base)

    def dist_to_set(self, subset: Iterable[int]) -> np.ndarray:
        """d(x, E) for every point x."""
        idx = np.asarray(sorted(set(subset)), dtype=np.int64)
        if idx.size == 0:
            raise PreconditionError("distance to the empty set is undefined")
        return self.matrix[idx].min(axis=0)

    def within(self, subset: Iterable[int], mu) -> csr_matrix:
        """Adjacency of ``subset`` points (local indices) at distance <= mu."""
        idx = np.asarray(list(subset), dtype=np.int64)
        sub = self.matrix[np.ix_(idx, idx)]
        return csr_matrix(np.asarray(sub <= mu, dtype=np.int8))

    def index_of(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise PreconditionError(f"no point labelled {label!r}") from None

    def diameter(self, subset: Iterable[int] | None = None):
        if subset is None:
            return self.matrix.max()
        idx = np.asarray(list(subset), dtype=np.int64)
        return self.matrix[np.ix_(idx, idx)].max()

    def shell(self, margin) -> np.ndarray:
        """Indices of points in the outer shell of width ``margin``."""
        return np.flatnonzero(self.base_distances() > self.scale_note - margin)


class CayleySnapshot(MetricSnapshot):
    """Window B(1, r) of a Cayley ball, with distances computed on demand.

    Neighbourhood queries run a BFS in the whole ball, so the dense matrix
    is only built if something asks for it.
    """

    def __init__(self, cball: CayleyBall, r: int):
        self.ball = cball
        n = cball.size_at(r)
        self.n = n
        super().__init__([cball.label(i) for i in range(n)], None, 0, r)

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = window_metric(self.ball, self.scale_note).matrix
        return self._matrix

    def base_distances(self) -> np.ndarray:
        return np.asarray(self.ball.word_length[: self.n], dtype=np.int64)

    def row(self, i: int) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[i]
        return self.dist_to_set([i])

    def dist_to_set(self, subset, limit=None):
        subset = np.asarray(sorted(set(subset)), dtype=np.int64)
        if subset.size == 0:
            raise PreconditionError("distance to the empty set is undefined")
        dist = dijkstra(self.ball.csr(), directed=False, unweighted=True, indices=subset,
                        min_only=True, limit=np.inf if limit is None else limit)[: self.n]
        big = np.iinfo(np.int64).max
        # hop counts are exact in float64
        return np.where(np.isinf(dist), big, dist).astype(np.int64)

    def within(self, subset, mu):
        subset = list(subset)
        if self._matrix is not None:
            return super().within(subset, mu)
        local = {v: k for k, v in enumerate(subset)}
        rows, cols = [], []
        for k, v in enumerate(subset):
            for w, dw in bfs_from(self.ball, [v], limit=int(mu)).items():
                j = local.get(w)
                if j is not None and dw <= mu:
                    rows.append(k)
                    cols.append(j)
        m = len(subset)
        return csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(m, m))

    def diameter(self, subset=None):
        if subset is None or self._matrix is not None:
            return super().diameter(subset)
        subset = list(subset)
        return max(max(self.dist_to_set([v])[subset]) for v in subset)


def from_ball(cball: CayleyBall, r: int) -> CayleySnapshot:
    """Exact word-metric snapshot of B(1, r); needs ``2r <= R``."""
    if r < 0 or 2 * r > cball.radius:
        raise PreconditionError(
            f"snapshot radius {r} needs a ball of radius >= {2 * r}, have {cball.radius}")
    return CayleySnapshot(cball, r)


def line_window(lo: int, hi: int) -> MetricSnapshot:
    """Integers lo..hi with |i - j|, based at 0 (or lo if 0 is outside)."""
    if lo > hi:
        raise PreconditionError("empty window")
    pts = np.arange(lo, hi + 1, dtype=np.int64)
    base = int(-lo) if lo <= 0 <= hi else 0
    return MetricSnapshot([str(k) for k in pts], np.abs(pts[:, None] - pts[None, :]),
                          base, max(abs(lo), abs(hi)))


def graph_snapshot(labels: Sequence[str], edges: Iterable[tuple[int, int]],
                   base: int = 0, scale_note=None) -> MetricSnapshot:
    """Shortest-path metric of a finite connected graph."""
    n = len(labels)
    edges = list(edges)
    rows = [u for u, v in edges] + [v for u, v in edges]
    cols = [v for u, v in edges] + [u for u, v in edges]
    g = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    dist = shortest_path(g, unweighted=True, directed=False)
    if np.isinf(dist).any():
        raise PreconditionError("graph is not connected")
    return MetricSnapshot(labels, dist.astype(np.int64), base, scale_note)


# -- subset families and neighbourhoods ----------------------------------------

@dataclass(eq=False)
class SubsetFamily:
    snapshot: MetricSnapshot
    subsets: list[list[int]]

    def __post_init__(self):
        n = len(self.snapshot)
        cleaned = []
        for k, s in enumerate(self.subsets):
            s = sorted(set(int(i) for i in s))
            if not s:
                raise PreconditionError(f"subset {k} is empty")
            if s[0] < 0 or s[-1] >= n:
                raise PreconditionError(f"subset {k} leaves the snapshot")
            cleaned.append(s)
        self.subsets = cleaned

    @classmethod
    def from_labels(cls, snapshot, label_lists):
        return cls(snapshot, [[snapshot.index_of(l) for l in labs] for labs in label_lists])

    def to_labels(self) -> list[list[str]]:
        return [[self.snapshot.labels[i] for i in s] for s in self.subsets]


def neighborhood(family: SubsetFamily, i: int, r) -> list[int]:
    """N(E_i, r) = {x : d(x, E_i) <= r}."""
    if r < 0:
        raise PreconditionError("neighbourhood radius must be non-negative")
    dist = family.snapshot.dist_to_set(family.subsets[i])
    return np.flatnonzero(dist <= r).tolist()


@dataclass
class DivergenceLevel:
    r: object
    bound: object        # max d(x0, .) over the intersection; None if empty
    size: int
    witness: str | None  # a shell point in the intersection, if any

    @property
    def ok(self):
        return self.witness is None


@dataclass
class DivergenceReport:
    levels: list[DivergenceLevel]
    shell_margin: object
    scale: object
    failed_at: object = None

    @property
    def verdict(self) -> str:
        if self.failed_at is None:
            return "diverges-at-scale"
        return f"fails-at({self.failed_at})"

    @property
    def diverges(self) -> bool:
        return self.failed_at is None

    def bounds(self):
        return {lvl.r: lvl.bound for lvl in self.levels}

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "scale": _jsonable(self.scale),
            "shell_margin": _jsonable(self.shell_margin),
            "levels": [
                {"r": _jsonable(l.r), "R": _jsonable(l.bound), "size": l.size,
                 "shell_witness": l.witness}
                for l in self.levels
            ],
        }


def diverge_coarsely(family: SubsetFamily, r_values: Sequence, shell_margin) -> DivergenceReport:
    """Finite-scale check that ⋂ N(E_i, r) stays off the outer shell."""
    snap = family.snapshot
    r_values = sorted(r_values)
    if not r_values:
        raise PreconditionError("no radii to test")
    if r_values[0] < 0 or shell_margin < 0:
        raise PreconditionError("radii and shell margin must be non-negative")
    if r_values[-1] + shell_margin > snap.scale_note:
        raise PreconditionError(
            f"max r {r_values[-1]} + margin {shell_margin} exceeds scale {snap.scale_note}")
    to_sets = [snap.dist_to_set(s) for s in family.subsets]
    from_base = snap.base_distances()
    in_shell = from_base > snap.scale_note - shell_margin
    report = DivergenceReport([], shell_margin, snap.scale_note)
    for r in r_values:
        inter = np.ones(len(snap), dtype=bool)
        for dist in to_sets:
            inter &= dist <= r
        pts = np.flatnonzero(inter)
        bound = from_base[pts].max() if pts.size else None
        bad = np.flatnonzero(inter & in_shell)
        witness = snap.labels[int(bad[0])] if bad.size else None
        report.levels.append(DivergenceLevel(r, bound, int(pts.size), witness))
        if witness is not None and report.failed_at is None:
            report.failed_at = r
    return report


def mu_components(snapshot: MetricSnapshot, subset: Iterable[int], mu) -> list[list[int]]:
    """Maximal μ-connected pieces of ``subset``, ordered by smallest member."""
    if mu < 0:
        raise PreconditionError("mu must be non-negative")
    subset = sorted(set(subset))
    if not subset:
        return []
    _, labels = connected_components(snapshot.within(subset, mu), directed=False)
    pieces: dict[int, list[int]] = {}
    for v, lab in zip(subset, labels):
        pieces.setdefault(int(lab), []).append(v)
    return sorted(pieces.values(), key=lambda p: p[0])


def is_net(snapshot: MetricSnapshot, subset: Iterable[int]):
    """Smallest r such that every point lies within r of ``subset``."""
    subset = list(subset)
    if not subset:
        raise PreconditionError("an empty subset is not a net")
    return snapshot.dist_to_set(subset).max()


def coproduct(a: MetricSnapshot, b: MetricSnapshot, tags=("Y", "Z")) -> MetricSnapshot:
    """Coarse coproduct: cross distances are routed through both base points."""
    ma, mb = a.matrix, b.matrix
    na, nb = len(a), len(b)
    exact = ma.dtype == object or mb.dtype == object
    m = np.empty((na + nb, na + nb), dtype=object if exact else np.int64)
    m[:na, :na] = ma
    m[na:, na:] = mb
    cross = ma[a.base][:, None] + 1 + mb[b.base][None, :]
    m[:na, na:] = cross
    m[na:, :na] = cross.T
    labels = [f"{tags[0]}:{l}" for l in a.labels] + [f"{tags[1]}:{l}" for l in b.labels]
    return MetricSnapshot(labels, m, a.base)


def metric_violations(snapshot: MetricSnapshot, limit: int = 10) -> list[str]:
    """Exhaustive check of the metric axioms; returns human-readable failures."""
    m = snapshot.matrix
    n = len(snapshot)
    out = []
    diag = np.diagonal(m)
    if any(x != 0 for x in diag):
        out.append("non-zero diagonal")
    if (m != m.T).any():
        out.append("asymmetric")
    off = m[~np.eye(n, dtype=bool)]
    if off.size and any(x <= 0 for x in off.ravel()):
        out.append("distinct points at distance <= 0")
    for k in range(n):
        bad = m > (m[:, k][:, None] + m[k][None, :])
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            out.append(f"triangle fails: d({i},{j}) > d({i},{k}) + d({k},{j})")
            if len(out) >= limit:
                break
    return out


# -- serialization -------------------------------------------------------------

def _fmt_value(x) -> str:
    if isinstance(x, Fraction) and x.denominator != 1:
        return f"{x.numerator}/{x.denominator}"
    return str(int(x))


def _parse_value(tok: str):
    if "/" in tok:
        return Fraction(tok)
    return int(tok)


def _jsonable(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return _fmt_value(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    return x


def dump_snapshot(snapshot: MetricSnapshot) -> str:
    lines = [SNAPSHOT_HEADER, f"base {snapshot.base}",
             f"scale {_fmt_value(snapshot.scale_note)}", f"points {len(snapshot)}"]
    for lab in snapshot.labels:
        if not lab or any(c.isspace() for c in lab):
            raise PreconditionError(f"label {lab!r} cannot be serialized")
        lines.append(lab)
    lines.append("distances")
    m = snapshot.matrix
    for i in range(1, len(snapshot)):
        lines.append(" ".join(_fmt_value(m[i, j]) for j in range(i)))
    return "\n".join(lines) + "\n"


def load_snapshot(text: str) -> MetricSnapshot:
    lines = text.splitlines()
    if not lines or lines[0].strip() != SNAPSHOT_HEADER:
        raise PreconditionError("not a coarse-snapshot v1 document")
    try:
        base = int(lines[1].split()[1])
        scale = _parse_value(lines[2].split()[1])
        n = int(lines[3].split()[1])
        labels = [l.strip() for l in lines[4:4 + n]]
        if lines[4 + n].strip() != "distances":
            raise ValueError("missing distances section")
        rows = [[_parse_value(t) for t in l.split()] for l in lines[5 + n:4 + 2 * n]]
    except (IndexError, ValueError) as exc:
        raise PreconditionError(f"malformed snapshot: {exc}") from None
    rational = any(isinstance(x, Fraction) for row in rows for x in row)
    m = np.zeros((n, n), dtype=object if rational else np.int64)
    if rational:
        m[:] = Fraction(0)
    for i, row in enumerate(rows, start=1):
        if len(row) != i:
            raise PreconditionError(f"row {i} has {len(row)} entries, expected {i}")
        for j, x in enumerate(row):
            m[i, j] = m[j, i] = x
    return MetricSnapshot(labels, m, base, scale)
