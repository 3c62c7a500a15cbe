"""Counting ends of finitely generated groups at increasing radii.

For each r the complement B(1, R) minus B(1, r), with R = ratio * r, is
split into connected components; components that reach the sphere S(R)
stand in for the unbounded components of Cay(G, S) minus a compact set.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

from .cayley import CayleyBall, ball
from .errors import BudgetExceeded, PreconditionError
from .groups import GroupModel


class EndsClass(str, enum.Enum):
    ZERO = "Zero"
    ONE = "One"
    TWO = "Two"
    MANY = "ManyAtScale"
    UNSTABLE = "Unstable"


CITATIONS = {
    EndsClass.ZERO: ["finite group"],
    EndsClass.ONE: ["Prop 4.2"],
    EndsClass.TWO: ["Lemma 4.4"],
    EndsClass.MANY: ["Prop 4.2"],
    EndsClass.UNSTABLE: [],
}


def complement_components(cball: CayleyBall, r: int, R: int | None = None):
    """Components of B(1, R) minus B(1, r), split into (far, bounded).

    A component is far when it meets S(R). Components are lists of vertex
    indices ordered by their smallest member.
    """
    R = cball.radius if R is None else R
    if not 0 <= r <= R <= cball.radius:
        raise PreconditionError(f"need 0 <= r <= R <= {cball.radius}, got r={r}, R={R}")
    n = cball.size_at(R)
    start = cball.size_at(r)
    wl = cball.word_length
    adjacency = cball.adjacency
    seen = bytearray(n)
    far, bounded = [], []
    for s in range(start, n):
        if seen[s]:
            continue
        seen[s] = 1
        comp = [s]
        queue = deque([s])
        reaches = wl[s] == R
        while queue:
            u = queue.popleft()
            for v, _ in adjacency[u]:
                if start <= v < n and not seen[v]:
                    seen[v] = 1
                    comp.append(v)
                    queue.append(v)
                    if wl[v] == R:
                        reaches = True
        (far if reaches else bounded).append(sorted(comp))
    return far, bounded


def far_component_count(cball: CayleyBall, r: int, R: int | None = None) -> int:
    return len(complement_components(cball, r, R)[0])


@dataclass
class EndsReport:
    group: str
    ratio: int
    window: int
    sequence: list[tuple[int, int, int]]
    classification: EndsClass
    exhausted: bool
    stable_from: int | None = None
    complete: bool = True
    citations: list[str] = field(default_factory=list)

    def counts(self) -> list[int]:
        return [c for _, _, c in self.sequence]

    def c(self, r: int) -> int:
        for rr, _, cc in self.sequence:
            if rr == r:
                return cc
        raise KeyError(r)

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "ratio": self.ratio,
            "window": self.window,
            "sequence": [list(t) for t in self.sequence],
            "classification": self.classification.value,
            "exhausted": self.exhausted,
            "stable_from": self.stable_from,
            "complete": self.complete,
            "citations": list(self.citations),
        }


def classify_sequence(counts: list[int], window: int, exhausted: bool) -> EndsClass:
    if exhausted:
        return EndsClass.ZERO
    tail = counts[-window:]
    if not tail:
        return EndsClass.UNSTABLE
    if all(c == 1 for c in tail):
        return EndsClass.ONE
    if all(c == 2 for c in tail):
        return EndsClass.TWO
    if all(c > 2 for c in tail) and all(a <= b for a, b in zip(tail, tail[1:])):
        return EndsClass.MANY
    return EndsClass.UNSTABLE


def _stable_from(sequence):
    if not sequence:
        return None
    last = sequence[-1][2]
    r_star = sequence[-1][0]
    for r, _, c in reversed(sequence):
        if c != last:
            break
        r_star = r
    return r_star


def count_ends(group: GroupModel, r_max: int, ratio: int = 3, window: int = 3,
               budget: int | None = None) -> EndsReport:
    """Far-component counts c(r) for r = 1..r_max and their classification.

    On budget exhaustion a :class:`BudgetExceeded` is raised whose
    ``partial`` attribute holds the report for the radii that fit.
    """
    if r_max < 1:
        raise PreconditionError("r_max must be >= 1")
    if ratio < 2:
        raise PreconditionError("ratio must be >= 2")
    if window < 1:
        raise PreconditionError("window must be >= 1")
    try:
        big = ball(group, ratio * r_max, budget)
        balls = {r: big for r in range(1, r_max + 1)}
    except BudgetExceeded as exc:
        balls = {}
        for r in range(1, r_max + 1):
            try:
                balls[r] = ball(group, ratio * r, budget)
            except BudgetExceeded:
                break
        seq = [(r, ratio * r, far_component_count(b, r, ratio * r)) for r, b in balls.items()]
        exhausted = bool(balls) and balls[max(balls)].exhausted
        used = min(window, len(seq))
        cls = classify_sequence([c for *_, c in seq], used, exhausted) if seq else EndsClass.UNSTABLE
        partial = EndsReport(group.name, ratio, used, seq, cls, exhausted,
                             _stable_from(seq), False, CITATIONS[cls])
        raise BudgetExceeded(str(exc), partial) from None

    seq = [(r, ratio * r, far_component_count(b, r, ratio * r)) for r, b in balls.items()]
    exhausted = big.exhausted
    used = min(window, len(seq))
    cls = classify_sequence([c for *_, c in seq], used, exhausted)
    return EndsReport(group.name, ratio, used, seq, cls, exhausted, _stable_from(seq),
                      True, list(CITATIONS[cls]))


def generator_invariance(group: GroupModel, alt_generators: GroupModel, r_max: int,
                         **kwargs) -> bool:
    """Whether two generating sets of one group give the same classification."""
    a = count_ends(group, r_max, **kwargs)
    b = count_ends(alt_generators, r_max, **kwargs)
    for rep in (a, b):
        if rep.classification is EndsClass.UNSTABLE:
            raise PreconditionError(f"end count for {rep.group} is unstable: {rep.counts()}")
    return a.classification is b.classification
