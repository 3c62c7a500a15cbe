"""Higson corona classification from computed invariants.

The corona itself is never constructed. A verdict is a fixed rule-table
lookup from finite-scale premises (an ends report or map flags) to a
classification of the infinite object, with the supporting results cited
and the scale recorded in a caveat.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .coarse import line_window
from .ends import EndsClass, EndsReport
from .errors import InvariantViolation, PreconditionError
from .groups import GroupModel
from .maps import MapClassification, PartialMap, classify, profile


class Corona(str, enum.Enum):
    EMPTY = "EmptyCorona"
    DECOMPOSABLE = "DecomposableContinuum"
    INDECOMPOSABLE_NU_N = "IndecomposableNuN"
    SUM_TWO_NU_N = "SumTwoNuN"
    DISCONNECTED_MANY = "DisconnectedMany"
    INCONCLUSIVE = "Inconclusive"


NU_N = "non-metrizable indecomposable continuum νℕ (Thm 3.1)"


@dataclass
class CoronaVerdict:
    classification: Corona
    premises: dict
    citations: list[str]
    caveat: str
    summands: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "premises": self.premises,
            "citations": list(self.citations),
            "summands": list(self.summands),
            "caveat": self.caveat,
        }


# ends class -> (corona, citations, summands)
GROUP_RULES = {
    EndsClass.ZERO: (Corona.EMPTY, ["bounded space: empty corona"], []),
    EndsClass.ONE: (Corona.DECOMPOSABLE, ["Thm 4.3", "Prop 4.2", "Lemma 4.1", "Thm 3.10"], []),
    EndsClass.TWO: (
        Corona.SUM_TWO_NU_N,
        ["Thm 4.5", "Lemma 4.4", "Thm 3.12"],
        [{"summand": NU_N, "citation": "Thm 4.5"}, {"summand": NU_N, "citation": "Thm 4.5"}],
    ),
    EndsClass.MANY: (Corona.DISCONNECTED_MANY, ["Prop 4.2"], []),
}


def _caveat(report: EndsReport) -> str:
    last_R = report.sequence[-1][1] if report.sequence else 0
    return (f"at scale r <= {report.sequence[-1][0] if report.sequence else 0} "
            f"(outer radius {last_R}, ratio {report.ratio}, window {report.window}); "
            "valid for the infinite group only if the end count has stabilized")


def classify_group(ends: EndsReport) -> CoronaVerdict:
    premises = {"ends": ends.classification.value, "sequence": ends.counts(),
                "group": ends.group}
    rule = GROUP_RULES.get(ends.classification)
    if rule is None:
        return CoronaVerdict(Corona.INCONCLUSIVE, premises, [],
                             "end counts did not stabilize: " + _caveat(ends))
    corona, cites, summands = rule
    caveat = _caveat(ends)
    if ends.classification is EndsClass.MANY:
        caveat += "; only disconnectedness is claimed"
    return CoronaVerdict(corona, premises, list(cites), caveat, [dict(s) for s in summands])


REQUIRED_PREMISES = ("coarsely-geodesic", "cbg")


def classify_space(flags: dict[str, MapClassification], premises: dict) -> CoronaVerdict:
    """Classify a graph-derived space from map classifications.

    ``flags`` maps a model name ("N" or "Z") to the classification of a map
    from that model's window into the space.
    """
    missing = [p for p in REQUIRED_PREMISES if not premises.get(p)]
    if missing:
        raise PreconditionError(f"missing premises: {missing}")
    recorded = {"premises": dict(premises),
                "maps": {k: v.coarse_equivalence for k, v in sorted(flags.items())}}
    scales = [v.scale for v in flags.values()]
    caveat = f"at scale {max(scales) if scales else 0}; coarse equivalence is checked only at that scale"
    if "N" in flags and flags["N"].coarse_equivalence:
        return CoronaVerdict(Corona.INDECOMPOSABLE_NU_N, recorded,
                             ["Cor 3.11", "Thm 3.10", "Thm 3.1"], caveat,
                             [{"summand": NU_N, "citation": "Cor 3.11"}])
    if "Z" in flags and flags["Z"].coarse_equivalence:
        return CoronaVerdict(Corona.SUM_TWO_NU_N, recorded, ["Thm 3.12"], caveat,
                             [{"summand": NU_N, "citation": "Thm 3.12"},
                              {"summand": NU_N, "citation": "Thm 3.12"}])
    return CoronaVerdict(Corona.INCONCLUSIVE, recorded, [], caveat)


def lemma41_guard(group: GroupModel, verdict: CoronaVerdict) -> bool:
    """An infinite group is never coarsely equivalent to ℕ.

    Raises :class:`InvariantViolation` if ``verdict`` claims otherwise.
    """
    if verdict.classification is Corona.EMPTY:
        raise PreconditionError(f"{group.name} is finite at scale; guard does not apply")
    if verdict.classification is Corona.INDECOMPOSABLE_NU_N:
        raise InvariantViolation(
            f"{group.name}: an infinite group cannot have corona νℕ (Lemma 4.1)")
    return True


# -- probing a graph snapshot against ℕ and ℤ -------------------------------

def graph_premises(snapshot) -> dict:
    """Structural certificates for a graph-derived snapshot.

    Returns the maximum degree as the bounded-geometry certificate and
    records geodesicity as assumed for graphs; raises if the metric is not
    a connected graph metric (some point has no neighbour one step closer
    to the base).
    """
    m = np.asarray(snapshot.matrix)
    adjacent = m == 1
    base_d = m[snapshot.base]
    for x in range(len(snapshot)):
        if base_d[x] > 0 and not (adjacent[x] & (base_d == base_d[x] - 1)).any():
            raise PreconditionError(f"{snapshot.labels[x]} has no geodesic step towards the base")
    return {"coarsely-geodesic": "assumed-for-graphs",
            "cbg": {"max_degree": int(adjacent.sum(axis=1).max())}}


def _geodesic(m, src, dst):
    path = [dst]
    while path[-1] != src:
        cur = path[-1]
        step = next(p for p in range(len(m))
                    if m[src, p] == m[src, cur] - 1 and m[p, cur] == 1)
        path.append(step)
    return path[::-1]


def space_flags(snapshot, scale: int | None = None) -> dict[str, MapClassification]:
    """Classify a geodesic ray map from an ℕ-window and, when one exists, a
    geodesic line map from a ℤ-window, both through the base point."""
    m = np.asarray(snapshot.matrix)
    base = snapshot.base
    L = int(snapshot.scale_note if scale is None else scale)
    base_d = m[base]
    sphere = np.flatnonzero(base_d == L).tolist()
    if not sphere:
        raise PreconditionError(f"no point at distance {L} from the base")
    out = {}
    ray = _geodesic(m, base, sphere[0])
    f = PartialMap(line_window(0, L), snapshot, ray)
    out["N"] = classify(profile(f), L)
    for u in sphere:
        v = next((v for v in sphere if m[u, v] == 2 * L), None)
        if v is None:
            continue
        left, right = _geodesic(m, base, u), _geodesic(m, base, v)
        g = PartialMap(line_window(-L, L), snapshot, left[::-1] + right[1:])
        out["Z"] = classify(profile(g), L)
        break
    return out
