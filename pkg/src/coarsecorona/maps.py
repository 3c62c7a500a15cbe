"""Empirical expansion profiles of maps between snapshots.

All envelopes are exact maxima/minima over realized pairs, so nothing is
fitted and classification has no tunable thresholds.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coarse import MetricSnapshot, is_net
from .errors import PreconditionError


@dataclass(eq=False)
class PartialMap:
    domain: MetricSnapshot
    codomain: MetricSnapshot
    assignment: list[int]

    def __post_init__(self):
        self.assignment = [int(y) for y in self.assignment]
        if len(self.assignment) != len(self.domain):
            raise PreconditionError(
                f"assignment covers {len(self.assignment)} of {len(self.domain)} domain points")
        n = len(self.codomain)
        if any(not 0 <= y < n for y in self.assignment):
            raise PreconditionError("assignment leaves the codomain")

    def __call__(self, x: int) -> int:
        return self.assignment[x]

    @classmethod
    def from_labels(cls, domain, codomain, pairs):
        assignment = [None] * len(domain)
        for xl, yl in pairs:
            assignment[domain.index_of(xl)] = codomain.index_of(yl)
        missing = [domain.labels[i] for i, y in enumerate(assignment) if y is None]
        if missing:
            raise PreconditionError(f"map undefined at {missing[:5]}")
        return cls(domain, codomain, assignment)

    def image(self) -> list[int]:
        return sorted(set(self.assignment))


def identity_map(snapshot: MetricSnapshot) -> PartialMap:
    return PartialMap(snapshot, snapshot, list(range(len(snapshot))))


def compose(f: PartialMap, g: PartialMap) -> PartialMap:
    """g ∘ f."""
    if f.codomain is not g.domain:
        raise PreconditionError("g's domain must be f's codomain")
    return PartialMap(f.domain, g.codomain, [g(y) for y in f.assignment])


def nearest_point_inverse(f: PartialMap) -> PartialMap:
    """g(y) = a domain point whose image is closest to y.

    Ties go to the domain point nearest the domain base, then to the lower
    index.
    """
    img = np.asarray(f.assignment, dtype=np.int64)
    to_base = f.domain.base_distances()
    order = sorted(range(len(f.domain)), key=lambda x: (to_base[x], x))
    best_d = None
    best_x = None
    for x in order:
        dx = f.codomain.row(int(img[x]))
        if best_d is None:
            best_d = dx.copy()
            best_x = np.full(len(f.codomain), x, dtype=np.int64)
            continue
        better = dx < best_d
        best_d[better] = dx[better]
        best_x[better] = x
    return PartialMap(f.codomain, f.domain, best_x.tolist())


@dataclass
class ExpansionProfile:
    """Envelopes indexed by integer t.

    ``sigma[t]`` = max d(fx, fy) over d(x, y) <= t, for t up to the domain
    diameter. ``rho_minus[t]`` = min d(fx, fy) over d(x, y) >= t.
    ``tau[t]`` = max d(x, y) over d(fx, fy) <= t, defined only for t up to
    the largest realized image distance.
    """

    sigma: list[int]
    rho_minus: list[int]
    tau: list[int]
    net_radius: int
    net_radius_inner: int
    net_witness: str
    domain_diameter: int
    codomain_scale: int

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "rho_minus": self.rho_minus,
            "tau": self.tau,
            "net_radius": self.net_radius,
            "net_radius_inner": self.net_radius_inner,
            "net_witness": self.net_witness,
            "domain_diameter": self.domain_diameter,
            "codomain_scale": self.codomain_scale,
        }


def _int_matrix(m, what):
    if m.dtype == object:
        if any(int(x) != x for x in m.ravel()):
            raise PreconditionError(f"{what} distances must be integers for profiling")
        m = m.astype(np.int64)
    return m


def profile(f: PartialMap) -> ExpansionProfile:
    """Exact envelopes by scanning every pair, O(n^2)."""
    if len(f.domain) == 0:
        raise PreconditionError("empty domain")
    dx = _int_matrix(f.domain.matrix, "domain")
    img = np.asarray(f.assignment, dtype=np.int64)
    uniq, inv = np.unique(img, return_inverse=True)
    cod = f.codomain
    if getattr(cod, "_matrix", None) is None and hasattr(cod, "ball"):
        rows = np.stack([cod.row(int(y)) for y in uniq])
        dy_img = rows[:, uniq]
    else:
        dy_img = _int_matrix(cod.matrix, "codomain")[np.ix_(uniq, uniq)]
    dy = dy_img[np.ix_(inv, inv)]

    a, b = dx.ravel(), dy.ravel()
    T = int(a.max())
    sig = np.zeros(T + 1, dtype=np.int64)
    np.maximum.at(sig, a, b)
    sigma = np.maximum.accumulate(sig)

    big = np.iinfo(np.int64).max
    lo = np.full(T + 1, big, dtype=np.int64)
    np.minimum.at(lo, a, b)
    rho = np.minimum.accumulate(lo[::-1])[::-1]

    U = int(b.max())
    ta = np.zeros(U + 1, dtype=np.int64)
    np.maximum.at(ta, b, a)
    tau = np.maximum.accumulate(ta)

    image = uniq.tolist()
    to_img = cod.dist_to_set(image)
    far = int(np.argmax(to_img))
    inner_pts = np.flatnonzero(cod.base_distances() * 2 <= cod.scale_note)
    inner = int(to_img[inner_pts].max())
    return ExpansionProfile(
        sigma.tolist(), rho.tolist(), tau.tolist(), int(to_img[far]), inner,
        cod.labels[far], T, int(cod.scale_note))


@dataclass
class Flag:
    ok: bool
    witness: object

    def to_dict(self):
        return {"ok": self.ok, "witness": self.witness}


FLAG_NAMES = (
    "uniformly-expansive-at-scale",
    "uniformly-proper-at-scale",
    "rough-at-scale",
    "net-image",
    "coarse-equivalence-at-scale",
)


@dataclass
class MapClassification:
    scale: int
    flags: dict[str, Flag] = field(default_factory=dict)

    def __getitem__(self, name):
        return self.flags[name].ok

    @property
    def coarse_equivalence(self) -> bool:
        return self["coarse-equivalence-at-scale"]

    def to_dict(self) -> dict:
        return {"scale": self.scale,
                "flags": {k: self.flags[k].to_dict() for k in FLAG_NAMES}}


def classify(p: ExpansionProfile, scale: int) -> MapClassification:
    """Read the map taxonomy off a profile, up to distance ``scale``.

    * expansive: σ is realized on [0, scale].
    * proper: image distances reach ``scale`` (so τ is defined up to it) and
      pairs ``scale`` apart are never collapsed to a point.
    * net image: the worst point-to-image distance is already attained in
      the inner half of the codomain window, i.e. gaps are not growing.
    """
    if scale < 0 or scale > p.codomain_scale:
        raise PreconditionError(f"scale {scale} outside [0, {p.codomain_scale}]")
    out = MapClassification(scale)

    if scale <= p.domain_diameter:
        out.flags["uniformly-expansive-at-scale"] = Flag(True, {"sigma": p.sigma[: scale + 1]})
    else:
        out.flags["uniformly-expansive-at-scale"] = Flag(
            False, f"domain diameter {p.domain_diameter} < scale {scale}")

    t = min(scale, p.domain_diameter)
    if len(p.tau) <= scale:
        proper = Flag(False, f"tau undefined beyond {len(p.tau) - 1}")
    elif p.rho_minus[t] <= 0:
        proper = Flag(False, f"pairs at distance >= {t} collapse (rho_minus = 0)")
    else:
        proper = Flag(True, {"tau": p.tau[: scale + 1], "rho_minus": p.rho_minus[: t + 1]})
    out.flags["uniformly-proper-at-scale"] = proper

    rough = out.flags["uniformly-expansive-at-scale"].ok and proper.ok
    out.flags["rough-at-scale"] = Flag(rough, {"sigma_scale": p.sigma[min(scale, p.domain_diameter)]})

    if p.net_radius == p.net_radius_inner:
        net = Flag(True, {"r": p.net_radius})
    else:
        net = Flag(False, {"r": p.net_radius, "inner_r": p.net_radius_inner,
                           "gap_at": p.net_witness})
    out.flags["net-image"] = net
    out.flags["coarse-equivalence-at-scale"] = Flag(
        rough and net.ok, {"net_radius": p.net_radius})
    return out


def closeness(f: PartialMap, g: PartialMap) -> int:
    """max_x d(f(x), g(x)).

    At finite scale this is a lower bound for the true closeness constant.
    """
    if f.domain is not g.domain or f.codomain is not g.codomain:
        if f.domain.labels != g.domain.labels or f.codomain.labels != g.codomain.labels:
            raise PreconditionError("maps must share domain and codomain")
    cod = f.codomain
    best = 0
    for x, (a, b) in enumerate(zip(f.assignment, g.assignment)):
        if a != b:
            best = max(best, int(cod.row(a)[b]))
    return best
