"""Finite-scale versions of the objects built inside the classification proofs.

Wherever a proof says "take a sequence such that ...", the code takes the
first candidate in ball (BFS) order. Every construction re-verifies the
conditions it is supposed to satisfy and raises
:class:`InvariantViolation` if one fails.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cayley import CayleyBall, bfs_from
from .coarse import (MetricSnapshot, SubsetFamily, diverge_coarsely, from_ball,
                     line_window, mu_components)
from .ends import EndsClass, EndsReport, complement_components, count_ends
from .errors import InvariantViolation, PreconditionError
from .maps import (PartialMap, classify, closeness, compose, identity_map,
                   nearest_point_inverse, profile)

Modulus = Callable[[int], int]


def identity_modulus(t):
    return t


@dataclass
class Check:
    label: str
    condition: str
    ok: bool
    detail: object = None

    def to_dict(self):
        return {"label": self.label, "condition": self.condition, "ok": self.ok,
                "detail": self.detail}


def _require(checks: list[Check]):
    bad = [c for c in checks if not c.ok]
    if bad:
        raise InvariantViolation("; ".join(f"{c.label} {c.condition}: {c.detail}" for c in bad))


# -- rays ----------------------------------------------------------------

def bfs_parent(cball: CayleyBall, v: int) -> int:
    """The vertex that discovered ``v`` during ball enumeration."""
    wl = cball.word_length
    return min(u for u, _ in cball.adjacency[v] if wl[u] == wl[v] - 1)


def geodesic_to_base(cball: CayleyBall, v: int) -> list[int]:
    """BFS-tree geodesic from the identity to ``v`` (identity first)."""
    path = [v]
    while cball.word_length[path[-1]] > 0:
        path.append(bfs_parent(cball, path[-1]))
    return path[::-1]


@dataclass
class RayWitness:
    ball: CayleyBall
    vertices: list[int]

    def __len__(self):
        return len(self.vertices)

    def labels(self) -> list[str]:
        return [self.ball.label(v) for v in self.vertices]

    def checks(self) -> list[Check]:
        wl = self.ball.word_length
        lengths = all(wl[v] == k for k, v in enumerate(self.vertices))
        adjacent = all(b in set(self.ball.neighbours(a))
                       for a, b in zip(self.vertices, self.vertices[1:]))
        return [Check("ray", "|p_k| = k", lengths), Check("ray", "p_k ~ p_k+1", adjacent)]

    def as_map(self, snapshot: MetricSnapshot) -> PartialMap:
        """ℕ-window [0, L] → snapshot, k ↦ p_k, with L the snapshot radius."""
        L = min(len(self.vertices) - 1, int(snapshot.scale_note))
        return PartialMap(line_window(0, L), snapshot, self.vertices[: L + 1])

    def to_dict(self):
        return {"kind": "ray", "vertices": self.labels(),
                "checks": [c.to_dict() for c in self.checks()]}


def extract_ray(cball: CayleyBall, target: int | None = None) -> RayWitness:
    """Geodesic ray 1 = p_0, ..., p_R ending at the first vertex of S(R)."""
    sphere = cball.sphere(cball.radius)
    if target is None:
        if len(sphere) == 0:
            raise PreconditionError(
                f"{cball.group.name} is finite at radius {cball.radius}: no ray")
        target = sphere[0]
    ray = RayWitness(cball, geodesic_to_base(cball, target))
    _require(ray.checks())
    return ray


# -- ball family ---------------------------------------------------------

def tau_modulus(sigma: Modulus, r) -> Modulus:
    """τ(t) = 2(σ(σ(t + r)) + r)."""
    return lambda t: 2 * (sigma(sigma(t + r)) + r)


@dataclass
class BallFamilyWitness:
    snapshot: MetricSnapshot
    centers: list[int]
    sets: list[list[int]]
    tau: Modulus
    mu: object
    r_net: object
    checks: list[Check] = field(default_factory=list)

    @property
    def n_max(self):
        return len(self.centers)

    def to_dict(self):
        labels = self.snapshot.labels
        return {
            "kind": "ball-family",
            "mu": self.mu,
            "r_net": self.r_net,
            "tau": [self.tau(n) for n in range(1, self.n_max + 1)],
            "centers": [labels[c] for c in self.centers],
            "sets": {f"B_{n}": [labels[i] for i in s] for n, s in enumerate(self.sets, 1)},
            "checks": [c.to_dict() for c in self.checks],
        }


def _preimage(embedding: PartialMap, x: int) -> int:
    for v, y in enumerate(embedding.assignment):
        if y == x:
            return v
    raise PreconditionError(f"center {embedding.codomain.labels[x]} is not in the image of f")


def ball_family_sets(snapshot, centers, sigma=identity_modulus, r_net=0, embedding=None):
    """B_n = N(f(D_n), r) with D_n = B_M(v_n, σ(n + r)), no checking."""
    f = embedding or identity_map(snapshot)
    sets = []
    for n, x in enumerate(centers, start=1):
        v = _preimage(f, x)
        d_n = np.flatnonzero(f.domain.row(v) <= sigma(n + r_net))
        img = sorted({f(int(m)) for m in d_n})
        near = snapshot.dist_to_set(img)
        sets.append(np.flatnonzero(near <= r_net).tolist())
    return sets


def build_ball_family(snapshot: MetricSnapshot, centers: Sequence[int], n_max: int | None = None,
                      sigma: Modulus = identity_modulus, r_net=0,
                      embedding: PartialMap | None = None) -> BallFamilyWitness:
    """The family {B_n} around the given centers, with every condition verified.

    ``embedding`` is the σ-rough equivalence f: M → X whose image is an
    ``r_net``-net; omitted, it is the identity of ``snapshot`` (σ = id,
    r = 0, so τ(t) = 2t and B_n = B(x_n, n)).
    """
    centers = list(centers)[: n_max] if n_max is not None else list(centers)
    if n_max is not None and len(centers) < n_max:
        raise PreconditionError(f"need {n_max} centers, got {len(centers)}")
    if not centers:
        raise PreconditionError("no centers")
    tau = tau_modulus(sigma, r_net)
    mu = sigma(1) + r_net
    base_d = snapshot.base_distances()
    scale = snapshot.scale_note
    for n, x in enumerate(centers, start=1):
        need = n + sigma(sigma(n + r_net))
        if not base_d[x] > need:
            raise PreconditionError(
                f"spacing violated at n={n}: d(x_n, x0) = {base_d[x]} <= "
                f"n + sigma^2(n + r) = {need}")
        reach = base_d[x] + r_net + sigma(sigma(n + r_net))
        if reach > scale:
            raise PreconditionError(
                f"scale violation at n={n}: B_n may reach {reach} > window radius {scale}")

    sets = ball_family_sets(snapshot, centers, sigma, r_net, embedding)
    checks = []
    prev = None
    for n, (x, s) in enumerate(zip(centers, sets), start=1):
        diam = snapshot.diameter(s)
        checks.append(Check("(A)", f"diam B_{n} <= tau({n})", bool(diam <= tau(n)),
                            {"diam": int(diam), "tau": tau(n)}))
        pieces = mu_components(snapshot, s, mu)
        checks.append(Check("(B)", f"B_{n} is {mu}-connected", len(pieces) == 1,
                            {"pieces": len(pieces)}))
        ball_n = np.flatnonzero(snapshot.row(x) <= n)
        inside = set(ball_n.tolist()) <= set(s)
        checks.append(Check("(C)", f"B(x_{n}, {n}) within B_{n}", inside,
                            {"ball_size": int(ball_n.size), "set_size": len(s)}))
        gap = int(base_d[s].min())
        ok = gap >= n - r_net and (prev is None or gap > prev)
        checks.append(Check("(D)", f"d(x0, B_{n}) increasing", ok, {"d": gap}))
        prev = gap
    witness = BallFamilyWitness(snapshot, centers, sets, tau, mu, r_net, checks)
    _require(checks)
    return witness


# -- decomposability witness -----------------------------------------------

@dataclass
class DecompositionWitness:
    snapshot: MetricSnapshot
    ray: RayWitness
    N: list[int]
    Z: list[int]
    E: list[int]
    family: BallFamilyWitness
    divergence: object
    interior: list[tuple[int, int]]
    checks: list[Check] = field(default_factory=list)

    def to_dict(self):
        labels = self.snapshot.labels
        return {
            "kind": "decomposition",
            "N": [labels[i] for i in self.N],
            "Z": [labels[i] for i in self.Z],
            "E_size": len(self.E),
            "ball_family": self.family.to_dict(),
            "divergence": self.divergence.to_dict(),
            "interior": [{"center": labels[c], "radius": n} for c, n in self.interior],
            "checks": [c.to_dict() for c in self.checks],
        }


def decomposability_witness(cball: CayleyBall, n_max: int, r_values: Sequence[int] = range(1, 6),
                            shell_margin: int = 5, ends_report: EndsReport | None = None,
                            ) -> DecompositionWitness:
    """Ray N, far sequence Z and the set E = N ∪ ⋃ B_n, with Z and E diverging.

    Works in the exact window of radius R // 2. The group must be
    one-ended; pass ``ends_report`` to skip recomputing it.
    """
    if ends_report is None:
        ends_report = count_ends(cball.group, 5)
    if ends_report.classification is not EndsClass.ONE:
        raise PreconditionError(
            f"{cball.group.name} has ends class {ends_report.classification.value}, need One")
    if n_max < 1:
        raise PreconditionError("n_max must be >= 1")
    W = cball.radius // 2
    snap = from_ball(cball, W)
    ray = extract_ray(cball)
    N = [v for v in ray.vertices if cball.word_length[v] <= W]
    tau = tau_modulus(identity_modulus, 0)
    wl = cball.word_length

    d_N = snap.dist_to_set(N)
    Z = []
    for n in range(1, n_max + 1):
        floor = wl[Z[-1]] if Z else -1
        pick = next((z for z in range(len(snap))
                     if d_N[z] > 3 * tau(n) and wl[z] > floor), None)
        if pick is None:
            raise PreconditionError(
                f"scale too small: no point with d(z, N) > {3 * tau(n)} within radius {W}")
        Z.append(pick)
    z_rows = [snap.row(z) for z in Z]

    centers = []
    prev_gap = None
    for n in range(1, n_max + 1):
        start = wl[centers[-1]] + 1 if centers else 0
        for k in range(start, W + 1):
            x = ray.vertices[k]
            if not k > n + n:               # d(x_n, x0) > n + σ²(n + r)
                continue
            if k + n > W:
                break
            if not all(row[x] > 3 * tau(n) for row in z_rows[:n]):
                continue
            gap = k - n                     # d(x0, B(x, n)) along a geodesic ray
            if prev_gap is not None and gap <= prev_gap:
                continue
            centers.append(x)
            prev_gap = gap
            break
        else:
            raise PreconditionError(f"scale too small to place center x_{n} in radius {W}")
        if len(centers) < n:
            raise PreconditionError(f"scale too small to place center x_{n} in radius {W}")

    family = build_ball_family(snap, centers, n_max)
    E = sorted(set(N).union(*family.sets))

    checks = []
    for n, z in enumerate(Z, start=1):
        checks.append(Check("(1)", f"d(z_{n}, N) > 3 tau({n})", bool(d_N[z] > 3 * tau(n)),
                            {"d": int(d_N[z]), "3tau": 3 * tau(n)}))
    for n, x in enumerate(centers, start=1):
        worst = min(int(row[x]) for row in z_rows[:n])
        checks.append(Check("(3)", f"d(z_k, x_{n}) > 3 tau({n}) for k <= {n}",
                            worst > 3 * tau(n), {"min_d": worst, "3tau": 3 * tau(n)}))
        checks.append(Check("(i)", f"N meets B_{n}", bool(set(N) & set(family.sets[n - 1]))))

    report = diverge_coarsely(SubsetFamily(snap, [Z, E]), list(r_values), shell_margin)
    checks.append(Check("divergence", "Z and E diverge at scale", report.diverges,
                        report.verdict))

    E_set = set(E)
    interior = []
    for n, x in enumerate(centers, start=1):
        if set(np.flatnonzero(snap.row(x) <= n).tolist()) <= E_set:
            interior.append((x, n))
    checks.append(Check("interior", "E contains B(x_n, n) for every n",
                        len(interior) == n_max, len(interior)))
    witness = DecompositionWitness(snap, ray, N, Z, E, family, report, interior, checks)
    _require(checks)
    return witness


# -- two-ended split -------------------------------------------------------

def _connected(cball, vertices):
    vs = set(vertices)
    if not vs:
        return False
    reached = bfs_from(cball, [min(vs)], allowed=vs.__contains__)
    return len(reached) == len(vs)


@dataclass
class TwoEndedSplit:
    ball: CayleyBall
    r_star: int
    core: list[int]
    sides: tuple[list[int], list[int]]
    rays: tuple[RayWitness, RayWitness]
    f: PartialMap
    inverse: PartialMap
    profile: object
    classification: object
    divergence: object
    closeness: int
    checks: list[Check] = field(default_factory=list)

    def to_dict(self):
        lab = self.ball.label
        return {
            "kind": "two-ended-split",
            "r_star": self.r_star,
            "core": [lab(v) for v in self.core],
            "side_sizes": [len(s) for s in self.sides],
            "rays": [r.labels() for r in self.rays],
            "map": {self.f.domain.labels[k]: self.f.codomain.labels[y]
                    for k, y in enumerate(self.f.assignment)},
            "profile": self.profile.to_dict(),
            "classification": self.classification.to_dict(),
            "divergence": self.divergence.to_dict(),
            "closeness_fg_id_at_least": self.closeness,
            "checks": [c.to_dict() for c in self.checks],
        }


def two_ended_split(cball: CayleyBall, ends_report: EndsReport) -> TwoEndedSplit:
    """Cut the ball at the stabilized radius r* and glue two rays into a ℤ-map."""
    if ends_report.classification is not EndsClass.TWO:
        raise PreconditionError(
            f"two_ended_split needs ends class Two, got {ends_report.classification.value}")
    r_star = ends_report.stable_from
    R = cball.radius
    W = R // 2
    delta = 2                                # > σ(1) = 1 for the identity graph map
    if W - r_star - delta < 0:
        raise PreconditionError(f"ball radius {R} too small for r* = {r_star}")
    far, bounded = complement_components(cball, r_star)
    if len(far) != 2:
        raise PreconditionError(
            f"B(1,{R}) minus B(1,{r_star}) has {len(far)} far components, expected 2")
    core = list(range(cball.size_at(r_star)))
    extra = sorted(v for comp in bounded for v in comp)
    side1 = sorted(set(core) | set(far[0]) | set(extra))
    side2 = sorted(set(core) | set(far[1]))

    wl = cball.word_length
    rays = []
    for comp in far:
        target = min(v for v in comp if wl[v] == R)
        ray = extract_ray(cball, target)
        members = set(comp)
        if not all(v in members for v in ray.vertices if wl[v] > r_star):
            raise InvariantViolation("ray left its side of the split")
        rays.append(ray)

    snap = from_ball(cball, W)
    domain = line_window(-W, W)
    assignment = []
    for k in range(-W, W + 1):
        if k > 0:
            assignment.append(rays[0].vertices[k])
        elif k < 0:
            assignment.append(rays[1].vertices[-k])
        else:
            assignment.append(cball.base)
    f = PartialMap(domain, snap, assignment)
    prof = profile(f)
    cls = classify(prof, W)
    g = nearest_point_inverse(f)
    fg = compose(g, f)
    close = closeness(fg, identity_map(snap))

    window_sides = [[v for v in s if v < len(snap)] for s in (side1, side2)]
    div = diverge_coarsely(SubsetFamily(snap, window_sides), list(range(1, delta + 1)),
                           W - r_star - delta)

    checks = [
        Check("cover", "A1' ∪ A2' = ball", len(set(side1) | set(side2)) == len(cball)),
        Check("connected", "A1' connected", _connected(cball, side1)),
        Check("connected", "A2' connected", _connected(cball, side2)),
        Check("(3.1)", f"N(A1', {delta}) ∩ N(A2', {delta}) within B(x0, r* + {delta})",
              div.diverges, div.verdict),
        Check("rough", "f is rough at scale", cls["rough-at-scale"],
              cls.flags["uniformly-proper-at-scale"].witness
              if not cls["rough-at-scale"] else None),
        Check("net", "f has net image at scale", cls["net-image"], prof.net_radius),
    ]
    split = TwoEndedSplit(cball, r_star, core, (side1, side2), tuple(rays), f, g, prof, cls,
                          div, close, checks)
    _require(checks)
    return split


# -- geodesic lines ------------------------------------------------------

def geodesic_line(cball: CayleyBall, pair_budget: int = 100_000) -> list[int] | None:
    """A path p_-L .. p_L through 1 with d(p_i, p_j) = |i - j|, L = R // 2.

    Searches sphere pairs (u, v) with d(u, v) = 2L; the BFS-tree geodesics
    u → 1 → v then form the line. ``None`` means not found within the pair
    budget at this scale.
    """
    L = cball.radius // 2
    if L == 0:
        return [cball.base]
    sphere = list(cball.sphere(L))
    pairs = 0
    for u in sphere:
        dist = bfs_from(cball, [u], limit=2 * L)
        for v in sphere:
            pairs += 1
            if pairs > pair_budget:
                return None
            if dist.get(v) == 2 * L:
                left = geodesic_to_base(cball, u)[::-1]
                right = geodesic_to_base(cball, v)
                return left + right[1:]
    return None
