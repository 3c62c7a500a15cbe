import numpy as np
import pytest

from coarsecorona.cayley import ball
from coarsecorona.coarse import from_ball, line_window
from coarsecorona.ends import count_ends
from coarsecorona.errors import InvariantViolation, PreconditionError
from coarsecorona.groups import parse_builtin
from coarsecorona.maps import PartialMap, profile
from coarsecorona.witness import (build_ball_family, decomposability_witness, extract_ray,
                                  geodesic_line, tau_modulus, two_ended_split)


def test_ray_is_geodesic(balls):
    for name in ["Z2", "F2", "H3", "Dinf"]:
        b = balls(name, 6)
        ray = extract_ray(b)
        assert len(ray) == 7 and all(c.ok for c in ray.checks())
        snap = from_ball(b, 3)
        p = profile(ray.as_map(snap))
        assert p.sigma == p.rho_minus == list(range(4))


def test_ray_in_z2_is_not_a_net(balls):
    b = balls("Z2", 20)
    snap = from_ball(b, 10)
    p = profile(extract_ray(b).as_map(snap))
    assert p.net_radius >= 10


def test_finite_group_has_no_ray():
    with pytest.raises(PreconditionError):
        extract_ray(ball(parse_builtin("Z/5"), 6))


def test_tau_modulus():
    assert [tau_modulus(lambda t: t, 0)(n) for n in range(5)] == [0, 2, 4, 6, 8]
    double = lambda t: 2 * t
    assert [tau_modulus(double, 1)(n) for n in range(4)] == [8 * n + 10 for n in range(4)]


def test_ball_family_on_z2(z2_ball_60):
    snap = from_ball(z2_ball_60, 30)
    centers = [snap.index_of(f"({6 * n},0)") for n in range(1, 5)]
    fam = build_ball_family(snap, centers)
    assert all(c.ok for c in fam.checks)
    diam = [int(snap.diameter(s)) for s in fam.sets]
    assert diam == [2, 4, 6, 8]
    # B_n is the l1 ball of radius n: 2n^2 + 2n + 1 points
    assert [len(s) for s in fam.sets] == [5, 13, 25, 41]
    gaps = [c.detail["d"] for c in fam.checks if c.label == "(D)"]
    assert gaps == [5, 10, 15, 20]


def test_ball_family_through_doubling_embedding():
    # f: N[0,30] -> N[0,60], k -> 2k is a 2t-rough equivalence with a 1-net
    # image, so tau(t) = 8t + 10 and mu = 3
    M, X = line_window(0, 30), line_window(0, 60)
    f = PartialMap(M, X, [2 * k for k in range(31)])
    centers = [X.index_of(str(10 * (n + 1))) for n in range(1, 4)]
    fam = build_ball_family(X, centers, sigma=lambda t: 2 * t, r_net=1, embedding=f)
    assert fam.mu == 3
    assert [int(X.diameter(s)) for s in fam.sets] == [18, 26, 34]
    assert [fam.tau(n) for n in (1, 2, 3)] == [18, 26, 34]
    assert all(c.ok for c in fam.checks)


def test_spacing_violation_is_a_precondition_error(z2_ball_60):
    snap = from_ball(z2_ball_60, 30)
    with pytest.raises(PreconditionError, match="spacing"):
        build_ball_family(snap, [snap.index_of("(1,0)")])
    with pytest.raises(PreconditionError, match="scale"):
        build_ball_family(snap, [snap.index_of("(30,0)")])


def test_non_increasing_distances_fail_check_d(z2_ball_60):
    snap = from_ball(z2_ball_60, 30)
    centers = [snap.index_of("(10,0)"), snap.index_of("(10,1)")]
    with pytest.raises(InvariantViolation, match=r"\(D\)"):
        build_ball_family(snap, centers)


def test_decomposability_witness_z2(z2_ball_60):
    w = decomposability_witness(z2_ball_60, 4, range(1, 6), 5)
    assert w.divergence.diverges
    assert len(w.interior) == 4
    assert all(c.ok for c in w.checks)
    assert [w.snapshot.labels[z] for z in w.Z] == ["(-7,0)", "(-13,0)", "(-19,0)", "(-25,0)"]


def test_decomposability_needs_one_end(balls):
    with pytest.raises(PreconditionError):
        decomposability_witness(balls("Z", 20), 2)


def test_decomposability_scale_too_small():
    with pytest.raises(PreconditionError, match="scale"):
        decomposability_witness(ball(parse_builtin("Z2"), 20), 4)


def test_heisenberg_witness_at_radius_26():
    b = ball(parse_builtin("H3"), 26)
    w = decomposability_witness(b, 2, range(1, 4), 3, count_ends(b.group, 5))
    assert w.divergence.diverges and len(w.interior) == 2


@pytest.mark.parametrize("name", ["Z", "Dinf", "ZxZ/2"])
def test_two_ended_split(name, balls):
    b = balls(name, 20)
    rep = count_ends(b.group, 6)
    split = two_ended_split(b, rep)
    r_star = rep.stable_from
    assert split.profile.net_radius <= r_star + 1
    assert split.classification["rough-at-scale"]
    assert split.closeness <= 2 * r_star + 1
    assert split.divergence.diverges


def test_split_rejects_one_ended(balls):
    b = balls("Z2", 20)
    with pytest.raises(PreconditionError):
        two_ended_split(b, count_ends(b.group, 5))


def test_geodesic_line(balls):
    b = balls("Z2", 6)
    line = geodesic_line(b)
    labels = [b.label(v) for v in line]
    assert len(line) == 7 and labels[3] == "(0,0)"
    snap = from_ball(ball(parse_builtin("Z2"), 12), 6)
    idx = [snap.index_of(l) for l in labels]
    m = snap.matrix[np.ix_(idx, idx)]
    assert np.array_equal(m, np.abs(np.arange(7)[:, None] - np.arange(7)[None, :]))
    assert geodesic_line(ball(parse_builtin("Z/7"), 4)) is None
