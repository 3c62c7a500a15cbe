from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coarsecorona.cayley import ball
from coarsecorona.coarse import (MetricSnapshot, SubsetFamily, coproduct, diverge_coarsely,
                                 dump_snapshot, from_ball, graph_snapshot, is_net, line_window,
                                 load_snapshot, metric_violations, mu_components, neighborhood)
from coarsecorona.errors import PreconditionError
from coarsecorona.groups import parse_builtin
from coarsecorona.select import select

from strategies import graph_snapshots


@pytest.fixture(scope="module")
def z2():
    b = ball(parse_builtin("Z2"), 20)
    return b, from_ball(b, 10)


def test_line_window_basics():
    s = line_window(-3, 4)
    assert s.labels[s.base] == "0"
    assert s.scale_note == 4
    assert s.d(s.index_of("-3"), s.index_of("4")) == 7


def test_neighborhood_on_line():
    s = line_window(-10, 10)
    fam = SubsetFamily.from_labels(s, [["0"], ["5", "6"]])
    assert [s.labels[i] for i in neighborhood(fam, 0, 2)] == ["-2", "-1", "0", "1", "2"]
    assert [s.labels[i] for i in neighborhood(fam, 1, 1)] == ["4", "5", "6", "7"]
    assert fam.to_labels() == [["0"], ["5", "6"]]


def test_cayley_snapshot_matches_dense_matrix(z2):
    b, snap = z2
    dense = snap.matrix
    rng = np.random.default_rng(0)
    subset = rng.choice(len(snap), 12, replace=False)
    assert np.array_equal(snap.dist_to_set(subset), dense[subset].min(axis=0))
    assert np.array_equal(snap.row(7), dense[7])


def _oracle_intersection(snap, subsets, r):
    m = np.asarray(snap.matrix)
    return [x for x in range(len(snap))
            if all(min(m[x, e] for e in s) <= r for s in subsets)]


@pytest.mark.parametrize("preds,diverges", [
    (["x0>=0", "x0<0"], False),            # half-planes share an unbounded strip
    (["x1==0", "x0==0"], True),            # the two axes
    (["x1==0&x0>=0", "x1==0&x0<=0"], True),
    (["x1==0", "x1==4"], False),           # parallel lines at distance 4
])
def test_divergence_examples(z2, preds, diverges):
    b, snap = z2
    subsets = [select(b, len(snap), p) for p in preds]
    # the axes meet in an l1-ball of radius 2r, which must stay inside 10 - 3
    rep = diverge_coarsely(SubsetFamily(snap, subsets), [1, 2, 3], 3)
    assert rep.diverges is diverges
    for lvl in rep.levels:
        inter = _oracle_intersection(snap, subsets, lvl.r)
        assert lvl.size == len(inter)
        shell = [x for x in inter if snap.base_distances()[x] > snap.scale_note - 3]
        assert (lvl.witness is None) == (not shell)


def test_divergence_bounds_grow_with_r(z2):
    b, snap = z2
    fam = SubsetFamily(snap, [select(b, len(snap), "x1==0"), select(b, len(snap), "x0==0")])
    rep = diverge_coarsely(fam, [1, 2, 3], 2)
    assert rep.bounds() == {1: 2, 2: 4, 3: 6}
    assert rep.verdict == "diverges-at-scale"


def test_divergence_scale_precondition():
    s = line_window(-5, 5)
    fam = SubsetFamily.from_labels(s, [["0"], ["1"]])
    with pytest.raises(PreconditionError):
        diverge_coarsely(fam, [3], 3)
    with pytest.raises(PreconditionError):
        SubsetFamily(s, [[0], []])


def test_fails_at_reports_first_radius():
    s = line_window(0, 20)
    fam = SubsetFamily.from_labels(s, [[str(k) for k in range(0, 21, 2)],
                                       [str(k) for k in range(1, 21, 2)]])
    rep = diverge_coarsely(fam, [0, 1, 2], 2)
    assert rep.verdict == "fails-at(1)"


def test_mu_components_examples():
    s = line_window(0, 20)
    evens = list(range(0, 21, 2))
    assert len(mu_components(s, evens, 1)) == 11
    assert len(mu_components(s, evens, 2)) == 1
    assert mu_components(s, [], 3) == []
    with pytest.raises(PreconditionError):
        mu_components(s, evens, -1)


@settings(max_examples=60, deadline=None)
@given(graph_snapshots(max_n=25), st.data())
def test_mu_components_refine(snap, data):
    subset = data.draw(st.lists(st.integers(0, len(snap) - 1), unique=True, max_size=len(snap)))
    mu = data.draw(st.integers(0, 4))
    fine = mu_components(snap, subset, mu)
    coarse = mu_components(snap, subset, mu + 1)
    owner = {v: k for k, piece in enumerate(coarse) for v in piece}
    for piece in fine:
        assert len({owner[v] for v in piece}) == 1
    assert sorted(v for p in fine for v in p) == sorted(set(subset))
    # pieces are pairwise more than mu apart
    m = snap.matrix
    for i, p in enumerate(fine):
        for q in fine[i + 1:]:
            assert m[np.ix_(p, q)].min() > mu


def test_is_net():
    s = line_window(-10, 10)
    assert is_net(s, [s.index_of(str(k)) for k in range(-10, 11, 2)]) == 1
    assert is_net(s, [s.index_of("0")]) == 10
    assert is_net(s, range(len(s))) == 0
    with pytest.raises(PreconditionError):
        is_net(s, [])


@settings(max_examples=80, deadline=None)
@given(graph_snapshots(max_n=20, prefix="y"), graph_snapshots(max_n=20, prefix="z"))
def test_coproduct_is_a_metric_with_routed_cross_distances(a, b):
    c = coproduct(a, b)
    assert metric_violations(c) == []
    na = len(a)
    ya, zb = a.base_distances(), b.base_distances()
    for i in range(na):
        for j in range(len(b)):
            assert c.d(i, na + j) == ya[i] + 1 + zb[j]
    assert c.labels[c.base] == "Y:" + a.labels[a.base]


def test_coproduct_exact_rationals():
    m = np.array([[Fraction(0), Fraction(1, 3)], [Fraction(1, 3), Fraction(0)]], dtype=object)
    a = MetricSnapshot(["a", "b"], m, 0)
    c = coproduct(a, line_window(0, 2))
    assert c.d(1, 4) == Fraction(1, 3) + 1 + 2
    assert metric_violations(c) == []


def test_metric_violations_detects_failures():
    m = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    assert any("triangle" in v for v in metric_violations(MetricSnapshot("abc", m)))
    m2 = np.array([[0, 0], [0, 0]])
    assert metric_violations(MetricSnapshot("ab", m2))


@settings(max_examples=40, deadline=None)
@given(graph_snapshots(max_n=15))
def test_snapshot_round_trip(snap):
    back = load_snapshot(dump_snapshot(snap))
    assert back.labels == snap.labels and back.base == snap.base
    assert np.array_equal(back.matrix, snap.matrix)


def test_snapshot_round_trip_rationals():
    m = np.array([[Fraction(0), Fraction(5, 2)], [Fraction(5, 2), Fraction(0)]], dtype=object)
    s = MetricSnapshot(["u", "v"], m, 1, Fraction(5, 2))
    back = load_snapshot(dump_snapshot(s))
    assert back.d(0, 1) == Fraction(5, 2) and back.scale_note == Fraction(5, 2)


def test_load_rejects_garbage():
    with pytest.raises(PreconditionError):
        load_snapshot("hello\n")
    with pytest.raises(PreconditionError):
        load_snapshot("coarse-snapshot v1\nbase 0\nscale 1\npoints 2\na\nb\ndistances\n1 2\n")


def test_disconnected_graph_rejected():
    with pytest.raises(PreconditionError):
        graph_snapshot(["a", "b"], [])
