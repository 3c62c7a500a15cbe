"""Acceptance gate. Each criterion prints one PASS/FAIL line; the lines are
repeated in the pytest terminal summary."""
import contextlib
import json
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from coarsecorona.cayley import ball
from coarsecorona.coarse import MetricSnapshot, coproduct, from_ball, line_window, metric_violations
from coarsecorona.ends import EndsClass, count_ends, generator_invariance
from coarsecorona.errors import InvariantViolation
from coarsecorona.groups import free_abelian, parse_builtin
from coarsecorona.maps import PartialMap, closeness, compose, identity_map, profile
from coarsecorona.verdict import NU_N, Corona, CoronaVerdict, classify_group, lemma41_guard
from coarsecorona.witness import build_ball_family, decomposability_witness, two_ended_split

from strategies import connected_graphs
from coarsecorona.coarse import graph_snapshot

RESULTS: list[str] = []


@contextlib.contextmanager
def criterion(n, title):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        line = f"FAIL  criterion {n}: {title} ({time.perf_counter() - start:.2f}s)"
        RESULTS.append(line)
        print(line)
        raise
    line = f"PASS  criterion {n}: {title} ({time.perf_counter() - start:.2f}s)"
    RESULTS.append(line)
    print(line)


ENDS_TABLE = [
    ("Z", 6, EndsClass.TWO), ("Dinf", 6, EndsClass.TWO), ("ZxZ/2", 6, EndsClass.TWO),
    ("Z2", 6, EndsClass.ONE), ("H3", 6, EndsClass.ONE), ("F2", 3, EndsClass.MANY),
    ("Z/5", 6, EndsClass.ZERO), ("Z/12", 6, EndsClass.ZERO),
]


def test_criterion_1_ends_table():
    with criterion(1, "ends table, exact counts, < 30 s"):
        start = time.perf_counter()
        reports = {name: count_ends(parse_builtin(name), r_max) for name, r_max, _ in ENDS_TABLE}
        elapsed = time.perf_counter() - start
        for name, _, cls in ENDS_TABLE:
            assert reports[name].classification is cls, (name, reports[name].counts())
        for name in ("Z", "Dinf", "ZxZ/2"):
            assert reports[name].counts() == [2] * 6
        assert reports["Z2"].counts() == [1] * 6
        assert reports["H3"].counts()[-3:] == [1, 1, 1]
        assert reports["F2"].c(1) == 12 and reports["F2"].c(2) == 36
        assert elapsed < 30, elapsed


def test_criterion_2_verdicts_and_guard():
    with criterion(2, "verdict mapping, infinite-group guard, injected fault"):
        for name, r_max, cls in ENDS_TABLE:
            g = parse_builtin(name)
            v = classify_group(count_ends(g, r_max))
            if cls is EndsClass.ONE:
                assert v.classification is Corona.DECOMPOSABLE
            if cls is EndsClass.TWO:
                assert v.classification is Corona.SUM_TWO_NU_N
                assert len(v.summands) == 2
                assert all(s["summand"] == NU_N and s["citation"] for s in v.summands)
            if cls is not EndsClass.ZERO:
                assert lemma41_guard(g, v) is True
        fault = CoronaVerdict(Corona.INDECOMPOSABLE_NU_N, {}, [], "injected")
        with pytest.raises(InvariantViolation):
            lemma41_guard(parse_builtin("Z"), fault)


def _check_coproduct(a, b):
    c = coproduct(a, b)
    m = c.matrix
    n = len(c)
    # all n^3 triangle inequalities, written out
    for k in range(n):
        assert not (m > m[:, k][:, None] + m[k][None, :]).any()
    assert metric_violations(c) == []
    ya, zb = a.base_distances(), b.base_distances()
    na = len(a)
    for i in range(na):
        for j in range(len(b)):
            assert c.d(i, na + j) == ya[i] + 1 + zb[j]
            assert c.d(na + j, i) == ya[i] + 1 + zb[j]


@st.composite
def _snapshot_pair(draw):
    n1, e1, b1 = draw(connected_graphs(1, 39))
    n2, e2, b2 = draw(connected_graphs(1, 40 - n1))
    return (graph_snapshot([f"y{i}" for i in range(n1)], e1, b1),
            graph_snapshot([f"z{i}" for i in range(n2)], e2, b2))


@settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(_snapshot_pair())
def _coproduct_property(pair):
    _check_coproduct(*pair)


def test_criterion_3_coproduct():
    with criterion(3, "coarse coproduct, triangle inequalities and routed cross distances"):
        _coproduct_property()
        # a rational instance, compared exactly
        m = np.array([[Fraction(0), Fraction(7, 3)], [Fraction(7, 3), Fraction(0)]], dtype=object)
        _check_coproduct(MetricSnapshot(["p", "q"], m, 1), line_window(-3, 3))


def test_criterion_4_ball_family():
    with criterion(4, "ball family on Z^2, conditions (A)-(D), < 10 s"):
        start = time.perf_counter()
        cball = ball(parse_builtin("Z2"), 60)
        snap = from_ball(cball, 30)
        centers = [snap.index_of(f"({6 * n},0)") for n in range(1, 5)]
        fam = build_ball_family(snap, centers, n_max=4)
        elapsed = time.perf_counter() - start
        assert fam.mu == 1
        for n, (x, s) in enumerate(zip(centers, fam.sets), start=1):
            assert snap.diameter(s) == 2 * n <= fam.tau(n) == 2 * n
            assert set(np.flatnonzero(snap.row(x) <= n).tolist()) <= set(s)
        by_label = {}
        for c in fam.checks:
            by_label.setdefault(c.label, []).append(c)
        assert all(c.ok for c in fam.checks)
        assert all(c.detail["pieces"] == 1 for c in by_label["(B)"])
        gaps = [c.detail["d"] for c in by_label["(D)"]]
        assert all(a < b for a, b in zip(gaps, gaps[1:]))
        assert elapsed < 10, elapsed


def test_criterion_5_decomposition():
    with criterion(5, "decomposability witness on Z^2, divergence r=1..5, interior balls"):
        w = decomposability_witness(ball(parse_builtin("Z2"), 60), 4, range(1, 6), 5)
        assert w.divergence.diverges
        assert [lvl.r for lvl in w.divergence.levels] == [1, 2, 3, 4, 5]
        assert [n for _, n in w.interior] == [1, 2, 3, 4]


def test_criterion_6_two_ended_split():
    with criterion(6, "two-ended split on Z, Dinf, ZxZ/2"):
        for name in ("Z", "Dinf", "ZxZ/2"):
            g = parse_builtin(name)
            rep = count_ends(g, 6)
            split = two_ended_split(ball(g, 20), rep)
            r_star = rep.stable_from
            assert split.profile.net_radius <= r_star + 1, name
            assert split.classification["rough-at-scale"], name
            fg = compose(split.inverse, split.f)
            assert closeness(fg, identity_map(split.f.codomain)) <= 2 * r_star + 1, name


def test_criterion_7_profiles():
    with criterion(7, "map profiles: identity, doubling, exhaustive oracle"):
        s = line_window(0, 40)
        p = profile(identity_map(s))
        assert p.sigma == p.rho_minus == list(range(41))
        dom, cod = line_window(0, 20), line_window(0, 40)
        p = profile(PartialMap(dom, cod, [2 * k for k in range(21)]))
        assert p.sigma == [2 * t for t in range(21)] and p.net_radius == 1
        rng = np.random.default_rng(2024)
        for size in (50, 200, 500):
            dom = line_window(0, size - 1)
            cod = from_ball(ball(parse_builtin("Z2"), 30), 15)
            f = PartialMap(dom, cod, rng.integers(0, len(cod), size).tolist())
            p = profile(f)
            dx, dy = dom.matrix, cod.matrix
            img = f.assignment
            sig = [0] * (size)
            rho = [10 ** 9] * (size)
            for i in range(size):
                for j in range(size):
                    a, b = int(dx[i, j]), int(dy[img[i], img[j]])
                    sig[a] = max(sig[a], b)
                    rho[a] = min(rho[a], b)
            for t in range(1, size):
                sig[t] = max(sig[t], sig[t - 1])
            for t in range(size - 2, -1, -1):
                rho[t] = min(rho[t], rho[t + 1])
            assert p.sigma == sig and p.rho_minus == rho
            net = max(min(int(dy[y, z]) for z in set(img)) for y in range(len(cod)))
            assert p.net_radius == net


def test_criterion_8_generator_invariance():
    with criterion(8, "ends classification independent of generating set"):
        assert generator_invariance(free_abelian(1), free_abelian(1, [(2,), (3,)]), 6)
        assert generator_invariance(free_abelian(2), free_abelian(2, [(1, 0), (0, 1), (1, 1)]), 6)


GOLDEN = [
    ["verdict", "--builtin", "Z"],
    ["verdict", "--builtin", "H3"],
    ["ends", "--builtin", "Z2", "--r-max", "6"],
    ["ends", "--builtin", "F2", "--r-max", "3"],
    ["ball", "--builtin", "F2", "--R", "2", "--format", "edge-list"],
    ["diverge", "--builtin", "Z2", "--R", "20", "--subset", "x1==0", "--subset", "x0==0"],
    ["components", "--builtin", "Z2", "--R", "8", "--subset", "x0%3==0"],
    ["ray", "--builtin", "Z2", "--R", "8"],
    ["line", "--builtin", "Dinf", "--R", "8"],
    ["witness", "--builtin", "Z2", "--R", "60"],
    ["split", "--builtin", "ZxZ/2", "--R", "20"],
]


def test_criterion_9_determinism():
    with criterion(9, "CLI golden cases byte-identical across two runs"):
        for args in GOLDEN:
            outs = [subprocess.run([sys.executable, "-m", "coarsecorona", *args],
                                   capture_output=True, check=True).stdout for _ in range(2)]
            assert outs[0] == outs[1], args
            assert outs[0]
        doc = json.loads(subprocess.run([sys.executable, "-m", "coarsecorona", *GOLDEN[0]],
                                        capture_output=True, check=True).stdout)
        assert doc["result"]["classification"] == "SumTwoNuN"
        assert "Thm 4.5" in doc["result"]["citations"]
