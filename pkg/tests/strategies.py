"""Hypothesis strategies shared by the property tests."""
from hypothesis import strategies as st

from coarsecorona.coarse import graph_snapshot


@st.composite
def connected_graphs(draw, min_n=1, max_n=20):
    n = draw(st.integers(min_n, max_n))
    # random spanning tree plus extra edges keeps the graph connected
    edges = [(draw(st.integers(0, v - 1)), v) for v in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    edges += [(u, v) for u, v in extra if u != v]
    base = draw(st.integers(0, n - 1))
    return n, edges, base


@st.composite
def graph_snapshots(draw, min_n=1, max_n=20, prefix="p"):
    n, edges, base = draw(connected_graphs(min_n, max_n))
    return graph_snapshot([f"{prefix}{i}" for i in range(n)], edges, base)
