import itertools
import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metlogic import groups, matching
from metlogic.errors import BudgetExhaustedError, MetlogicError, UndefinedProductError
from metlogic.groups import BallSpec
from metlogic.matching import BipartiteInstance, build_RU, mu, neighborhood


def nx_matching_number(b: BipartiteInstance) -> int:
    G = nx.Graph()
    left = [("L", i) for i in range(b.n_left)]
    G.add_nodes_from(left)
    G.add_nodes_from(("R", j) for j in range(b.n_right))
    G.add_edges_from((("L", i), ("R", j)) for i, j in b.edges())
    return len(nx.bipartite.hopcroft_karp_matching(G, top_nodes=left)) // 2


def assert_certified(b: BipartiteInstance, res):
    """The matching is a valid partial injection and the witness attains the deficiency."""
    seen_l, seen_r = set(), set()
    for i, j in res.matching:
        assert b.adjacent(i, j) and i not in seen_l and j not in seen_r
        seen_l.add(i)
        seen_r.add(j)
    assert len(res.matching) == res.mu
    S = res.witness_S
    assert res.mu == b.n_left - max(0, len(S) - len(neighborhood(b, S)))


def random_instance(rng, n_left, n_right, p):
    edges = [(i, j) for i in range(n_left) for j in range(n_right) if rng.random() < p]
    return BipartiteInstance.from_edges(n_left, n_right, edges)


def test_build_RU_examples():
    g = groups.cyclic(4)
    b = build_RU(g, ["0", "1"], ["1", "2"], BallSpec(Fraction(1, 2)))
    assert b.edges() == [(1, 0)]  # 1 in F1 is joined to 1 in F2
    F = list(g.elements)
    ident = build_RU(g, F, F, BallSpec(Fraction(1, 2)))
    assert ident.edges() == [(i, i) for i in range(4)]
    full = build_RU(g, F, F, BallSpec(1))
    assert len(full.edges()) == 16


def test_build_RU_needs_products_inside_the_ball():
    z = groups.enumerate_ball({"family": "zd", "d": 1}, 2)
    metric = [[0 if a == b else 1 for b in z.elements] for a in z.elements]
    zm = z.with_metric(metric)
    with pytest.raises(UndefinedProductError):
        build_RU(zm, zm.parse_list("2"), zm.parse_list("-2"), BallSpec(Fraction(1, 2)))


def test_neighborhood_examples():
    b = BipartiteInstance.from_edges(3, 3, [(0, 0), (1, 1), (2, 2)])
    assert neighborhood(b, ()) == ()
    assert neighborhood(b, (0, 2)) == (0, 2)
    with pytest.raises(MetlogicError):
        neighborhood(b, (3,))
    rng = random.Random(0)
    for _ in range(50):
        r = random_instance(rng, 5, 6, 0.3)
        S = tuple(i for i in range(5) if rng.random() < 0.5)
        assert neighborhood(r, S) == tuple(sorted({j for i, j in r.edges() if i in S}))


@pytest.mark.parametrize("method", matching.METHODS)
def test_mu_examples(method):
    ident = BipartiteInstance.from_edges(5, 5, [(i, i) for i in range(5)])
    assert mu(ident, method).mu == 5
    empty = BipartiteInstance.from_edges(4, 4, [])
    res = mu(empty, method)
    assert res.mu == 0 and res.witness_S == (0, 1, 2, 3)


def test_deficiency_cap():
    big = BipartiteInstance.from_edges(25, 25, [(i, i) for i in range(25)])
    with pytest.raises(BudgetExhaustedError):
        mu(big, "deficiency")
    assert mu(big, "augmenting").mu == 25


def test_all_small_graphs_against_networkx():
    # every edge set on 3 + 3 vertices, plus a random sample on 4 + 4
    for mask in range(1 << 9):
        b = BipartiteInstance.from_edges(3, 3, [(k // 3, k % 3) for k in range(9) if mask >> k & 1])
        res = mu(b, "both")
        assert res.mu == nx_matching_number(b)
        assert_certified(b, res)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 2**32 - 1), st.floats(0.05, 0.8))
def test_random_instances_against_networkx(n_left, n_right, seed, p):
    b = random_instance(random.Random(seed), n_left, n_right, p)
    res = mu(b, "both")
    assert res.mu == nx_matching_number(b)
    assert_certified(b, res)
    assert_certified(b, mu(b, "augmenting"))


def test_deficiency_witness_is_lowest_mask():
    # S = {0, 1} and S = {0, 2} both have deficiency 1; mask 0b011 is lower
    b = BipartiteInstance.from_edges(3, 2, [(0, 0), (1, 0), (2, 0), (2, 1)])
    res = mu(b, "deficiency")
    assert res.mu == 2 and res.witness_S == (0, 1)


def test_ball_monotonicity_of_mu():
    rng = random.Random(2)
    for _ in range(30):
        g = groups.random_biinvariant(rng.choice(groups.small_groups(8)[4:]), rng)
        F = rng.sample(list(g.elements), rng.randint(1, g.order))
        x = rng.choice(g.elements)
        gF = [g.mul(x, f) for f in F]
        values = sorted({g.norm(e) for e in g.elements})
        for q, r in itertools.combinations(values, 2):
            m_open = matching.matching_number(g, F, gF, BallSpec(q, False))
            m_closed = matching.matching_number(g, F, gF, BallSpec(q))
            m_r = matching.matching_number(g, F, gF, BallSpec(r, False))
            assert m_open <= m_closed <= m_r
            assert 0 <= m_open <= len(F)


def test_collisions_are_flagged():
    g = groups.cyclic(3)
    b = build_RU(g, ["0", "0"], ["1", "2"], BallSpec(1))
    res = mu(b, "both")
    assert res.collisions and res.to_json()["collisions"]
