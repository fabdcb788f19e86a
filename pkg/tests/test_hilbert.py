import math

import numpy as np
import pytest

from metlogic import hilbert as hb
from metlogic.errors import SortError
from metlogic.hilbert import SortedVector
from metlogic.logic import Dist, Inf, Pred, Sup, Var, evaluate

TOL = 1e-9


def vec(rng, dim=3, radius=1.0, sort=None):
    return SortedVector.of(hb.random_vector(rng, dim, radius), sort)


@pytest.mark.parametrize(
    "c, k", [(0, 1), (0.5, 1), (1, 2), (1.5, 2), (2 - 1e-12, 2), (2, 3), (1j, 2), (-2.5, 3)]
)
def test_scalar_sort_rule(c, k):
    assert hb.scalar_sort_factor(c) == k
    v = SortedVector.of([1, 0], 1)
    assert hb.scalar(c, v).sort == k


def test_add_and_include():
    rng = np.random.default_rng(0)
    u, v = vec(rng), vec(rng)
    zero = SortedVector.of([0, 0, 0], 1)
    assert hb.add(v, zero).sort == 2 and np.allclose(hb.add(v, zero).array, v.array)
    assert np.allclose(hb.add(u, v).array, hb.add(v, u).array)
    w = hb.include(v, 2)
    assert w.coords == v.coords and w.sort == 2
    assert hb.include(hb.include(v, 2), 5) == hb.include(v, 5)
    with pytest.raises(SortError):
        hb.include(v, 1)
    with pytest.raises(SortError):
        hb.add(v, w)
    with pytest.raises(SortError):
        SortedVector.of([2, 0], 1)


def test_inner_product_examples():
    rng = np.random.default_rng(1)
    u, v = vec(rng), vec(rng)
    re, im = hb.inner(v, v)
    assert abs(re - v.norm() ** 2) < TOL and abs(im) < TOL
    a, b = hb.inner(u, v), hb.inner(v, u)
    assert abs(a[0] - b[0]) < TOL and abs(a[1] + b[1]) < TOL


def test_random_pair_laws():
    rng = np.random.default_rng(2)
    for _ in range(1000):
        u, v = vec(rng, radius=rng.random()), vec(rng, radius=rng.random())
        s, d = hb.add(u, v), hb.sub(u, v)
        assert abs(s.norm() ** 2 + d.norm() ** 2 - 2 * u.norm() ** 2 - 2 * v.norm() ** 2) < TOL
        re, im = hb.inner(u, v)
        assert math.hypot(re, im) <= u.norm() * v.norm() + TOL
        assert abs(re) <= 1 and abs(im) <= 1


def test_metric_on_random_triples():
    rng = np.random.default_rng(3)
    for _ in range(1000):
        a, b, c = vec(rng), vec(rng), vec(rng)
        assert hb.dist(a, a) == 0
        assert hb.dist(a, b) == hb.dist(b, a)
        assert hb.dist(a, c) <= hb.dist(a, b) + hb.dist(b, c) + TOL


def test_inner_product_predicate_laws():
    rng = np.random.default_rng(4)
    for _ in range(200):
        u, w, v = vec(rng, radius=0.5), vec(rng, radius=0.5), vec(rng)
        r = float(rng.uniform(-1, 1))
        lhs = hb.inner(hb.add(hb.scalar(r, u), w), hb.include(v, 2))
        rhs = r * hb.inner(u, v)[0] + hb.inner(w, v)[0]
        assert abs(lhs[0] - rhs) < TOL
        assert hb.inner(v, v)[0] >= 0
    zero = SortedVector.of([0, 0, 0], 1)
    assert hb.inner(zero, zero) == (0.0, 0.0)


def test_sort_soundness_of_outputs():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 4))
        u, v = vec(rng, radius=n * rng.random(), sort=n), vec(rng, radius=n * rng.random(), sort=n)
        c = complex(*rng.normal(size=2))
        for out in (hb.add(u, v), hb.sub(u, v), hb.scalar(c, u)):
            assert out.norm() <= out.sort + TOL


def test_structure_satisfies_metric_axioms_and_evaluates():
    s = hb.hilbert_structure(1, 2, h=0.5, scalars=(1.5j,))
    s.validate()
    assert {"add_1", "sub_1", "I_1_2", "scale_0_1", "re_1", "im_2"} <= set(s.functions) | set(s.predicates)
    u = Var("u")
    sup_norm = evaluate(Sup("u", "B1", Pred("re_1", (u, u))), s)
    assert abs(sup_norm - 1.0) < TOL
    # net estimate of the covering radius of B1 by its own net is 0
    assert evaluate(Sup("u", "B1", Inf("v", "B1", Dist(u, Var("v")))), s) == 0


def test_inner_range_is_enforced():
    big = SortedVector((2.0, 0.0), 2)
    assert hb.inner(big, big) == (4.0, 0.0)
    # admission within tau keeps the product inside [-n^2, n^2] up to tau
    edge = SortedVector((1.0 + TOL / 2, 0.0), 1)
    assert abs(hb.inner(edge, edge)[0]) <= 1 + 2 * TOL


def test_json_encoding():
    v = SortedVector.of([1j, 0.5])
    assert v.to_json() == {"coords": [[0.0, 1.0], [0.5, 0.0]], "sort": 2}
