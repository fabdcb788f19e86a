import itertools
import random
from fractions import Fraction

import pytest

from metlogic import groups, io
from metlogic.errors import (
    EnumerationCapError,
    GroupAxiomError,
    MetlogicError,
    MetricAxiomError,
    UndefinedProductError,
)
from metlogic.groups import BallSpec


def s3_left_invariant():
    """S3 with d(x, y) = w(x^-1 y) for a class-breaking weight w."""
    g = groups.symmetric(3)
    w = {"012": 0, "021": Fraction(1, 2), "102": 1, "210": 1, "120": 1, "201": 1}
    return g.with_metric([[w[g.mul(g.inv(a), b)] for b in g.elements] for a in g.elements])


def test_z4_discrete_is_valid_and_bi_invariant():
    g = groups.cyclic(4)
    assert g.order == 4 and g.bi_invariant and g.is_discrete


def test_broken_associativity_has_witness():
    # a Latin square with identity 0 that is not associative
    table = [[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]]
    with pytest.raises(GroupAxiomError) as err:
        groups.make_finite(table)
    assert len(err.value.detail["witness"]) == 3


def test_missing_inverse_and_bad_metric():
    with pytest.raises(GroupAxiomError):
        groups.make_finite([["0", "1"], ["1", "1"]], elements=["0", "1"])
    with pytest.raises(MetricAxiomError):
        groups.cyclic(3).with_metric([[0, 1, 1], [1, 0, 3], [1, 3, 0]])


def test_s3_left_invariant_metric_is_flagged():
    g = s3_left_invariant()
    assert not g.bi_invariant
    u, x, y, side = groups.bi_invariance_witness(g)
    assert side in ("left", "right")


def test_every_corpus_group_satisfies_the_axioms(corpus):
    for g in corpus:
        e = g.identity
        for a in g.elements:
            assert g.mul(a, g.inv(a)) == e == g.mul(g.inv(a), a)
            for b, c in itertools.product(g.elements, repeat=2):
                assert g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c))
    assert sorted(g.order for g in corpus) == [1, 2, 3, 4, 4, 5, 6, 6, 7, 8, 8, 8, 8, 8]


def test_enumeration_sizes():
    assert groups.enumerate_ball({"family": "free", "rank": 2}, 2).order == 17
    z = groups.enumerate_ball({"family": "zd", "d": 1}, 3)
    assert sorted(int(z.label(x)) for x in z.elements) == list(range(-3, 4))
    with pytest.raises(EnumerationCapError):
        groups.enumerate_ball({"family": "free", "rank": 2}, 6, cap=100)


def test_matrix_enumeration_deduplicates():
    spec = {"family": "matrices", "generators": [[[1, 1], [0, 1]], [[0, -1], [1, 0]]]}
    g = groups.enumerate_ball(spec, 2)
    labels = [g.label(x) for x in g.elements]
    assert len(labels) == len(set(labels))
    # S has order 4, so S^2 = S^-2 collapses two words into one matrix
    assert g.order < 1 + 4 + 4 * 4


def test_enumerated_partial_multiplication():
    z = groups.enumerate_ball({"family": "zd", "d": 1}, 3)
    three, one = z.parse("3"), z.parse("1")
    assert z.label(z.mul(z.parse("2"), one)) == "3"
    with pytest.raises(UndefinedProductError):
        z.mul(three, one)
    f = groups.enumerate_ball({"family": "free", "rank": 2}, 3)
    for a, b, c in itertools.product(f.elements[:9], repeat=3):
        try:
            left = f.mul(f.mul(a, b), c)
            right = f.mul(a, f.mul(b, c))
        except UndefinedProductError:
            continue
        assert left == right


def test_dstar_examples():
    rng = random.Random(3)
    g = groups.random_biinvariant(groups.cyclic(5), rng)
    assert groups.biinvariantize(g).metric_rows() == g.metric_rows()
    d = groups.symmetric(3)
    assert groups.biinvariantize(d).metric_rows() == d.metric_rows()
    s = s3_left_invariant()
    star = groups.biinvariantize(s)
    assert star.bi_invariant
    rows, base = star.metric_rows(), s.metric_rows()
    for i, j in itertools.product(range(6), repeat=2):
        brute = max(
            s.dist(s.mul(s.mul(u, s.elements[i]), v), s.mul(s.mul(u, s.elements[j]), v))
            for u in s.elements
            for v in s.elements
        )
        assert rows[i][j] == brute >= base[i][j]
    with pytest.raises(MetlogicError):
        groups.biinvariantize(groups.enumerate_ball({"family": "zd", "d": 1}, 2))


def test_dstar_is_bi_invariant_on_random_metrics(corpus):
    rng = random.Random(11)
    for g in corpus:
        h = groups.biinvariantize(g.with_metric(groups.random_metric(g.order, rng)))
        for u, v, x, y in itertools.product(h.elements[:4], repeat=4):
            assert h.dist(h.mul(h.mul(u, x), v), h.mul(h.mul(u, y), v)) == h.dist(x, y)


def test_ball_examples():
    g = groups.cyclic(6)
    assert groups.ball(g, BallSpec(Fraction(1, 2))) == ("0",)
    assert groups.ball(g, BallSpec(1)) == g.elements
    m = groups.cyclic(6, metric=lambda a, b: Fraction(((a - b) % 6) * (6 - (a - b) % 6), 9))
    assert m.bi_invariant
    assert groups.ball(m, BallSpec(Fraction(5, 9))) == ("0", "1", "5")
    assert groups.ball(m, BallSpec(Fraction(8, 9), closed=False)) == ("0", "1", "5")
    assert groups.ball(m, BallSpec(Fraction(8, 9))) == ("0", "1", "2", "4", "5")


def test_ball_monotonicity():
    rng = random.Random(5)
    g = groups.random_biinvariant(groups.dihedral(4), rng)
    qs = sorted({g.norm(x) for x in g.elements} | {Fraction(1, 7), Fraction(5, 7)})
    for q, r in itertools.combinations(qs, 2):
        op, cl = set(groups.ball(g, BallSpec(q, False))), set(groups.ball(g, BallSpec(q)))
        assert op <= cl <= set(groups.ball(g, BallSpec(r, False)))


def test_group_file_round_trip(tmp_path, data_dir):
    g = io.load_group(data_dir / "z6_metric.json")
    assert not g.is_discrete and g.bi_invariant
    path = tmp_path / "g.json"
    import json

    path.write_text(json.dumps(g.spec()))
    h = io.load_group(path)
    assert h.elements == g.elements and h.metric_rows() == g.metric_rows()
    f = io.load_group(data_dir / "free2_r2.json")
    assert f.order == 17


def test_metadata_is_carried_verbatim(tmp_path):
    import json

    meta = {"compact K_delta": "asserted by the user", "delta": "1/2"}
    spec = {"kind": "enumerated", "family": "zd", "d": 1, "radius": 2, "metadata": meta}
    p = tmp_path / "z.json"
    p.write_text(json.dumps(spec))
    assert io.load_group(p).metadata == meta
