import random
from fractions import Fraction

import pytest

from metlogic import amenability as am
from metlogic import groups
from metlogic.amenability import Certificate, PhiSpec
from metlogic.errors import BudgetExhaustedError, MetlogicError
from metlogic.logic import Const, Max, Min, TruncSub, evaluate

from .conftest import random_metric_group

HALF = Fraction(1, 2)


def z_ball(radius):
    return groups.enumerate_ball({"family": "zd", "d": 1}, radius)


def test_phi_k1_structure():
    f = am.build_phi(PhiSpec(1, HALF, HALF))
    # outer max over S in {empty, {x1}}, then -. q
    assert isinstance(f, TruncSub) and f.right == Const(HALF)
    assert isinstance(f.left, Max) and len(f.left.args) == 2
    neg = am.build_phi(PhiSpec(1, HALF, HALF, "negative"))
    assert isinstance(neg, Min)


def test_phi_holds_fast_examples():
    g = groups.cyclic(4)
    F, y = ["0", "1"], "1"
    assert am.phi_holds_fast(g, F, y, PhiSpec(2, HALF, HALF))
    assert not am.phi_holds_fast(g, F, y, PhiSpec(2, HALF, Fraction(3, 4)))
    assert am.phi_holds_fast(g, F, y, PhiSpec(2, HALF, Fraction(3, 4), "negative"))
    for x in g.elements:
        assert am.phi_holds_fast(g, list(g.elements), x, PhiSpec(4, HALF, Fraction(99, 100)))


def test_negative_variant_with_no_admissible_sets():
    # k = 1, theta tiny: t(empty) < 0, so no S' has |S'| < t and that branch is an empty min
    g = groups.cyclic(3)
    spec = PhiSpec(1, HALF, Fraction(1, 100), "negative")
    s = groups.group_structure(g)
    phi = am.build_phi(spec)
    env = {"x1": "0", "y": "1"}
    assert evaluate(phi.args[0], s, env) == 1  # the bound D, by the empty-min convention
    # S = {x1} admits S' = empty, so the whole formula is q -. d(y x1, x1) = 0
    assert evaluate(phi, s, env) == 0
    assert am.phi_holds_fast(g, ["0"], "1", spec)


def test_lemma_equivalence_small_corpus(corpus):
    rng = random.Random(7)
    for _ in range(60):
        g = random_metric_group(rng, corpus)
        k = rng.randint(1, min(3, g.order))
        F = rng.sample(list(g.elements), k)
        y = rng.choice(g.elements)
        q = Fraction(rng.randint(1, 7), 8)
        theta = Fraction(rng.randint(1, 5), 6)
        for variant in ("positive", "negative"):
            rep = am.lemma_equivalence_check(g, F, y, PhiSpec(k, q, theta, variant))
            assert rep.agree
            assert rep.ast_value == rep.closed_form


def test_integral_threshold_tie():
    # theta |F| = 1 exactly: mu = 1 must count as enough
    g = groups.cyclic(4)
    rep = am.lemma_equivalence_check(g, ["0", "1"], "1", PhiSpec(2, HALF, HALF))
    assert rep.fast_holds and rep.formula_holds


def test_lemma_budget():
    g = groups.cyclic(8)
    with pytest.raises(BudgetExhaustedError):
        am.lemma_equivalence_check(g, list(g.elements)[:6], "1", PhiSpec(6, HALF, HALF), budget=1000)


def test_repeated_F_needs_multiset():
    g = groups.cyclic(4)
    with pytest.raises(MetlogicError):
        am.lemma_equivalence_check(g, ["0", "0"], "1", PhiSpec(2, HALF, HALF))
    rep = am.lemma_equivalence_check(g, ["0", "0"], "1", PhiSpec(2, HALF, HALF), multiset=True)
    assert rep.agree


def test_verify_certificate_examples():
    z = z_ball(6)
    E = z.parse_list("1,-1")
    F = z.parse_list("0,1,2,3")
    ok = am.verify_certificate(z, Certificate(z.name, tuple(E), HALF, HALF, True, tuple(F)))
    assert ok.verdict == "valid" and [m for m, _ in ok.margins] == [3, 3]
    bad = am.verify_certificate(z, Certificate(z.name, tuple(E), Fraction(7, 8), HALF, True, tuple(F)))
    assert bad.verdict == "invalid"
    edge = am.verify_certificate(z, Certificate(z.name, tuple(E), HALF, HALF, True, tuple(z.parse_list("3,4,5,6"))))
    assert edge.verdict == "valid"  # ambient products are fine under the discrete metric
    zm = z.with_metric(z.metric_rows())
    far = am.verify_certificate(zm, Certificate(z.name, tuple(E), HALF, HALF, True, tuple(z.parse_list("-6,6"))))
    assert far.verdict == "inconclusive at radius"


def test_compact_case_margin():
    g = groups.cyclic(5)
    res = am.folner_search(g, ["1"], Fraction(99, 100), HALF)
    assert res.strategy == "compact" and res.certificate.F == g.elements
    assert res.certificate.margins == ((5, Fraction(1, 20)),)


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_ball_growing_finds_intervals(n):
    z = z_ball(n + 2)
    res = am.folner_search(z, z.parse_list("1,-1"), Fraction(n - 1, n), HALF, strategy="ball-growing")
    assert res.found
    labels = sorted(int(z.label(x)) for x in res.certificate.F)
    assert labels == list(range(labels[0], labels[0] + n))
    assert am.verify_certificate(z, res.certificate).verdict == "valid"


def test_greedy_local_finds_a_certificate():
    z = z_ball(8)
    res = am.folner_search(z, z.parse_list("1,-1"), Fraction(2, 3), HALF, strategy="greedy-local")
    assert res.found and am.verify_certificate(z, res.certificate).verdict == "valid"


def test_free_group_not_found_is_exhaustive():
    f = groups.enumerate_ball({"family": "free", "rank": 2}, 2)
    res = am.folner_search(f, f.parse_list("a,A,b,B"), Fraction(9, 10), HALF, workers=2)
    assert not res.found
    nf = res.not_found
    assert nf.exhaustive and nf.searched == 2**17 - 1 and len(nf.worst) == 10
    assert nf.statement() == "no F within the searched family satisfies the bound"
    assert all(m < 0 for m, _ in nf.worst)
    heuristic = am.folner_search(f, f.parse_list("a,A,b,B"), Fraction(9, 10), HALF, strategy="greedy-local")
    assert not heuristic.found and not heuristic.not_found.exhaustive
    assert "not a proof" in heuristic.not_found.statement()


def test_exhaustive_budget():
    f = groups.enumerate_ball({"family": "free", "rank": 2}, 2)
    with pytest.raises(BudgetExhaustedError):
        am.folner_search(f, f.parse_list("a"), HALF, HALF, budget=1000)


def test_exhaustive_is_worker_independent():
    f = groups.enumerate_ball({"family": "free", "rank": 2}, 2)
    ground = f.elements[:13]
    runs = [am.folner_search(f, f.parse_list("a,b"), Fraction(3, 4), HALF, ground=ground, workers=w) for w in (1, 3)]
    assert runs[0].not_found.to_json(f) == runs[1].not_found.to_json(f)


def test_certificate_monotonicity():
    rng = random.Random(4)
    z = z_ball(10)
    E = z.parse_list("1,-1,2")
    for _ in range(20):
        a = rng.randint(-4, 0)
        F = [z.parse(str(i)) for i in range(a, a + rng.randint(1, 6))]
        q = Fraction(rng.randint(1, 3), 4)
        margins = am.certificate_margins(z, E, F, HALF, q)
        if all(m >= 0 for _, m in margins):
            for theta in (Fraction(1, 4), Fraction(1, 3)):
                assert all(m >= 0 for _, m in am.certificate_margins(z, E, F, theta, q))
            assert all(m >= 0 for _, m in am.certificate_margins(z, E, F, HALF, q + Fraction(1, 4)))


def test_identity_modulus_in_y(corpus):
    rng = random.Random(9)
    for _ in range(40):
        g = random_metric_group(rng, corpus)
        k = rng.randint(1, min(3, g.order))
        F = rng.sample(list(g.elements), k)
        spec = PhiSpec(k, Fraction(rng.randint(1, 7), 8), Fraction(rng.randint(1, 5), 6), rng.choice(["positive", "negative"]))
        y, y2 = rng.choice(g.elements), rng.choice(g.elements)
        a = am.phi_value_ast(g, F, y, spec)
        b = am.phi_value_ast(g, F, y2, spec)
        assert abs(a - b) <= g.dist(y, y2)


def test_schema_examples():
    g = groups.cyclic(6)
    rep = am.schema_value(g, HALF, HALF, 1, 6, am.sample_tuples(g, 1))
    assert rep.verdicts[HALF] == "certified-for-samples"
    assert all(v == 0 for v in rep.values(HALF))
    z = z_ball(8)
    ys = [tuple(z.parse_list("1,-1"))]
    rep = am.schema_value(z, HALF, HALF, 2, 4, ys, ground=z.parse_list("-2,-1,0,1,2,3"))
    assert rep.verdicts[HALF] == "certified-for-samples"
    f = groups.enumerate_ball({"family": "free", "rank": 2}, 2)
    rep = am.schema_value(f, Fraction(9, 10), HALF, 2, 17, [tuple(f.parse_list("a,b"))], ast_check_k=2)
    t = rep.tuples[0]
    assert t.exhaustive and all(R > HALF for _, _, R in t.per_k)
    assert rep.verdicts[HALF] == "refuted-for-sample"


def test_schema_values_match_the_formula():
    # ast_check_k re-evaluates the chosen F through the formula and raises on mismatch
    rng = random.Random(1)
    g = groups.random_biinvariant(groups.dihedral(4), rng)
    rep = am.schema_value(g, Fraction(2, 3), [Fraction(1, 4), HALF], 2, 3, am.sample_tuples(g, 2, samples=4, seed=2))
    assert all(t.ast_checked == [1, 2, 3] for t in rep.tuples)
    neg = am.schema_value(g, Fraction(2, 3), [Fraction(1, 4), HALF], 2, 3, am.sample_tuples(g, 2, samples=4, seed=2),
                          variant="nonamen")
    assert set(neg.verdicts) == {Fraction(1, 4), HALF}
