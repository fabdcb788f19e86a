import math
from fractions import Fraction

import numpy as np
import pytest

from metlogic import groups, io
from metlogic import unitary as un
from metlogic.errors import NotApplicableError
from metlogic.logic import Modulus

TOL = 1e-9


def z_ball(radius):
    return groups.enumerate_ball({"family": "zd", "d": 1}, radius)


def z_family(g, thetas):
    return [un.z_characters(g, [t]) for t in thetas]


def test_check_rep_examples():
    z2 = groups.cyclic(2)
    assert un.check_rep(un.trivial(groups.cyclic(5), 3)).passed
    assert un.check_rep(un.sign(z2)).passed
    bad = un.trivial(z2, 2)
    bad.matrices = dict(bad.matrices)
    bad.matrices["1"] = math.sqrt(1 + 1e-3) * np.eye(2, dtype=complex)
    rep = un.check_rep(bad)
    assert not rep.passed and abs(rep.unitarity - 1e-3) < 1e-12


def test_generator_completion_matches_regular(corpus):
    for g in corpus[:8]:  # the cyclic groups
        reg = un.regular(g)
        gen = un.from_generators(g, {"1": reg.matrix("1")} if g.order > 1 else {"0": reg.matrix("0")})
        assert set(gen.matrices) == set(g.elements)
        for x in g.elements:
            assert np.allclose(gen.matrix(x), reg.matrix(x))


def test_every_corpus_rep_is_unitary_and_preserves_norm(corpus):
    rng = np.random.default_rng(0)
    for g in corpus[1:]:
        for r in (un.regular(g), un.regular_complement(g)):
            assert un.check_rep(r).passed
            v = rng.normal(size=r.dim) + 1j * rng.normal(size=r.dim)
            for x in g.elements:
                assert abs(np.linalg.norm(r.act(x, v)) - np.linalg.norm(v)) < TOL


def test_F_continuity_examples():
    g = groups.cyclic(6)
    assert un.check_F_continuity(un.regular(g)).passed
    assert un.check_F_continuity(un.cyclic_character(6, 1, g)).passed
    # a metric where distinct elements are close makes an identity modulus fail
    m = groups.cyclic(6, metric=lambda a, b: Fraction(((a - b) % 6) * (6 - (a - b) % 6), 9))
    rep = un.check_F_continuity(un.regular(m))
    assert not rep.passed and rep.witness is not None
    loose = un.regular(m)
    loose.modulus = Modulus.scaled(Fraction(1, 100))
    assert un.check_F_continuity(loose).passed


def test_extension_scales_linearly():
    r = un.regular_complement(groups.cyclic(5))
    rng = np.random.default_rng(1)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    for i in (2, 3):
        a = np.linalg.norm(r.act("1", i * v) - r.act("2", i * v))
        b = np.linalg.norm(r.act("1", v) - r.act("2", v))
        assert abs(a - i * b) < TOL


def test_fixed_space_examples():
    g = groups.cyclic(7)
    assert un.fixed_space(un.trivial(g, 3)).shape[1] == 3
    assert un.fixed_space(un.regular(g)).shape[1] == 1
    assert un.fixed_space(un.regular_complement(g)).shape[1] == 0
    z = z_ball(4)
    assert un.fixed_space(un.z_characters(z, [0.0, 0.5])).shape[1] == 1
    bare = groups.MetricGroup("enumerated", z.elements, z.identity, family=z.family, radius=4)
    with pytest.raises(NotApplicableError):
        un.fixed_space(un.z_characters(bare, [0.5]))


def test_radius_examples():
    g = groups.cyclic(5)
    t = un.epsilon_invariant_radius(un.trivial(g, 2), ["1", "2"])
    assert t.lo == t.hi == 0.0 and t.fixed_space_dim == 2
    for n in (4, 6, 9):
        r = un.epsilon_invariant_radius(un.regular_complement(groups.cyclic(n)), ["1"])
        assert r.lo == r.hi and abs(r.hi - 2 * math.sin(math.pi / n)) < TOL
    s = un.epsilon_invariant_radius(un.sign(groups.cyclic(2)), ["1"])
    assert abs(s.hi - 2) < TOL


def test_radius_interval_is_ordered(corpus):
    for g in corpus[2:]:
        r = un.regular_complement(g)
        for Q in (g.elements[1:2], g.elements[1:3], g.elements):
            rep = un.epsilon_invariant_radius(r, Q)
            assert rep.lo <= rep.hi + TOL
            # the witness really attains hi
            assert max(np.linalg.norm(r.act(x, rep.witness) - rep.witness) for x in Q) >= rep.hi - TOL


def test_kazhdan_pair_examples():
    rep = un.kazhdan_pair_check(un.sign(groups.cyclic(2)), samples=50)
    assert rep.passed and abs(rep.min_max_residual - 2) < TOL
    assert un.kazhdan_pair_check(un.regular_complement(groups.cyclic(9)), samples=1000).passed
    with pytest.raises(NotApplicableError):
        un.kazhdan_pair_check(un.regular(groups.cyclic(3)))


def test_niv_examples():
    g = groups.cyclic(6)
    t = un.niv_value(un.trivial(g))
    assert (t.value, t.tag) == (1, "invariant-witness") and abs(t.sampled_estimate - 1) < TOL
    c = un.niv_value(un.regular_complement(g))
    assert (c.value, c.tag) == (0, "kazhdan-pair") and c.sampled_estimate <= TOL
    assert un.niv_value(un.sign(groups.cyclic(2))).value == 0


def test_kdelta_examples():
    g = groups.cyclic(4)
    assert un.kdelta_axiom_check(un.trivial(g, 2), Fraction(1, 2), 2, 1, 3).residual == 0
    z = z_ball(8)
    chars = un.z_characters(z, [math.pi * 2.0**-j for j in range(1, 9)])
    pool = z.parse_list("-8,-5,0,3,8")
    import itertools

    rep = un.kdelta_axiom_check(chars, Fraction(1, 2), 2, 8, 4, itertools.product(pool, repeat=2))
    assert rep.holds and rep.residual <= TOL
    comp = un.kdelta_axiom_check(un.regular_complement(groups.cyclic(10)), Fraction(1, 2), 1, 1, 100)
    assert not comp.holds and comp.residual >= 2 * math.sin(math.pi / 10) - 1 / 100 - TOL
    assert 0 < comp.scaled_residual < comp.residual


def test_kdelta_uses_the_delta_ball():
    m = groups.cyclic(6, metric=lambda a, b: Fraction(((a - b) % 6) * (6 - (a - b) % 6), 9))
    assert un.k_delta(m, Fraction(5, 9)) == ("0", "1", "5")
    assert un.k_delta(m, Fraction(1, 2)) == ("0",)


def test_refute_examples():
    g = groups.cyclic(8)
    gap = 2 * math.sin(math.pi / 8)
    assert un.refute_kazhdan_set(["1"], gap * 0.9, [un.regular_complement(g)]) is None
    z = z_ball(4)
    thetas = [0.0, 2.0, 0.5, 0.05, 0.01]
    hit = un.refute_kazhdan_set(z.parse_list("1,-1"), 0.1, z_family(z, thetas))
    assert hit is not None
    idx, _, rad = hit
    assert thetas[idx] == 0.05 and 2 * math.sin(0.05 / 2) == pytest.approx(rad.hi, abs=TOL)
    assert un.refute_kazhdan_set(z.parse_list("1,-1"), 0.0, z_family(z, thetas)) is None


def test_rep_files(data_dir):
    r = io.load_rep(data_dir / "reps" / "z4_rotation.json")
    assert r.dim == 2 and un.check_rep(r).passed and set(r.matrices) == {"0", "1", "2", "3"}
    c = io.load_rep(data_dir / "reps" / "z12_complement.json")
    assert c.dim == 11
