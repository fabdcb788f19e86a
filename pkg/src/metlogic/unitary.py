"""Unitary representations and the invariant-vector checks built on them.

Everything reduces to the Hermitian operator

    Delta_Q = sum_{x in Q} (I - U_x)^* (I - U_x),

whose quadratic form at v is ``sum_x ||U_x v - v||^2``.  Its kernel is the
joint fixed space of Q, and its least eigenvalue brackets the best
worst-case displacement of a unit vector:
``sqrt(lam / |Q|) <= min_v max_x ||U_x v - v|| <= sqrt(lam)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import MetlogicError, NotApplicableError, UndefinedProductError
from .groups import MetricGroup
from .hilbert import random_vector
from .logic.modulus import Modulus
from .rationals import TAU, to_rational

SQRT2 = math.sqrt(2.0)


@dataclass
class UnitaryRep:
    group: MetricGroup
    dim: int
    matrices: dict  # element -> complex ndarray
    modulus: Modulus = field(default_factory=Modulus.identity)
    name: str = ""

    def matrix(self, g) -> np.ndarray:
        try:
            return self.matrices[g]
        except KeyError:
            raise UndefinedProductError(
                f"representation undefined at {self.group.label(g)}", {"element": self.group.label(g)}
            ) from None

    def act(self, g, v) -> np.ndarray:
        return self.matrix(g) @ v


# ------------------------------------------------------------ constructors


def from_generators(g: MetricGroup, gens: dict, modulus=None, name="") -> UnitaryRep:
    """Complete generator matrices to every element reachable inside the carrier."""
    dim = next(iter(gens.values())).shape[0]
    mats = {g.identity: np.eye(dim, dtype=complex)}
    steps = []
    for s, m in gens.items():
        steps.append((s, np.asarray(m, dtype=complex)))
        si = g.inv(s)
        if si not in gens:
            steps.append((si, np.asarray(m, dtype=complex).conj().T))
    frontier = [g.identity]
    while frontier:
        nxt = []
        for w in frontier:
            for s, m in steps:
                p = g.ambient_mul(w, s)
                if p in g and p not in mats:
                    mats[p] = mats[w] @ m
                    nxt.append(p)
        frontier = nxt
    return UnitaryRep(g, dim, mats, modulus or Modulus.identity(), name)


def trivial(g: MetricGroup, dim: int = 1) -> UnitaryRep:
    eye = np.eye(dim, dtype=complex)
    return UnitaryRep(g, dim, {x: eye for x in g.elements}, name=f"trivial-{dim}")


def regular(g: MetricGroup) -> UnitaryRep:
    """Left regular representation ``e_h -> e_{gh}`` of a finite table group."""
    if g.kind != "table":
        raise NotApplicableError("the regular representation needs a finite table group")
    n = g.order
    mats = {}
    for a in g.elements:
        m = np.zeros((n, n), dtype=complex)
        for j, h in enumerate(g.elements):
            m[g.index(g.mul(a, h)), j] = 1
        mats[a] = m
    return UnitaryRep(g, n, mats, name="regular")


def helmert_basis(n: int) -> np.ndarray:
    """Orthonormal basis (columns) of the complement of the constant vector."""
    b = np.zeros((n, n - 1))
    for k in range(1, n):
        b[:k, k - 1] = 1.0
        b[k, k - 1] = -k
        b[:, k - 1] /= math.sqrt(k * (k + 1))
    return b


def regular_complement(g: MetricGroup) -> UnitaryRep:
    """The regular representation restricted to the orthogonal complement of the constants."""
    reg = regular(g)
    b = helmert_basis(g.order).astype(complex)
    mats = {x: b.T @ m @ b for x, m in reg.matrices.items()}
    return UnitaryRep(g, g.order - 1, mats, name="regular-complement")


def character(g: MetricGroup, chi, name="character") -> UnitaryRep:
    """One-dimensional representation ``x -> chi(x)``."""
    return UnitaryRep(g, 1, {x: np.array([[complex(chi(x))]]) for x in g.elements}, name=name)


def sign(g: MetricGroup) -> UnitaryRep:
    """Sign character of Z/2 (the non-identity element acts by -1)."""
    if g.order != 2:
        raise NotApplicableError("sign representation is defined here for groups of order 2")
    return character(g, lambda x: 1 if x == g.identity else -1, "sign")


def z_characters(g: MetricGroup, thetas) -> UnitaryRep:
    """``x -> diag(exp(i theta_j x))`` on an enumerated ball of Z."""
    if g.kind != "enumerated" or getattr(g.family, "name", "") != "zd" or g.family.d != 1:
        raise NotApplicableError("character family needs an enumerated ball of Z")
    th = np.asarray(thetas, dtype=float)
    mats = {x: np.diag(np.exp(1j * th * x[0])) for x in g.elements}
    return UnitaryRep(g, len(th), mats, name="z-characters")


def cyclic_character(n: int, j: int, g: MetricGroup) -> UnitaryRep:
    w = complex(math.cos(2 * math.pi * j / n), math.sin(2 * math.pi * j / n))
    return character(g, lambda x: w ** int(g.elements.index(x)), f"chi{j}")


# ------------------------------------------------------------ validation


def _opnorm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2)) if m.size else 0.0


@dataclass
class RepCheck:
    passed: bool
    unitarity: float
    homomorphism: float
    witness: dict

    def to_json(self):
        return {
            "passed": self.passed,
            "worst_unitarity": self.unitarity,
            "worst_homomorphism": self.homomorphism,
            "witness": self.witness,
        }


def check_rep(r: UnitaryRep, tol: float = TAU) -> RepCheck:
    """Unitarity of every matrix and the homomorphism law on every defined product."""
    g = r.group
    eye = np.eye(r.dim)
    worst_u, wu = 0.0, None
    for x, m in r.matrices.items():
        e = _opnorm(m.conj().T @ m - eye)
        if e > worst_u:
            worst_u, wu = e, g.label(x)
    worst_h, wh = 0.0, None
    elems = list(r.matrices)
    for a in elems:
        for b in elems:
            p = g.ambient_mul(a, b)
            if p not in r.matrices:
                continue
            e = _opnorm(r.matrices[a] @ r.matrices[b] - r.matrices[p])
            if e > worst_h:
                worst_h, wh = e, [g.label(a), g.label(b)]
    ok = worst_u <= tol and worst_h <= tol
    return RepCheck(ok, worst_u, worst_h, {"unitarity": wu, "homomorphism": wh})


@dataclass
class ContinuityReport:
    passed: bool
    checked: int
    worst_excess: float
    witness: dict | None
    extension_checked: int

    def to_json(self):
        return {
            "passed": self.passed,
            "checked": self.checked,
            "extension_checked": self.extension_checked,
            "worst_excess": self.worst_excess,
            "witness": self.witness,
        }


def check_F_continuity(r: UnitaryRep, samples: int = 50, eps_grid=None, scales=(2, 3), seed: int = 0):
    """``d(g, h) < F(eps)`` must give ``||g v - h v|| <= eps`` on sampled v in B_1.

    For v scaled into B_i the extended modulus ``F_i(eps) = F(eps / i)``
    is checked the same way.
    """
    g = r.group
    eps_grid = [Fraction(1, 16), Fraction(1, 8), Fraction(1, 4), Fraction(1, 2), Fraction(1)] if eps_grid is None else [to_rational(e) for e in eps_grid]
    rng = np.random.default_rng(seed)
    elems = list(r.matrices)
    checked = ext = 0
    worst, witness = 0.0, None
    for _ in range(samples):
        v = random_vector(rng, r.dim, float(rng.uniform(0, 1)))
        for i in (1,) + tuple(scales):
            w = i * v
            for eps in eps_grid:
                delta = r.modulus(eps / i)
                for a in elems:
                    for b in elems:
                        if not g.dist(a, b) < delta:
                            continue
                        diff = float(np.linalg.norm(r.matrices[a] @ w - r.matrices[b] @ w))
                        if i == 1:
                            checked += 1
                        else:
                            ext += 1
                        if diff - float(eps) > worst + TAU:
                            worst = diff - float(eps)
                            witness = {"g": g.label(a), "h": g.label(b), "eps": str(eps), "scale": i}
    return ContinuityReport(worst <= TAU, checked, worst, witness, ext)


# ------------------------------------------------------------ spectra


def delta_operator(r: UnitaryRep, Q) -> np.ndarray:
    eye = np.eye(r.dim, dtype=complex)
    acc = np.zeros((r.dim, r.dim), dtype=complex)
    for x in Q:
        d = eye - r.matrix(x)
        acc += d.conj().T @ d
    return acc


def fixed_space(r: UnitaryRep, generators=None) -> np.ndarray:
    """Orthonormal basis (columns) of the joint fixed space.

    Table groups use every element; enumerated balls need a generating set
    (default: the ball's own generators).
    """
    g = r.group
    if generators is None:
        if g.kind == "table":
            generators = g.elements
        elif g.generators:
            generators = g.generators
        else:
            raise NotApplicableError("a generating set is required for an enumerated ball")
    vals, vecs = np.linalg.eigh(delta_operator(r, generators))
    return vecs[:, vals <= TAU * max(1, len(generators))]


@dataclass
class InvarianceReport:
    Q: tuple
    lo: float
    hi: float
    witness: np.ndarray
    fixed_space_dim: int
    method: str = "eigen-bound+witness"

    def to_json(self, g: MetricGroup):
        return {
            "Q": [g.label(x) for x in self.Q],
            "radius_interval": [self.lo, self.hi],
            "method": self.method,
            "witness": [[z.real, z.imag] for z in self.witness.tolist()],
            "fixed_space_dim": self.fixed_space_dim,
        }


def _max_residual(r: UnitaryRep, Q, v) -> float:
    return max(float(np.linalg.norm(r.matrix(x) @ v - v)) for x in Q)


def epsilon_invariant_radius(r: UnitaryRep, Q) -> InvarianceReport:
    """Interval for ``min_{||v|| = 1} max_{x in Q} ||U_x v - v||``.

    ``lo = sqrt(lam / |Q|)`` (max dominates the mean square) and ``hi`` the
    max residual at the least eigenvector, itself at most ``sqrt(lam)``.
    For a single element both equal the residual at the eigenvector.
    """
    Q = tuple(dict.fromkeys(Q))
    if not Q:
        raise MetlogicError("Q must be nonempty")
    vals, vecs = np.linalg.eigh(delta_operator(r, Q))
    lam = max(float(vals[0]), 0.0)
    w = vecs[:, 0]
    # sqrt(lam) turns float noise of order 1e-16 into 1e-8, so the residual
    # measured at the witness caps it
    hi = min(math.sqrt(lam), _max_residual(r, Q, w))
    lo = hi if len(Q) == 1 else min(math.sqrt(lam / len(Q)), hi)
    fdim = int(np.sum(vals <= TAU * len(Q)))
    return InvarianceReport(Q, lo, hi, w, fdim)


@dataclass
class KazhdanReport:
    passed: bool
    samples: int
    min_max_residual: float
    bound: float = SQRT2

    def to_json(self):
        return {
            "passed": self.passed,
            "samples": self.samples,
            "min_observed": self.min_max_residual,
            "bound": self.bound,
        }


def _require_table(r: UnitaryRep):
    if r.group.kind != "table":
        raise NotApplicableError("this check needs a finite table group")


def whole_group_residuals(r: UnitaryRep, vs: np.ndarray) -> np.ndarray:
    """For each column v of ``vs``, ``max_g ||U_g v - v||``."""
    out = np.zeros(vs.shape[1])
    for x in r.group.elements:
        out = np.maximum(out, np.linalg.norm(r.matrix(x) @ vs - vs, axis=0))
    return out


def _unit_samples(rng, dim, n):
    z = rng.standard_normal((dim, n)) + 1j * rng.standard_normal((dim, n))
    return z / np.linalg.norm(z, axis=0)


def kazhdan_pair_check(r: UnitaryRep, samples: int = 1000, seed: int = 0) -> KazhdanReport:
    """Sampled unit vectors must be moved by at least sqrt 2 by some group element."""
    _require_table(r)
    if fixed_space(r).shape[1]:
        raise NotApplicableError("representation has invariant vectors; the check does not apply")
    rng = np.random.default_rng(seed)
    res = whole_group_residuals(r, _unit_samples(rng, r.dim, samples))
    lo = float(res.min())
    return KazhdanReport(lo >= SQRT2 - TAU, samples, lo)


@dataclass
class NivReport:
    value: int
    tag: str
    sampled_estimate: float
    samples: int

    def to_json(self):
        return {
            "value": self.value,
            "tag": self.tag,
            "sampled_estimate": self.sampled_estimate,
            "samples": self.samples,
        }


def niv_value(r: UnitaryRep, samples: int = 1000, seed: int = 0) -> NivReport:
    """``sup_{v in B_1} inf_x (1 -. (||x v - v|| + |1 - ||v|||))``, decided from the fixed space.

    The sampled estimate scans random directions at radii 0, 1/4 .. 1 plus
    the fixed-space basis.
    """
    _require_table(r)
    fixed = fixed_space(r)
    value, tag = (1, "invariant-witness") if fixed.shape[1] else (0, "kazhdan-pair")
    rng = np.random.default_rng(seed)
    dirs = _unit_samples(rng, r.dim, samples)
    if fixed.shape[1]:
        dirs = np.concatenate([fixed, dirs], axis=1)
    res = whole_group_residuals(r, dirs)
    best = 0.0
    for s in (0.0, 0.25, 0.5, 0.75, 1.0):
        # inner inf over x of 1 -. (s ||xu - u|| + 1 - s)
        vals = np.maximum(0.0, 1.0 - (s * res + (1.0 - s)))
        best = max(best, float(vals.max()))
    return NivReport(value, tag, best, dirs.shape[1])


# ------------------------------------------------------------ K_delta


@dataclass
class KDeltaReport:
    residual: float  # unit-sphere candidates, worst tuple
    scaled_residual: float  # radial optimum over ||v|| <= m, worst tuple
    worst_tuple: tuple
    tuples: int
    K_delta: tuple
    holds: bool
    per_tuple: list = field(default_factory=list)

    def to_json(self, g: MetricGroup):
        return {
            "residual": self.residual,
            "scaled_residual": self.scaled_residual,
            "holds": self.holds,
            "worst_tuple": [g.label(x) for x in self.worst_tuple],
            "tuples": self.tuples,
            "K_delta": [g.label(x) for x in self.K_delta],
        }


def k_delta(g: MetricGroup, delta) -> tuple:
    delta = to_rational(delta)
    return tuple(x for x in g.elements if g.norm(x) <= delta)


def _kdelta_one(r: UnitaryRep, X, n: int, m: int):
    eye = np.eye(r.dim)
    vals, vecs = np.linalg.eigh(delta_operator(r, X))
    cands = np.concatenate([vecs, eye.astype(complex)], axis=1)
    cands = cands / np.linalg.norm(cands, axis=0)
    a = np.zeros(cands.shape[1])
    for x in X:
        a = np.maximum(a, np.linalg.norm(r.matrix(x) @ cands - cands, axis=0))
    best_a = float(a.min())
    unit = max(0.0, best_a - 1.0 / n)
    # on the ray through the best candidate: max(s a - 1/n, |1 - s|) is least
    # where s a - 1/n = 1 - s (when a > 1/n); s stays below 1 <= m
    scaled = 0.0 if best_a <= 1.0 / n else (best_a - 1.0 / n) / (1.0 + best_a)
    return unit, scaled


def kdelta_axiom_check(r: UnitaryRep, delta, k: int, m: int, n: int, tuples=None) -> KDeltaReport:
    """Worst residual of ``inf_v sup_{x in U x_i K_delta} max(||x v - v|| -. 1/n, |1 - ||v|||)``.

    ``tuples`` defaults to every k-tuple of the carrier (exhaustive for table
    groups).  A residual <= TAU on every tuple means the truncated axiom
    instance holds.
    """
    if m < 1:
        raise MetlogicError("unit-sphere candidates need m >= 1")
    g = r.group
    K = k_delta(g, delta)
    if tuples is None:
        tuples = itertools.product(g.elements, repeat=k)
    per = []
    worst_unit, worst_scaled, worst_tup = -1.0, 0.0, ()
    for tup in tuples:
        tup = tuple(tup)
        X = tuple(dict.fromkeys(g.ambient_mul(x, c) for x in tup for c in K))
        unit, scaled = _kdelta_one(r, X, n, m)
        per.append((tup, unit))
        if unit > worst_unit:
            worst_unit, worst_tup = unit, tup
        worst_scaled = max(worst_scaled, scaled)
    if not per:
        raise MetlogicError("no tuples supplied")
    return KDeltaReport(worst_unit, worst_scaled, worst_tup, len(per), K, worst_unit <= TAU, per)


# ------------------------------------------------------------ refutation


def refute_kazhdan_set(Q, eps: float, reps) -> tuple | None:
    """First rep where Q has an eps-invariant unit vector but G has no invariant one."""
    for idx, r in enumerate(reps):
        rad = epsilon_invariant_radius(r, Q)
        if rad.hi < eps and fixed_space(r).shape[1] == 0:
            return idx, r, rad
    return None
