"""Amenability formulas, Schneider-Thom certificates and truncated schemata.

For a k-set F and an element y write ``R_y(F)`` for the least distance value
r with ``mu(F, yF, B_r) >= theta k`` (closed balls).  Both formula variants
are determined by it::

    phi(F, y)  = max(0, R_y(F) - q)        phi-(F, y) = max(0, q - R_y(F))

Monotonicity of mu in r gives this: the positive formula's inner min over
(S', rho) is the least r with ``|N_r(S)| >= t(S)``, and the negative one's
is attained by packing the nearest translates into S'.  The tests check the
identity against full AST evaluation.  The schema searches therefore only
need ``min_F max_i R_{y_i}(F)`` per size k, which ``kernels.scan_critical``
computes over subset masks.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb

from . import kernels
from .errors import BudgetExhaustedError, DisagreementError, MetlogicError, UndefinedProductError
from .groups import BallSpec, MetricGroup, group_structure
from .logic.evaluate import evaluate
from .logic.formula import App, Const, Dist, Max, Min, TruncSub, Var
from .matching import matching_number
from .parallel import chunk_ranges, ordered_map, worker_count
from .rationals import rational_str, to_rational

CHUNK = 1 << 12
KEEP_WORST = 10
_ZERO = Fraction(0)


# ------------------------------------------------------------ formulas


@dataclass(frozen=True)
class PhiSpec:
    k: int
    q: Fraction
    theta: Fraction
    variant: str = "positive"

    def __post_init__(self):
        object.__setattr__(self, "q", to_rational(self.q))
        object.__setattr__(self, "theta", to_rational(self.theta))
        if self.k < 1:
            raise MetlogicError("k must be a positive integer")
        if not 0 < self.theta < 1:
            raise MetlogicError("theta must lie in (0, 1)")
        if self.q <= 0:
            raise MetlogicError("q must be positive")
        if self.variant not in ("positive", "negative"):
            raise MetlogicError(f"unknown variant {self.variant!r}")

    @property
    def closed(self) -> bool:
        return self.variant == "positive"

    def threshold(self, size: int) -> Fraction:
        """t(S) = |S| - k + theta k."""
        return size - self.k + self.theta * self.k


def x_var(i: int) -> Var:
    return Var(f"x{i + 1}")


Y = Var("y")


def _yx(i: int) -> App:
    return App("mul", (Y, x_var(i)))


def _subsets(k):
    return [tuple(i for i in range(k) if m >> i & 1) for m in range(1 << k)]


@lru_cache(maxsize=64)
def build_phi(spec: PhiSpec):
    """The formula over variables x1..xk, y, with no simplification.

    Positive: ``max_S min_{S', rho} max_{i in S'} d(y xi, x_rho(i))  -.  q``
    with ``t(S) <= |S'|`` and rho any map S' -> S.
    Negative: ``min_S min_{S'} (q -. min_{i not in S', j in S} d(y xi, xj))``
    with ``|S'| < t(S)``.
    """
    k = spec.k
    subs = _subsets(k)
    q = Const(spec.q)
    if spec.variant == "positive":
        outer = []
        for S in subs:
            t = spec.threshold(len(S))
            inner = []
            for S2 in subs:
                if len(S2) < t:
                    continue
                for rho in itertools.product(S, repeat=len(S2)):
                    inner.append(Max(tuple(Dist(_yx(i), x_var(j)) for i, j in zip(S2, rho))))
            outer.append(Min(tuple(inner)))
        return TruncSub(Max(tuple(outer)), q)
    outer = []
    for S in subs:
        t = spec.threshold(len(S))
        inner = []
        for S2 in subs:
            if not len(S2) < t:
                continue
            far = tuple(Dist(_yx(i), x_var(j)) for i in range(k) if i not in S2 for j in S)
            inner.append(TruncSub(q, Min(far)))
        outer.append(Min(tuple(inner)))
    return Min(tuple(outer))


def ast_size_estimate(spec: PhiSpec) -> int:
    """Number of distance atoms in ``build_phi(spec)``."""
    k = spec.k
    total = 0
    for s in range(k + 1):
        for s2 in range(k + 1):
            ways = comb(k, s) * comb(k, s2)
            if spec.variant == "positive":
                if s2 >= spec.threshold(s):
                    total += ways * s**s2 * s2
            elif s2 < spec.threshold(s):
                total += ways * (k - s2) * s
    return total


def _assignment(F, y):
    env = {x_var(i).name: f for i, f in enumerate(F)}
    env["y"] = y
    return env


def phi_value_ast(g: MetricGroup, F, y, spec: PhiSpec, structure=None):
    """Evaluate the formula itself at x = F, y = y."""
    if len(F) != spec.k:
        raise MetlogicError(f"F has {len(F)} elements, spec has k = {spec.k}")
    s = structure if structure is not None else group_structure(g)
    return evaluate(build_phi(spec), s, _assignment(F, y))


def _check_distinct(F):
    if len(set(F)) != len(F):
        raise MetlogicError("F must list distinct elements")


def phi_holds_fast(g: MetricGroup, F, y, spec: PhiSpec) -> bool:
    """``mu(F, yF, B_q) >= theta|F|`` (positive) or ``mu(F, yF, B_<q) < theta|F|`` (negative)."""
    F = list(F)
    if len(F) != spec.k:
        raise MetlogicError(f"F has {len(F)} elements, spec has k = {spec.k}")
    yF = [g.ambient_mul(y, f) for f in F]
    m = matching_number(g, F, yF, BallSpec(spec.q, spec.closed))
    if spec.variant == "positive":
        return m >= spec.theta * len(F)
    return m < spec.theta * len(F)


def _distance_rows(g: MetricGroup, F, y):
    """``dist[i][j] = d(1, y F[j] F[i]^-1)``."""
    inv = [g.inv(x) for x in F]
    return [[g.norm(g.ambient_mul(g.ambient_mul(y, f), xi)) for f in F] for xi in inv]


def _rows_at(dist, r) -> list[int]:
    return [sum(1 << j for j, v in enumerate(row) if v <= r) for row in dist]


def critical_radius(g: MetricGroup, F, y, theta) -> Fraction:
    """Least distance value r with ``mu(F, yF, B_r) >= theta |F|`` (closed balls)."""
    F = list(F)
    theta = to_rational(theta)
    dist = _distance_rows(g, F, y)
    values = sorted({v for row in dist for v in row} | {_ZERO})
    need = theta * len(F)
    lo, hi = 0, len(values) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if kernels.hk_matching(_rows_at(dist, values[mid]), len(F))[0] >= need:
            hi = mid
        else:
            lo = mid + 1
    return values[lo]


def phi_value_fast(g: MetricGroup, F, y, spec: PhiSpec) -> Fraction:
    r = critical_radius(g, F, y, spec.theta)
    if spec.variant == "positive":
        return max(r - spec.q, _ZERO)
    return max(spec.q - r, _ZERO)


@dataclass
class LemmaReport:
    ast_value: Fraction
    fast_holds: bool
    formula_holds: bool
    agree: bool
    closed_form: Fraction

    def to_json(self):
        return {
            "ast_value": rational_str(self.ast_value),
            "closed_form_value": rational_str(self.closed_form),
            "formula_holds": self.formula_holds,
            "matching_criterion_holds": self.fast_holds,
            "agree": self.agree,
        }


def lemma_equivalence_check(
    g, F, y, spec: PhiSpec, budget: int = 2_000_000, structure=None, multiset: bool = False
) -> LemmaReport:
    """Compare ``eval(phi) <= 0`` with the matching criterion at one point.

    Repeated entries in F are rejected unless ``multiset`` asks for the
    index-level reading.
    """
    if not multiset:
        _check_distinct(F)
    if ast_size_estimate(spec) > budget:
        raise BudgetExhaustedError(
            f"formula for k = {spec.k} exceeds the atom budget {budget}",
            {"atoms": ast_size_estimate(spec), "budget": budget},
        )
    v = phi_value_ast(g, F, y, spec, structure)
    fast = phi_holds_fast(g, F, y, spec)
    return LemmaReport(v, fast, v <= 0, (v <= 0) == fast, phi_value_fast(g, F, y, spec))


# ------------------------------------------------------------ certificates


@dataclass
class Certificate:
    group: str
    E: tuple
    theta: Fraction
    q: Fraction
    closed: bool
    F: tuple
    margins: tuple = ()  # (mu, mu - theta|F|) per element of E

    @property
    def valid(self) -> bool:
        return bool(self.margins) and all(m >= 0 for _, m in self.margins)

    def to_json(self, g: MetricGroup) -> dict:
        return {
            "group": self.group,
            "E": [g.label(e) for e in self.E],
            "theta": rational_str(self.theta),
            "q": rational_str(self.q),
            "closure": "closed" if self.closed else "open",
            "F": [g.label(f) for f in self.F],
            "margins": [
                {"g": g.label(e), "mu": mu, "margin": rational_str(m)}
                for e, (mu, m) in zip(self.E, self.margins)
            ],
            "min_margin": rational_str(min(m for _, m in self.margins)) if self.margins else None,
        }


@dataclass
class CertificateCheck:
    verdict: str  # "valid" | "invalid" | "inconclusive at radius"
    margins: tuple
    detail: dict = field(default_factory=dict)


def certificate_margins(g: MetricGroup, E, F, theta, q, closed=True) -> tuple:
    U = BallSpec(q, closed)
    theta = to_rational(theta)
    out = []
    for e in E:
        mu = matching_number(g, F, [g.ambient_mul(e, f) for f in F], U)
        out.append((mu, mu - theta * len(F)))
    return tuple(out)


def verify_certificate(g: MetricGroup, c: Certificate) -> CertificateCheck:
    """Recompute every margin from scratch."""
    if not c.F:
        return CertificateCheck("invalid", (), {"reason": "F is empty"})
    try:
        margins = certificate_margins(g, c.E, c.F, c.theta, c.q, c.closed)
    except UndefinedProductError as exc:
        return CertificateCheck("inconclusive at radius", (), exc.detail)
    ok = all(m >= 0 for _, m in margins)
    return CertificateCheck("valid" if ok else "invalid", margins)


@dataclass
class NotFound:
    strategy: str
    exhaustive: bool
    searched: int
    ground: tuple
    worst: list  # (min margin, F) pairs, most negative first

    def statement(self) -> str:
        if self.exhaustive:
            return "no F within the searched family satisfies the bound"
        return "no certificate found by a heuristic search; this is not a proof"

    def to_json(self, g: MetricGroup) -> dict:
        return {
            "strategy": self.strategy,
            "exhaustive": self.exhaustive,
            "statement": self.statement(),
            "searched": self.searched,
            "ground": [g.label(x) for x in self.ground],
            "worst": [{"F": [g.label(x) for x in F], "margin": rational_str(m)} for m, F in self.worst],
        }


@dataclass
class SearchResult:
    strategy: str
    certificate: Certificate | None
    not_found: NotFound | None
    evaluated: int

    @property
    def found(self) -> bool:
        return self.certificate is not None


def _rows_by_g(g: MetricGroup, E, ground, U: BallSpec):
    """Per e in E: ``rows[i]`` bit j iff ``d(1, e ground[j] ground[i]^-1)`` lies in U."""
    inv = [g.inv(x) for x in ground]
    out = []
    for e in E:
        shifted = [g.ambient_mul(e, x) for x in ground]
        out.append([sum(1 << j for j, s in enumerate(shifted) if U.contains(g.norm(g.ambient_mul(s, xi)))) for xi in inv])
    return out


def _scaled_margin(rows_by_g, mask, num, den) -> int:
    k = mask.bit_count()
    return min(kernels.masked_mu(rows, mask) * den - num * k for rows in rows_by_g)


def _mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _members(mask, ground) -> tuple:
    return tuple(x for i, x in enumerate(ground) if mask >> i & 1)


def cayley_order(g: MetricGroup, gens, ground=None, limit=None) -> list:
    """Breadth-first order from the identity under ``gens`` and their inverses, inside ``ground``."""
    allowed = set(ground if ground is not None else g.elements)
    steps = []
    for s in gens:
        for t in (s, g.inv(s)):
            if t not in steps:
                steps.append(t)
    start = g.identity
    order, seen, frontier = [start], {start}, [start]
    while frontier:
        nxt = []
        for w in frontier:
            for s in steps:
                p = g.ambient_mul(w, s)
                if p in allowed and p not in seen:
                    seen.add(p)
                    order.append(p)
                    nxt.append(p)
                    if limit is not None and len(order) >= limit:
                        return order
        frontier = nxt
    return order


def _certificate(g, E, theta, q, closed, F) -> Certificate:
    c = Certificate(g.name, tuple(E), theta, q, closed, tuple(F))
    c.margins = certificate_margins(g, E, F, theta, q, closed)
    return c


def folner_search(
    g: MetricGroup,
    E,
    theta,
    q,
    closed: bool = True,
    strategy: str = "exhaustive",
    budget: int = 1 << 20,
    ground=None,
    workers: int | None = None,
    compact_shortcut: bool = True,
) -> SearchResult:
    """Look for a finite F with ``mu(F, eF, U) >= theta |F|`` for every e in E.

    Finite table groups try F = G first (always valid for theta < 1 when U
    contains 1).  ``exhaustive`` scans every nonempty subset of ``ground``
    and raises ``BudgetExhaustedError`` if there are more than ``budget``.
    """
    E = list(E)
    if not E:
        raise MetlogicError("E must be nonempty")
    theta, q = to_rational(theta), to_rational(q)
    if not 0 < theta < 1:
        raise MetlogicError("theta must lie in (0, 1)")
    U = BallSpec(q, closed)
    if compact_shortcut and g.kind == "table" and ground is None:
        c = _certificate(g, E, theta, q, closed, g.elements)
        if c.valid:
            return SearchResult("compact", c, None, 1)
    ground = tuple(ground) if ground is not None else tuple(g.elements)
    num, den = theta.numerator, theta.denominator
    if strategy == "exhaustive":
        return _exhaustive(g, E, theta, q, closed, U, ground, budget, num, den, workers)
    if strategy == "ball-growing":
        return _ball_growing(g, E, theta, q, closed, U, ground, budget, num, den)
    if strategy == "greedy-local":
        return _greedy(g, E, theta, q, closed, U, ground, budget, num, den)
    raise MetlogicError(f"unknown strategy {strategy!r}")


def _exhaustive(g, E, theta, q, closed, U, ground, budget, num, den, workers):
    m = len(ground)
    total = (1 << m) - 1
    if total > budget:
        raise BudgetExhaustedError(
            f"{total} subsets exceed the budget {budget}", {"subsets": total, "budget": budget}
        )
    rows = _rows_by_g(g, E, ground, U)
    tasks = [(rows, a, b, num, den, KEEP_WORST) for a, b in chunk_ranges(1, total + 1, CHUNK)]
    results = ordered_map(kernels.scan_certificates, tasks, worker_count(workers), lambda r: r[0] >= 0)
    for found, _ in results:
        if found >= 0:
            F = _members(found, ground)
            return SearchResult("exhaustive", _certificate(g, E, theta, q, closed, F), None, found)
    worst = sorted(pair for _, w in results for pair in w)[:KEEP_WORST]
    evidence = [(Fraction(s, den), _members(mask, ground)) for s, mask in worst]
    return SearchResult("exhaustive", None, NotFound("exhaustive", True, total, ground, evidence), total)


def _push_worst(worst, margin, mask):
    worst.append((margin, mask))
    worst.sort()
    del worst[KEEP_WORST:]


def _ball_growing(g, E, theta, q, closed, U, ground, budget, num, den):
    order = cayley_order(g, E, ground)
    rows = _rows_by_g(g, E, order, U)
    worst = []
    n = min(len(order), budget)
    for size in range(1, n + 1):
        mask = (1 << size) - 1
        margin = _scaled_margin(rows, mask, num, den)
        if margin >= 0:
            return SearchResult("ball-growing", _certificate(g, E, theta, q, closed, order[:size]), None, size)
        _push_worst(worst, margin, mask)
    evidence = [(Fraction(s, den), _members(mk, order)) for s, mk in worst]
    return SearchResult("ball-growing", None, NotFound("ball-growing", False, n, tuple(order), evidence), n)


def _greedy(g, E, theta, q, closed, U, ground, budget, num, den, tabu_len=7):
    # the Cayley ball comes first so ties between flips favour nearby elements
    order = cayley_order(g, E, ground)
    seen = set(order)
    ground = tuple(order + [x for x in ground if x not in seen])
    rows = _rows_by_g(g, E, ground, U)
    mask = 1  # start from the identity (or the first ground element)
    margin = _scaled_margin(rows, mask, num, den)
    evaluated = 1
    worst = [(margin, mask)]
    tabu = []
    while margin < 0 and evaluated < budget:
        move = None
        for i in range(len(ground)):
            if i in tabu:
                continue
            cand = mask ^ (1 << i)
            if cand == 0:
                continue
            m = _scaled_margin(rows, cand, num, den)
            evaluated += 1
            if move is None or m > move[0]:
                move = (m, cand, i)
            if evaluated >= budget:
                break
        if move is None or move[0] < margin:
            break
        margin, mask = move[0], move[1]
        tabu = (tabu + [move[2]])[-tabu_len:]
        _push_worst(worst, margin, mask)
    if margin >= 0:
        F = _members(mask, ground)
        return SearchResult("greedy-local", _certificate(g, E, theta, q, closed, F), None, evaluated)
    evidence = [(Fraction(s, den), _members(mk, ground)) for s, mk in sorted(set(worst))[:KEEP_WORST]]
    return SearchResult(
        "greedy-local", None, NotFound("greedy-local", False, evaluated, ground, evidence), evaluated
    )


# ------------------------------------------------------------ schemata


@dataclass
class TupleResult:
    y: tuple
    exhaustive: bool
    per_k: list  # (k, F, R) with R = min over searched F of max_i R_{y_i}(F)
    ast_checked: list = field(default_factory=list)


@dataclass
class SchemaReport:
    variant: str  # "amen" | "nonamen"
    theta: Fraction
    qs: tuple
    l: int
    k_max: int
    budget: int
    tuples: list
    verdicts: dict  # q -> verdict

    def values(self, q) -> list:
        """Per tuple, the truncated schema value at q."""
        return [_tuple_value(self.variant, t, q) for t in self.tuples]

    def to_json(self, g: MetricGroup) -> dict:
        per_q = []
        for q in self.qs:
            rows = []
            for t in self.tuples:
                rows.append(
                    {
                        "y": [g.label(v) for v in t.y],
                        "exhaustive": t.exhaustive,
                        "per_k": [
                            {
                                "k": k,
                                "F": [g.label(x) for x in F],
                                "value": rational_str(_k_value(self.variant, R, q)),
                            }
                            for k, F, R in t.per_k
                        ],
                        "value": rational_str(_tuple_value(self.variant, t, q)),
                    }
                )
            per_q.append({"q": rational_str(q), "verdict": self.verdicts[q], "tuples": rows})
        return {
            "variant": self.variant,
            "theta": rational_str(self.theta),
            "l": self.l,
            "truncation": {"k_max": self.k_max, "samples": len(self.tuples), "budget": self.budget},
            "results": per_q,
        }


def _k_value(variant, R, q):
    return max(R - q, _ZERO) if variant == "amen" else max(q - R, _ZERO)


def _tuple_value(variant, t: TupleResult, q):
    vals = [_k_value(variant, R, q) for _, _, R in t.per_k]
    if not vals:
        return None
    # disjunction over k is a min, conjunction a max
    return min(vals) if variant == "amen" else max(vals)


def sample_tuples(g: MetricGroup, l: int, ys=None, samples: int | None = None, seed: int = 0) -> list:
    """All l-multisets from ``ys`` (default: the carrier), or ``samples`` seeded random ones."""
    pool = list(ys) if ys is not None else list(g.elements)
    if samples is None:
        return [tuple(t) for t in itertools.combinations_with_replacement(pool, l)]
    rng = random.Random(seed)
    return [tuple(rng.choice(pool) for _ in range(l)) for _ in range(samples)]


def _critical_scan(g, ys, ground, theta, k_max, budget, workers):
    """Per k, ``(R, F)`` minimizing ``max_i R_{y_i}(F)`` over k-subsets of ground."""
    inv = [g.inv(x) for x in ground]
    dist = []
    for y in ys:
        shifted = [g.ambient_mul(y, x) for x in ground]
        dist.append([[g.norm(g.ambient_mul(s, xi)) for s in shifted] for xi in inv])
    values = sorted({v for d in dist for row in d for v in row})
    m = len(ground)
    total = (1 << m) - 1
    if total <= budget and m <= 64:
        rows_by_y = [[_rows_at(d, v) for v in values] for d in dist]
        num, den = theta.numerator, theta.denominator
        kk = min(k_max, m)
        tasks = [(rows_by_y, len(values), a, b, num, den, kk) for a, b in chunk_ranges(1, total + 1, CHUNK)]
        best = [(len(values), 0)] * (kk + 1)
        for part in ordered_map(kernels.scan_critical, tasks, worker_count(workers)):
            best = [min(a, b) for a, b in zip(best, part)]
        out = [(k, values[t], _members(mask, ground)) for k, (t, mask) in enumerate(best) if k >= 1 and t < len(values)]
        return True, out
    # heuristic: Cayley-ball prefixes under the sampled elements
    order = cayley_order(g, ys, ground, limit=k_max)
    out = []
    for k in range(1, min(k_max, len(order)) + 1):
        F = order[:k]
        R = max(critical_radius(g, F, y, theta) for y in ys)
        out.append((k, R, tuple(F)))
    return False, out


def schema_value(
    g: MetricGroup,
    theta,
    q,
    l: int,
    k_max: int,
    y_tuples,
    search_budget: int = 1 << 20,
    variant: str = "amen",
    ground=None,
    workers: int | None = None,
    ast_check_k: int = 3,
) -> SchemaReport:
    """Truncated evaluation of the amenability (``amen``) or non-amenability schema.

    ``q`` may be a list for the non-amenability schema; each q gets its own
    verdict.  Values are exact; for sizes k <= ``ast_check_k`` the chosen F
    is re-evaluated through the formula itself and must agree.
    """
    if variant not in ("amen", "nonamen"):
        raise MetlogicError(f"unknown schema variant {variant!r}")
    theta = to_rational(theta)
    qs = tuple(to_rational(x) for x in (q if isinstance(q, (list, tuple)) else [q]))
    ground = tuple(ground) if ground is not None else tuple(g.elements)
    tuples = []
    structure = group_structure(g)
    for ys in y_tuples:
        ys = tuple(ys)
        if len(ys) != l:
            raise MetlogicError(f"y-tuple {ys} does not have length l = {l}")
        distinct = tuple(dict.fromkeys(ys))
        exhaustive, found = _critical_scan(g, distinct, ground, theta, k_max, search_budget, workers)
        res = TupleResult(ys, exhaustive, [(k, F, R) for k, R, F in found])
        for k, F, R in res.per_k:
            if k > ast_check_k:
                continue
            for qq in qs:
                spec = PhiSpec(k, qq, theta, "positive" if variant == "amen" else "negative")
                vals = [phi_value_ast(g, F, y, spec, structure) for y in distinct]
                got = max(vals) if variant == "amen" else min(vals)
                if got != _k_value(variant, R, qq):
                    raise DisagreementError(
                        "formula value differs from the matching closed form",
                        {"k": k, "q": str(qq), "formula": str(got), "closed_form": str(_k_value(variant, R, qq))},
                    )
            res.ast_checked.append(k)
        tuples.append(res)
    verdicts = {qq: _verdict(variant, tuples, qq, k_max) for qq in qs}
    return SchemaReport(variant, theta, qs, l, k_max, search_budget, tuples, verdicts)


def _verdict(variant, tuples, q, k_max) -> str:
    if not tuples:
        return "inconclusive"
    if variant == "amen":
        if all(_tuple_value(variant, t, q) == 0 for t in tuples):
            return "certified-for-samples"
        if any(t.exhaustive and _tuple_value(variant, t, q) > 0 for t in tuples):
            return "refuted-for-sample"
        return "inconclusive"
    # non-amenability: inf over y of a conjunction over k
    if any(t.exhaustive and _tuple_value(variant, t, q) == 0 for t in tuples):
        return "certified-for-samples"
    if all(_tuple_value(variant, t, q) > 0 for t in tuples):
        return "refuted-for-sample"
    return "inconclusive"
