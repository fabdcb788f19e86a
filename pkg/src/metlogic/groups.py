"""Metric groups: finite Cayley tables and enumerated word balls.

A ``MetricGroup`` is either a finite table group (total multiplication) or
an enumerated ball of a finitely generated group.  For a ball, ``mul``
raises ``UndefinedProductError`` when the product leaves the enumeration;
``ambient_mul`` computes canonical products in the whole group (the word
problem is solved for the built-in families).  The discrete 0/1 metric
extends to ambient elements; a supplied metric table does not.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .errors import (
    EnumerationCapError,
    GroupAxiomError,
    MetlogicError,
    MetricAxiomError,
    UndefinedProductError,
)
from .logic.structure import check_metric
from .rationals import to_rational

DEFAULT_CAP = 100_000
_ONE = Fraction(1)
_ZERO = Fraction(0)


# ------------------------------------------------------------ families


class FreeFamily:
    """Free group of rank r; words are tuples of nonzero ints, ``-i`` the inverse of ``i``."""

    name = "free"

    def __init__(self, rank: int):
        if not 1 <= rank <= 26:
            raise ValueError("free group rank must be in 1..26")
        self.rank = rank

    def identity(self):
        return ()

    def generators(self):
        out = []
        for i in range(1, self.rank + 1):
            out += [(i,), (-i,)]
        return out

    def mul(self, a, b):
        a = list(a)
        j = 0
        while a and j < len(b) and a[-1] == -b[j]:
            a.pop()
            j += 1
        return tuple(a) + tuple(b[j:])

    def inv(self, a):
        return tuple(-x for x in reversed(a))

    def label(self, a):
        if not a:
            return "e"
        return "".join(chr(ord("a") + x - 1) if x > 0 else chr(ord("A") - x - 1) for x in a)

    def parse(self, text):
        text = text.strip()
        if text in ("e", "1", ""):
            return ()
        word = []
        for ch in text:
            if ch.islower():
                word.append(ord(ch) - ord("a") + 1)
            elif ch.isupper():
                word.append(-(ord(ch) - ord("A") + 1))
            else:
                raise ValueError(f"bad free-group word {text!r}")
            if abs(word[-1]) > self.rank:
                raise ValueError(f"letter {ch!r} outside rank {self.rank}")
        return self.mul((), self._reduce(word))

    def _reduce(self, word):
        out = []
        for x in word:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def spec(self):
        return {"family": "free", "rank": self.rank}


class ZdFamily:
    """Z^d with the standard generators; elements are int tuples."""

    name = "zd"

    def __init__(self, d: int):
        if d < 1:
            raise ValueError("dimension must be positive")
        self.d = d

    def identity(self):
        return (0,) * self.d

    def generators(self):
        out = []
        for i in range(self.d):
            e = [0] * self.d
            e[i] = 1
            out.append(tuple(e))
            e[i] = -1
            out.append(tuple(e))
        return out

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def label(self, a):
        if self.d == 1:
            return str(a[0])
        return "(" + ",".join(str(x) for x in a) + ")"

    def parse(self, text):
        text = text.strip().strip("()")
        vals = tuple(int(t) for t in text.split(",")) if text else ()
        if len(vals) != self.d:
            raise ValueError(f"expected {self.d} coordinates in {text!r}")
        return vals

    def spec(self):
        return {"family": "zd", "d": self.d}


def _mat_mul(a, b):
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n)
    )


def _mat_inv(a):
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise GroupAxiomError("singular generator matrix")
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    inv = [row[n:] for row in m]
    if any(x.denominator != 1 for row in inv for x in row):
        raise GroupAxiomError("generator matrix has no integer inverse (det must be +-1)")
    return tuple(tuple(int(x) for x in row) for row in inv)


class MatrixFamily:
    """Group generated by invertible integer matrices (det +-1)."""

    name = "matrices"

    def __init__(self, generators):
        gens = [tuple(tuple(int(x) for x in row) for row in g) for g in generators]
        if not gens:
            raise ValueError("need at least one generator matrix")
        n = len(gens[0])
        for g in gens:
            if len(g) != n or any(len(r) != n for r in g):
                raise ValueError("generators must be square matrices of one size")
        self.n = n
        self.base = gens
        self._gens = []
        for g in gens:
            for h in (g, _mat_inv(g)):
                if h not in self._gens:
                    self._gens.append(h)

    def identity(self):
        return tuple(tuple(int(i == j) for j in range(self.n)) for i in range(self.n))

    def generators(self):
        return list(self._gens)

    def mul(self, a, b):
        return _mat_mul(a, b)

    def inv(self, a):
        return _mat_inv(a)

    def label(self, a):
        return json.dumps([list(r) for r in a], separators=(",", ":"))

    def parse(self, text):
        data = json.loads(text)
        return tuple(tuple(int(x) for x in row) for row in data)

    def spec(self):
        return {"family": "matrices", "generators": [[list(r) for r in g] for g in self.base]}


# ------------------------------------------------------------ the group


@dataclass
class MetricGroup:
    kind: str  # "table" | "enumerated"
    elements: tuple
    identity: Any
    mul_table: list | None = None
    inv_table: list | None = None
    family: Any = None
    radius: int | None = None
    metric_table: list | None = None  # index-based Fractions; None = discrete
    bound: Fraction = _ONE
    bi_invariant: bool = True
    generators: tuple | None = None
    metadata: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self._index = {e: i for i, e in enumerate(self.elements)}

    # -- basic access
    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def is_discrete(self) -> bool:
        return self.metric_table is None

    def __contains__(self, e):
        return e in self._index

    def index(self, e) -> int:
        try:
            return self._index[e]
        except KeyError:
            raise UndefinedProductError(
                f"element {self.label(e)} outside the enumeration", {"element": self.label(e)}
            ) from None

    def label(self, e) -> str:
        if self.kind == "table":
            return str(e)
        return self.family.label(e)

    def parse(self, text: str):
        """Element named by ``text``; ambient elements are allowed for enumerated balls."""
        text = str(text).strip()
        if self.kind == "table":
            if text not in self._index:
                raise MetlogicError(f"unknown element {text!r}", {"element": text})
            return text
        try:
            return self.family.parse(text)
        except (ValueError, json.JSONDecodeError) as exc:
            raise MetlogicError(f"cannot parse element {text!r}: {exc}") from None

    def parse_list(self, text) -> list:
        if isinstance(text, (list, tuple)):
            return [self.parse(t) for t in text]
        return [self.parse(t) for t in _split_list(text)]

    # -- operations
    def ambient_mul(self, a, b):
        if self.kind == "table":
            return self.mul(a, b)
        return self.family.mul(a, b)

    def mul(self, a, b):
        if self.kind == "table":
            return self.elements[self.mul_table[self._index[a]][self._index[b]]]
        p = self.family.mul(a, b)
        if p not in self._index:
            raise UndefinedProductError(
                f"product {self.label(a)}*{self.label(b)} undefined at radius {self.radius}",
                {"left": self.label(a), "right": self.label(b), "radius": self.radius},
            )
        return p

    def inv(self, a):
        if self.kind == "table":
            return self.elements[self.inv_table[self._index[a]]]
        return self.family.inv(a)

    def dist(self, a, b) -> Fraction:
        if self.metric_table is None:
            return _ZERO if a == b else _ONE
        return self.metric_table[self.index(a)][self.index(b)]

    def norm(self, a) -> Fraction:
        """``d(1, a)``."""
        return self.dist(self.identity, a)

    def metric_rows(self):
        n = self.order
        if self.metric_table is None:
            return [[_ZERO if i == j else _ONE for j in range(n)] for i in range(n)]
        return [list(r) for r in self.metric_table]

    def with_metric(self, table, check=True) -> MetricGroup:
        g = MetricGroup(
            self.kind,
            self.elements,
            self.identity,
            self.mul_table,
            self.inv_table,
            self.family,
            self.radius,
            [list(r) for r in table] if table is not None else None,
            self.bound,
            True,
            self.generators,
            dict(self.metadata),
            self.name,
        )
        if check and table is not None:
            check_metric(range(g.order), lambda i, j: g.metric_table[i][j], g.bound)
        g.bi_invariant = _check_bi_invariant(g) is None
        return g

    def spec(self) -> dict:
        """JSON group description (reloadable by ``load_group``)."""
        out: dict = {"name": self.name} if self.name else {}
        if self.kind == "table":
            out.update(
                kind="table",
                elements=list(self.elements),
                identity=self.identity,
                table=[[self.elements[k] for k in row] for row in self.mul_table],
            )
        else:
            out.update(kind="enumerated", radius=self.radius, **self.family.spec())
        if self.metric_table is None:
            out["metric"] = "discrete"
        else:
            out["metric"] = [[str(x) for x in row] for row in self.metric_table]
        out["bound"] = str(self.bound)
        if self.metadata:
            out["metadata"] = self.metadata
        return out


def _split_list(text: str) -> list[str]:
    """Split a comma list, keeping brackets/parentheses intact."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        out.append("".join(cur))
    return [t.strip() for t in out if t.strip()]


def _check_bi_invariant(g: MetricGroup):
    """First witness ``(u, x, y, side)`` of non-invariance over defined products, or None."""
    if g.metric_table is None:
        return None
    els = g.elements
    for u, x, y in itertools.product(els, repeat=3):
        d = g.dist(x, y)
        for side in ("left", "right"):
            try:
                if side == "left":
                    a, b = g.mul(u, x), g.mul(u, y)
                else:
                    a, b = g.mul(x, u), g.mul(y, u)
            except UndefinedProductError:
                continue
            if g.dist(a, b) != d:
                return (g.label(u), g.label(x), g.label(y), side)
    return None


def bi_invariance_witness(g: MetricGroup):
    return _check_bi_invariant(g)


# ------------------------------------------------------------ constructors


def make_finite(
    table,
    inverse=None,
    identity=None,
    metric="discrete",
    elements=None,
    bound=1,
    name="",
    metadata=None,
) -> MetricGroup:
    """Validated finite metric group from a Cayley table.

    ``table`` holds element labels (or indices into ``elements``).  Raises
    ``GroupAxiomError``/``MetricAxiomError`` with a witness on failure; the
    bi-invariance flag is set by exhaustive check.
    """
    n = len(table)
    if n == 0 or any(len(row) != n for row in table):
        raise GroupAxiomError("multiplication table must be square and nonempty")
    if elements is None:
        if all(isinstance(x, int) for row in table for x in row):
            elements = [str(i) for i in range(n)]
        else:
            elements = [str(row[0]) for row in table]
            # the first column of a group table lists g*e = g only if e is first;
            # fall back to the set of entries in first-appearance order
            seen = []
            for row in table:
                for x in row:
                    if str(x) not in seen:
                        seen.append(str(x))
            elements = seen
    elements = [str(e) for e in elements]
    if len(set(elements)) != n:
        raise GroupAxiomError("element labels must be distinct and match the table size")
    idx = {e: i for i, e in enumerate(elements)}

    def ix(x):
        if isinstance(x, int) and not isinstance(x, bool):
            if not 0 <= x < n:
                raise GroupAxiomError(f"table entry {x} out of range")
            return x
        if str(x) not in idx:
            raise GroupAxiomError(f"unknown table entry {x!r}")
        return idx[str(x)]

    mt = [[ix(x) for x in row] for row in table]
    if identity is None:
        e = next((i for i in range(n) if all(mt[i][j] == j and mt[j][i] == j for j in range(n))), None)
        if e is None:
            raise GroupAxiomError("no identity element")
    else:
        e = ix(identity)
        for j in range(n):
            if mt[e][j] != j or mt[j][e] != j:
                raise GroupAxiomError(
                    "identity law fails", {"witness": [elements[e], elements[j]]}
                )
    for a, b, c in itertools.product(range(n), repeat=3):
        if mt[mt[a][b]][c] != mt[a][mt[b][c]]:
            raise GroupAxiomError(
                "associativity fails", {"witness": [elements[a], elements[b], elements[c]]}
            )
    if inverse is None:
        inv = []
        for a in range(n):
            b = next((b for b in range(n) if mt[a][b] == e), None)
            if b is None:
                raise GroupAxiomError("element has no inverse", {"witness": [elements[a]]})
            inv.append(b)
    else:
        if isinstance(inverse, dict):
            inv = [ix(inverse[el]) for el in elements]
        else:
            inv = [ix(x) for x in inverse]
    for a in range(n):
        if mt[a][inv[a]] != e or mt[inv[a]][a] != e:
            raise GroupAxiomError("inverse law fails", {"witness": [elements[a]]})
    g = MetricGroup(
        "table",
        tuple(elements),
        elements[e],
        mt,
        inv,
        bound=to_rational(bound),
        name=name,
        metadata=dict(metadata or {}),
    )
    return g.with_metric(_metric_table(metric, g))


def _metric_table(metric, g: MetricGroup):
    if metric is None or metric == "discrete":
        return None
    if isinstance(metric, dict):
        labels = [str(x) for x in metric["labels"]]
        rows = metric["matrix"]
        pos = {lab: i for i, lab in enumerate(labels)}
        try:
            order = [pos[g.label(e)] for e in g.elements]
        except KeyError as exc:
            raise MetricAxiomError(f"metric table lacks element {exc}") from None
        return [[to_rational(rows[i][j]) for j in order] for i in order]
    if callable(metric):
        return [[to_rational(metric(a, b)) for b in g.elements] for a in g.elements]
    rows = [[to_rational(x) for x in row] for row in metric]
    if len(rows) != g.order or any(len(r) != g.order for r in rows):
        raise MetricAxiomError("metric table must be n x n in element order")
    return rows


def from_elements(elements, mul, labels=None, metric="discrete", name="", bound=1) -> MetricGroup:
    """Finite group from hashable elements and a multiplication function."""
    elements = list(elements)
    labels = [str(x) for x in (labels or elements)]
    pos = {e: i for i, e in enumerate(elements)}
    table = [[pos[mul(a, b)] for b in elements] for a in elements]
    g = make_finite(table, elements=labels, name=name, bound=bound)
    if callable(metric):
        metric = [[metric(a, b) for b in elements] for a in elements]
    if metric != "discrete":
        g = g.with_metric(_metric_table(metric, g))
    return g


def cyclic(n: int, metric="discrete") -> MetricGroup:
    return from_elements(range(n), lambda a, b: (a + b) % n, metric=metric, name=f"Z/{n}")


def dihedral(n: int) -> MetricGroup:
    """Dihedral group of order 2n; elements ``(reflection, rotation)``."""

    def mul(a, b):
        s1, r1 = a
        s2, r2 = b
        return ((s1 + s2) % 2, ((-r1 if s2 else r1) + r2) % n)

    els = [(s, r) for s in range(2) for r in range(n)]
    labels = [("s" if s else "") + f"r{r}" for s, r in els]
    return from_elements(els, mul, labels, name=f"D{n}")


def symmetric(n: int) -> MetricGroup:
    """Symmetric group; elements are permutation tuples, product ``(a*b)(i) = a[b[i]]``."""
    els = list(itertools.permutations(range(n)))
    labels = ["".join(str(x) for x in p) for p in els]
    return from_elements(els, lambda a, b: tuple(a[i] for i in b), labels, name=f"S{n}")


def quaternion() -> MetricGroup:
    names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    unit = {"1": (1, "1"), "i": (1, "i"), "j": (1, "j"), "k": (1, "k")}
    rule = {
        ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
        ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
        ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
        ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
    }

    def split(x):
        return (-1, x[1:]) if x.startswith("-") else unit[x]

    def mul(a, b):
        sa, ua = split(a)
        sb, ub = split(b)
        s, u = rule[(ua, ub)]
        s *= sa * sb
        return u if s == 1 else "-" + u

    return from_elements(names, mul, name="Q8")


def direct_product(g: MetricGroup, h: MetricGroup) -> MetricGroup:
    els = [(a, b) for a in g.elements for b in h.elements]
    labels = [f"({a},{b})" for a, b in els]
    return from_elements(
        els, lambda x, y: (g.mul(x[0], y[0]), h.mul(x[1], y[1])), labels, name=f"{g.name}x{h.name}"
    )


def small_groups(max_order: int = 8) -> list[MetricGroup]:
    """Every group of order <= 8 up to isomorphism (discrete metric)."""
    out = [cyclic(n) for n in range(1, max_order + 1)]
    extra = []
    if max_order >= 4:
        extra.append(direct_product(cyclic(2), cyclic(2)))
    if max_order >= 6:
        extra.append(symmetric(3))
    if max_order >= 8:
        extra += [
            direct_product(cyclic(2), cyclic(4)),
            direct_product(direct_product(cyclic(2), cyclic(2)), cyclic(2)),
            dihedral(4),
            quaternion(),
        ]
    return out + extra


# ------------------------------------------------------------ enumeration


def make_family(spec: dict):
    fam = spec.get("family")
    if fam == "free":
        return FreeFamily(int(spec.get("rank", spec.get("r", 2))))
    if fam == "zd":
        return ZdFamily(int(spec.get("d", 1)))
    if fam in ("matrices", "from-generators"):
        return MatrixFamily(spec["generators"])
    raise MetlogicError(f"unknown family {fam!r}")


def enumerate_ball(spec: dict, radius: int, cap: int = DEFAULT_CAP, metric="discrete", bound=1) -> MetricGroup:
    """All elements of word length <= radius, in breadth-first generator order."""
    if radius < 1:
        raise MetlogicError("word radius must be at least 1")
    family = spec if not isinstance(spec, dict) else make_family(spec)
    gens = family.generators()
    e = family.identity()
    seen = {e: 0}
    order = [e]
    frontier = [e]
    for step in range(1, radius + 1):
        nxt = []
        for w in frontier:
            for s in gens:
                p = family.mul(w, s)
                if p not in seen:
                    seen[p] = step
                    order.append(p)
                    nxt.append(p)
                    if len(order) > cap:
                        raise EnumerationCapError(
                            f"ball exceeds the enumeration cap {cap}", {"cap": cap, "radius": radius}
                        )
        frontier = nxt
    g = MetricGroup(
        "enumerated",
        tuple(order),
        e,
        family=family,
        radius=radius,
        bound=to_rational(bound),
        generators=tuple(gens),
        name=f"{family.name}-ball-{radius}",
    )
    if metric != "discrete":
        g = g.with_metric(_metric_table(metric, g))
    return g


def word_length(g: MetricGroup, e) -> int | None:
    """Word length of an enumerated element (None outside the ball)."""
    if g.kind != "enumerated":
        raise MetlogicError("word length is defined for enumerated balls only")
    gens = g.generators
    dist = {g.identity: 0}
    frontier = [g.identity]
    for step in range(1, g.radius + 1):
        nxt = []
        for w in frontier:
            for s in gens:
                p = g.family.mul(w, s)
                if p not in dist:
                    dist[p] = step
                    nxt.append(p)
        frontier = nxt
    return dist.get(e)


# ------------------------------------------------------------ metrics


def biinvariantize(g: MetricGroup) -> MetricGroup:
    """Replace d by ``d*(x, y) = max_{u,v} d(u x v, u y v)``."""
    if g.kind != "table":
        raise MetlogicError("d* needs total multiplication; enumerated balls are rejected")
    n = g.order
    rows = g.metric_rows()
    mt = g.mul_table
    star = [[_ZERO] * n for _ in range(n)]
    for x in range(n):
        for y in range(x + 1, n):
            best = _ZERO
            for u in range(n):
                ux, uy = mt[u][x], mt[u][y]
                for v in range(n):
                    d = rows[mt[ux][v]][mt[uy][v]]
                    if d > best:
                        best = d
            star[x][y] = star[y][x] = best
    return g.with_metric(star)


@dataclass(frozen=True)
class BallSpec:
    radius: Fraction
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "radius", to_rational(self.radius))

    def contains(self, value) -> bool:
        return value <= self.radius if self.closed else value < self.radius

    def to_json(self):
        return {"q": str(self.radius), "closure": "closed" if self.closed else "open"}


def ball(g: MetricGroup, spec: BallSpec) -> tuple:
    """Elements x of the carrier with d(1, x) <= q (closed) or < q (open)."""
    return tuple(x for x in g.elements if spec.contains(g.norm(x)))


def random_metric(n: int, rng, denominators=(2, 3, 4, 5, 6, 8)) -> list:
    """Random rational metric on n points (shortest-path closure of random weights in (0, 1])."""
    w = [[_ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            den = rng.choice(denominators)
            w[i][j] = w[j][i] = Fraction(rng.randint(1, den), den)
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if w[i][k] + w[k][j] < w[i][j]:
                    w[i][j] = w[i][k] + w[k][j]
    return w


def random_biinvariant(g: MetricGroup, rng) -> MetricGroup:
    """``g`` with d* of a random rational metric (bi-invariant, values in (0, 1])."""
    return biinvariantize(g.with_metric(random_metric(g.order, rng)))


def group_structure(g: MetricGroup, sort: str = "G"):
    """``g`` as a one-sorted structure with ``mul``, ``inv`` and the constant ``e``.

    Under a bi-invariant metric each argument of ``mul`` and ``inv`` is
    1-Lipschitz, so the identity modulus is declared.  Otherwise the carrier
    is finite and ``eps * dmin / D`` is sound, because a smaller distance
    forces equal arguments.
    """
    from .logic.modulus import Modulus
    from .logic.structure import FunctionSymbol, Sort, Structure

    if g.bi_invariant:
        mod = Modulus.identity()
    else:
        rows = g.metric_rows()
        dmin = min(x for row in rows for x in row if x > 0)
        mod = Modulus.scaled(dmin / g.bound)
    ambient = g.kind == "enumerated" and g.is_discrete
    mul = g.ambient_mul if ambient else g.mul
    contains = (lambda e: True) if ambient else None
    carrier = Sort(sort, g.elements, g.dist, g.bound, contains)
    functions = {
        "mul": FunctionSymbol("mul", (sort, sort), sort, mul, mod),
        "inv": FunctionSymbol("inv", (sort,), sort, g.inv, mod),
        "e": FunctionSymbol("e", (), sort, lambda: g.identity, mod),
    }
    return Structure({sort: carrier}, functions, {}, g.bound)
