"""Formula syntax trees for [0, D]-valued continuous logic.

Nodes are frozen dataclasses, so equal trees compare and hash equal.  Terms
are variables and applications of function symbols; a constant symbol is an
application with no arguments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..rationals import to_rational
from .modulus import Modulus


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class App:
    symbol: str
    args: tuple = ()


Term = Var | App


@dataclass(frozen=True)
class Const:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", to_rational(self.value))


@dataclass(frozen=True)
class Dist:
    left: Term
    right: Term


@dataclass(frozen=True)
class Pred:
    symbol: str
    args: tuple = ()


@dataclass(frozen=True)
class Half:
    arg: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class TruncSub:
    left: object
    right: object


@dataclass(frozen=True)
class TruncAdd:
    left: object
    right: object


@dataclass(frozen=True)
class AbsDiff:
    left: object
    right: object


@dataclass(frozen=True)
class Min:
    args: tuple


@dataclass(frozen=True)
class Max:
    args: tuple


@dataclass(frozen=True)
class Sup:
    var: str
    sort: str
    body: object


@dataclass(frozen=True)
class Inf:
    var: str
    sort: str
    body: object


@dataclass(frozen=True)
class CMin:
    """Finite truncation of a countable min: members ``0 .. bound-1``."""

    family: tuple
    modulus: Modulus | None = field(default=None, compare=False)

    @property
    def bound(self) -> int:
        return len(self.family)


@dataclass(frozen=True)
class CMax:
    """Finite truncation of a countable max: members ``0 .. bound-1``."""

    family: tuple
    modulus: Modulus | None = field(default=None, compare=False)

    @property
    def bound(self) -> int:
        return len(self.family)


BINARY = (TruncSub, TruncAdd, AbsDiff)
UNARY = (Half, Neg)
VARIADIC = (Min, Max)
BINDERS = (Sup, Inf)
TRUNCATIONS = (CMin, CMax)


def truncate(kind, member, bound: int, modulus: Modulus | None = None):
    """Materialize the first ``bound`` members ``member(0), member(1), ...``."""
    if kind not in TRUNCATIONS:
        raise TypeError("kind must be CMin or CMax")
    return kind(tuple(member(i) for i in range(bound)), modulus)


def term_vars(t) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    out = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def children(f):
    if isinstance(f, UNARY):
        return (f.arg,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, VARIADIC):
        return f.args
    if isinstance(f, TRUNCATIONS):
        return f.family
    if isinstance(f, BINDERS):
        return (f.body,)
    return ()


def free_vars(f) -> set[str]:
    if isinstance(f, Const):
        return set()
    if isinstance(f, Dist):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, Pred):
        out = set()
        for a in f.args:
            out |= term_vars(a)
        return out
    if isinstance(f, BINDERS):
        return free_vars(f.body) - {f.var}
    out = set()
    for c in children(f):
        out |= free_vars(c)
    return out


def size(f) -> int:
    return 1 + sum(size(c) for c in children(f))
