"""Finite many-sorted metric structures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from ..errors import MetricAxiomError, SortError
from ..rationals import TAU, to_rational
from .modulus import Modulus


@dataclass(frozen=True)
class Sort:
    """A sort with a finite carrier (used by binders) and a metric.

    ``contains`` may accept more elements than ``elements`` lists, e.g. the
    ambient elements of an enumerated group ball.
    """

    name: str
    elements: tuple
    metric: Callable[[Any, Any], Any]
    bound: Fraction = Fraction(1)
    contains: Callable[[Any], bool] | None = None

    def __contains__(self, item):
        if self.contains is not None:
            return self.contains(item)
        return item in self._members

    @property
    def _members(self):
        try:
            return self.__dict__["_member_set"]
        except KeyError:
            s = frozenset(self.elements)
            object.__setattr__(self, "_member_set", s)
            return s


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    arg_sorts: tuple
    result_sort: str
    impl: Callable
    modulus: Modulus | None = None


@dataclass(frozen=True)
class PredicateSymbol:
    name: str
    arg_sorts: tuple
    impl: Callable
    modulus: Modulus | None = None
    lo: Fraction = Fraction(0)
    hi: Fraction | None = None


@dataclass
class Structure:
    sorts: dict
    functions: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=dict)
    bound: Fraction = Fraction(1)

    def __post_init__(self):
        self.bound = to_rational(self.bound)

    def signature(self) -> dict:
        """``{symbol: ("function" | "predicate", arity)}`` for the DSL parser."""
        sig = {name: ("function", len(f.arg_sorts)) for name, f in self.functions.items()}
        sig.update({name: ("predicate", len(p.arg_sorts)) for name, p in self.predicates.items()})
        return sig

    def sort(self, name: str) -> Sort:
        try:
            return self.sorts[name]
        except KeyError:
            raise SortError(f"unknown sort {name!r}") from None

    def validate(self) -> None:
        """Exact metric-axiom and predicate-range check on every finite carrier."""
        for s in self.sorts.values():
            check_metric(s.elements, s.metric, s.bound)
        for p in self.predicates.values():
            hi = self.bound if p.hi is None else p.hi
            carriers = [self.sort(a).elements for a in p.arg_sorts]
            for args in itertools.product(*carriers):
                v = p.impl(*args)
                if not (p.lo <= v <= hi):
                    raise MetricAxiomError(
                        f"predicate {p.name} value {v} outside [{p.lo}, {hi}]",
                        {"symbol": p.name, "args": [str(a) for a in args]},
                    )


def _slack(*vals):
    """0 for exact values; TAU as soon as a float is involved (rounding)."""
    return TAU if any(isinstance(v, float) for v in vals) else 0


def check_metric(elements, metric, bound) -> None:
    """Raise ``MetricAxiomError`` with a witness if ``metric`` is not a metric bounded by ``bound``.

    Rational tables are checked exactly; float metrics get slack ``TAU``.
    """
    elements = list(elements)
    for a in elements:
        if metric(a, a) != 0:
            raise MetricAxiomError("d(x,x) != 0", {"witness": [str(a)]})
    for a, b in itertools.combinations(elements, 2):
        dab, dba = metric(a, b), metric(b, a)
        if dab != dba:
            raise MetricAxiomError("metric not symmetric", {"witness": [str(a), str(b)]})
        if dab <= 0:
            raise MetricAxiomError("distinct points at distance 0", {"witness": [str(a), str(b)]})
        if dab > bound + _slack(dab):
            raise MetricAxiomError("metric exceeds its bound", {"witness": [str(a), str(b)]})
    for a, b, c in itertools.product(elements, repeat=3):
        ac, ab, bc = metric(a, c), metric(a, b), metric(b, c)
        if ac > ab + bc + _slack(ac, ab, bc):
            raise MetricAxiomError(
                "triangle inequality fails", {"witness": [str(a), str(b), str(c)]}
            )
