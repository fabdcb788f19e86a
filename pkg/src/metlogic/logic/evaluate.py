"""Evaluation, modulus propagation and empirical modulus checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import EmptyCarrierError, NotFreeError, SortError, UnboundVariableError
from .formula import (
    AbsDiff,
    App,
    CMax,
    CMin,
    Const,
    Dist,
    Half,
    Inf,
    Max,
    Min,
    Neg,
    Pred,
    Sup,
    TruncAdd,
    TruncSub,
    Var,
    children,
    free_vars,
    term_vars,
)
from .modulus import Modulus, min_moduli
from .structure import Structure

_HALF = Fraction(1, 2)
_ZERO = Fraction(0)


def _exact(v):
    return Fraction(v) if isinstance(v, int) else v


# ---------------------------------------------------------------- sorts


def infer_sorts(f, s: Structure, given: dict | None = None) -> dict:
    """Sorts of the free variables of ``f``, from symbol signatures and binders."""
    found = dict(given or {})

    def note(name, sort, bound):
        if name in bound:
            if bound[name] != sort:
                raise SortError(f"variable {name!r} bound to {bound[name]!r}, used as {sort!r}")
            return
        prev = found.get(name)
        if prev is not None and prev != sort:
            raise SortError(f"variable {name!r} used with sorts {prev!r} and {sort!r}")
        found[name] = sort

    def term_sort(t, bound):
        if isinstance(t, Var):
            return bound.get(t.name, found.get(t.name))
        return s.functions[t.symbol].result_sort if t.symbol in s.functions else None

    def walk_term(t, expected, bound):
        if isinstance(t, Var):
            if expected is not None:
                note(t.name, expected, bound)
            return
        sym = s.functions.get(t.symbol)
        if sym is None:
            raise SortError(f"unknown function symbol {t.symbol!r}")
        if len(sym.arg_sorts) != len(t.args):
            raise SortError(f"{t.symbol} expects {len(sym.arg_sorts)} arguments")
        if expected is not None and sym.result_sort != expected:
            raise SortError(f"{t.symbol} has sort {sym.result_sort!r}, expected {expected!r}")
        for a, srt in zip(t.args, sym.arg_sorts):
            walk_term(a, srt, bound)

    def walk(g, bound):
        if isinstance(g, Dist):
            srt = term_sort(g.left, bound) or term_sort(g.right, bound)
            if srt is None and len(s.sorts) == 1:
                srt = next(iter(s.sorts))
            walk_term(g.left, srt, bound)
            walk_term(g.right, srt, bound)
        elif isinstance(g, Pred):
            sym = s.predicates.get(g.symbol)
            if sym is None:
                raise SortError(f"unknown predicate symbol {g.symbol!r}")
            if len(sym.arg_sorts) != len(g.args):
                raise SortError(f"{g.symbol} expects {len(sym.arg_sorts)} arguments")
            for a, srt in zip(g.args, sym.arg_sorts):
                walk_term(a, srt, bound)
        elif isinstance(g, (Sup, Inf)):
            s.sort(g.sort)
            walk(g.body, {**bound, g.var: g.sort})
        elif isinstance(g, Const):
            pass
        else:
            for c in children(g):
                walk(c, bound)

    walk(f, {})
    for v in free_vars(f):
        if v not in found:
            if len(s.sorts) == 1:
                found[v] = next(iter(s.sorts))
            else:
                raise SortError(f"cannot infer the sort of {v!r}")
    return found


# ---------------------------------------------------------------- eval


class _Evaluator:
    def __init__(self, s: Structure):
        self.s = s
        self.D = s.bound
        self.cache = {}

    def term(self, t, env):
        if isinstance(t, Var):
            return env[t.name]
        key = (t, tuple(sorted((v, env[v]) for v in _tvars(t))))
        hit = self.cache.get(key)
        if hit is not None:
            return hit[0]
        sym = self.s.functions[t.symbol]
        val = sym.impl(*[self.term(a, env) for a in t.args])
        self.cache[key] = (val,)
        return val

    def ev(self, f, env):
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Dist):
            left = self.term(f.left, env)
            right = self.term(f.right, env)
            srt = self._sort_of(f, left)
            return _exact(srt.metric(left, right))
        if isinstance(f, Pred):
            sym = self.s.predicates[f.symbol]
            return _exact(sym.impl(*[self.term(a, env) for a in f.args]))
        if isinstance(f, Half):
            v = self.ev(f.arg, env)
            return v * _HALF if isinstance(v, Fraction) else v / 2
        if isinstance(f, Neg):
            return self.D - self.ev(f.arg, env)
        if isinstance(f, TruncSub):
            return max(self.ev(f.left, env) - self.ev(f.right, env), _ZERO)
        if isinstance(f, TruncAdd):
            return min(self.ev(f.left, env) + self.ev(f.right, env), self.D)
        if isinstance(f, AbsDiff):
            return abs(self.ev(f.left, env) - self.ev(f.right, env))
        if isinstance(f, (Min, CMin)):
            args = f.args if isinstance(f, Min) else f.family
            if not args:
                return self.D
            return min(self.ev(a, env) for a in args)
        if isinstance(f, (Max, CMax)):
            args = f.args if isinstance(f, Max) else f.family
            if not args:
                return _ZERO
            return max(self.ev(a, env) for a in args)
        if isinstance(f, (Sup, Inf)):
            carrier = self.s.sort(f.sort).elements
            if not carrier:
                raise EmptyCarrierError(f"empty carrier for sort {f.sort!r} under a binder")
            vals = (self.ev(f.body, {**env, f.var: e}) for e in carrier)
            return max(vals) if isinstance(f, Sup) else min(vals)
        raise TypeError(f"not a formula node: {f!r}")

    def _sort_of(self, f, value):
        # Dist nodes are sort-checked up front; find the sort whose carrier has the value.
        if len(self.s.sorts) == 1:
            return next(iter(self.s.sorts.values()))
        for srt in self.s.sorts.values():
            if value in srt:
                return srt
        raise SortError(f"value {value!r} belongs to no sort")


_TVARS = {}


def _tvars(t):
    hit = _TVARS.get(t)
    if hit is None:
        hit = _TVARS[t] = tuple(sorted(term_vars(t)))
    return hit


def evaluate(f, s: Structure, assignment: dict | None = None, sorts: dict | None = None):
    """Value of ``f`` in ``s`` under ``assignment`` (variable name -> element).

    Sup/Inf range over the finite carrier of their sort; Min/Max and their
    truncated countable versions over their finite argument lists, with the
    empty min equal to the bound D and the empty max equal to 0.  Values stay
    exact ``Fraction``s when every input is rational.
    """
    assignment = dict(assignment or {})
    fv = free_vars(f)
    missing = sorted(fv - assignment.keys())
    if missing:
        raise UnboundVariableError(f"unbound variable(s): {', '.join(missing)}", {"vars": missing})
    var_sorts = infer_sorts(f, s, sorts)
    for v in fv:
        srt = s.sort(var_sorts[v])
        if assignment[v] not in srt:
            raise SortError(
                f"variable {v!r} assigned {assignment[v]!r}, not in sort {srt.name!r}",
                {"var": v, "sort": srt.name},
            )
    return _Evaluator(s).ev(f, assignment)


# ---------------------------------------------------------------- moduli


def _split(mods, outer=None):
    """Joint modulus when several pieces move at once.

    Each of the j moving pieces must change by less than eps/j; ``outer`` is
    the symbol's own per-argument modulus (identity when None).
    """
    present = [m for m in mods if m is not None]
    if not present:
        return None
    j = len(present)
    step = Modulus.scaled(Fraction(1, j))
    if outer is not None:
        step = outer.after(step)
    return min_moduli([m.after(step) for m in present])


def _term_modulus(t, x, s):
    if isinstance(t, Var):
        return Modulus.identity() if t.name == x else None
    sym = s.functions.get(t.symbol) if s is not None else None
    outer = sym.modulus if sym is not None else None
    return _split([_term_modulus(a, x, s) for a in t.args], outer)


def _modulus(f, x, s):
    if isinstance(f, Const):
        return None
    if isinstance(f, Dist):
        return _split([_term_modulus(f.left, x, s), _term_modulus(f.right, x, s)])
    if isinstance(f, Pred):
        sym = s.predicates.get(f.symbol) if s is not None else None
        outer = sym.modulus if sym is not None else None
        return _split([_term_modulus(a, x, s) for a in f.args], outer)
    if isinstance(f, Half):
        inner = _modulus(f.arg, x, s)
        return None if inner is None else inner.after(Modulus.scaled(2))
    if isinstance(f, Neg):
        return _modulus(f.arg, x, s)
    if isinstance(f, (TruncSub, TruncAdd, AbsDiff)):
        return _split([_modulus(f.left, x, s), _modulus(f.right, x, s)])
    if isinstance(f, (Min, Max)):
        return min_moduli([_modulus(a, x, s) for a in f.args])
    if isinstance(f, (CMin, CMax)):
        if f.modulus is not None and x in free_vars(f):
            return f.modulus
        return min_moduli([_modulus(a, x, s) for a in f.family])
    if isinstance(f, (Sup, Inf)):
        return None if f.var == x else _modulus(f.body, x, s)
    raise TypeError(f"not a formula node: {f!r}")


def modulus_of(f, x: str, s: Structure | None = None) -> Modulus:
    """A sound continuity modulus of ``f`` in the variable ``x``.

    Function and predicate symbols contribute their declared moduli (identity
    when undeclared or when ``s`` is None).  Min and max take the pointwise
    minimum of their operands' moduli.  Where x moves several operands of an
    additive connective (``-.``, ``+.``, ``absdiff``, a two-sided distance or
    a multi-argument symbol) each operand gets ``eps / j``.
    """
    if x not in free_vars(f):
        raise NotFreeError(f"{x!r} is not free in the formula")
    return _modulus(f, x, s)


@dataclass
class ModulusReport:
    passed: bool
    checked: int
    eps_grid: list
    worst: dict | None = None
    violations: int = 0
    notes: list = field(default_factory=list)

    def to_json(self):
        return {
            "passed": self.passed,
            "checked": self.checked,
            "violations": self.violations,
            "eps_grid": [str(e) for e in self.eps_grid],
            "worst": self.worst,
        }


def default_eps_grid(bound) -> list:
    bound = Fraction(bound)
    return [bound * Fraction(n, 16) for n in (1, 2, 4, 8, 12, 16)]


def check_modulus(
    s: Structure, f, x: str, m: Modulus, samples: int = 100, eps_grid=None, seed: int = 0
) -> ModulusReport:
    """Empirical soundness test of a modulus for ``x`` in ``f``.

    Other free variables are sampled (seeded); ``x`` ranges over every
    carrier pair (e, e').  Whenever ``d(e, e') < m(eps)`` the values must
    differ by less than ``eps``.
    """
    eps_grid = list(eps_grid) if eps_grid is not None else default_eps_grid(s.bound)
    sorts = infer_sorts(f, s)
    srt = s.sort(sorts[x])
    others = sorted(v for v in free_vars(f) if v != x)
    rng = random.Random(seed)
    carrier = list(srt.elements)
    thresholds = [(eps, m(eps)) for eps in eps_grid]
    checked = violations = 0
    worst = None
    rounds = samples if others else 1
    for _ in range(rounds):
        env = {v: rng.choice(s.sort(sorts[v]).elements) for v in others}
        ev = _Evaluator(s)
        vals = [ev.ev(f, {**env, x: e}) for e in carrier]
        for i, e in enumerate(carrier):
            for j, e2 in enumerate(carrier):
                dist = srt.metric(e, e2)
                diff = abs(vals[i] - vals[j])
                for eps, delta in thresholds:
                    if dist < delta:
                        checked += 1
                        if not diff < eps:
                            violations += 1
                            excess = diff - eps
                            if worst is None or excess > worst["excess"]:
                                worst = {
                                    "x": str(e),
                                    "x_prime": str(e2),
                                    "eps": eps,
                                    "diff": diff,
                                    "excess": excess,
                                    "assignment": {k: str(v) for k, v in env.items()},
                                }
    if worst is not None:
        worst = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in worst.items()}
    return ModulusReport(violations == 0, checked, eps_grid, worst, violations)
