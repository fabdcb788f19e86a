"""Continuity moduli as exact piecewise-linear maps ``eps -> delta``.

A modulus is stored as its interior kinks plus the slope of the final ray.
The first segment starts at the origin.  With no kinks the map is linear,
``delta = slope * eps``; the identity modulus is the linear map of slope 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..rationals import to_rational


def _norm(points, slope):
    """Drop kinks that are collinear with their neighbours."""
    pts = [(Fraction(0), Fraction(0))] + [(Fraction(e), Fraction(d)) for e, d in points]
    slope = Fraction(slope)
    changed = True
    while changed:
        changed = False
        for i in range(1, len(pts)):
            e0, d0 = pts[i - 1]
            e1, d1 = pts[i]
            if i + 1 < len(pts):
                e2, d2 = pts[i + 1]
                right = (d2 - d1) / (e2 - e1)
            else:
                right = slope
            left = (d1 - d0) / (e1 - e0)
            if left == right:
                del pts[i]
                changed = True
                break
    return tuple(pts[1:]), slope


@dataclass(frozen=True)
class Modulus:
    kinks: tuple = ()
    slope: Fraction = Fraction(1)

    def __post_init__(self):
        kinks, slope = _norm(self.kinks, self.slope)
        object.__setattr__(self, "kinks", kinks)
        object.__setattr__(self, "slope", slope)
        prev_e, prev_d = Fraction(0), Fraction(0)
        for e, d in kinks:
            if e <= prev_e:
                raise ValueError("modulus breakpoints must have increasing eps")
            if d < prev_d:
                raise ValueError("modulus must be nondecreasing")
            prev_e, prev_d = e, d
        if slope < 0:
            raise ValueError("modulus must be nondecreasing")
        first = kinks[0][1] if kinks else slope
        if first <= 0:
            raise ValueError("modulus must be positive for positive eps")

    @classmethod
    def identity(cls) -> Modulus:
        return cls((), Fraction(1))

    @classmethod
    def scaled(cls, factor) -> Modulus:
        """``eps -> factor * eps``."""
        return cls((), to_rational(factor))

    @classmethod
    def from_breakpoints(cls, breakpoints) -> Modulus:
        """Interpolate through ``[(eps, delta), ...]``; the last segment extends."""
        pts = sorted((to_rational(e), to_rational(d)) for e, d in breakpoints)
        if not pts:
            raise ValueError("empty breakpoint table")
        if len(pts) == 1:
            e, d = pts[0]
            return cls((), d / e)
        (e1, d1), (e2, d2) = pts[-2], pts[-1]
        return cls(tuple(pts[:-1]), (d2 - d1) / (e2 - e1))

    @property
    def is_identity(self) -> bool:
        return not self.kinks and self.slope == 1

    def breakpoints(self):
        """A breakpoint table that ``from_breakpoints`` maps back to this modulus."""
        if not self.kinks:
            return [(Fraction(1), self.slope)]
        e, d = self.kinks[-1]
        return list(self.kinks) + [(e + 1, d + self.slope)]

    def __call__(self, eps):
        exact = isinstance(eps, (int, Fraction))
        x = Fraction(eps) if exact else eps
        pe, pd = (0, 0)
        for e, d in self.kinks:
            if x <= e:
                val = pd + (d - pd) * (x - pe) / (e - pe)
                return val if exact else float(val)
            pe, pd = e, d
        val = pd + self.slope * (x - pe)
        return val if exact else float(val)

    def _slope_after(self, x):
        pe, pd = Fraction(0), Fraction(0)
        for e, d in self.kinks:
            if x < e:
                return (d - pd) / (e - pe)
            pe, pd = e, d
        return self.slope

    def _preimages(self, y):
        """All eps > 0 where the map crosses level y on a strictly rising piece."""
        out = []
        pe, pd = Fraction(0), Fraction(0)
        for e, d in self.kinks:
            if pd < y <= d and d > pd:
                out.append(pe + (y - pd) * (e - pe) / (d - pd))
            pe, pd = e, d
        if self.slope > 0 and y > pd:
            out.append(pe + (y - pd) / self.slope)
        return out

    def after(self, outer: Modulus) -> Modulus:
        """The composite ``eps -> self(outer(eps))``."""
        xs = {e for e, _ in outer.kinks}
        for e, _ in self.kinks:
            xs.update(outer._preimages(e))
        xs = sorted(x for x in xs if x > 0)
        points = [(x, self(outer(x))) for x in xs]
        if outer.slope == 0:
            tail = Fraction(0)
        else:
            tail = outer.slope * self.slope
        return Modulus(tuple(points), tail)

    def minimum(self, other: Modulus) -> Modulus:
        """Pointwise minimum."""
        xs = sorted({e for e, _ in self.kinks} | {e for e, _ in other.kinks})
        grid = [Fraction(0)] + xs
        roots = []
        for a, b in zip(grid, grid[1:]):
            fa = self(a) - other(a)
            fb = self(b) - other(b)
            if fa * fb < 0:
                roots.append(a + (b - a) * fa / (fa - fb))
        last = grid[-1]
        fl = self(last) - other(last)
        ds = self.slope - other.slope
        if ds != 0:
            r = last - fl / ds
            if r > last:
                roots.append(r)
        xs = sorted(set(xs) | set(roots))
        points = [(x, min(self(x), other(x))) for x in xs]
        end = (xs[-1] if xs else Fraction(0)) + 1
        a, b = self(end), other(end)
        if a < b:
            tail = self.slope
        elif b < a:
            tail = other.slope
        else:
            tail = min(self.slope, other.slope)
        return Modulus(tuple(points), tail)

    def to_json(self):
        if self.is_identity:
            return "identity"
        return {"breakpoints": [[str(e), str(d)] for e, d in self.breakpoints()]}

    @classmethod
    def from_json(cls, data) -> Modulus:
        if data is None or data == "identity":
            return cls.identity()
        if isinstance(data, dict) and "breakpoints" in data:
            return cls.from_breakpoints(data["breakpoints"])
        raise ValueError(f"bad modulus specification: {data!r}")

    def __str__(self):
        if self.is_identity:
            return "identity"
        if not self.kinks:
            return f"eps -> {self.slope} * eps"
        return "pl" + str([(str(e), str(d)) for e, d in self.breakpoints()])


def min_moduli(mods):
    mods = [m for m in mods if m is not None]
    if not mods:
        return None
    out = mods[0]
    for m in mods[1:]:
        out = out.minimum(m)
    return out
