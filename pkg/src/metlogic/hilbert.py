"""Finite-dimensional complex Hilbert space presented through ball sorts B_1 .. B_N."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import MetlogicError, SortError
from .rationals import TAU


def scalar_sort_factor(c: complex) -> int:
    """The integer k >= 1 with k - 1 <= |c| < k."""
    return math.floor(abs(c)) + 1


@dataclass(frozen=True)
class SortedVector:
    coords: tuple  # complex entries
    sort: int

    def __post_init__(self):
        coords = tuple(complex(z) for z in self.coords)
        object.__setattr__(self, "coords", coords)
        if self.sort < 1:
            raise SortError("ball sorts are indexed from 1")
        if self.norm() > self.sort + TAU:
            raise SortError(
                f"vector of norm {self.norm()!r} does not fit in B_{self.sort}",
                {"norm": self.norm(), "sort": self.sort},
            )

    @classmethod
    def of(cls, coords, sort: int | None = None) -> SortedVector:
        """Wrap ``coords`` in the given sort, or the least one that fits."""
        arr = np.asarray(coords, dtype=complex)
        if sort is None:
            sort = max(1, math.ceil(float(np.linalg.norm(arr)) - TAU))
        return cls(tuple(arr.tolist()), sort)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def norm(self) -> float:
        return float(np.linalg.norm(np.array(self.coords, dtype=complex)))

    def to_json(self):
        return {"coords": [[z.real, z.imag] for z in self.coords], "sort": self.sort}


def _same(u: SortedVector, v: SortedVector):
    if u.sort != v.sort:
        raise SortError(f"sort mismatch: B_{u.sort} vs B_{v.sort}; include first")
    if u.dim != v.dim:
        raise SortError(f"dimension mismatch: {u.dim} vs {v.dim}")


def add(u: SortedVector, v: SortedVector) -> SortedVector:
    _same(u, v)
    return SortedVector(tuple(u.array + v.array), 2 * u.sort)


def sub(u: SortedVector, v: SortedVector) -> SortedVector:
    _same(u, v)
    return SortedVector(tuple(u.array - v.array), 2 * u.sort)


def scalar(c: complex, v: SortedVector) -> SortedVector:
    return SortedVector(tuple(complex(c) * v.array), scalar_sort_factor(c) * v.sort)


def inner(u: SortedVector, v: SortedVector) -> tuple[float, float]:
    """``<u, v>`` (linear in u) as its real and imaginary predicate values."""
    _same(u, v)
    z = complex(np.vdot(v.array, u.array))
    bound = u.sort**2 + TAU
    if abs(z.real) > bound or abs(z.imag) > bound:
        raise MetlogicError("inner product outside its predicate range")
    return z.real, z.imag


def dist(u: SortedVector, v: SortedVector) -> float:
    _same(u, v)
    return float(np.linalg.norm(u.array - v.array))


def include(v: SortedVector, n: int) -> SortedVector:
    if n <= v.sort:
        raise SortError(f"inclusion needs a larger sort than B_{v.sort}, got B_{n}")
    return SortedVector(v.coords, n)


def random_vector(rng: np.random.Generator, dim: int, radius: float = 1.0) -> np.ndarray:
    """Uniform direction (complex Gaussian) scaled to ``radius``."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return radius * z / np.linalg.norm(z)


# ------------------------------------------------------------ as a structure


def lattice_net(dim: int, radius: int, h: float) -> list[tuple]:
    """Points of ``h (Z + iZ)^dim`` in the closed ball of the given radius.

    The net is a deterministic (h * sqrt(2 dim) / 2)-net of the ball.
    """
    steps = int(math.floor(radius / h + 1e-12))
    axis = [h * i for i in range(-steps, steps + 1)]
    out = []
    for parts in itertools.product(axis, repeat=2 * dim):
        coords = tuple(complex(parts[2 * i], parts[2 * i + 1]) for i in range(dim))
        if math.sqrt(sum(abs(z) ** 2 for z in coords)) <= radius + TAU:
            out.append(coords)
    return out


def hilbert_structure(dim: int, sort_ceiling: int, h: float = 0.5, scalars=()):
    """Many-sorted structure with lattice-net carriers for ``B_1 .. B_N``.

    Symbols: inclusions ``I_m_n``, ``add_n``/``sub_n`` into ``B_2n`` (when
    2n <= N), ``scale_<j>_m`` for each scalar ``scalars[j]`` with km <= N, and
    the predicates ``re_n``/``im_n`` of the inner product.  Binders over these
    carriers are net estimates with resolution ``h``.
    """
    from .logic.modulus import Modulus
    from .logic.structure import FunctionSymbol, PredicateSymbol, Sort, Structure

    def metric(a, b):
        return math.sqrt(sum(abs(x - y) ** 2 for x, y in zip(a, b)))

    def contains(n):
        return lambda v: len(v) == dim and math.sqrt(sum(abs(z) ** 2 for z in v)) <= n + TAU

    sorts, funcs, preds = {}, {}, {}
    for n in range(1, sort_ceiling + 1):
        name = f"B{n}"
        sorts[name] = Sort(name, tuple(lattice_net(dim, n, h)), metric, 2 * n, contains(n))
        for m in range(1, n):
            funcs[f"I_{m}_{n}"] = FunctionSymbol(f"I_{m}_{n}", (f"B{m}",), name, lambda v: v, Modulus.identity())
        if 2 * n <= sort_ceiling:
            funcs[f"add_{n}"] = FunctionSymbol(
                f"add_{n}", (name, name), f"B{2 * n}",
                lambda a, b: tuple(x + y for x, y in zip(a, b)), Modulus.identity(),
            )
            funcs[f"sub_{n}"] = FunctionSymbol(
                f"sub_{n}", (name, name), f"B{2 * n}",
                lambda a, b: tuple(x - y for x, y in zip(a, b)), Modulus.identity(),
            )
        for j, c in enumerate(scalars):
            k = scalar_sort_factor(c)
            if k * n <= sort_ceiling:
                mod = Modulus.identity() if abs(c) <= 1 else Modulus.scaled(Fraction(1, math.ceil(abs(c))))
                funcs[f"scale_{j}_{n}"] = FunctionSymbol(
                    f"scale_{j}_{n}", (name,), f"B{k * n}",
                    (lambda c: lambda v: tuple(c * z for z in v))(complex(c)), mod,
                )
        lip = Modulus.scaled(Fraction(1, n))
        preds[f"re_{n}"] = PredicateSymbol(
            f"re_{n}", (name, name), lambda a, b: sum(x * y.conjugate() for x, y in zip(a, b)).real,
            lip, -(n**2), n**2,
        )
        preds[f"im_{n}"] = PredicateSymbol(
            f"im_{n}", (name, name), lambda a, b: sum(x * y.conjugate() for x, y in zip(a, b)).imag,
            lip, -(n**2), n**2,
        )
    return Structure(sorts, funcs, preds, 2 * sort_ceiling)

