"""The bipartite relation R_U and the matching number.

``mu`` has two independent routes.  The deficiency route maximizes
``|S| - |N(S)|`` over all left subsets.  The augmenting route runs
Hopcroft-Karp and reads a deficiency witness off the alternating-path
reachability (Koenig).  Parts are indexed, so repeated elements count
separately; ``collisions`` flags when that happened.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import kernels
from .errors import BudgetExhaustedError, DisagreementError, MetlogicError
from .groups import BallSpec, MetricGroup

DEFICIENCY_CAP = 24
METHODS = ("deficiency", "augmenting", "both")


@dataclass(frozen=True)
class BipartiteInstance:
    left: tuple
    right: tuple
    rows: tuple  # rows[i] is the bitset of right indices adjacent to left index i

    @property
    def n_left(self) -> int:
        return len(self.left)

    @property
    def n_right(self) -> int:
        return len(self.right)

    @property
    def collisions(self) -> bool:
        return len(set(self.left)) < len(self.left) or len(set(self.right)) < len(self.right)

    def adjacent(self, i: int, j: int) -> bool:
        return bool(self.rows[i] >> j & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n_left) for j in range(self.n_right) if self.adjacent(i, j)]

    @classmethod
    def from_edges(cls, n_left: int, n_right: int, edges) -> BipartiteInstance:
        rows = [0] * n_left
        for i, j in edges:
            if not (0 <= i < n_left and 0 <= j < n_right):
                raise MetlogicError(f"edge {(i, j)} out of range")
            rows[i] |= 1 << j
        return cls(tuple(range(n_left)), tuple(range(n_right)), tuple(rows))


@dataclass(frozen=True)
class MatchingResult:
    mu: int
    witness_S: tuple
    matching: tuple
    method: str
    collisions: bool = False

    def to_json(self, left=None, label=str) -> dict:
        out = {
            "mu": self.mu,
            "witness_S": list(self.witness_S),
            "matching": [list(p) for p in self.matching],
            "method": self.method,
        }
        if self.collisions:
            out["collisions"] = True
        return out


def adjacency_rows(g: MetricGroup, F1, F2, U: BallSpec) -> list[int]:
    """``rows[i]`` bit j iff ``d(1, F2[j] * F1[i]^-1)`` lies in U."""
    inv = [g.inv(x) for x in F1]
    rows = []
    for xi in inv:
        r = 0
        for j, y in enumerate(F2):
            if U.contains(g.norm(g.ambient_mul(y, xi))):
                r |= 1 << j
        rows.append(r)
    return rows


def build_RU(g: MetricGroup, F1, F2, U: BallSpec) -> BipartiteInstance:
    return BipartiteInstance(tuple(F1), tuple(F2), tuple(adjacency_rows(g, F1, F2, U)))


def neighborhood(b: BipartiteInstance, S) -> tuple:
    acc = 0
    for i in S:
        if not 0 <= i < b.n_left:
            raise MetlogicError(f"left index {i} out of range 0..{b.n_left - 1}", {"index": i})
        acc |= b.rows[i]
    return tuple(j for j in range(b.n_right) if acc >> j & 1)


def _mask_indices(mask: int) -> tuple:
    out, i = [], 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _koenig_witness(b: BipartiteInstance, match_left) -> tuple:
    """Left vertices reachable from unmatched left vertices by alternating paths."""
    match_right = [-1] * b.n_right
    for i, j in enumerate(match_left):
        if j >= 0:
            match_right[j] = i
    seen = [i for i in range(b.n_left) if match_left[i] < 0]
    reached = set(seen)
    stack = list(seen)
    while stack:
        i = stack.pop()
        for j in _mask_indices(b.rows[i]):
            k = match_right[j]
            if k >= 0 and k not in reached:
                reached.add(k)
                stack.append(k)
    return tuple(sorted(reached))


def mu(b: BipartiteInstance, method: str = "augmenting") -> MatchingResult:
    if method not in METHODS:
        raise MetlogicError(f"unknown method {method!r}")
    size, match_left = kernels.hk_matching(list(b.rows), b.n_right)
    matching = tuple((i, j) for i, j in enumerate(match_left) if j >= 0)
    if method == "augmenting":
        return MatchingResult(size, _koenig_witness(b, match_left), matching, method, b.collisions)
    if b.n_left > DEFICIENCY_CAP:
        raise BudgetExhaustedError(
            f"deficiency method needs |F1| <= {DEFICIENCY_CAP}, got {b.n_left}",
            {"n_left": b.n_left, "cap": DEFICIENCY_CAP},
        )
    deficiency, mask = kernels.max_deficiency(list(b.rows), b.n_right)
    value = b.n_left - deficiency
    if method == "both" and value != size:
        raise DisagreementError(
            "deficiency and augmenting matching numbers differ",
            {"deficiency": value, "augmenting": size},
        )
    if method == "deficiency" and value != size:
        # the returned matching must certify mu; a mismatch is a kernel bug
        raise DisagreementError("matching size differs from the deficiency value")
    return MatchingResult(value, _mask_indices(mask), matching, method, b.collisions)


def matching_number(g: MetricGroup, F1, F2, U: BallSpec) -> int:
    return kernels.hk_matching(adjacency_rows(g, F1, F2, U), len(F2))[0]
