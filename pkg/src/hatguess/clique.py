"""Handling a known set of candidate colorings on a clique.

A d-clique that knows its coloring lies in a set ``S`` wants a strategy in
which, for every ``s`` in ``S``, some member ``j`` guesses ``s[j]`` from the
other ``d - 1`` colors.  Two independent deciders are provided:

* :func:`handle_known_set` runs the backtracking cover search and returns a
  strategy or an :class:`Infeasible` carrying a replayable refutation;
* :func:`is_handleable` enumerates the reduced strategy space outright.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

from .errors import BudgetExceeded, InvalidInput
from .search import check_refutation, cover_search, refutation_to_json

ABSTAIN = -1


def capacity(d: int) -> int:
    """Sum of i**i for i = 1..d: the known-set size a d-clique is expected to handle."""
    if d < 1:
        raise InvalidInput("clique size must be at least 1")
    return sum(i**i for i in range(1, d + 1))


@dataclass(frozen=True)
class KnownSet:
    d: int
    q: int
    colorings: frozenset

    def __post_init__(self):
        cols = frozenset(tuple(int(c) for c in s) for s in self.colorings)
        for s in cols:
            if len(s) != self.d:
                raise InvalidInput(f"coloring {s} does not have length d={self.d}")
            if any(not 0 <= c < self.q for c in s):
                raise InvalidInput(f"coloring {s} has a color outside [0, {self.q})")
        object.__setattr__(self, "colorings", cols)

    @classmethod
    def of(cls, d: int, q: int, colorings: Iterable) -> "KnownSet":
        return cls(d, q, frozenset(tuple(s) for s in colorings))

    def ordered(self) -> list[tuple[int, ...]]:
        return sorted(self.colorings)

    def to_json(self) -> dict:
        return {"d": self.d, "q": self.q, "set": [list(s) for s in self.ordered()]}

    @classmethod
    def from_json(cls, obj: dict) -> "KnownSet":
        try:
            raw = [tuple(s) for s in obj["set"]]
            if len(set(raw)) != len(raw):
                raise InvalidInput("known set lists a coloring twice")
            return cls(int(obj["d"]), int(obj["q"]), frozenset(raw))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed known-set JSON: {exc}") from exc


def _drop(s: tuple, j: int) -> tuple:
    return s[:j] + s[j + 1 :]


@dataclass(frozen=True)
class CliqueStrategy:
    """Per-vertex guess tables keyed by the other members' colors; default 0."""

    d: int
    q: int
    tables: tuple = field(default_factory=tuple)

    def guess(self, j: int, others: tuple[int, ...]) -> int:
        return self.tables[j].get(tuple(others), 0)

    def correct_on(self, s: tuple[int, ...]) -> list[int]:
        return [j for j in range(self.d) if self.guess(j, _drop(s, j)) == s[j]]

    def covers(self, colorings: Iterable[tuple[int, ...]]) -> bool:
        return all(self.correct_on(tuple(s)) for s in colorings)

    def __bool__(self) -> bool:
        return True

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "q": self.q,
            "tables": [[{"sees": list(k), "guess": g} for k, g in sorted(t.items())] for t in self.tables],
            "default": 0,
        }


@dataclass(frozen=True)
class Infeasible:
    """No strategy covers the set; ``refutation`` replays the exhausted search."""

    known: KnownSet
    nodes: int
    refutation: dict | None

    def __bool__(self) -> bool:
        return False

    def check(self) -> bool:
        return self.refutation is not None and check_refutation(_demands(self.known), self.refutation)

    def to_json(self) -> dict:
        return {
            "infeasible": True,
            "nodes": self.nodes,
            "refutation": refutation_to_json(self.refutation, lambda k: [k[0], list(k[1])]),
        }


def _demands(ks: KnownSet):
    return [[((j, _drop(s, j)), s[j]) for j in range(ks.d)] for s in ks.ordered()]


def handle_known_set(ks: KnownSet, node_budget: int = 2_000_000, certificate: bool = True):
    """Find a strategy covering every coloring of ``ks``, or prove there is none.

    Tables are only defined on projections of ``S``; unseen inputs fall back
    to guess 0.
    """
    if not ks.colorings:
        return CliqueStrategy(ks.d, ks.q, tuple({} for _ in range(ks.d)))
    result = cover_search(_demands(ks), node_budget=node_budget, certificate=certificate)
    if not result.feasible:
        return Infeasible(ks, result.nodes, result.refutation)
    tables = tuple({} for _ in range(ks.d))
    for (j, proj), guess in result.assignment.items():
        tables[j][proj] = guess
    return CliqueStrategy(ks.d, ks.q, tables)


@lru_cache(maxsize=1 << 16)
def handle_cached(d: int, q: int, colorings: frozenset):
    """Memoised :func:`handle_known_set` for callers that meet the same sets repeatedly."""
    return handle_known_set(KnownSet(d, q, colorings), certificate=False)


def reduced_space(ks: KnownSet):
    """Per (vertex, observed projection) the candidate guesses, abstain last.

    Only projections occurring in ``S`` matter, and a guess matters only if
    it is the vertex's own color in some element of ``S``; everything else
    is the single sentinel ``ABSTAIN``.
    """
    cells = []
    for j in range(ks.d):
        slot_colors = sorted({s[j] for s in ks.colorings})
        for proj in sorted({_drop(s, j) for s in ks.colorings}):
            cells.append(((j, proj), slot_colors + [ABSTAIN]))
    return cells


def reduced_space_size(ks: KnownSet) -> int:
    return math.prod(len(opts) for _, opts in reduced_space(ks))


def is_handleable(ks: KnownSet, budget: int = 10**6) -> bool:
    """Exact decision by enumerating every strategy in the reduced space."""
    return decide_by_enumeration(ks, budget)[0]


def decide_by_enumeration(ks: KnownSet, budget: int = 10**6) -> tuple[bool, int]:
    """Returns ``(handleable, cases_examined)``."""
    if not ks.colorings:
        return True, 0
    cells = reduced_space(ks)
    size = math.prod(len(opts) for _, opts in cells)
    if size > budget:
        raise BudgetExceeded("reduced clique strategy space", size, budget)
    pos = {key: i for i, (key, _) in enumerate(cells)}
    # for each coloring: the cell index each vertex reads, and the guess that would be right
    checks = [[(pos[(j, _drop(s, j))], s[j]) for j in range(ks.d)] for s in ks.ordered()]
    examined = 0
    for choice in itertools.product(*(opts for _, opts in cells)):
        examined += 1
        if all(any(choice[c] == want for c, want in row) for row in checks):
            return True, examined
    return False, examined


def sum_strategy(d: int, q: int) -> CliqueStrategy:
    """Vertex j bets that the total color sum is j mod q; wins outright when q <= d."""
    tables = []
    for j in range(d):
        t = {}
        for others in itertools.product(range(q), repeat=d - 1):
            t[others] = (j - sum(others)) % q
        tables.append(t)
    return CliqueStrategy(d, q, tuple(tables))
