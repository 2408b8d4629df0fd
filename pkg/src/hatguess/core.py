"""Graphs, colorings, strategy profiles and the winning check.

Colors are the integers ``0..q-1``.  A vertex's guesser always receives
the colors of its neighbors in ascending vertex order; that order fixes the
layout of lookup tables and of the JSON format.

Evaluation is vectorised: every guesser exposes ``guess_batch`` over an
``(N, deg)`` integer array, and the exhaustive sweep walks the ``q**n``
colorings as contiguous lexicographic blocks of that array.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded, InvalidInput

DEFAULT_EVAL_BUDGET = 10**9
DEFAULT_NODE_BUDGET = 2_000_000
BLOCK = 1 << 15


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Shape:
    """Construction tag: ``generic``, ``planar``, ``book`` or ``multipartite``."""

    kind: str = "generic"
    params: tuple[tuple[str, int], ...] = ()

    def __getitem__(self, key: str) -> int:
        return dict(self.params)[key]

    def to_json(self) -> dict:
        return {"kind": self.kind, **dict(self.params)}

    @classmethod
    def from_json(cls, obj: dict | None) -> "Shape":
        if obj is None:
            return cls()
        obj = dict(obj)
        kind = obj.pop("kind", "generic")
        return cls(kind, tuple(sorted((k, int(v)) for k, v in obj.items())))


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset
    shape: Shape = field(default_factory=Shape)

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInput("negative vertex count")
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for e in self.edges:
            u, v = e
            if not (0 <= u < v < self.n):
                raise InvalidInput(f"bad edge {e!r} for n={self.n}")
            nbrs[u].append(v)
            nbrs[v].append(u)
        object.__setattr__(self, "_nbrs", tuple(tuple(sorted(a)) for a in nbrs))
        if self.shape.kind != "generic":
            expected = _shape_edges(self.shape)
            if expected != self.edges:
                raise InvalidInput(f"edge set does not match shape {self.shape.to_json()}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], shape: Shape | None = None) -> "Graph":
        norm = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InvalidInput(f"self-loop at {u}")
            key = (min(u, v), max(u, v))
            if key in norm:
                raise InvalidInput(f"duplicate edge {key}")
            norm.add(key)
        return cls(n, frozenset(norm), shape or Shape())

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._nbrs[v]

    def degree(self, v: int) -> int:
        return len(self._nbrs[v])

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def to_json(self) -> dict:
        out = {"n": self.n, "edges": [list(e) for e in sorted(self.edges)]}
        if self.shape.kind != "generic":
            out["shape"] = self.shape.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Graph":
        try:
            return cls.from_edges(int(obj["n"]), obj["edges"], Shape.from_json(obj.get("shape")))
        except (KeyError, TypeError, IndexError) as exc:
            raise InvalidInput(f"malformed graph JSON: {exc}") from exc


def _shape_edges(shape: Shape) -> frozenset:
    if shape.kind == "planar":
        return frozenset(planar_construction_edges(shape["m"]))
    if shape.kind == "book":
        return frozenset(book_edges(shape["d"], shape["m"]))
    if shape.kind == "multipartite":
        return frozenset(multipartite_edges(shape["n"], shape["m"]))
    if shape.kind == "complete":
        return frozenset(itertools.combinations(range(shape["n"]), 2))
    raise InvalidInput(f"unknown shape kind {shape.kind!r}")


def planar_construction_edges(m: int) -> list[tuple[int, int]]:
    # u = 0, v = 1, outer pair i = (2 + 2i, 3 + 2i)
    edges = [(0, 1)]
    for i in range(m):
        x, y = 2 + 2 * i, 3 + 2 * i
        edges += [(0, x), (0, y), (1, x), (1, y), (x, y)]
    return edges


def book_edges(d: int, m: int) -> list[tuple[int, int]]:
    edges = list(itertools.combinations(range(d), 2))
    edges += [(c, d + i) for i in range(m) for c in range(d)]
    return edges


def multipartite_index(i: int, k: int, m: int) -> int:
    """Vertex (i, k) of K_n^(m): i-th vertex of part k."""
    return i * m + k


def multipartite_edges(n: int, m: int) -> list[tuple[int, int]]:
    verts = [(i, k) for i in range(n) for k in range(m)]
    return [
        (multipartite_index(*a, m), multipartite_index(*b, m))
        for a, b in itertools.combinations(verts, 2)
        if a[1] != b[1]
    ]


def complete_graph(n: int) -> Graph:
    return Graph(n, frozenset(itertools.combinations(range(n), 2)), Shape("complete", (("n", n),)))


def empty_graph(n: int) -> Graph:
    return Graph(n, frozenset())


def planar_graph(m: int, q: int | None = None) -> Graph:
    params = (("m", m),) if q is None else (("m", m), ("q", q))
    return Graph(n=2 + 2 * m, edges=frozenset(planar_construction_edges(m)), shape=Shape("planar", params))


def book_graph(d: int, m: int) -> Graph:
    return Graph(d + m, frozenset(book_edges(d, m)), Shape("book", (("d", d), ("m", m))))


def multipartite_graph(n: int, m: int) -> Graph:
    return Graph(n * m, frozenset(multipartite_edges(n, m)), Shape("multipartite", (("m", m), ("n", n))))


# ---------------------------------------------------------------------------
# colorings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Coloring:
    values: tuple[int, ...]
    q: int

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(c) for c in self.values))
        if self.q < 1:
            raise InvalidInput("q must be positive")
        for c in self.values:
            if not 0 <= c < self.q:
                raise InvalidInput(f"color {c} outside [0, {self.q})")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def to_json(self) -> list[int]:
        return list(self.values)


def index_to_coloring(index: int, n: int, q: int) -> tuple[int, ...]:
    out = [0] * n
    for pos in range(n - 1, -1, -1):
        index, out[pos] = divmod(index, q)
    return tuple(out)


def coloring_block(start: int, stop: int, n: int, q: int) -> np.ndarray:
    """Colorings ``start..stop-1`` in lexicographic order as an ``(N, n)`` array."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((idx.size, n), dtype=np.int64)
    for pos in range(n - 1, -1, -1):
        out[:, pos] = idx % q
        idx //= q
    return out


# ---------------------------------------------------------------------------
# guessers
# ---------------------------------------------------------------------------


def mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finaliser on a uint64 array (wrapping arithmetic)."""
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


class Guesser:
    """Base class; subclasses implement ``guess_batch``."""

    kind = "structured"
    degree: int

    def guess(self, inputs: Sequence[int]) -> int:
        arr = np.asarray(inputs, dtype=np.int64).reshape(1, -1)
        return int(self.guess_batch(arr)[0])

    def guess_batch(self, inputs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


class TableGuesser(Guesser):
    """Lookup table over all ``q**deg`` neighbor-color vectors, lexicographic."""

    kind = "table"

    def __init__(self, q: int, degree: int, table: Sequence[int]):
        self.q = q
        self.degree = degree
        self.table = np.asarray(table, dtype=np.int64)
        if self.table.shape != (q**degree,):
            raise InvalidInput(f"table must have {q**degree} entries, got {self.table.size}")
        if self.table.size and (self.table.min() < 0 or self.table.max() >= q):
            raise InvalidInput("table guess outside color range")
        self._radix = np.array([q ** (degree - 1 - j) for j in range(degree)], dtype=np.int64)

    @classmethod
    def from_function(cls, q: int, degree: int, fn: Callable[[tuple[int, ...]], int]) -> "TableGuesser":
        return cls(q, degree, [fn(x) % q for x in itertools.product(range(q), repeat=degree)])

    def guess(self, inputs: Sequence[int]) -> int:
        idx = 0
        for c in inputs:
            idx = idx * self.q + int(c)
        return int(self.table[idx])

    def guess_batch(self, inputs: np.ndarray) -> np.ndarray:
        if self.degree == 0:
            return np.full(inputs.shape[0], self.table[0], dtype=np.int64)
        return self.table[inputs @ self._radix]

    def to_json(self) -> dict:
        return {"kind": "table", "table": self.table.tolist()}


class AffineGuesser(Guesser):
    """``sum(coeff * x) + bias`` over the prime field of order ``p``."""

    kind = "affine"

    def __init__(self, p: int, coefficients: Sequence[int], bias: int = 0):
        if not is_prime(p):
            raise InvalidInput(f"affine guessers need a prime modulus, got {p}")
        self.p = p
        self.coefficients = np.asarray(coefficients, dtype=np.int64) % p
        self.bias = int(bias) % p
        self.degree = len(self.coefficients)

    def guess(self, inputs: Sequence[int]) -> int:
        return (sum(int(c) * int(x) for c, x in zip(self.coefficients, inputs)) + self.bias) % self.p

    def guess_batch(self, inputs: np.ndarray) -> np.ndarray:
        return (inputs @ self.coefficients + self.bias) % self.p

    def to_table(self) -> TableGuesser:
        return TableGuesser.from_function(self.p, self.degree, self.guess)

    def to_json(self) -> dict:
        return {"kind": "affine", "coefficients": self.coefficients.tolist(), "bias": self.bias}


STRUCTURED: dict[str, Callable[[int, dict], Guesser]] = {}


def register_structured(name: str):
    def deco(cls):
        STRUCTURED[name] = cls.from_json_payload
        cls.structured_name = name
        return cls

    return deco


@register_structured("random")
class SeededRandomGuesser(Guesser):
    """A uniformly random table that is never materialised.

    Entry for an input vector is a splitmix64 hash of (key, colors), so the
    guesser is total and deterministic for any degree.
    """

    def __init__(self, q: int, degree: int, key: int):
        self.q = q
        self.degree = degree
        self.key = int(key) & 0xFFFFFFFFFFFFFFFF

    def guess_batch(self, inputs: np.ndarray) -> np.ndarray:
        h = mix64(np.full(inputs.shape[0], self.key, dtype=np.uint64))
        for j in range(self.degree):
            h = mix64(h ^ inputs[:, j].astype(np.uint64))
        return (h % np.uint64(self.q)).astype(np.int64)

    def to_json(self) -> dict:
        return {"kind": "structured", "name": "random", "degree": self.degree, "key": str(self.key)}

    @classmethod
    def from_json_payload(cls, q: int, obj: dict) -> "SeededRandomGuesser":
        return cls(q, int(obj["degree"]), int(obj["key"]))


@dataclass(frozen=True)
class StrategyProfile:
    q: int
    guessers: tuple

    def __post_init__(self):
        object.__setattr__(self, "guessers", tuple(self.guessers))

    def check_graph(self, graph: Graph) -> None:
        if len(self.guessers) != graph.n:
            raise InvalidInput(f"profile has {len(self.guessers)} guessers, graph has {graph.n} vertices")
        for v, g in enumerate(self.guessers):
            if g.degree != graph.degree(v):
                raise InvalidInput(f"vertex {v}: guesser reads {g.degree} colors, degree is {graph.degree(v)}")
            gq = getattr(g, "q", getattr(g, "p", self.q))
            if gq != self.q:
                raise InvalidInput(f"vertex {v}: guesser works mod {gq}, profile q={self.q}")

    def to_json(self) -> dict:
        return {"q": self.q, "vertices": [g.to_json() for g in self.guessers]}

    @classmethod
    def from_json(cls, obj: dict, graph: Graph | None = None) -> "StrategyProfile":
        try:
            q = int(obj["q"])
            guessers = []
            for v, item in enumerate(obj["vertices"]):
                kind = item["kind"]
                if kind == "table":
                    table = item["table"]
                    deg = graph.degree(v) if graph is not None else _table_degree(len(table), q)
                    guessers.append(TableGuesser(q, deg, table))
                elif kind == "affine":
                    guessers.append(AffineGuesser(q, item["coefficients"], item.get("bias", 0)))
                elif kind == "structured":
                    name = item["name"]
                    if name not in STRUCTURED:
                        raise InvalidInput(f"unknown structured guesser {name!r}")
                    guessers.append(STRUCTURED[name](q, item))
                else:
                    raise InvalidInput(f"unknown guesser kind {kind!r}")
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed strategy JSON: {exc}") from exc
        profile = cls(q, tuple(guessers))
        if graph is not None:
            profile.check_graph(graph)
        return profile


def _table_degree(size: int, q: int) -> int:
    deg = 0
    while q**deg < size:
        deg += 1
    if q**deg != size:
        raise InvalidInput(f"table of size {size} is not a power of q={q}")
    return deg


def random_profile(graph: Graph, q: int, seed: int, table_limit: int = 10**5) -> StrategyProfile:
    """Uniformly random strategy; large tables are replaced by hashed ones."""
    rng = np.random.default_rng(seed)
    guessers = []
    for v in range(graph.n):
        deg = graph.degree(v)
        if q**deg <= table_limit:
            guessers.append(TableGuesser(q, deg, rng.integers(0, q, size=q**deg)))
        else:
            guessers.append(SeededRandomGuesser(q, deg, int(rng.integers(0, 2**63))))
    return StrategyProfile(q, tuple(guessers))


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


# ---------------------------------------------------------------------------
# evaluation and verification
# ---------------------------------------------------------------------------


def evaluate(graph: Graph, profile: StrategyProfile, coloring: Coloring) -> frozenset[int]:
    """Vertices whose guess equals their own hat color."""
    if coloring.q != profile.q:
        raise InvalidInput(f"coloring has q={coloring.q}, profile q={profile.q}")
    if len(coloring) != graph.n:
        raise InvalidInput(f"coloring has {len(coloring)} entries, graph has {graph.n} vertices")
    profile.check_graph(graph)
    vals = coloring.values
    return frozenset(
        v for v in range(graph.n) if profile.guessers[v].guess([vals[u] for u in graph.neighbors(v)]) == vals[v]
    )


def correct_matrix(graph: Graph, profile: StrategyProfile, colorings: np.ndarray) -> np.ndarray:
    """Boolean ``(N, n)`` array: entry ``[r, v]`` is True iff v guesses right on row r."""
    colorings = np.asarray(colorings, dtype=np.int64)
    out = np.empty(colorings.shape, dtype=bool)
    for v in range(graph.n):
        nb = list(graph.neighbors(v))
        out[:, v] = profile.guessers[v].guess_batch(colorings[:, nb]) == colorings[:, v]
    return out


def all_wrong(graph: Graph, profile: StrategyProfile, colorings: np.ndarray) -> np.ndarray:
    """Mask of rows on which nobody guesses correctly."""
    colorings = np.asarray(colorings, dtype=np.int64)
    alive = np.ones(colorings.shape[0], dtype=bool)
    for v in range(graph.n):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        sub = colorings[idx]
        hit = profile.guessers[v].guess_batch(sub[:, list(graph.neighbors(v))]) == sub[:, v]
        alive[idx[hit]] = False
    return alive


@dataclass(frozen=True)
class VerifyOutcome:
    """``winning`` (exhaustive only), ``counterexample`` or ``no_counterexample`` (sampled)."""

    status: str
    coloring: Coloring | None = None
    checked: int = 0

    @property
    def winning(self) -> bool:
        return self.status == "winning"

    @property
    def defeated(self) -> bool:
        return self.status == "counterexample"

    def to_json(self) -> dict:
        out = {"status": self.status, "winning": self.winning, "checked": self.checked}
        if self.coloring is not None:
            out["coloring"] = self.coloring.to_json()
        return out


def _first_wrong_in_range(args) -> int | None:
    graph, profile, start, stop = args
    n, q = graph.n, profile.q
    for lo in range(start, stop, BLOCK):
        hi = min(stop, lo + BLOCK)
        bad = np.flatnonzero(all_wrong(graph, profile, coloring_block(lo, hi, n, q)))
        if bad.size:
            return lo + int(bad[0])
    return None


def worker_count() -> int:
    env = os.environ.get("HG_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def verify(
    graph: Graph,
    profile: StrategyProfile,
    mode: str = "exhaustive",
    samples: int = 10**5,
    seed: int = 0,
    budget: int = DEFAULT_EVAL_BUDGET,
    workers: int = 1,
) -> VerifyOutcome:
    """Search for a coloring on which every vertex guesses wrong.

    Exhaustive mode scans ``q**n`` colorings in lexicographic order and
    returns the first counterexample; ranges may be split across
    ``workers`` processes, the least index found wins.  Sampled mode can
    only ever refute, never certify.
    """
    profile.check_graph(graph)
    n, q = graph.n, profile.q
    if mode == "exhaustive":
        total = q**n
        if total > budget:
            raise BudgetExceeded("exhaustive coloring sweep", total, budget)
        if workers > 1 and total > 4 * BLOCK:
            step = -(-total // workers)
            jobs = [(graph, profile, s, min(total, s + step)) for s in range(0, total, step)]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                found = [r for r in pool.map(_first_wrong_in_range, jobs) if r is not None]
            first = min(found) if found else None
        else:
            first = _first_wrong_in_range((graph, profile, 0, total))
        if first is None:
            return VerifyOutcome("winning", checked=total)
        return VerifyOutcome("counterexample", Coloring(index_to_coloring(first, n, q), q), checked=first + 1)
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        done = 0
        while done < samples:
            size = min(BLOCK, samples - done)
            block = rng.integers(0, q, size=(size, n))
            bad = np.flatnonzero(all_wrong(graph, profile, block))
            if bad.size:
                return VerifyOutcome("counterexample", Coloring(block[bad[0]], q), checked=done + int(bad[0]) + 1)
            done += size
        return VerifyOutcome("no_counterexample", checked=samples)
    raise InvalidInput(f"unknown verify mode {mode!r}")


# ---------------------------------------------------------------------------
# exact solver
# ---------------------------------------------------------------------------


def find_winning_profile(
    graph: Graph, q: int, budget: int = DEFAULT_EVAL_BUDGET, node_budget: int = DEFAULT_NODE_BUDGET
) -> StrategyProfile | None:
    """Exact search for a winning strategy; ``None`` means none exists.

    Every coloring is a demand "some vertex v guesses c[v] on input
    c|N(v)"; the covering search branches over the table entries that could
    satisfy the most constrained open demand.
    """
    from .search import cover_search

    n = graph.n
    total = q**n
    if total > budget:
        raise BudgetExceeded("colorings to cover", total, budget)
    nbrs = [graph.neighbors(v) for v in range(n)]
    demands = []
    for c in itertools.product(range(q), repeat=n):
        demands.append([((v, tuple(c[u] for u in nbrs[v])), c[v]) for v in range(n)])
    result = cover_search(demands, node_budget=node_budget)
    if result.assignment is None:
        return None
    guessers = []
    for v in range(n):
        deg = len(nbrs[v])
        table = [result.assignment.get((v, x), 0) for x in itertools.product(range(q), repeat=deg)]
        guessers.append(TableGuesser(q, deg, table))
    return StrategyProfile(q, tuple(guessers))


def solve_hg(graph: Graph, q: int, budget: int = DEFAULT_EVAL_BUDGET, node_budget: int = DEFAULT_NODE_BUDGET) -> bool:
    """True iff some strategy with ``q`` colors guarantees a correct guess."""
    return find_winning_profile(graph, q, budget, node_budget) is not None


def iter_colorings(n: int, q: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(q), repeat=n)


def hat_guessing_number(graph: Graph, q_max: int, budget: int = DEFAULT_EVAL_BUDGET) -> int:
    """Largest ``q <= q_max`` that is winnable (winnability is downward closed)."""
    best = 1 if graph.n else 0
    for q in range(1, q_max + 1):
        if math.pow(q, graph.n) > budget:
            break
        if not solve_hg(graph, q, budget):
            break
        best = q
    return best
