"""The planar construction: a central edge ``uv`` plus outer edges ``x_i y_i``.

Outer pair ``i`` holds a pair function ``f_i`` from central colorings
``(a, b)`` to unordered color pairs ``{g1 < g2}``; ``x`` guesses
``g1 - h(y)`` and ``y`` guesses ``g2 - h(x)``.  Both are wrong exactly when
``h(x) + h(y)`` avoids ``f_i(a, b)``, so the central vertices, seeing every
outer hat, can list the central colorings that survive all outer pairs and
hand that list to the clique handler.

Pair indices use colex order: ``{g1 < g2}`` has index ``C(g2, 2) + g1``.
Member ``i`` of the full family is the function whose value on input
``a * q + b`` is the pair with index equal to base-``C(q, 2)`` digit number
``a * q + b`` of ``i`` (least significant digit first).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .clique import capacity, handle_cached
from .core import (
    Coloring,
    Graph,
    Guesser,
    StrategyProfile,
    planar_graph,
    register_structured,
)
from .errors import BudgetExceeded, ContractError, Contradiction, InvalidInput

DEFAULT_FAMILY_BUDGET = 10**6
DEFAULT_EXACT_SUBSETS = 10**7

# central colorings the 13-color adversary commits to
C6 = tuple((a, b) for a in (0, 1) for b in (0, 1, 2))


# ---------------------------------------------------------------------------
# pair indexing
# ---------------------------------------------------------------------------


def pair_count(q: int) -> int:
    return q * (q - 1) // 2


def pair_index(g1: int, g2: int) -> int:
    if g1 > g2:
        g1, g2 = g2, g1
    if g1 == g2:
        raise InvalidInput("a pair needs two distinct colors")
    return g2 * (g2 - 1) // 2 + g1


@lru_cache(maxsize=None)
def pair_from_index(r: int) -> tuple[int, int]:
    g2 = 1
    while (g2 + 1) * g2 // 2 <= r:
        g2 += 1
    return r - g2 * (g2 - 1) // 2, g2


def pair_tables(q: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Arrays ``lo, hi, mask`` indexed by pair index."""
    pairs = [pair_from_index(r) for r in range(pair_count(q))]
    lo = np.array([p[0] for p in pairs], dtype=np.int64)
    hi = np.array([p[1] for p in pairs], dtype=np.int64)
    return lo, hi, (1 << lo) | (1 << hi)


# ---------------------------------------------------------------------------
# pair functions and families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairFunction:
    """Table of pair indices over inputs ``a * q + b``."""

    q: int
    codes: tuple[int, ...]

    def __post_init__(self):
        codes = tuple(map(int, self.codes))
        object.__setattr__(self, "codes", codes)
        if len(codes) != self.q * self.q:
            raise InvalidInput(f"pair function needs {self.q * self.q} entries")
        if min(codes) < 0 or max(codes) >= pair_count(self.q):
            raise InvalidInput("pair code out of range")

    def __call__(self, a: int, b: int) -> tuple[int, int]:
        return pair_from_index(self.codes[a * self.q + b])

    @classmethod
    def from_pairs(cls, q: int, pairs: Sequence[Sequence[int]]) -> "PairFunction":
        return cls(q, tuple(pair_index(*p) for p in pairs))

    def to_json(self) -> list[list[int]]:
        return [list(pair_from_index(c)) for c in self.codes]


@dataclass
class PairFunctionFamily:
    q: int
    t: int
    members: list[PairFunction]
    covering: bool = False
    verification: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.members)

    def code_matrix(self) -> np.ndarray:
        return np.array([m.codes for m in self.members], dtype=np.int64).reshape(len(self.members), self.q**2)

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "t": self.t,
            "kind": "explicit",
            "covering": self.covering,
            "verification": self.verification,
            "members": [m.to_json() for m in self.members],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PairFunctionFamily | ImplicitFullFamily":
        try:
            q = int(obj["q"])
            if obj.get("kind") == "full":
                return ImplicitFullFamily(q)
            members = [PairFunction.from_pairs(q, m) for m in obj["members"]]
            return cls(q, int(obj.get("t", q // 2)), members, bool(obj.get("covering", False)),
                       dict(obj.get("verification", {})))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed family JSON: {exc}") from exc


class ImplicitFullFamily:
    """All ``C(q,2)**(q*q)`` pair functions, materialised one member at a time."""

    def __init__(self, q: int):
        self.q = q
        self.t = q // 2
        self.base = pair_count(q)
        self.digits = q * q
        self.size = self.base**self.digits

    def member(self, index: int) -> PairFunction:
        if not 0 <= index < self.size:
            raise InvalidInput("member index out of range")
        codes = []
        for _ in range(self.digits):
            index, r = divmod(index, self.base)
            codes.append(r)
        return PairFunction(self.q, tuple(codes))

    def index_of(self, f: PairFunction) -> int:
        index = 0
        for c in reversed(f.codes):
            index = index * self.base + c
        return index

    def to_json(self) -> dict:
        return {"q": self.q, "t": self.t, "kind": "full", "members": str(self.size)}


def build_full_family(q: int, budget: int = DEFAULT_FAMILY_BUDGET) -> PairFunctionFamily:
    """Every pair function for ``q`` colors, if there are at most ``budget`` of them."""
    if q < 2:
        raise InvalidInput("need at least two colors")
    full = ImplicitFullFamily(q)
    if full.size > budget:
        raise BudgetExceeded(f"full pair-function family for q={q}", full.size, budget)
    members = [full.member(i) for i in range(full.size)]
    fam = PairFunctionFamily(q, q // 2, members)
    if q % 2 == 0:
        report = verify_cover_family(fam)
        fam.covering = report.ok and report.exact
        fam.verification = report.to_json()
    return fam


def cover_probability(q: int) -> float:
    """Chance that a uniform pair function maps a fixed q/2-set to a perfect matching."""
    t = q // 2
    matchings_ordered = math.factorial(q) // 2**t
    return matchings_ordered / pair_count(q) ** t


def _random_matching_codes(q: int, rng: np.random.Generator) -> list[int]:
    perm = rng.permutation(q)
    return [pair_index(int(perm[2 * k]), int(perm[2 * k + 1])) for k in range(q // 2)]


def _covered_mask(masks: np.ndarray, subsets: np.ndarray, full: int, chunk: int = 4096) -> np.ndarray:
    """For each subset (row of input indices), does some member cover it?"""
    pending = np.arange(subsets.shape[0])
    done = np.zeros(subsets.shape[0], dtype=bool)
    for start in range(0, masks.shape[0], chunk):
        if pending.size == 0:
            break
        block = masks[start : start + chunk]
        union = np.bitwise_or.reduce(block[:, subsets[pending]], axis=2)
        hit = (union == full).any(axis=0)
        done[pending[hit]] = True
        pending = pending[~hit]
    return done


@dataclass
class CoverReport:
    """``failure`` holds the first uncovered t-set as input indices ``a * q + b``."""

    q: int
    ok: bool
    exact: bool
    checked: int
    failure: tuple | None = None

    def to_json(self) -> dict:
        out = {"ok": self.ok, "exact": self.exact, "checked": self.checked}
        if self.failure is not None:
            out["uncovered"] = [list(divmod(k, self.q)) for k in self.failure]
        return out


def _sample_subsets(rng: np.random.Generator, universe: int, t: int, count: int) -> np.ndarray:
    keys = rng.random((count, universe))
    return np.argsort(keys, axis=1)[:, :t]


def verify_cover_family(
    family: PairFunctionFamily,
    samples: int | None = None,
    seed: int = 0,
    exact_budget: int = DEFAULT_EXACT_SUBSETS,
) -> CoverReport:
    """Check that every t-set of central colorings is split into a perfect matching by some member.

    Exact when ``C(q*q, t)`` fits ``exact_budget`` and ``samples`` is not
    given; otherwise ``samples`` uniformly drawn t-sets are checked.
    """
    q, t = family.q, family.t
    if 2 * t != q:
        raise InvalidInput("covering needs t = q/2")
    _, _, pmask = pair_tables(q)
    full = (1 << q) - 1
    if len(family) == 0:
        return CoverReport(q, False, True, 0, tuple(range(t)))
    masks = pmask[family.code_matrix()]
    universe = q * q
    total = math.comb(universe, t)
    if samples is None and total <= exact_budget:
        checked = 0
        for batch in _batched(itertools.combinations(range(universe), t), 8192):
            subsets = np.array(batch, dtype=np.int64)
            ok = _covered_mask(masks, subsets, full)
            if not ok.all():
                first = int(np.flatnonzero(~ok)[0])
                return CoverReport(q, False, True, checked + first + 1, tuple(int(k) for k in subsets[first]))
            checked += len(batch)
        return CoverReport(q, True, True, checked)
    if samples is None:
        raise BudgetExceeded("exact cover verification subsets", total, exact_budget)
    rng = np.random.default_rng(seed)
    checked = 0
    while checked < samples:
        size = min(4096, samples - checked)
        subsets = _sample_subsets(rng, universe, t, size)
        ok = _covered_mask(masks, subsets, full)
        if not ok.all():
            first = int(np.flatnonzero(~ok)[0])
            return CoverReport(q, False, False, checked + first + 1, tuple(sorted(int(k) for k in subsets[first])))
        checked += size
    return CoverReport(q, True, False, checked)


def _batched(it, size):
    batch = []
    for item in it:
        batch.append(item)
        if len(batch) == size:
            yield batch
            batch = []
    if batch:
        yield batch


def build_cover_family(
    q: int,
    t: int | None = None,
    seed: int = 0,
    candidates: int = 64,
    exact_budget: int = DEFAULT_EXACT_SUBSETS,
    samples: int = 10**6,
    members: int | None = None,
    retries: int = 8,
) -> PairFunctionFamily:
    """A small covering family: random members chosen greedily, gaps repaired.

    When the t-sets can be enumerated the family is built against all of
    them and re-verified exhaustively.  Otherwise ``members`` random
    functions are drawn (default: enough for a union bound over all t-sets),
    uncovered sampled t-sets are repaired, and the result is re-checked on a
    fresh independent sample.
    """
    if q < 2 or q % 2:
        raise InvalidInput("cover families need an even number of colors")
    t = q // 2 if t is None else t
    if t != q // 2:
        raise InvalidInput("cover families need t = q/2")
    rng = np.random.default_rng(seed)
    P = pair_count(q)
    universe = q * q
    _, _, pmask = pair_tables(q)
    full = (1 << q) - 1
    total = math.comb(universe, t)

    if q == 2:
        fam = PairFunctionFamily(q, t, [PairFunction(q, (0,) * universe)])
        report = verify_cover_family(fam)
        fam.covering, fam.verification = report.ok, report.to_json()
        return fam

    def repair(subset) -> np.ndarray:
        codes = rng.integers(0, P, size=universe)
        for k, code in zip(subset, _random_matching_codes(q, rng)):
            codes[k] = code
        return codes

    if total <= exact_budget:
        uncovered = np.array(list(itertools.combinations(range(universe), t)), dtype=np.int64)
        chosen: list[np.ndarray] = []
        stale = 0
        while uncovered.shape[0]:
            cand = rng.integers(0, P, size=(candidates, universe))
            union = np.bitwise_or.reduce(pmask[cand][:, uncovered], axis=2)
            gain = (union == full).sum(axis=1)
            best = int(np.argmax(gain))
            if gain[best] == 0:
                stale += 1
                if stale < 4:
                    continue
                pick = repair(uncovered[0])
            else:
                stale = 0
                pick = cand[best]
            chosen.append(pick)
            hit = np.bitwise_or.reduce(pmask[pick][uncovered], axis=1) == full
            uncovered = uncovered[~hit]
        fam = PairFunctionFamily(q, t, [PairFunction(q, tuple(c)) for c in chosen])
        report = verify_cover_family(fam, exact_budget=exact_budget)
        if not report.ok:
            raise Contradiction(f"greedy cover family failed re-verification at {report.failure}")
        fam.covering, fam.verification = True, report.to_json()
        return fam

    if members is None:
        members = math.ceil(1.1 * math.log(total) / cover_probability(q))
    codes = rng.integers(0, P, size=(members, universe))
    for _ in range(retries):
        fam_masks = pmask[codes]
        subsets = _sample_subsets(rng, universe, t, samples)
        ok = np.concatenate([
            _covered_mask(fam_masks, subsets[s : s + 256], full) for s in range(0, samples, 256)
        ])
        missing = subsets[~ok]
        if missing.shape[0] == 0:
            break
        codes = np.vstack([codes] + [repair(s)[None, :] for s in missing])
    fam = PairFunctionFamily(q, t, [PairFunction(q, tuple(c)) for c in codes])
    report = verify_cover_family(fam, samples=samples, seed=int(rng.integers(0, 2**63)))
    if not report.ok:
        raise Contradiction(f"sampled cover family failed independent re-check at {report.failure}")
    fam.covering, fam.verification = False, report.to_json()
    return fam


# ---------------------------------------------------------------------------
# outer behaviour and survivors
# ---------------------------------------------------------------------------


def outer_pair_guesses(f: PairFunction, hu: int, hv: int, hx: int, hy: int) -> tuple[int, int]:
    g1, g2 = f(hu, hv)
    return (g1 - hy) % f.q, (g2 - hx) % f.q


def surviving_central_colorings(family: PairFunctionFamily, outer_sums: Sequence[int]) -> set[tuple[int, int]]:
    """Central colorings ``(a, b)`` under which every outer pair guesses wrong."""
    if len(outer_sums) != len(family):
        raise InvalidInput(f"{len(outer_sums)} sums for {len(family)} outer pairs")
    q = family.q
    lo_t, hi_t, _ = pair_tables(q)
    codes = family.code_matrix()
    s = np.asarray(outer_sums, dtype=np.int64)[:, None]
    alive = ((lo_t[codes] != s) & (hi_t[codes] != s)).all(axis=0)
    return {divmod(int(k), q) for k in np.flatnonzero(alive)}


def survivor_masks(codes: np.ndarray, q: int, sums: np.ndarray) -> np.ndarray:
    """Batch survivors: ``sums`` is (N, M); returns (N, q*q) booleans."""
    lo_t, hi_t, _ = pair_tables(q)
    lo, hi = lo_t[codes], hi_t[codes]
    alive = np.ones((sums.shape[0], q * q), dtype=bool)
    for i in range(codes.shape[0]):
        s = sums[:, i : i + 1]
        alive &= (lo[i] != s) & (hi[i] != s)
    return alive


def implicit_survivor_trial(
    q: int, rng: random.Random, warmup: int = 24
) -> tuple[list[tuple[int, int]], int]:
    """Survivors against a lazily sampled prefix of the full family's sums.

    ``warmup`` uniformly random members (random index, random sum) are
    consulted first.  While at least ``q/2`` central colorings survive, the
    index of a member that splits the first ``q/2`` of them into a perfect
    matching is built, the member is decoded back from that index and
    re-checked, and a random sum is drawn for it.  Any extension of the
    consulted sums can only shrink the result, so its size bounds the true
    survivor count for every such sums vector.  Returns (survivors,
    members consulted).
    """
    full = ImplicitFullFamily(q)
    t = q // 2
    all_mask = (1 << q) - 1
    survivors = [divmod(k, q) for k in range(q * q)]
    consulted = 0

    def apply(member: PairFunction, s: int):
        return [c for c in survivors if s not in member(*c)]

    for _ in range(warmup):
        if len(survivors) < t:
            break
        member = full.member(rng.randrange(full.size))
        survivors = apply(member, rng.randrange(q))
        consulted += 1
    while len(survivors) >= t:
        target = survivors[:t]
        codes = [rng.randrange(full.base) for _ in range(full.digits)]
        colors = list(range(q))
        rng.shuffle(colors)
        for k, (a, b) in enumerate(target):
            codes[a * q + b] = pair_index(colors[2 * k], colors[2 * k + 1])
        index = full.index_of(PairFunction(q, tuple(codes)))
        member = full.member(index)
        union = 0
        for c in target:
            g1, g2 = member(*c)
            union |= (1 << g1) | (1 << g2)
        if union != all_mask:
            raise Contradiction(f"member {index} does not split {target} into a perfect matching")
        before = len(survivors)
        survivors = apply(member, rng.randrange(q))
        consulted += 1
        if len(survivors) == before:
            raise Contradiction("a covering member eliminated no central coloring")
    return survivors, consulted


# ---------------------------------------------------------------------------
# guessers and the full strategy
# ---------------------------------------------------------------------------


@register_structured("planar-outer")
class PlanarOuterGuesser(Guesser):
    """Reads ``(h(u), h(v), h(partner))``; ``role`` 0 is x (uses g1), 1 is y (uses g2)."""

    degree = 3

    def __init__(self, f: PairFunction, role: int):
        self.f = f
        self.q = f.q
        self.role = role
        lo_t, hi_t, _ = pair_tables(f.q)
        table = lo_t if role == 0 else hi_t
        self._target = table[np.asarray(f.codes, dtype=np.int64)]

    def guess_batch(self, inputs: np.ndarray) -> np.ndarray:
        g = self._target[inputs[:, 0] * self.q + inputs[:, 1]]
        return (g - inputs[:, 2]) % self.q

    def to_json(self) -> dict:
        return {"kind": "structured", "name": "planar-outer", "role": self.role, "pairs": self.f.to_json()}

    @classmethod
    def from_json_payload(cls, q: int, obj: dict) -> "PlanarOuterGuesser":
        return cls(PairFunction.from_pairs(q, obj["pairs"]), int(obj["role"]))


@register_structured("planar-central")
class PlanarCentralGuesser(Guesser):
    """Central vertex: computes the survivor set and plays the clique handler on it.

    Input layout: partner's color, then ``x_0, y_0, x_1, y_1, ...``.
    """

    def __init__(self, q: int, codes: np.ndarray, role: int):
        self.q = q
        self.codes = np.asarray(codes, dtype=np.int64)
        self.role = role
        self.degree = 1 + 2 * self.codes.shape[0]

    def guess_batch(self, inputs: np.ndarray) -> np.ndarray:
        q = self.q
        out = np.empty(inputs.shape[0], dtype=np.int64)
        if self.codes.shape[0]:
            sums = (inputs[:, 1::2] + inputs[:, 2::2]) % q
            alive = survivor_masks(self.codes, q, sums)
        else:
            alive = np.ones((inputs.shape[0], q * q), dtype=bool)
        packed = np.packbits(alive, axis=1)
        keys, inverse = np.unique(packed, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        for k in range(keys.shape[0]):
            rows = np.flatnonzero(inverse == k)
            cells = np.flatnonzero(alive[rows[0]])
            known = frozenset(divmod(int(c), q) for c in cells)
            strat = handle_cached(2, q, known)
            if not strat:
                raise ContractError(f"central pair cannot handle survivor set {sorted(known)}")
            partner = inputs[rows, 0]
            out[rows] = [strat.guess(self.role, (int(p),)) for p in partner]
        return out

    def to_json(self) -> dict:
        return {
            "kind": "structured",
            "name": "planar-central",
            "role": self.role,
            "members": [[list(pair_from_index(int(c))) for c in row] for row in self.codes],
        }

    @classmethod
    def from_json_payload(cls, q: int, obj: dict) -> "PlanarCentralGuesser":
        codes = [[pair_index(*p) for p in row] for row in obj["members"]]
        return cls(q, np.array(codes, dtype=np.int64).reshape(len(codes), q * q), int(obj["role"]))


@dataclass
class PlanarStrategy:
    graph: Graph
    family: PairFunctionFamily
    profile: StrategyProfile


def construct_planar_strategy(q: int, family: PairFunctionFamily) -> PlanarStrategy:
    """Assemble the outer-pair and central guessers over the construction graph."""
    if q != family.q:
        raise InvalidInput(f"family is for q={family.q}, asked for q={q}")
    if q > 12 or q % 2:
        raise ContractError(f"q={q}: survivors up to q/2 - 1 must fit the central capacity {capacity(2)} (even q <= 12)")
    if not family.covering:
        report = verify_cover_family(family)
        if not report.ok:
            raise ContractError(f"family is not covering: {report.to_json()}")
    m = len(family)
    graph = planar_graph(m, q)
    codes = family.code_matrix()
    guessers: list[Guesser] = [PlanarCentralGuesser(q, codes, 0), PlanarCentralGuesser(q, codes, 1)]
    for f in family.members:
        guessers += [PlanarOuterGuesser(f, 0), PlanarOuterGuesser(f, 1)]
    profile = StrategyProfile(q, tuple(guessers))
    profile.check_graph(graph)
    return PlanarStrategy(graph, family, profile)


# ---------------------------------------------------------------------------
# the 13-color adversary
# ---------------------------------------------------------------------------


def _pair_vertices(i: int) -> tuple[int, int]:
    return 2 + 2 * i, 3 + 2 * i


def outer_safe_colorings(profile: StrategyProfile, i: int, centrals=C6) -> list[tuple[int, int]]:
    """Colorings ``(h(x), h(y))`` of pair i on which both guess wrong under every central candidate."""
    q = profile.q
    x, y = _pair_vertices(i)
    grid = np.array(list(itertools.product(range(q), repeat=2)), dtype=np.int64)
    ok = np.ones(grid.shape[0], dtype=bool)
    for a, b in centrals:
        ab = np.tile(np.array([a, b], dtype=np.int64), (grid.shape[0], 1))
        gx = profile.guessers[x].guess_batch(np.column_stack([ab, grid[:, 1]]))
        gy = profile.guessers[y].guess_batch(np.column_stack([ab, grid[:, 0]]))
        ok &= (gx != grid[:, 0]) & (gy != grid[:, 1])
    return [tuple(int(c) for c in row) for row in grid[ok]]


def adversary_13(graph: Graph, profile: StrategyProfile) -> Coloring:
    """A coloring on which every vertex guesses wrong, for any strategy with q >= 13.

    Each outer pair takes its lexicographically first coloring that defeats
    it under all six central candidates; the central pair then takes the
    first candidate on which both central guesses miss.
    """
    if graph.shape.kind != "planar":
        raise InvalidInput("adversary_13 needs the planar construction graph")
    q = profile.q
    if q < 13:
        raise InvalidInput(f"the counting argument needs q >= 13, got {q}")
    profile.check_graph(graph)
    m = graph.shape["m"]
    colors = [0] * graph.n
    for i in range(m):
        safe = outer_safe_colorings(profile, i)
        if not safe:
            raise Contradiction(f"outer pair {i}: no coloring defeats it on all six central candidates")
        colors[2 + 2 * i], colors[3 + 2 * i] = safe[0]
    outer = np.array(colors[2:], dtype=np.int64)
    rows_u = np.array([[b, *outer] for _, b in C6], dtype=np.int64).reshape(len(C6), -1)
    rows_v = np.array([[a, *outer] for a, _ in C6], dtype=np.int64).reshape(len(C6), -1)
    gu = profile.guessers[0].guess_batch(rows_u)
    gv = profile.guessers[1].guess_batch(rows_v)
    for k, (a, b) in enumerate(C6):
        if gu[k] != a and gv[k] != b:
            colors[0], colors[1] = a, b
            return Coloring(tuple(colors), q)
    raise Contradiction("the central pair covered all six candidate colorings")


# ---------------------------------------------------------------------------
# planarity certificate
# ---------------------------------------------------------------------------


def straight_line_drawing(m: int) -> dict[int, tuple[float, float]]:
    """u above-left, v below-left, outer vertices in a row: no two edges cross."""
    pos = {0: (-1.0, 1.0), 1: (-1.0, -1.0)}
    for j in range(2 * m):
        pos[2 + j] = (float(j), 0.0)
    return pos


def count_faces(graph: Graph, pos: dict[int, tuple[float, float]]) -> int:
    """Faces of the rotation system induced by a drawing (angular neighbor order)."""
    rot = {}
    for v in range(graph.n):
        vx, vy = pos[v]
        rot[v] = sorted(graph.neighbors(v), key=lambda w: math.atan2(pos[w][1] - vy, pos[w][0] - vx))
    where = {v: {w: k for k, w in enumerate(rot[v])} for v in rot}
    seen = set()
    faces = 0
    for u in range(graph.n):
        for v in graph.neighbors(u):
            if (u, v) in seen:
                continue
            faces += 1
            a, b = u, v
            while (a, b) not in seen:
                seen.add((a, b))
                k = where[b][a]
                a, b = b, rot[b][(k - 1) % len(rot[b])]
    return faces


def planarity_certificate(graph: Graph) -> dict:
    """Euler bound plus an explicit embedding whose face count satisfies V - E + F = 2."""
    if graph.shape.kind != "planar":
        raise InvalidInput("only the planar construction carries an explicit embedding")
    v, e = graph.n, len(graph.edges)
    faces = count_faces(graph, straight_line_drawing(graph.shape["m"]))
    euler_bound = v < 3 or e <= 3 * v - 6
    return {"vertices": v, "edges": e, "faces": faces, "euler_bound": euler_bound, "embedded": v - e + faces == 2}
