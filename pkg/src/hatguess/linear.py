"""Affine strategies on complete multipartite graphs over prime fields.

Vertex ``(i, k)`` is the i-th vertex of part k (index ``i * m + k``) and sees
every vertex outside part k.  Its guess is ``f_ik(x) + b_ik`` with ``f_ik``
linear in the visible colors.  For every coloring ``x`` the slot family
members are

    F(x) = {(i, k, x_ik - f_ik(x) - b_ik)}     G(x) = {(i, k, x_ik - f_ik(x))}

(values mod p).  If ``F(x_F)`` and ``G(x_G)`` are disjoint then every slot
of ``z = x_F - x_G`` has ``z_ik - f_ik(z) - b_ik != 0``: nobody guesses right.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import AffineGuesser, Coloring, StrategyProfile, coloring_block, is_prime, multipartite_graph
from .errors import BudgetExceeded, InvalidInput

DEFAULT_ENUM_BUDGET = 10**7


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise InvalidInput(f"{self.p} is not prime")


class LinearStrategy:
    """Coefficient matrix ``A`` (zero inside each part) and bias vector ``b``."""

    def __init__(self, n: int, m: int, p: int, coefficients, bias):
        PrimeField(p)
        self.n, self.m, self.p = n, m, p
        w = n * m
        self.A = np.asarray(coefficients, dtype=np.int64).reshape(w, w) % p
        self.b = np.asarray(bias, dtype=np.int64).reshape(w) % p
        part = np.arange(w) % m
        if (self.A[part[:, None] == part[None, :]] != 0).any():
            raise InvalidInput("a vertex cannot read colors from its own part")
        self._deps = [[(int(u), int(self.A[v, u])) for u in np.flatnonzero(self.A[v])] for v in range(w)]

    @property
    def w(self) -> int:
        return self.n * self.m

    def slot(self, v: int) -> tuple[int, int]:
        return divmod(v, self.m)

    def visible(self, v: int) -> list[int]:
        k = v % self.m
        return [u for u in range(self.w) if u % self.m != k]

    @classmethod
    def random(cls, n: int, m: int, p: int, rng: np.random.Generator) -> "LinearStrategy":
        w = n * m
        part = np.arange(w) % m
        A = rng.integers(0, p, size=(w, w))
        A[part[:, None] == part[None, :]] = 0
        return cls(n, m, p, A, rng.integers(0, p, size=w))

    @classmethod
    def from_rows(cls, n: int, m: int, p: int, rows: Sequence[Sequence[int]], bias: Sequence[int]) -> "LinearStrategy":
        """``rows[v]`` lists coefficients over the visible vertices in (i', j) order."""
        w = n * m
        A = np.zeros((w, w), dtype=np.int64)
        for v in range(w):
            vis = [u for u in range(w) if u % m != v % m]
            if len(rows[v]) != len(vis):
                raise InvalidInput(f"vertex {v} needs {len(vis)} coefficients, got {len(rows[v])}")
            A[v, vis] = rows[v]
        return cls(n, m, p, A, bias)

    def guesses(self, X: np.ndarray) -> np.ndarray:
        return (X @ self.A.T + self.b) % self.p

    def to_profile(self) -> StrategyProfile:
        return StrategyProfile(
            self.p,
            tuple(AffineGuesser(self.p, self.A[v, self.visible(v)], self.b[v]) for v in range(self.w)),
        )

    def graph(self):
        return multipartite_graph(self.n, self.m)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "m": self.m,
            "vertices": [
                {"slot": list(self.slot(v)), "coefficients": self.A[v, self.visible(v)].tolist(), "bias": int(self.b[v])}
                for v in range(self.w)
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "LinearStrategy":
        try:
            n, m, p = int(obj["n"]), int(obj["m"]), int(obj["p"])
            verts = obj["vertices"]
            if len(verts) != n * m:
                raise InvalidInput(f"expected {n * m} vertices, got {len(verts)}")
            return cls.from_rows(n, m, p, [v["coefficients"] for v in verts], [v.get("bias", 0) for v in verts])
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed linear strategy JSON: {exc}") from exc


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpreadFamily:
    """Either an explicit list of sets, or the F / G family of a strategy."""

    kind: str  # "F", "G" or "materialized"
    strategy: LinearStrategy | None = None
    sets: tuple = ()

    @classmethod
    def implicit(cls, strategy: LinearStrategy, kind: str) -> "SpreadFamily":
        if kind not in ("F", "G"):
            raise InvalidInput("implicit families are 'F' or 'G'")
        return cls(kind, strategy)

    @classmethod
    def materialized(cls, sets: Iterable[Iterable]) -> "SpreadFamily":
        return cls("materialized", None, tuple(frozenset(tuple(e) for e in s) for s in sets))

    @property
    def uses_bias(self) -> bool:
        return self.kind == "F"

    def slot_values(self, X: np.ndarray) -> np.ndarray:
        """Per coloring row, the value each slot's element carries."""
        st = self.strategy
        vals = X - X @ st.A.T
        if self.uses_bias:
            vals = vals - st.b
        return vals % st.p

    def members(self, budget: int = DEFAULT_ENUM_BUDGET) -> list[frozenset]:
        if self.kind == "materialized":
            return list(self.sets)
        st = self.strategy
        total = st.p**st.w
        if total > budget:
            raise BudgetExceeded("family members", total, budget)
        vals = self.slot_values(coloring_block(0, total, st.w, st.p))
        return [frozenset((*st.slot(v), int(row[v])) for v in range(st.w)) for row in vals]


def materialize_member(family: SpreadFamily, x: Sequence[int]) -> frozenset:
    """The set F(x) or G(x) as ``{(i, k, value)}`` with 0-based i, k."""
    st = family.strategy
    if st is None:
        raise InvalidInput("only implicit families have members indexed by colorings")
    x = np.asarray(x, dtype=np.int64).reshape(1, -1)
    if x.shape[1] != st.w:
        raise InvalidInput(f"coloring has {x.shape[1]} entries, expected {st.w}")
    if (x < 0).any() or (x >= st.p).any():
        raise InvalidInput("coloring entries must lie in [0, p)")
    row = family.slot_values(x)[0]
    return frozenset((*st.slot(v), int(row[v])) for v in range(st.w))


def to_materialized(family: SpreadFamily, budget: int = DEFAULT_ENUM_BUDGET) -> SpreadFamily:
    if family.kind == "materialized":
        return family
    return SpreadFamily.materialized(family.members(budget))


# ---------------------------------------------------------------------------
# spread
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpreadValue:
    """R* = ratio ** (1 / size) where ratio = |family| / #{members containing Z}."""

    ratio: Fraction
    size: int
    witness: tuple

    @property
    def value(self) -> float:
        return float(self.ratio) ** (1.0 / self.size)

    def at_least(self, base: int, root: int) -> bool:
        """Exact test of ``R* >= base ** (1 / root)``."""
        return self.ratio**root >= Fraction(base) ** self.size

    def to_json(self) -> dict:
        return {"value": self.value, "ratio": str(self.ratio), "size": self.size, "witness": [list(e) for e in self.witness]}


def _less(a: tuple[Fraction, int], b: tuple[Fraction, int]) -> bool:
    # ra ** (1/sa) < rb ** (1/sb)  <=>  ra ** sb < rb ** sa  (all ratios >= 1)
    return a[0] ** b[1] < b[0] ** a[1]


def spread_value(family: SpreadFamily, budget: int = 5 * 10**6) -> SpreadValue:
    """Largest R for which the family is R-spread, by counting every nonempty Z inside a member."""
    members = family.members() if family.kind != "materialized" else list(family.sets)
    if not members:
        raise InvalidInput("empty family")
    work = sum(2 ** len(s) for s in members)
    if work > budget:
        raise BudgetExceeded("spread subset enumeration", work, budget)
    counts: Counter = Counter()
    for s in members:
        elems = sorted(s)
        for r in range(1, len(elems) + 1):
            counts.update(itertools.combinations(elems, r))
    N = len(members)
    best = None
    for z, c in counts.items():
        cand = (Fraction(N, c), len(z))
        if best is None or _less(cand, best[0]) or (not _less(best[0], cand) and z < best[1]):
            best = (cand, z)
    (ratio, size), z = best
    return SpreadValue(ratio, size, z)


def slot_spread_value(family: SpreadFamily, budget: int = DEFAULT_ENUM_BUDGET) -> SpreadValue:
    """Same quantity for an implicit F/G family, by projecting member vectors onto slot sets.

    Every member has one element per slot, so ``Z`` is a partial slot
    assignment; the most frequent projection onto each slot set gives the
    largest containment probability for that ``|Z|``.
    """
    st = family.strategy
    if st is None:
        raise InvalidInput("slot_spread_value needs an implicit family")
    total = st.p**st.w
    if total > budget:
        raise BudgetExceeded("family members", total, budget)
    vals = family.slot_values(coloring_block(0, total, st.w, st.p))
    best = None
    for r in range(1, st.w + 1):
        for slots in itertools.combinations(range(st.w), r):
            proj, counts = np.unique(vals[:, list(slots)], axis=0, return_counts=True)
            top = int(np.argmax(counts))
            cand = (Fraction(total, int(counts[top])), r)
            z = tuple((*st.slot(v), int(proj[top][j])) for j, v in enumerate(slots))
            if best is None or _less(cand, best[0]):
                best = (cand, z)
    (ratio, size), z = best
    return SpreadValue(ratio, size, z)


# ---------------------------------------------------------------------------
# search inside an allowed set
# ---------------------------------------------------------------------------


def _search_order(st: LinearStrategy) -> list[int]:
    return sorted(range(st.w), key=lambda v: (v % st.m, v // st.m))


def find_member_within(family: SpreadFamily, allowed: np.ndarray) -> tuple[int, ...] | None:
    """First coloring x (slots ordered by (k, i), values ascending) whose member lies in ``allowed``.

    ``allowed`` is a boolean array of shape ``(n, m, p)``.  The search is
    complete: ``None`` means no member fits.
    """
    st = family.strategy
    if st is None:
        raise InvalidInput("find_member_within needs an implicit family")
    allowed = np.asarray(allowed, dtype=bool)
    if allowed.shape != (st.n, st.m, st.p):
        raise InvalidInput(f"allowed set must have shape {(st.n, st.m, st.p)}")
    ok = [set(np.flatnonzero(allowed[i, k]).tolist()) for i in range(st.n) for k in range(st.m)]
    if any(not s for s in ok):
        return None
    order = _search_order(st)
    pos = {v: t for t, v in enumerate(order)}
    # each slot constraint is checked once every variable it reads is fixed
    checks: list[list[int]] = [[] for _ in order]
    for v in range(st.w):
        last = max([pos[v]] + [pos[u] for u, _ in st._deps[v]])
        checks[last].append(v)
    bias = st.b if family.uses_bias else np.zeros(st.w, dtype=np.int64)
    bias = [int(c) for c in bias]
    p = st.p
    x = [0] * st.w

    def holds(v: int) -> bool:
        val = x[v] - sum(c * x[u] for u, c in st._deps[v]) - bias[v]
        return val % p in ok[v]

    def rec(t: int) -> bool:
        if t == len(order):
            return True
        v = order[t]
        for val in range(p):
            x[v] = val
            if all(holds(c) for c in checks[t]) and rec(t + 1):
                return True
        x[v] = 0
        return False

    return tuple(x) if rec(0) else None


def members_within_brute(family: SpreadFamily, allowed: np.ndarray) -> list[tuple[int, ...]]:
    """All colorings whose member lies in ``allowed`` (oracle for the search)."""
    st = family.strategy
    X = coloring_block(0, st.p**st.w, st.w, st.p)
    vals = family.slot_values(X)
    n_idx = np.arange(st.w) // st.m
    k_idx = np.arange(st.w) % st.m
    fits = np.asarray(allowed, dtype=bool)[n_idx[None, :], k_idx[None, :], vals].all(axis=1)
    return [tuple(int(c) for c in row) for row in X[fits]]


# ---------------------------------------------------------------------------
# defeating colorings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DefeatReport:
    coloring: Coloring | None
    attempts: int
    x_f: tuple | None = None
    x_g: tuple | None = None

    @property
    def found(self) -> bool:
        return self.coloring is not None

    def to_json(self) -> dict:
        out = {"found": self.found, "attempts": self.attempts}
        if self.found:
            out.update(coloring=self.coloring.to_json(), x_f=list(self.x_f), x_g=list(self.x_g))
        return out


def defeat_linear(strategy: LinearStrategy, seed: int = 0, retries: int = 64) -> DefeatReport:
    """Two-color T at random until F fits in one class and G in the other; return the difference."""
    st = strategy
    rng = np.random.default_rng(seed)
    fam_f = SpreadFamily.implicit(st, "F")
    fam_g = SpreadFamily.implicit(st, "G")
    for attempt in range(1, retries + 1):
        side = rng.integers(0, 2, size=(st.n, st.m, st.p)).astype(bool)
        x_f = find_member_within(fam_f, ~side)
        if x_f is None:
            continue
        x_g = find_member_within(fam_g, side)
        if x_g is None:
            continue
        z = (np.array(x_f) - np.array(x_g)) % st.p
        if (st.guesses(z[None, :])[0] == z).any():
            raise AssertionError("disjoint members produced a coloring with a correct guess")
        return DefeatReport(Coloring(tuple(int(c) for c in z), st.p), attempt, x_f, x_g)
    return DefeatReport(None, retries)


def defeating_mask(strategy: LinearStrategy, budget: int = DEFAULT_ENUM_BUDGET) -> tuple[np.ndarray, np.ndarray]:
    st = strategy
    total = st.p**st.w
    if total > budget:
        raise BudgetExceeded("coloring enumeration", total, budget)
    X = coloring_block(0, total, st.w, st.p)
    return X, (st.guesses(X) != X).all(axis=1)


def brute_force_defeat(strategy: LinearStrategy, budget: int = DEFAULT_ENUM_BUDGET) -> Coloring | None:
    """Lexicographically first all-wrong coloring, or None if the strategy wins."""
    X, bad = defeating_mask(strategy, budget)
    idx = np.flatnonzero(bad)
    if idx.size == 0:
        return None
    return Coloring(tuple(int(c) for c in X[idx[0]]), strategy.p)


def all_defeating_colorings(strategy: LinearStrategy, budget: int = DEFAULT_ENUM_BUDGET) -> set[tuple[int, ...]]:
    X, bad = defeating_mask(strategy, budget)
    return {tuple(int(c) for c in row) for row in X[bad]}


# ---------------------------------------------------------------------------
# sampling experiment
# ---------------------------------------------------------------------------


def spread_lemma_trial(family: SpreadFamily, r: float, trials: int, seed: int = 0) -> dict:
    """Fraction of random V (each element kept with probability 1/r) that contain a member."""
    rng = np.random.default_rng(seed)
    if family.kind == "materialized":
        # elements outside every member cannot matter
        elems = sorted({e for s in family.sets for e in s})
        index = {e: j for j, e in enumerate(elems)}
        members = [[index[e] for e in s] for s in family.sets]
        hits = 0
        for _ in range(trials):
            keep = rng.random(len(elems)) < 1.0 / r
            hits += any(all(keep[j] for j in s) for s in members)
        return {"r": r, "trials": trials, "frequency": hits / trials}
    st = family.strategy
    hits = 0
    for _ in range(trials):
        keep = rng.random((st.n, st.m, st.p)) < 1.0 / r
        hits += find_member_within(family, keep) is not None
    return {"r": r, "trials": trials, "frequency": hits / trials}


def lemma_threshold(r: float, w: int) -> float:
    """``r * log(w * r)``: the spread needed, up to the unknown absolute constant."""
    return r * math.log(w * r)
