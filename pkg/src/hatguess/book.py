"""Book graphs B_{d,m}: a central d-clique plus m outer vertices seeing it.

Outer vertex ``i`` guesses ``f_i(central colors)``.  If every s-subset of
central colorings has some ``f_i`` that is onto on it, then for any outer
hats fewer than ``s`` central colorings leave all outer vertices wrong, and
the clique handles that known set.

Central colorings are indexed lexicographically: ``c -> sum c[j] q**(d-1-j)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .clique import KnownSet, capacity, handle_cached, handle_known_set, sum_strategy
from .core import Guesser, StrategyProfile, TableGuesser, book_graph, coloring_block, register_structured
from .errors import BudgetExceeded, ContractError, HatGuessError, InvalidInput

DEFAULT_ONTO_BUDGET = 10**9
DEFAULT_HANDLER_BUDGET = 60_000
DEFAULT_SAMPLES = 10**5


class OntoFamilyFailure(HatGuessError):
    def __init__(self, params: "BookParameters", subset: tuple | None, attempts: int):
        self.params = params
        self.subset = subset
        self.attempts = attempts
        super().__init__(f"no verified onto family for {params} after {attempts} attempts; last violation {subset}")


@dataclass(frozen=True)
class BookParameters:
    d: int
    q: int
    m: int
    s: int

    def __post_init__(self):
        # s > q**d is allowed (the lemma's d = 2 point); the onto condition is then vacuous
        if self.d < 1 or self.q < 1 or self.m < 0 or self.s < 1:
            raise InvalidInput(f"bad book parameters {self}")

    def to_json(self) -> dict:
        return {"d": self.d, "q": self.q, "m": self.m, "s": self.s}


def lemma_parameters(d: int) -> BookParameters:
    """q = d**(d-2), m = d**d * d**3, s = d**d."""
    if d < 2:
        raise InvalidInput("the lemma needs d >= 2")
    return BookParameters(d=d, q=d ** (d - 2), m=d**d * d**3, s=d**d)


def union_bound_report(d: int) -> dict:
    """Numeric evaluation of the random-construction estimates at the lemma's parameters.

    Note ``d**d / q == d**2`` identically, so the middle comparison is an
    equality; it is reported with ``<=``.
    """
    p = lemma_parameters(d)
    q, s = p.q, p.s
    miss = q * (1 - 1 / q) ** s
    exp_form = q * math.exp(-s / q)
    exp_d2 = q * math.exp(-(d**2))
    log2_subsets = math.log2(math.comb(q**d, s)) if s <= q**d else float("-inf")
    return {
        "d": d,
        "q": q,
        "miss_probability": miss,
        "exp_bound": exp_form,
        "exp_d2_bound": exp_d2,
        "miss_le_exp": miss <= exp_form,
        "exp_le_exp_d2": exp_form <= exp_d2 * (1 + 1e-12),
        "exp_d2_lt_half": exp_d2 < 0.5,
        "chain_holds": miss <= exp_form <= exp_d2 * (1 + 1e-12) and exp_d2 < 0.5,
        "log2_subsets": log2_subsets,
        "log2_subsets_bound": s * d**2 * math.log2(d),
        "subsets_below_bound": log2_subsets < s * d**2 * math.log2(d),
        "final_union_bound_lt_1": s * d**2 * math.log2(d) - s * d**3 < 0,
    }


@dataclass
class OntoFamily:
    params: BookParameters
    tables: np.ndarray  # (m, q**d)
    verified: str | None = None  # "exact", "sampled" or None
    verification: dict = field(default_factory=dict)

    def __post_init__(self):
        p = self.params
        self.tables = np.asarray(self.tables, dtype=np.int64).reshape(p.m, p.q**p.d)
        if self.tables.size and (self.tables.min() < 0 or self.tables.max() >= p.q):
            raise InvalidInput("onto family value outside color range")

    def to_json(self) -> dict:
        return {
            **self.params.to_json(),
            "verified": self.verified,
            "verification": self.verification,
            "functions": self.tables.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "OntoFamily":
        try:
            params = BookParameters(int(obj["d"]), int(obj["q"]), int(obj["m"]), int(obj["s"]))
            return cls(params, np.array(obj["functions"], dtype=np.int64).reshape(params.m, params.q**params.d),
                       obj.get("verified"), dict(obj.get("verification", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed onto family JSON: {exc}") from exc


def _onto_mask(tables: np.ndarray, subsets: np.ndarray, q: int, chunk: int = 1024) -> np.ndarray:
    full = np.uint64((1 << q) - 1)
    bits = np.uint64(1) << tables.astype(np.uint64)
    pending = np.arange(subsets.shape[0])
    done = np.zeros(subsets.shape[0], dtype=bool)
    for start in range(0, bits.shape[0], chunk):
        if pending.size == 0:
            break
        union = np.bitwise_or.reduce(bits[start : start + chunk][:, subsets[pending]], axis=2)
        hit = (union == full).any(axis=0)
        done[pending[hit]] = True
        pending = pending[~hit]
    return done


def _sample_subsets(rng, universe: int, s: int, count: int) -> np.ndarray:
    return np.argsort(rng.random((count, universe)), axis=1)[:, :s]


def verify_onto_family(
    family: OntoFamily,
    samples: int | None = None,
    seed: int = 0,
    budget: int = DEFAULT_ONTO_BUDGET,
) -> dict:
    """Exact check over all s-subsets when ``C(q**d, s) * m * s`` fits, else sampled.

    Returns a report with ``ok``, ``exact``, ``checked`` and, on failure, the
    first violating subset (as central-coloring indices).
    """
    p = family.params
    universe = p.q**p.d
    if p.q > 62:
        raise InvalidInput("onto verification supports q <= 62")
    if p.s > universe:
        return {"ok": True, "exact": True, "checked": 0, "vacuous": True}
    if p.s < p.q or p.m == 0:
        return {"ok": False, "exact": True, "checked": 1, "violation": list(range(p.s))}
    total = math.comb(universe, p.s)
    cost = total * max(p.m, 1) * p.s
    if samples is None and cost <= budget:
        checked = 0
        batch = max(1, min(4096, 2_000_000 // (p.s * min(p.m, 1024))))
        it = itertools.combinations(range(universe), p.s)
        while True:
            chunk = list(itertools.islice(it, batch))
            if not chunk:
                break
            subsets = np.array(chunk, dtype=np.int64)
            ok = _onto_mask(family.tables, subsets, p.q)
            if not ok.all():
                first = int(np.flatnonzero(~ok)[0])
                return {"ok": False, "exact": True, "checked": checked + first + 1,
                        "violation": subsets[first].tolist()}
            checked += len(chunk)
        return {"ok": True, "exact": True, "checked": checked}
    count = DEFAULT_SAMPLES if samples is None else samples
    rng = np.random.default_rng(seed)
    checked = 0
    while checked < count:
        size = min(2048, count - checked)
        subsets = np.sort(_sample_subsets(rng, universe, p.s, size), axis=1)
        ok = _onto_mask(family.tables, subsets, p.q)
        if not ok.all():
            first = int(np.flatnonzero(~ok)[0])
            return {"ok": False, "exact": False, "checked": checked + first + 1, "violation": subsets[first].tolist()}
        checked += size
    return {"ok": True, "exact": False, "checked": checked, "confidence_note": f"{checked} uniform s-subsets"}


def build_onto_family(
    params: BookParameters,
    seed: int = 0,
    retries: int = 64,
    samples: int | None = None,
    budget: int = DEFAULT_ONTO_BUDGET,
) -> OntoFamily:
    """Uniformly random functions, resampled until verification passes."""
    rng = np.random.default_rng(seed)
    p = params
    last = None
    for attempt in range(1, retries + 1):
        tables = rng.integers(0, p.q, size=(p.m, p.q**p.d))
        fam = OntoFamily(p, tables)
        report = verify_onto_family(fam, samples=samples, seed=int(rng.integers(0, 2**63)), budget=budget)
        if report["ok"]:
            fam.verified = "exact" if report["exact"] else "sampled"
            fam.verification = {**report, "attempts": attempt}
            return fam
        last = tuple(report.get("violation", ()))
    raise OntoFamilyFailure(params, last, retries)


# ---------------------------------------------------------------------------
# strategy on B_{d,m}
# ---------------------------------------------------------------------------


def central_colorings(d: int, q: int) -> np.ndarray:
    return coloring_block(0, q**d, d, q)


def book_survivors(family: OntoFamily, outer_colors) -> set[tuple[int, ...]]:
    """Central colorings under which every outer vertex guesses wrong."""
    p = family.params
    h = np.asarray(outer_colors, dtype=np.int64)
    if h.shape != (p.m,):
        raise InvalidInput(f"expected {p.m} outer colors")
    alive = (family.tables != h[:, None]).all(axis=0)
    cents = central_colorings(p.d, p.q)
    return {tuple(int(c) for c in cents[k]) for k in np.flatnonzero(alive)}


@register_structured("book-central")
class BookCentralGuesser(Guesser):
    """Clique member ``role``: reads the other clique colors then every outer color."""

    def __init__(self, q: int, d: int, tables: np.ndarray, role: int):
        self.q = q
        self.d = d
        self.tables = np.asarray(tables, dtype=np.int64).reshape(-1, q**d)
        self.role = role
        self.degree = d - 1 + self.tables.shape[0]
        self._cents = central_colorings(d, q)

    def survivor_mask(self, inputs: np.ndarray) -> np.ndarray:
        outer = inputs[:, self.d - 1 :]
        alive = np.ones((inputs.shape[0], self.q**self.d), dtype=bool)
        for i in range(self.tables.shape[0]):
            alive &= self.tables[i][None, :] != outer[:, i : i + 1]
        return alive

    def survivors(self, inputs) -> set[tuple[int, ...]]:
        row = np.asarray(inputs, dtype=np.int64).reshape(1, -1)
        return {tuple(int(c) for c in self._cents[k]) for k in np.flatnonzero(self.survivor_mask(row)[0])}

    def guess_batch(self, inputs: np.ndarray) -> np.ndarray:
        alive = self.survivor_mask(inputs)
        out = np.empty(inputs.shape[0], dtype=np.int64)
        keys, inverse = np.unique(np.packbits(alive, axis=1), axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        for k in range(keys.shape[0]):
            rows = np.flatnonzero(inverse == k)
            known = frozenset(tuple(int(c) for c in self._cents[i]) for i in np.flatnonzero(alive[rows[0]]))
            strat = handle_cached(self.d, self.q, known)
            if not strat:
                raise ContractError(f"central clique cannot handle survivor set {sorted(known)}")
            others = inputs[rows, : self.d - 1]
            out[rows] = [strat.guess(self.role, tuple(int(c) for c in o)) for o in others]
        return out

    def to_json(self) -> dict:
        return {"kind": "structured", "name": "book-central", "d": self.d, "role": self.role,
                "functions": self.tables.tolist()}

    @classmethod
    def from_json_payload(cls, q: int, obj: dict) -> "BookCentralGuesser":
        d = int(obj["d"])
        return cls(q, d, np.array(obj["functions"], dtype=np.int64).reshape(-1, q**d), int(obj["role"]))


def construct_book_strategy(family: OntoFamily):
    """Profile on B_{d,m}: outer vertices play their functions, the clique handles survivors.

    Returns ``(graph, profile)``.
    """
    p = family.params
    if family.verified is None:
        raise ContractError("onto family has not been verified")
    if p.s - 1 > capacity(p.d):
        raise ContractError(f"survivor bound s-1={p.s - 1} exceeds clique capacity {capacity(p.d)}")
    graph = book_graph(p.d, p.m)
    guessers: list[Guesser] = [BookCentralGuesser(p.q, p.d, family.tables, j) for j in range(p.d)]
    guessers += [TableGuesser(p.q, p.d, family.tables[i]) for i in range(p.m)]
    profile = StrategyProfile(p.q, tuple(guessers))
    profile.check_graph(graph)
    return graph, profile


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def clique_handles_all(d: int, q: int, size: int, budget: int = DEFAULT_HANDLER_BUDGET) -> tuple[bool, int, str]:
    """Can the d-clique handle every known set of ``size`` central colorings?

    Sets of smaller size are subsets of these, and handling is inherited by
    subsets.  When ``q <= d`` the total-sum strategy covers all of
    ``[0,q)**d`` at once.  Returns ``(ok, sets_checked, method)``.
    """
    universe = q**d
    if q <= d:
        strat = sum_strategy(d, q)
        ok = strat.covers(itertools.product(range(q), repeat=d))
        return ok, 1, "total-sum"
    size = min(size, universe)
    count = math.comb(universe, size)
    if count > budget:
        raise BudgetExceeded(f"known sets of size {size} on K_{d} with q={q}", count, budget)
    cents = [tuple(int(c) for c in row) for row in central_colorings(d, q)]
    for combo in itertools.combinations(cents, size):
        if not handle_known_set(KnownSet(d, q, frozenset(combo)), certificate=False):
            return False, count, "search"
    return True, count, "search"


def onto_probability(s: int, q: int) -> float:
    """Chance that a uniform function on s points hits all q values."""
    surj = sum((-1) ** k * math.comb(q, k) * (q - k) ** s for k in range(q + 1))
    return surj / q**s


def members_needed(universe: int, s: int, q: int, margin: float = 2.0) -> int:
    """Union-bound estimate of how many random functions make every s-subset see an onto member."""
    p = onto_probability(s, q)
    if p <= 0:
        return 0
    return max(1, math.ceil(margin * (math.log(math.comb(universe, s)) + 1) / p))


@dataclass
class Certificate:
    d: int
    q: int
    s: int
    m: int
    family: OntoFamily | None
    handler: dict

    def to_json(self) -> dict:
        return {"d": self.d, "q": self.q, "s": self.s, "m": self.m, "handler": self.handler,
                "family_verification": None if self.family is None else self.family.verification}


def certified_q(
    d: int,
    m_available: int,
    seed: int = 0,
    onto_budget: int = DEFAULT_ONTO_BUDGET,
    handler_budget: int = DEFAULT_HANDLER_BUDGET,
    retries: int = 16,
    max_universe: int = 4096,
) -> Certificate:
    """Largest q for which B_{d, m_available} provably wins with q colors.

    For each q (largest first) the survivor threshold is
    ``s = min(capacity(d) + 1, q**d)``; q is certified when a family of
    ``m_available`` functions passes exact onto verification at s and the
    clique handles every set of ``s - 1`` central colorings.  Only as many
    members as a union-bound estimate calls for are used (B_{d,m'} embeds in
    B_{d,m} for m' <= m).  Anything that does not fit its budget is
    skipped.  Falls back to q = 1.
    """
    if d < 1 or m_available < 0:
        raise InvalidInput("need d >= 1 and m >= 0")
    cap = capacity(d)
    for q in range(cap + 1, 1, -1):
        universe = q**d
        if universe > max_universe:
            continue
        s = min(cap + 1, universe)
        if m_available == 0 or s < q:
            continue
        m_used = min(m_available, members_needed(universe, s, q))
        if math.comb(universe, s) * m_used * s > onto_budget:
            continue
        try:
            handled = clique_handles_all(d, q, s - 1, handler_budget)
        except BudgetExceeded:
            continue
        if not handled[0]:
            continue
        params = BookParameters(d, q, m_used, s)
        try:
            fam = build_onto_family(params, seed=seed, retries=retries, budget=onto_budget)
        except (OntoFamilyFailure, BudgetExceeded):
            continue
        if fam.verified != "exact":
            continue
        return Certificate(d, q, s, m_used, fam,
                           {"ok": True, "sets_checked": handled[1], "method": handled[2], "set_size": s - 1})
    return Certificate(d, 1, 1, m_available, None, {"ok": True, "method": "trivial"})
