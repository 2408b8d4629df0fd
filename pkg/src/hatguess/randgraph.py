"""G(n, 1/2) experiments: find a d-clique with many common neighbors, certify a book.

Adjacency rows are Python ints used as bitsets (bit v of row u is the edge
uv), so common neighborhoods are ANDs and sizes are ``int.bit_count``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .book import Certificate, certified_q, construct_book_strategy
from .core import Graph, verify
from .errors import Contradiction, InvalidInput, NotFound

MAX_N = 10**5
ROW_BLOCK = 1024


@dataclass
class GnpSample:
    n: int
    seed: int | None
    rows: list[int]

    def degree(self, u: int) -> int:
        return self.rows[u].bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.rows[u] >> v & 1)

    def edge_count(self) -> int:
        return sum(r.bit_count() for r in self.rows) // 2

    @classmethod
    def from_graph(cls, graph: Graph) -> "GnpSample":
        rows = [0] * graph.n
        for u, v in graph.edges:
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(graph.n, None, rows)


def sample_gnp(n: int, seed: int) -> GnpSample:
    """Edges drawn in pair order (0,1), (0,2), ..., (1,2), ... from one seeded stream."""
    if n < 0 or n > MAX_N:
        raise InvalidInput(f"n must lie in [0, {MAX_N}]")
    rng = np.random.default_rng(seed)
    nbytes = (n + 7) // 8
    packed = np.zeros((n, nbytes), dtype=np.uint8)
    cols = np.arange(n)
    for r0 in range(0, n, ROW_BLOCK):
        r1 = min(n, r0 + ROW_BLOCK)
        upper = cols[None, :] > np.arange(r0, r1)[:, None]
        block = np.zeros((r1 - r0, n), dtype=bool)
        block[upper] = rng.random(int(upper.sum())) < 0.5
        packed[r0:r1] |= np.packbits(block, axis=1, bitorder="little")
        lower = np.packbits(block.T, axis=1, bitorder="little")  # (n, ceil((r1-r0)/8))
        start = r0 // 8
        packed[:, start : start + lower.shape[1]] |= lower
    rows = [int.from_bytes(packed[u].tobytes(), "little") for u in range(n)]
    return GnpSample(n, seed, rows)


def target_d(n: int) -> int:
    """Largest d with d**d * d**3 <= 0.5 n / 2**d, i.e. d**(d+3) * 2**(d+1) <= n (0 if none)."""
    if n < 2:
        raise InvalidInput("n must be at least 2")
    d = 0
    while (d + 1) ** (d + 4) * 2 ** (d + 2) <= n:
        d += 1
    return d


def asymptotic_table(exponents=range(10, 61, 5)) -> list[dict]:
    """target_d(n) * log log n / log n for n = 2**e; a trend, expected to drift toward 1."""
    out = []
    for e in exponents:
        n = 2**e
        d = target_d(n)
        ln = e * math.log(2)
        out.append({"log2_n": e, "d": d, "ratio": d * math.log(ln) / ln})
    return out


@dataclass
class BookEmbedding:
    clique: tuple[int, ...]
    commons: tuple[int, ...]
    explored: int
    exhausted: bool

    def check(self, sample: GnpSample) -> bool:
        cl = self.clique
        pairwise = all(sample.has_edge(a, b) for i, a in enumerate(cl) for b in cl[i + 1 :])
        common = all(sample.has_edge(c, v) for v in self.commons for c in cl)
        outside = not set(cl) & set(self.commons)
        mask = (1 << sample.n) - 1
        for c in cl:
            mask &= sample.rows[c]
        complete = mask.bit_count() == len(self.commons)
        return pairwise and common and outside and complete


def _bits(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def find_book(sample: GnpSample, d: int, k_max: int = 10**4) -> BookEmbedding:
    """Search d-cliques for one with a large common neighborhood.

    Depth-first over vertices in decreasing degree, extending only by
    later candidates adjacent to the whole partial clique, most promising
    extension first, pruning branches whose common neighborhood cannot beat
    the best so far.  Every d-clique looked at counts toward ``k_max``;
    ``exhausted`` records whether the search finished before the cap.
    Raises :class:`NotFound` when no d-clique was seen.
    """
    n = sample.n
    if d < 1:
        raise InvalidInput("d must be positive")
    rows = sample.rows
    order = sorted(range(n), key=lambda u: (-rows[u].bit_count(), u))
    rank = {u: r for r, u in enumerate(order)}
    later = [0] * n  # vertices after u in the order
    acc = 0
    for u in reversed(order):
        later[u] = acc
        acc |= 1 << u
    best: list = [None, -1]
    found = 0

    def rec(clique: list[int], common: int, cand: int) -> bool:
        nonlocal found
        if len(clique) == d - 1:
            for v in _bits(cand):
                found += 1
                size = (common & rows[v]).bit_count()
                if size > best[1]:
                    best[0], best[1] = tuple(sorted(clique + [v])), size
                if found >= k_max:
                    return True
            return False
        choices = []
        for v in _bits(cand):
            nxt = common & rows[v]
            choices.append((-nxt.bit_count(), rank[v], v, nxt))
        choices.sort()
        for neg, _, v, nxt in choices:
            if -neg <= best[1]:
                break
            if rec(clique + [v], nxt, cand & rows[v] & later[v]):
                return True
        return False

    stopped = False
    if d == 1:
        for u in order[:k_max]:
            found += 1
            if rows[u].bit_count() > best[1]:
                best[0], best[1] = (u,), rows[u].bit_count()
        stopped = n > k_max
    else:
        for u in order:
            if best[0] is not None and rows[u].bit_count() <= best[1]:
                break
            if rec([u], rows[u], later[u] & rows[u]):
                stopped = True
                break
    if best[0] is None:
        raise NotFound(f"{d}-clique", capped=stopped)
    mask = (1 << n) - 1
    for c in best[0]:
        mask &= rows[c]
    emb = BookEmbedding(best[0], tuple(_bits(mask)), found, not stopped)
    if not emb.check(sample):
        raise Contradiction("clique search returned an embedding that fails the adjacency check")
    return emb


@dataclass
class LowerBound:
    d: int
    m: int
    q: int
    certificate: Certificate | None
    embedding: BookEmbedding | None
    spot_check: dict

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "m_found": self.m,
            "q_certified": self.q,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "clique": None if self.embedding is None else list(self.embedding.clique),
            "spot_check": self.spot_check,
        }


def _spot_check(cert: Certificate, budget: int, samples: int = 2000, seed: int = 0) -> dict:
    """End-to-end check of the certified strategy on the book it was built for.

    Exhaustive over all q**(d+m') colorings of the shortest member prefix
    that is itself an exactly verified onto family and fits ``budget``;
    otherwise ``samples`` random colorings of the full B_{d,m}.
    """
    from .book import OntoFamily, verify_onto_family

    fam = cert.family
    if fam is None:
        return {"done": False, "reason": "trivial certificate"}
    p = fam.params
    for m2 in range(1, p.m + 1):
        if p.q ** (p.d + m2) > budget:
            break
        sub = OntoFamily(type(p)(p.d, p.q, m2, p.s), fam.tables[:m2])
        rep = verify_onto_family(sub)
        if not (rep["ok"] and rep["exact"]):
            continue
        sub.verified = "exact"
        graph, profile = construct_book_strategy(sub)
        out = verify(graph, profile, budget=budget)
        return {"done": True, "mode": "exhaustive", "m_trimmed": m2, "status": out.status, "colorings": out.checked}
    graph, profile = construct_book_strategy(fam)
    out = verify(graph, profile, mode="sampled", samples=samples, seed=seed)
    return {"done": True, "mode": "sampled", "m_trimmed": p.m, "status": out.status, "colorings": out.checked}


def certified_lower_bound(
    sample: GnpSample,
    seed: int = 0,
    k_max: int = 10**4,
    spot_budget: int = 10**6,
) -> LowerBound:
    """Best certified q over books B_{d', m} found in the sample, d' <= max(target_d(n), 2).

    Every d-clique contains smaller cliques with at least as many common
    neighbors, so each d' is tried and the largest certified q kept (ties go
    to the larger d').
    """
    if sample.n < 2:
        return LowerBound(0, 0, 1, None, None, {"done": False, "reason": "too few vertices"})
    top = max(target_d(sample.n), 2)
    best = LowerBound(0, 0, 1, None, None, {"done": False, "reason": "no book found"})
    for d in range(1, top + 1):
        try:
            emb = find_book(sample, d, k_max)
        except NotFound:
            break
        cert = certified_q(d, len(emb.commons), seed=seed)
        if cert.q >= best.q:
            best = LowerBound(d, len(emb.commons), cert.q, cert, emb, {})
    if best.certificate is not None:
        best.spot_check = _spot_check(best.certificate, spot_budget, seed=seed)
    return best


def _experiment_row(args) -> dict:
    n, seed, k_max = args
    t0 = time.perf_counter()
    sample = sample_gnp(n, seed)
    d = target_d(n)
    try:
        emb = find_book(sample, d, k_max) if d >= 1 else None
    except NotFound:
        emb = None
    lb = certified_lower_bound(sample, seed=seed, k_max=k_max)
    return {
        "n": n,
        "seed": seed,
        "d": d,
        "m_found": len(emb.commons) if emb else 0,
        "expected_commons": (n - d) / 2**d if d else float(n),
        "book_d": lb.d,
        "book_m": lb.m,
        "q_certified": lb.q,
        "s": lb.certificate.s if lb.certificate else None,
        "m_used": lb.certificate.m if lb.certificate else 0,
        "spot_check": lb.spot_check.get("status", "skipped"),
        "wall_ms": round(1000 * (time.perf_counter() - t0), 1),
    }


def run_experiment(sizes, seeds: int, base_seed: int = 0, k_max: int = 10**4, workers: int = 1) -> dict:
    """Rows ordered by (n, seed index); seeds are ``base_seed + j``."""
    jobs = [(n, base_seed + j, k_max) for n in sizes for j in range(seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_experiment_row, jobs))
    else:
        rows = [_experiment_row(j) for j in jobs]
    summary = []
    for n in sizes:
        qs = sorted(r["q_certified"] for r in rows if r["n"] == n)
        found = [r["m_found"] for r in rows if r["n"] == n]
        summary.append({
            "n": n,
            "median_q": qs[len(qs) // 2] if qs else None,
            "mean_m_found": sum(found) / len(found) if found else 0,
        })
    return {"rows": rows, "summary": summary, "asymptotics": asymptotic_table()}
