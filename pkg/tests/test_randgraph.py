import itertools
import json
import math

import pytest

from hatguess.core import complete_graph, empty_graph
from hatguess.errors import InvalidInput, NotFound
from hatguess.randgraph import (
    GnpSample,
    asymptotic_table,
    certified_lower_bound,
    find_book,
    run_experiment,
    sample_gnp,
    target_d,
)


def brute_target(n):
    best = 0
    for d in range(1, 64):
        if d**d * d**3 * 2 * 2**d <= n:  # d^d d^3 <= 0.5 n / 2^d, cleared of fractions
            best = d
    return best


def test_sample_is_symmetric_and_loopless():
    s = sample_gnp(150, 3)
    for u in range(150):
        assert not s.has_edge(u, u)
        for v in range(u + 1, 150):
            assert s.has_edge(u, v) == s.has_edge(v, u)


def test_sample_deterministic():
    assert sample_gnp(300, 7).rows == sample_gnp(300, 7).rows
    assert sample_gnp(300, 7).rows != sample_gnp(300, 8).rows


def test_sample_blocks_do_not_change_graph():
    # rows past the first block must be filled symmetrically too
    s = sample_gnp(1100, 1)
    u, v = 5, 1090
    assert s.has_edge(u, v) == s.has_edge(v, u)
    assert all(s.rows[w] >> w & 1 == 0 for w in range(1100))


def test_two_vertex_edge_frequency():
    hits = sum(sample_gnp(2, seed).has_edge(0, 1) for seed in range(10**4))
    assert abs(hits / 10**4 - 0.5) <= 0.02


def test_edge_count_concentration():
    n = 1000
    mean = math.comb(n, 2) / 2
    sd = math.sqrt(math.comb(n, 2) / 4)
    assert abs(sample_gnp(n, 2).edge_count() - mean) <= 4 * sd


def test_sample_budget():
    with pytest.raises(InvalidInput):
        sample_gnp(10**5 + 1, 0)


@pytest.mark.parametrize("n", [2, 3, 64, 100, 1000, 4096, 2**20, 10**9, 2**60])
def test_target_d_matches_direct_evaluation(n):
    assert target_d(n) == brute_target(n)


def test_target_d_examples():
    assert target_d(64) == 1
    assert target_d(2**20) == 4


def test_asymptotic_table_reports_trend():
    rows = asymptotic_table(range(10, 61, 10))
    assert [r["log2_n"] for r in rows] == [10, 20, 30, 40, 50, 60]
    assert all(r["ratio"] > 0 for r in rows[1:])


def test_find_book_complete_graph():
    emb = find_book(GnpSample.from_graph(complete_graph(8)), 3)
    assert len(emb.clique) == 3 and len(emb.commons) == 5
    assert set(emb.clique) | set(emb.commons) == set(range(8))


def test_find_book_empty_graph():
    with pytest.raises(NotFound) as exc:
        find_book(GnpSample.from_graph(empty_graph(6)), 2)
    assert not exc.value.capped


def test_find_book_optimal_when_exhausted():
    s = sample_gnp(120, 5)
    for d in (1, 2, 3):
        emb = find_book(s, d, k_max=10**7)
        assert emb.exhausted and emb.check(s)
        best = 0
        for cl in itertools.combinations(range(120), d):
            if all(s.has_edge(a, b) for a, b in itertools.combinations(cl, 2)):
                mask = (1 << 120) - 1
                for c in cl:
                    mask &= s.rows[c]
                best = max(best, mask.bit_count())
        assert len(emb.commons) == best


def test_find_book_cap_is_reported():
    s = sample_gnp(400, 1)
    emb = find_book(s, 2, k_max=50)
    assert not emb.exhausted and emb.explored == 50 and emb.check(s)


def test_find_book_commons_at_4096():
    n = 4096
    d = target_d(n)
    emb = find_book(sample_gnp(n, 0), d)
    assert len(emb.commons) >= 0.4 * n / 2**d


def test_lower_bound_complete_graph():
    lb = certified_lower_bound(GnpSample.from_graph(complete_graph(5)))
    assert lb.q >= 2 and lb.d == 2 and lb.m == 3
    assert lb.spot_check["done"] and lb.spot_check["mode"] == "exhaustive"
    assert lb.spot_check["status"] == "winning"


def test_lower_bound_empty_graph():
    assert certified_lower_bound(GnpSample.from_graph(empty_graph(5))).q == 1


def test_experiment_reproducible():
    a = run_experiment([128, 256], 2, base_seed=3)
    b = run_experiment([128, 256], 2, base_seed=3)
    for rep in (a, b):
        for row in rep["rows"]:
            row.pop("wall_ms")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    assert [(r["n"], r["seed"]) for r in a["rows"]] == [(128, 3), (128, 4), (256, 3), (256, 4)]
