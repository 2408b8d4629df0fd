import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hatguess.core import (
    AffineGuesser,
    Coloring,
    Graph,
    SeededRandomGuesser,
    StrategyProfile,
    TableGuesser,
    all_wrong,
    book_graph,
    coloring_block,
    complete_graph,
    empty_graph,
    evaluate,
    find_winning_profile,
    hat_guessing_number,
    index_to_coloring,
    multipartite_graph,
    multipartite_index,
    planar_graph,
    random_profile,
    solve_hg,
    verify,
)
from hatguess.errors import BudgetExceeded, InvalidInput

import oracles


def k2_profile(q):
    # u guesses h(v); v guesses h(u) + 1
    return StrategyProfile(q, (AffineGuesser(q, [1], 0), AffineGuesser(q, [1], 1)))


def sum_profile(n, q):
    return StrategyProfile(q, tuple(AffineGuesser(q, [q - 1] * (n - 1), i) for i in range(n)))


# -- graphs -----------------------------------------------------------------


def test_graph_rejects_loops_duplicates_and_range():
    with pytest.raises(InvalidInput):
        Graph.from_edges(2, [(0, 0)])
    with pytest.raises(InvalidInput):
        Graph.from_edges(2, [(0, 1), (1, 0)])
    with pytest.raises(InvalidInput):
        Graph.from_edges(2, [(0, 2)])


def test_shape_tag_must_match_edges():
    g = planar_graph(2)
    obj = g.to_json()
    obj["edges"] = obj["edges"][:-1]
    with pytest.raises(InvalidInput):
        Graph.from_json(obj)
    assert Graph.from_json(g.to_json()) == g


def test_construction_graphs_have_expected_edges():
    g = planar_graph(3)
    assert g.n == 8
    # each outer pair: edge xy plus four edges to the central pair; plus uv
    assert len(g.edges) == 1 + 5 * 3
    b = book_graph(3, 4)
    assert len(b.edges) == 3 + 12
    mp = multipartite_graph(2, 3)
    assert len(mp.edges) == 12
    assert not mp.has_edge(multipartite_index(0, 1, 3), multipartite_index(1, 1, 3))
    assert mp.has_edge(multipartite_index(0, 1, 3), multipartite_index(1, 2, 3))


def test_coloring_indexing_is_lexicographic():
    for n, q in [(3, 2), (2, 5), (4, 3)]:
        ref = list(itertools.product(range(q), repeat=n))
        assert [index_to_coloring(i, n, q) for i in range(q**n)] == ref
        assert [tuple(r) for r in coloring_block(0, q**n, n, q).tolist()] == ref
        assert [tuple(r) for r in coloring_block(3, 7, n, q).tolist()] == ref[3:7]


def test_coloring_range_checked():
    with pytest.raises(InvalidInput):
        Coloring((0, 3), 3)


# -- evaluation -------------------------------------------------------------


def test_evaluate_k2_example():
    g = complete_graph(2)
    assert evaluate(g, k2_profile(2), Coloring((0, 0), 2)) == {0}


def test_evaluate_k1_constant_guess():
    g = complete_graph(1)
    prof = StrategyProfile(3, (TableGuesser(3, 0, [0]),))
    assert evaluate(g, prof, Coloring((2,), 3)) == frozenset()


def test_table_keys_follow_ascending_neighbor_order():
    # path 0-1-2: vertex 1 reads (h(0), h(2)); the table entry at index 1 is key (0, 1)
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    table = [0] * 9
    table[1] = 2
    prof = StrategyProfile(3, (TableGuesser(3, 1, [0, 0, 0]), TableGuesser(3, 2, table), TableGuesser(3, 1, [0, 0, 0])))
    assert 1 in evaluate(g, prof, Coloring((0, 2, 1), 3))
    assert 1 not in evaluate(g, prof, Coloring((1, 2, 0), 3))


def test_profile_degree_mismatch_rejected():
    with pytest.raises(InvalidInput):
        evaluate(complete_graph(3), k2_profile(2), Coloring((0, 0, 0), 2))


def test_evaluate_matches_oracle_on_random_profiles():
    rng = np.random.default_rng(3)
    for trial in range(20):
        n = int(rng.integers(1, 5))
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.6]
        g = Graph.from_edges(n, edges)
        q = int(rng.integers(2, 4))
        prof = random_profile(g, q, seed=trial)
        def rule(v, seen):
            return prof.guessers[v].guess(seen)

        for c in itertools.product(range(q), repeat=n):
            assert set(evaluate(g, prof, Coloring(c, q))) == oracles.correct_set(n, edges, rule, c)


# -- guessers ---------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(
    p=st.sampled_from([2, 3, 5]),
    coeffs=st.lists(st.integers(0, 100), min_size=0, max_size=3),
    bias=st.integers(0, 100),
)
def test_affine_and_table_agree(p, coeffs, bias):
    aff = AffineGuesser(p, coeffs, bias)
    tab = aff.to_table()
    inputs = list(itertools.product(range(p), repeat=len(coeffs)))
    expect = [(sum(c * x for c, x in zip(coeffs, inp)) + bias) % p for inp in inputs]
    assert [aff.guess(x) for x in inputs] == expect
    assert [tab.guess(x) for x in inputs] == expect
    arr = np.array(inputs, dtype=np.int64).reshape(len(inputs), len(coeffs))
    assert aff.guess_batch(arr).tolist() == expect
    assert tab.guess_batch(arr).tolist() == expect


def test_affine_needs_prime():
    with pytest.raises(InvalidInput):
        AffineGuesser(4, [1], 0)


def test_seeded_random_guesser_is_deterministic_and_in_range():
    g = SeededRandomGuesser(13, 4, key=99)
    x = np.random.default_rng(0).integers(0, 13, size=(500, 4))
    a, b = g.guess_batch(x), g.guess_batch(x)
    assert (a == b).all() and a.min() >= 0 and a.max() < 13
    assert g.guess(list(x[0])) == a[0]
    # roughly uniform
    counts = np.bincount(g.guess_batch(np.random.default_rng(1).integers(0, 13, size=(13000, 4))), minlength=13)
    assert counts.min() > 800


def test_profile_json_round_trip():
    g = planar_graph(1)
    prof = random_profile(g, 13, seed=5, table_limit=100)
    again = StrategyProfile.from_json(prof.to_json(), g)
    x = np.random.default_rng(2).integers(0, 13, size=(200, g.n))
    for v in range(g.n):
        nb = list(g.neighbors(v))
        assert (prof.guessers[v].guess_batch(x[:, nb]) == again.guessers[v].guess_batch(x[:, nb])).all()


def test_profile_json_unknown_kind():
    with pytest.raises(InvalidInput):
        StrategyProfile.from_json({"q": 2, "vertices": [{"kind": "magic"}]})


# -- verify -----------------------------------------------------------------


def test_verify_k2_q2_winning():
    out = verify(complete_graph(2), k2_profile(2))
    assert out.winning and out.checked == 4


def test_verify_k2_q3_first_counterexample():
    out = verify(complete_graph(2), k2_profile(3))
    assert out.status == "counterexample"
    assert out.coloring.values == (0, 2)
    assert oracles.first_all_wrong(2, [(0, 1)], 3, lambda v, s: (s[0] + v) % 3) == (0, 2)


def test_verify_k3_total_sum_winning():
    assert verify(complete_graph(3), sum_profile(3, 3)).winning


def test_verify_budget():
    with pytest.raises(BudgetExceeded) as exc:
        verify(complete_graph(3), sum_profile(3, 3), budget=10)
    assert exc.value.required == 27


def test_verify_matches_oracle_first_counterexample():
    for seed in range(15):
        g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
        prof = random_profile(g, 3, seed=seed)
        got = verify(g, prof)
        want = oracles.first_all_wrong(4, sorted(g.edges), 3, lambda v, s: prof.guessers[v].guess(s))
        assert (got.coloring.values if got.coloring else None) == want


def test_verify_parallel_matches_serial():
    g = complete_graph(6)
    prof = random_profile(g, 5, seed=11)
    assert verify(g, prof, workers=3).coloring == verify(g, prof).coloring


def test_sampled_verify_refutes_and_never_certifies():
    g = complete_graph(2)
    bad = verify(g, k2_profile(3), mode="sampled", samples=1000, seed=1)
    assert bad.defeated
    assert not evaluate(g, k2_profile(3), bad.coloring)
    good = verify(g, k2_profile(2), mode="sampled", samples=1000, seed=1)
    assert good.status == "no_counterexample" and not good.winning


def test_all_wrong_mask_matches_evaluate():
    g = complete_graph(3)
    prof = random_profile(g, 3, seed=4)
    X = coloring_block(0, 27, 3, 3)
    mask = all_wrong(g, prof, X)
    for row, m in zip(X.tolist(), mask):
        assert m == (not evaluate(g, prof, Coloring(row, 3)))


# -- exact solver -----------------------------------------------------------


@pytest.mark.parametrize("n,q,expected", [(1, 1, True), (1, 2, False), (2, 2, True), (2, 3, False), (3, 3, True)])
def test_solve_complete_graphs(n, q, expected):
    assert solve_hg(complete_graph(n), q) is expected


def test_solve_witness_is_verified():
    g = complete_graph(3)
    prof = find_winning_profile(g, 3)
    assert verify(g, prof).winning


def test_solve_against_profile_enumeration():
    # every graph on <= 3 vertices with q = 2, and two-vertex graphs with q = 3
    cases = []
    for n in (1, 2, 3):
        pairs = list(itertools.combinations(range(n), 2))
        for r in range(len(pairs) + 1):
            for edges in itertools.combinations(pairs, r):
                cases.append((n, list(edges), 2))
    cases += [(2, [], 3), (2, [(0, 1)], 3)]
    for n, edges, q in cases:
        assert solve_hg(Graph.from_edges(n, edges), q) == oracles.winnable(n, edges, q), (n, edges, q)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.sampled_from(list(itertools.combinations(range(n), 2)) or [None]), unique=True))))
def test_solve_is_monotone_in_q(case):
    n, edges = case
    edges = [e for e in edges if e is not None]
    g = Graph.from_edges(n, edges)
    results = [solve_hg(g, q) for q in (1, 2, 3)]
    for a, b in zip(results, results[1:]):
        assert a or not b


def test_hat_guessing_number_small():
    assert hat_guessing_number(complete_graph(2), 4) == 2
    assert hat_guessing_number(complete_graph(3), 3) == 3
    assert hat_guessing_number(empty_graph(2), 3) == 1
