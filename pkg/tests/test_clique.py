import copy
import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from hatguess.clique import (
    Infeasible,
    KnownSet,
    capacity,
    decide_by_enumeration,
    handle_known_set,
    is_handleable,
    reduced_space_size,
    sum_strategy,
)
from hatguess.errors import BudgetExceeded, InvalidInput
from hatguess.search import check_refutation, cover_search

import oracles

C6 = [(a, b) for a in (0, 1) for b in (0, 1, 2)]


def test_capacity_values():
    assert capacity(1) == 1
    assert capacity(2) == 5
    assert capacity(3) == 32
    assert capacity(4) == 1 + 4 + 27 + 256
    with pytest.raises(InvalidInput):
        capacity(0)


@pytest.mark.parametrize("d", range(1, 7))
def test_capacity_is_sum_of_self_powers(d):
    assert capacity(d) == sum(i**i for i in range(1, d + 1))
    assert capacity(d + 1) - capacity(d) == (d + 1) ** (d + 1)


def test_known_set_validation():
    with pytest.raises(InvalidInput):
        KnownSet.of(2, 3, [(0, 3)])
    with pytest.raises(InvalidInput):
        KnownSet.of(2, 3, [(0, 1, 2)])
    with pytest.raises(InvalidInput):
        KnownSet.from_json({"d": 2, "q": 3, "set": [[0, 1], [0, 1]]})
    ks = KnownSet.of(2, 3, [(1, 2), (0, 0)])
    assert KnownSet.from_json(ks.to_json()) == ks


def test_empty_set_is_handled():
    res = handle_known_set(KnownSet.of(3, 4, []))
    assert res and res.covers([])
    assert is_handleable(KnownSet.of(3, 4, []))


def test_c6_at_13_is_infeasible_with_checked_refutation():
    ks = KnownSet.of(2, 13, C6)
    res = handle_known_set(ks)
    assert isinstance(res, Infeasible) and not res
    assert res.check()
    assert decide_by_enumeration(ks) == (False, 432)
    assert reduced_space_size(ks) == 432


def test_refutation_tampering_is_detected():
    ks = KnownSet.of(2, 13, C6)
    res = handle_known_set(ks)
    tree = copy.deepcopy(res.refutation)
    tree["branches"] = tree["branches"][:-1]
    assert not check_refutation([[((j, s[:j] + s[j + 1:]), s[j]) for j in range(2)] for s in ks.ordered()], tree)


def test_singletons_handled():
    for s in itertools.product(range(13), repeat=2):
        assert handle_known_set(KnownSet.of(2, 13, [s]))


def test_first_five_of_c6_at_12():
    ks = KnownSet.of(2, 12, C6[:5])
    assert is_handleable(ks)
    res = handle_known_set(ks)
    assert res.covers(ks.ordered())


def test_strategy_default_guess_is_zero():
    res = handle_known_set(KnownSet.of(2, 5, [(3, 4)]))
    assert res.guess(0, (2,)) == 0 and res.guess(1, (1,)) == 0


def test_sum_strategy_covers_everything_when_q_at_most_d():
    for d, q in [(2, 2), (3, 2), (3, 3), (4, 3)]:
        assert sum_strategy(d, q).covers(itertools.product(range(q), repeat=d))
    assert not sum_strategy(2, 3).covers(itertools.product(range(3), repeat=2))


def test_enumeration_budget():
    ks = KnownSet.of(2, 13, [(a, b) for a in range(4) for b in range(4)])
    with pytest.raises(BudgetExceeded):
        decide_by_enumeration(ks, budget=1000)


def test_random_five_sets_q12_q13():
    rng = random.Random(7)
    for q in (12, 13):
        universe = list(itertools.product(range(q), repeat=2))
        for _ in range(300):
            S = rng.sample(universe, 5)
            res = handle_known_set(KnownSet.of(2, q, S), certificate=False)
            assert res and res.covers(S)


def test_all_six_sets_in_small_grid_agree_with_enumeration():
    # search and enumeration are independent deciders; they must agree
    for S in itertools.combinations(list(itertools.product(range(3), repeat=2)), 4):
        ks = KnownSet.of(2, 3, S)
        assert bool(handle_known_set(ks, certificate=False)) == is_handleable(ks)


colorings = st.tuples(st.integers(0, 2), st.integers(0, 2))


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([2, 3]), st.lists(colorings, min_size=1, max_size=4, unique=True))
def test_reduction_matches_unreduced_search(q, S):
    S = [tuple(min(c, q - 1) for c in s) for s in S]
    ks = KnownSet.of(2, q, S)
    expected = oracles.clique_handleable(2, q, list(ks.colorings))
    assert is_handleable(ks) == expected
    res = handle_known_set(ks)
    assert bool(res) == expected
    if res:
        assert res.covers(ks.ordered())
    else:
        assert res.check()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=2, max_size=7, unique=True))
def test_handleability_is_monotone_under_subsets(S):
    ks = KnownSet.of(2, 4, S)
    if handle_known_set(ks, certificate=False):
        for T in itertools.combinations(S, len(S) - 1):
            assert handle_known_set(KnownSet.of(2, 4, T), certificate=False)


def test_three_clique_capacity_sets():
    rng = random.Random(1)
    universe = list(itertools.product(range(5), repeat=3))
    for _ in range(3):
        S = rng.sample(universe, capacity(3))
        res = handle_known_set(KnownSet.of(3, 5, S), certificate=False)
        assert res and res.covers(S)


def test_cover_search_basic():
    # two demands that share a key with conflicting values, plus an escape option
    demands = [[("a", 0)], [("a", 1), ("b", 1)]]
    res = cover_search(demands)
    assert res.assignment == {"a": 0, "b": 1}
    res = cover_search([[("a", 0)], [("a", 1)]], certificate=True)
    assert not res.feasible
    assert check_refutation([[("a", 0)], [("a", 1)]], res.refutation)
