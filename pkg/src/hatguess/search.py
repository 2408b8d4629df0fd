"""Backtracking cover search shared by the exact solver and the clique handler.

A *demand* is a list of options ``(key, value)``; it is satisfied when some
option's key is assigned that value.  Keys are guess-table cells such as
``(vertex, observed_colors)``; each can hold one value.  The search picks
the open demand with the fewest live options, branches over them in sorted
order and forbids each option after its branch fails, so sibling subtrees
never overlap.

When a search fails it can return the exhausted tree as a refutation that
``check_refutation`` replays independently.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Any, Hashable, Sequence

from .errors import BudgetExceeded

Option = tuple[Hashable, Any]


@dataclass
class CoverResult:
    assignment: dict | None
    nodes: int
    refutation: dict | None = None

    @property
    def feasible(self) -> bool:
        return self.assignment is not None


def _live_options(opts, assign, forbidden):
    """Return None if satisfied, else the list of options still open."""
    alive = []
    for k, v in opts:
        a = assign.get(k)
        if a is None:
            if (k, v) not in forbidden:
                alive.append((k, v))
        elif a == v:
            return None
    return alive


def cover_search(
    demands: Sequence[Sequence[Option]],
    node_budget: int = 2_000_000,
    certificate: bool = False,
    certificate_limit: int = 50_000,
) -> CoverResult:
    demands = [sorted(set(opts)) for opts in demands]
    assign: dict = {}
    forbidden: set = set()
    nodes = 0
    keep_tree = certificate

    def pick():
        best, best_alive = None, None
        for di, opts in enumerate(demands):
            alive = _live_options(opts, assign, forbidden)
            if alive is None:
                continue
            if not alive:
                return di, None
            if best_alive is None or len(alive) < len(best_alive):
                best, best_alive = di, alive
        return best, best_alive

    def rec():
        nonlocal nodes, keep_tree
        nodes += 1
        if nodes > node_budget:
            raise BudgetExceeded("cover search nodes", nodes, node_budget)
        if nodes > certificate_limit:
            keep_tree = False
        di, alive = pick()
        if di is None:
            return True, None
        if alive is None:
            return False, {"dead": di}
        branches = []
        added = []
        for k, v in alive:
            assign[k] = v
            ok, sub = rec()
            if ok:
                return True, None
            del assign[k]
            forbidden.add((k, v))
            added.append((k, v))
            if keep_tree:
                branches.append({"option": (k, v), "refutation": sub})
        for opt in added:
            forbidden.discard(opt)
        return False, ({"demand": di, "branches": branches} if keep_tree else None)

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 4 * len(demands) + 1000))
    try:
        ok, tree = rec()
    finally:
        sys.setrecursionlimit(old_limit)
    if ok:
        return CoverResult(dict(assign), nodes)
    return CoverResult(None, nodes, tree if keep_tree else None)


def check_refutation(demands: Sequence[Sequence[Option]], tree: dict) -> bool:
    """Replay a refutation tree; True iff it proves no assignment covers all demands."""
    demands = [sorted(set(opts)) for opts in demands]
    assign: dict = {}
    forbidden: set = set()

    def rec(node) -> bool:
        if node is None:
            return False
        if "dead" in node:
            di = node["dead"]
            return 0 <= di < len(demands) and _live_options(demands[di], assign, forbidden) == []
        di = node["demand"]
        if not 0 <= di < len(demands):
            return False
        alive = _live_options(demands[di], assign, forbidden)
        if alive is None or [tuple(b["option"]) for b in node["branches"]] != alive:
            return False
        added = []
        ok = True
        for branch in node["branches"]:
            k, v = branch["option"]
            assign[k] = v
            ok = rec(branch["refutation"])
            del assign[k]
            if not ok:
                break
            forbidden.add((k, v))
            added.append((k, v))
        for opt in added:
            forbidden.discard(opt)
        return ok

    return rec(tree)


def refutation_to_json(tree: dict | None, key_to_json=lambda k: k) -> dict | None:
    if tree is None:
        return None
    if "dead" in tree:
        return {"dead": tree["dead"]}
    return {
        "demand": tree["demand"],
        "branches": [
            {
                "option": [key_to_json(b["option"][0]), b["option"][1]],
                "refutation": refutation_to_json(b["refutation"], key_to_json),
            }
            for b in tree["branches"]
        ],
    }
