"""Command-line entry point.

Every command prints (or writes to ``--out``) one report carrying the full
configuration, including the seed, so rerunning ``argv`` from a report
reproduces it.  Exit codes: 0 success / winning / strategy found, 2 a
counterexample or defeating coloring was produced, 3 nothing found or a
budget was hit, 1 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import secrets
import sys
from pathlib import Path

import numpy as np

from . import book, clique, core, linear, planar, randgraph
from .errors import BudgetExceeded, ContractError, HatGuessError, InvalidInput, NotFound

EXIT_OK, EXIT_USAGE, EXIT_DEFEAT, EXIT_NOTFOUND = 0, 1, 2, 3


class Outcome(Exception):
    """Carries a finished report and its exit code out of a command."""

    def __init__(self, code: int, result: dict):
        self.code = code
        self.result = result


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------


def read_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def int_arg(text: str) -> int:
    """Integers, also in ``1e6`` form (exact for whole values)."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not val.is_integer():
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(val)


def int_list(text: str) -> list[int]:
    return [int_arg(t) for t in text.split(",") if t.strip()]


def unwrap(obj, key: str):
    """Accept either the bare object or a report whose result holds it under ``key``."""
    if isinstance(obj, dict) and isinstance(obj.get("result"), dict) and key in obj["result"]:
        return obj["result"][key]
    return obj


def load_graph(args) -> core.Graph:
    return core.Graph.from_json(read_json(args.graph))


def _bigint(x: int) -> str:
    return str(x)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_verify(args) -> dict:
    graph = load_graph(args)
    profile = core.StrategyProfile.from_json(unwrap(read_json(args.strategy), "strategy"), graph)
    if args.q is not None and args.q != profile.q:
        raise InvalidInput(f"--q {args.q} disagrees with strategy q={profile.q}")
    out = core.verify(graph, profile, mode=args.mode, samples=args.samples, seed=args.seed,
                      budget=args.budget, workers=core.worker_count())
    res = out.to_json()
    code = {"winning": EXIT_OK, "counterexample": EXIT_DEFEAT, "no_counterexample": EXIT_NOTFOUND}[out.status]
    raise Outcome(code, res)


def cmd_solve(args) -> dict:
    graph = load_graph(args)
    if args.q_max is not None:
        hg = core.hat_guessing_number(graph, args.q_max, budget=args.budget)
        return {"hat_guessing_number_at_most_q_max": hg, "q_max": args.q_max}
    if args.q is None:
        raise InvalidInput("solve needs --q or --q-max")
    profile = core.find_winning_profile(graph, args.q, budget=args.budget)
    if profile is None:
        raise Outcome(EXIT_NOTFOUND, {"winnable": False, "q": args.q})
    check = core.verify(graph, profile, budget=args.budget)
    return {"winnable": True, "q": args.q, "verified": check.winning, "strategy": profile.to_json()}


def cmd_handle_set(args) -> dict:
    ks = clique.KnownSet.from_json(read_json(args.set))
    res = clique.handle_known_set(ks, node_budget=args.node_budget)
    if not res:
        raise Outcome(EXIT_NOTFOUND, {"handleable": False, "certificate_checked": res.check(), **res.to_json()})
    return {"handleable": True, "covers": res.covers(ks.ordered()), "strategy": res.to_json()}


def cmd_planar_build(args) -> dict:
    fam = planar.build_cover_family(args.q, args.q // 2, seed=args.seed)
    cert = planar.planarity_certificate(core.planar_graph(len(fam)))
    return {"family": fam.to_json(), "members": len(fam), "planarity": cert}


def _load_or_build_family(args):
    if args.family:
        fam = planar.PairFunctionFamily.from_json(unwrap(read_json(args.family), "family"))
        if isinstance(fam, planar.ImplicitFullFamily):
            raise BudgetExceeded("materialising the full pair-function family", fam.size, args.budget)
        return fam
    return planar.build_cover_family(args.q, args.q // 2, seed=args.seed)


def cmd_planar_verify(args) -> dict:
    fam = _load_or_build_family(args)
    cover = planar.verify_cover_family(fam)
    if not cover.ok:
        raise Outcome(EXIT_DEFEAT, {"cover": cover.to_json()})
    fam.covering = True
    strat = planar.construct_planar_strategy(fam.q, fam)
    total = fam.q**strat.graph.n
    mode = "exhaustive" if args.samples is None and total <= args.budget else "sampled"
    samples = args.samples if args.samples is not None else 10**5
    out = core.verify(strat.graph, strat.profile, mode=mode, samples=samples, seed=args.seed,
                      budget=args.budget, workers=core.worker_count())
    res = {"q": fam.q, "members": len(fam), "cover": cover.to_json(), "colorings_total": _bigint(total), **out.to_json()}
    code = {"winning": EXIT_OK, "counterexample": EXIT_DEFEAT, "no_counterexample": EXIT_NOTFOUND}[out.status]
    raise Outcome(code, res)


def cmd_planar_attack(args) -> dict:
    graph = core.planar_graph(args.m)
    if args.strategy == "random":
        profile = core.random_profile(graph, args.q, args.seed)
    else:
        profile = core.StrategyProfile.from_json(unwrap(read_json(args.strategy), "strategy"), graph)
    coloring = planar.adversary_13(graph, profile)
    wrong = not core.evaluate(graph, profile, coloring)
    if not wrong:
        raise HatGuessError("adversary returned a coloring on which someone guesses right")
    raise Outcome(EXIT_DEFEAT, {"m": args.m, "q": profile.q, "coloring": coloring.to_json(), "all_wrong": wrong})


def cmd_book_build(args) -> dict:
    params = book.BookParameters(args.d, args.q, args.m, args.s)
    fam = book.build_onto_family(params, seed=args.seed, samples=args.onto_samples)
    return {"family": fam.to_json()}


def cmd_book_verify(args) -> dict:
    fam = book.OntoFamily.from_json(unwrap(read_json(args.family), "family"))
    rep = book.verify_onto_family(fam, samples=args.onto_samples, seed=args.seed)
    if not rep["ok"]:
        raise Outcome(EXIT_DEFEAT, {"onto": rep})
    fam.verified = "exact" if rep["exact"] else "sampled"
    graph, profile = book.construct_book_strategy(fam)
    p = fam.params
    total = p.q ** (p.d + p.m)
    mode = "exhaustive" if args.samples is None and total <= args.budget else "sampled"
    samples = args.samples if args.samples is not None else 10**5
    out = core.verify(graph, profile, mode=mode, samples=samples, seed=args.seed,
                      budget=args.budget, workers=core.worker_count())
    res = {"params": p.to_json(), "onto": rep, "colorings_total": _bigint(total), **out.to_json()}
    code = {"winning": EXIT_OK, "counterexample": EXIT_DEFEAT, "no_counterexample": EXIT_NOTFOUND}[out.status]
    raise Outcome(code, res)


def _linear_strategy(args) -> linear.LinearStrategy:
    if args.strategy in (None, "random"):
        if None in (args.n, args.m, args.p):
            raise InvalidInput("a random linear strategy needs --n, --m and --p")
        return linear.LinearStrategy.random(args.n, args.m, args.p, np.random.default_rng(args.seed))
    obj = unwrap(read_json(args.strategy), "strategy")
    if isinstance(obj, dict):
        obj = {"n": args.n, "m": args.m, "p": args.p, **{k: v for k, v in obj.items()}}
        for k in ("n", "m", "p"):
            given = getattr(args, k)
            if given is not None and obj[k] is not None and int(obj[k]) != given:
                raise InvalidInput(f"--{k} {given} disagrees with strategy file {k}={obj[k]}")
    return linear.LinearStrategy.from_json(obj)


def cmd_linear_defeat(args) -> dict:
    st = _linear_strategy(args)
    rep = linear.defeat_linear(st, seed=args.seed, retries=args.retries)
    res = {"n": st.n, "m": st.m, "p": st.p, "strategy": st.to_json(), **rep.to_json()}
    if not rep.found:
        raise Outcome(EXIT_NOTFOUND, res)
    graph, profile = st.graph(), st.to_profile()
    res["all_wrong"] = not core.evaluate(graph, profile, rep.coloring)
    raise Outcome(EXIT_DEFEAT, res)


def _spread_family(args) -> linear.SpreadFamily:
    if args.family:
        obj = read_json(args.family)
        if not isinstance(obj, dict):
            raise InvalidInput("family JSON must be an object")
        kind = obj.get("kind", "materialized")
        if kind == "materialized":
            try:
                return linear.SpreadFamily.materialized(obj["sets"])
            except (KeyError, TypeError) as exc:
                raise InvalidInput(f"malformed family JSON: {exc}") from exc
        return linear.SpreadFamily.implicit(linear.LinearStrategy.from_json(obj["strategy"]), kind)
    return linear.SpreadFamily.implicit(_linear_strategy(args), args.kind)


def cmd_linear_spread(args) -> dict:
    fam = _spread_family(args)
    val = linear.spread_value(fam, budget=args.budget)
    res = {"kind": fam.kind, **val.to_json()}
    if fam.strategy is not None:
        st = fam.strategy
        res["bound"] = st.p ** (1 / st.m)
        res["meets_bound"] = val.at_least(st.p, st.m)
    return res


def cmd_linear_trial(args) -> dict:
    fam = _spread_family(args)
    res = linear.spread_lemma_trial(fam, args.r, args.trials, seed=args.seed)
    if fam.strategy is not None:
        res["threshold"] = linear.lemma_threshold(args.r, fam.strategy.w)
    return res


def cmd_randgraph_experiment(args) -> dict:
    rep = randgraph.run_experiment(args.sizes, args.seeds, base_seed=args.seed, k_max=args.k_max,
                                   workers=core.worker_count())
    return rep


# ---------------------------------------------------------------------------
# parser and driver
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int_arg, default=argparse.SUPPRESS, help="64-bit seed (generated and recorded if omitted)")
    common.add_argument("--budget", type=int_arg, default=argparse.SUPPRESS, help="evaluation cap (colorings, subsets, ...)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="write the report here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="hatguess", description="Hat guessing strategies: verify, solve, build and attack.",
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(subparsers, name, func, help_):
        p = subparsers.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add(sub, "verify", cmd_verify, "check a strategy profile on a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--strategy", required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--samples", type=int_arg, default=10**5)

    p = add(sub, "solve", cmd_solve, "decide whether q colors are winnable")
    p.add_argument("--graph", required=True)
    p.add_argument("--q", type=int)
    p.add_argument("--q-max", type=int)

    p = add(sub, "handle-set", cmd_handle_set, "handle a known set of clique colorings")
    p.add_argument("--set", required=True, help="KnownSet JSON")
    p.add_argument("--node-budget", type=int_arg, default=2_000_000)

    pl = sub.add_parser("planar", help="planar construction").add_subparsers(dest="action", required=True)
    p = add(pl, "build", cmd_planar_build, "build a covering pair-function family")
    p.add_argument("--q", type=int, default=4)
    p = add(pl, "verify", cmd_planar_verify, "verify a family and the resulting strategy")
    p.add_argument("--family")
    p.add_argument("--q", type=int, default=4)
    p.add_argument("--samples", type=int_arg)
    p = add(pl, "attack", cmd_planar_attack, "defeat a strategy with 13 or more colors")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--q", type=int, default=13)
    p.add_argument("--strategy", default="random", help="profile JSON or 'random'")

    bk = sub.add_parser("book", help="book graphs").add_subparsers(dest="action", required=True)
    p = add(bk, "build", cmd_book_build, "build an onto family")
    for flag in ("--d", "--q", "--m", "--s"):
        p.add_argument(flag, type=int, required=True)
    p.add_argument("--onto-samples", type=int_arg)
    p = add(bk, "verify", cmd_book_verify, "verify an onto family and the book strategy")
    p.add_argument("--family", required=True)
    p.add_argument("--onto-samples", type=int_arg)
    p.add_argument("--samples", type=int_arg)

    ln = sub.add_parser("linear", help="linear strategies on complete multipartite graphs").add_subparsers(
        dest="action", required=True)
    for name, func, help_ in (("defeat", cmd_linear_defeat, "find an all-wrong coloring"),
                              ("spread", cmd_linear_spread, "exact spread of F or G"),
                              ("trial", cmd_linear_trial, "random-subset containment frequency")):
        p = add(ln, name, func, help_)
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--p", type=int)
        p.add_argument("--strategy", help="LinearStrategy JSON or 'random'")
        if name == "defeat":
            p.add_argument("--retries", type=int, default=64)
        else:
            p.add_argument("--family", help="family JSON: {kind: F|G, strategy} or {kind: materialized, sets}")
            p.add_argument("--kind", choices=["F", "G"], default="F")
        if name == "trial":
            p.add_argument("--r", type=float, default=2.0)
            p.add_argument("--trials", type=int_arg, default=1000)

    rg = sub.add_parser("randgraph", help="random graph experiment").add_subparsers(dest="action", required=True)
    p = add(rg, "experiment", cmd_randgraph_experiment, "certify lower bounds on G(n, 1/2) samples")
    p.add_argument("--sizes", type=int_list, default=[1024, 4096, 16384])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--k-max", type=int_arg, default=10**4)
    return parser


def _config(args) -> dict:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in ("func", "out"):
            continue
        cfg[k] = v
    return cfg


def _argv(args) -> list[str]:
    out = [args.command] + ([args.action] if getattr(args, "action", None) else [])
    for k, v in sorted(vars(args).items()):
        if k in ("func", "command", "action", "out") or v is None:
            continue
        flag = "--" + k.replace("_", "-")
        out += [flag, ",".join(map(str, v)) if isinstance(v, list) else str(v)]
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, int) and not isinstance(obj, bool) and abs(obj) >= 2**53:
        return str(obj)
    return obj


def _csv(report: dict) -> str:
    result = report["result"]
    buf = io.StringIO()
    rows = result.get("rows") if isinstance(result, dict) else None
    if isinstance(rows, list) and rows and isinstance(rows[0], dict):
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    else:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for k, v in report.items():
            if k == "result":
                continue
            writer.writerow([k, json.dumps(v, sort_keys=True)])
        for k, v in (result or {}).items():
            writer.writerow([k, v if isinstance(v, (str, int, float, bool)) else json.dumps(v, sort_keys=True)])
    return buf.getvalue()


def run(args) -> tuple[int, dict]:
    """Execute a parsed command; returns (exit code, report)."""
    generated = not hasattr(args, "seed")
    if generated:
        args.seed = secrets.randbits(63)
    for name, default in (("budget", core.DEFAULT_EVAL_BUDGET), ("out", None), ("format", "json")):
        if not hasattr(args, name):
            setattr(args, name, default)
    code = EXIT_OK
    try:
        result = args.func(args)
    except Outcome as o:
        code, result = o.code, o.result
    except BudgetExceeded as exc:
        code, result = EXIT_NOTFOUND, {"error": "budget", "what": exc.what,
                                       "required": _bigint(exc.required), "budget": _bigint(exc.budget)}
    except NotFound as exc:
        code, result = EXIT_NOTFOUND, {"error": "not_found", "message": str(exc), "capped": exc.capped}
    except (InvalidInput, ContractError) as exc:
        code, result = EXIT_USAGE, {"error": type(exc).__name__, "message": str(exc)}
    report = {
        "command": " ".join([args.command] + ([args.action] if getattr(args, "action", None) else [])),
        "config": _config(args),
        "seed": args.seed,
        "seed_generated": generated,
        "argv": _argv(args),
        "exit_code": code,
        "result": result,
    }
    return code, _jsonable(report)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    code, report = run(args)
    text = _csv(report) if args.format == "csv" else json.dumps(report, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if code == EXIT_USAGE and "message" in report["result"]:
        print(f"hatguess: {report['result']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
