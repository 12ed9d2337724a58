"""
Command-line front end.

Every command prints one JSON record (or CSV with ``--csv``) holding the
command line, the graph fingerprint, the parameters and the results.
Exit codes: 0 ok, 1 usage error, 2 capacity exceeded, 3 invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from . import __version__, bench as bench_mod, coupling, exact, graph as graph_mod
from .chain import ChainParams, amplified_solve, claimed_bounds, rand_matching
from .errors import CapacityError, GraphParseError, InvariantError, ParameterError
from .matching import DEFAULT_STATE_CAP, exact_max_matching

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_graph_source(p, random_ok=True):
    p.add_argument("--graph", metavar="PATH", help="graph file ('n m' header, then 'u v' lines)")
    p.add_argument("--family", choices=graph_mod.FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=float, help="edge probability for gnp")
    p.add_argument("--d", type=int, help="degree for bipartite_regular")
    if random_ok:
        p.add_argument("--graph-seed", type=int, help="seed for random families "
                       "(defaults to --seed)")


def _add_output(p):
    p.add_argument("--csv", action="store_true", help="flat CSV instead of JSON")
    p.add_argument("-o", "--output", metavar="PATH")


def _add_chain(p, seed_required):
    p.add_argument("--seed", type=int, required=seed_required)
    p.add_argument("--log2-lambda", type=float, help="fugacity exponent (default m)")
    p.add_argument("--steps", type=int, help="steps per run (default ceil(10 m ln n))")
    p.add_argument("--restarts", type=int, help="independent runs (default ceil(10 ln n))")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="glauber-matching", description=__doc__.strip().splitlines()[0])
    top.add_argument("--version", action="version", version=__version__)
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a graph file")
    p.add_argument("--family", choices=graph_mod.FAMILIES, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", metavar="PATH")

    p = sub.add_parser("solve", help="exact maximum matching")
    _add_graph_source(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--method", choices=("auto", "bnb", "bipartite"), default="auto")
    _add_output(p)

    p = sub.add_parser("sample", help="single chain run(s) from the empty matching")
    _add_graph_source(p)
    _add_chain(p, seed_required=True)
    p.add_argument("--runs", type=int, default=1, help="independent runs; sizes are tallied")
    _add_output(p)

    p = sub.add_parser("randmatching", help="best of R chain runs (the full solver)")
    _add_graph_source(p)
    _add_chain(p, seed_required=True)
    p.add_argument("--threads", type=int, default=1)
    _add_output(p)

    for name, help_ in (("analyze", "exact state-space report"),
                        ("mix", "exact mixing time and TV curve"),
                        ("conductance", "exact conductance and the max-matching cut")):
        p = sub.add_parser(name, help=help_)
        _add_graph_source(p)
        p.add_argument("--seed", type=int)
        p.add_argument("--log2-lambda", type=float)
        p.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
        p.add_argument("--eps", type=float, default=exact.DEFAULT_EPS)
        p.add_argument("--t-max", type=int, default=exact.DEFAULT_T_MAX)
        p.add_argument("--cut-cap", type=int, default=exact.DEFAULT_CUT_CAP)
        if name == "analyze":
            p.add_argument("--no-mix", action="store_true", help="skip the mixing-time scan")
        if name == "mix":
            p.add_argument("--from-empty", action="store_true",
                           help="track only the empty-matching start")
        _add_output(p)

    p = sub.add_parser("coupling", help="exact coupling sweeps")
    _add_graph_source(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--log2-lambda", type=float)
    p.add_argument("--variant", default="a", help="a = paper_faithful, b = synchronous")
    p.add_argument("--state-cap", type=int, default=DEFAULT_STATE_CAP)
    p.add_argument("--pair-cap", type=int, default=coupling.DEFAULT_PAIR_CAP)
    _add_output(p)

    p = sub.add_parser("bench", help="chain throughput")
    _add_graph_source(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--log2-lambda", type=float)
    p.add_argument("--steps", type=int, default=10_000_000)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--scaling", action="store_true",
                   help="compare per-step cost on G(n, 10/n) for n = 1e3, 1e4, 1e5")
    _add_output(p)
    return top


def _load_graph(args) -> graph_mod.Graph:
    if args.graph:
        if args.family:
            raise UsageError("give either --graph or --family, not both")
        return graph_mod.load(args.graph)
    if not args.family or args.n is None:
        raise UsageError("need --graph PATH or --family NAME --n INT")
    seed = getattr(args, "graph_seed", None)
    if seed is None:
        seed = getattr(args, "seed", None)
    if args.family in ("gnp", "bipartite_regular") and seed is None:
        raise UsageError(f"family {args.family} needs an explicit --seed")
    return graph_mod.generate(args.family, args.n, p=args.p, d=args.d, seed=seed)


def _params(args, g) -> ChainParams:
    base = ChainParams.paper_defaults(g, args.seed)
    params = ChainParams(
        log2_lambda=base.log2_lambda if args.log2_lambda is None else args.log2_lambda,
        steps=base.steps if args.steps is None else args.steps,
        seed=args.seed,
        restarts=base.restarts if args.restarts is None else args.restarts,
    )
    if params.steps < 0 or params.restarts < 1:
        raise UsageError("--steps must be >= 0 and --restarts >= 1")
    return params


def _lam(args, g) -> float:
    return float(g.m) if args.log2_lambda is None else args.log2_lambda


def _cmd_solve(args, g):
    k, witness = exact_max_matching(g, args.method)
    return {"method": args.method}, {"k": k, "matching": witness.to_json()}


def _cmd_sample(args, g):
    params = _params(args, g)
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    rng = np.random.default_rng(params.seed)
    reports = [rand_matching(g, params, rng) for _ in range(args.runs)]
    tally: dict[int, int] = {}
    for r in reports:
        tally[r.found_size] = tally.get(r.found_size, 0) + 1
    results = reports[0].to_json() if args.runs == 1 else {
        "runs": [r.to_json() for r in reports],
        "size_counts": {str(s): c for s, c in sorted(tally.items())},
    }
    return _param_dict(params), results


def _param_dict(params: ChainParams) -> dict:
    return {"log2_lambda": params.log2_lambda, "steps": params.steps,
            "seed": params.seed, "restarts": params.restarts}


def _cmd_randmatching(args, g):
    params = _params(args, g)
    best, reports = amplified_solve(g, params, params.seed, threads=args.threads)
    return _param_dict(params), {
        "size": best.size,
        "matching": best.to_json(),
        "restarts": [r.to_json() for r in reports],
    }


def _cmd_analyze(args, g):
    lam = _lam(args, g)
    res = exact.analyze(g, lam, state_cap=args.state_cap, eps=args.eps, t_max=args.t_max,
                        cut_cap=args.cut_cap, mixing=not args.no_mix)
    return {"log2_lambda": lam, "state_cap": args.state_cap}, res


def _cmd_mix(args, g):
    lam = _lam(args, g)
    space = exact.StateSpace.build(g, args.state_cap)
    kern = exact.build_kernel(space, lam)
    pi = exact.gibbs(space, lam)
    rep = exact.exact_mixing_time(kern, pi, args.eps, args.t_max,
                                  start=0 if args.from_empty else None)
    if len(space) <= args.cut_cap:
        rep.conductance = exact.conductance_exact(kern, pi, args.cut_cap)[0]
    claims = claimed_bounds(g.n, g.m, space.k)
    out = rep.to_json()
    out.update({"k": space.k, "claimed_upper": claims["t_mix_upper"],
                "claimed_lower": claims["t_mix_lower"]})
    return {"log2_lambda": lam, "eps": args.eps, "from_empty": args.from_empty}, out


def _cmd_conductance(args, g):
    lam = _lam(args, g)
    space = exact.StateSpace.build(g, args.state_cap)
    kern = exact.build_kernel(space, lam)
    pi = exact.gibbs(space, lam)
    cut = exact.max_matching_cut(space, lam, kern)
    out = {"k": space.k, "states": len(space), "phi_min": None, "argmin_cut": None,
           "phi_cut": cut["phi_direct"], "phi_cut_closed_form": cut["phi_closed_form"],
           "cut_state": list(space.keys[cut["state"]])}
    if len(space) <= args.cut_cap:
        phi_min, arg = exact.conductance_exact(kern, pi, args.cut_cap)
        out["phi_min"] = phi_min
        out["argmin_cut"] = [list(space.keys[i]) for i in arg]
        out["t_relax"] = 1 / phi_min
    else:
        out["note"] = f"{len(space)} states > cut cap {args.cut_cap}; phi_min not computed"
    return {"log2_lambda": lam, "cut_cap": args.cut_cap}, out


def _cmd_coupling(args, g):
    lam = _lam(args, g)
    variant = coupling.resolve_variant(args.variant)
    space = exact.StateSpace.build(g, args.state_cap)
    res = coupling.coupling_report(space, variant, lam, args.pair_cap)
    i, j, side = res["witness"]
    res["witness_states"] = [list(space.keys[i]), list(space.keys[j])]
    return {"log2_lambda": lam, "variant": variant}, res


def _cmd_bench(args, g):
    if args.reps < 1 or args.steps < 1:
        raise UsageError("--reps and --steps must be >= 1")
    if args.scaling:
        res = bench_mod.step_scaling(steps=args.steps, seed=args.seed, reps=args.reps)
        return {"steps": args.steps, "reps": args.reps, "seed": args.seed}, res
    params = ChainParams(_lam(args, g), args.steps, args.seed)
    res = bench_mod.bench(g, params, args.reps)
    return {"steps": args.steps, "reps": args.reps, "seed": args.seed,
            "log2_lambda": params.log2_lambda}, res


COMMANDS = {
    "solve": _cmd_solve,
    "sample": _cmd_sample,
    "randmatching": _cmd_randmatching,
    "analyze": _cmd_analyze,
    "mix": _cmd_mix,
    "conductance": _cmd_conductance,
    "coupling": _cmd_coupling,
    "bench": _cmd_bench,
}


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}{k}.", v, out)
    elif isinstance(value, list):
        out[prefix[:-1]] = json.dumps(value, separators=(",", ":"))
    else:
        out[prefix[:-1]] = value


def _to_csv(record: dict) -> str:
    results = record["results"]
    if "rows" in results:
        rows = results["rows"]
    elif "sizes" in results:
        rows = results["sizes"]
    else:
        flat: dict = {}
        _flatten("", {k: v for k, v in record.items() if k != "command"}, flat)
        rows = [flat]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_cli(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "gen":
            if args.family in ("gnp", "bipartite_regular") and args.seed is None:
                raise UsageError(f"family {args.family} needs an explicit --seed")
            g = graph_mod.generate(args.family, args.n, p=args.p, d=args.d, seed=args.seed)
            _emit(graph_mod.write_graph(g), args.output)
            if args.output:
                sys.stdout.write(json.dumps({"command": ["gen", *argv[1:]],
                                             "graph": g.fingerprint()}) + "\n")
            return EXIT_OK
        g = _load_graph(args)
        t0 = time.perf_counter()
        params, results = COMMANDS[args.command](args, g)
        record = {
            "command": [args.command, *argv[1:]],
            "graph": g.fingerprint(),
            "params": params,
            "results": results,
            "wall_seconds": time.perf_counter() - t0,
            "version": __version__,
        }
        text = _to_csv(record) if args.csv else json.dumps(record, indent=2) + "\n"
        _emit(text, args.output)
        return EXIT_OK
    except (UsageError, ParameterError, GraphParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, UsageError):
            print(parser.format_usage(), file=sys.stderr, end="")
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (InvariantError, AssertionError) as exc:
        print(f"internal invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
