"""``maxpareto`` command line."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import bench
from .errors import (
    CapExceeded,
    InfeasiblePoint,
    InstanceRejected,
    MaxParetoError,
    ParseError,
    PreconditionViolated,
)
from .matching import (
    Matching,
    all_blocking_sets,
    encode_allocation,
    find_blocking_set,
    is_fpo_matching,
    is_po_matching,
    load_allocation,
    load_graph,
    payoff_vector,
    save_graph,
)
from .model import load_instance, payoff, save_instance
from .numeric import NumericMode, encode_vector, parse_vector
from .pareto import find_support_certificate, verify_pareto
from .solver import (
    HeuristicConfig,
    steep_diagonal,
    steep_diagonal_ratio,
    solve_exact,
    solve_heuristic,
)

USAGE_ERRORS = (ParseError, ValueError, OSError)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _common(mode: str = "rational") -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--mode", choices=("float", "rational"), default=mode, help=f"arithmetic (default {mode})")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--json-out", metavar="PATH", help="also write the result as JSON")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxpareto", description="Optimise over Pareto-optimal points of a polytope.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    common = [_common()]

    def point_args(p: argparse.ArgumentParser) -> None:
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--point", help="comma-separated rationals, e.g. 1/2,1")
        g.add_argument("--point-file", metavar="PATH", help="file holding the point")

    p = sub.add_parser("solve", parents=common, help="heuristic or exact solve of an instance")
    p.add_argument("--instance", required=True, metavar="PATH", help=".mpj instance")
    p.add_argument("--method", choices=("heuristic", "exact"), default="heuristic")
    p.add_argument("--w-cap", type=float, default=10.0, help="upper bound on weights (heuristic)")
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--local-steps", type=int, default=20)
    p.add_argument("--step-factor", type=float, default=2.0)
    p.add_argument("--limit", type=float, default=60.0, help="time limit in seconds")

    p = sub.add_parser("verify", parents=common, help="check whether a point is Pareto-optimal")
    p.add_argument("--instance", required=True, metavar="PATH")
    point_args(p)

    p = sub.add_parser("certify", parents=common, help="find a supporting-weight certificate")
    p.add_argument("--instance", required=True, metavar="PATH")
    point_args(p)
    p.add_argument("--w-cap", type=float, default=float("inf"))

    p = sub.add_parser("oracle", parents=common, help="exact optimum by enumeration")
    p.add_argument("--instance", required=True, metavar="PATH")
    p.add_argument("--limit", type=float, default=None, help="time limit in seconds")

    p = sub.add_parser("fpo-check", parents=common, help="PO and fPO verdicts for a matching")
    p.add_argument("--graph", required=True, metavar="PATH", help=".bgj graph")
    p.add_argument("--matching", required=True, help="pairs i:j separated by commas")

    p = sub.add_parser("blocking-set", parents=common, help="blocking set for a PO matching")
    p.add_argument("--graph", required=True, metavar="PATH")
    p.add_argument("--matching", required=True, help="pairs i:j separated by commas")
    p.add_argument("--edge", help="improving edge i:j (default: first one found)")
    p.add_argument("--all", action="store_true", help="list every blocking set by enumeration")

    p = sub.add_parser("encode", parents=common, help="encode an allocation instance")
    p.add_argument("--allocation", required=True, metavar="PATH", help=".alj instance")
    p.add_argument("--welfare-file", metavar="PATH", help="JSON agents x objects welfare matrix")
    p.add_argument("--out", required=True, metavar="PATH", help=".mpj output")

    p = sub.add_parser("generate", parents=common, help="random benchmark instance")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--mult", type=int, default=1, choices=bench.MULTIPLIERS)
    p.add_argument("--out", required=True, metavar="PATH", help=".mpj output")
    p.add_argument("--graph-out", metavar="PATH", help="also write the .bgj graph")

    p = sub.add_parser("bench", parents=[_common("float")], help="run a benchmark grid")
    p.add_argument("--agents", type=_int_list, default=[4, 6, 8, 10])
    p.add_argument("--mult", type=_int_list, default=[1, 2])
    p.add_argument("--seeds", type=int, default=1, help="seeds per cell, starting at --seed")
    p.add_argument("--methods", default=",".join(bench.METHODS))
    p.add_argument("--limit", type=float, default=60.0, help="per-row time limit in seconds")
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--local-steps", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="PATH", help="CSV output")

    p = sub.add_parser("prop9", parents=common, help="weight-ratio lower bound instance")
    p.add_argument("--n", type=int, required=True)
    return parser


def _read_point(args: argparse.Namespace) -> list:
    text = args.point if args.point is not None else Path(args.point_file).read_text()
    return parse_vector(text.replace("\n", ",").replace(" ", ","))


def _parse_pairs(text: str) -> list[tuple[int, int]]:
    pairs = []
    for tok in text.split(","):
        if not tok.strip():
            continue
        i, _, j = tok.partition(":")
        try:
            pairs.append((int(i), int(j)))
        except ValueError as exc:
            raise ParseError(f"bad pair {tok!r}, expected i:j") from exc
    return pairs


def _fmt(values: Any) -> str:
    return "(" + ", ".join(str(v) for v in np.asarray(values, dtype=object).ravel()) + ")"


def _dump(args: argparse.Namespace, data: Any) -> None:
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(data, indent=1) + "\n")


def cmd_solve(args: argparse.Namespace, mode: NumericMode) -> int:
    inst = load_instance(args.instance)
    if args.method == "exact":
        report = solve_exact(inst, mode, time_limit=args.limit)
    else:
        cfg = HeuristicConfig(
            w_cap=args.w_cap, starts=args.starts, local_steps=args.local_steps,
            step_factor=args.step_factor, time_limit=args.limit, seed=args.seed, mode=mode,
        )
        report = solve_heuristic(inst, cfg)
    print(f"status {report.status.value}")
    print(f"lb {report.lb}")
    print(f"ub {report.ub}{'' if report.ub_valid else ' (not a valid bound)'}")
    if report.x is not None:
        print(f"x {_fmt(report.x)}")
        print(f"payoff {_fmt(payoff(inst, report.x))}")
    _dump(args, report.to_json())
    return 0 if report.x is not None else 1


def cmd_verify(args: argparse.Namespace, mode: NumericMode) -> int:
    inst = load_instance(args.instance)
    res = verify_pareto(inst, _read_point(args), mode)
    print(res.verdict)
    out: dict[str, Any] = {"verdict": res.verdict}
    if res.dominated:
        print(f"witness {_fmt(res.witness)}")
        print(f"improvement {_fmt(res.improvement)}")
        out.update(witness=encode_vector(res.witness), improvement=encode_vector(res.improvement))
    _dump(args, out)
    return 1 if res.dominated else 0


def cmd_certify(args: argparse.Namespace, mode: NumericMode) -> int:
    inst = load_instance(args.instance)
    cert = find_support_certificate(inst, _read_point(args), args.w_cap, mode)
    if cert is None:
        print("no certificate")
        _dump(args, None)
        return 1
    print(f"w {_fmt(cert.w)}")
    print(f"eta {_fmt(cert.eta)}")
    _dump(args, cert.to_json())
    return 0


def cmd_oracle(args: argparse.Namespace, mode: NumericMode) -> int:
    inst = load_instance(args.instance)
    report = solve_exact(inst, mode, time_limit=args.limit)
    print(f"status {report.status.value}")
    print(f"optimum {report.lb}")
    if report.x is not None:
        print(f"x {_fmt(report.x)}")
    _dump(args, report.to_json())
    return 0 if report.x is not None else 1


def cmd_fpo_check(args: argparse.Namespace, mode: NumericMode) -> int:
    g = load_graph(args.graph)
    m = Matching.of(_parse_pairs(args.matching))
    po = is_po_matching(g, m, mode=mode)
    fpo = is_fpo_matching(g, m, mode)
    print(f"payoff {_fmt(payoff_vector(g, m))}")
    print(f"PO {str(po).lower()}")
    print(f"fPO {str(fpo).lower()}")
    _dump(args, {"po": po, "fpo": fpo})
    return 0 if fpo else 1


def cmd_blocking_set(args: argparse.Namespace, mode: NumericMode) -> int:
    g = load_graph(args.graph)
    m = Matching.of(_parse_pairs(args.matching))
    if args.all:
        sets = [sorted(b.members) for b in all_blocking_sets(g, m)]
        for s in sets:
            print(s)
        _dump(args, sets)
        return 0 if sets else 1
    if args.edge:
        (i, j), = _parse_pairs(args.edge)
    else:
        u = payoff_vector(g, m)
        improving = [(i, j) for i, j, w in g.edges if w > u[i]]
        if not improving:
            print("no improving edge")
            return 1
        i, j = improving[0]
    b = find_blocking_set(g, m, i, j)
    print(sorted(b.members))
    _dump(args, sorted(b.members))
    return 0


def cmd_encode(args: argparse.Namespace, mode: NumericMode) -> int:
    a = load_allocation(args.allocation)
    welfare = json.loads(Path(args.welfare_file).read_text()) if args.welfare_file else None
    inst = encode_allocation(a, welfare)
    save_instance(inst, args.out)
    print(f"wrote {args.out}: m={inst.m} k={inst.k} n={inst.n}")
    _dump(args, inst.to_json())
    return 0


def cmd_generate(args: argparse.Namespace, mode: NumericMode) -> int:
    gen = bench.generate_allocation(bench.GenSpec(args.agents, args.mult, args.seed))
    save_instance(gen.instance, args.out)
    if args.graph_out:
        save_graph(gen.graph, args.graph_out)
    print(f"wrote {args.out}: {gen.spec.agents} agents, {gen.spec.items} items")
    _dump(args, {"welfare": gen.welfare.tolist(), "payoff": gen.payoff.tolist()})
    return 0


def cmd_bench(args: argparse.Namespace, mode: NumericMode) -> int:
    methods = [m for m in args.methods.split(",") if m]
    specs = [bench.GenSpec(a, k, args.seed + s) for a in args.agents for k in args.mult for s in range(args.seeds)]
    base = HeuristicConfig(starts=args.starts, local_steps=args.local_steps, mode=mode)
    rows = bench.run_suite(specs, methods, args.limit, args.out, base, args.workers)
    print(bench.format_table(rows), end="")
    drops, total = bench.wcap_nonmonotone(rows)
    if total:
        print(f"w_cap non-monotone on {drops}/{total} instances")
    if args.json_out:
        Path(args.json_out).write_text(bench.rows_to_csv(rows))
    return 0


def cmd_prop9(args: argparse.Namespace, mode: NumericMode) -> int:
    if args.n < 2:
        raise ValueError("--n must be at least 2")
    inst, x = steep_diagonal(args.n)
    cert = find_support_certificate(inst, x, mode=mode)
    ratio = steep_diagonal_ratio(args.n, mode)
    bound = (args.n - 1) ** (args.n - 1)
    print(f"minimal certificate w {_fmt(cert.w)}")
    print(f"certificate ratio w1/wn {cert.ratio()}")
    print(f"least ratio w1/wn {ratio}")
    print(f"lower bound (n-1)^(n-1) {bound}")
    _dump(args, {"certificate": cert.to_json(), "ratio": str(ratio), "bound": bound})
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "certify": cmd_certify,
    "oracle": cmd_oracle,
    "fpo-check": cmd_fpo_check,
    "blocking-set": cmd_blocking_set,
    "encode": cmd_encode,
    "generate": cmd_generate,
    "bench": cmd_bench,
    "prop9": cmd_prop9,
}


def dispatch(argv: Sequence[str] | None = None) -> int:
    """Run one command; 0 on success, 1 on a domain failure, 2 on bad usage or input."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    mode = NumericMode.parse(args.mode)
    try:
        return COMMANDS[args.command](args, mode)
    except (InfeasiblePoint, InstanceRejected, CapExceeded, PreconditionViolated) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MaxParetoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
