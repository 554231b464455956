"""Command-line interface: ``reconf cycles|pf|solve``.

Exit codes: 0 success, 2 invalid input, 3 infeasible / power flow failure,
4 oracle mismatch under ``--verify``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import GraphError, Infeasible, ParseError, PowerFlowError, ValidationError
from .graph import (
    enumerate_all_cycles,
    fundamental_cycle_basis,
    cycle_edges,
    to_dot,
)
from .network import baseline_topology, load_network, load_topology, to_graph
from .oracle import exhaustive_optimum
from .powerflow import DEFAULT_MAX_ITER, DEFAULT_TOL, solve_power_flow
from .reconfiguration import (
    DEFAULT_TIME_LIMIT,
    ModelKind,
    build_instance,
    report,
    solve,
    write_report,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_VERIFY = 4

VERIFY_TOL = 1e-8


@dataclass
class RunConfig:
    command: str
    input: str
    models: list = field(default_factory=list)
    time_limit: float = DEFAULT_TIME_LIMIT
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    topology: Optional[str] = None
    out: Optional[str] = None
    report: Optional[str] = None
    json: Optional[str] = None
    dot: Optional[str] = None
    verify: bool = False
    show_all: bool = False
    timing: bool = True
    case: Optional[str] = None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        cfg = cls(command=args.command, input=args.network)
        cfg.tol = float(os.environ.get("RECONF_TOL", DEFAULT_TOL))
        cfg.max_iter = int(os.environ.get("RECONF_MAX_ITER", DEFAULT_MAX_ITER))
        for name in ("topology", "out", "report", "json", "dot", "verify", "case"):
            if hasattr(args, name):
                setattr(cfg, name, getattr(args, name))
        cfg.show_all = getattr(args, "all", False)
        cfg.timing = not getattr(args, "no_timing", False)
        if args.command == "solve":
            cfg.time_limit = args.time_limit
            cfg.models = [ModelKind.parse(m) for m in args.model.split(",") if m.strip()]
            if not cfg.models:
                raise ValueError("--model needs at least one of cdsr, rrdsr")
        if cfg.topology is not None and not Path(cfg.topology).is_file():
            raise ParseError(f"no such topology file: {cfg.topology}")
        for out in (cfg.out, cfg.report, cfg.json, cfg.dot):
            if out is not None and not Path(out).resolve().parent.is_dir():
                raise ParseError(f"output directory does not exist: {out}")
        return cfg


def _fmt_edges(edges) -> str:
    return "[" + ", ".join(str(e) for e in sorted(edges)) + "]"


def cmd_cycles(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    net = load_network(cfg.input)
    g = net.graph()
    basis = fundamental_cycle_basis(g)
    ces = cycle_edges(basis)
    bridge_set = g.all_edges - ces
    cycles = enumerate_all_cycles(g)
    print(f"network: {net.name} (|V|={g.vertex_count}, |E|={g.edge_count})", file=out)
    print(f"β={len(basis)}, cycles: {len(cycles)}, cycle-edges: {len(ces)}, "
          f"bridges: {len(bridge_set)}", file=out)
    for k, (c, chord) in enumerate(zip(basis.cycles, basis.chord_of), 1):
        print(f"basis {k} (chord {chord}): {_fmt_edges(c.edges)}", file=out)
    print(f"cycle-edges: {_fmt_edges(ces)}", file=out)
    print(f"bridges: {_fmt_edges(bridge_set)}", file=out)
    if cfg.show_all:
        for k, c in enumerate(cycles, 1):
            print(f"cycle {k}: {_fmt_edges(c.edges)}", file=out)
    if cfg.dot:
        Path(cfg.dot).write_text(to_dot(g, highlight=ces, name=net.name or "N"))
    return EXIT_OK


def cmd_pf(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    net = load_network(cfg.input)
    topo = load_topology(cfg.topology) if cfg.topology else baseline_topology(net)
    sol = solve_power_flow(net, topo, tol=cfg.tol, max_iter=cfg.max_iter)
    text = json.dumps(sol.to_dict(), indent=1)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n")
        print(f"f_obj={sol.f_obj!r} p_loss={sol.p_loss!r} iterations={sol.iterations}", file=out)
    else:
        print(text, file=out)
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    net = load_network(cfg.input)
    case = cfg.case or net.name or Path(cfg.input).stem
    start = baseline_topology(net)
    baseline = solve_power_flow(net, start, tol=cfg.tol, max_iter=cfg.max_iter)

    rows, results = [], []
    for kind in cfg.models:
        inst = build_instance(net, kind)
        res = solve(inst, start, time_limit=cfg.time_limit, tol=cfg.tol, max_iter=cfg.max_iter)
        results.append(res)
        rows.append(report(res, baseline, case=case, include_timing=cfg.timing))

    if cfg.report:
        with open(cfg.report, "w", newline="") as fh:
            write_report(rows, fh)
    else:
        write_report(rows, out)
    if cfg.json:
        dump = {"case": case, "baseline": baseline.to_dict(),
                "results": [r.to_dict() for r in results]}
        if not cfg.timing:
            for r in dump["results"]:
                r["stats"]["wall_time"] = 0.0
                r["stats"]["incumbent_history"] = [[0.0, f] for _, f in r["stats"]["incumbent_history"]]
        Path(cfg.json).write_text(json.dumps(dump, indent=1) + "\n")
    if cfg.dot:
        g, active = to_graph(net, results[0].best)
        Path(cfg.dot).write_text(
            to_dot(g, highlight=active, dashed=g.all_edges - active, name=net.name or "N"))

    if cfg.verify:
        oracle = exhaustive_optimum(net, tol=cfg.tol, max_iter=cfg.max_iter)
        bad = False
        for res in results:
            same_f = abs(res.f_obj - oracle.optimum_f) <= VERIFY_TOL
            same_t = res.best == oracle.optimum_topology
            status = "ok" if (same_f and same_t and res.proven_optimal) else "MISMATCH"
            bad |= status != "ok"
            print(f"verify {res.kind.label}: {status} (f={res.f_obj!r}, oracle={oracle.optimum_f!r}, "
                  f"trees={oracle.tree_count}, subsets={oracle.subset_count})", file=sys.stderr)
        if bad:
            return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reconf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cycles", help="cycle basis, all cycles, cycle-edges and bridges")
    p.add_argument("network")
    p.add_argument("--all", action="store_true", help="list every cycle")
    p.add_argument("--dot", help="write a DOT rendering with cycle-edges highlighted")

    p = sub.add_parser("pf", help="AC power flow for one topology")
    p.add_argument("network")
    p.add_argument("--topology", help='JSON file {"closed": [line ids]}; default: baseline')
    p.add_argument("--out", help="write the solution as JSON")

    p = sub.add_parser("solve", help="loss-minimal radial topology")
    p.add_argument("network")
    p.add_argument("--model", default="cdsr", help="cdsr, rrdsr or cdsr,rrdsr")
    p.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    p.add_argument("--report", help="CSV report path (default: stdout)")
    p.add_argument("--json", help="JSON result dump path")
    p.add_argument("--verify", action="store_true", help="check against exhaustive enumeration")
    p.add_argument("--dot", help="write the best topology of the first model as DOT")
    p.add_argument("--case", help="case label for the report")
    p.add_argument("--no-timing", action="store_true",
                   help="write ct as 0 so reports are byte-reproducible")
    return parser


COMMANDS = {"cycles": cmd_cycles, "pf": cmd_pf, "solve": cmd_solve}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (ParseError, ValidationError, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PowerFlowError, Infeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
