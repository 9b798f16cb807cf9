"""Command-line front end: reproduction pipelines, searches, fixture export.

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import io, superact
from .graphcap import EPS_GAP, TAU_CODE, default_threads
from .opalg import ProductSpace

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    n: int = 2
    t_values: list = field(default_factory=list)
    starts: int = 1000
    seed: int = 42
    output_path: str | None = None
    pretty: bool = False
    threads: int = 1


class UsageError(Exception):
    pass


def _emit(obj: dict, cfg: RunConfig) -> None:
    text = io.write_json(obj, cfg.output_path, cfg.pretty)
    if cfg.output_path is None:
        sys.stdout.write(text)


def _finish(report: dict, cfg: RunConfig) -> int:
    _emit(report, cfg)
    failing = [c["name"] for c in report["checks"] if not c["pass"]]
    for name in failing:
        print(f"FAILED: {name}", file=sys.stderr)
    return EXIT_FAIL if failing else EXIT_OK


def cmd_reproduce(cfg: RunConfig, target: str) -> int:
    if target == "corollary1":
        t_grid = cfg.t_values or None
        report = superact.reproduce_corollary1(t_grid, cfg.starts, cfg.seed, threads=cfg.threads)
    else:
        if not 2 <= cfg.n <= superact.MAX_N:
            raise UsageError(f"--n must be in 2..{superact.MAX_N}")
        t = cfg.t_values[0] if cfg.t_values else 0.0
        report = superact.reproduce_theorem2(cfg.n, t, cfg.starts, cfg.seed, threads=cfg.threads)
    return _finish(report, cfg)


def resolve_graph(selector: str, n: int):
    if selector == "l0":
        return superact.make_graph("L0")
    if selector == "l0sq":
        l0 = superact.make_graph("L0")
        return ProductSpace(l0, l0)
    if selector == "ln":
        if not 2 <= n <= superact.MAX_N:
            raise UsageError(f"--n must be in 2..{superact.MAX_N}")
        return superact.make_graph("Ln", n)
    try:
        return io.space_from_json(io.read_json(selector))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read graph file {selector!r}: {exc}") from exc


def cmd_search(cfg: RunConfig, selector: str) -> int:
    from .graphcap import search_violation

    space = resolve_graph(selector, cfg.n)
    report = search_violation(space, cfg.starts, cfg.seed, threads=cfg.threads)
    _emit({"schema": "1", **report.to_dict()}, cfg)
    return EXIT_OK


def cmd_export(cfg: RunConfig, what: str) -> int:
    if what == "povm":
        obj = io.positive_basis_to_json(superact.paper_povm())
    elif what == "kraus":
        obj = io.channel_to_json(superact.paper_kraus())
    elif what == "graph-l0":
        obj = io.generators_to_json(superact.graph_generators(superact.GraphFamilySpec(2, "L0")))
    elif what == "graph-ln":
        if not 2 <= cfg.n <= superact.MAX_N:
            raise UsageError(f"--n must be in 2..{superact.MAX_N}")
        obj = io.generators_to_json(superact.graph_generators(superact.GraphFamilySpec(cfg.n, "Ln")))
    else:
        raise UsageError(f"unknown export target {what!r}")
    _emit(obj, cfg)
    return EXIT_OK


def cmd_povm_check(cfg: RunConfig) -> int:
    """Observable form of the construction: no indistinguishable plane for one copy,
    an entangled indistinguishable plane for two."""
    from .povm import find_indistinguishable, is_indistinguishable, make_observable, \
        observable_from_graph, tensor_observables

    printed = make_observable(superact.paper_povm().ops)
    built = observable_from_graph(superact.make_graph("L0"))
    checks = []
    for label, obs in (("printed", printed), ("from_graph", built)):
        rep = find_indistinguishable(obs, cfg.starts, cfg.seed, threads=cfg.threads)
        checks.append({"name": f"{label}: single-copy gap >= eps_gap", "pass": rep.best_value >= EPS_GAP,
                       "residual": rep.best_value})
        square = tensor_observables(obs, obs)
        for t in cfg.t_values or [0.0, 2.0, 5.0]:
            t = superact.fold_t(t)
            cert = is_indistinguishable(square, superact.code_vectors(2, t), TAU_CODE)
            checks.append({"name": f"{label}: tensor square indistinguishable at t={t!r}",
                           "pass": cert.passed,
                           "residual": max(cert.max_offdiag_residual, cert.max_diag_residual)})
    report = {"schema": "1", "construction": {"name": "povm-check", "outcomes": printed.outcomes,
                                              "dim": printed.dim}, "checks": checks}
    return _finish(report, cfg)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--starts", type=int, default=1000)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--t", dest="t_values", type=float, action="append", default=[])
    common.add_argument("--n", type=int, default=2)
    common.add_argument("--output", "-o", dest="output_path")
    common.add_argument("--pretty", action="store_true")
    common.add_argument("--threads", type=int, default=None)

    parser = argparse.ArgumentParser(prog="zerograph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    rep = sub.add_parser("reproduce", parents=[common], help="run a reproduction pipeline")
    rep.add_argument("target", choices=["corollary1", "theorem2"])
    srch = sub.add_parser("search", parents=[common], help="search for a zero-error code pair")
    srch.add_argument("--graph", required=True, help="l0 | l0sq | ln | path to a JSON file")
    exp = sub.add_parser("export", parents=[common], help="export fixtures as JSON")
    exp.add_argument("--what", required=True)
    sub.add_parser("povm-check", parents=[common], help="indistinguishable-subspace checks")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    env_threads = os.environ.get("ZEROGRAPH_THREADS")
    threads = int(env_threads) if env_threads else (args.threads or default_threads())
    cfg = RunConfig(command=args.command, n=args.n, t_values=list(args.t_values), starts=args.starts,
                    seed=args.seed, output_path=args.output_path, pretty=args.pretty,
                    threads=max(1, threads))
    try:
        if cfg.starts < 1:
            raise UsageError("--starts must be >= 1")
        if args.command == "reproduce":
            return cmd_reproduce(cfg, args.target)
        if args.command == "search":
            return cmd_search(cfg, args.graph)
        if args.command == "export":
            return cmd_export(cfg, args.what)
        return cmd_povm_check(cfg)
    except UsageError as exc:
        print(f"zerograph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"zerograph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
