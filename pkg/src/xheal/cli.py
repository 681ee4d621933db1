"""Command line entry point: ``python -m xheal`` / ``xheal``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional, Sequence

from .errors import ConfigError, XhealError
from .harness import EXIT_CONFIG, EXIT_INVARIANT, EXIT_OK, RunConfig, emit, run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="xheal",
        description="Replay adversarial insertions/deletions against a self-healing network "
                    "and check its degree, connectivity, expansion and cost guarantees.",
    )
    p.add_argument("--seed", type=int, default=0, help="run seed (overridden by $XHEAL_SEED)")
    p.add_argument("--kappa", type=int, default=8, help="cloud expander degree, even, >= 4")
    p.add_argument("--n0", type=int, default=64, help="initial node count")
    p.add_argument("--topology", default="random-regular:4",
                   help="cycle | path | clique | star | random-regular[:k] | from-trace")
    p.add_argument("--steps", type=int, default=100, help="number of adversary events")
    p.add_argument("--strategy", default="churn",
                   help="churn[:p_insert] | random-delete | max-degree | star[:k] | trace")
    p.add_argument("--trace", metavar="FILE", help="trace file (I <id> <nbrs> / D <id> lines)")
    p.add_argument("--healer", default="xheal", choices=["xheal", "treeheal", "noheal"])
    p.add_argument("--metrics-every", type=int, default=10, help="metrics sampling period")
    p.add_argument("--exact-cutoff", type=int, default=20, help="largest n for exact expansion")
    p.add_argument("--max-alive", type=int, default=None, help="cap on alive nodes for churn")
    p.add_argument("--csv", metavar="FILE", help="metrics CSV output")
    p.add_argument("--jsonl", metavar="FILE", help="per-event repair log output")
    p.add_argument("--violation-dump", metavar="FILE",
                   help="where to write the graph snapshot if an invariant fails (default: stderr)")
    return p


def config_from_args(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    seed = args.seed
    if environ.get("XHEAL_SEED"):
        try:
            seed = int(environ["XHEAL_SEED"])
        except ValueError:
            raise ConfigError(f"XHEAL_SEED is not an integer: {environ['XHEAL_SEED']!r}") from None
    strategy = args.strategy
    if args.trace and args.strategy == "churn" and args.topology != "from-trace":
        strategy = "trace"
    if args.topology == "from-trace" and args.strategy == "churn" and args.trace:
        strategy = "trace"
    return RunConfig(
        seed=seed, kappa=args.kappa, n0=args.n0, topology=args.topology, steps=args.steps,
        strategy=strategy, trace=args.trace, healer=args.healer, metrics_every=args.metrics_every,
        exact_cutoff=args.exact_cutoff, max_alive=args.max_alive,
        csv_path=args.csv, jsonl_path=args.jsonl,
    )


def _finite(x: float):
    """Rounded value, or None for an infinite ratio (e.g. a disconnected pair)."""
    return round(x, 6) if math.isfinite(x) else None


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = run(cfg)
        emit(result)
    except XhealError as exc:
        print(f"xheal: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"xheal: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if result.violation is not None:
        print(f"xheal: invariant violated: {result.violation}", file=sys.stderr)
        dump = json.dumps(result.violation.snapshot, sort_keys=True)
        if args.violation_dump:
            with open(args.violation_dump, "w", encoding="utf-8") as fh:
                fh.write(dump + "\n")
        else:
            print(dump, file=sys.stderr)
        return EXIT_INVARIANT

    fin = result.final
    summary = {"steps": result.steps_run, "deletions": result.ledger.deletions, **result.cost_checks}
    if fin is not None:
        summary.update(n=fin.n, m=fin.m, connected=fin.connected,
                       stretch_max=_finite(fin.stretch_max), degree_ratio_max=_finite(fin.degree_ratio_max))
    print(json.dumps(summary, sort_keys=True, allow_nan=False))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
