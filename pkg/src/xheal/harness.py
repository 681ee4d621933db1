"""Experiment driver: adversary -> healer -> checks -> CSV / JSONL.

A run is fully determined by its :class:`RunConfig`.  The seed is split into
independent generator streams for the topology, the adversary and the
algorithm, so the adversary cannot observe the healer's coin flips.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import random
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import networkx as nx

from . import metrics
from .adversary import (
    AdversaryView,
    ChurnMix,
    Delete,
    Insert,
    MaxDegreeDelete,
    RandomDelete,
    StarAttack,
    Strategy,
    TraceReplay,
    parse_trace,
)
from .baselines import NoHeal, TreeHeal
from .costs import CostLedger, clog2
from .errors import ConfigError, EmptyGraph, ExhaustedTrace, InvariantViolation, TraceError
from .graph import HealedGraph, is_connected
from .healer import RepairReport, Xheal

HEALERS = {"xheal": Xheal, "treeheal": TreeHeal, "noheal": NoHeal}
TOPOLOGIES = ("cycle", "clique", "star", "path", "random-regular", "from-trace")
STRATEGY_NAMES = ("churn", "random-delete", "max-degree", "star", "trace")

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2


@dataclass
class RunConfig:
    seed: int = 0
    kappa: int = 8
    n0: int = 64
    # "cycle" | "clique" | "star" | "path" | "random-regular[:k]" | "from-trace"
    topology: str = "random-regular:4"
    steps: int = 100
    # "churn[:p_insert]" | "random-delete" | "max-degree" | "star[:k]" | "trace"
    strategy: str = "churn"
    trace: Optional[str] = None
    trace_text: Optional[str] = None
    healer: str = "xheal"
    metrics_every: int = 10
    exact_cutoff: int = metrics.EXACT_CUTOFF
    min_alive: int = 4
    max_alive: Optional[int] = None
    max_insert_degree: int = 4
    check_every: int = 1
    csv_path: Optional[str] = None
    jsonl_path: Optional[str] = None

    def validate(self) -> None:
        if self.kappa < 4 or self.kappa % 2:
            raise ConfigError(f"kappa must be an even integer >= 4, got {self.kappa}")
        if self.metrics_every < 1:
            raise ConfigError("metrics_every must be >= 1")
        if self.check_every < 1:
            raise ConfigError("check_every must be >= 1")
        if self.steps < 0:
            raise ConfigError("steps must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.healer not in HEALERS:
            raise ConfigError(f"unknown healer {self.healer!r}; choose from {sorted(HEALERS)}")
        topo, _ = _split(self.topology)
        if topo not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}")
        if topo != "from-trace" and self.n0 < 2:
            raise ConfigError("n0 must be at least 2")
        strat, _ = _split(self.strategy)
        if strat not in STRATEGY_NAMES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if (strat == "trace" or topo == "from-trace") and self.trace is None and self.trace_text is None:
            raise ConfigError("a trace file is required for this strategy/topology")


def _split(text: str) -> tuple[str, Optional[str]]:
    name, _, arg = text.partition(":")
    return name, (arg or None)


def _num(arg: Optional[str], default, kind, what):
    if arg is None:
        return default
    try:
        return kind(arg)
    except ValueError:
        raise ConfigError(f"bad {what} parameter {arg!r}") from None


def derive_rngs(seed: int) -> dict[str, random.Random]:
    """Independent named streams derived from one seed."""
    return {name: random.Random(f"{seed}:{name}") for name in ("topology", "adversary", "algorithm")}


def build_topology(name: str, n0: int, rng: random.Random) -> HealedGraph:
    topo, arg = _split(name)
    nodes = range(n0)
    if topo == "cycle":
        edges = [(i, (i + 1) % n0) for i in nodes] if n0 > 2 else [(0, 1)]
    elif topo == "path":
        edges = [(i, i + 1) for i in range(n0 - 1)]
    elif topo == "clique":
        edges = [(i, j) for i in nodes for j in range(i + 1, n0)]
    elif topo == "star":
        edges = [(0, i) for i in range(1, n0)]
    elif topo == "random-regular":
        k = _num(arg, 4, int, "degree")
        if k < 1 or k >= n0 or (k * n0) % 2:
            raise ConfigError(f"no {k}-regular graph on {n0} nodes")
        for _ in range(100):
            gx = nx.random_regular_graph(k, n0, seed=rng.randrange(2**32))
            if nx.is_connected(gx):
                break
        else:
            raise ConfigError(f"could not draw a connected {k}-regular graph on {n0} nodes")
        edges = sorted(tuple(sorted(e)) for e in gx.edges())
    else:
        raise ConfigError(f"topology {name!r} cannot be built directly")
    return HealedGraph.from_edges(n0, edges)


def _read_trace(cfg: RunConfig) -> str:
    if cfg.trace_text is not None:
        return cfg.trace_text
    try:
        return Path(cfg.trace).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read trace {cfg.trace}: {exc}") from None


def _setup(cfg: RunConfig, rngs) -> tuple[HealedGraph, Strategy]:
    topo, _ = _split(cfg.topology)
    strat, arg = _split(cfg.strategy)
    events = None
    if topo == "from-trace":
        # leading inserts grow G_0 from a single seed node 0
        events = parse_trace(_read_trace(cfg), initial_nodes=[0])
        g = HealedGraph.from_edges(1, [])
        k = 0
        while k < len(events) and isinstance(events[k], Insert):
            g.add_node(events[k].id, events[k].neighbors)
            k += 1
        events = events[k:]
    else:
        g = build_topology(cfg.topology, cfg.n0, rngs["topology"])
        if strat == "trace":
            events = parse_trace(_read_trace(cfg), initial_nodes=range(cfg.n0))

    if strat == "trace":
        strategy: Strategy = TraceReplay(events)
    elif strat == "churn":
        p = _num(arg, 0.5, float, "insert probability")
        if not 0 <= p <= 1:
            raise ConfigError("insert probability must be within [0, 1]")
        strategy = ChurnMix(p, cfg.min_alive, cfg.max_alive, cfg.max_insert_degree)
    elif strat == "random-delete":
        strategy = RandomDelete()
    elif strat == "max-degree":
        strategy = MaxDegreeDelete()
    else:
        strategy = StarAttack(_num(arg, 8, int, "hub degree"))
    return g, strategy


@dataclass
class RunResult:
    config: RunConfig
    final: Optional[metrics.MetricsReport]
    csv_rows: list[list[str]]
    records: list[dict]
    reports: list[RepairReport]
    ledger: CostLedger
    graph: HealedGraph
    healer: object
    steps_run: int = 0
    max_alive: int = 0
    # alive node count just before each event, aligned with ``reports``
    alive_before: list[int] = field(default_factory=list)
    violation: Optional[InvariantViolation] = None
    exit_code: int = EXIT_OK
    cost_checks: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(metrics.CSV_COLUMNS)
        w.writerows(self.csv_rows)
        return buf.getvalue()

    def jsonl_text(self) -> str:
        return "".join(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n" for r in self.records)


def check_event(healer, report: RepairReport, n_before: int) -> None:
    """Invariants asserted after an event; raises InvariantViolation."""
    g = healer.graph
    try:
        healer.check_invariants()
    except AssertionError as exc:
        raise InvariantViolation(f"t={report.t}: structural invariant: {exc}", g.snapshot()) from None
    if not isinstance(healer, Xheal):
        return
    bad = metrics.degree_bound_violations(g, healer.kappa)
    if bad:
        raise InvariantViolation(f"t={report.t}: degree bound broken at nodes {bad}", g.snapshot())
    if not is_connected(g):
        raise InvariantViolation(f"t={report.t}: healed graph disconnected", g.snapshot())
    if report.deleted is not None and report.rounds > clog2(n_before) + 3:
        raise InvariantViolation(
            f"t={report.t}: {report.rounds} rounds exceed ceil(log2 {n_before}) + 3", g.snapshot())


def message_budget(kappa: int, n: int, degrees) -> float:
    """8 * kappa * log2(n) * sum of deleted nodes' degrees."""
    return 8 * kappa * math.log2(max(n, 2)) * sum(degrees)


def run(cfg: RunConfig) -> RunResult:
    """Execute one experiment.  Invariant failures end the run with exit code 1."""
    cfg.validate()
    rngs = derive_rngs(cfg.seed)
    g, strategy = _setup(cfg, rngs)
    healer = HEALERS[cfg.healer](g, kappa=cfg.kappa, rng=rngs["algorithm"])
    ledger = CostLedger()
    res = RunResult(cfg, None, [], [], [], ledger, g, healer, max_alive=len(g))
    metric_rng = random.Random(f"{cfg.seed}:metrics")
    connected0 = is_connected(g)

    def sample(t):
        rep = metrics.measure(g, cfg.exact_cutoff, rng=metric_rng)
        res.final = rep
        res.csv_rows.append(metrics.csv_row(t, rep, ledger))

    t = 0
    try:
        for t in range(1, cfg.steps + 1):
            try:
                ev = strategy.next_event(AdversaryView.of(g), rngs["adversary"])
            except (ExhaustedTrace, EmptyGraph):
                t -= 1
                break
            n_before = len(g)
            if isinstance(ev, Insert):
                report = healer.on_insert(ev.id, ev.neighbors)
                ledger.record(0, 0)
            else:
                report = healer.on_delete(ev.id)
                ledger.record(report.rounds, report.messages, report.black_degree)
            res.reports.append(report)
            res.alive_before.append(n_before)
            res.records.append(report.to_record())
            res.max_alive = max(res.max_alive, len(g))
            if connected0 and t % cfg.check_every == 0:
                check_event(healer, report, n_before)
            if t % cfg.metrics_every == 0:
                sample(t)
    except InvariantViolation as exc:
        res.violation = exc
        res.exit_code = EXIT_INVARIANT
    res.steps_run = t
    if res.violation is None and t > 0 and (not res.csv_rows or res.csv_rows[-1][0] != str(t)):
        sample(t)
    res.cost_checks = {
        "max_rounds": ledger.max_rounds,
        "total_messages": ledger.total_messages,
        "message_budget": message_budget(cfg.kappa, res.max_alive, ledger.deleted_degrees),
    }
    log = getattr(healer, "combine_log", [])
    res.cost_checks["combines"] = len(log)
    # combines preceded by at least N/2 non-combining repairs (reported, not asserted)
    res.cost_checks["combines_amortized"] = sum(1 for size, prior in log if 2 * prior >= size)
    return res


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(result: RunResult, csv_path: Optional[str] = None, jsonl_path: Optional[str] = None) -> None:
    """Write the CSV and JSONL outputs, each replaced atomically."""
    csv_path = csv_path or result.config.csv_path
    jsonl_path = jsonl_path or result.config.jsonl_path
    if csv_path:
        _atomic_write(csv_path, result.csv_text())
    if jsonl_path:
        _atomic_write(jsonl_path, result.jsonl_text())


__all__ = [
    "RunConfig", "RunResult", "run", "emit", "build_topology", "derive_rngs", "check_event",
    "message_budget", "TraceError", "EXIT_OK", "EXIT_INVARIANT", "EXIT_CONFIG",
]
