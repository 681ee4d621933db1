"""Simulator and checker for expander-cloud self-healing networks."""

from .adversary import (
    AdversaryView,
    ChurnMix,
    Delete,
    Insert,
    MaxDegreeDelete,
    RandomDelete,
    StarAttack,
    TraceReplay,
    next_event,
    parse_trace,
)
from .baselines import NoHeal, TreeHeal
from .costs import CostLedger
from .graph import BLACK, TREE, CloudId, CloudKind, HealedGraph, ShadowGraph, is_connected
from .harness import RunConfig, RunResult, emit, run
from .healer import Cloud, CloudRegistry, RepairReport, Xheal
from .hgraph import HGraph

__version__ = "0.1.0"

__all__ = [
    "AdversaryView", "ChurnMix", "Delete", "Insert", "MaxDegreeDelete", "RandomDelete",
    "StarAttack", "TraceReplay", "next_event", "parse_trace", "NoHeal", "TreeHeal",
    "CostLedger", "BLACK", "TREE", "CloudId", "CloudKind", "HealedGraph", "ShadowGraph",
    "is_connected", "RunConfig", "RunResult", "emit", "run", "Cloud", "CloudRegistry",
    "RepairReport", "Xheal", "HGraph",
]
