"""Comparison healers.

``TreeHeal`` stands in for tree-based repair schemes: the neighbours of a
deleted node are linked by a balanced binary tree.  Its surrogate edges carry
the ``TREE`` label rather than ``BLACK`` because they are not part of G'.
``NoHeal`` just lets the deletion happen.
"""

from __future__ import annotations

from typing import Iterable

from .costs import clog2
from .graph import TREE, HealedGraph, NodeId
from .healer import CASE1, INSERT, RepairReport


class NoHeal:
    name = "noheal"

    def __init__(self, graph: HealedGraph, kappa: int = 8, rng=None):
        self.graph = graph
        self.kappa = kappa
        self.t = 0

    def on_insert(self, node: NodeId, neighbors: Iterable[NodeId]) -> RepairReport:
        nbrs = set(neighbors)
        self.graph.add_node(node, nbrs)
        self.t += 1
        return RepairReport(t=self.t, case=INSERT, deleted=None, edges_added=len(nbrs))

    def on_delete(self, v: NodeId) -> RepairReport:
        g = self.graph
        black_degree = g.shadow.degree(v)
        destroyed0 = g.edges_destroyed
        g.remove_node(v)
        self.t += 1
        return RepairReport(t=self.t, case="none", deleted=v,
                            edges_removed=g.edges_destroyed - destroyed0, black_degree=black_degree)

    def check_invariants(self) -> None:
        self.graph.check()


def heap_tree_edges(nodes: list) -> list[tuple]:
    """Edges of the complete binary tree laid out in heap order over ``nodes``."""
    return [(nodes[(i - 1) // 2], nodes[i]) for i in range(1, len(nodes))]


class TreeHeal(NoHeal):
    """Replace a deleted node by a balanced binary tree over its neighbours."""

    name = "treeheal"

    def on_delete(self, v: NodeId) -> RepairReport:
        g = self.graph
        black_degree = g.shadow.degree(v)
        created0, destroyed0 = g.edges_created, g.edges_destroyed
        ctx = g.remove_node(v)
        self.t += 1
        nbrs = sorted(ctx.neighbors)
        for a, b in heap_tree_edges(nbrs):
            g.add_label(a, b, TREE)
        m = len(nbrs)
        return RepairReport(
            t=self.t,
            case=CASE1,
            deleted=v,
            edges_added=g.edges_created - created0,
            edges_removed=g.edges_destroyed - destroyed0,
            rounds=clog2(m) if m > 1 else 0,
            messages=m if m > 1 else 0,
            black_degree=black_degree,
        )
