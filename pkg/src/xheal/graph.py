"""Live healed graph G_t and the insertions-only shadow graph G'_t.

Every edge of the live graph carries a *label set*: ``BLACK`` for original or
adversary-inserted edges, plus one :class:`CloudId` per expander cloud that
wants the edge.  An edge exists exactly while its label set is nonempty, so a
cloud can claim an existing black edge without creating a parallel edge and
releasing the claim later leaves the black edge in place.
"""

from __future__ import annotations

import copy
import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping, Union

from .errors import (
    DeadEndpoint,
    DuplicateNode,
    EmptyNeighborSet,
    NoSuchEdge,
    NoSuchLabel,
    SelfLoop,
    UnknownNeighbor,
    UnknownNode,
)

NodeId = int

BLACK = "black"
# surrogate edges of the tree-heal baseline; never part of G'
TREE = "tree"


class CloudKind(Enum):
    PRIMARY = "P"
    SECONDARY = "S"


@dataclass(frozen=True, order=True)
class CloudId:
    num: int
    kind: CloudKind = field(compare=False)

    @property
    def is_primary(self) -> bool:
        return self.kind is CloudKind.PRIMARY

    def __str__(self) -> str:
        return f"{self.kind.value}{self.num}"


Label = Union[str, CloudId]


def label_str(label: Label) -> str:
    return label if isinstance(label, str) else str(label)


def _label_key(label: Label):
    if isinstance(label, CloudId):
        return (1, label.num)
    return (0, label)


def edge_key(u: NodeId, v: NodeId) -> tuple[NodeId, NodeId]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class DeletionContext:
    """What a deleted node was attached to, used to dispatch the repair case."""

    node: NodeId
    black_nbrs: frozenset[NodeId]
    primary_clouds_hit: tuple[CloudId, ...]
    secondary_clouds_hit: tuple[CloudId, ...]
    neighbors: frozenset[NodeId] = frozenset()

    @property
    def only_black(self) -> bool:
        return not self.primary_clouds_hit and not self.secondary_clouds_hit


class ShadowGraph:
    """Append-only graph of original nodes and every insertion (G'_t).

    Deleted nodes stay as path intermediates; only their ``alive`` flag changes.
    """

    def __init__(self):
        self.alive: dict[NodeId, bool] = {}
        self.adj: dict[NodeId, set[NodeId]] = {}

    def __contains__(self, node) -> bool:
        return node in self.alive

    def __len__(self) -> int:
        return len(self.alive)

    def add_node(self, node: NodeId, neighbors: Iterable[NodeId]) -> None:
        self.alive[node] = True
        self.adj[node] = set()
        for w in neighbors:
            self.adj[node].add(w)
            self.adj[w].add(node)

    def mark_dead(self, node: NodeId) -> None:
        self.alive[node] = False

    def degree(self, node: NodeId) -> int:
        return len(self.adj[node])

    def num_edges(self) -> int:
        return sum(len(s) for s in self.adj.values()) // 2

    def adjacency(self) -> dict[NodeId, set[NodeId]]:
        return self.adj

    def copy(self) -> "ShadowGraph":
        return copy.deepcopy(self)


class HealedGraph:
    """The live network G_t, paired with its shadow graph.

    ``adj[u][v]`` and ``adj[v][u]`` reference the *same* label set object.
    """

    def __init__(self):
        self.nodes: set[NodeId] = set()
        self.adj: dict[NodeId, dict[NodeId, set[Label]]] = {}
        self.shadow = ShadowGraph()
        # monotone counters, used to report per-repair edge churn
        self.edges_created = 0
        self.edges_destroyed = 0
        self._max_id = -1

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[NodeId, NodeId]]) -> "HealedGraph":
        """Initial graph G_0 on nodes ``0..n-1``; all edges black."""
        g = cls()
        for u in range(n):
            g.nodes.add(u)
            g.adj[u] = {}
            g.shadow.add_node(u, ())
        g._max_id = n - 1
        for u, v in edges:
            if u == v:
                raise SelfLoop(f"self-loop at {u}")
            if v in g.adj[u]:
                continue
            g._new_edge(u, v, BLACK)
            g.shadow.adj[u].add(v)
            g.shadow.adj[v].add(u)
        return g

    @property
    def next_id(self) -> NodeId:
        return self._max_id + 1

    def add_node(self, node: NodeId, neighbors: Iterable[NodeId]) -> None:
        nbrs = set(neighbors)
        if node in self.shadow:
            raise DuplicateNode(f"node {node} already used")
        if not nbrs:
            raise EmptyNeighborSet(f"insert of {node} needs at least one neighbor")
        missing = sorted(w for w in nbrs if w not in self.nodes)
        if missing:
            raise UnknownNeighbor(f"neighbors not alive: {missing}")
        if node in nbrs:
            raise SelfLoop(f"self-loop at {node}")
        self.nodes.add(node)
        self.adj[node] = {}
        self.shadow.add_node(node, nbrs)
        self._max_id = max(self._max_id, node)
        for w in sorted(nbrs):
            self._new_edge(node, w, BLACK)

    def remove_node(self, node: NodeId) -> DeletionContext:
        if node not in self.nodes:
            raise UnknownNode(f"node {node} is not alive")
        black, primary, secondary = set(), set(), set()
        for w, labels in self.adj[node].items():
            for lab in labels:
                if lab == BLACK:
                    black.add(w)
                elif isinstance(lab, CloudId):
                    (primary if lab.is_primary else secondary).add(lab)
        nbrs = frozenset(self.adj[node])
        for w in nbrs:
            del self.adj[w][node]
        self.edges_destroyed += len(nbrs)
        del self.adj[node]
        self.nodes.discard(node)
        self.shadow.mark_dead(node)
        return DeletionContext(
            node=node,
            black_nbrs=frozenset(black),
            primary_clouds_hit=tuple(sorted(primary)),
            secondary_clouds_hit=tuple(sorted(secondary)),
            neighbors=nbrs,
        )

    # -- labels -------------------------------------------------------------

    def _new_edge(self, u, v, label):
        labels = {label}
        self.adj[u][v] = labels
        self.adj[v][u] = labels
        self.edges_created += 1

    def _check_endpoints(self, u, v):
        if u == v:
            raise SelfLoop(f"self-loop at {u}")
        for x in (u, v):
            if x not in self.nodes:
                raise DeadEndpoint(f"node {x} is not alive")

    def add_label(self, u: NodeId, v: NodeId, label: Label) -> None:
        self._check_endpoints(u, v)
        labels = self.adj[u].get(v)
        if labels is None:
            self._new_edge(u, v, label)
        else:
            labels.add(label)

    def remove_label(self, u: NodeId, v: NodeId, label: Label) -> None:
        labels = self.adj.get(u, {}).get(v)
        if labels is None:
            raise NoSuchEdge(f"no edge ({u}, {v})")
        if label not in labels:
            raise NoSuchLabel(f"edge ({u}, {v}) has no label {label_str(label)}")
        labels.discard(label)
        if not labels:
            del self.adj[u][v]
            del self.adj[v][u]
            self.edges_destroyed += 1

    def labels(self, u: NodeId, v: NodeId) -> frozenset:
        labels = self.adj.get(u, {}).get(v)
        if labels is None:
            raise NoSuchEdge(f"no edge ({u}, {v})")
        return frozenset(labels)

    # -- queries -------------------------------------------------------------

    def __contains__(self, node) -> bool:
        return node in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        return v in self.adj.get(u, ())

    def degree(self, node: NodeId) -> int:
        return len(self.adj[node])

    def neighbors(self, node: NodeId):
        return self.adj[node].keys()

    def num_edges(self) -> int:
        return sum(len(d) for d in self.adj.values()) // 2

    def edges(self) -> Iterator[tuple[NodeId, NodeId, frozenset]]:
        for u in sorted(self.adj):
            for v in sorted(self.adj[u]):
                if u < v:
                    yield u, v, frozenset(self.adj[u][v])

    def edges_with_label(self, label: Label) -> set[tuple[NodeId, NodeId]]:
        return {(u, v) for u, v, labs in self.edges() if label in labs}

    def adjacency(self) -> dict[NodeId, set[NodeId]]:
        return {u: set(nb) for u, nb in self.adj.items()}

    def copy(self) -> "HealedGraph":
        return copy.deepcopy(self)

    def check(self) -> None:
        """Assert symmetry, simplicity and the black-edge/shadow agreement."""
        for u, nbrs in self.adj.items():
            assert u in self.nodes, f"dangling adjacency row {u}"
            for v, labels in nbrs.items():
                assert u != v, f"self-loop at {u}"
                assert v in self.nodes, f"edge to dead node {v}"
                assert self.adj[v][u] is labels, f"asymmetric edge ({u}, {v})"
                assert labels, f"empty label set on ({u}, {v})"
                if BLACK in labels:
                    assert v in self.shadow.adj[u], f"black edge ({u}, {v}) missing from G'"

    # -- export --------------------------------------------------------------

    def snapshot(self) -> dict:
        alive = sorted(self.nodes)
        return {
            "nodes": sorted(self.shadow.alive),
            "edges": [
                {"u": u, "v": v, "labels": [label_str(x) for x in sorted(labs, key=_label_key)]}
                for u, v, labs in self.edges()
            ],
            "alive": alive,
        }

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":"))


def is_connected(g: Union[HealedGraph, ShadowGraph, Mapping[NodeId, Iterable[NodeId]]]) -> bool:
    """True iff the alive nodes form one component (empty graph counts)."""
    if isinstance(g, HealedGraph):
        adj, nodes = g.adj, g.nodes
    elif isinstance(g, ShadowGraph):
        adj, nodes = g.adj, g.alive.keys()
    else:
        adj, nodes = g, g.keys()
    if not nodes:
        return True
    start = next(iter(nodes))
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(nodes)
