"""Dynamic random expander built from ``d`` Hamilton cycles (an H-graph).

Small member sets (at most ``2d + 1`` nodes) are kept as a clique instead.
Above that threshold every level is a cyclic successor/predecessor map over
all members, so the multigraph is exactly ``2d``-regular.  Inserting splices a
node after an independently chosen random member on each level; deleting
joins the node's predecessor and successor.  Both are O(d).
"""

from __future__ import annotations

import random
from itertools import combinations
from typing import Iterable

from .errors import AlreadyMember, EmptyMemberSet, NotMember, WouldEmpty
from .graph import NodeId, edge_key

CLIQUE = "clique"
RINGS = "rings"


class HGraph:
    def __init__(self, d: int):
        if d < 1:
            raise ValueError("need at least one Hamilton cycle level")
        self.d = d
        self.members: list[NodeId] = []
        self.mode = CLIQUE
        self.succ: list[dict[NodeId, NodeId]] = []
        self.pred: list[dict[NodeId, NodeId]] = []
        self.initial_size = 0

    @property
    def kappa(self) -> int:
        return 2 * self.d

    @classmethod
    def build_random(cls, members: Iterable[NodeId], d: int, rng: random.Random) -> "HGraph":
        h = cls(d)
        h._build(list(members), rng)
        return h

    def _build(self, members, rng):
        if not members:
            raise EmptyMemberSet("cannot build an H-graph over no nodes")
        if len(set(members)) != len(members):
            raise AlreadyMember("duplicate members")
        self.members = list(members)
        self.initial_size = len(members)
        self.succ, self.pred = [], []
        if len(members) <= self.kappa + 1:
            self.mode = CLIQUE
            return
        self.mode = RINGS
        for _ in range(self.d):
            order = list(members)
            rng.shuffle(order)
            succ = {u: order[(i + 1) % len(order)] for i, u in enumerate(order)}
            self.succ.append(succ)
            self.pred.append({v: u for u, v in succ.items()})

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, node) -> bool:
        return node in self.succ[0] if self.mode == RINGS else node in self.members

    def insert(self, u: NodeId, rng: random.Random) -> None:
        if u in self:
            raise AlreadyMember(f"{u} is already a member")
        if self.mode == CLIQUE:
            self.members.append(u)
            if len(self.members) > self.kappa + 1:
                self._build(self.members, rng)
            return
        for succ, pred in zip(self.succ, self.pred):
            v = rng.choice(self.members)
            w = succ[v]
            succ[v], succ[u] = u, w
            pred[w], pred[u] = u, v
        self.members.append(u)

    def delete(self, u: NodeId) -> None:
        if u not in self:
            raise NotMember(f"{u} is not a member")
        if len(self.members) == 1:
            raise WouldEmpty("cannot delete the last member")
        self.members.remove(u)
        if self.mode == RINGS:
            for succ, pred in zip(self.succ, self.pred):
                p, s = pred.pop(u), succ.pop(u)
                succ[p] = s
                pred[s] = p
            if len(self.members) <= self.kappa + 1:
                self.mode = CLIQUE
                self.succ, self.pred = [], []

    def needs_rebuild(self) -> bool:
        # strict: fewer than half of the members present at the last build
        return 2 * len(self.members) < self.initial_size

    def rebuild(self, rng: random.Random) -> None:
        self._build(self.members, rng)

    def edge_set(self) -> set[tuple[NodeId, NodeId]]:
        if self.mode == CLIQUE:
            return {edge_key(u, v) for u, v in combinations(self.members, 2)}
        return {edge_key(u, v) for succ in self.succ for u, v in succ.items() if u != v}

    def multidegree(self, u: NodeId) -> int:
        if self.mode == CLIQUE:
            return len(self.members) - 1
        return 2 * self.d

    def levels(self) -> list[list[NodeId]]:
        """Each level as a cyclic order starting from its smallest member."""
        out = []
        for succ in self.succ:
            start = min(succ)
            order, u = [start], succ[start]
            while u != start:
                order.append(u)
                u = succ[u]
            out.append(order)
        return out

    def state(self):
        return (self.mode, tuple(tuple(sorted(s.items())) for s in self.succ), frozenset(self.members))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "d": self.d,
            "members": sorted(self.members),
            "levels": self.levels(),
            "initial_size": self.initial_size,
        }
