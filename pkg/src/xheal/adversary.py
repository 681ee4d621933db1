"""Adversary event streams: online strategies and replayed traces.

Strategies see only an :class:`AdversaryView` -- the alive node set and the
uncoloured adjacency of the healed graph.  Edge labels, clouds, leaders and
the healer's random generator are never exposed, so an adversary cannot
adapt to the algorithm's coin flips.

Trace format, one event per line (UTF-8)::

    I <id> <nbr>,<nbr>,...     insert node <id> wired to the listed nodes
    D <id>                     delete node <id>
    # anything                 comment
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import (
    DuplicateInsert,
    EmptyGraph,
    ExhaustedTrace,
    TraceSyntaxError,
    UnknownNodeReference,
)
from .graph import HealedGraph, NodeId

U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Insert:
    id: NodeId
    neighbors: frozenset

    def __str__(self) -> str:
        return f"I {self.id} " + ",".join(str(x) for x in sorted(self.neighbors))


@dataclass(frozen=True)
class Delete:
    id: NodeId

    def __str__(self) -> str:
        return f"D {self.id}"


AdversaryEvent = Union[Insert, Delete]


@dataclass(frozen=True)
class AdversaryView:
    """Topology-only view of G_t handed to strategies."""

    alive: frozenset
    adjacency: Mapping[NodeId, frozenset]
    next_id: NodeId

    @classmethod
    def of(cls, g: HealedGraph) -> "AdversaryView":
        return cls(
            alive=frozenset(g.nodes),
            adjacency={u: frozenset(nb) for u, nb in g.adj.items()},
            next_id=g.next_id,
        )

    def degree(self, u: NodeId) -> int:
        return len(self.adjacency[u])

    def to_dict(self) -> dict:
        return {
            "alive": sorted(self.alive),
            "adjacency": {str(u): sorted(nb) for u, nb in sorted(self.adjacency.items())},
            "next_id": self.next_id,
        }


def _require_nodes(view: AdversaryView) -> list:
    if not view.alive:
        raise EmptyGraph("no alive node left to act on")
    return sorted(view.alive)


def _random_insert(view: AdversaryView, rng: random.Random, lo: int, hi: int) -> Insert:
    alive = _require_nodes(view)
    k = rng.randint(min(lo, len(alive)), min(hi, len(alive)))
    return Insert(view.next_id, frozenset(rng.sample(alive, k)))


class Strategy:
    name = "strategy"

    def next_event(self, view: AdversaryView, rng: random.Random) -> AdversaryEvent:
        raise NotImplementedError


class RandomDelete(Strategy):
    name = "random-delete"

    def next_event(self, view, rng):
        return Delete(rng.choice(_require_nodes(view)))


class MaxDegreeDelete(Strategy):
    """Delete a highest-degree node; ties go to the lowest id."""

    name = "max-degree"

    def next_event(self, view, rng):
        alive = _require_nodes(view)
        return Delete(min(alive, key=lambda u: (-view.degree(u), u)))


@dataclass
class StarAttack(Strategy):
    """Insert a hub wired to ``k`` random nodes, delete it on the next step."""

    k: int = 8
    name = "star"
    _hub: Optional[NodeId] = field(default=None, repr=False)

    def next_event(self, view, rng):
        if self._hub is not None and self._hub in view.alive:
            hub, self._hub = self._hub, None
            return Delete(hub)
        ev = _random_insert(view, rng, self.k, self.k)
        self._hub = ev.id
        return ev


@dataclass
class ChurnMix(Strategy):
    """Insert with probability ``p_insert``, else delete a uniform random node.

    The alive count is kept within ``[min_alive, max_alive]``; inserted nodes
    attach to between 1 and ``max_insert_degree`` uniform random nodes.
    """

    p_insert: float = 0.5
    min_alive: int = 4
    max_alive: Optional[int] = None
    max_insert_degree: int = 4
    name = "churn"

    def next_event(self, view, rng):
        alive = _require_nodes(view)
        coin = rng.random()
        if len(alive) <= self.min_alive:
            insert = True
        elif self.max_alive is not None and len(alive) >= self.max_alive:
            insert = False
        else:
            insert = coin < self.p_insert
        if insert:
            return _random_insert(view, rng, 1, self.max_insert_degree)
        return Delete(rng.choice(alive))


@dataclass
class TraceReplay(Strategy):
    events: Sequence[AdversaryEvent] = ()
    name = "trace"
    pos: int = 0

    def next_event(self, view, rng):
        if self.pos >= len(self.events):
            raise ExhaustedTrace(f"trace has only {len(self.events)} events")
        ev = self.events[self.pos]
        self.pos += 1
        return ev


def next_event(strategy: Strategy, view: AdversaryView, rng_adv: random.Random) -> AdversaryEvent:
    return strategy.next_event(view, rng_adv)


# -- trace files ------------------------------------------------------------------

_ID = re.compile(r"[0-9]+")


def _parse_id(tok: str, line: int, col: int) -> NodeId:
    if not _ID.fullmatch(tok):
        raise TraceSyntaxError(f"expected a decimal node id, got {tok!r}", line, col)
    val = int(tok)
    if val > U64_MAX:
        raise TraceSyntaxError(f"node id {tok} exceeds 64 bits", line, col)
    return val


def _tokens(text: str):
    """(token, 1-based column) pairs of a whitespace-split line."""
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", text)]


def parse_trace(text: str, initial_nodes: Optional[Iterable[NodeId]] = None) -> list[AdversaryEvent]:
    """Parse and validate a trace.

    ``initial_nodes`` are the nodes alive before the first event.  When
    omitted they are taken to be ``0 .. k-1`` where ``k`` is the smallest
    inserted id (original nodes are numbered first), or none if the trace
    inserts nothing.
    """
    lines = text.splitlines()
    parsed = []
    for ln, raw in enumerate(lines, start=1):
        toks = _tokens(raw)
        if not toks or toks[0][0].startswith("#"):
            continue
        op, col = toks[0]
        if op == "I":
            if len(toks) != 3:
                raise TraceSyntaxError("insert needs: I <id> <nbr>(,<nbr>)*", ln, col)
            nid = _parse_id(toks[1][0], ln, toks[1][1])
            nbr_tok, c0 = toks[2]
            nbrs = []
            offset = 0
            for part in nbr_tok.split(","):
                nbrs.append((_parse_id(part, ln, c0 + offset), c0 + offset))
                offset += len(part) + 1
            parsed.append((ln, "I", nid, toks[1][1], nbrs))
        elif op == "D":
            if len(toks) != 2:
                raise TraceSyntaxError("delete needs: D <id>", ln, col)
            parsed.append((ln, "D", _parse_id(toks[1][0], ln, toks[1][1]), toks[1][1], None))
        else:
            raise TraceSyntaxError(f"unknown event {op!r} (expected I, D or #)", ln, col)

    if initial_nodes is None:
        inserted = [p[2] for p in parsed if p[1] == "I"]
        initial_nodes = range(min(inserted)) if inserted else ()
    alive = set(initial_nodes)
    used = set(alive)
    high = max(used, default=-1)
    events: list[AdversaryEvent] = []
    for ln, op, nid, col, nbrs in parsed:
        if op == "I":
            if nid in used:
                raise DuplicateInsert(f"node {nid} was already used", ln, col)
            if nid < high:
                raise DuplicateInsert(f"node {nid} is not fresh: ids must increase (last {high})", ln, col)
            for w, wc in nbrs:
                if w not in alive:
                    raise UnknownNodeReference(f"neighbor {w} is not alive", ln, wc)
                if w == nid:
                    raise TraceSyntaxError(f"node {nid} lists itself as a neighbor", ln, wc)
            alive.add(nid)
            used.add(nid)
            high = nid
            events.append(Insert(nid, frozenset(w for w, _ in nbrs)))
        else:
            if nid not in alive:
                raise UnknownNodeReference(f"node {nid} is not alive", ln, col)
            alive.discard(nid)
            events.append(Delete(nid))
    return events


def format_trace(events: Iterable[AdversaryEvent]) -> str:
    return "".join(f"{ev}\n" for ev in events)


STRATEGIES = {
    "random-delete": RandomDelete,
    "max-degree": MaxDegreeDelete,
    "star": StarAttack,
    "churn": ChurnMix,
}
