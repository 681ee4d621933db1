"""Expander-cloud self-healing: cloud registry, free nodes and repair cases.

On deletion of ``v`` the repair depends on which edges ``v`` lost:

* only black edges: a new primary cloud (random H-graph or clique) is laid
  over ``v``'s neighbours;
* edges of primary clouds only: each cloud splices ``v`` out, then one free
  node per affected cloud (black neighbours count as singleton clouds) is
  wired into a new secondary cloud;
* an edge of its secondary cloud ``F`` too: ``v`` was the bridge of some
  primary cloud in ``F``; a replacement free node takes its place in ``F``
  and the remaining affected clouds get a secondary cloud of their own.

When clouds run out of free nodes they borrow one from each other
("sharing"); when the participants jointly hold too few free nodes, they are
combined into a single fresh primary cloud.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import costs
from .errors import EmptyMemberSet, NoParticipants, NotBridge, NotPrimary, UnknownCloud
from .graph import BLACK, CloudId, CloudKind, HealedGraph, NodeId, edge_key
from .hgraph import HGraph

PRIMARY = CloudKind.PRIMARY
SECONDARY = CloudKind.SECONDARY

INSERT = "insert"
CASE1 = "case1"
CASE21 = "case2.1"
CASE22 = "case2.2"


@dataclass(eq=False)
class Cloud:
    id: CloudId
    members: set[NodeId]
    hgraph: HGraph
    leader: Optional[NodeId] = None
    vice_leader: Optional[NodeId] = None
    # primary clouds only
    free_set: set[NodeId] = field(default_factory=set)
    # primary: secondary id -> our bridge node; secondary: primary id -> its bridge node
    bridges: dict[CloudId, NodeId] = field(default_factory=dict)
    # edge set currently written into the live graph under this cloud's label
    edges: set[tuple[NodeId, NodeId]] = field(default_factory=set)
    # value of the healer's non-combining repair counter at creation
    born: int = 0

    @property
    def is_primary(self) -> bool:
        return self.id.is_primary

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class CloudRegistry:
    clouds: dict[CloudId, Cloud] = field(default_factory=dict)
    node_primary: dict[NodeId, set[CloudId]] = field(default_factory=dict)
    node_secondary: dict[NodeId, CloudId] = field(default_factory=dict)

    def __getitem__(self, cid: CloudId) -> Cloud:
        try:
            return self.clouds[cid]
        except KeyError:
            raise UnknownCloud(f"no cloud {cid}") from None

    def __contains__(self, cid) -> bool:
        return cid in self.clouds

    def primaries_of(self, node: NodeId) -> set[CloudId]:
        return self.node_primary.get(node, set())

    def is_free(self, node: NodeId) -> bool:
        return node not in self.node_secondary


@dataclass(frozen=True)
class RepairReport:
    t: int
    case: str
    deleted: Optional[NodeId]
    clouds_touched: tuple[str, ...] = ()
    edges_added: int = 0
    edges_removed: int = 0
    rounds: int = 0
    messages: int = 0
    combined: bool = False
    black_degree: Optional[int] = None
    rebuilds: int = 0
    shares: int = 0

    def to_record(self) -> dict:
        return {
            "t": self.t,
            "case": self.case,
            "deleted": self.deleted,
            "clouds_touched": list(self.clouds_touched),
            "edges_added": self.edges_added,
            "edges_removed": self.edges_removed,
            "rounds": self.rounds,
            "messages": self.messages,
            "combined": self.combined,
        }


@dataclass(frozen=True)
class RepairOutcome:
    kind: str  # "none" | "secondary" | "combined"
    cloud: Optional[CloudId] = None


@dataclass
class _Scratch:
    charge: costs.Charge = field(default_factory=costs.Charge)
    touched: set[CloudId] = field(default_factory=set)
    combined: bool = False
    rebuilds: int = 0
    shares: int = 0


class Xheal:
    """The healer.  Owns the live graph's cloud labels and all cloud state."""

    name = "xheal"

    def __init__(self, graph: HealedGraph, kappa: int = 8, rng: Optional[random.Random] = None):
        if kappa < 2 or kappa % 2:
            raise ValueError("kappa must be an even integer >= 2")
        self.graph = graph
        self.kappa = kappa
        self.d = kappa // 2
        self.rng = rng if rng is not None else random.Random(0)
        self.registry = CloudRegistry()
        self.t = 0
        self.noncombining = 0
        # (combined size, non-combining repairs since the oldest part was born)
        self.combine_log: list[tuple[int, int]] = []
        self._next_cloud = 0
        self._s = _Scratch()

    # -- adversary events ---------------------------------------------------

    def on_insert(self, node: NodeId, neighbors: Iterable[NodeId]) -> RepairReport:
        nbrs = set(neighbors)
        self.graph.add_node(node, nbrs)
        self.t += 1
        return RepairReport(t=self.t, case=INSERT, deleted=None, edges_added=len(nbrs))

    def on_delete(self, v: NodeId) -> RepairReport:
        g, reg = self.graph, self.registry
        black_degree = g.shadow.degree(v) if v in g.shadow else None
        ctx = g.remove_node(v)
        self.t += 1
        self._s = s = _Scratch()
        created0, destroyed0 = g.edges_created, g.edges_destroyed

        prim_ids = sorted(reg.node_primary.pop(v, ()))
        sec_id = reg.node_secondary.pop(v, None)
        F = reg.clouds[sec_id] if sec_id is not None else None
        bridged_id = None
        if F is not None:
            bridged_id = next(c for c, b in F.bridges.items() if b == v)
            f_clouds = set(F.bridges)

        hit = self.fix_primary(prim_ids, v)
        if F is not None:
            self._remove_member(F, v)
            s.touched.add(F.id)

        covered = set().union(*(c.members for c in hit)) if hit else set()
        if F is not None:
            covered |= F.members
        loose = sorted(ctx.black_nbrs - covered)

        if F is None and not hit:
            case = CASE1
            if len(loose) >= 2:
                self.make_cloud(loose, PRIMARY)
        elif F is None:
            case = CASE21
            if len(hit) + len(loose) >= 2:
                self.make_secondary(hit + [self._singleton(x) for x in loose])
        else:
            case = CASE22
            replacement = self.fix_secondary(F, v, reg.clouds.get(bridged_id))
            rest = [c for c in hit if c.id not in f_clouds and c.id in reg]
            if rest or loose:
                anchor = self._anchor(replacement, bridged_id, hit, f_clouds)
                parts = rest + ([anchor] if anchor is not None else [])
                if len(parts) + len(loose) >= 2:
                    self.make_secondary(parts + [self._singleton(x) for x in loose])

        if not s.combined:
            self.noncombining += 1
        return RepairReport(
            t=self.t,
            case=case,
            deleted=v,
            clouds_touched=tuple(str(c) for c in sorted(s.touched)),
            edges_added=g.edges_created - created0,
            edges_removed=g.edges_destroyed - destroyed0,
            rounds=s.charge.rounds,
            messages=s.charge.messages,
            combined=s.combined,
            black_degree=black_degree,
            rebuilds=s.rebuilds,
            shares=s.shares,
        )

    # -- cloud construction ---------------------------------------------------

    def _new_id(self, kind: CloudKind) -> CloudId:
        self._next_cloud += 1
        return CloudId(self._next_cloud, kind)

    def make_cloud(self, members: Iterable[NodeId], kind: CloudKind, charge: bool = True) -> Cloud:
        """Build and register a new cloud; secondary bridges are wired by the caller."""
        nodes = sorted(set(members))
        if not nodes:
            raise EmptyMemberSet("a cloud needs at least one member")
        cid = self._new_id(kind)
        cloud = Cloud(cid, set(nodes), HGraph.build_random(nodes, self.d, self.rng), born=self.noncombining)
        self.registry.clouds[cid] = cloud
        if kind is PRIMARY:
            for x in nodes:
                self._join_primary(x, cloud)
        self._sync(cloud)
        cloud.leader = self.rng.choice(nodes)
        self._elect_vice(cloud)
        if charge:
            self._s.charge.add(costs.new_cloud_cost(len(nodes), self.kappa))
        self._s.touched.add(cid)
        return cloud

    def _singleton(self, x: NodeId) -> Cloud:
        return self.make_cloud([x], PRIMARY, charge=False)

    def _sync(self, cloud: Cloud, new_edges: Optional[set] = None) -> None:
        """Rewrite the cloud's labels in the live graph to match its H-graph."""
        g = self.graph
        new = cloud.hgraph.edge_set() if new_edges is None else new_edges
        old = cloud.edges
        for u, v in new - old:
            g.add_label(u, v, cloud.id)
        for u, v in old - new:
            if g.has_edge(u, v):
                g.remove_label(u, v, cloud.id)
        cloud.edges = new

    def _unlabel(self, cloud: Cloud) -> None:
        self._sync(cloud, set())

    # -- membership bookkeeping ------------------------------------------------

    def _join_primary(self, x: NodeId, cloud: Cloud) -> None:
        cloud.members.add(x)
        self.registry.node_primary.setdefault(x, set()).add(cloud.id)
        if self.registry.is_free(x):
            cloud.free_set.add(x)

    def _set_secondary(self, x: NodeId, sec: Cloud) -> None:
        reg = self.registry
        reg.node_secondary[x] = sec.id
        for cid in reg.primaries_of(x):
            reg.clouds[cid].free_set.discard(x)

    def _clear_secondary(self, x: NodeId) -> None:
        reg = self.registry
        del reg.node_secondary[x]
        for cid in reg.primaries_of(x):
            reg.clouds[cid].free_set.add(x)

    def _elect_vice(self, cloud: Cloud) -> None:
        ld = cloud.leader
        vice = cloud.vice_leader
        if vice is not None and vice != ld and vice in cloud.members and edge_key(ld, vice) in cloud.edges:
            return
        nbrs = sorted({b if a == ld else a for a, b in cloud.edges if ld in (a, b)})
        cloud.vice_leader = self.rng.choice(nbrs) if nbrs else None

    def _remove_member(self, cloud: Cloud, v: NodeId) -> bool:
        """Splice a deleted node out of one cloud.  False if the cloud emptied."""
        reg, s = self.registry, self._s
        cloud.members.discard(v)
        cloud.free_set.discard(v)
        s.touched.add(cloud.id)
        if cloud.is_primary:
            for sec_id in [f for f, b in cloud.bridges.items() if b == v]:
                del cloud.bridges[sec_id]
        else:
            for pid in [p for p, b in cloud.bridges.items() if b == v]:
                del cloud.bridges[pid]
                if pid in reg.clouds:
                    reg.clouds[pid].bridges.pop(cloud.id, None)
        if not cloud.members:
            self._drop(cloud)
            return False
        cloud.hgraph.delete(v)
        s.charge.add(costs.splice_cost(self.kappa))
        if cloud.hgraph.needs_rebuild():
            cloud.hgraph.rebuild(self.rng)
            s.rebuilds += 1
            s.charge.add(costs.new_cloud_cost(len(cloud), self.kappa))
        self._sync(cloud)
        if cloud.leader not in cloud.members:
            vice = cloud.vice_leader
            cloud.leader = vice if vice in cloud.members else self.rng.choice(sorted(cloud.members))
            cloud.vice_leader = None
            s.charge.add(costs.leader_replacement_cost(len(cloud)))
        self._elect_vice(cloud)
        return True

    def _drop(self, cloud: Cloud) -> None:
        """Unregister a cloud and remove its labels (bridges must already be detached)."""
        reg = self.registry
        self._unlabel(cloud)
        for x in cloud.members:
            if cloud.is_primary:
                ids = reg.node_primary.get(x)
                if ids is not None:
                    ids.discard(cloud.id)
                    if not ids:
                        del reg.node_primary[x]
        del reg.clouds[cloud.id]

    def _dissolve_secondary(self, sec: Cloud) -> None:
        reg = self.registry
        for pid, b in sec.bridges.items():
            if pid in reg.clouds:
                reg.clouds[pid].bridges.pop(sec.id, None)
            if reg.node_secondary.get(b) == sec.id:
                self._clear_secondary(b)
        sec.bridges.clear()
        self._drop(sec)
        self._s.touched.add(sec.id)

    def _detach_bridge(self, sec: Cloud, pid: CloudId) -> None:
        """Take primary cloud ``pid``'s bridge out of ``sec`` (the bridge becomes free)."""
        b = sec.bridges.pop(pid)
        sec.members.discard(b)
        self._clear_secondary(b)
        if sec.members:
            sec.hgraph.delete(b)
            self._s.charge.add(costs.splice_cost(self.kappa))
            self._sync(sec)
            if sec.leader == b or sec.leader not in sec.members:
                sec.leader = self.rng.choice(sorted(sec.members))
                sec.vice_leader = None
            self._elect_vice(sec)

    # -- repair steps ----------------------------------------------------------------

    def fix_primary(self, cloud_ids: Iterable[CloudId], v: NodeId) -> list[Cloud]:
        """Splice ``v`` out of each primary cloud; returns the clouds that survive."""
        kept = []
        for cid in cloud_ids:
            cloud = self.registry[cid]
            if self._remove_member(cloud, v):
                kept.append(cloud)
        return kept

    def pick_free_node(self, cloud_id: CloudId, exclude: Iterable[NodeId] = ()) -> Optional[NodeId]:
        cloud = self.registry[cloud_id]
        if not cloud.is_primary:
            raise NotPrimary(f"{cloud_id} is a secondary cloud")
        cand = sorted(cloud.free_set.difference(exclude))
        return self.rng.choice(cand) if cand else None

    def _can_share(self, x: NodeId) -> bool:
        """Share budget: x may join one primary cloud more than its dead G' neighbours.

        Every other way of joining a primary cloud is paid for by a deleted
        neighbour, so primary memberships stay <= dead neighbours + 1 and the
        degree bound kappa * d'(x) + 2 kappa holds.  Combining frees budget.
        """
        sh = self.graph.shadow
        dead = sum(1 for w in sh.adj[x] if not sh.alive[w])
        return len(self.registry.primaries_of(x)) <= dead

    def _share_candidates(self, donor: Cloud, target: Cloud, used) -> list[NodeId]:
        return sorted(x for x in donor.free_set
                      if x not in used and x not in target.members and self._can_share(x))

    def _pick_donor(self, target: Cloud, donors: Iterable[Cloud], used) -> Optional[NodeId]:
        """Uniform free node of the donor with the most shareable free nodes."""
        best, best_cand = None, []
        for d in sorted(donors, key=lambda c: c.id):
            if d is target:
                continue
            cand = self._share_candidates(d, target, used)
            if len(cand) > len(best_cand):
                best, best_cand = d, cand
        return self.rng.choice(best_cand) if best is not None else None

    def _share(self, w: NodeId, cloud: Cloud) -> None:
        cloud.hgraph.insert(w, self.rng)
        self._join_primary(w, cloud)
        self._sync(cloud)
        self._elect_vice(cloud)
        self._s.shares += 1
        self._s.touched.add(cloud.id)
        self._s.charge.add(costs.splice_cost(self.kappa))

    def make_secondary(self, participants: Iterable[Cloud]) -> RepairOutcome:
        """Interconnect the participant primary clouds through one bridge each."""
        parts = sorted({c.id: c for c in participants}.values(), key=lambda c: c.id)
        if not parts:
            raise NoParticipants("make_secondary needs at least one cloud")
        for c in parts:
            if not c.is_primary:
                raise NotPrimary(f"{c.id} is a secondary cloud")
        if len(parts) == 1:
            return RepairOutcome("none")
        self._s.charge.add(costs.lookup_cost(len(parts)))

        used: set[NodeId] = set()
        picks: dict[CloudId, NodeId] = {}
        for c in parts:
            z = self.pick_free_node(c.id, exclude=used)
            if z is not None:
                picks[c.id] = z
                used.add(z)
        shares = []
        for c in parts:
            if c.id in picks:
                continue
            w = self._pick_donor(c, parts, used)
            if w is None:
                return RepairOutcome("combined", self._combine(parts).id)
            picks[c.id] = w
            used.add(w)
            shares.append((w, c))
        for w, c in shares:
            self._share(w, c)

        sec = self.make_cloud(picks.values(), SECONDARY)
        for pid, b in picks.items():
            sec.bridges[pid] = b
            self.registry.clouds[pid].bridges[sec.id] = b
            self._set_secondary(b, sec)
        return RepairOutcome("secondary", sec.id)

    def fix_secondary(self, sec: Cloud, v: NodeId, bridged: Optional[Cloud]) -> Optional[Cloud]:
        """Replace the deleted bridge ``v`` of ``bridged`` inside secondary cloud ``sec``.

        Expects ``v`` to be already spliced out of ``sec``.  Returns the combined
        primary cloud when no replacement exists, else None.
        """
        reg = self.registry
        if sec.id not in reg:
            raise UnknownCloud(f"no cloud {sec.id}")
        if bridged is None or bridged.id not in reg:
            # the cloud v represented is gone; nothing to bridge any more
            if len(sec.members) <= 1:
                self._dissolve_secondary(sec)
            return None
        if sec.id in bridged.bridges or bridged.id in sec.bridges:
            raise NotBridge(f"{bridged.id} still has a bridge in {sec.id}")
        self._s.charge.add(costs.lookup_cost(len(sec.bridges) + 1))
        z = self.pick_free_node(bridged.id)
        if z is None:
            others = [reg.clouds[p] for p in sorted(sec.bridges) if p in reg.clouds]
            z = self._pick_donor(bridged, others, set())
            if z is not None:
                self._share(z, bridged)
        if z is None:
            parts = [bridged] + [reg.clouds[p] for p in sorted(sec.bridges) if p in reg.clouds]
            self._dissolve_secondary(sec)
            return self._combine(parts)
        sec.hgraph.insert(z, self.rng)
        sec.members.add(z)
        sec.bridges[bridged.id] = z
        bridged.bridges[sec.id] = z
        self._set_secondary(z, sec)
        self._sync(sec)
        self._elect_vice(sec)
        self._s.charge.add(costs.splice_cost(self.kappa))
        return None

    def _combine(self, parts: list[Cloud]) -> Cloud:
        """Merge primary clouds into one fresh primary cloud.

        Secondary clouds that bridged any part keep a single bridge into the
        merged cloud; surplus bridges leave their secondary and become free.
        """
        reg, s = self.registry, self._s
        s.combined = True
        members = sorted(set().union(*(c.members for c in parts)))
        s.charge.add(costs.combine_cost(len(members), self.kappa))
        self.combine_log.append((len(members), self.noncombining - min(c.born for c in parts)))

        inherited: dict[CloudId, NodeId] = {}
        for c in parts:
            for sid, b in sorted(c.bridges.items()):
                sec = reg.clouds[sid]
                if sid in inherited:
                    self._detach_bridge(sec, c.id)
                else:
                    inherited[sid] = b
                    del sec.bridges[c.id]
            c.bridges.clear()
        # label the merged cloud first so edges it keeps are never torn down
        new = self.make_cloud(members, PRIMARY, charge=False)
        for c in parts:
            self._drop(c)
            s.touched.add(c.id)
        for sid, b in inherited.items():
            sec = reg.clouds[sid]
            sec.bridges[new.id] = b
            new.bridges[sid] = b
            new.free_set.discard(b)
        for sid in inherited:
            sec = reg.clouds[sid]
            if len(sec.members) <= 1:
                self._dissolve_secondary(sec)
        return new

    def _anchor(self, replacement, bridged_id, hit, f_clouds) -> Optional[Cloud]:
        """A cloud on F's side of the repair, linked into the new secondary cloud."""
        reg = self.registry
        if replacement is not None and replacement.id in reg:
            return replacement
        order = [bridged_id] + [c.id for c in hit if c.id in f_clouds] + sorted(f_clouds)
        for cid in order:
            if cid is not None and cid in reg:
                return reg.clouds[cid]
        return None

    # -- verification ---------------------------------------------------------------

    def check_invariants(self) -> None:
        """Assert registry/graph agreement; raises AssertionError on violation."""
        g, reg = self.graph, self.registry
        g.check()
        for cid, c in reg.clouds.items():
            assert c.members, f"{cid} is empty"
            assert c.members == set(c.hgraph.members), f"{cid} member drift"
            assert c.edges == c.hgraph.edge_set(), f"{cid} stale edge cache"
            for u, v in c.edges:
                assert g.has_edge(u, v) and cid in g.adj[u][v], f"{cid} edge ({u},{v}) missing"
            assert c.leader in c.members, f"{cid} leader not a member"
            if len(c) > 1:
                assert c.vice_leader in c.members and c.vice_leader != c.leader, f"{cid} vice"
            if c.is_primary:
                want = {x for x in c.members if reg.is_free(x)}
                assert c.free_set == want, f"{cid} free set drift"
                for x in c.members:
                    assert cid in reg.node_primary.get(x, ()), f"{cid} member {x} unregistered"
                for sid, b in c.bridges.items():
                    sec = reg.clouds[sid]
                    assert sec.bridges.get(cid) == b and b in c.members, f"{cid} bridge {b}"
            else:
                assert c.members == set(c.bridges.values()), f"{cid} members != bridges"
                assert len(c.bridges) == len(c.members), f"{cid} duplicate bridge"
                for pid, b in c.bridges.items():
                    assert reg.node_secondary.get(b) == cid, f"{cid} bridge {b} unregistered"
                    assert reg.clouds[pid].bridges.get(cid) == b, f"{cid} one-sided bridge"
        for x, ids in reg.node_primary.items():
            assert x in g.nodes, f"dead node {x} in registry"
            for cid in ids:
                assert x in reg.clouds[cid].members
        for x, sid in reg.node_secondary.items():
            assert x in reg.clouds[sid].members
        for u, v, labs in g.edges():
            for lab in labs:
                if isinstance(lab, CloudId):
                    assert lab in reg.clouds and (u, v) in reg.clouds[lab].edges, f"orphan label {lab}"
