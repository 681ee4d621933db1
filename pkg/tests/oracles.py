"""Independent reference implementations used only by the tests.

Deliberately naive: every subset is enumerated with itertools and every cut
is counted edge by edge, so nothing is shared with the vectorised code.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from fractions import Fraction


def edge_list(adj):
    return [(u, v) for u in adj for v in adj[u] if u < v]


def naive_expansion(adj) -> Fraction:
    nodes = sorted(adj)
    n = len(nodes)
    edges = edge_list(adj)
    best = None
    for k in range(1, n // 2 + 1):
        for s in itertools.combinations(nodes, k):
            inside = set(s)
            cut = 0
            for u, v in edges:
                if (u in inside) != (v in inside):
                    cut += 1
            r = Fraction(cut, k)
            if best is None or r < best:
                best = r
    return best


def naive_cheeger(adj) -> Fraction:
    nodes = sorted(adj)
    edges = edge_list(adj)
    total = 2 * len(edges)
    best = None
    for k in range(1, len(nodes)):
        for s in itertools.combinations(nodes, k):
            inside = set(s)
            cut = sum(1 for u, v in edges if (u in inside) != (v in inside))
            vol = sum(len(adj[u]) for u in s)
            den = min(vol, total - vol)
            if den == 0:
                return Fraction(0)
            r = Fraction(cut, den)
            if best is None or r < best:
                best = r
    return best


def bfs(adj, src):
    dist = {src: 0}
    q = deque([src])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return dist


def naive_stretch(gt_adj, gs_adj, alive):
    worst, total, count = 1.0, 0.0, 0
    for u in alive:
        dt = bfs(gt_adj, u)
        ds = bfs(gs_adj, u)
        for v in alive:
            if v == u or v not in ds:
                continue
            r = dt.get(v, float("inf")) / ds[v]
            worst = max(worst, r)
            total += r
            count += 1
    return worst, (total / count if count else 1.0)


def random_graph(n, p, rng: random.Random):
    adj = {u: set() for u in range(n)}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                adj[u].add(v)
                adj[v].add(u)
    return adj


def complete(n):
    return {u: set(range(n)) - {u} for u in range(n)}


def cycle(n):
    return {u: {(u - 1) % n, (u + 1) % n} for u in range(n)}


def path(n):
    return {u: {w for w in (u - 1, u + 1) if 0 <= w < n} for u in range(n)}


def star(leaves):
    adj = {0: set(range(1, leaves + 1))}
    for u in range(1, leaves + 1):
        adj[u] = {0}
    return adj


def assert_single_cycles(h):
    if h.mode != "rings":
        return
    for succ, pred in zip(h.succ, h.pred):
        assert set(succ) == set(h.members)
        start = h.members[0]
        seen, u = {start}, succ[start]
        while u != start:
            assert u not in seen
            seen.add(u)
            assert pred[succ[u]] == u
            u = succ[u]
        assert seen == set(h.members)
