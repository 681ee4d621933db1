from __future__ import annotations

import math
import random
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from oracles import complete, cycle, naive_cheeger, naive_expansion, naive_stretch, path, random_graph, star
from xheal import metrics
from xheal.errors import SingleNode, TooLarge
from xheal.graph import HealedGraph, is_connected
from xheal.healer import Xheal


def test_expansion_frozen_values():
    # values confirmed by the naive enumerator in oracles.py
    assert metrics.edge_expansion_exact(complete(4)) == 2
    assert metrics.edge_expansion_exact(path(4)) == Fraction(1, 2)
    assert metrics.edge_expansion_exact(cycle(6)) == Fraction(2, 3)
    assert metrics.edge_expansion_exact({0: {1}, 1: {0}, 2: {3}, 3: {2}}) == 0


def test_cheeger_frozen_values():
    assert metrics.cheeger_exact(complete(4)) == Fraction(2, 3)
    assert naive_cheeger(complete(4)) == Fraction(2, 3)
    assert metrics.cheeger_exact({0: {1}, 1: {0}, 2: {3}, 3: {2}}) == 0
    assert metrics.cheeger_exact({0: set(), 1: set()}) == 0


def test_exact_matches_naive_oracle():
    rng = random.Random(2024)
    for _ in range(40):
        n = rng.randint(2, 11)
        adj = random_graph(n, rng.uniform(0.2, 0.8), rng)
        assert metrics.edge_expansion_exact(adj) == naive_expansion(adj)
        if any(adj.values()):
            assert metrics.cheeger_exact(adj) == naive_cheeger(adj)


def test_witness_attains_minimum():
    rng = random.Random(5)
    for _ in range(20):
        adj = random_graph(rng.randint(3, 12), 0.4, rng)
        h, s = metrics.edge_expansion_witness(adj)
        cut = sum(1 for u in s for w in adj[u] if w not in s)
        assert 2 * len(s) <= len(adj) and Fraction(cut, len(s)) == h


def test_regular_graph_phi_is_h_over_k():
    for seed in range(10):
        gx = nx.random_regular_graph(4, 12, seed=seed)
        adj = {u: set(gx[u]) for u in gx}
        assert metrics.cheeger_exact(adj) == metrics.edge_expansion_exact(adj) / 4


def test_cutoff_and_degenerate_errors():
    with pytest.raises(TooLarge):
        metrics.edge_expansion_exact(cycle(21))
    with pytest.raises(TooLarge):
        metrics.cheeger_exact(cycle(8), cutoff=6)
    with pytest.raises(SingleNode):
        metrics.edge_expansion_exact({0: set()})
    with pytest.raises(SingleNode):
        metrics.lambda2({0: set()})
    with pytest.raises(TooLarge):
        metrics.lambda2(cycle(40), cutoff=32)


def test_lambda2_closed_forms():
    assert metrics.lambda2(complete(4)) == pytest.approx(4.0, abs=1e-8)
    assert metrics.lambda2(cycle(6)) == pytest.approx(1.0, abs=1e-8)
    assert metrics.lambda2({0: {1}, 1: {0}, 2: {3}, 3: {2}}) == pytest.approx(0.0, abs=1e-10)


def test_spectrum_trace_and_connectivity():
    rng = random.Random(11)
    for _ in range(30):
        adj = random_graph(rng.randint(2, 30), rng.uniform(0.05, 0.5), rng)
        ev = metrics.laplacian_spectrum(adj)
        total = sum(len(nb) for nb in adj.values())
        assert abs(ev.sum() - total) <= 1e-8 * max(total, 1)
        assert (metrics.lambda2(adj) > 1e-9) == is_connected(adj)


def test_spectral_lower_bound_is_a_lower_bound():
    rng = random.Random(7)
    assert metrics.spectral_expansion_lower_bound(complete(4)) <= 2 + 1e-9
    assert metrics.spectral_expansion_lower_bound({0: {1}, 1: {0}, 2: set()}) == 0
    for _ in range(100):
        adj = random_graph(rng.randint(2, 12), rng.uniform(0.2, 0.9), rng)
        assert metrics.spectral_expansion_lower_bound(adj) <= float(metrics.edge_expansion_exact(adj)) + 1e-9


def test_upper_bounds_and_milp_agree_with_enumeration():
    rng = random.Random(13)
    for _ in range(25):
        adj = random_graph(rng.randint(4, 14), rng.uniform(0.25, 0.7), rng)
        h = metrics.edge_expansion_exact(adj)
        assert metrics.sweep_cut_upper_bound(adj) >= h
        assert metrics.expansion_upper_bound(adj) >= h
        assert metrics.edge_expansion_milp(adj) == h


def test_cheeger_inequality_small_graphs():
    rng = random.Random(17)
    for _ in range(40):
        adj = random_graph(rng.randint(2, 12), rng.uniform(0.3, 0.9), rng)
        verdict = metrics.cheeger_inequality_check(adj)
        assert verdict.ok, verdict
    assert metrics.cheeger_inequality_check(complete(4)).ok
    assert metrics.cheeger_inequality_check({0: set(), 1: set()}).skipped


def test_combinatorial_laplacian_breaks_cheeger_on_k4():
    # why the Cheeger check uses the normalized Laplacian
    assert 2 * float(metrics.cheeger_exact(complete(4))) < metrics.lambda2(complete(4))


def healed_star(leaves, kappa, seed):
    g = HealedGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])
    x = Xheal(g, kappa, random.Random(seed))
    x.on_delete(0)
    return g


def test_stretch_before_any_deletion_is_one():
    g = HealedGraph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)])
    assert metrics.stretch_report(g, g.shadow) == (1.0, 1.0)


def test_stretch_star_matches_bfs_oracle():
    for seed in range(5):
        g = healed_star(10, 4, seed)
        got = metrics.stretch_report(g, g.shadow)
        want = naive_stretch(g.adjacency(), g.shadow.adj, sorted(g.nodes))
        assert got[0] == pytest.approx(want[0]) and got[1] == pytest.approx(want[1])
        assert got[0] <= 2


def test_stretch_ignores_pairs_disconnected_in_shadow():
    g = HealedGraph.from_edges(4, [(0, 1), (2, 3)])
    g.add_label(1, 2, "tree")
    smax, _ = metrics.stretch_report(g, g.shadow)
    assert smax == 1.0


def test_guarantee_verdicts_fresh_graph_all_pass():
    g = HealedGraph.from_edges(8, [(i, (i + 1) % 8) for i in range(8)] + [(0, 4), (2, 6)])
    verdicts = metrics.theorem1_check(g, g.shadow, 8)
    assert all(v.ok for v in verdicts.values())
    assert verdicts["degree"].status == "pass"
    assert verdicts["expansion"].status == "pass"
    assert verdicts["stretch"].detail["stretch_max"] == 1.0


def test_cost_report_single_case1_deletion():
    m, kappa = 10, 4
    g = HealedGraph.from_edges(m + 1, [(0, i) for i in range(1, m + 1)])
    x = Xheal(g, kappa, random.Random(0))
    rep = x.on_delete(0)
    from xheal.costs import CostLedger

    led = CostLedger()
    led.record(rep.rounds, rep.messages, rep.black_degree)
    out = metrics.cost_report(led)
    assert out["A_p"] == m
    assert out["ratio"] == math.ceil(math.log2(m)) + kappa
    assert out["max_rounds"] <= math.ceil(math.log2(m + 1)) + 3
    assert metrics.cost_report(CostLedger())["A_p"] is None


def test_measure_and_csv_row():
    g = healed_star(8, 4, 1)
    rep = metrics.measure(g)
    assert rep.connected and rep.h_exact is not None and rep.stretch_max >= 1
    from xheal.costs import CostLedger

    row = metrics.csv_row(3, rep, CostLedger())
    assert len(row) == len(metrics.CSV_COLUMNS) and row[0] == "3"


def test_sampled_stretch_is_deterministic():
    rng = np.random.default_rng(0)
    n = 40
    edges = {(i, (i + 1) % n) for i in range(n)} | {tuple(sorted(map(int, rng.choice(n, 2, replace=False)))) for _ in range(30)}
    g = HealedGraph.from_edges(n, sorted(edges))
    a = metrics.stretch_report(g, g.shadow, sample_cap=10, rng=random.Random(1))
    b = metrics.stretch_report(g, g.shadow, sample_cap=10, rng=random.Random(1))
    assert a == b == (1.0, 1.0)
