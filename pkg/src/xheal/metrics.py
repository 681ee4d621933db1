"""Graph measurements and the guarantee checks run against healed graphs.

Edge expansion and the Cheeger constant are computed exactly (as fractions)
by enumerating every cut of graphs up to ``exact_cutoff`` nodes.  Larger
graphs get spectral bounds only.  Two Laplacian spectra are exposed:

* :func:`lambda2`, the algebraic connectivity of ``L = D - A``;
* :func:`normalized_lambda2`, the second eigenvalue of the normalized
  Laplacian ``I - D^-1/2 A D^-1/2``.  This is the quantity the Cheeger
  inequality ``2 phi >= lambda > phi^2 / 2`` is about.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import shortest_path

from .costs import CostLedger, clog2
from .errors import SingleNode, TooLarge
from .graph import HealedGraph, ShadowGraph, is_connected

EXACT_CUTOFF = 20
DENSE_CUTOFF = 512
CHEEGER_TOL = 1e-9

CSV_COLUMNS = [
    "t", "n", "m", "connected", "h_exact", "h_spectral_lb", "phi_exact", "lambda2",
    "stretch_max", "stretch_mean", "deg_ratio_max", "rounds_cum", "messages_cum", "A_p",
]


def _adjacency(g) -> dict:
    """Plain ``node -> set(neighbors)`` view of a graph-like object."""
    if isinstance(g, HealedGraph):
        return {u: set(nb) for u, nb in g.adj.items()}
    if isinstance(g, ShadowGraph):
        return g.adj
    if isinstance(g, Mapping):
        return g
    import networkx as nx

    if isinstance(g, nx.Graph):
        return {u: set(g[u]) for u in g}
    raise TypeError(f"not a graph: {type(g).__name__}")


def _indexed(adj):
    nodes = sorted(adj)
    index = {u: i for i, u in enumerate(nodes)}
    return nodes, index


# -- exact cut enumeration ------------------------------------------------------


def _cut_tables(adj, cutoff):
    """Cut size, |S| and vol(S) for every S that excludes the last node.

    Complements cover the other half, so every cut appears exactly once.
    Built by doubling: adding node i to S changes the cut by
    ``deg(i) - 2 |N(i) & S|``.
    """
    nodes, index = _indexed(adj)
    n = len(nodes)
    if n > cutoff:
        raise TooLarge(f"{n} nodes exceed the exact cutoff {cutoff}")
    deg = [len(adj[u]) for u in nodes]
    lower = [0] * n
    for u in nodes:
        i = index[u]
        for w in adj[u]:
            j = index[w]
            if j < i:
                lower[i] |= 1 << j
    cut = np.zeros(1, dtype=np.int64)
    vol = np.zeros(1, dtype=np.int64)
    for i in range(n - 1):
        ar = np.arange(1 << i, dtype=np.int64)
        inside = np.bitwise_count(ar & lower[i]).astype(np.int64)
        cut = np.concatenate([cut, cut + deg[i] - 2 * inside])
        vol = np.concatenate([vol, vol + deg[i]])
    size = np.bitwise_count(np.arange(1 << (n - 1), dtype=np.int64)).astype(np.int64)
    return n, cut[1:], size[1:], vol[1:], sum(deg)


def _exact_min_ratio(num, den) -> Fraction:
    ratio = num / den
    best = ratio.min()
    cand = np.nonzero(ratio <= best * (1 + 1e-9) + 1e-15)[0]
    return min(Fraction(int(num[i]), int(den[i])) for i in cand)


def edge_expansion_exact(g, cutoff: int = EXACT_CUTOFF) -> Fraction:
    """min over |S| <= n/2 of |E(S, V-S)| / |S|, exactly."""
    adj = _adjacency(g)
    if len(adj) < 2:
        raise SingleNode("edge expansion needs at least two nodes")
    n, cut, size, _, _ = _cut_tables(adj, cutoff)
    return _exact_min_ratio(cut, np.minimum(size, n - size))


def edge_expansion_witness(g, cutoff: int = EXACT_CUTOFF) -> tuple[Fraction, frozenset]:
    """Exact edge expansion together with a minimising set S, |S| <= n/2."""
    adj = _adjacency(g)
    if len(adj) < 2:
        raise SingleNode("edge expansion needs at least two nodes")
    nodes, _ = _indexed(adj)
    n, cut, size, _, _ = _cut_tables(adj, cutoff)
    den = np.minimum(size, n - size)
    h = _exact_min_ratio(cut, den)
    for i in np.nonzero(cut * h.denominator == den * h.numerator)[0]:
        mask = int(i) + 1
        inside = frozenset(nodes[j] for j in range(n) if mask >> j & 1)
        if 2 * len(inside) > n:
            inside = frozenset(nodes) - inside
        return h, inside
    raise AssertionError("minimum not attained")  # pragma: no cover


def cheeger_exact(g, cutoff: int = EXACT_CUTOFF) -> Fraction:
    """min over S of |E(S, V-S)| / min(vol S, vol(V-S)); 0 if disconnected."""
    adj = _adjacency(g)
    if len(adj) < 2:
        raise SingleNode("Cheeger constant needs at least two nodes")
    if len(adj) > cutoff:
        raise TooLarge(f"{len(adj)} nodes exceed the exact cutoff {cutoff}")
    if not any(adj.values()) or not is_connected(adj):
        return Fraction(0)
    _, cut, _, vol, total = _cut_tables(adj, cutoff)
    return _exact_min_ratio(cut, np.minimum(vol, total - vol))


def expansion_and_cheeger(g, cutoff: int = EXACT_CUTOFF) -> tuple[Fraction, Fraction]:
    """Both exact constants from a single enumeration."""
    adj = _adjacency(g)
    if len(adj) < 2:
        raise SingleNode("need at least two nodes")
    n, cut, size, vol, total = _cut_tables(adj, cutoff)
    h = _exact_min_ratio(cut, np.minimum(size, n - size))
    if total == 0 or h == 0:
        return h, Fraction(0)
    return h, _exact_min_ratio(cut, np.minimum(vol, total - vol))


# -- spectra --------------------------------------------------------------------


def laplacian(g, normalized: bool = False) -> np.ndarray:
    adj = _adjacency(g)
    nodes, index = _indexed(adj)
    n = len(nodes)
    a = np.zeros((n, n))
    for u in nodes:
        for w in adj[u]:
            a[index[u], index[w]] = 1.0
    deg = a.sum(axis=1)
    if not normalized:
        return np.diag(deg) - a
    inv = np.zeros(n)
    nz = deg > 0
    inv[nz] = 1.0 / np.sqrt(deg[nz])
    return np.diag(nz.astype(float)) - inv[:, None] * a * inv[None, :]


def laplacian_spectrum(g, normalized: bool = False, cutoff: int = DENSE_CUTOFF) -> np.ndarray:
    adj = _adjacency(g)
    if len(adj) > cutoff:
        raise TooLarge(f"{len(adj)} nodes exceed the dense eigensolver cutoff {cutoff}")
    if len(adj) < 2:
        raise SingleNode("spectrum needs at least two nodes")
    return np.linalg.eigvalsh(laplacian(adj, normalized))


def lambda2(g, tol: float = 1e-10, cutoff: int = DENSE_CUTOFF) -> float:
    """Algebraic connectivity of ``D - A`` (K_n gives n), clamped at 0."""
    ev = laplacian_spectrum(g, cutoff=cutoff)
    return max(float(ev[1]), 0.0) if ev[1] > tol else 0.0


def normalized_lambda2(g, tol: float = 1e-10, cutoff: int = DENSE_CUTOFF) -> float:
    ev = laplacian_spectrum(g, normalized=True, cutoff=cutoff)
    return max(float(ev[1]), 0.0) if ev[1] > tol else 0.0


@dataclass(frozen=True)
class CheegerVerdict:
    phi: Optional[Fraction]
    lam: Optional[float]
    upper_ok: bool
    lower_ok: bool
    skipped: bool = False

    @property
    def ok(self) -> bool:
        return self.skipped or (self.upper_ok and self.lower_ok)


def cheeger_inequality_check(g, cutoff: int = EXACT_CUTOFF, tol: float = CHEEGER_TOL,
                             phi: Optional[Fraction] = None) -> CheegerVerdict:
    """2 phi >= lambda >= phi^2 / 2 (normalized Laplacian), within ``tol``.

    Graphs with an isolated node have no defined conductance and are skipped.
    """
    adj = _adjacency(g)
    if len(adj) < 2 or any(not nb for nb in adj.values()):
        return CheegerVerdict(None, None, True, True, skipped=True)
    if phi is None:
        phi = cheeger_exact(adj, cutoff)
    lam = normalized_lambda2(adj)
    p = float(phi)
    return CheegerVerdict(phi, lam, 2 * p + tol >= lam, lam >= p * p / 2 - tol)


def spectral_expansion_lower_bound(g) -> float:
    """A certified lower bound on the edge expansion from the spectrum.

    Two valid chains, the larger is returned:
    h >= phi * d_min >= (lambda_norm / 2) * d_min, and the cut bound
    |E(S, V-S)| >= lambda2 |S| |V-S| / n, i.e. h >= lambda2 / 2.
    """
    adj = _adjacency(g)
    if len(adj) < 2:
        raise SingleNode("bound needs at least two nodes")
    if not is_connected(adj):
        return 0.0
    dmin = min(len(nb) for nb in adj.values())
    return max(normalized_lambda2(adj) / 2 * dmin, lambda2(adj) / 2)


def sweep_cut_upper_bound(g) -> Fraction:
    """Best edge-expansion ratio among Fiedler-vector prefix cuts and single nodes.

    Any concrete cut bounds h from above.
    """
    adj = _adjacency(g)
    nodes, index = _indexed(adj)
    n = len(nodes)
    if n < 2:
        raise SingleNode("bound needs at least two nodes")
    best = min(Fraction(len(adj[u]), 1) for u in nodes)
    if not is_connected(adj):
        return Fraction(0)
    _, vecs = np.linalg.eigh(laplacian(adj))
    order = [nodes[i] for i in np.argsort(vecs[:, 1], kind="stable")]
    for seq in (order, order[::-1]):
        inside: set = set()
        cut = 0
        for k, u in enumerate(seq[: n // 2], start=1):
            cut += len(adj[u]) - 2 * sum(1 for w in adj[u] if w in inside)
            inside.add(u)
            best = min(best, Fraction(cut, k))
    return best


# -- stretch and degree ------------------------------------------------------------


def _distances(adj, nodes, sources):
    index = {u: i for i, u in enumerate(nodes)}
    rows, cols = [], []
    for u in nodes:
        for w in adj[u]:
            rows.append(index[u])
            cols.append(index[w])
    mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(nodes), len(nodes)))
    return shortest_path(mat, unweighted=True, directed=False, indices=[index[s] for s in sources]), index


def stretch_report(g_t: HealedGraph, g_shadow: ShadowGraph, sample_cap: int = 512,
                   rng: Optional[random.Random] = None) -> tuple[float, float]:
    """(max, mean) of dist_Gt / dist_G' over alive pairs connected in G'.

    G' distances may route through deleted nodes.  With more than
    ``sample_cap`` alive nodes, BFS runs from ``sample_cap`` random sources.
    """
    alive = sorted(g_t.nodes)
    if len(alive) < 2:
        return 1.0, 1.0
    sources = alive
    if len(alive) > sample_cap:
        sources = sorted((rng or random.Random(0)).sample(alive, sample_cap))
    dt, it = _distances(g_t.adj, alive, sources)
    shadow_nodes = sorted(g_shadow.adj)
    ds, is_ = _distances(g_shadow.adj, shadow_nodes, sources)
    cols_t = np.array([it[u] for u in alive])
    cols_s = np.array([is_[u] for u in alive])
    a = dt[:, cols_t]
    b = ds[:, cols_s]
    mask = np.isfinite(b) & (b > 0)
    if not mask.any():
        return 1.0, 1.0
    ratio = a[mask] / b[mask]
    return float(ratio.max()), float(ratio[np.isfinite(ratio)].mean()) if np.isfinite(ratio).any() else math.inf


def degree_ratio_max(g: HealedGraph) -> float:
    return max((g.degree(x) / g.shadow.degree(x) for x in g.nodes), default=1.0)


def degree_bound_violations(g: HealedGraph, kappa: int) -> list:
    """Nodes breaking degree_Gt(x) <= kappa * degree_G'(x) + 2 kappa."""
    return [x for x in sorted(g.nodes) if g.degree(x) > kappa * g.shadow.degree(x) + 2 * kappa]


# -- guarantee verdicts -------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    item: str
    status: str  # "pass" | "fail" | "report"
    detail: dict

    @property
    def ok(self) -> bool:
        return self.status != "fail"


def _ratio(cut: int, k: int, n: int) -> Fraction:
    return Fraction(cut, min(k, n - k))


def refine_cut(adj, start) -> tuple[Fraction, frozenset]:
    """Greedy single-node moves from ``start`` that lower the expansion ratio.

    The result is a concrete cut, hence an upper bound on h.
    """
    n = len(adj)
    inside = set(start)
    cut = sum(1 for u in inside for w in adj[u] if w not in inside)
    best = _ratio(cut, len(inside), n) if 0 < len(inside) < n else None
    improved = True
    while improved:
        improved = False
        for u in sorted(adj):
            k = len(inside)
            into = sum(1 for w in adj[u] if w in inside)
            if u in inside:
                k2, c2 = k - 1, cut - (len(adj[u]) - into) + into
            else:
                k2, c2 = k + 1, cut + len(adj[u]) - 2 * into
            if not 0 < k2 < n:
                continue
            r = _ratio(c2, k2, n)
            if best is None or r < best:
                inside.symmetric_difference_update({u})
                cut, best, improved = c2, r, True
    return best, frozenset(inside)


def expansion_upper_bound(g, hints=()) -> Fraction:
    """Smallest ratio among sweep cuts, single nodes and locally refined cuts.

    ``hints`` are extra node sets to start refinement from (nodes not in
    the graph are ignored).
    """
    adj = _adjacency(g)
    best = sweep_cut_upper_bound(adj)
    starts = [[u] for u in adj if len(adj[u]) <= best]
    starts += [[x for x in h if x in adj] for h in hints]
    for st in starts:
        if st:
            r, _ = refine_cut(adj, st)
            if r is not None:
                best = min(best, r)
    return best


def edge_expansion_milp(g, start: Optional[Fraction] = None) -> Fraction:
    """Exact edge expansion of graphs too large to enumerate.

    Dinkelbach iteration: with theta the best ratio found so far, a mixed
    integer program minimises ``cut(S) - theta |S|`` over 1 <= |S| <= n/2.
    A negative optimum yields a strictly better cut; a nonnegative one proves
    theta optimal.  Objective coefficients are scaled to integers so the
    stopping test is exact.
    """
    adj = _adjacency(g)
    nodes, index = _indexed(adj)
    n = len(nodes)
    if n < 2:
        raise SingleNode("edge expansion needs at least two nodes")
    if not is_connected(adj):
        return Fraction(0)
    edges = sorted({edge_key_idx(index[u], index[w]) for u in nodes for w in adj[u]})
    m = len(edges)
    rows, cols, vals = [], [], []
    for k, (a, b) in enumerate(edges):
        # y_k >= x_a - x_b and y_k >= x_b - x_a
        rows += [2 * k] * 3 + [2 * k + 1] * 3
        cols += [a, b, n + k, a, b, n + k]
        vals += [1, -1, -1, -1, 1, -1]
    rows += [2 * m] * n
    cols += list(range(n))
    vals += [1] * n
    a_mat = coo_matrix((vals, (rows, cols)), shape=(2 * m + 1, n + m)).tocsr()
    cons = LinearConstraint(a_mat, np.r_[np.full(2 * m, -np.inf), 1], np.r_[np.zeros(2 * m), n // 2])
    integrality = np.r_[np.ones(n), np.zeros(m)]
    theta = start if start is not None else sweep_cut_upper_bound(adj)
    while True:
        c = np.r_[np.full(n, -float(theta.numerator)), np.full(m, float(theta.denominator))]
        res = milp(c, constraints=cons, integrality=integrality, bounds=Bounds(0, 1),
                   options={"mip_rel_gap": 0.0})
        if res.x is None:
            raise RuntimeError(f"MILP solver failed: {res.message}")
        inside = {i for i in range(n) if res.x[i] > 0.5}
        cut = sum(1 for a, b in edges if (a in inside) != (b in inside))
        ratio = Fraction(cut, len(inside))
        if ratio >= theta:
            return theta
        theta = ratio


def edge_key_idx(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


def expansion_floor(g_shadow: ShadowGraph, cutoff: int = EXACT_CUTOFF, hints=(),
                    target: Optional[Fraction] = None) -> tuple[Fraction, bool]:
    """min(1, h(G')), or a value at least as large.

    The second element says whether the value is exact.  G' up to ``cutoff``
    nodes is enumerated.  Larger G' is first tried cheaply: the spectral
    lower bound may certify h(G') >= 1, and the best known concrete cut of G'
    bounds h(G') from above (which only makes the floor stricter).  If that
    upper-bound floor still exceeds ``target`` (the value being compared
    against it), the exact MILP value is computed instead.
    """
    adj = g_shadow.adj
    if len(adj) <= cutoff:
        return min(Fraction(1), edge_expansion_exact(adj, cutoff)), True
    if spectral_expansion_lower_bound(adj) >= 1:
        return Fraction(1), True
    ub = min(Fraction(1), expansion_upper_bound(adj, hints))
    if target is not None and target < ub:
        return min(Fraction(1), edge_expansion_milp(adj, ub)), True
    return ub, False


def theorem1_check(g_t: HealedGraph, g_shadow: ShadowGraph, kappa: int,
                   exact_cutoff: int = EXACT_CUTOFF) -> dict[str, Verdict]:
    out = {}
    bad = degree_bound_violations(g_t, kappa)
    out["degree"] = Verdict("degree", "fail" if bad else "pass",
                            {"violations": bad, "ratio_max": degree_ratio_max(g_t)})

    n = len(g_t)
    smax, smean = stretch_report(g_t, g_shadow)
    out["stretch"] = Verdict("stretch", "report",
                             {"stretch_max": smax, "per_log2n": smax / math.log2(n) if n > 1 else 0.0})

    if n >= 2 and n <= exact_cutoff:
        h_t, witness = edge_expansion_witness(g_t, exact_cutoff)
        hints = (witness, frozenset(g_t.nodes) - witness)
        floor, exact = expansion_floor(g_shadow, exact_cutoff, hints=hints, target=h_t)
        ok = h_t >= floor
        out["expansion"] = Verdict("expansion", "pass" if ok else "fail",
                                   {"h": h_t, "floor": floor, "floor_exact": exact, "witness": sorted(witness)})
    elif n >= 2:
        out["expansion"] = Verdict("expansion", "report",
                                   {"h_lower": spectral_expansion_lower_bound(g_t)})

    if n >= 2 and len(g_shadow) <= DENSE_CUTOFF:
        degs = [g_shadow.degree(x) for x in g_shadow.adj]
        out["spectral"] = Verdict("spectral", "report", {
            "lambda_t": lambda2(g_t),
            "lambda_shadow": lambda2(g_shadow) if len(g_shadow) >= 2 else 0.0,
            "dmin_shadow": min(degs),
            "dmax_shadow": max(degs),
        })
    return out


def cost_report(ledger: CostLedger) -> dict:
    """Amortized messages per deletion against the A(p) baseline."""
    p = ledger.deletions
    a_p = ledger.amortized_baseline
    if not p:
        return {"amortized_messages": 0.0, "A_p": None, "ratio": None, "max_rounds": ledger.max_rounds}
    amortized = ledger.total_messages / p
    return {
        "amortized_messages": amortized,
        "A_p": a_p,
        "ratio": amortized / a_p if a_p else None,
        "max_rounds": ledger.max_rounds,
    }


def rounds_bound(n: int) -> int:
    """Per-repair round budget ceil(log2 n) + 3."""
    return clog2(n) + 3


# -- report rows ---------------------------------------------------------------------


@dataclass
class MetricsReport:
    n: int
    m: int
    connected: bool
    h_exact: Optional[Fraction]
    h_lower_spectral: float
    phi_exact: Optional[Fraction]
    lambda2: float
    lambda2_normalized: float
    stretch_max: float
    stretch_mean: float
    degree_ratio_max: float

    def as_dict(self) -> dict:
        return asdict(self)


def measure(g: HealedGraph, exact_cutoff: int = EXACT_CUTOFF, sample_cap: int = 512,
            rng: Optional[random.Random] = None) -> MetricsReport:
    n = len(g)
    h = phi = None
    if 2 <= n <= exact_cutoff:
        h, phi = expansion_and_cheeger(g, exact_cutoff)
        if not is_connected(g):
            phi = Fraction(0)
    spectral = n >= 2 and n <= DENSE_CUTOFF
    smax, smean = stretch_report(g, g.shadow, sample_cap, rng)
    return MetricsReport(
        n=n,
        m=g.num_edges(),
        connected=is_connected(g),
        h_exact=h,
        h_lower_spectral=spectral_expansion_lower_bound(g) if spectral else 0.0,
        phi_exact=phi,
        lambda2=lambda2(g) if spectral else 0.0,
        lambda2_normalized=normalized_lambda2(g) if spectral else 0.0,
        stretch_max=smax,
        stretch_mean=smean,
        degree_ratio_max=degree_ratio_max(g),
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, float):
        return repr(round(x, 12))
    return str(x)


def csv_row(t: int, report: MetricsReport, ledger: CostLedger) -> list[str]:
    return [_fmt(x) for x in (
        t, report.n, report.m, report.connected, report.h_exact, report.h_lower_spectral,
        report.phi_exact, report.lambda2, report.stretch_max, report.stretch_mean,
        report.degree_ratio_max, ledger.total_rounds, ledger.total_messages, ledger.amortized_baseline,
    )]
