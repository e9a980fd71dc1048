"""Shared fixtures and independent oracle helpers."""

from __future__ import annotations

import numpy as np
import pytest

from trustprop.graph import BENIGN, SYBIL, DirectedGraph, Graph


def graph_from_pairs(n, pairs) -> Graph:
    pairs = list(pairs)
    u = [a for a, _ in pairs]
    v = [b for _, b in pairs]
    return Graph.from_edges(n, u, v)


def digraph_from_pairs(n, pairs) -> DirectedGraph:
    pairs = list(pairs)
    src = [a for a, _ in pairs]
    dst = [b for _, b in pairs]
    return DirectedGraph.from_edges(n, src, dst)


def random_graph(n, edge_prob, rng) -> Graph:
    """Erdos-style random graph for oracle comparisons."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < edge_prob]
    return graph_from_pairs(n, pairs)


def bfs_components_oracle(g: Graph, restrict=None) -> list[frozenset]:
    """Definition-level BFS component enumeration, independent of the library path."""
    if restrict is None:
        active = set(range(g.node_count))
    else:
        active = set(int(x) for x in restrict)
    seen: set[int] = set()
    comps = []
    for start in sorted(active):
        if start in seen:
            continue
        queue = [start]
        seen.add(start)
        comp = {start}
        while queue:
            v = queue.pop(0)
            for u in g.neighbors(v).tolist():
                if u in active and u not in seen:
                    seen.add(u)
                    comp.add(u)
                    queue.append(u)
        comps.append(frozenset(comp))
    return comps


def modularity_pair_oracle(g: Graph, labels) -> float:
    """O(n^2) direct summation: (1/2m) sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j)."""
    n = g.node_count
    m = g.edge_count
    deg = g.degrees
    adj = np.zeros((n, n))
    for u, v in zip(g.edge_u.tolist(), g.edge_v.tolist()):
        adj[u, v] = adj[v, u] = 1.0
    q = 0.0
    for i in range(n):
        for j in range(n):
            if labels[i] == labels[j]:
                q += adj[i, j] - deg[i] * deg[j] / (2.0 * m)
    return q / (2.0 * m)


def walk_matrix_oracle(g: Graph, edge_values, init, d, hold_isolated=False) -> np.ndarray:
    """Dense column-normalized power iteration for the weighted walk.

    hold_isolated mirrors the engine contract that isolated nodes keep their
    initial score; the seed-only baselines use the raw iteration instead.
    """
    n = g.node_count
    w = np.zeros((n, n))
    for e, (u, v) in enumerate(zip(g.edge_u.tolist(), g.edge_v.tolist())):
        w[u, v] = w[v, u] = edge_values[e]
    colsum = w.sum(axis=0)
    m = np.divide(w, colsum[None, :], out=np.zeros((n, n)), where=colsum[None, :] > 0)
    scores = init.copy()
    isolated = g.degrees == 0
    for _ in range(d):
        scores = m @ scores
        if hold_isolated:
            scores[isolated] = init[isolated]
    return scores


def lbp_enumeration_oracle(g: Graph, node_scores, edge_values) -> np.ndarray:
    """Exact marginals P(X_v = +1) by brute-force enumeration over all labelings.

    Vectorized over the 2^n assignments (n <= ~16).
    """
    n = g.node_count
    node_scores = np.asarray(node_scores, dtype=float)
    edge_values = np.asarray(edge_values, dtype=float)
    codes = np.arange(2 ** n, dtype=np.int64)
    plus = ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)  # (2^n, n)
    weight = np.where(plus, node_scores[None, :], 1.0 - node_scores[None, :]).prod(axis=1)
    same = plus[:, g.edge_u] == plus[:, g.edge_v]
    weight *= np.where(same, edge_values[None, :], 1.0 - edge_values[None, :]).prod(axis=1)
    z = weight.sum()
    total = (weight[:, None] * plus).sum(axis=0)
    return total / z


def auc_pair_oracle(scores, labels) -> float:
    """O(n^2) pair counting over all (sybil, benign) pairs."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    sybil = scores[labels == SYBIL]
    benign = scores[labels == BENIGN]
    wins = 0.0
    for s in sybil:
        for b in benign:
            if s < b:
                wins += 1.0
            elif s == b:
                wins += 0.5
    return wins / (sybil.shape[0] * benign.shape[0])


def random_tree(n, rng) -> list[tuple[int, int]]:
    """Uniform-ish random tree: each node attaches to a random earlier node."""
    return [(v, int(rng.integers(v))) for v in range(1, n)]


@pytest.fixture(scope="session")
def directed_social_scenario():
    """Directed graph where Sybils follow widely, reciprocate everything, and
    sit in sparse neighborhoods; benign users form reciprocal communities.

    Returns (directed_graph, labels).
    """
    rng = np.random.default_rng(20240817)
    n_benign, n_sybil = 300, 150
    n = n_benign + n_sybil
    block = 20
    arcs: set[tuple[int, int]] = set()

    def add(a, b):
        if a != b:
            arcs.add((a, b))

    # Benign communities: dense mutual follows inside each block.
    for start in range(0, n_benign, block):
        members = range(start, min(start + block, n_benign))
        for a in members:
            for b in members:
                if a < b and rng.random() < 0.4:
                    add(a, b)
                    add(b, a)
    # A few cross-block mutual ties plus one-way pending follows.
    for _ in range(n_benign):
        a, b = rng.integers(n_benign, size=2)
        if rng.random() < 0.5:
            add(int(a), int(b))
            add(int(b), int(a))
        else:
            add(int(a), int(b))
    # Sybils: follow many random benign users; 10% follow back (victims).
    for s in range(n_benign, n):
        targets = rng.choice(n_benign, size=20, replace=False)
        for t in targets:
            add(s, int(t))
            if rng.random() < 0.1:
                add(int(t), s)
        # sparse mutual ties among Sybils
        for t in rng.choice(np.arange(n_benign, n), size=2, replace=False):
            if int(t) != s and rng.random() < 0.5:
                add(s, int(t))
                add(int(t), s)
    # Sybils follow back every incoming edge.
    for a, b in list(arcs):
        if b >= n_benign:
            add(b, a)

    dg = digraph_from_pairs(n, sorted(arcs))
    labels = np.full(n, SYBIL, dtype=np.int8)
    labels[:n_benign] = BENIGN
    return dg, labels
