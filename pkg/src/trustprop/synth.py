"""Synthetic benign/Sybil scenarios and simulated noisy local trust scores.

Both regions are grown with preferential attachment and joined by uniformly
random attack edges. Local classifier outputs are simulated by drawing scores
from [0.1, 0.9] on the correct or wrong side of the 0.5 threshold according
to configured false positive / false negative rates. Everything is
deterministic given the configured seeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BENIGN, SYBIL, UNKNOWN, Graph


@dataclass(frozen=True)
class ScenarioConfig:
    """Two preferential-attachment regions joined by random attack edges."""

    benign_count: int = 1000
    sybil_count: int = 500
    avg_degree: int = 10
    attack_edge_count: int = 1000
    rng_seed: int = 0
    # Open choice: attack endpoints can favor high-degree benign nodes.
    degree_biased_attacks: bool = False

    def validate(self) -> None:
        if self.benign_count <= 0 or self.sybil_count <= 0:
            raise ValueError("region sizes must be positive")
        if self.avg_degree <= 0:
            raise ValueError("avg_degree must be positive")
        if self.attack_edge_count < 0:
            raise ValueError("attack_edge_count must be non-negative")
        if self.attack_edge_count > self.benign_count * self.sybil_count:
            raise ValueError("attack_edge_count exceeds number of distinct cross pairs")

    @property
    def edges_per_node(self) -> int:
        return max(1, round(self.avg_degree / 2))


@dataclass(frozen=True)
class NoiseConfig:
    """Error rates of the simulated local classifier (0.5 decision threshold)."""

    fpr: float
    fnr: float
    rng_seed: int = 0

    def validate(self) -> None:
        if not (0.0 <= self.fpr <= 1.0 and 0.0 <= self.fnr <= 1.0):
            raise ValueError("fpr and fnr must lie in [0, 1]")


def preferential_attachment(n: int, edges_per_node: int, seed) -> Graph:
    """Grow a connected graph where arrivals attach to degree-proportional targets.

    The seed graph is a clique on edges_per_node + 1 nodes so degree-proportional
    sampling is well defined from the first arrival. Average degree approaches
    2 * edges_per_node.
    """
    if edges_per_node < 1:
        raise ValueError("edges_per_node must be at least 1")
    if n <= edges_per_node:
        raise ValueError(f"need n > edges_per_node, got n={n}, edges_per_node={edges_per_node}")
    rng = np.random.default_rng(seed)
    m0 = edges_per_node + 1
    us: list[int] = []
    vs: list[int] = []
    # Each clique node appears once per incident edge: degree m0 - 1 each.
    repeated: list[int] = []
    for a in range(m0):
        for b in range(a + 1, m0):
            us.append(a)
            vs.append(b)
        repeated.extend([a] * (m0 - 1))
    for new in range(m0, n):
        targets: set[int] = set()
        while len(targets) < edges_per_node:
            targets.add(repeated[int(rng.integers(len(repeated)))])
        for t in sorted(targets):
            us.append(new)
            vs.append(t)
            repeated.append(t)
        repeated.extend([new] * edges_per_node)
    return Graph.from_edges(n, us, vs)


def compose_attack_scenario(cfg: ScenarioConfig) -> tuple[Graph, np.ndarray]:
    """Build the joined benign+Sybil graph and its label map.

    Benign nodes occupy ids [0, benign_count), Sybil nodes the rest. Exactly
    attack_edge_count distinct cross-region edges are sampled (uniformly, or
    with the benign endpoint degree-biased when configured).
    """
    cfg.validate()
    seq = np.random.SeedSequence(cfg.rng_seed)
    seed_b, seed_s, seed_a = seq.spawn(3)
    gb = preferential_attachment(cfg.benign_count, cfg.edges_per_node, seed_b)
    gs = preferential_attachment(cfg.sybil_count, cfg.edges_per_node, seed_s)
    n = cfg.benign_count + cfg.sybil_count
    us = [gb.edge_u, gs.edge_u + cfg.benign_count]
    vs = [gb.edge_v, gs.edge_v + cfg.benign_count]

    rng = np.random.default_rng(seed_a)
    benign_degrees = gb.degrees
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < cfg.attack_edge_count:
        if cfg.degree_biased_attacks:
            b = int(rng.choice(cfg.benign_count, p=benign_degrees / benign_degrees.sum()))
        else:
            b = int(rng.integers(cfg.benign_count))
        s = cfg.benign_count + int(rng.integers(cfg.sybil_count))
        chosen.add((b, s))
    if chosen:
        attack = np.array(sorted(chosen), dtype=np.int64)
        us.append(attack[:, 0])
        vs.append(attack[:, 1])

    graph = Graph.from_edges(n, np.concatenate(us), np.concatenate(vs))
    labels = np.full(n, SYBIL, dtype=np.int8)
    labels[:cfg.benign_count] = BENIGN
    return graph, labels


def _half_interval_draws(rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform draws from the two halves of [0.1, 0.9]: (0.5, 0.9] and [0.1, 0.5)."""
    u = rng.random(size)
    return 0.9 - 0.4 * u, 0.1 + 0.4 * u


def simulate_trust_scores(labels: np.ndarray, noise: NoiseConfig) -> np.ndarray:
    """Simulate local node trust scores for fully labeled nodes.

    A benign node scores in (0.5, 0.9] with probability 1 - fpr and in
    [0.1, 0.5) otherwise; Sybil nodes are symmetric under fnr. No score is
    ever exactly 0.5.
    """
    noise.validate()
    labels = np.asarray(labels)
    if np.any(labels == UNKNOWN):
        raise ValueError("simulate_trust_scores requires every node to be labeled")
    rng = np.random.default_rng(noise.rng_seed)
    flip = rng.random(labels.shape[0])
    high, low = _half_interval_draws(rng, labels.shape[0])
    benign = labels == BENIGN
    correct = np.where(benign, flip >= noise.fpr, flip >= noise.fnr)
    scores = np.where(benign == correct, high, low)
    return scores


def simulate_edge_trust_scores(g: Graph, labels: np.ndarray, noise: NoiseConfig) -> np.ndarray:
    """Simulate local edge trust scores; ground truth is "endpoints share a label".

    A same-label edge scores in (0.5, 0.9] with probability 1 - fnr; an attack
    edge scores in [0.1, 0.5) with probability 1 - fpr.
    """
    noise.validate()
    labels = np.asarray(labels)
    if np.any(labels == UNKNOWN):
        raise ValueError("simulate_edge_trust_scores requires every node to be labeled")
    rng = np.random.default_rng(noise.rng_seed)
    same = labels[g.edge_u] == labels[g.edge_v]
    flip = rng.random(g.edge_count)
    high, low = _half_interval_draws(rng, g.edge_count)
    correct = np.where(same, flip >= noise.fnr, flip >= noise.fpr)
    return np.where(same == correct, high, low)
