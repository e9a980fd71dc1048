"""Weighted trust propagation engines and baseline configurations.

Two engines spread local trust scores through the graph:

* a weighted random walk, where node u passes its previous-round score to
  neighbor v in proportion to the edge trust score S_{u,v} relative to u's
  total incident trust, for d = ceil(log2 n) rounds by default;
* weighted loopy belief propagation on a pairwise binary Markov random field
  whose node/edge potentials are (S_v, 1 - S_v) and (S_{u,v}, 1 - S_{u,v}),
  run synchronously with per-message normalization for d = 8 rounds by
  default.

Baselines (seed-only random walk with final degree normalization, a
restart walk from Sybil seeds, seed-only belief propagation, and the
victim-probability edge weighting) are thin configurations of the same
engines. All updates are synchronous and double-buffered, so results are
bit-identical across runs and worker counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import TrainingSet
from .graph import Graph

SEED_BENIGN_SCORE = 0.9
SEED_SYBIL_SCORE = 0.1

DEFAULT_LBP_ITERATIONS = 8


@dataclass(frozen=True)
class PropagationConfig:
    """Engine selection plus iteration count and seed handling."""

    engine: str = "lbp"  # {"random_walk", "lbp"}
    iterations: int | None = None  # None: engine default (ceil(log2 n) / 8)
    seeds: TrainingSet | None = None
    pin_seeds: bool = False  # re-apply seed scores after every round
    # Divide final walk scores by the node's total incident edge trust before
    # ranking. Off by default (the raw update accumulates trust in proportion
    # to weighted degree); rankings across nodes of very different degree
    # want this on.
    degree_normalize: bool = False


def default_walk_iterations(n: int) -> int:
    """Early-termination round count for the random walk: ceil(log2 n)."""
    return max(1, math.ceil(math.log2(max(n, 2))))


def _apply_seeds(scores: np.ndarray, seeds: TrainingSet | None) -> np.ndarray:
    if seeds is None:
        return scores
    scores = scores.copy()
    scores[seeds.benign] = SEED_BENIGN_SCORE
    scores[seeds.sybil] = SEED_SYBIL_SCORE
    return scores


def _check_edge_scores(g: Graph, edge_scores: np.ndarray, *, positive: bool) -> np.ndarray:
    edge_scores = np.asarray(edge_scores, dtype=float)
    if edge_scores.shape[0] != g.edge_count:
        raise ValueError(f"expected {g.edge_count} edge scores, got {edge_scores.shape[0]}")
    if not np.all(np.isfinite(edge_scores)):
        raise ValueError("edge scores contain missing or non-finite values")
    if positive:
        if edge_scores.size and (edge_scores.min() <= 0.0 or edge_scores.max() >= 1.0):
            raise ValueError("edge potentials must lie strictly inside (0, 1)")
    elif edge_scores.size and edge_scores.min() < 0.0:
        raise ValueError("edge weights must be non-negative")
    return edge_scores


def _walk(g: Graph, init: np.ndarray, position_weights: np.ndarray, iterations: int,
          restart: float = 0.0, restart_dist: np.ndarray | None = None,
          pin: TrainingSet | None = None, hold_isolated: bool = False) -> np.ndarray:
    """Shared power-iteration core: scores <- column-normalized-weight update.

    Nodes with zero incident weight distribute nothing (their column is zero).
    """
    n = g.node_count
    rows = g.position_rows()
    cols = g.indices
    wsum = np.bincount(rows, weights=position_weights, minlength=n)
    share = np.where(wsum[cols] > 0, position_weights / np.maximum(wsum[cols], 1e-300), 0.0)
    isolated = g.degrees == 0
    scores = init.astype(float, copy=True)
    for _ in range(iterations):
        # bincount returns int64 zeros when the graph has no edges at all
        scores = np.bincount(rows, weights=scores[cols] * share, minlength=n).astype(float, copy=False)
        if restart:
            scores = (1.0 - restart) * scores + restart * restart_dist
        if hold_isolated:
            scores[isolated] = init[isolated]
        if pin is not None:
            scores[pin.benign] = SEED_BENIGN_SCORE
            scores[pin.sybil] = SEED_SYBIL_SCORE
    return scores


def weighted_random_walk(g: Graph, node_scores: np.ndarray, edge_scores: np.ndarray,
                         cfg: PropagationConfig = PropagationConfig()) -> np.ndarray:
    """Propagate local node scores along edge-trust-weighted walks.

    Every node starts from its local score (seeds pinned to 0.9/0.1 at
    initialization only, unless cfg.pin_seeds); each round v collects
    S(u) * S_{u,v} / sum_w S_{u,w} from its neighbors. Isolated nodes keep
    their initial score.
    """
    if cfg.iterations is not None and cfg.iterations < 1:
        raise ValueError("iteration count must be at least 1")
    d = cfg.iterations if cfg.iterations is not None else default_walk_iterations(g.node_count)
    edge_scores = _check_edge_scores(g, edge_scores, positive=False)
    node_scores = np.asarray(node_scores, dtype=float)
    if node_scores.shape[0] != g.node_count:
        raise ValueError("node score array must cover every node")
    init = _apply_seeds(node_scores, cfg.seeds)
    position_weights = edge_scores[g.edge_ids]
    scores = _walk(g, init, position_weights, d,
                   pin=cfg.seeds if cfg.pin_seeds else None, hold_isolated=True)
    if cfg.degree_normalize:
        # The walk's stationary background is proportional to the weighted
        # degree, so that is the right normalizer (raw degree would leave the
        # mean incident edge score as per-node noise).
        wdeg = np.bincount(g.position_rows(), weights=position_weights, minlength=g.node_count)
        scores = np.where(wdeg > 0, scores / np.maximum(wdeg, 1e-300), scores)
    return scores


def weighted_lbp(g: Graph, node_scores: np.ndarray, edge_scores: np.ndarray,
                 cfg: PropagationConfig = PropagationConfig()) -> np.ndarray:
    """Synchronous sum-product propagation on the score-derived pairwise MRF.

    Messages start uniform and are renormalized to sum 1 after every round;
    the final score is the normalized positive-label belief
    bel(+1) / (bel(+1) + bel(-1)). Isolated nodes keep their local score.
    """
    if cfg.iterations is not None and cfg.iterations < 1:
        raise ValueError("iteration count must be at least 1")
    d = cfg.iterations if cfg.iterations is not None else DEFAULT_LBP_ITERATIONS
    edge_scores = _check_edge_scores(g, edge_scores, positive=True)
    node_scores = np.asarray(node_scores, dtype=float)
    if node_scores.shape[0] != g.node_count:
        raise ValueError("node score array must cover every node")
    s = _apply_seeds(node_scores, cfg.seeds)
    if s.size and (s.min() <= 0.0 or s.max() >= 1.0):
        raise ValueError("node potentials must lie strictly inside (0, 1)")

    messages = init_messages(g)
    for _ in range(d):
        messages = update_messages(g, s, edge_scores, messages)
    return beliefs(g, s, messages)


def init_messages(g: Graph) -> np.ndarray:
    """Uniform starting messages, one 2-vector per directed edge position."""
    return np.full((g.indices.shape[0], 2), 0.5)


def update_messages(g: Graph, node_scores: np.ndarray, edge_scores: np.ndarray,
                    messages: np.ndarray) -> np.ndarray:
    """One synchronous round of sum-product updates with per-message normalization.

    The position k = (v, u) of the CSR arrays holds the message from u into v.
    Neighbor products are accumulated in log space so high-degree nodes cannot
    underflow the linear-domain messages.
    """
    rows = g.position_rows()
    cols = g.indices
    rev = g.reverse_positions()
    logm = np.log(messages)
    incoming = np.column_stack([
        np.bincount(rows, weights=logm[:, 0], minlength=g.node_count),
        np.bincount(rows, weights=logm[:, 1], minlength=g.node_count),
    ])
    # Product over N(u) \ {v}, up to a per-message constant absorbed by normalization.
    excl = incoming[cols] - logm[rev]
    excl -= excl.max(axis=1, keepdims=True)
    prod = np.exp(excl)

    se = edge_scores[g.edge_ids]
    pot_pos = node_scores[cols]
    pot_neg = 1.0 - pot_pos
    raw_pos = pot_pos * se * prod[:, 0] + pot_neg * (1.0 - se) * prod[:, 1]
    raw_neg = pot_pos * (1.0 - se) * prod[:, 0] + pot_neg * se * prod[:, 1]
    total = raw_pos + raw_neg
    if not np.all(np.isfinite(total)) or (total.size and total.min() <= 0.0):
        raise FloatingPointError("non-finite or non-positive message encountered")
    return np.column_stack([raw_pos / total, raw_neg / total])


def beliefs(g: Graph, node_scores: np.ndarray, messages: np.ndarray) -> np.ndarray:
    """Final scores bel(+1) / (bel(+1) + bel(-1)) from the current messages."""
    rows = g.position_rows()
    logm = np.log(messages)
    log_pos = np.log(node_scores) + np.bincount(rows, weights=logm[:, 0], minlength=g.node_count)
    log_neg = np.log(1.0 - node_scores) + np.bincount(rows, weights=logm[:, 1], minlength=g.node_count)
    shift = np.maximum(log_pos, log_neg)
    bel_pos = np.exp(log_pos - shift)
    bel_neg = np.exp(log_neg - shift)
    return bel_pos / (bel_pos + bel_neg)


def baseline_sybilrank(g: Graph, benign_seeds: np.ndarray, iterations: int | None = None) -> np.ndarray:
    """Uniform-weight seed-only walk with final degree normalization.

    Benign seeds start with 1/|seeds| each, everything else with 0; after
    ceil(log2 n) rounds each score is divided by the node's degree.
    """
    benign_seeds = np.asarray(benign_seeds, dtype=np.int64)
    if benign_seeds.shape[0] == 0:
        raise ValueError("baseline_sybilrank needs at least one benign seed")
    d = iterations if iterations is not None else default_walk_iterations(g.node_count)
    if d < 1:
        raise ValueError("iteration count must be at least 1")
    init = np.zeros(g.node_count)
    init[benign_seeds] = 1.0 / benign_seeds.shape[0]
    scores = _walk(g, init, np.ones(g.indices.shape[0]), d)
    degrees = g.degrees
    return np.where(degrees > 0, scores / np.maximum(degrees, 1), scores)


def baseline_cia(g: Graph, sybil_seeds: np.ndarray, restart: float = 0.85,
                 iterations: int | None = None) -> np.ndarray:
    """Restart walk from Sybil seeds over uniform weights; returns badness.

    Higher scores mean more Sybil-like; negate for the ascending trust
    ranking used elsewhere.
    """
    sybil_seeds = np.asarray(sybil_seeds, dtype=np.int64)
    if sybil_seeds.shape[0] == 0:
        raise ValueError("baseline_cia needs at least one Sybil seed")
    if not 0.0 < restart <= 1.0:
        raise ValueError("restart probability must lie in (0, 1]")
    d = iterations if iterations is not None else default_walk_iterations(g.node_count)
    if d < 1:
        raise ValueError("iteration count must be at least 1")
    dist = np.zeros(g.node_count)
    dist[sybil_seeds] = 1.0 / sybil_seeds.shape[0]
    return _walk(g, dist.copy(), np.ones(g.indices.shape[0]), d,
                 restart=restart, restart_dist=dist)


def baseline_sybilbelief(g: Graph, seeds: TrainingSet | None, homophily: float = 0.9,
                         iterations: int = DEFAULT_LBP_ITERATIONS) -> np.ndarray:
    """Seed-only belief propagation: node scores 0.5 except seeds, uniform edges."""
    node_scores = np.full(g.node_count, 0.5)
    edge_scores = np.full(g.edge_count, homophily)
    cfg = PropagationConfig(engine="lbp", iterations=iterations, seeds=seeds)
    return weighted_lbp(g, node_scores, edge_scores, cfg)


def integro_edge_weights(g: Graph, victim_prob: np.ndarray, beta: float) -> np.ndarray:
    """Victim-probability edge weights: min{1, beta * (1 - max(p_u, p_v))}."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    victim_prob = np.asarray(victim_prob, dtype=float)
    if victim_prob.shape[0] != g.node_count:
        raise ValueError("victim probability array must cover every node")
    if victim_prob.size and (victim_prob.min() < 0.0 or victim_prob.max() > 1.0):
        raise ValueError("victim probabilities must lie in [0, 1]")
    pmax = np.maximum(victim_prob[g.edge_u], victim_prob[g.edge_v])
    return np.minimum(1.0, beta * (1.0 - pmax))


def baseline_integro(g: Graph, benign_seeds: np.ndarray, victim_prob: np.ndarray,
                     beta: float = 2.0, iterations: int | None = None) -> np.ndarray:
    """Seed-only walk over victim-probability weights, normalized by weighted degree."""
    benign_seeds = np.asarray(benign_seeds, dtype=np.int64)
    if benign_seeds.shape[0] == 0:
        raise ValueError("baseline_integro needs at least one benign seed")
    d = iterations if iterations is not None else default_walk_iterations(g.node_count)
    weights = integro_edge_weights(g, victim_prob, beta)
    init = np.zeros(g.node_count)
    init[benign_seeds] = 1.0 / benign_seeds.shape[0]
    pos_weights = weights[g.edge_ids]
    scores = _walk(g, init, pos_weights, d)
    wdeg = np.bincount(g.position_rows(), weights=pos_weights, minlength=g.node_count)
    return np.where(wdeg > 0, scores / np.maximum(wdeg, 1e-300), scores)
