"""Robustness sweeps over synthetic scenarios and the end-to-end pipeline.

Sweeps vary exactly one factor (classifier error rate, attack edges, or Sybil
count) while the others stay at the basic setup, run several trials per grid
point with seeds derived from (base seed, point, trial), and report mean and
standard deviation of AUC (both engines) and accuracy (belief propagation
only, threshold 0.5). The pipeline chains loading, feature extraction, local
classification, edge scoring, propagation and metrics, persisting every
intermediate artifact; stage failures are re-raised tagged with the stage
name.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import classifier, features, metrics, propagate, synth, tsvio
from .graph import (BENIGN, SYBIL, UNKNOWN, DirectedGraph, Graph, load_edge_list,
                    mutualize, read_edge_pairs, remap_ids)

SWEEP_VARIABLES = ("fpr_fnr", "attack_edges", "sybil_count")
SWEEP_MODES = ("node_scores", "edge_scores")


def derive_seed(base_seed: int, *parts) -> int:
    """Stable 63-bit seed derived by hashing (base_seed, *parts)."""
    text = ":".join([str(base_seed)] + [str(p) for p in parts])
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


@dataclass(frozen=True)
class SweepSpec:
    """One swept factor over a value grid, everything else at the base setup."""

    base: synth.ScenarioConfig = field(default_factory=synth.ScenarioConfig)
    variable: str = "fpr_fnr"
    values: tuple = (0.0, 0.1, 0.2, 0.3, 0.4)
    trials: int = 10
    engines: tuple = ("random_walk", "lbp")
    mode: str = "node_scores"
    noise: float = 0.3           # fixed fpr=fnr while sweeping a structural factor
    edge_score_value: float = 0.9
    lbp_iterations: int = propagate.DEFAULT_LBP_ITERATIONS
    rw_iterations: int | None = None
    threads: int = 1

    def validate(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {self.variable!r}")
        if self.mode not in SWEEP_MODES:
            raise ValueError(f"unknown sweep mode {self.mode!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.values:
            raise ValueError("empty value grid")
        for engine in self.engines:
            if engine not in ("random_walk", "lbp"):
                raise ValueError(f"unknown engine {engine!r}")
        for value in self.values:
            self.scenario_for(value, rng_seed=0).validate()
            synth.NoiseConfig(*self.noise_for(value)).validate()

    def scenario_for(self, value, rng_seed: int) -> synth.ScenarioConfig:
        cfg = replace(self.base, rng_seed=rng_seed)
        if self.variable == "attack_edges":
            cfg = replace(cfg, attack_edge_count=int(value))
        elif self.variable == "sybil_count":
            cfg = replace(cfg, sybil_count=int(value))
        return cfg

    def noise_for(self, value) -> tuple[float, float]:
        rate = float(value) if self.variable == "fpr_fnr" else self.noise
        return rate, rate


def _run_trial(spec: SweepSpec, value, trial: int) -> dict[tuple[str, str], float]:
    trial_seed = derive_seed(spec.base.rng_seed, spec.variable, value, trial)
    scenario = spec.scenario_for(value, rng_seed=trial_seed)
    graph, labels = synth.compose_attack_scenario(scenario)
    fpr, fnr = spec.noise_for(value)
    noise = synth.NoiseConfig(fpr=fpr, fnr=fnr, rng_seed=derive_seed(trial_seed, "noise"))

    if spec.mode == "node_scores":
        node_scores = synth.simulate_trust_scores(labels, noise)
        edge_scores = classifier.edge_scores_default(graph, spec.edge_score_value)
        seeds = None
        exclude = None
    else:
        node_scores = np.full(graph.node_count, 0.5)
        edge_scores = synth.simulate_edge_trust_scores(graph, labels, noise)
        rng = np.random.default_rng(derive_seed(trial_seed, "seeds"))
        seeds = classifier.TrainingSet(
            benign=np.array([int(rng.choice(np.flatnonzero(labels == BENIGN)))]),
            sybil=np.array([int(rng.choice(np.flatnonzero(labels == SYBIL)))]),
        )
        exclude = seeds.all_ids

    out: dict[tuple[str, str], float] = {}
    for engine in spec.engines:
        if engine == "lbp":
            cfg = propagate.PropagationConfig(engine="lbp", iterations=spec.lbp_iterations, seeds=seeds)
            final = propagate.weighted_lbp(graph, node_scores, edge_scores, cfg)
            out[("lbp", "accuracy")] = metrics.accuracy_at_threshold(final, labels, 0.5, exclude=exclude)
        else:
            # Rank walk scores degree-normalized: the raw update concentrates
            # trust on hubs, which buries the score signal on heavy-tailed graphs.
            cfg = propagate.PropagationConfig(engine="random_walk", iterations=spec.rw_iterations,
                                              seeds=seeds, degree_normalize=True)
            final = propagate.weighted_random_walk(graph, node_scores, edge_scores, cfg)
        out[(engine, "auc")] = metrics.auc(final, labels, exclude=exclude)
    return out


def run_robustness_sweep(spec: SweepSpec) -> list[tuple]:
    """Run the sweep; returns `(value, engine, metric, mean, std, trials)` rows.

    Trials execute independently (optionally across threads); results are
    keyed by (point, trial) and aggregated in sorted order, so the table is a
    pure function of the spec.
    """
    spec.validate()
    tasks = [(pi, value, trial) for pi, value in enumerate(spec.values)
             for trial in range(spec.trials)]
    results: dict[tuple[int, int], dict] = {}
    if spec.threads > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            futures = {(pi, trial): pool.submit(_run_trial, spec, value, trial)
                       for pi, value, trial in tasks}
        results = {key: fut.result() for key, fut in futures.items()}
    else:
        for pi, value, trial in tasks:
            results[(pi, trial)] = _run_trial(spec, value, trial)

    rows: list[tuple] = []
    for pi, value in enumerate(spec.values):
        per_metric: dict[tuple[str, str], list[float]] = {}
        for trial in range(spec.trials):
            for key, v in results[(pi, trial)].items():
                per_metric.setdefault(key, []).append(v)
        for engine in spec.engines:
            for metric_name in ("accuracy", "auc"):
                vals = per_metric.get((engine, metric_name))
                if vals is None:
                    continue
                arr = np.asarray(vals)
                std = float(arr.std(ddof=1)) if arr.shape[0] > 1 else 0.0
                rows.append((value, engine, metric_name, float(arr.mean()), std, spec.trials))
    return rows


class StageError(RuntimeError):
    """A pipeline stage failed; the message is prefixed with the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass(frozen=True)
class PipelineConfig:
    """End-to-end detection run: training sizes, scoring and engine choices."""

    engine: str = "lbp"               # {"random_walk", "lbp"}
    train_benign: int = 50
    train_sybil: int = 50
    iterations: int | None = None
    pin_seeds: bool = False
    degree_normalize: bool = True     # rank walk scores per degree unit
    edge_score_value: float = 0.9
    edge_metric: str | None = None    # similarity metric instead of the constant
    threshold: float | None = None    # None: cross-validate on the training data
    cv_folds: int = 5
    top_k: tuple[int, ...] = (100, 200, 500)
    baselines: bool = False
    restart: float = 0.85
    homophily: float = 0.9
    integro_beta: float = 2.0
    remap_ids: bool = False           # densify sparse node ids; writes id_map.tsv
    seed: int = 0
    threads: int = 1


@dataclass
class PipelineResult:
    report: metrics.RankingReport
    final_scores: dict[str, np.ndarray]
    node_scores: np.ndarray
    threshold: float
    training: classifier.TrainingSet


def run_detection_pipeline(graph_path, label_path, cfg: PipelineConfig = PipelineConfig(),
                           directed: bool = False, out_dir=None,
                           victim_prob_path=None) -> PipelineResult:
    """Full detection run on an edge-list dataset; persists every intermediate.

    Stages: load -> mutualize (directed inputs) -> features -> classifier ->
    edge-scores -> propagate (chosen engine plus optional baselines) ->
    metrics. Any failure is re-raised as StageError tagged with the stage.
    """
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    with _stage("load"):
        dg = None
        if cfg.remap_ids:
            src, dst = read_edge_pairs(graph_path)
            src, dst, original_ids = remap_ids(src, dst)
            node_count = int(original_ids.shape[0])
            if directed:
                dg = DirectedGraph.from_edges(node_count, src, dst)
            else:
                graph = Graph.from_edges(node_count, src, dst)
            raw_nodes, raw_labels = tsvio.read_label_pairs(label_path)
            dense = np.searchsorted(original_ids, raw_nodes)
            dense_c = np.minimum(dense, node_count - 1)
            known = original_ids[dense_c] == raw_nodes
            labels = np.full(node_count, UNKNOWN, dtype=np.int8)
            labels[dense_c[known]] = raw_labels[known]
            if out is not None:
                tsvio.write_id_map(out / "id_map.tsv", original_ids)
        else:
            if directed:
                dg = load_edge_list(graph_path, directed=True)
                node_count = dg.node_count
            else:
                graph = load_edge_list(graph_path, directed=False)
                node_count = graph.node_count
            labels = tsvio.read_labels(label_path, node_count)

    with _stage("mutualize"):
        if directed:
            graph = mutualize(dg)
            if out is not None:
                tsvio.write_edge_list(out / "mutual_graph.tsv", graph)

    with _stage("features"):
        feats = features.feature_matrix(dg, graph)
        if out is not None:
            tsvio.write_features(out / "features.tsv", feats)

    with _stage("classifier"):
        training = classifier.sample_training_set(
            labels, cfg.train_benign, cfg.train_sybil, derive_seed(cfg.seed, "train-sample"))
        model = classifier.train(feats, training)
        node_scores = classifier.predict_scores(model, feats)
        if cfg.threshold is not None:
            threshold = cfg.threshold
        else:
            threshold = classifier.select_threshold(node_scores, training, cfg.cv_folds)
        if out is not None:
            classifier.save_model(out / "model.txt", model)
            tsvio.write_node_scores(out / "local_scores.tsv", node_scores)
            tsvio.write_labels(out / "train_seeds.tsv",
                               training_label_map(node_count, training))

    with _stage("edge-scores"):
        if cfg.edge_metric is not None:
            edge_scores = classifier.edge_scores_similarity(graph, cfg.edge_metric)
        else:
            edge_scores = classifier.edge_scores_default(graph, cfg.edge_score_value)
        if out is not None:
            tsvio.write_edge_scores(out / "edge_scores.tsv", graph, edge_scores)

    with _stage("propagate"):
        prop_cfg = propagate.PropagationConfig(
            engine=cfg.engine, iterations=cfg.iterations, seeds=training,
            pin_seeds=cfg.pin_seeds, degree_normalize=cfg.degree_normalize)
        final_scores: dict[str, np.ndarray] = {}
        if cfg.engine == "lbp":
            final_scores["sf_lbp"] = propagate.weighted_lbp(graph, node_scores, edge_scores, prop_cfg)
            main_engine = "sf_lbp"
        elif cfg.engine == "random_walk":
            final_scores["sf_rw"] = propagate.weighted_random_walk(graph, node_scores, edge_scores, prop_cfg)
            main_engine = "sf_rw"
        else:
            raise ValueError(f"unknown engine {cfg.engine!r}")
        if cfg.baselines:
            final_scores["sybilrank"] = propagate.baseline_sybilrank(graph, training.benign, cfg.iterations)
            final_scores["cia"] = -propagate.baseline_cia(graph, training.sybil, cfg.restart, cfg.iterations)
            final_scores["sybilbelief"] = propagate.baseline_sybilbelief(graph, training, cfg.homophily)
            if victim_prob_path is not None:
                victim_prob = tsvio.read_node_scores(victim_prob_path, node_count)
                victim_prob = np.nan_to_num(victim_prob, nan=0.0)
                final_scores["integro"] = propagate.baseline_integro(
                    graph, training.benign, victim_prob, cfg.integro_beta, cfg.iterations)
        if out is not None:
            for name, scores in final_scores.items():
                tsvio.write_node_scores(out / f"final_scores_{name}.tsv", scores)

    with _stage("metrics"):
        exclude = training.all_ids
        report = metrics.build_ranking_report(final_scores[main_engine], labels,
                                              threshold=threshold, exclude=exclude, graph=graph)
        rows: list[tuple] = [("threshold", "cv" if cfg.threshold is None else "fixed", threshold)]
        for name in sorted(final_scores):
            rows.append(("auc", name, metrics.auc(final_scores[name], labels, exclude=exclude)))
        rows.append(("accuracy", f"threshold={threshold!r}", report.metrics["accuracy"]))
        evaluated = report.node_ids.shape[0]
        for k in cfg.top_k:
            if k <= evaluated:
                fraction = metrics.top_k_sybil_fraction(report, k)
                report.metrics[f"top_{k}_sybil_fraction"] = fraction
                rows.append(("top_k_sybil_fraction", k, fraction))
                for cls, count in metrics.decompose_top_k(report, k).items():
                    rows.append((f"top_k_{cls}", k, count))
        if out is not None:
            tsvio.write_metrics_report(out / "metrics.tsv", rows)
            metrics.write_ranking(out / "ranking.tsv", report)
        report.metrics.update({f"auc_{name}": metrics.auc(s, labels, exclude=exclude)
                               for name, s in final_scores.items()})

    return PipelineResult(report=report, final_scores=final_scores,
                          node_scores=node_scores, threshold=threshold, training=training)


def training_label_map(node_count: int, training: classifier.TrainingSet) -> np.ndarray:
    """Label array marking only the training seeds (everything else unknown)."""
    seed_labels = np.full(node_count, UNKNOWN, dtype=np.int8)
    seed_labels[training.benign] = BENIGN
    seed_labels[training.sybil] = SYBIL
    return seed_labels
