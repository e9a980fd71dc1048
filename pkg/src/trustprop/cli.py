"""Command-line interface binding all toolkit stages for batch use.

Every subcommand writes its outputs under --out-dir with fixed file names.
Exit codes: 0 success, 1 usage error, 2 data error. All randomness flows from
--seed; per-stage seeds are derived by stable hashing, so reruns with the
same inputs, seed and thread count are byte-identical.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import classifier, features, harness, metrics, propagate, synth, tsvio
from .graph import (BENIGN, SYBIL, UNKNOWN, EdgeListParseError, component_census,
                    connected_components, load_edge_list, modularity, mutualize)

VERSION = "0.1.0"
VERSION_LINE = (f"trustprop {VERSION} "
                f"(model format {classifier.MODEL_FORMAT_VERSION}, tsv format {tsvio.FORMAT_VERSION})")


class UsageError(Exception):
    """Bad flags or config keys; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p]


def _float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p]


def _str_list(text: str) -> list[str]:
    return [p for p in text.split(",") if p]


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweep trials")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--config", default=None, help="key = value overrides file")

    parser = _Parser(prog="trustprop", description=__doc__)
    parser.add_argument("--version", action="version", version=VERSION_LINE)
    subs = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, _Parser] = {}

    def sub(name: str, help_text: str) -> _Parser:
        p = subs.add_parser(name, parents=[common], help=help_text)
        registry[name] = p
        return p

    p = sub("generate", "synthesize a benign/Sybil attack scenario")
    p.add_argument("--benign", type=int, default=1000)
    p.add_argument("--sybil", type=int, default=500)
    p.add_argument("--avg-degree", type=int, default=10)
    p.add_argument("--attack-edges", type=int, default=1000)
    p.add_argument("--degree-biased-attacks", action="store_true")
    p.add_argument("--fpr", type=float, default=None, help="also emit simulated node scores")
    p.add_argument("--fnr", type=float, default=None)

    p = sub("mutualize", "directed edge list -> undirected mutual-edge graph")
    p.add_argument("--input", required=True)

    p = sub("features", "extract per-node structural features")
    p.add_argument("--graph", required=True)
    p.add_argument("--undirected", action="store_true", help="treat the input as undirected")

    p = sub("train", "fit the local classifier and emit node trust scores")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--train-benign", type=int, default=50)
    p.add_argument("--train-sybil", type=int, default=50)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--folds", type=int, default=5)

    p = sub("score-edges", "emit per-edge trust scores")
    p.add_argument("--graph", required=True)
    p.add_argument("--value", type=float, default=None, help="constant edge score (default 0.9)")
    p.add_argument("--metric", choices=classifier.SIMILARITY_METRICS, default=None)

    p = sub("propagate", "run a propagation engine over score files")
    p.add_argument("--engine", choices=("random_walk", "lbp"), default="lbp")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--graph", required=True)
    p.add_argument("--node-scores", required=True)
    p.add_argument("--edge-scores", required=True)
    p.add_argument("--seeds", default=None, help="label-format file of trusted seed nodes")
    p.add_argument("--pin-seeds", action="store_true")
    p.add_argument("--degree-normalize", action="store_true",
                   help="divide final walk scores by degree")

    p = sub("rank", "write the ascending ranking file for final scores")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--graph", default=None, help="enables Sybil component classes")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--exclude", default=None, help="label-format file of nodes to drop")

    p = sub("evaluate", "compute AUC / accuracy / top-K metrics")
    p.add_argument("--scores", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--top-k", type=_int_list, default=[100, 200, 500])
    p.add_argument("--graph", default=None)
    p.add_argument("--exclude", default=None)

    p = sub("sweep", "robustness sweep over synthetic scenarios")
    p.add_argument("--variable", choices=harness.SWEEP_VARIABLES, default="fpr_fnr")
    p.add_argument("--values", type=_float_list, default=[0.0, 0.1, 0.2, 0.3, 0.4])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--mode", choices=harness.SWEEP_MODES, default="node_scores")
    p.add_argument("--engines", type=_str_list, default=["random_walk", "lbp"])
    p.add_argument("--benign", type=int, default=1000)
    p.add_argument("--sybil", type=int, default=500)
    p.add_argument("--avg-degree", type=int, default=10)
    p.add_argument("--attack-edges", type=int, default=1000)
    p.add_argument("--noise", type=float, default=0.3)

    p = sub("pipeline", "end-to-end detection on an edge-list dataset")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--engine", choices=("random_walk", "lbp"), default="lbp")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--train-benign", type=int, default=50)
    p.add_argument("--train-sybil", type=int, default=50)
    p.add_argument("--edge-value", type=float, default=0.9)
    p.add_argument("--edge-metric", choices=classifier.SIMILARITY_METRICS, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--pin-seeds", action="store_true")
    p.add_argument("--raw-walk-scores", action="store_true",
                   help="rank walk scores without degree normalization")
    p.add_argument("--baselines", action="store_true")
    p.add_argument("--restart", type=float, default=0.85, help="restart-walk baseline parameter")
    p.add_argument("--homophily", type=float, default=0.9, help="seed-only LBP baseline edge score")
    p.add_argument("--beta", type=float, default=2.0, help="victim-weight baseline parameter")
    p.add_argument("--victim-probs", default=None)
    p.add_argument("--remap-ids", action="store_true",
                   help="densify sparse node ids (writes id_map.tsv)")
    p.add_argument("--top-k", type=_int_list, default=[100, 200, 500])

    p = sub("components", "connected-component census")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", default=None)
    p.add_argument("--sybil-only", action="store_true", help="census of the Sybil-induced subgraph")

    p = sub("modularity", "two-group Newman modularity of a labeled graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--labels", required=True)

    return parser, registry


def _apply_config_file(args, registry) -> list[str] | None:
    """Validate config-file keys and return set_defaults overrides, or None."""
    if not args.config:
        return None
    sub = registry[args.command]
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    overrides = {}
    with open(args.config, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise UsageError(f"{args.config}:{lineno}: expected 'key = value'")
            key, _, value = text.partition("=")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if key not in actions:
                raise UsageError(f"{args.config}:{lineno}: unknown key {key!r} for '{args.command}'")
            action = actions[key]
            if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                if value.lower() not in ("true", "false", "0", "1", "yes", "no"):
                    raise UsageError(f"{args.config}:{lineno}: boolean expected for {key!r}")
                overrides[key] = value.lower() in ("true", "1", "yes")
            elif action.type is not None:
                try:
                    overrides[key] = action.type(value)
                except ValueError:
                    raise UsageError(f"{args.config}:{lineno}: bad value for {key!r}") from None
            else:
                overrides[key] = value
    sub.set_defaults(**overrides)
    return overrides


def _max_node_id(path) -> int:
    top = -1
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            first = text.split()[0]
            try:
                top = max(top, int(first))
            except ValueError:
                continue
    return top


def _infer_node_count(*paths) -> int:
    return max((_max_node_id(p) for p in paths if p), default=-1) + 1


def _read_seed_set(path, node_count) -> classifier.TrainingSet:
    seed_labels = tsvio.read_labels(path, node_count)
    return classifier.TrainingSet(benign=np.flatnonzero(seed_labels == BENIGN),
                                  sybil=np.flatnonzero(seed_labels == SYBIL))


def _read_scores_for(path, node_count: int, labels: np.ndarray) -> np.ndarray:
    """Read final scores; every labeled node must have one, unlabeled default high."""
    scores = tsvio.read_node_scores(path, node_count)
    missing = np.isnan(scores)
    if np.any(missing & (labels != UNKNOWN)):
        raise ValueError(f"{path}: labeled node is missing a score")
    return np.nan_to_num(scores, nan=np.inf)


def _cmd_generate(args, out: Path) -> int:
    cfg = synth.ScenarioConfig(
        benign_count=args.benign, sybil_count=args.sybil, avg_degree=args.avg_degree,
        attack_edge_count=args.attack_edges, rng_seed=args.seed,
        degree_biased_attacks=args.degree_biased_attacks)
    graph, labels = synth.compose_attack_scenario(cfg)
    tsvio.write_edge_list(out / "graph.tsv", graph)
    tsvio.write_labels(out / "labels.tsv", labels)
    if args.fpr is not None or args.fnr is not None:
        noise = synth.NoiseConfig(fpr=args.fpr or 0.0, fnr=args.fnr or 0.0,
                                  rng_seed=harness.derive_seed(args.seed, "node-noise"))
        tsvio.write_node_scores(out / "node_scores.tsv", synth.simulate_trust_scores(labels, noise))
    print(f"generated {graph.node_count} nodes, {graph.edge_count} edges -> {out}")
    return 0


def _cmd_mutualize(args, out: Path) -> int:
    dg = load_edge_list(args.input, directed=True)
    graph = mutualize(dg)
    tsvio.write_edge_list(out / "mutual_graph.tsv", graph)
    print(f"retained {graph.edge_count} mutual edges of {dg.edge_count} arcs")
    return 0


def _cmd_features(args, out: Path) -> int:
    if args.undirected:
        feats = features.feature_matrix(None, load_edge_list(args.graph, directed=False))
    else:
        feats = features.feature_matrix(load_edge_list(args.graph, directed=True))
    tsvio.write_features(out / "features.tsv", feats)
    return 0


def _cmd_train(args, out: Path) -> int:
    node_count = _infer_node_count(args.features, args.labels)
    feats = tsvio.read_features(args.features, node_count)
    labels = tsvio.read_labels(args.labels, node_count)
    training = classifier.sample_training_set(
        labels, args.train_benign, args.train_sybil, harness.derive_seed(args.seed, "train-sample"))
    model = classifier.train(feats, training, classifier.TrainConfig(
        learning_rate=args.learning_rate, l2=args.l2, epochs=args.epochs))
    scores = classifier.predict_scores(model, feats)
    threshold = classifier.select_threshold(scores, training, args.folds)
    classifier.save_model(out / "model.txt", model)
    tsvio.write_node_scores(out / "local_scores.tsv", scores)
    tsvio.write_labels(out / "train_seeds.tsv", harness.training_label_map(node_count, training))
    (out / "threshold.txt").write_text(f"{threshold!r}\n", encoding="utf-8")
    print(f"trained on {args.train_benign}+{args.train_sybil} seeds, threshold {threshold}")
    return 0


def _cmd_score_edges(args, out: Path) -> int:
    graph = load_edge_list(args.graph, directed=False)
    if args.metric is not None and args.value is not None:
        raise UsageError("--value and --metric are mutually exclusive")
    if args.metric is not None:
        values = classifier.edge_scores_similarity(graph, args.metric)
    else:
        values = classifier.edge_scores_default(graph, 0.9 if args.value is None else args.value)
    tsvio.write_edge_scores(out / "edge_scores.tsv", graph, values)
    return 0


def _cmd_propagate(args, out: Path) -> int:
    graph = load_edge_list(args.graph, directed=False)
    node_scores = tsvio.read_node_scores(args.node_scores, graph.node_count)
    if np.isnan(node_scores).any():
        raise ValueError(f"{args.node_scores}: missing score for some nodes")
    edge_scores = tsvio.read_edge_scores(args.edge_scores, graph)
    seeds = _read_seed_set(args.seeds, graph.node_count) if args.seeds else None
    cfg = propagate.PropagationConfig(engine=args.engine, iterations=args.iterations,
                                      seeds=seeds, pin_seeds=args.pin_seeds,
                                      degree_normalize=args.degree_normalize)
    if args.engine == "lbp":
        final = propagate.weighted_lbp(graph, node_scores, edge_scores, cfg)
    else:
        final = propagate.weighted_random_walk(graph, node_scores, edge_scores, cfg)
    tsvio.write_node_scores(out / "final_scores.tsv", final)
    return 0


def _cmd_rank(args, out: Path) -> int:
    node_count = _infer_node_count(args.scores, args.labels)
    labels = tsvio.read_labels(args.labels, node_count)
    scores = _read_scores_for(args.scores, node_count, labels)
    graph = load_edge_list(args.graph, directed=False) if args.graph else None
    exclude = _read_seed_set(args.exclude, node_count).all_ids if args.exclude else None
    report = metrics.build_ranking_report(scores, labels, threshold=args.threshold,
                                          exclude=exclude, graph=graph)
    metrics.write_ranking(out / "ranking.tsv", report)
    return 0


def _cmd_evaluate(args, out: Path) -> int:
    node_count = _infer_node_count(args.scores, args.labels)
    labels = tsvio.read_labels(args.labels, node_count)
    scores = _read_scores_for(args.scores, node_count, labels)
    graph = load_edge_list(args.graph, directed=False) if args.graph else None
    exclude = _read_seed_set(args.exclude, node_count).all_ids if args.exclude else None
    report = metrics.build_ranking_report(scores, labels, threshold=args.threshold,
                                          exclude=exclude, graph=graph)
    rows = [("auc", "final", report.metrics["auc"]),
            ("accuracy", f"threshold={args.threshold!r}", report.metrics["accuracy"])]
    for k in args.top_k:
        if k <= report.node_ids.shape[0]:
            rows.append(("top_k_sybil_fraction", k, metrics.top_k_sybil_fraction(report, k)))
    tsvio.write_metrics_report(out / "metrics.tsv", rows)
    for metric, param, value in rows:
        print(f"{metric}\t{param}\t{value}")
    return 0


def _cmd_sweep(args, out: Path) -> int:
    spec = harness.SweepSpec(
        base=synth.ScenarioConfig(benign_count=args.benign, sybil_count=args.sybil,
                                  avg_degree=args.avg_degree, attack_edge_count=args.attack_edges,
                                  rng_seed=args.seed),
        variable=args.variable,
        values=tuple(int(v) if args.variable != "fpr_fnr" else v for v in args.values),
        trials=args.trials, engines=tuple(args.engines), mode=args.mode,
        noise=args.noise, threads=args.threads)
    rows = harness.run_robustness_sweep(spec)
    tsvio.write_sweep_table(out / "sweep.tsv", rows)
    for row in rows:
        print("\t".join(str(x) for x in row))
    return 0


def _cmd_pipeline(args, out: Path) -> int:
    cfg = harness.PipelineConfig(
        engine=args.engine, train_benign=args.train_benign, train_sybil=args.train_sybil,
        iterations=args.iterations, pin_seeds=args.pin_seeds,
        degree_normalize=not args.raw_walk_scores, edge_score_value=args.edge_value,
        edge_metric=args.edge_metric, threshold=args.threshold, top_k=tuple(args.top_k),
        baselines=args.baselines, restart=args.restart, homophily=args.homophily,
        integro_beta=args.beta, remap_ids=args.remap_ids, seed=args.seed,
        threads=args.threads)
    result = harness.run_detection_pipeline(args.graph, args.labels, cfg,
                                            directed=args.directed, out_dir=out,
                                            victim_prob_path=args.victim_probs)
    print(f"auc {result.report.metrics['auc']}  accuracy {result.report.metrics['accuracy']}  "
          f"threshold {result.threshold}")
    return 0


def _cmd_components(args, out: Path) -> int:
    graph = load_edge_list(args.graph, directed=False)
    restrict = None
    if args.sybil_only:
        if not args.labels:
            raise UsageError("--sybil-only requires --labels")
        labels = tsvio.read_labels(args.labels, graph.node_count)
        restrict = np.flatnonzero(labels == SYBIL)
    comps = connected_components(graph, restrict_to=restrict)
    tsvio.write_component_report(out / "components.tsv", comps)
    print(f"{len(comps)} components, largest {comps[0].shape[0] if comps else 0}")
    if args.sybil_only:
        census = component_census(graph, labels)
        print(f"isolated {census['isolated']}  lcc {census['lcc']}  others {census['others']}")
    return 0


def _cmd_modularity(args, out: Path) -> int:
    graph = load_edge_list(args.graph, directed=False)
    labels = tsvio.read_labels(args.labels, graph.node_count)
    print(repr(modularity(graph, labels)))
    return 0


_HANDLERS = {
    "generate": _cmd_generate,
    "mutualize": _cmd_mutualize,
    "features": _cmd_features,
    "train": _cmd_train,
    "score-edges": _cmd_score_edges,
    "propagate": _cmd_propagate,
    "rank": _cmd_rank,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "pipeline": _cmd_pipeline,
    "components": _cmd_components,
    "modularity": _cmd_modularity,
}


def dispatch(argv) -> int:
    """Parse argv, run the subcommand; returns the process exit code."""
    parser, registry = build_parser()
    try:
        args = parser.parse_args(argv)
        if _apply_config_file(args, registry) is not None:
            args = parser.parse_args(argv)
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --version / --help
        return int(exc.code or 0)
    try:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return _HANDLERS[args.command](args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (EdgeListParseError, ValueError, FloatingPointError, OSError,
            harness.StageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
