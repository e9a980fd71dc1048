"""TSV readers and writers for the toolkit's file formats.

All floats are written with repr() so values round-trip exactly and repeated
runs produce byte-identical files.
"""

from __future__ import annotations

import numpy as np

from .graph import BENIGN, SYBIL, UNKNOWN, EdgeListParseError, Graph

FORMAT_VERSION = 1


def write_edge_list(path, g) -> None:
    """Write a Graph (canonical u < v lines) or DirectedGraph (all arcs)."""
    with open(path, "w", encoding="utf-8") as fh:
        if isinstance(g, Graph):
            for u, v in zip(g.edge_u.tolist(), g.edge_v.tolist()):
                fh.write(f"{u}\t{v}\n")
        else:
            src = np.repeat(np.arange(g.node_count), g.out_degrees)
            for u, v in zip(src.tolist(), g.out_indices.tolist()):
                fh.write(f"{u}\t{v}\n")


def write_labels(path, labels: np.ndarray) -> None:
    """Write `node_id<TAB>{0|1}` rows (1 = benign, 0 = sybil); unknown nodes skipped."""
    with open(path, "w", encoding="utf-8") as fh:
        for node, lab in enumerate(np.asarray(labels).tolist()):
            if lab != UNKNOWN:
                fh.write(f"{node}\t{lab}\n")


def read_label_pairs(path) -> tuple[np.ndarray, np.ndarray]:
    """Read raw (node_id, label) rows without range-checking the ids."""
    nodes: list[int] = []
    labs: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgeListParseError(f"{path}:{lineno}: expected 'node label', got {text!r}")
            try:
                node, lab = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(f"{path}:{lineno}: non-integer field in {text!r}") from None
            if lab not in (BENIGN, SYBIL):
                raise EdgeListParseError(f"{path}:{lineno}: label must be 0 or 1, got {lab}")
            nodes.append(node)
            labs.append(lab)
    return np.asarray(nodes, dtype=np.int64), np.asarray(labs, dtype=np.int8)


def read_labels(path, node_count: int) -> np.ndarray:
    """Read a label file into a full array; nodes absent from the file are unknown."""
    nodes, labs = read_label_pairs(path)
    if nodes.size and (nodes.min() < 0 or nodes.max() >= node_count):
        raise EdgeListParseError(f"{path}: node id out of range")
    labels = np.full(node_count, UNKNOWN, dtype=np.int8)
    labels[nodes] = labs
    return labels


def write_id_map(path, original_ids: np.ndarray) -> None:
    """Write `dense_id<TAB>original_id` rows for remapped inputs."""
    with open(path, "w", encoding="utf-8") as fh:
        for dense, original in enumerate(np.asarray(original_ids).tolist()):
            fh.write(f"{dense}\t{original}\n")


def write_node_scores(path, scores: np.ndarray) -> None:
    """Write `node_id<TAB>score` rows."""
    with open(path, "w", encoding="utf-8") as fh:
        for node, s in enumerate(np.asarray(scores, dtype=float).tolist()):
            fh.write(f"{node}\t{s!r}\n")


def read_node_scores(path, node_count: int) -> np.ndarray:
    scores = np.full(node_count, np.nan)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgeListParseError(f"{path}:{lineno}: expected 'node score', got {text!r}")
            try:
                node, s = int(parts[0]), float(parts[1])
            except ValueError:
                raise EdgeListParseError(f"{path}:{lineno}: bad field in {text!r}") from None
            if not 0 <= node < node_count:
                raise EdgeListParseError(f"{path}:{lineno}: node id {node} out of range")
            scores[node] = s
    return scores


def write_edge_scores(path, g: Graph, values: np.ndarray) -> None:
    """Write `u<TAB>v<TAB>score` rows with u < v, in canonical edge order."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != g.edge_count:
        raise ValueError("edge score array does not match graph edge count")
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, s in zip(g.edge_u.tolist(), g.edge_v.tolist(), values.tolist()):
            fh.write(f"{u}\t{v}\t{s!r}\n")


def read_edge_scores(path, g: Graph) -> np.ndarray:
    """Read per-edge scores; every edge of g must be covered exactly once."""
    values = np.full(g.edge_count, np.nan)
    n = g.node_count
    canon_keys = g.edge_u * n + g.edge_v
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3:
                raise EdgeListParseError(f"{path}:{lineno}: expected 'u v score', got {text!r}")
            try:
                u, v, s = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise EdgeListParseError(f"{path}:{lineno}: bad field in {text!r}") from None
            if not (0 <= u < n and 0 <= v < n):
                raise EdgeListParseError(f"{path}:{lineno}: node id out of range")
            key = min(u, v) * n + max(u, v)
            idx = np.searchsorted(canon_keys, key)
            if idx >= g.edge_count or canon_keys[idx] != key:
                raise EdgeListParseError(f"{path}:{lineno}: edge {u}-{v} not present in graph")
            values[idx] = s
    if np.isnan(values).any():
        missing = int(np.isnan(values).sum())
        raise EdgeListParseError(f"{path}: {missing} edge(s) missing a score")
    return values


def write_features(path, features: np.ndarray) -> None:
    """Write `node_id<TAB>req_in<TAB>req_out<TAB>cc` rows."""
    features = np.asarray(features, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        for node, row in enumerate(features.tolist()):
            fh.write(f"{node}\t" + "\t".join(repr(x) for x in row) + "\n")


def read_features(path, node_count: int) -> np.ndarray:
    rows: dict[int, list[float]] = {}
    width = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) < 2:
                raise EdgeListParseError(f"{path}:{lineno}: expected 'node f1 f2 ...', got {text!r}")
            try:
                node = int(parts[0])
                vals = [float(p) for p in parts[1:]]
            except ValueError:
                raise EdgeListParseError(f"{path}:{lineno}: bad field in {text!r}") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise EdgeListParseError(f"{path}:{lineno}: inconsistent feature count")
            if not 0 <= node < node_count:
                raise EdgeListParseError(f"{path}:{lineno}: node id {node} out of range")
            rows[node] = vals
    features = np.zeros((node_count, width or 0))
    for node, vals in rows.items():
        features[node] = vals
    return features


def write_component_report(path, components) -> None:
    """Write `component_id<TAB>size` rows (components already size-sorted)."""
    with open(path, "w", encoding="utf-8") as fh:
        for cid, comp in enumerate(components):
            fh.write(f"{cid}\t{comp.shape[0]}\n")


def write_metrics_report(path, rows) -> None:
    """Write `metric<TAB>parameter<TAB>value` rows."""
    with open(path, "w", encoding="utf-8") as fh:
        for metric, param, value in rows:
            fh.write(f"{metric}\t{param}\t{value!r}\n")


def write_sweep_table(path, rows) -> None:
    """Write `variable_value<TAB>engine<TAB>metric<TAB>mean<TAB>std<TAB>trials` rows."""
    with open(path, "w", encoding="utf-8") as fh:
        for value, engine, metric, mean, std, trials in rows:
            fh.write(f"{value!r}\t{engine}\t{metric}\t{mean!r}\t{std!r}\t{trials}\n")
