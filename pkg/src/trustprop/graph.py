"""Graph structures and structural analysis.

Graphs are stored in compressed sparse (CSR-style) adjacency form with dense
integer node ids 0..n-1. Undirected graphs keep both directions of every edge
in the adjacency arrays plus a canonical edge list (u < v) so that per-edge
quantities (trust scores, weights) can be stored once per undirected edge.
All graph objects are immutable after construction.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)

# Node labels. The on-disk convention is `node_id<TAB>{0|1}` with 1 = benign.
BENIGN = 1
SYBIL = 0
UNKNOWN = -1


class EdgeListParseError(ValueError):
    """Raised for malformed edge-list or label files (message carries line number)."""


def _clean_pairs(n: int, a: np.ndarray, b: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Drop self-loops from raw endpoint arrays, logging the count."""
    loops = a == b
    dropped = int(loops.sum())
    if dropped:
        logger.warning("dropped %d self-loop%s while building %s", dropped, "s" if dropped != 1 else "", what)
    keep = ~loops
    return a[keep], b[keep]


class Graph:
    """Immutable undirected simple graph in compressed adjacency form.

    Attributes:
        node_count: number of nodes n.
        edge_count: number of undirected edges m.
        indptr / indices: CSR arrays over 2m directed positions; neighbor
            lists are sorted and symmetric.
        edge_u / edge_v: canonical endpoints (edge_u < edge_v), length m.
        edge_ids: per-position index into the canonical edge arrays, length 2m.
    """

    def __init__(self, node_count, indptr, indices, edge_u, edge_v, edge_ids):
        self.node_count = int(node_count)
        self.indptr = indptr
        self.indices = indices
        self.edge_u = edge_u
        self.edge_v = edge_v
        self.edge_ids = edge_ids
        self.edge_count = int(edge_u.shape[0])
        self._rows = None
        self._rev = None

    @classmethod
    def from_edges(cls, node_count: int, u, v) -> "Graph":
        """Build a graph from endpoint arrays; self-loops and duplicates are dropped."""
        n = int(node_count)
        if n < 0:
            raise ValueError("node_count must be non-negative")
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if u.shape != v.shape:
            raise ValueError("endpoint arrays must have equal length")
        if u.size and (u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n):
            raise ValueError("edge endpoint out of range")
        u, v = _clean_pairs(n, u, v, "undirected graph")
        raw = u.shape[0]
        keys = np.unique(np.concatenate([u * n + v, v * n + u])) if u.size else np.empty(0, np.int64)
        rows = keys // n if n else keys
        cols = keys - rows * n
        m2 = keys.shape[0]
        dup = raw - m2 // 2
        if dup:
            logger.warning("dropped %d duplicate edge%s while building undirected graph", dup, "s" if dup != 1 else "")
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        canon = rows < cols
        edge_u = rows[canon]
        edge_v = cols[canon]
        canon_keys = keys[canon]
        mm = np.minimum(rows, cols) * n + np.maximum(rows, cols)
        edge_ids = np.searchsorted(canon_keys, mm)
        return cls(n, indptr, cols, edge_u, edge_v, edge_ids)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def position_rows(self) -> np.ndarray:
        """Row (target) node id of every CSR position, cached."""
        if self._rows is None:
            self._rows = np.repeat(np.arange(self.node_count, dtype=np.int64), self.degrees)
        return self._rows

    def reverse_positions(self) -> np.ndarray:
        """For CSR position k = (v, u), the position of (u, v). Cached."""
        if self._rev is None:
            n = self.node_count
            keys = self.position_rows() * n + self.indices
            self._rev = np.searchsorted(keys, self.indices * n + self.position_rows())
        return self._rev

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.shape[0] and nb[i] == v)


class DirectedGraph:
    """Immutable directed simple graph with both out- and in-adjacency in CSR form."""

    def __init__(self, node_count, out_indptr, out_indices, in_indptr, in_indices):
        self.node_count = int(node_count)
        self.out_indptr = out_indptr
        self.out_indices = out_indices
        self.in_indptr = in_indptr
        self.in_indices = in_indices
        self.edge_count = int(out_indices.shape[0])

    @classmethod
    def from_edges(cls, node_count: int, src, dst) -> "DirectedGraph":
        n = int(node_count)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("endpoint arrays must have equal length")
        if src.size and (src.min() < 0 or dst.min() < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("edge endpoint out of range")
        src, dst = _clean_pairs(n, src, dst, "directed graph")
        raw = src.shape[0]
        keys = np.unique(src * n + dst) if src.size else np.empty(0, np.int64)
        if raw - keys.shape[0]:
            logger.warning("dropped %d duplicate arc(s) while building directed graph", raw - keys.shape[0])
        srcs = keys // n if n else keys
        dsts = keys - srcs * n
        out_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(srcs, minlength=n), out=out_indptr[1:])
        rkeys = np.sort(dsts * n + srcs)
        rdsts = rkeys // n if n else rkeys
        in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rdsts, minlength=n), out=in_indptr[1:])
        return cls(n, out_indptr, dsts, in_indptr, rkeys - rdsts * n)

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[v]:self.out_indptr[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[v]:self.in_indptr[v + 1]]

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    @property
    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def transpose(self) -> "DirectedGraph":
        return DirectedGraph(self.node_count, self.in_indptr, self.in_indices,
                             self.out_indptr, self.out_indices)


def read_edge_pairs(path) -> tuple[np.ndarray, np.ndarray]:
    """Parse a `src<TAB or space>dst` edge-list file; `#` lines are comments."""
    srcs: list[int] = []
    dsts: list[int] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise EdgeListParseError(f"{path}:{lineno}: expected 'src dst', got {text!r}")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(f"{path}:{lineno}: non-integer node id in {text!r}") from None
            if a < 0 or b < 0:
                raise EdgeListParseError(f"{path}:{lineno}: negative node id in {text!r}")
            srcs.append(a)
            dsts.append(b)
    if not srcs:
        raise EdgeListParseError(f"{path}: no edges found")
    return np.asarray(srcs, dtype=np.int64), np.asarray(dsts, dtype=np.int64)


def remap_ids(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Remap sparse node ids to dense 0..n-1; returns (src, dst, original_ids)."""
    original = np.unique(np.concatenate([src, dst]))
    return np.searchsorted(original, src), np.searchsorted(original, dst), original


def load_edge_list(path, directed: bool = False):
    """Load an edge-list file into a Graph or DirectedGraph.

    Node count is max id + 1; ids are used as given (see `remap_ids` for
    sparse inputs). Duplicate edges and self-loops are dropped.
    """
    src, dst = read_edge_pairs(path)
    n = int(max(src.max(), dst.max())) + 1
    if directed:
        return DirectedGraph.from_edges(n, src, dst)
    return Graph.from_edges(n, src, dst)


def mutualize(dg: DirectedGraph) -> Graph:
    """Keep an undirected edge {u, v} iff both u->v and v->u exist."""
    n = dg.node_count
    src = np.repeat(np.arange(n, dtype=np.int64), dg.out_degrees)
    dst = dg.out_indices
    keys = src * n + dst  # ascending by CSR construction
    rev = dst * n + src
    pos = np.searchsorted(keys, rev)
    pos_c = np.minimum(pos, max(keys.shape[0] - 1, 0))
    mutual = (pos < keys.shape[0]) & (keys[pos_c] == rev) if keys.size else np.zeros(0, bool)
    take = mutual & (src < dst)
    return Graph.from_edges(n, src[take], dst[take])


def connected_components(g: Graph, restrict_to=None) -> list[np.ndarray]:
    """Connected components, optionally of the subgraph induced by `restrict_to`.

    Returns a list of sorted node-id arrays, ordered by descending size
    (ties broken by smallest member id).
    """
    n = g.node_count
    if restrict_to is None:
        active = np.ones(n, dtype=bool)
    else:
        restrict_to = np.asarray(restrict_to, dtype=np.int64)
        if restrict_to.size and (restrict_to.min() < 0 or restrict_to.max() >= n):
            raise ValueError("restrict_to contains out-of-range node id")
        active = np.zeros(n, dtype=bool)
        active[restrict_to] = True
    visited = np.zeros(n, dtype=bool)
    components: list[np.ndarray] = []
    indptr, indices = g.indptr, g.indices
    for start in range(n):
        if not active[start] or visited[start]:
            continue
        visited[start] = True
        stack = [start]
        members = [start]
        while stack:
            v = stack.pop()
            nbrs = indices[indptr[v]:indptr[v + 1]]
            fresh = nbrs[active[nbrs] & ~visited[nbrs]]
            if fresh.size:
                visited[fresh] = True
                members.extend(fresh.tolist())
                stack.extend(fresh.tolist())
        components.append(np.sort(np.asarray(members, dtype=np.int64)))
    components.sort(key=lambda c: (-c.shape[0], int(c[0])))
    return components


def modularity(g: Graph, labels: np.ndarray) -> float:
    """Newman modularity Q of the two-group partition given by a full label map.

    Q = sum over groups of (within-edge fraction - (degree fraction)^2),
    ranging from -0.5 to 1. Every node must be labeled benign or sybil.
    """
    labels = np.asarray(labels)
    if labels.shape[0] != g.node_count:
        raise ValueError("label map must cover every node")
    if np.any(labels == UNKNOWN):
        raise ValueError("modularity requires a full partition (unknown labels present)")
    m = g.edge_count
    if m == 0:
        return 0.0
    q = 0.0
    same = labels[g.edge_u] == labels[g.edge_v]
    for group in (BENIGN, SYBIL):
        within = int(np.count_nonzero(same & (labels[g.edge_u] == group)))
        deg_sum = int(g.degrees[labels == group].sum())
        q += within / m - (deg_sum / (2.0 * m)) ** 2
    return q


def component_census(g: Graph, labels: np.ndarray) -> dict[str, int]:
    """Census of the Sybil-induced subgraph: component count and class sizes."""
    sybil_ids = np.flatnonzero(np.asarray(labels) == SYBIL)
    comps = connected_components(g, restrict_to=sybil_ids)
    isolated = sum(1 for c in comps if c.shape[0] == 1)
    lcc = comps[0].shape[0] if comps and comps[0].shape[0] > 1 else 0
    return {
        "components": len(comps),
        "isolated": isolated,
        "lcc": lcc,
        "others": int(sybil_ids.shape[0]) - isolated - lcc,
    }
