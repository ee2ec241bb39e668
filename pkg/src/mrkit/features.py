"""Node and path features over annotated CFGs, plus design-matrix assembly.

Node features (NF) count nodes sharing an ``<op>-<din>-<dout>`` signature.
Path features (PF) take, for every node, one canonical shortest path from
the start node to it and one from it to the exit node, and count the label
sequences.  Canonical means BFS order with neighbors expanded in ascending
node id; the first discovered parent defines the path, so extraction is
deterministic and id-renaming that preserves declaration order cannot
change the result.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .cfg import AnnotatedCfg, NodeOp


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureVector:
    kind: str  # "NF" | "PF" | "NF-PF"
    entries: dict[str, int]

    def __post_init__(self) -> None:
        if self.kind not in ("NF", "PF", "NF-PF"):
            raise FeatureError(f"unknown feature kind {self.kind!r}")
        for key, count in self.entries.items():
            if count < 1:
                raise FeatureError(f"stored count for {key!r} must be >= 1")

    def total(self) -> int:
        return sum(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)


def node_features(cfg: AnnotatedCfg, omit_exit: bool = False) -> FeatureVector:
    """Tally ``op-din-dout`` signatures; one entry per distinct triple.

    ``omit_exit`` drops exit-labelled nodes to replicate published NF
    tables that leave the exit node out; by default it is counted so that
    the totals partition the node set.
    """
    counts: dict[str, int] = {}
    for i, op in enumerate(cfg.ops):
        if omit_exit and op is NodeOp.EXIT:
            continue
        key = f"{op.value}-{cfg.in_degree(i)}-{cfg.out_degree(i)}"
        counts[key] = counts.get(key, 0) + 1
    return FeatureVector("NF", counts)


def _bfs_parents(n: int, adjacency, root: int) -> list[int]:
    """Parent per node under BFS from root, neighbors in ascending id.

    parent[root] = root; unreached nodes keep -1 (cannot happen on a valid
    CFG, where everything lies between start and exit).
    """
    parent = [-1] * n
    parent[root] = root
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if parent[v] == -1:
                parent[v] = u
                queue.append(v)
    return parent


def _start_and_exit(cfg: AnnotatedCfg) -> tuple[int, int]:
    starts = [i for i, op in enumerate(cfg.ops) if op is NodeOp.START]
    exits = [i for i, op in enumerate(cfg.ops) if op is NodeOp.EXIT]
    if len(starts) != 1 or len(exits) != 1:
        raise FeatureError("path features need exactly one start and one exit node")
    return starts[0], exits[0]


def path_features(cfg: AnnotatedCfg) -> FeatureVector:
    """One forward and one backward canonical shortest-path signature per
    node; identical signatures accumulate, so the total tally is 2*|nodes|.
    """
    start, exit_node = _start_and_exit(cfg)
    n = cfg.node_count
    fwd_parent = _bfs_parents(n, cfg.successors, start)
    bwd_parent = _bfs_parents(n, cfg.predecessors, exit_node)

    counts: dict[str, int] = {}
    for v in range(n):
        if fwd_parent[v] == -1:
            raise FeatureError(f"node {v} unreachable from start")
        if bwd_parent[v] == -1:
            raise FeatureError(f"exit unreachable from node {v}")
        chain = [v]
        while chain[-1] != start:
            chain.append(fwd_parent[chain[-1]])
        key = "-".join(cfg.ops[u].value for u in reversed(chain))
        counts[key] = counts.get(key, 0) + 1

        chain = [v]
        while chain[-1] != exit_node:
            chain.append(bwd_parent[chain[-1]])
        key = "-".join(cfg.ops[u].value for u in chain)
        counts[key] = counts.get(key, 0) + 1
    return FeatureVector("PF", counts)


def combine(nf: FeatureVector, pf: FeatureVector) -> FeatureVector:
    """Disjoint union of an NF and a PF vector (key spaces never collide:
    NF keys end in two degree fields)."""
    if nf.kind != "NF" or pf.kind != "PF":
        raise FeatureError(f"combine needs kinds NF and PF, got {nf.kind} and {pf.kind}")
    merged = dict(nf.entries)
    for key, count in pf.entries.items():
        if key in merged:
            raise FeatureError(f"feature key collision on {key!r}")
        merged[key] = count
    return FeatureVector("NF-PF", merged)


@dataclass(frozen=True)
class DesignMatrix:
    """Dense count matrix over the lexicographically sorted key union."""

    feature_index: tuple[str, ...]
    method_ids: tuple[str, ...]
    rows: np.ndarray = field(repr=False)
    kind: str = "NF-PF"
    l2_normalized: bool = False

    def row(self, method_id: str) -> np.ndarray:
        return self.rows[self.method_ids.index(method_id)]

    def vectorize(self, vector: FeatureVector) -> np.ndarray:
        """Project a new method's features onto this matrix's key space;
        unseen keys are dropped (they correspond to all-zero columns)."""
        out = np.zeros(len(self.feature_index))
        lookup = {k: i for i, k in enumerate(self.feature_index)}
        for key, count in vector.entries.items():
            if key in lookup:
                out[lookup[key]] = count
        if self.l2_normalized:
            norm = np.linalg.norm(out)
            if norm > 0:
                out = out / norm
        return out


def build_design_matrix(
    features: list[tuple[str, FeatureVector]],
    l2_normalize: bool = False,
) -> DesignMatrix:
    if not features:
        raise FeatureError("no feature vectors given")
    kinds = {vec.kind for _, vec in features}
    if len(kinds) != 1:
        raise FeatureError(f"mixed feature kinds: {sorted(kinds)}")
    ids = [mid for mid, _ in features]
    if len(set(ids)) != len(ids):
        dupes = sorted({m for m in ids if ids.count(m) > 1})
        raise FeatureError(f"duplicate method ids: {dupes}")

    keys = sorted({key for _, vec in features for key in vec.entries})
    index = {key: i for i, key in enumerate(keys)}
    rows = np.zeros((len(features), len(keys)))
    for r, (_, vec) in enumerate(features):
        for key, count in vec.entries.items():
            rows[r, index[key]] = count
    if l2_normalize:
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        rows = rows / norms
    return DesignMatrix(
        feature_index=tuple(keys),
        method_ids=tuple(ids),
        rows=rows,
        kind=kinds.pop(),
        l2_normalized=l2_normalize,
    )


def features_to_csv(method_id: str, vectors: list[FeatureVector]) -> str:
    """Flat dump: one ``method_id,kind,feature_key,count`` row per entry,
    keys sorted within each vector."""
    lines = ["method_id,kind,feature_key,count"]
    for vec in vectors:
        for key in sorted(vec.entries):
            lines.append(f"{method_id},{vec.kind},{key},{vec.entries[key]}")
    return "\n".join(lines) + "\n"


def design_matrix_to_csv(matrix: DesignMatrix) -> str:
    lines = ["method_id," + ",".join(matrix.feature_index)]
    for mid, row in zip(matrix.method_ids, matrix.rows):
        cells = ",".join(repr(float(v)) if matrix.l2_normalized else str(int(v))
                         for v in row)
        lines.append(f"{mid},{cells}")
    return "\n".join(lines) + "\n"
