"""The four adjacency operators used for feature propagation.

Neighborhoods are undirected: a triple ``(h, r, t)`` makes ``h`` and ``t``
neighbors regardless of direction, and self-loop triples contribute no edge.
Four weightings of the same sparsity pattern are supported:

* ``raw``: binary adjacency,
* ``random_walk``: rows divided by degree,
* ``laplacian``: symmetric normalized Laplacian ``I - D^-1/2 A D^-1/2``,
* ``relational``: neighbor weights ``ln(|T| / |T_r|)`` summed over the set of
  relations linking the pair (either direction), then row-normalized, so that
  rare relations count for more than frequent ones.

Entities with no neighbors are reported in ``SparseMatrix.isolated`` and keep
an all-zero row instead of triggering a division by zero. When every log
weight is zero (a single relation holding all triples), equal weights mean
equal shares: the relational row falls back to uniform 1/deg, matching the
random walk.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp

from .kg import KnowledgeGraph


class AdjacencyKind(str, Enum):
    RAW = "raw"
    RANDOM_WALK = "random_walk"
    LAPLACIAN = "laplacian"
    RELATIONAL = "relational"


@dataclass(eq=False)
class SparseMatrix:
    """A square CSR operator over entity indices, tagged with its kind."""

    matrix: sp.csr_matrix
    kind: AdjacencyKind
    isolated: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def _undirected_edges(kg: KnowledgeGraph) -> np.ndarray:
    """Symmetrized (i, j) pairs over all triples, self-loops dropped."""
    ht = kg.triples[:, [0, 2]]
    ht = ht[ht[:, 0] != ht[:, 1]]
    return np.concatenate([ht, ht[:, ::-1]], axis=0)


def _binary_adjacency(kg: KnowledgeGraph) -> sp.csr_matrix:
    n = kg.entity_count
    edges = _undirected_edges(kg)
    if edges.shape[0] == 0:
        return sp.csr_matrix((n, n), dtype=np.float64)
    data = np.ones(edges.shape[0], dtype=np.float64)
    adj = sp.csr_matrix((data, (edges[:, 0], edges[:, 1])), shape=(n, n))
    adj.data[:] = 1.0  # duplicate edges collapse to a single binary entry
    return adj


def _relational_adjacency(kg: KnowledgeGraph) -> tuple[sp.csr_matrix, list[int]]:
    n = kg.entity_count
    total = kg.triple_count
    log_weight = [math.log(total / c) if c > 0 else 0.0 for c in kg.relation_triple_counts]

    # relation *set* per unordered pair: a relation seen in both directions counts once
    pair_relations: dict[tuple[int, int], set[int]] = defaultdict(set)
    for h, r, t in kg.triples:
        if h == t:
            continue
        key = (int(h), int(t)) if h < t else (int(t), int(h))
        pair_relations[key].add(int(r))

    neighbor_weight: list[dict[int, float]] = [dict() for _ in range(n)]
    for (i, j), rels in pair_relations.items():
        w = sum(log_weight[r] for r in rels)
        neighbor_weight[i][j] = w
        neighbor_weight[j][i] = w

    rows, cols, vals = [], [], []
    isolated = []
    for i, weights in enumerate(neighbor_weight):
        if not weights:
            isolated.append(i)
            continue
        denom = sum(weights.values())
        # a zero total only happens when one relation holds every triple and
        # all log weights are ln(1) = 0; equal weights mean a uniform row
        uniform = denom <= 0.0
        for j, w in sorted(weights.items()):
            rows.append(i)
            cols.append(j)
            vals.append(1.0 / len(weights) if uniform else w / denom)
    adj = sp.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=np.float64)
    return adj, isolated


def build_adjacency(kg: KnowledgeGraph, kind: AdjacencyKind = AdjacencyKind.RELATIONAL) -> SparseMatrix:
    """Build the ``kind`` operator for ``kg``; see the module docstring."""
    kind = AdjacencyKind(kind)
    if kind is AdjacencyKind.RELATIONAL:
        adj, isolated = _relational_adjacency(kg)
        return SparseMatrix(adj, kind, tuple(isolated))

    binary = _binary_adjacency(kg)
    degrees = np.asarray(binary.sum(axis=1)).ravel()
    isolated = tuple(int(i) for i in np.flatnonzero(degrees == 0))

    if kind is AdjacencyKind.RAW:
        return SparseMatrix(binary, kind, isolated)
    if kind is AdjacencyKind.RANDOM_WALK:
        inv = np.zeros_like(degrees)
        nz = degrees > 0
        inv[nz] = 1.0 / degrees[nz]
        walk = sp.diags(inv) @ binary
        return SparseMatrix(walk.tocsr(), kind, isolated)
    if kind is AdjacencyKind.LAPLACIAN:
        inv_sqrt = np.zeros_like(degrees)
        nz = degrees > 0
        inv_sqrt[nz] = 1.0 / np.sqrt(degrees[nz])
        scaled = sp.diags(inv_sqrt) @ binary @ sp.diags(inv_sqrt)
        lap = sp.eye(kg.entity_count, format="csr") - scaled
        return SparseMatrix(lap.tocsr(), kind, isolated)
    raise ValueError(f"unknown adjacency kind {kind!r}")


def degree_vector(adj: SparseMatrix) -> np.ndarray:
    """Row sums of a raw adjacency, i.e. undirected neighbor counts."""
    if adj.kind is not AdjacencyKind.RAW:
        raise ValueError(f"degree_vector expects a raw adjacency, got {adj.kind.value}")
    return np.asarray(adj.matrix.sum(axis=1)).ravel()


def dump_adjacency(adj: SparseMatrix, path) -> None:
    """Debug dump as 'row<TAB>col<TAB>weight' lines."""
    coo = adj.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w", encoding="utf-8") as fh:
        for k in order:
            fh.write(f"{coo.row[k]}\t{coo.col[k]}\t{coo.data[k]:.17g}\n")
