"""Multi-hop feature propagation and the profit matrix it induces.

Propagation computes ``A^l H`` for ``l = 0..depth`` iteratively, never
materializing a matrix power. The profit matrix is the sum over depths of the
inner products between propagated source and target features,

    X[i, j] = sum_l  (A_s^l H_s)[i] . (A_t^l H_t)[j]

stored source-major (row i = source entity i). Maximizing ``sum_i X[i, m(i)]``
over one-to-one mappings ``m`` is equivalent to minimizing the total squared
mismatch of propagated features across all depths, which is what makes this
matrix the right input for an assignment solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adjacency import SparseMatrix
from .features import FeatureMatrix

MAX_DEPTH = 16  # guard against runaway memory in propagated feature lists


@dataclass
class PropagationConfig:
    """Propagation depth and (fixed, normally all-ones) per-depth weights."""

    depth: int = 2
    depth_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in 0..{MAX_DEPTH}, got {self.depth}")
        if self.depth_weights is not None and len(self.depth_weights) != self.depth + 1:
            raise ValueError("depth_weights must have depth+1 entries")


@dataclass(eq=False)
class ProfitMatrix:
    """Dense pairwise score matrix between source rows and target columns.

    ``valid_rows`` / ``valid_cols`` track the real (unpadded) extent after
    zero-padding to a square shape; ``None`` means the full extent is real.
    """

    data: np.ndarray
    depth_used: int
    valid_rows: int | None = None
    valid_cols: int | None = None

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def source_count(self) -> int:
        return self.rows if self.valid_rows is None else self.valid_rows

    @property
    def target_count(self) -> int:
        return self.cols if self.valid_cols is None else self.valid_cols


def propagate(adj: SparseMatrix, features: FeatureMatrix, depth: int) -> list[FeatureMatrix]:
    """Return ``[H, A H, A^2 H, ..., A^depth H]`` (depth+1 matrices)."""
    if not 0 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in 0..{MAX_DEPTH}, got {depth}")
    if adj.size != features.rows:
        raise ValueError(f"adjacency size {adj.size} != feature rows {features.rows}")
    matrix = adj.matrix
    if matrix.dtype != features.data.dtype:
        matrix = matrix.astype(features.data.dtype)
    out = [features]
    current = features.data
    for _ in range(depth):
        current = matrix @ current
        out.append(FeatureMatrix(current))
    return out


def profit_matrix(prop_s: list[FeatureMatrix], prop_t: list[FeatureMatrix],
                  depth_weights=None, out_dtype=None, row_block: int | None = None) -> ProfitMatrix:
    """Accumulate the per-depth feature inner products into one profit matrix.

    Per-depth products run in the features' dtype (BLAS), the running sum is
    held in float64. ``row_block`` switches to strip-wise accumulation over
    blocks of source rows, bounding temporary memory on large instances.
    """
    if len(prop_s) != len(prop_t):
        raise ValueError(f"depth mismatch: {len(prop_s)} vs {len(prop_t)} propagated levels")
    if not prop_s:
        raise ValueError("empty propagation list")
    for l, (s, t) in enumerate(zip(prop_s, prop_t)):
        if s.dimension != t.dimension:
            raise ValueError(f"feature dimension mismatch at depth {l}: {s.dimension} != {t.dimension}")
    depth = len(prop_s) - 1
    if depth_weights is None:
        depth_weights = np.ones(depth + 1)
    elif len(depth_weights) != depth + 1:
        raise ValueError("depth_weights must have depth+1 entries")

    n_s, n_t = prop_s[0].rows, prop_t[0].rows
    if out_dtype is None:
        dtypes = [m.data.dtype for m in (*prop_s, *prop_t)]
        out_dtype = np.float64 if any(d == np.float64 for d in dtypes) else np.float32
    if row_block is None:
        row_block = n_s

    targets_t = [np.ascontiguousarray(t.data.T) for t in prop_t]
    out = np.empty((n_s, n_t), dtype=out_dtype)
    for start in range(0, n_s, row_block):
        stop = min(start + row_block, n_s)
        acc = np.zeros((stop - start, n_t), dtype=np.float64)
        for w, s, t_T in zip(depth_weights, prop_s, targets_t):
            term = s.data[start:stop] @ t_T
            if w == 1.0:
                acc += term
            else:
                acc += w * term
        out[start:stop] = acc
    return ProfitMatrix(data=out, depth_used=depth)


def objective_value(result, prop_s: list[FeatureMatrix], prop_t: list[FeatureMatrix]) -> float:
    """Total squared mismatch of propagated features under a total mapping.

    ``result`` may be an AlignmentResult or a plain source->target index
    sequence; it must be a complete permutation (balanced case only).
    """
    mapping = getattr(result, "mapping", result)
    if any(m is None for m in mapping):
        raise ValueError("objective_value requires a total mapping without dummy matches")
    perm = np.asarray(list(mapping), dtype=np.int64)
    n = prop_s[0].rows
    if perm.shape[0] != n or prop_t[0].rows != n:
        raise ValueError("objective_value requires a balanced instance")
    if np.unique(perm).size != n:
        raise ValueError("mapping is not one-to-one")
    total = 0.0
    for s, t in zip(prop_s, prop_t):
        diff = s.data - t.data[perm]
        total += float(np.sum(diff * diff))
    return total
