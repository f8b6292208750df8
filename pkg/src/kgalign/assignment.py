"""Solving the assignment problem over a profit matrix.

Two routes with the same contract (maximize total profit under a one-to-one
constraint): the exact Hungarian / Jonker-Volgenant solver, and the Sinkhorn
operation, which sharpens ``exp(X / temperature)`` toward a permutation by
alternating row and column normalizations.

Sinkhorn runs entirely in log space: at the default temperature 0.02 the
literal ``exp(X / tau)`` overflows float64 as soon as a profit entry exceeds
~14, so row/column normalization happens through log-sum-exp on additive
potentials and the matrix is exponentiated only once at the end. Each
iteration normalizes rows first, columns second, so after finitely many
iterations column sums are exact and row sums are approximate.

Rectangular inputs are squared up by :func:`pad_profit` with zero rows or
columns; matches that land on a padded dummy are reported as ``None``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .propagation import ProfitMatrix

_CHUNK_ELEMENTS = 4 << 20  # ~32 MB of float64 scratch per reduction chunk


@dataclass
class SinkhornConfig:
    iterations: int = 10
    temperature: float = 0.02

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not self.temperature > 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")


@dataclass(eq=False)
class DoublyStochasticMatrix:
    """Sinkhorn output: non-negative, column sums 1, row sums approaching 1."""

    data: np.ndarray
    iterations_run: int
    temperature: float
    valid_rows: int | None = None
    valid_cols: int | None = None

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


@dataclass(eq=False)
class AlignmentResult:
    """One-to-one partial mapping: ``mapping[i]`` is the matched target index
    for source ``i`` or ``None`` for a dummy match; ``scores[i]`` the pair score."""

    mapping: list[int | None]
    scores: np.ndarray
    solver: str

    def matched_pairs(self):
        for i, j in enumerate(self.mapping):
            if j is not None:
                yield i, j, float(self.scores[i])


def pad_profit(x: ProfitMatrix) -> ProfitMatrix:
    """Zero-pad to a square matrix, remembering the real extent."""
    if x.rows == x.cols:
        return x
    side = max(x.rows, x.cols)
    data = np.zeros((side, side), dtype=x.data.dtype)
    data[: x.rows, : x.cols] = x.data
    return ProfitMatrix(data=data, depth_used=x.depth_used,
                        valid_rows=x.source_count, valid_cols=x.target_count)


def solve_hungarian(x: ProfitMatrix) -> AlignmentResult:
    """Exact maximum-profit permutation via Jonker-Volgenant augmenting paths.

    The solver minimizes cost, so it runs on the negated profit. Deterministic
    for a given input.
    """
    if x.rows != x.cols:
        raise ValueError("profit matrix must be square; call pad_profit first")
    if not np.all(np.isfinite(x.data)):
        raise ValueError("profit matrix contains non-finite entries")
    row_ind, col_ind = linear_sum_assignment(-x.data)
    return _result_from_assignment(col_ind[np.argsort(row_ind)], x.data, x, "hungarian")


def sinkhorn(x: ProfitMatrix, cfg: SinkhornConfig | None = None) -> DoublyStochasticMatrix:
    """Run ``cfg.iterations`` row+column normalizations of ``exp(X / tau)`` in log space."""
    cfg = cfg or SinkhornConfig()
    if cfg.iterations < 1 or not cfg.temperature > 0:
        raise ValueError(f"invalid Sinkhorn config: {cfg}")
    if x.rows != x.cols:
        raise ValueError("profit matrix must be square; call pad_profit first")

    y = x.data / x.data.dtype.type(cfg.temperature)
    n = y.shape[0]
    u = np.zeros(n, dtype=np.float64)
    v = np.zeros(n, dtype=np.float64)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, n))
    for _ in range(cfg.iterations):
        _neg_logsumexp_rows(y, v, out=u, chunk=chunk)
        _neg_logsumexp_cols(y, u, out=v, chunk=chunk)

    out = np.empty_like(y)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = y[start:stop].astype(np.float64)
        block += u[start:stop, None]
        block += v[None, :]
        out[start:stop] = np.exp(block, out=block)
    return DoublyStochasticMatrix(out, iterations_run=cfg.iterations, temperature=cfg.temperature,
                                  valid_rows=x.valid_rows, valid_cols=x.valid_cols)


def _neg_logsumexp_rows(y, v, out, chunk):
    """out[i] = -log sum_j exp(y[i, j] + v[j]), chunked over rows, float64 math."""
    for start in range(0, y.shape[0], chunk):
        stop = min(start + chunk, y.shape[0])
        block = y[start:stop].astype(np.float64)
        block += v[None, :]
        m = block.max(axis=1)
        np.exp(block - m[:, None], out=block)
        out[start:stop] = -(m + np.log(block.sum(axis=1)))


def _neg_logsumexp_cols(y, u, out, chunk):
    """out[j] = -log sum_i exp(y[i, j] + u[i]), accumulated chunk by chunk."""
    acc = np.full(y.shape[1], -np.inf)
    for start in range(0, y.shape[0], chunk):
        stop = min(start + chunk, y.shape[0])
        block = y[start:stop].astype(np.float64)
        block += u[start:stop, None]
        m = block.max(axis=0)
        np.exp(block - m[None, :], out=block)
        np.logaddexp(acc, m + np.log(block.sum(axis=0)), out=acc)
    np.negative(acc, out=out)


def extract_alignment(s: DoublyStochasticMatrix, x: ProfitMatrix) -> AlignmentResult:
    """Greedy one-to-one extraction from a score matrix.

    Repeatedly takes the globally largest remaining entry whose row and column
    are both free; ties go to the lowest (row, column) position. Dummy rows and
    columns from padding take part in the competition exactly like real ones,
    mirroring what an exact solver would do on the padded matrix.
    """
    if s.data.shape != x.data.shape:
        raise ValueError(f"score shape {s.data.shape} != profit shape {x.data.shape}")
    n_rows, n_cols = s.data.shape
    order = np.argsort(-s.data, axis=None, kind="stable")
    row_match = np.full(n_rows, -1, dtype=np.int64)
    col_taken = np.zeros(n_cols, dtype=bool)
    matched = 0
    limit = min(n_rows, n_cols)
    for flat in order:
        i, j = divmod(int(flat), n_cols)
        if row_match[i] >= 0 or col_taken[j]:
            continue
        row_match[i] = j
        col_taken[j] = True
        matched += 1
        if matched == limit:
            break
    return _result_from_assignment(row_match, s.data, x, "sinkhorn")


def _result_from_assignment(row_match, score_data, x: ProfitMatrix, solver: str) -> AlignmentResult:
    n_real_rows = x.source_count
    n_real_cols = x.target_count
    mapping: list[int | None] = []
    scores = np.full(n_real_rows, np.nan)
    for i in range(n_real_rows):
        j = int(row_match[i])
        if j < 0 or j >= n_real_cols:
            mapping.append(None)
        else:
            mapping.append(j)
            scores[i] = score_data[i, j]
    return AlignmentResult(mapping=mapping, scores=scores, solver=solver)


def row_rankings(scores, k: int) -> np.ndarray:
    """Top-k candidate columns per row, best first, ties to the lower column."""
    data = scores if isinstance(scores, np.ndarray) else scores.data
    return np.argsort(-data, axis=1, kind="stable")[:, :k]
