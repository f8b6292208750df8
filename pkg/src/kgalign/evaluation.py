"""Alignment quality metrics: Hits@k, MRR, F1.

Ranking metrics score a matrix of row scores against a reference of
(source, target) pairs. The rank of the true target in its row is
``1 + #{strictly greater entries} + #{equal entries at a lower column}``,
which makes ties deterministic and matches the greedy extraction order.

F1 scores a one-to-one mapping: precision over emitted (non-dummy) matches,
recall over the reference. For a total mapping covering exactly the reference
sources the two coincide and F1 equals Hits@1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

_CHUNK_ELEMENTS = 4 << 20


@dataclass
class MetricsReport:
    hits: dict[int, float] = field(default_factory=dict)
    mrr: float = 0.0
    f1: float | None = None
    pair_count: int = 0

    def to_json(self) -> str:
        payload: dict = {}
        for k in sorted(self.hits):
            payload[f"hits@{k}"] = self.hits[k]
        payload["mrr"] = self.mrr
        if self.f1 is not None:
            payload["f1"] = self.f1
        payload["pairs"] = self.pair_count
        return json.dumps(payload, separators=(",", ":"))

    def table(self) -> str:
        rows = [(f"hits@{k}", f"{self.hits[k]:.4f}") for k in sorted(self.hits)]
        rows.append(("mrr", f"{self.mrr:.4f}"))
        if self.f1 is not None:
            rows.append(("f1", f"{self.f1:.4f}"))
        rows.append(("pairs", f"{self.pair_count}"))
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def _reference_pairs(ref) -> np.ndarray:
    pairs = np.asarray(getattr(ref, "pairs", ref), dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError(f"reference must be (N, 2), got {pairs.shape}")
    if pairs.shape[0] == 0:
        raise ValueError("reference is empty")
    return pairs


def rank_metrics(scores, ref, ks=(1, 10),
                 restrict_to_reference_targets: bool = False) -> MetricsReport:
    """Hits@k and MRR of reference targets under row-wise score ranking.

    ``scores`` is any object with a 2-d ``data`` array (profit or Sinkhorn
    output) or a bare array; ``ref`` an AlignmentReference or (N, 2) integer
    array of (source row, target column). By default every target column
    competes in the ranking; ``restrict_to_reference_targets`` narrows the
    candidate set to columns that occur in the reference.
    """
    data = scores if isinstance(scores, np.ndarray) else scores.data
    valid_rows = getattr(scores, "valid_rows", None) or data.shape[0]
    valid_cols = getattr(scores, "valid_cols", None) or data.shape[1]
    pairs = _reference_pairs(ref)
    if pairs[:, 0].min() < 0 or pairs[:, 0].max() >= valid_rows:
        raise ValueError("reference source index out of range")
    if pairs[:, 1].min() < 0 or pairs[:, 1].max() >= valid_cols:
        raise ValueError("reference target index out of range")

    col_mask = None
    if restrict_to_reference_targets:
        col_mask = np.zeros(valid_cols, dtype=bool)
        col_mask[pairs[:, 1]] = True

    n = pairs.shape[0]
    ranks = np.empty(n, dtype=np.int64)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, valid_cols))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = data[pairs[start:stop, 0], :valid_cols].astype(np.float64)
        if col_mask is not None:
            block = block[:, col_mask]
            true_cols = np.searchsorted(np.flatnonzero(col_mask), pairs[start:stop, 1])
        else:
            true_cols = pairs[start:stop, 1]
        rows = np.arange(stop - start)
        true_vals = block[rows, true_cols]
        greater = (block > true_vals[:, None]).sum(axis=1)
        equal_before = ((block == true_vals[:, None])
                        & (np.arange(block.shape[1])[None, :] < true_cols[:, None])).sum(axis=1)
        ranks[start:stop] = 1 + greater + equal_before

    report = MetricsReport(pair_count=n)
    for k in ks:
        report.hits[int(k)] = float((ranks <= k).mean())
    report.mrr = float((1.0 / ranks).mean())
    return report


def f1_score(result, ref) -> float:
    """F1 of a one-to-one mapping: precision over emitted (non-dummy) matches,
    recall over reference pairs.

    ``result`` is an AlignmentResult or a plain mapping sequence with ``None``
    marking dummy matches.
    """
    mapping = getattr(result, "mapping", result)
    pairs = _reference_pairs(ref)
    truth = {int(s): int(t) for s, t in pairs}
    if len(truth) != pairs.shape[0]:
        raise ValueError("reference has duplicate source entities")

    emitted = 0
    correct = 0
    for i, j in enumerate(mapping):
        if j is None:
            continue
        emitted += 1
        if truth.get(i) == j:
            correct += 1
    precision = correct / emitted if emitted else 0.0
    recall = correct / pairs.shape[0]
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)
