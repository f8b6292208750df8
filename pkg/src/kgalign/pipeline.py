"""End-to-end alignment over a dataset directory.

A dataset directory holds ``triples_1`` and ``triples_2`` (required),
``ent_ids_1``/``ent_ids_2`` name files (needed by the name-based feature
channels), ``ref_ent_ids`` (optional reference; metrics are skipped without
it), and optionally ``features_1.bin``/``features_2.bin``. When both feature
files are present they win over any name-based channel: they are
already-built features, the channel flags only describe how to build them.

The run itself is the fixed stage chain: load, adjacency, propagation,
profit, solve, extract, evaluate. Every stage is wall-clock timed. Dense math
runs in float64 below 5000 entities and float32 at or above, with profit
accumulation always in float64.
"""

from __future__ import annotations

import json
import time
from contextlib import nullcontext
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .adjacency import AdjacencyKind, build_adjacency
from .assignment import (AlignmentResult, DoublyStochasticMatrix, SinkhornConfig,
                         extract_alignment, pad_profit, sinkhorn, solve_hungarian)
from .evaluation import MetricsReport, f1_score, rank_metrics
from .features import (FeatureMatrix, char_bigram_features, concat_features,
                       load_features, word_features)
from .kg import (AlignmentReference, KnowledgeGraph, load_kg, load_reference,
                 load_word_vectors)
from .propagation import MAX_DEPTH, ProfitMatrix, profit_matrix, propagate

_FLOAT32_ENTITY_THRESHOLD = 5000

CHANNELS = ("word", "char", "word_char", "precomputed")
SOLVERS = ("sinkhorn", "hungarian")


@dataclass
class RunConfig:
    data_dir: str = "."
    feature_channel: str = "word_char"
    adjacency_kind: AdjacencyKind = AdjacencyKind.RELATIONAL
    depth: int = 2
    solver: str = "sinkhorn"
    sinkhorn: SinkhornConfig = field(default_factory=SinkhornConfig)
    output_dir: str | None = None
    threads: int | None = None
    vectors_path: str | None = None

    def __post_init__(self):
        if self.feature_channel not in CHANNELS:
            raise ValueError(f"unknown feature channel {self.feature_channel!r}; "
                             f"expected one of {CHANNELS}")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        self.adjacency_kind = AdjacencyKind(self.adjacency_kind)
        if not 0 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in [0, {MAX_DEPTH}], got {self.depth}")
        if self.threads is not None and self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


@dataclass(eq=False)
class Dataset:
    source: KnowledgeGraph
    target: KnowledgeGraph
    source_features: FeatureMatrix
    target_features: FeatureMatrix
    reference: AlignmentReference | None
    channel_used: str


@dataclass(eq=False)
class RunResult:
    alignment: AlignmentResult
    metrics: MetricsReport | None
    timings: dict[str, float]
    dataset: Dataset
    scores: DoublyStochasticMatrix | ProfitMatrix
    profit: ProfitMatrix

    @property
    def channel_used(self) -> str:
        return self.dataset.channel_used


def _missing(base: Path, names: list[str]) -> list[str]:
    return [name for name in names if not (base / name).exists()]


def load_dataset(cfg: RunConfig) -> Dataset:
    base = Path(cfg.data_dir)
    missing = _missing(base, ["triples_1", "triples_2"])
    if missing:
        raise FileNotFoundError(
            f"dataset directory {base} is missing {', '.join(missing)}; expected "
            "triples_1 and triples_2, with ent_ids_1/ent_ids_2 for name-based "
            "feature channels or features_1.bin/features_2.bin for precomputed ones")

    names_1 = base / "ent_ids_1"
    names_2 = base / "ent_ids_2"
    kg_s = load_kg(base / "triples_1", names_1 if names_1.exists() else None)
    kg_t = load_kg(base / "triples_2", names_2 if names_2.exists() else None)
    ref_path = base / "ref_ent_ids"
    reference = load_reference(ref_path, kg_s, kg_t) if ref_path.exists() else None

    have_bins = not _missing(base, ["features_1.bin", "features_2.bin"])
    if have_bins:
        return Dataset(kg_s, kg_t, load_features(base / "features_1.bin"),
                       load_features(base / "features_2.bin"), reference, "precomputed")
    if cfg.feature_channel == "precomputed":
        raise FileNotFoundError(
            f"feature channel 'precomputed' needs features_1.bin and features_2.bin "
            f"in {base}; missing {', '.join(_missing(base, ['features_1.bin', 'features_2.bin']))}")

    missing = _missing(base, ["ent_ids_1", "ent_ids_2"])
    if missing:
        raise FileNotFoundError(
            f"feature channel {cfg.feature_channel!r} needs entity names; "
            f"{base} is missing {', '.join(missing)}")

    dtype = (np.float32
             if max(kg_s.entity_count, kg_t.entity_count) >= _FLOAT32_ENTITY_THRESHOLD
             else np.float64)
    word_s = word_t = None
    if cfg.feature_channel in ("word", "word_char"):
        if not cfg.vectors_path:
            raise FileNotFoundError(
                f"feature channel {cfg.feature_channel!r} needs a word-vector file; "
                "pass its path (flag --vectors)")
        if not Path(cfg.vectors_path).exists():
            raise FileNotFoundError(f"word-vector file not found: {cfg.vectors_path}")
        table = load_word_vectors(cfg.vectors_path)
        word_s = word_features(kg_s, table, dtype)
        word_t = word_features(kg_t, table, dtype)
    char_s = char_t = None
    if cfg.feature_channel in ("char", "word_char"):
        char_s, char_t, _ = char_bigram_features(kg_s, kg_t, dtype)

    if cfg.feature_channel == "word":
        feats = word_s, word_t
    elif cfg.feature_channel == "char":
        feats = char_s, char_t
    else:
        feats = concat_features(word_s, char_s), concat_features(word_t, char_t)
    return Dataset(kg_s, kg_t, feats[0], feats[1], reference, cfg.feature_channel)


def _thread_limit(threads: int | None):
    if threads is None:
        return nullcontext()
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=threads)


def _evaluate(scores, result: AlignmentResult,
              reference: AlignmentReference | None) -> MetricsReport | None:
    if reference is None:
        return None
    report = rank_metrics(scores, reference, ks=(1, 10))
    report.f1 = f1_score(result, reference)
    return report


def run_alignment(cfg: RunConfig) -> RunResult:
    timings: dict[str, float] = {}
    clock = time.perf_counter
    begin = clock()
    with _thread_limit(cfg.threads):
        t = clock()
        ds = load_dataset(cfg)
        timings["load"] = clock() - t

        t = clock()
        adj_s = build_adjacency(ds.source, cfg.adjacency_kind)
        adj_t = build_adjacency(ds.target, cfg.adjacency_kind)
        timings["adjacency"] = clock() - t

        t = clock()
        prop_s = propagate(adj_s, ds.source_features, cfg.depth)
        prop_t = propagate(adj_t, ds.target_features, cfg.depth)
        timings["propagation"] = clock() - t

        t = clock()
        profit = profit_matrix(prop_s, prop_t)
        padded = pad_profit(profit)
        timings["profit"] = clock() - t

        t = clock()
        if cfg.solver == "sinkhorn":
            scores: DoublyStochasticMatrix | ProfitMatrix = sinkhorn(padded, cfg.sinkhorn)
            timings["solve"] = clock() - t
            t = clock()
            result = extract_alignment(scores, padded)
            timings["extract"] = clock() - t
        else:
            result = solve_hungarian(padded)
            scores = profit
            timings["solve"] = clock() - t
            timings["extract"] = 0.0

        t = clock()
        metrics = _evaluate(scores, result, ds.reference)
        timings["evaluate"] = clock() - t
    timings["total"] = clock() - begin
    return RunResult(alignment=result, metrics=metrics, timings=timings,
                     dataset=ds, scores=scores, profit=profit)


def write_outputs(out_dir, run: RunResult) -> list[Path]:
    """Write alignment.tsv (raw ids), metrics.json, timing.json.

    Removes whatever it already wrote if any write fails, so failures leave
    no partial output behind.
    """
    ds = run.dataset
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        path = out / "alignment.tsv"
        with open(path, "w", encoding="utf-8") as fh:
            for i, j, score in run.alignment.matched_pairs():
                fh.write(f"{ds.source.entity_ids[i]}\t{ds.target.entity_ids[j]}\t{score:.12g}\n")
        written.append(path)

        if run.metrics is not None:
            path = out / "metrics.json"
            path.write_text(run.metrics.to_json() + "\n", encoding="utf-8")
            written.append(path)

        path = out / "timing.json"
        payload = {"stages": run.timings, "channel": run.channel_used,
                   "solver": run.alignment.solver}
        path.write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")
        written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return written


def sweep(cfg: RunConfig, param: str, values) -> list[tuple[float, MetricsReport]]:
    """Metrics per value of ``tau`` or ``depth``, all other settings fixed.

    Expensive shared work is done once: the profit matrix is reused across a
    tau sweep, and a depth sweep extends the profit sum one depth at a time.
    """
    if param not in ("tau", "depth"):
        raise ValueError(f"unknown sweep parameter {param!r}; expected 'tau' or 'depth'")
    values = list(values)
    if not values:
        raise ValueError("empty sweep value list")

    with _thread_limit(cfg.threads):
        ds = load_dataset(cfg)
        if ds.reference is None:
            raise FileNotFoundError("sweep needs ref_ent_ids to score each setting")
        adj_s = build_adjacency(ds.source, cfg.adjacency_kind)
        adj_t = build_adjacency(ds.target, cfg.adjacency_kind)

        rows: list[tuple[float, MetricsReport]] = []
        if param == "tau":
            taus = [float(v) for v in values]
            if min(taus) <= 0:
                raise ValueError("tau values must be > 0")
            prop_s = propagate(adj_s, ds.source_features, cfg.depth)
            prop_t = propagate(adj_t, ds.target_features, cfg.depth)
            padded = pad_profit(profit_matrix(prop_s, prop_t))
            for tau in taus:
                run_cfg = SinkhornConfig(iterations=cfg.sinkhorn.iterations, temperature=tau)
                scores = sinkhorn(padded, run_cfg)
                result = extract_alignment(scores, padded)
                rows.append((tau, _evaluate(scores, result, ds.reference)))
        else:
            depths = [int(v) for v in values]
            if any(d < 0 or d > MAX_DEPTH for d in depths):
                raise ValueError(f"depth values must be in [0, {MAX_DEPTH}]")
            top = max(depths)
            prop_s = propagate(adj_s, ds.source_features, top)
            prop_t = propagate(adj_t, ds.target_features, top)
            by_depth: dict[int, MetricsReport] = {}
            total = None
            for depth in range(top + 1):
                layer = profit_matrix(prop_s[depth:depth + 1], prop_t[depth:depth + 1])
                if total is None:
                    total = layer.data
                else:
                    total += layer.data
                if depth not in depths:
                    continue
                profit = ProfitMatrix(data=total.copy(), depth_used=depth)
                padded = pad_profit(profit)
                if cfg.solver == "sinkhorn":
                    scores = sinkhorn(padded, cfg.sinkhorn)
                    result = extract_alignment(scores, padded)
                else:
                    result = solve_hungarian(padded)
                    scores = profit
                by_depth[depth] = _evaluate(scores, result, ds.reference)
            rows = [(float(d), by_depth[d]) for d in depths]
    return rows


def write_sweep(out_dir, param: str, rows) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "sweep.tsv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{param}\thits@1\thits@10\tmrr\tf1\n")
        for value, report in rows:
            fh.write(f"{value:g}\t{report.hits.get(1, float('nan')):.6f}"
                     f"\t{report.hits.get(10, float('nan')):.6f}"
                     f"\t{report.mrr:.6f}\t{report.f1:.6f}\n")
    return path


def bench(cfg: RunConfig, repetitions: int = 3) -> dict:
    """Median per-stage wall times over full repeated runs, for both solvers."""
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    report: dict = {"repetitions": repetitions, "solvers": {}}
    for solver in SOLVERS:
        run_cfg = replace(cfg, solver=solver)
        samples: list[dict[str, float]] = []
        for _ in range(repetitions):
            samples.append(run_alignment(run_cfg).timings)
        stages = {name: float(np.median([s[name] for s in samples]))
                  for name in samples[0]}
        report["solvers"][solver] = stages
    return report
