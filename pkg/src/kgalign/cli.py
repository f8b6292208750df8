"""Command line: align, eval, sweep, synth, bench.

Every run-shaped command takes the same flags, optionally seeded from a
``key = value`` config file (one pair per line, ``#`` comments); explicit
flags win over file values. Thread caps are applied to the BLAS pools at run
time and exported to the environment for any child processes.

Exit status: 0 on success, 2 on any validation or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

_THREAD_ENV = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
               "NUMEXPR_NUM_THREADS", "VECLIB_MAXIMUM_THREADS")

_CHANNELS = {"word": "word", "char": "char",
             "word+char": "word_char", "word_char": "word_char",
             "precomputed": "precomputed"}
_ADJACENCIES = {"rel": "relational", "relational": "relational", "raw": "raw",
                "rw": "random_walk", "random_walk": "random_walk",
                "lap": "laplacian", "laplacian": "laplacian"}

_DEFAULTS = {"data": None, "channel": "word+char", "adjacency": "rel",
             "depth": 2, "solver": "sinkhorn", "tau": 0.02, "iters": 10,
             "out": "out", "threads": None, "vectors": None}


def _run_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--data", help="dataset directory")
    p.add_argument("--channel", choices=sorted(_CHANNELS),
                   help="feature channel (default word+char)")
    p.add_argument("--adjacency", choices=sorted(_ADJACENCIES),
                   help="adjacency kind (default rel)")
    p.add_argument("--depth", type=int, help="propagation depth L (default 2)")
    p.add_argument("--solver", choices=("sinkhorn", "hungarian"),
                   help="assignment solver (default sinkhorn)")
    p.add_argument("--tau", type=float, help="Sinkhorn temperature (default 0.02)")
    p.add_argument("--iters", type=int, help="Sinkhorn iterations (default 10)")
    p.add_argument("--out", help="output directory (default ./out)")
    p.add_argument("--threads", type=int, help="cap BLAS threads")
    p.add_argument("--vectors", help="word-vector file for the word channel")
    p.add_argument("--config", help="key = value config file; flags win")
    return p


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _DEFAULTS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = value.strip().strip("\"'")
    return values


def _merge_settings(args) -> dict:
    from_file = _parse_config_file(args.config) if getattr(args, "config", None) else {}
    merged = {}
    for key, default in _DEFAULTS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
        elif key in from_file:
            merged[key] = from_file[key]
        else:
            merged[key] = default
    for key, cast in (("depth", int), ("iters", int), ("threads", int), ("tau", float)):
        if isinstance(merged[key], str):
            merged[key] = cast(merged[key])
    if merged["data"] is None:
        raise ValueError("--data is required (flag or config file)")
    if merged["channel"] not in _CHANNELS:
        raise ValueError(f"unknown channel {merged['channel']!r}")
    if merged["adjacency"] not in _ADJACENCIES:
        raise ValueError(f"unknown adjacency {merged['adjacency']!r}")
    return merged


def _apply_thread_env(threads: int | None) -> None:
    if threads is None:
        return
    for name in _THREAD_ENV:
        os.environ[name] = str(threads)


def _build_config(args):
    merged = _merge_settings(args)
    _apply_thread_env(merged["threads"])
    from .assignment import SinkhornConfig
    from .pipeline import RunConfig
    return RunConfig(
        data_dir=merged["data"],
        feature_channel=_CHANNELS[merged["channel"]],
        adjacency_kind=_ADJACENCIES[merged["adjacency"]],
        depth=merged["depth"],
        solver=merged["solver"],
        sinkhorn=SinkhornConfig(iterations=merged["iters"], temperature=merged["tau"]),
        output_dir=merged["out"],
        threads=merged["threads"],
        vectors_path=merged["vectors"],
    ), merged


def _cmd_align(args) -> int:
    cfg, merged = _build_config(args)
    from .pipeline import run_alignment, write_outputs
    run = run_alignment(cfg)
    written = write_outputs(merged["out"], run)
    if run.metrics is not None:
        print(run.metrics.table())
    else:
        print("no ref_ent_ids in dataset; metrics skipped")
    print(f"channel: {run.channel_used}  solver: {run.alignment.solver}  "
          f"total: {run.timings['total']:.3f}s")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_eval(args) -> int:
    from .evaluation import f1_score
    from .kg import load_kg, load_reference
    base = Path(args.data)
    for name in ("triples_1", "triples_2", "ref_ent_ids"):
        if not (base / name).exists():
            raise FileNotFoundError(f"eval needs {name} in {base}")
    kg_s = load_kg(base / "triples_1")
    kg_t = load_kg(base / "triples_2")
    ref = load_reference(base / "ref_ent_ids", kg_s, kg_t)
    mapping: list[int | None] = [None] * kg_s.entity_count
    with open(args.alignment, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise ValueError(f"{args.alignment}:{lineno}: expected src\\ttgt\\tscore")
            src, tgt = int(parts[0]), int(parts[1])
            if src not in kg_s.entity_index or tgt not in kg_t.entity_index:
                raise ValueError(f"{args.alignment}:{lineno}: unknown entity id")
            mapping[kg_s.entity_index[src]] = kg_t.entity_index[tgt]
    f1 = f1_score(mapping, ref)
    print(json.dumps({"f1": f1, "pairs": len(ref)}, separators=(",", ":")))
    return 0


def _cmd_sweep(args) -> int:
    cfg, merged = _build_config(args)
    from .pipeline import sweep, write_sweep
    values = [v for v in args.values.split(",") if v.strip()]
    if not values:
        raise ValueError("--values must be a non-empty comma-separated list")
    rows = sweep(cfg, args.param, values)
    path = write_sweep(merged["out"], args.param, rows)
    print(f"{args.param}\thits@1\thits@10\tmrr\tf1")
    for value, report in rows:
        print(f"{value:g}\t{report.hits[1]:.4f}\t{report.hits[10]:.4f}"
              f"\t{report.mrr:.4f}\t{report.f1:.4f}")
    print(f"wrote {path}")
    return 0


def _cmd_synth(args) -> int:
    from .synth import SynthSpec, generate, write_instance
    spec = SynthSpec(entities=args.entities, relations=args.relations,
                     triple_density=args.density, feature_dim=args.dim,
                     structure_noise=args.structure_noise,
                     feature_noise=args.feature_noise, seed=args.seed)
    kg_s, kg_t, feats_s, feats_t, ref = generate(spec)
    write_instance(args.out, kg_s, kg_t, feats_s, feats_t, ref)
    print(f"wrote instance to {args.out}: {kg_s.entity_count} entities, "
          f"{kg_s.triple_count}/{kg_t.triple_count} triples, "
          f"{kg_s.relation_count} relations, d={feats_s.dimension}")
    return 0


def _cmd_bench(args) -> int:
    cfg, merged = _build_config(args)
    from .pipeline import bench
    report = bench(cfg, repetitions=args.repetitions)
    out = Path(merged["out"])
    out.mkdir(parents=True, exist_ok=True)
    path = out / "timing.json"
    path.write_text(json.dumps(report, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{'stage':<12}" + "".join(f"{s:>12}" for s in report["solvers"]))
    stage_names = next(iter(report["solvers"].values())).keys()
    for stage in stage_names:
        row = "".join(f"{report['solvers'][s][stage]:>12.4f}" for s in report["solvers"])
        print(f"{stage:<12}{row}")
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgalign",
        description="Entity alignment by feature propagation and assignment solving")
    sub = parser.add_subparsers(dest="command", required=True)
    run_flags = _run_flags()

    p = sub.add_parser("align", parents=[run_flags],
                       help="align two KGs and write alignment.tsv/metrics.json/timing.json")
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("eval", help="score a written alignment.tsv against ref_ent_ids")
    p.add_argument("--data", required=True, help="dataset directory with ref_ent_ids")
    p.add_argument("--alignment", required=True, help="alignment.tsv to score")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", parents=[run_flags],
                       help="metrics per value of tau or depth; writes sweep.tsv")
    p.add_argument("--param", choices=("tau", "depth"), required=True)
    p.add_argument("--values", required=True, help="comma-separated value list")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic instance with planted truth")
    p.add_argument("--entities", "-n", type=int, required=True)
    p.add_argument("--relations", type=int, default=8)
    p.add_argument("--density", type=float, default=3.0,
                   help="expected triples per entity (default 3)")
    p.add_argument("--dim", type=int, default=32, help="feature dimension (default 32)")
    p.add_argument("--structure-noise", type=float, default=0.0)
    p.add_argument("--feature-noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="instance directory to write")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("bench", parents=[run_flags],
                       help="median per-stage wall times for both solvers")
    p.add_argument("--repetitions", type=int, default=3)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
