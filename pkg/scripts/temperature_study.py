#!/usr/bin/env python3
"""Effect of the Sinkhorn temperature on a noisy planted instance.

Builds one noisy synthetic instance, computes the profit matrix once, then
ranks candidates three ways: by raw profit, and by the balanced scores at each
requested temperature. On clean instances every column ties at 1.0; with
structure and feature noise the balancing at a sharp temperature recovers
pairs that raw profit misses, while a flat temperature gives that advantage
back.

Example:
    python3 scripts/temperature_study.py --entities 400 --taus 0.02,0.1,1,10
"""

import argparse
import sys

from kgalign.adjacency import AdjacencyKind, build_adjacency
from kgalign.assignment import SinkhornConfig, sinkhorn
from kgalign.evaluation import rank_metrics
from kgalign.propagation import profit_matrix, propagate
from kgalign.synth import SynthSpec, generate


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--entities", type=int, default=400)
    parser.add_argument("--relations", type=int, default=6)
    parser.add_argument("--dim", type=int, default=24)
    parser.add_argument("--structure-noise", type=float, default=0.15)
    parser.add_argument("--feature-noise", type=float, default=0.3)
    parser.add_argument("--depth", type=int, default=2)
    parser.add_argument("--iters", type=int, default=10)
    parser.add_argument("--taus", default="0.02,0.1,1,10")
    parser.add_argument("--seed", type=int, default=5)
    args = parser.parse_args()

    spec = SynthSpec(entities=args.entities, relations=args.relations,
                     feature_dim=args.dim, structure_noise=args.structure_noise,
                     feature_noise=args.feature_noise, seed=args.seed)
    kg_s, kg_t, f_s, f_t, ref = generate(spec)
    a_s = build_adjacency(kg_s, AdjacencyKind.RELATIONAL)
    a_t = build_adjacency(kg_t, AdjacencyKind.RELATIONAL)
    x = profit_matrix(propagate(a_s, f_s, args.depth),
                      propagate(a_t, f_t, args.depth))

    print(f"# n={args.entities}, structure_noise={args.structure_noise}, "
          f"feature_noise={args.feature_noise}, depth={args.depth}, seed={args.seed}")
    print("ranking\thits@1\thits@10\tmrr")
    raw = rank_metrics(x, ref)
    print(f"raw profit\t{raw.hits[1]:.4f}\t{raw.hits[10]:.4f}\t{raw.mrr:.4f}")
    for tau in (float(t) for t in args.taus.split(",") if t.strip()):
        scores = sinkhorn(x, SinkhornConfig(iterations=args.iters, temperature=tau))
        report = rank_metrics(scores, ref)
        print(f"tau={tau:g}\t{report.hits[1]:.4f}\t{report.hits[10]:.4f}\t{report.mrr:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
