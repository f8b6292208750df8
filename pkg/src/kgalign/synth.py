"""Synthetic alignment instances with planted ground truth.

The generator samples a random simple KG, plants a permutation pi, and builds
the second KG as a relabeled copy. At zero noise the two graphs are exactly
isomorphic and the target features are exactly the permuted source features,
so every adjacency kind satisfies A_t = P A_s P^T and the planted matching is
the unique assignment optimum (feature rows drawn from a unit Gaussian are
distinct almost surely). Two independent dials then break the ideal premises:
``structure_noise`` deletes and resamples a fraction of target triples, and
``feature_noise`` adds Gaussian perturbation to target features.

Relation types are sampled with Zipf-like frequencies so the log-frequency
weights of the relational adjacency differ across relations instead of
degenerating to a plain random walk.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import FeatureMatrix, dump_features, l2_normalize_rows
from .kg import AlignmentReference, KnowledgeGraph, write_kg, write_reference

# Above this many candidate pairs, sample codes by rejection instead of
# materializing a full permutation of the pair space.
_DENSE_PAIR_LIMIT = 1 << 22


@dataclass
class SynthSpec:
    entities: int
    relations: int
    triple_density: float = 3.0
    feature_dim: int = 32
    structure_noise: float = 0.0
    feature_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.entities < 2:
            raise ValueError(f"need at least 2 entities, got {self.entities}")
        if self.relations < 1:
            raise ValueError(f"need at least 1 relation, got {self.relations}")
        if self.feature_dim < 1:
            raise ValueError(f"need at least 1 feature dimension, got {self.feature_dim}")
        if not 0.0 <= self.structure_noise <= 1.0:
            raise ValueError(f"structure_noise must be in [0, 1], got {self.structure_noise}")
        if self.feature_noise < 0.0:
            raise ValueError(f"feature_noise must be >= 0, got {self.feature_noise}")
        n_pairs = self.entities * (self.entities - 1) // 2
        wanted = int(round(self.entities * self.triple_density))
        if wanted < 1:
            raise ValueError(f"triple_density {self.triple_density} yields no triples")
        if wanted > n_pairs:
            raise ValueError(
                f"triple_density {self.triple_density} asks for {wanted} triples "
                f"but a simple graph on {self.entities} entities holds at most {n_pairs}")


def _pair_offsets(n: int) -> np.ndarray:
    # offsets[i] = first linear code of row i in the strict upper triangle
    i = np.arange(n, dtype=np.int64)
    return i * n - i * (i + 1) // 2


def _decode_pairs(codes: np.ndarray, n: int, offsets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    i = np.searchsorted(offsets, codes, side="right") - 1
    j = i + 1 + (codes - offsets[i])
    return i, j


def _sample_pair_codes(rng, n_pairs: int, count: int, taken: set[int]) -> np.ndarray:
    """Distinct pair codes not in ``taken``, uniform over the remainder."""
    if n_pairs <= _DENSE_PAIR_LIMIT:
        pool = rng.permutation(n_pairs)
        fresh = pool[~np.isin(pool, np.fromiter(taken, np.int64, len(taken)))] \
            if taken else pool
        if fresh.size < count:
            raise ValueError("not enough free entity pairs to sample")
        return fresh[:count]
    picked: list[int] = []
    seen = set(taken)
    for _ in range(100):
        draw = rng.integers(0, n_pairs, size=2 * count)
        for code in draw:
            code = int(code)
            if code not in seen:
                seen.add(code)
                picked.append(code)
                if len(picked) == count:
                    return np.asarray(picked, dtype=np.int64)
    raise ValueError("pair sampling did not terminate; density too high")


def _assemble_triples(rng, codes: np.ndarray, n: int, relation_probs: np.ndarray,
                      offsets: np.ndarray) -> np.ndarray:
    i, j = _decode_pairs(codes, n, offsets)
    flip = rng.random(codes.size) < 0.5
    heads = np.where(flip, j, i)
    tails = np.where(flip, i, j)
    relations = rng.choice(relation_probs.size, size=codes.size, p=relation_probs)
    return np.stack([heads, relations, tails], axis=1).astype(np.int64)


def _pair_code(offsets: np.ndarray, a: int, b: int) -> int:
    lo, hi = (a, b) if a < b else (b, a)
    return int(offsets[lo] + (hi - lo - 1))


def _patch_coverage(rng, triples: np.ndarray, n: int, taken: set[int],
                    relation_probs: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Attach one fresh triple to every entity that has none.

    The file formats define the entity universe by occurrence in the triples,
    so coverage must be total for an instance to round-trip through files.
    """
    present = np.zeros(n, dtype=bool)
    present[triples[:, 0]] = True
    present[triples[:, 2]] = True
    extra = []
    for e in np.flatnonzero(~present):
        for _ in range(1000):
            other = int(rng.integers(0, n - 1))
            other += other >= e
            code = _pair_code(offsets, e, other)
            if code not in taken:
                taken.add(code)
                extra.append(code)
                break
        else:
            raise ValueError("could not attach an isolated entity; graph too dense")
    if not extra:
        return triples
    extra_triples = _assemble_triples(rng, np.asarray(extra, dtype=np.int64),
                                      n, relation_probs, offsets)
    return np.concatenate([triples, extra_triples], axis=0)


def generate(spec: SynthSpec) -> tuple[KnowledgeGraph, KnowledgeGraph,
                                       FeatureMatrix, FeatureMatrix, AlignmentReference]:
    """Sample an instance; bit-for-bit reproducible from ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    n = spec.entities
    n_pairs = n * (n - 1) // 2
    offsets = _pair_offsets(n)
    ranks = np.arange(1, spec.relations + 1, dtype=np.float64)
    relation_probs = (1.0 / ranks) / (1.0 / ranks).sum()

    wanted = int(round(n * spec.triple_density))
    codes = _sample_pair_codes(rng, n_pairs, wanted, taken=set())
    triples = _assemble_triples(rng, codes, n, relation_probs, offsets)
    triples = _patch_coverage(rng, triples, n, set(int(c) for c in codes),
                              relation_probs, offsets)

    perm = rng.permutation(n)
    source_features = rng.standard_normal((n, spec.feature_dim))
    l2_normalize_rows(source_features)

    target_triples = triples.copy()
    rewired = int(round(spec.structure_noise * triples.shape[0]))
    if rewired:
        victims = rng.choice(triples.shape[0], size=rewired, replace=False)
        kept = np.delete(np.arange(triples.shape[0]), victims)
        kept_codes = set(_pair_code(offsets, int(h), int(t)) for h, _, t in triples[kept])
        new_codes = _sample_pair_codes(rng, n_pairs, rewired, taken=kept_codes)
        target_triples = np.concatenate(
            [triples[kept],
             _assemble_triples(rng, new_codes, n, relation_probs, offsets)], axis=0)
        kept_codes.update(int(c) for c in new_codes)
        target_triples = _patch_coverage(rng, target_triples, n, kept_codes,
                                         relation_probs, offsets)
    target_triples = np.stack([perm[target_triples[:, 0]],
                               target_triples[:, 1],
                               perm[target_triples[:, 2]]], axis=1)

    target_data = np.empty_like(source_features)
    target_data[perm] = source_features
    if spec.feature_noise > 0.0:
        target_data = target_data + spec.feature_noise * rng.standard_normal(target_data.shape)
        l2_normalize_rows(target_data)

    kg_s = KnowledgeGraph.from_triples(triples)
    kg_t = KnowledgeGraph.from_triples(target_triples)
    reference = AlignmentReference(np.stack([np.arange(n, dtype=np.int64), perm], axis=1))
    return (kg_s, kg_t, FeatureMatrix(source_features), FeatureMatrix(target_data), reference)


def relabel_kg(kg: KnowledgeGraph, perm) -> KnowledgeGraph:
    """Copy of ``kg`` with entity index i renamed to ``perm[i]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(kg.entity_count)):
        raise ValueError("perm is not a permutation of the entity indices")
    triples = np.stack([perm[kg.triples[:, 0]], kg.triples[:, 1],
                        perm[kg.triples[:, 2]]], axis=1)
    names = None
    if kg.entity_names is not None:
        names = {int(perm[i]): name for i, name in kg.entity_names.items()}
    return KnowledgeGraph.from_triples(triples, names=names)


def write_instance(out_dir, kg_s: KnowledgeGraph, kg_t: KnowledgeGraph,
                   source_features: FeatureMatrix, target_features: FeatureMatrix,
                   reference: AlignmentReference) -> None:
    """Write an instance in the dataset directory layout.

    ``triples_1``/``triples_2`` and ``ref_ent_ids`` use the standard text
    formats; features go to ``features_1.bin``/``features_2.bin``, which the
    pipeline picks up as a precomputed channel.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_kg(kg_s, out / "triples_1")
    write_kg(kg_t, out / "triples_2")
    write_reference(reference, out / "ref_ent_ids", source=kg_s, target=kg_t)
    dump_features(source_features, out / "features_1.bin")
    dump_features(target_features, out / "features_2.bin")
