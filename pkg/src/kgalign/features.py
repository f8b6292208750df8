"""Textual entity features: averaged word vectors and character-bigram counts.

Both channels produce L2-normalized rows, so a depth-0 profit entry is a
cosine similarity in [-1, 1] and the two channels live on the same scale when
concatenated. Rows that carry no signal (all tokens out of vocabulary, or an
empty name) are left at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kg import KnowledgeGraph, WordVectorTable

_HEADER_DTYPE = np.dtype("<i8")


@dataclass(eq=False)
class FeatureMatrix:
    """Dense ``|E| x d`` real matrix of per-entity features."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def dimension(self) -> int:
        return self.data.shape[1]


@dataclass(eq=False)
class BigramVocabulary:
    """Bigram -> column index, shared by both graphs, lexicographic order."""

    index: dict[str, int]

    def __len__(self) -> int:
        return len(self.index)


def l2_normalize_rows(data: np.ndarray) -> np.ndarray:
    """Scale every non-zero row to unit L2 norm in place; zero rows stay zero."""
    norms = np.linalg.norm(data, axis=1)
    nz = norms > 0
    data[nz] /= norms[nz, None]
    return data


def tokenize(name: str) -> list[str]:
    # DBpedia local names use underscores as separators
    return name.lower().replace("_", " ").split()


def name_bigrams(name: str) -> list[str]:
    """Character bigrams of a lowercased name; 1-char names yield themselves."""
    s = name.lower()
    if len(s) <= 1:
        return [s] if s else []
    return [s[i:i + 2] for i in range(len(s) - 1)]


def word_features(kg: KnowledgeGraph, table: WordVectorTable, dtype=np.float64) -> FeatureMatrix:
    """Average the word vectors of each entity name's tokens, then unit-normalize.

    Tokens missing from the table are skipped; an entity whose tokens are all
    out of vocabulary gets a zero row.
    """
    if kg.entity_names is None:
        raise ValueError(
            "graph has no entity names; word features need a names file "
            "(or use the char channel)"
        )
    data = np.zeros((kg.entity_count, table.dimension), dtype=np.float64)
    for i in range(kg.entity_count):
        vectors = [table.get(tok) for tok in tokenize(kg.name_of(i))]
        vectors = [v for v in vectors if v is not None]
        if vectors:
            data[i] = np.mean(vectors, axis=0)
    l2_normalize_rows(data)
    return FeatureMatrix(data.astype(dtype, copy=False))


def build_bigram_vocabulary(*kgs: KnowledgeGraph) -> BigramVocabulary:
    grams: set[str] = set()
    for kg in kgs:
        for i in range(kg.entity_count):
            grams.update(name_bigrams(kg.name_of(i)))
    return BigramVocabulary({g: c for c, g in enumerate(sorted(grams))})


def _bigram_rows(kg: KnowledgeGraph, vocab: BigramVocabulary, dtype) -> FeatureMatrix:
    data = np.zeros((kg.entity_count, len(vocab)), dtype=np.float64)
    for i in range(kg.entity_count):
        for g in name_bigrams(kg.name_of(i)):
            data[i, vocab.index[g]] += 1.0
    l2_normalize_rows(data)
    return FeatureMatrix(data.astype(dtype, copy=False))


def char_bigram_features(kg_s: KnowledgeGraph, kg_t: KnowledgeGraph,
                         dtype=np.float64) -> tuple[FeatureMatrix, FeatureMatrix, BigramVocabulary]:
    """Bigram count rows for both graphs over a joint vocabulary."""
    for label, kg in (("source", kg_s), ("target", kg_t)):
        if kg.entity_names is None:
            raise ValueError(f"{label} graph has no entity names; char features need a names file")
    vocab = build_bigram_vocabulary(kg_s, kg_t)
    return _bigram_rows(kg_s, vocab, dtype), _bigram_rows(kg_t, vocab, dtype), vocab


def concat_features(word: FeatureMatrix, char: FeatureMatrix) -> FeatureMatrix:
    """Concatenate two pre-normalized blocks and re-normalize the full rows."""
    if word.rows != char.rows:
        raise ValueError(f"row count mismatch: {word.rows} != {char.rows}")
    data = np.hstack([word.data, char.data])
    l2_normalize_rows(data)
    return FeatureMatrix(data)


def dump_features(features: FeatureMatrix, path) -> None:
    """Flat binary dump: rows and dim as little-endian int64, then row-major float32."""
    with open(path, "wb") as fh:
        header = np.array([features.rows, features.dimension], dtype=_HEADER_DTYPE)
        fh.write(header.tobytes())
        fh.write(np.ascontiguousarray(features.data, dtype="<f4").tobytes())


def load_features(path) -> FeatureMatrix:
    with open(path, "rb") as fh:
        header = np.frombuffer(fh.read(16), dtype=_HEADER_DTYPE)
        if header.size != 2 or header[0] < 0 or header[1] < 0:
            raise ValueError(f"{path}: malformed feature header")
        rows, dim = int(header[0]), int(header[1])
        data = np.frombuffer(fh.read(rows * dim * 4), dtype="<f4")
        if data.size != rows * dim:
            raise ValueError(f"{path}: truncated feature payload")
    return FeatureMatrix(data.reshape(rows, dim).astype(np.float32))
