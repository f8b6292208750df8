"""Loading and validation of knowledge graphs, reference alignments and word vectors.

File conventions follow the DBP15K / OpenEA layout:

* ``triples_*``: one triple per line, ``head<TAB>relation<TAB>tail`` with integer ids.
* ``ent_ids_*``: ``id<TAB>name`` where name is either a translated entity name or a
  URI (for URIs the local name after the last ``/`` is used).
* ``ref_ent_ids``: ``source_id<TAB>target_id`` ground-truth pairs.

All files are UTF-8; LF and CRLF line endings are both accepted. Raw entity and
relation ids are densified to ``0..|E|-1`` / ``0..|R|-1`` in sorted-id order; the
original ids are kept so results can be written back in terms of the input files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ParseError(ValueError):
    """A line of an input file could not be parsed."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


class ValidationError(ValueError):
    """Input parsed fine but violates a structural constraint."""


@dataclass(eq=False)
class KnowledgeGraph:
    """A directed multi-relational graph with densified integer indices.

    ``triples`` is an ``(|T|, 3)`` int64 array of ``(head, relation, tail)``
    index triples, deduplicated and sorted. ``entity_ids`` / ``relation_ids``
    map each dense index back to the raw id from the input file.
    """

    entity_count: int
    relation_count: int
    triples: np.ndarray
    entity_ids: np.ndarray
    relation_ids: np.ndarray
    relation_triple_counts: np.ndarray
    entity_names: dict[int, str] | None = None
    entity_index: dict[int, int] = field(repr=False, default_factory=dict)

    @property
    def triple_count(self) -> int:
        return self.triples.shape[0]

    @classmethod
    def from_triples(cls, triples, entity_ids=None, relation_ids=None, names=None):
        """Build a validated graph from raw-id triples.

        Duplicate triples are dropped. When ``entity_ids``/``relation_ids`` are
        omitted they are taken to be the sorted sets of ids observed in the
        triples.
        """
        raw = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
        raw = np.unique(raw, axis=0)
        if entity_ids is None:
            entity_ids = np.unique(raw[:, [0, 2]])
        else:
            entity_ids = np.asarray(entity_ids, dtype=np.int64)
        if relation_ids is None:
            relation_ids = np.unique(raw[:, 1])
        else:
            relation_ids = np.asarray(relation_ids, dtype=np.int64)

        ent_index = {int(e): i for i, e in enumerate(entity_ids)}
        rel_index = {int(r): i for i, r in enumerate(relation_ids)}
        dense = np.empty_like(raw)
        for k, (h, r, t) in enumerate(raw):
            try:
                dense[k, 0] = ent_index[int(h)]
                dense[k, 2] = ent_index[int(t)]
            except KeyError as exc:
                raise ValidationError(f"triple references unknown entity id {exc.args[0]}")
            try:
                dense[k, 1] = rel_index[int(r)]
            except KeyError as exc:
                raise ValidationError(f"triple references unknown relation id {exc.args[0]}")
        dense = dense[np.lexsort((dense[:, 2], dense[:, 1], dense[:, 0]))]
        counts = np.bincount(dense[:, 1], minlength=len(relation_ids)).astype(np.int64)
        return cls(
            entity_count=len(entity_ids),
            relation_count=len(relation_ids),
            triples=dense,
            entity_ids=entity_ids,
            relation_ids=relation_ids,
            relation_triple_counts=counts,
            entity_names=names,
            entity_index=ent_index,
        )

    def name_of(self, index: int) -> str:
        """Entity name for the char/word feature channels; '' when unknown."""
        if self.entity_names is None:
            return ""
        return self.entity_names.get(index, "")


@dataclass(eq=False)
class AlignmentReference:
    """Ground-truth one-to-one entity pairs, ``(N, 2)`` array of dense indices."""

    pairs: np.ndarray

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        for side, label in ((0, "source"), (1, "target")):
            ids, counts = np.unique(self.pairs[:, side], return_counts=True)
            if np.any(counts > 1):
                dup = int(ids[np.argmax(counts > 1)])
                raise ValidationError(f"duplicate {label} entity {dup} in reference pairs")

    def __len__(self) -> int:
        return self.pairs.shape[0]


@dataclass(eq=False)
class WordVectorTable:
    """Pre-trained word vectors shared by both graphs, token -> float vector."""

    dimension: int
    entries: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, token: str):
        return self.entries.get(token)


def _strip_uri(name: str) -> str:
    # ent_ids files sometimes carry full URIs; only those get local-name treatment
    if name.startswith(("http://", "https://")):
        return name.rsplit("/", 1)[-1]
    return name


def load_kg(triples_path, names_path=None) -> KnowledgeGraph:
    """Load a graph from a triples file and an optional id/name file.

    Raises :class:`ParseError` on malformed lines and :class:`ValidationError`
    when the names file mentions an entity id absent from the triples.
    """
    rows = []
    with open(triples_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(triples_path, lineno, f"expected 3 tab-separated fields, got {len(parts)}")
            try:
                rows.append(tuple(int(p) for p in parts))
            except ValueError:
                raise ParseError(triples_path, lineno, f"non-integer field in {parts!r}") from None
    if not rows:
        raise ValidationError(f"{triples_path}: no triples found")

    kg = KnowledgeGraph.from_triples(np.array(rows, dtype=np.int64))

    if names_path is not None:
        names: dict[int, str] = {}
        with open(names_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\r\n")
                if not line.strip():
                    continue
                parts = line.split("\t", 1)
                if len(parts) != 2:
                    raise ParseError(names_path, lineno, "expected 'id<TAB>name'")
                try:
                    raw_id = int(parts[0])
                except ValueError:
                    raise ParseError(names_path, lineno, f"non-integer entity id {parts[0]!r}") from None
                if raw_id not in kg.entity_index:
                    raise ValidationError(f"{names_path}:{lineno}: name for unknown entity id {raw_id}")
                names[kg.entity_index[raw_id]] = _strip_uri(parts[1])
        kg.entity_names = names
    return kg


def write_kg(kg: KnowledgeGraph, triples_path, names_path=None) -> None:
    """Inverse of :func:`load_kg`, writing raw ids back out."""
    with open(triples_path, "w", encoding="utf-8") as fh:
        for h, r, t in kg.triples:
            fh.write(f"{kg.entity_ids[h]}\t{kg.relation_ids[r]}\t{kg.entity_ids[t]}\n")
    if names_path is not None and kg.entity_names is not None:
        with open(names_path, "w", encoding="utf-8") as fh:
            for index in sorted(kg.entity_names):
                fh.write(f"{kg.entity_ids[index]}\t{kg.entity_names[index]}\n")


def load_reference(path, source: KnowledgeGraph | None = None,
                   target: KnowledgeGraph | None = None) -> AlignmentReference:
    """Load ground-truth pairs, mapping raw ids to dense indices when graphs are given.

    Pair order is preserved. Duplicate source or target entities are rejected:
    the ground truth is one-to-one by definition.
    """
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(path, lineno, f"expected 2 tab-separated fields, got {len(parts)}")
            try:
                s, t = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, lineno, f"non-integer field in {parts!r}") from None
            if source is not None:
                if s not in source.entity_index:
                    raise ValidationError(f"{path}:{lineno}: unknown source entity id {s}")
                s = source.entity_index[s]
            if target is not None:
                if t not in target.entity_index:
                    raise ValidationError(f"{path}:{lineno}: unknown target entity id {t}")
                t = target.entity_index[t]
            pairs.append((s, t))
    return AlignmentReference(np.array(pairs, dtype=np.int64).reshape(-1, 2))


def write_reference(ref: AlignmentReference, path, source: KnowledgeGraph | None = None,
                    target: KnowledgeGraph | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s, t in ref.pairs:
            raw_s = source.entity_ids[s] if source is not None else s
            raw_t = target.entity_ids[t] if target is not None else t
            fh.write(f"{raw_s}\t{raw_t}\n")


def load_word_vectors(path) -> WordVectorTable:
    """Parse a whitespace-separated vector file.

    An optional first line ``count dim`` (two integers) is treated as a header.
    Every entry line is ``token v1 .. vd``; the dimension is fixed by the first
    entry and later duplicates of a token overwrite earlier ones.
    """
    entries: dict[str, np.ndarray] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue  # count/dim header
            token, values = parts[0], parts[1:]
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError:
                raise ParseError(path, lineno, f"non-numeric vector component for token {token!r}") from None
            if dim is None:
                if vec.size == 0:
                    raise ParseError(path, lineno, "entry has no vector components")
                dim = vec.size
            elif vec.size != dim:
                raise ParseError(path, lineno, f"dimension {vec.size} != expected {dim}")
            if not np.all(np.isfinite(vec)):
                raise ParseError(path, lineno, f"non-finite vector component for token {token!r}")
            entries[token] = vec
    if dim is None:
        raise ValidationError(f"{path}: no vector entries found")
    return WordVectorTable(dimension=int(dim), entries=entries)
