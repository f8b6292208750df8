"""Entity alignment by sparse feature propagation and assignment solving.

The pipeline: build an adjacency operator per KG, propagate entity features
along it, take the summed cross-graph inner products as a profit matrix, and
solve the resulting assignment problem with Sinkhorn iteration or the
Hungarian method.
"""

from .adjacency import AdjacencyKind, SparseMatrix, build_adjacency, degree_vector
from .assignment import (AlignmentResult, DoublyStochasticMatrix, SinkhornConfig,
                         extract_alignment, pad_profit, row_rankings, sinkhorn,
                         solve_hungarian)
from .evaluation import MetricsReport, f1_score, rank_metrics
from .features import (BigramVocabulary, FeatureMatrix, build_bigram_vocabulary,
                       char_bigram_features, concat_features, dump_features,
                       l2_normalize_rows, load_features, word_features)
from .kg import (AlignmentReference, KnowledgeGraph, ParseError, ValidationError,
                 WordVectorTable, load_kg, load_reference, load_word_vectors,
                 write_kg, write_reference)
from .pipeline import (Dataset, RunConfig, RunResult, bench, load_dataset,
                       run_alignment, sweep, write_outputs, write_sweep)
from .propagation import (MAX_DEPTH, ProfitMatrix, PropagationConfig,
                          objective_value, profit_matrix, propagate)
from .synth import SynthSpec, generate, relabel_kg, write_instance

__version__ = "0.1.0"

__all__ = [
    "AdjacencyKind", "AlignmentReference", "AlignmentResult", "BigramVocabulary",
    "Dataset", "DoublyStochasticMatrix", "FeatureMatrix", "KnowledgeGraph",
    "MAX_DEPTH", "MetricsReport", "ParseError", "ProfitMatrix",
    "PropagationConfig", "RunConfig", "RunResult", "SinkhornConfig",
    "SparseMatrix", "SynthSpec", "ValidationError", "WordVectorTable",
    "bench", "build_adjacency", "build_bigram_vocabulary", "char_bigram_features",
    "concat_features", "degree_vector", "dump_features", "extract_alignment",
    "f1_score", "generate", "l2_normalize_rows", "load_dataset", "load_features",
    "load_kg", "load_reference", "load_word_vectors", "objective_value",
    "pad_profit", "profit_matrix", "propagate", "rank_metrics", "relabel_kg",
    "row_rankings", "run_alignment", "sinkhorn", "solve_hungarian", "sweep",
    "word_features", "write_instance", "write_kg", "write_outputs",
    "write_reference", "write_sweep",
]
