"""Graph classifier built from conjunctive clauses over hypervector inputs."""

from .automata import ClauseWeights, TaTeam, type_i_feedback, type_ii_feedback
from .datasets import (
    DatasetSpec,
    gen_bar_stripe,
    gen_grid_patches,
    gen_mv_xor,
    gen_seq_consecutive,
    generate,
)
from .engine import (
    EpochMetrics,
    GraphTmModel,
    TrainConfig,
    evaluate,
    load_model,
    save_model,
)
from .errors import (
    BindingOverflowError,
    ConfigError,
    CorruptModelError,
    GraphTmError,
    InputError,
    SpaceMismatchError,
    SymbolExistsError,
    UnknownSymbolError,
)
from .graph import (
    Corpus,
    GraphRecord,
    InputGraph,
    build_graph,
    neighbors_out,
    read_corpus,
    write_corpus,
)
from .hypervector import (
    Hypervector,
    MessageSpace,
    SymbolSpace,
    bind_offset,
    bundle,
    vocabulary_hash,
)
from .interpret import (
    Literal,
    SymbolicClause,
    TraceResult,
    decode_clause,
    evaluate_symbolic,
    install_clauses,
    symbolic_truth_table,
    trace_to_nodes,
)

__version__ = "0.1.0"

__all__ = [
    "BindingOverflowError",
    "ClauseWeights",
    "ConfigError",
    "Corpus",
    "CorruptModelError",
    "DatasetSpec",
    "EpochMetrics",
    "GraphRecord",
    "GraphTmError",
    "GraphTmModel",
    "Hypervector",
    "InputError",
    "InputGraph",
    "Literal",
    "MessageSpace",
    "SpaceMismatchError",
    "SymbolExistsError",
    "SymbolicClause",
    "SymbolSpace",
    "TaTeam",
    "TraceResult",
    "TrainConfig",
    "UnknownSymbolError",
    "bind_offset",
    "build_graph",
    "bundle",
    "decode_clause",
    "evaluate",
    "evaluate_symbolic",
    "gen_bar_stripe",
    "gen_grid_patches",
    "gen_mv_xor",
    "gen_seq_consecutive",
    "generate",
    "install_clauses",
    "load_model",
    "neighbors_out",
    "read_corpus",
    "save_model",
    "symbolic_truth_table",
    "trace_to_nodes",
    "type_i_feedback",
    "type_ii_feedback",
    "vocabulary_hash",
    "write_corpus",
]
