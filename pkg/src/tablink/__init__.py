"""tablink: offline entity linking for scientific tables.

Maps mention strings (table cells, column headers, free text) to items in a
local knowledge-base snapshot. Everything runs from three local files: a
records file, a type-edge file, and a domain config. No network access.
"""

from .closure import TypeClosure, build_closure, has_type, read_closure, write_closure
from .errors import (
    BadWeights,
    ConfigError,
    EmptyMention,
    GoldMismatch,
    IndexUnavailable,
    InvalidEntityId,
    ParseError,
    TablinkError,
    TierConflict,
    UnresolvedTypeName,
)
from .evalbench import (
    EvalReport,
    GoldRecord,
    LatencyReport,
    bench,
    evaluate,
    project_corpus_days,
    read_gold,
    write_gold,
)
from .index import Index, RawCandidate, build_index, load_index, save_index, search
from .ingest import IngestStats, ingest_dump, parse_entity_doc
from .kb import (
    DomainConfig,
    EntityId,
    InferenceRule,
    ItemRecord,
    Params,
    TypeEdge,
    ValidatedConfig,
    Weights,
    load_config,
    parse_config_obj,
    read_edges,
    read_records,
    save_config,
    validate_config,
    write_edges,
    write_records,
)
from .linker import (
    LinkCache,
    LinkResult,
    ScoredCandidate,
    cached_link,
    classify_type_tier,
    context_similarity,
    infer_domain_types,
    link,
    link_from_candidates,
)
from .synth import SynthResult, generate_synthetic_kb
from .tables import (
    CellAnnotation,
    Table,
    TableAnnotation,
    classify_orientation,
    column_type_vote,
    detect_literal,
    link_table,
    read_annotation,
    read_table,
    read_table_csv,
    write_annotation,
)
from .text import normalize, tf_cosine, tokenize
from .version import FORMAT_VERSION, __version__

__all__ = [
    "BadWeights",
    "CellAnnotation",
    "ConfigError",
    "DomainConfig",
    "EmptyMention",
    "EntityId",
    "EvalReport",
    "FORMAT_VERSION",
    "GoldMismatch",
    "GoldRecord",
    "Index",
    "IndexUnavailable",
    "InferenceRule",
    "IngestStats",
    "InvalidEntityId",
    "ItemRecord",
    "LatencyReport",
    "LinkCache",
    "LinkResult",
    "Params",
    "ParseError",
    "RawCandidate",
    "ScoredCandidate",
    "SynthResult",
    "Table",
    "TableAnnotation",
    "TablinkError",
    "TierConflict",
    "TypeClosure",
    "TypeEdge",
    "UnresolvedTypeName",
    "ValidatedConfig",
    "Weights",
    "__version__",
    "bench",
    "build_closure",
    "build_index",
    "cached_link",
    "classify_orientation",
    "classify_type_tier",
    "column_type_vote",
    "context_similarity",
    "detect_literal",
    "evaluate",
    "generate_synthetic_kb",
    "has_type",
    "infer_domain_types",
    "ingest_dump",
    "link",
    "link_from_candidates",
    "link_table",
    "load_config",
    "load_index",
    "normalize",
    "parse_config_obj",
    "parse_entity_doc",
    "project_corpus_days",
    "read_annotation",
    "read_edges",
    "read_gold",
    "read_records",
    "read_table",
    "read_table_csv",
    "save_config",
    "save_index",
    "search",
    "tf_cosine",
    "tokenize",
    "validate_config",
    "write_annotation",
    "write_edges",
    "write_gold",
    "write_records",
]
