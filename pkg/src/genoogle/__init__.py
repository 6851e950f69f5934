"""Indexed, parallel similarity search engine for DNA sequence banks."""

from .align import AlignmentResult, align_hsp, banded_smith_waterman, segmented_align
from .databank import (
    Bank,
    BankMeta,
    SequenceRecord,
    bank_windows,
    estimate_index_memory,
    estimated_entry_count,
    format_bank,
    get_sequence,
    load_bank,
)
from .encoding import (
    EncodedWord,
    SpacedSeedMask,
    apply_mask,
    decode_word,
    encode_base,
    encode_word,
    parse_mask,
)
from .engine import Engine, fragment_bank, parallel_search, split_query
from .index import InvertedIndex, build_index, load_index, lookup, save_index
from .model import HSP, EngineConfig, SearchParams, SearchResult
from .search import (
    chain_hits,
    extend_hsp,
    filter_hsps,
    merge_overlapping,
    process_query,
    retrieve_hits,
    score_hsp,
    search,
    select_top,
)
from .xmlout import parse_results_xml, write_results_xml

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult",
    "Bank",
    "BankMeta",
    "EncodedWord",
    "Engine",
    "EngineConfig",
    "HSP",
    "InvertedIndex",
    "SearchParams",
    "SearchResult",
    "SequenceRecord",
    "SpacedSeedMask",
    "align_hsp",
    "apply_mask",
    "bank_windows",
    "banded_smith_waterman",
    "build_index",
    "chain_hits",
    "decode_word",
    "encode_base",
    "encode_word",
    "estimate_index_memory",
    "estimated_entry_count",
    "extend_hsp",
    "filter_hsps",
    "format_bank",
    "fragment_bank",
    "get_sequence",
    "load_bank",
    "load_index",
    "lookup",
    "merge_overlapping",
    "parallel_search",
    "parse_mask",
    "parse_results_xml",
    "process_query",
    "retrieve_hits",
    "save_index",
    "score_hsp",
    "search",
    "segmented_align",
    "select_top",
    "split_query",
    "write_results_xml",
    "__version__",
]
