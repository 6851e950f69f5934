"""Search parameter sets, HSPs and result containers."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .errors import ParameterError


@dataclass(frozen=True)
class SearchParams:
    """Knobs of the search pipeline.

    max_entry_distance: merge radius (bases) for chaining index hits.
    min_hsp_length: drop candidate areas shorter than this (min-span rule).
    extension_dropoff: stop extension once the running score falls this
        far below the best seen.
    max_results: HSPs kept at selection; 0 keeps all.
    gap_score: applied per gap position (opening and extending cost the same).
    band_radius: half-width of the alignment band around the diagonal.
    segment_length: long alignments are cut into segments of this size.
    evalue_lambda / evalue_k: e-value statistics parameters.
    """

    max_entry_distance: int = 64
    min_hsp_length: int = 18
    extension_dropoff: int = 20
    max_results: int = 20
    match_score: int = 1
    mismatch_score: int = -3
    gap_score: int = -5
    band_radius: int = 16
    segment_length: int = 2000
    evalue_lambda: float = 1.33
    evalue_k: float = 0.621

    def __post_init__(self):
        if self.max_entry_distance < 1:
            raise ParameterError("max_entry_distance must be >= 1")
        if self.min_hsp_length < 1:
            raise ParameterError("min_hsp_length must be >= 1")
        if self.extension_dropoff <= 0:
            raise ParameterError("extension_dropoff must be > 0")
        if self.max_results < 0:
            raise ParameterError("max_results must be >= 0")
        if not self.match_score > 0 > self.mismatch_score:
            raise ParameterError("need match_score > 0 > mismatch_score")
        if self.gap_score >= 0:
            raise ParameterError("gap_score must be negative")
        if self.band_radius < 1:
            raise ParameterError("band_radius must be >= 1")
        if self.segment_length < 1:
            raise ParameterError("segment_length must be >= 1")
        if self.evalue_lambda <= 0 or self.evalue_k <= 0:
            raise ParameterError("evalue_lambda and evalue_k must be positive")

    def validate_for_mask(self, mask) -> None:
        if self.max_entry_distance < mask.length:
            raise ParameterError(
                f"max_entry_distance {self.max_entry_distance} below window length {mask.length}"
            )
        if self.min_hsp_length < mask.weight:
            raise ParameterError(
                f"min_hsp_length {self.min_hsp_length} below mask weight {mask.weight}"
            )

    def with_overrides(self, **kwargs) -> "SearchParams":
        return replace(self, **kwargs)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class EngineConfig:
    """Parallel run shape: query splits and extend/align worker count.

    Bank fragment count is fixed when the bank is formatted, so it is a
    property of the loaded engine, not of this config.
    """

    query_splits: int = 1
    align_workers: int = 1

    def __post_init__(self):
        if self.query_splits < 1 or self.align_workers < 1:
            raise ParameterError("query_splits and align_workers must be >= 1")


@dataclass(frozen=True)
class HSP:
    """Candidate similar region (half-open intervals on both sequences)."""

    seq_id: int
    query_start: int
    query_end: int
    bank_start: int
    bank_end: int

    def __post_init__(self):
        if not (self.query_start < self.query_end and self.bank_start < self.bank_end):
            raise ParameterError(f"degenerate HSP intervals: {self}")

    @property
    def length(self) -> int:
        """The smaller of the two spans."""
        return min(self.query_end - self.query_start, self.bank_end - self.bank_start)


@dataclass(frozen=True)
class ScoredHSP:
    """An aligned and scored HSP ready for reporting."""

    seq_id: int
    query_start: int
    query_end: int
    bank_start: int
    bank_end: int
    score: int
    bit_score: float
    e_value: float
    aligned_query: str
    midline: str
    aligned_bank: str

    def sort_key(self):
        return (
            -self.score,
            self.e_value,
            self.seq_id,
            self.bank_start,
            self.query_start,
            self.bank_end,
            self.query_end,
        )


@dataclass(frozen=True)
class Hit:
    """All reported HSPs of one bank sequence."""

    seq_id: int
    name: str
    description: str
    hsps: tuple[ScoredHSP, ...]


@dataclass(frozen=True)
class SearchResult:
    bank_name: str
    query_id: str
    params: SearchParams
    hits: tuple[Hit, ...] = field(default_factory=tuple)

    @property
    def hsp_count(self) -> int:
        return sum(len(h.hsps) for h in self.hits)
