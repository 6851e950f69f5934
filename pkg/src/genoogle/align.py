"""Banded local alignment of HSP regions.

Smith-Waterman restricted to a diagonal band, with linear gap costs.
Long inputs are cut into equal-position segments; each segment pair is
aligned with both ends pinned so the per-segment results concatenate
into one alignment, and scores add up.  Working storage stays at
O(band * segment) cells per alignment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .encoding import text_to_codes
from .errors import ParameterError
from .model import HSP, SearchParams

GAP_CHAR = "-"

# band cells are 32-bit in the compiled backend; any path score must fit
_SCORE_CELL_LIMIT = 2**30


def _check_score_range(columns: int, params: SearchParams) -> None:
    unit = max(params.match_score, -params.mismatch_score, -params.gap_score)
    if columns * unit > _SCORE_CELL_LIMIT:
        raise ParameterError(
            "alignment of this size would overflow 32-bit score cells; "
            "reduce the score magnitudes or the input length"
        )


@dataclass(frozen=True)
class AlignmentResult:
    """An alignment of slices a[a_start:a_end] and b[b_start:b_end]."""

    score: int
    aligned_a: str
    midline: str
    aligned_b: str
    a_start: int
    a_end: int
    b_start: int
    b_end: int


def _as_codes(seq) -> np.ndarray:
    if isinstance(seq, np.ndarray):
        return seq
    return text_to_codes(seq)


_RENDER_CHARS = np.frombuffer(b"ACGTN", dtype=np.uint8)
_GAP_BYTE = np.uint8(ord(GAP_CHAR))


def _render(a: np.ndarray, b: np.ndarray, a0: int, b0: int, ops: np.ndarray):
    """Expand traceback ops into aligned texts plus the match midline."""
    n = ops.shape[0]
    if n == 0:
        return "", "", "", a0, b0
    consume_a = ops != 2
    consume_b = ops != 1
    ia = a0 + np.cumsum(consume_a) - consume_a
    ib = b0 + np.cumsum(consume_b) - consume_b
    av = a[np.minimum(ia, a.shape[0] - 1)]
    bv = b[np.minimum(ib, b.shape[0] - 1)]
    out_a = np.where(consume_a, _RENDER_CHARS[av], _GAP_BYTE)
    out_b = np.where(consume_b, _RENDER_CHARS[bv], _GAP_BYTE)
    matched = (ops == 0) & (av == bv) & (av <= 3)
    mid = np.where(matched, np.uint8(ord("|")), np.uint8(ord(" ")))
    return (
        out_a.astype(np.uint8).tobytes().decode("ascii"),
        mid.astype(np.uint8).tobytes().decode("ascii"),
        out_b.astype(np.uint8).tobytes().decode("ascii"),
        a0 + int(consume_a.sum()),
        b0 + int(consume_b.sum()),
    )


def banded_smith_waterman(a, b, params: SearchParams) -> AlignmentResult:
    """Local alignment over the cells within band_radius of the diagonal.

    With band_radius >= max(len(a), len(b)) this equals full
    Smith-Waterman.
    """
    a = _as_codes(a)
    b = _as_codes(b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ParameterError("alignment inputs must be nonempty")
    _check_score_range(a.shape[0] + b.shape[0], params)
    score, a0, a1, b0, b1, ops = kernels.sw_local(
        a, b, params.match_score, params.mismatch_score, params.gap_score,
        params.band_radius,
    )
    aligned_a, midline, aligned_b, ia, jb = _render(a, b, a0, b0, ops)
    assert (ia, jb) == (a1, b1)
    return AlignmentResult(score, aligned_a, midline, aligned_b, a0, a1, b0, b1)


def segmented_align(a, b, params: SearchParams) -> AlignmentResult:
    """Segment-wise alignment of two long sequences.

    Inputs no longer than segment_length delegate to
    :func:`banded_smith_waterman`.  Longer inputs are cut at the same
    positions into segment_length pieces; each pair aligns end-pinned
    and the pieces concatenate, scores summed.
    """
    a = _as_codes(a)
    b = _as_codes(b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ParameterError("alignment inputs must be nonempty")
    seg = params.segment_length
    na, nb = a.shape[0], b.shape[0]
    if max(na, nb) <= seg:
        return banded_smith_waterman(a, b, params)
    _check_score_range(2 * seg, params)
    total, ops = kernels.sw_global_segmented(
        a, b, params.match_score, params.mismatch_score, params.gap_score,
        params.band_radius, seg,
    )
    aligned_a, midline, aligned_b, ia, jb = _render(a, b, 0, 0, ops)
    assert (ia, jb) == (na, nb)
    return AlignmentResult(int(total), aligned_a, midline, aligned_b, 0, na, 0, nb)


def align_hsp(query, bank_sequence, hsp: HSP, params: SearchParams) -> AlignmentResult:
    """Align the HSP's two slices and report absolute coordinates."""
    q = _as_codes(query)
    b = _as_codes(bank_sequence)
    if not (0 <= hsp.query_start < hsp.query_end <= q.shape[0]):
        raise ParameterError(f"query interval of {hsp} out of range")
    if not (0 <= hsp.bank_start < hsp.bank_end <= b.shape[0]):
        raise ParameterError(f"bank interval of {hsp} out of range")
    res = segmented_align(
        q[hsp.query_start : hsp.query_end], b[hsp.bank_start : hsp.bank_end], params
    )
    return AlignmentResult(
        res.score,
        res.aligned_a,
        res.midline,
        res.aligned_b,
        res.a_start + hsp.query_start,
        res.a_end + hsp.query_start,
        res.b_start + hsp.bank_start,
        res.b_end + hsp.bank_start,
    )
