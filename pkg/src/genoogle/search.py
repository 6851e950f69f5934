"""The sequential search pipeline phases.

Query windows overlap at step 1 (bank windows do not), so every bank
window aligned with the query is reachable.  Index hits are chained
into candidate areas, filtered by minimum length, extended without
gaps, merged where they overlap, ranked by length, aligned, and scored.

All functions here are pure given immutable bank/index data; parallel
composition lives in the engine module.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .encoding import EncodedWord, SpacedSeedMask, text_to_codes
from .errors import ParameterError, QueryTooShortError
from .index import InvertedIndex
from .model import HSP, SearchParams


def _as_codes(seq) -> np.ndarray:
    if isinstance(seq, np.ndarray):
        return seq
    return text_to_codes(seq)


def process_query(query, mask: SpacedSeedMask) -> list[tuple[int, EncodedWord]]:
    """Masked word per step-1 window; windows with ambiguous bases skipped."""
    codes = _as_codes(query)
    if codes.shape[0] < mask.length:
        raise QueryTooShortError(
            f"query of {codes.shape[0]} bases shorter than window length {mask.length}"
        )
    values, valid = kernels.window_values(
        codes, mask.positions_array(), mask.length, 1
    )
    weight = mask.weight
    return [
        (int(i), EncodedWord(int(values[i]), weight))
        for i in np.nonzero(valid)[0]
    ]


def retrieve_hits(
    index: InvertedIndex, query_words: list[tuple[int, EncodedWord]]
) -> dict[int, list[tuple[int, int]]]:
    """Group index hits by bank sequence, ordered by (bank pos, query pos)."""
    hits: dict[int, list[tuple[int, int]]] = {}
    for qpos, word in query_words:
        if word.length != index.weight:
            raise ParameterError(
                f"word length {word.length} does not match index weight {index.weight}"
            )
        seqs, positions = index.bucket(word.value)
        for s, b in zip(seqs, positions):
            hits.setdefault(int(s), []).append((qpos, int(b)))
    for lst in hits.values():
        lst.sort(key=lambda t: (t[1], t[0]))
    return hits


def chain_hits(
    hits: list[tuple[int, int]],
    params: SearchParams,
    window_length: int,
    seq_id: int = 0,
) -> list[HSP]:
    """Greedy single-pass chaining of one sequence's (qpos, bpos) hits.

    Input must be ordered by (bank pos, query pos).  A hit joins the open
    chain when its bank and query gaps from the chain end and its
    diagonal drift from the chain seed are all within max_entry_distance.
    """
    if not hits:
        return []
    qpos = np.array([q for q, _ in hits], dtype=np.int64)
    bpos = np.array([b for _, b in hits], dtype=np.int64)
    seq = np.full(qpos.shape[0], seq_id, dtype=np.int64)
    s, qs, qe, bs, be = kernels.chain_areas(
        seq, bpos, qpos, params.max_entry_distance, window_length
    )
    return [
        HSP(int(s[i]), int(qs[i]), int(qe[i]), int(bs[i]), int(be[i]))
        for i in range(s.shape[0])
    ]


def filter_hsps(areas: list[HSP], params: SearchParams) -> list[HSP]:
    """Keep areas whose min-span length reaches min_hsp_length."""
    return [h for h in areas if h.length >= params.min_hsp_length]


def extend_hsp(query, bank_sequence, hsp: HSP, params: SearchParams) -> HSP:
    """Ungapped drop-off extension; never shrinks the input interval."""
    q = _as_codes(query)
    b = _as_codes(bank_sequence)
    qs, qe, bs, be = kernels.xdrop_extend(
        q,
        b,
        hsp.query_start,
        hsp.query_end,
        hsp.bank_start,
        hsp.bank_end,
        params.match_score,
        params.mismatch_score,
        params.extension_dropoff,
    )
    return HSP(hsp.seq_id, int(qs), int(qe), int(bs), int(be))


def _joint_overlap(a: HSP, b: HSP) -> bool:
    return (
        a.query_start < b.query_end
        and b.query_start < a.query_end
        and a.bank_start < b.bank_end
        and b.bank_start < a.bank_end
    )


def _bounding(a: HSP, b: HSP) -> HSP:
    return HSP(
        a.seq_id,
        min(a.query_start, b.query_start),
        max(a.query_end, b.query_end),
        min(a.bank_start, b.bank_start),
        max(a.bank_end, b.bank_end),
    )


def merge_overlapping(hsps: list[HSP]) -> list[HSP]:
    """Merge HSPs overlapping in both query and bank, to fixpoint.

    All inputs must come from one (query, bank sequence) pair.
    """
    items = list(hsps)
    changed = True
    while changed:
        changed = False
        out: list[HSP] = []
        for h in items:
            for i, g in enumerate(out):
                if h.seq_id == g.seq_id and _joint_overlap(h, g):
                    out[i] = _bounding(h, g)
                    changed = True
                    break
            else:
                out.append(h)
        items = out
    return items


def _selection_key(h: HSP):
    return (-h.length, h.seq_id, h.bank_start, h.query_start, h.bank_end, h.query_end)


def select_top(hsps: list[HSP], params: SearchParams) -> list[HSP]:
    """Sort by length descending (deterministic ties) and truncate."""
    ranked = sorted(hsps, key=_selection_key)
    if params.max_results > 0:
        ranked = ranked[: params.max_results]
    return ranked


def score_hsp(
    raw_score: int, query_len: int, bank_total_bases: int, params: SearchParams
) -> tuple[float, float]:
    """(bit score, e-value) for a raw alignment score.

    Negative scores (possible for merged boxes spanning dissimilar
    stretches) would overflow exp; their e-value saturates to inf.
    """
    lam, k = params.evalue_lambda, params.evalue_k
    if lam <= 0 or k <= 0:
        raise ParameterError("evalue_lambda and evalue_k must be positive")
    bit_score = (lam * raw_score - math.log(k)) / math.log(2.0)
    try:
        e_value = k * query_len * bank_total_bases * math.exp(-lam * raw_score)
    except OverflowError:
        e_value = math.inf
    return bit_score, e_value


def search(engine, query, params: SearchParams | None = None):
    """Run the full sequential pipeline on a loaded engine."""
    return engine.search(query, params)
