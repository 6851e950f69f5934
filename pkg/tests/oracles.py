"""Independent oracles the test suite checks the package against.

Nothing here may call into the code paths under test: the aligner is a
full-matrix Smith-Waterman (no banding, no segmentation), the index
oracle is a linear scan over all bank windows, and scores are recomputed
directly from aligned texts.

Tie-break policy shared with the package (pinned so alignments compare
exactly): diagonal before up before left at equal score; the best local
cell is the first maximum in row-major order.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

BASES = "ACGT"


def full_smith_waterman(a: str, b: str, match: int, mismatch: int, gap: int):
    """Textbook full-matrix local alignment.

    Returns (score, a_start, a_end, b_start, b_end, ops) with ops codes
    0=diagonal, 1=up (consume a), 2=left (consume b).
    """
    na, nb = len(a), len(b)
    av = np.frombuffer(a.encode(), dtype=np.uint8)
    bv = np.frombuffer(b.encode(), dtype=np.uint8)
    known = np.isin(av[:, None], np.frombuffer(b"ACGT", dtype=np.uint8))
    sub = np.where((av[:, None] == bv[None, :]) & known, match, mismatch)

    H = np.zeros((na + 1, nb + 1), dtype=np.int64)
    for d in range(2, na + nb + 1):
        ilo = max(1, d - nb)
        ihi = min(na, d - 1)
        if ilo > ihi:
            continue
        i = np.arange(ilo, ihi + 1)
        j = d - i
        cand = H[i - 1, j - 1] + sub[i - 1, j - 1]
        cand = np.maximum(cand, H[i - 1, j] + gap)
        cand = np.maximum(cand, H[i, j - 1] + gap)
        H[i, j] = np.maximum(cand, 0)

    best = int(H.max())
    flat = int(np.argmax(H))  # first maximum in row-major order
    bi, bj = divmod(flat, nb + 1)
    ops: list[int] = []
    i, j = bi, bj
    while H[i, j] != 0:
        s = match if (a[i - 1] == b[j - 1] and a[i - 1] in BASES) else mismatch
        if H[i, j] == H[i - 1, j - 1] + s:
            ops.append(0)
            i -= 1
            j -= 1
        elif H[i, j] == H[i - 1, j] + gap:
            ops.append(1)
            i -= 1
        else:
            ops.append(2)
            j -= 1
    ops.reverse()
    return best, i, bi, j, bj, ops


def scan_bank_windows(sequences: list[str], pattern: str) -> dict[int, list[tuple[int, int]]]:
    """Brute-force inverted map of every indexable non-overlapping window.

    Applies the mask by hand (keep the 1-positions, encode 2 bits per
    base, first base most significant) over every window of every
    sequence; windows containing a non-ACGT base are skipped.
    """
    m = len(pattern)
    keep = [i for i, c in enumerate(pattern) if c == "1"]
    out: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for sid, seq in enumerate(sequences):
        seq = seq.upper().replace("U", "T")
        for pos in range(0, len(seq) - m + 1, m):
            window = seq[pos : pos + m]
            if any(c not in BASES for c in window):
                continue
            value = 0
            for k in keep:
                value = (value << 2) | BASES.index(window[k])
            out[value].append((sid, pos))
    return out


def score_from_texts(aligned_a: str, aligned_b: str, match: int, mismatch: int, gap: int) -> int:
    """Recompute an alignment score column by column."""
    total = 0
    for x, y in zip(aligned_a, aligned_b):
        if x == "-" or y == "-":
            total += gap
        elif x == y and x in BASES:
            total += match
        else:
            total += mismatch
    return total


def degap(text: str) -> str:
    return text.replace("-", "")
