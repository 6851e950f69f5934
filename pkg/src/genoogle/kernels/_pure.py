"""Pure-Python kernels.

Reference implementations of the hot inner loops.  The compiled module
genoogle.kernels._core mirrors these signatures exactly; both backends
must produce identical outputs (checked by the kernel parity tests).

Conventions shared by both backends:

* sequences are uint8 code arrays (0..3 bases, 4 ambiguous),
* traceback op codes: 0 = diagonal, 1 = up (consume a, gap in b),
  2 = left (consume b, gap in a), listed in alignment order,
* tie-breaks in the aligners: diagonal, then up, then left; the best
  local cell is the first maximum in row-major order.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def unpack_2bit(words, length, bitmap):
    """Unpack little-endian u32 words (first base in the top bit pair)
    into a code array, restoring ambiguous positions from the MSB-first
    bitmap."""
    shifts = np.arange(30, -2, -2, dtype=np.uint32)
    codes = ((words[:, None] >> shifts[None, :]) & np.uint32(3)).astype(np.uint8)
    codes = codes.reshape(-1)[:length].copy()
    if bitmap.shape[0]:
        ambig = np.unpackbits(bitmap)
        codes[ambig[:length].astype(bool)] = 4
    return codes


def window_values(codes, mask_pos, m, stride):
    """Masked word values of the windows starting at 0, stride, 2*stride...

    Returns (values uint32, valid uint8); a window is valid when none of
    its m bases (kept or dropped) is ambiguous.
    """
    n = codes.shape[0]
    if n < m:
        return np.empty(0, np.uint32), np.empty(0, np.uint8)
    starts = np.arange(0, n - m + 1, stride, dtype=np.int64)
    values = np.zeros(starts.shape[0], dtype=np.uint32)
    for p in mask_pos:
        values = (values << np.uint32(2)) | codes[starts + p].astype(np.uint32)
    bad = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(codes > 3, out=bad[1:])
    valid = bad[starts + m] == bad[starts]
    values[~valid] = 0
    return values, valid.astype(np.uint8)


def seed_hits(codes, qoffset, mask_pos, m, bucket_offsets, entry_seq, entry_pos):
    """Step-1 window scan plus bucket gather.

    For every valid window of `codes` the bucket addressed by its masked
    value is gathered.  Returns (seq_ids, bank_positions, query_positions)
    as uint32 arrays; query positions are absolute (window start+qoffset).
    """
    values, valid = window_values(codes, mask_pos, m, 1)
    starts = np.nonzero(valid)[0]
    vals = values[starts].astype(np.int64)
    lo = bucket_offsets[vals].astype(np.int64)
    counts = bucket_offsets[vals + 1].astype(np.int64) - lo
    total = int(counts.sum())
    if total == 0:
        empty = np.empty(0, np.uint32)
        return empty, empty.copy(), empty.copy()
    qpos = np.repeat((starts + qoffset).astype(np.uint32), counts)
    cum = np.cumsum(counts)
    idx = np.arange(total, dtype=np.int64) - np.repeat(cum - counts, counts)
    idx += np.repeat(lo, counts)
    return entry_seq[idx], entry_pos[idx], qpos


def chain_areas(seq, bpos, qpos, max_dist, m):
    """Greedy single-pass chaining of hits into candidate areas.

    Input arrays must be sorted by (seq, bank position, query position).
    A hit joins the open chain when its bank gap and query gap from the
    chain's current end are each <= max_dist and its diagonal is within
    max_dist of the chain seed's diagonal.  Chains never span sequences.
    Returns int64 arrays (seq, query_start, query_end, bank_start,
    bank_end) with ends extended by the window length m.
    """
    n = seq.shape[0]
    out_seq, out_qs, out_qe, out_bs, out_be = [], [], [], [], []
    if n == 0:
        return tuple(np.empty(0, np.int64) for _ in range(5))
    cur_seq = -1
    seed_diag = end_b = end_q = 0
    min_q = max_q = min_b = max_b = 0

    def flush():
        out_seq.append(cur_seq)
        out_qs.append(min_q)
        out_qe.append(max_q + m)
        out_bs.append(min_b)
        out_be.append(max_b + m)

    for i in range(n):
        s = int(seq[i])
        b = int(bpos[i])
        q = int(qpos[i])
        if cur_seq != -1:
            if (
                s == cur_seq
                and b - end_b <= max_dist
                and abs(q - end_q) <= max_dist
                and abs((b - q) - seed_diag) <= max_dist
            ):
                end_b, end_q = b, q
                min_q, max_q = min(min_q, q), max(max_q, q)
                min_b, max_b = min(min_b, b), max(max_b, b)
                continue
            flush()
        cur_seq = s
        seed_diag = b - q
        end_b = min_b = max_b = b
        end_q = min_q = max_q = q
    flush()
    return (
        np.array(out_seq, dtype=np.int64),
        np.array(out_qs, dtype=np.int64),
        np.array(out_qe, dtype=np.int64),
        np.array(out_bs, dtype=np.int64),
        np.array(out_be, dtype=np.int64),
    )


def xdrop_extend(q, b, qs, qe, bs, be, match, mismatch, dropoff):
    """Ungapped drop-off extension of [qs,qe)x[bs,be) in both directions.

    Endpoints march outward in lockstep and retract to the best-scoring
    position; a side stops once the running score falls more than
    `dropoff` below its best.  Never shrinks the input interval.
    """
    nq, nb = q.shape[0], b.shape[0]
    best = run = 0
    i, j = qe, be
    best_i, best_j = qe, be
    while i < nq and j < nb:
        run += match if (q[i] == b[j] and q[i] <= 3) else mismatch
        i += 1
        j += 1
        if run > best:
            best, best_i, best_j = run, i, j
        elif best - run > dropoff:
            break
    qe, be = best_i, best_j
    best = run = 0
    i, j = qs, bs
    best_i, best_j = qs, bs
    while i > 0 and j > 0:
        i -= 1
        j -= 1
        run += match if (q[i] == b[j] and q[i] <= 3) else mismatch
        if run > best:
            best, best_i, best_j = run, i, j
        elif best - run > dropoff:
            break
    return best_i, qe, best_j, be


def sw_local(a, b, match, mismatch, gap, radius):
    """Banded local alignment over cells |i-j| <= radius, linear gaps.

    Returns (score, a_start, a_end, b_start, b_end, ops).
    """
    na, nb = a.shape[0], b.shape[0]
    r = radius
    width = 2 * r + 1
    H = np.zeros((na + 1, width), dtype=np.int64)
    P = np.zeros((na + 1, width), dtype=np.uint8)
    best = 0
    bi = bj = 0
    for i in range(1, na + 1):
        jlo = max(1, i - r)
        jhi = min(nb, i + r)
        ai = a[i - 1]
        for j in range(jlo, jhi + 1):
            c = j - (i - r)
            sub = match if (ai == b[j - 1] and ai <= 3) else mismatch
            diag = (H[i - 1, c] if (i > 1 and j > 1) else 0) + sub
            h, p = (diag, 1) if diag > 0 else (0, 0)
            if j <= i - 1 + r:
                up = (H[i - 1, c + 1] if i > 1 else 0) + gap
                if up > h:
                    h, p = up, 2
            if j - 1 >= i - r:
                left = (H[i, c - 1] if j > 1 else 0) + gap
                if left > h:
                    h, p = left, 3
            H[i, c] = h
            P[i, c] = p
            if h > best:
                best, bi, bj = h, i, j
    ops = []
    i, j = bi, bj
    while True:
        c = j - (i - r)
        p = P[i, c]
        if p == 0:
            break
        if p == 1:
            ops.append(0)
            i -= 1
            j -= 1
        elif p == 2:
            ops.append(1)
            i -= 1
        else:
            ops.append(2)
            j -= 1
    ops.reverse()
    return int(best), i, bi, j, bj, np.array(ops, dtype=np.uint8)


def sw_global(a, b, match, mismatch, gap, radius):
    """Banded global alignment with both ends pinned, linear gaps.

    The caller must ensure radius >= |len(a) - len(b)| so the corner cell
    lies inside the band.  Returns (score, ops).
    """
    na, nb = a.shape[0], b.shape[0]
    r = radius
    width = 2 * r + 1
    NEG = -(2**60)
    H = np.full((na + 1, width), NEG, dtype=np.int64)
    P = np.zeros((na + 1, width), dtype=np.uint8)
    for j in range(0, min(nb, r) + 1):
        H[0, j + r] = j * gap
        P[0, j + r] = 3 if j > 0 else 0
    for i in range(1, na + 1):
        jlo = max(0, i - r)
        jhi = min(nb, i + r)
        ai = a[i - 1]
        for j in range(jlo, jhi + 1):
            c = j - (i - r)
            if j == 0:
                H[i, c] = i * gap
                P[i, c] = 2
                continue
            sub = match if (ai == b[j - 1] and ai <= 3) else mismatch
            h = H[i - 1, c] + sub
            p = 1
            if j <= i - 1 + r:
                up = H[i - 1, c + 1] + gap
                if up > h:
                    h, p = up, 2
            if j - 1 >= i - r:
                left = H[i, c - 1] + gap
                if left > h:
                    h, p = left, 3
            H[i, c] = h
            P[i, c] = p
    score = H[na, nb - (na - r)]
    ops = []
    i, j = na, nb
    while i > 0 or j > 0:
        p = P[i, j - (i - r)]
        if p == 1:
            ops.append(0)
            i -= 1
            j -= 1
        elif p == 2:
            ops.append(1)
            i -= 1
        else:
            ops.append(2)
            j -= 1
    ops.reverse()
    return int(score), np.array(ops, dtype=np.uint8)


def sw_global_segmented(a, b, match, mismatch, gap, radius, seg):
    """Aligned-position segments, each end-pinned, tracebacks
    concatenated and scores summed.  Empty pieces become pure gaps."""
    na, nb = a.shape[0], b.shape[0]
    total = 0
    parts = []
    for start in range(0, max(na, nb), seg):
        sub_a = a[start : start + seg]
        sub_b = b[start : start + seg]
        sa, sb = sub_a.shape[0], sub_b.shape[0]
        if sa == 0 and sb == 0:
            continue
        if sa == 0:
            total += sb * gap
            parts.append(np.full(sb, 2, dtype=np.uint8))
            continue
        if sb == 0:
            total += sa * gap
            parts.append(np.full(sa, 1, dtype=np.uint8))
            continue
        r = max(radius, abs(sa - sb))
        score, ops = sw_global(sub_a, sub_b, match, mismatch, gap, r)
        total += score
        parts.append(ops)
    ops = np.concatenate(parts) if parts else np.empty(0, dtype=np.uint8)
    return int(total), ops
