# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels.

Mirrors genoogle.kernels._pure exactly; see that module for the shared
conventions (code arrays, op codes, tie-breaks).  All inner loops run
without the GIL so search threads scale across cores.
"""

import threading

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint8_t, uint32_t, uint64_t

BACKEND = "c"

# Per-thread scratch for the aligners.  Fresh numpy allocations of band
# size go through mmap/munmap, which serializes threads; reusing
# thread-local buffers keeps the workers scaling.
_tls = threading.local()


def _scratch(Py_ssize_t cells, Py_ssize_t ops_len):
    bufs = getattr(_tls, "bufs", None)
    if bufs is None or bufs[0].shape[0] < cells or bufs[2].shape[0] < ops_len:
        old_h = 0 if bufs is None else bufs[0].shape[0]
        old_o = 0 if bufs is None else bufs[2].shape[0]
        n_h = max(cells, 2 * old_h, 1 << 16)
        n_o = max(ops_len, 2 * old_o, 1 << 12)
        bufs = (
            np.empty(n_h, dtype=np.int32),
            np.empty(n_h, dtype=np.uint8),
            np.empty(n_o, dtype=np.uint8),
        )
        _tls.bufs = bufs
    return bufs


def unpack_2bit(const uint32_t[::1] words, Py_ssize_t length,
                const uint8_t[::1] bitmap):
    codes_arr = np.empty(length, dtype=np.uint8)
    cdef uint8_t[::1] codes = codes_arr
    cdef Py_ssize_t i, w, k, base = 0
    cdef uint32_t word
    cdef Py_ssize_t nwords = words.shape[0]
    with nogil:
        for w in range(nwords):
            word = words[w]
            k = 30
            while k >= 0 and base < length:
                codes[base] = (word >> k) & 3
                base += 1
                k -= 2
        for i in range(length):
            if bitmap[i >> 3] & (0x80 >> (i & 7)):
                codes[i] = 4
    return codes_arr


def window_values(const uint8_t[::1] codes, const int32_t[::1] mask_pos,
                  Py_ssize_t m, Py_ssize_t stride):
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t s = mask_pos.shape[0]
    cdef Py_ssize_t nw = 0
    if n >= m:
        nw = (n - m) // stride + 1
    values_arr = np.zeros(nw, dtype=np.uint32)
    valid_arr = np.zeros(nw, dtype=np.uint8)
    cdef uint32_t[::1] values = values_arr
    cdef uint8_t[::1] valid = valid_arr
    cdef Py_ssize_t w, k, start
    cdef uint32_t v
    cdef int ok
    with nogil:
        for w in range(nw):
            start = w * stride
            ok = 1
            for k in range(m):
                if codes[start + k] > 3:
                    ok = 0
                    break
            if ok:
                v = 0
                for k in range(s):
                    v = (v << 2) | codes[start + mask_pos[k]]
                values[w] = v
                valid[w] = 1
    return values_arr, valid_arr


def seed_hits(const uint8_t[::1] codes, Py_ssize_t qoffset,
              const int32_t[::1] mask_pos, Py_ssize_t m,
              const uint64_t[::1] bucket_offsets,
              const uint32_t[::1] entry_seq, const uint32_t[::1] entry_pos):
    cdef Py_ssize_t n = codes.shape[0]
    cdef Py_ssize_t s = mask_pos.shape[0]
    cdef Py_ssize_t nw = 0
    if n >= m:
        nw = n - m + 1
    cdef Py_ssize_t w, k
    cdef uint32_t v
    cdef int64_t vi
    cdef int ok
    cdef int64_t total = 0
    cdef int64_t lo, hi, t

    values_arr = np.zeros(nw, dtype=np.uint32)
    valid_arr = np.zeros(nw, dtype=np.uint8)
    cdef uint32_t[::1] values = values_arr
    cdef uint8_t[::1] valid = valid_arr
    with nogil:
        for w in range(nw):
            ok = 1
            for k in range(m):
                if codes[w + k] > 3:
                    ok = 0
                    break
            if ok:
                v = 0
                for k in range(s):
                    v = (v << 2) | codes[w + mask_pos[k]]
                values[w] = v
                valid[w] = 1
                vi = <int64_t> v
                total += <int64_t> (bucket_offsets[vi + 1] - bucket_offsets[vi])

    out_seq_arr = np.empty(total, dtype=np.uint32)
    out_bpos_arr = np.empty(total, dtype=np.uint32)
    out_qpos_arr = np.empty(total, dtype=np.uint32)
    cdef uint32_t[::1] out_seq = out_seq_arr
    cdef uint32_t[::1] out_bpos = out_bpos_arr
    cdef uint32_t[::1] out_qpos = out_qpos_arr
    cdef int64_t pos = 0
    with nogil:
        for w in range(nw):
            if not valid[w]:
                continue
            vi = <int64_t> values[w]
            lo = <int64_t> bucket_offsets[vi]
            hi = <int64_t> bucket_offsets[vi + 1]
            for t in range(lo, hi):
                out_seq[pos] = entry_seq[t]
                out_bpos[pos] = entry_pos[t]
                out_qpos[pos] = <uint32_t> (w + qoffset)
                pos += 1
    return out_seq_arr, out_bpos_arr, out_qpos_arr


def chain_areas(const int64_t[::1] seq, const int64_t[::1] bpos,
                const int64_t[::1] qpos, int64_t max_dist, int64_t m):
    cdef Py_ssize_t n = seq.shape[0]
    out_seq_arr = np.empty(n, dtype=np.int64)
    out_qs_arr = np.empty(n, dtype=np.int64)
    out_qe_arr = np.empty(n, dtype=np.int64)
    out_bs_arr = np.empty(n, dtype=np.int64)
    out_be_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] out_seq = out_seq_arr
    cdef int64_t[::1] out_qs = out_qs_arr
    cdef int64_t[::1] out_qe = out_qe_arr
    cdef int64_t[::1] out_bs = out_bs_arr
    cdef int64_t[::1] out_be = out_be_arr
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t i
    cdef int64_t cur_seq = -1, seed_diag = 0, end_b = 0, end_q = 0
    cdef int64_t min_q = 0, max_q = 0, min_b = 0, max_b = 0
    cdef int64_t s, b, q, dq, dd
    if n == 0:
        return (out_seq_arr[:0], out_qs_arr[:0], out_qe_arr[:0],
                out_bs_arr[:0], out_be_arr[:0])
    with nogil:
        for i in range(n):
            s = seq[i]
            b = bpos[i]
            q = qpos[i]
            if cur_seq != -1:
                dq = q - end_q
                if dq < 0:
                    dq = -dq
                dd = (b - q) - seed_diag
                if dd < 0:
                    dd = -dd
                if (s == cur_seq and b - end_b <= max_dist
                        and dq <= max_dist and dd <= max_dist):
                    end_b = b
                    end_q = q
                    if q < min_q:
                        min_q = q
                    if q > max_q:
                        max_q = q
                    if b < min_b:
                        min_b = b
                    if b > max_b:
                        max_b = b
                    continue
                out_seq[count] = cur_seq
                out_qs[count] = min_q
                out_qe[count] = max_q + m
                out_bs[count] = min_b
                out_be[count] = max_b + m
                count += 1
            cur_seq = s
            seed_diag = b - q
            end_b = min_b = max_b = b
            end_q = min_q = max_q = q
        out_seq[count] = cur_seq
        out_qs[count] = min_q
        out_qe[count] = max_q + m
        out_bs[count] = min_b
        out_be[count] = max_b + m
        count += 1
    return (out_seq_arr[:count].copy(), out_qs_arr[:count].copy(),
            out_qe_arr[:count].copy(), out_bs_arr[:count].copy(),
            out_be_arr[:count].copy())


def xdrop_extend(const uint8_t[::1] q, const uint8_t[::1] b,
                 int64_t qs, int64_t qe, int64_t bs, int64_t be,
                 int64_t match, int64_t mismatch, int64_t dropoff):
    cdef int64_t nq = q.shape[0]
    cdef int64_t nb = b.shape[0]
    cdef int64_t best, run, i, j, best_i, best_j
    with nogil:
        best = run = 0
        i = qe
        j = be
        best_i = qe
        best_j = be
        while i < nq and j < nb:
            if q[i] == b[j] and q[i] <= 3:
                run += match
            else:
                run += mismatch
            i += 1
            j += 1
            if run > best:
                best = run
                best_i = i
                best_j = j
            elif best - run > dropoff:
                break
        qe = best_i
        be = best_j
        best = run = 0
        i = qs
        j = bs
        best_i = qs
        best_j = bs
        while i > 0 and j > 0:
            i -= 1
            j -= 1
            if q[i] == b[j] and q[i] <= 3:
                run += match
            else:
                run += mismatch
            if run > best:
                best = run
                best_i = i
                best_j = j
            elif best - run > dropoff:
                break
        qs = best_i
        bs = best_j
    return qs, qe, bs, be


def sw_local(const uint8_t[::1] a, const uint8_t[::1] b,
             int64_t match, int64_t mismatch, int64_t gap, Py_ssize_t radius):
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef Py_ssize_t r = radius
    cdef Py_ssize_t width = 2 * r + 1
    # every H cell is written before it is read (the up/left guards keep
    # reads inside the filled band); of P only the row-0 and column-0
    # boundary cells need explicit stop markers for the traceback
    h_buf, p_buf, ops_buf = _scratch((na + 1) * width, na + nb)
    H_arr = h_buf[: (na + 1) * width].reshape(na + 1, width)
    P_arr = p_buf[: (na + 1) * width].reshape(na + 1, width)
    cdef int32_t[:, ::1] H = H_arr
    cdef uint8_t[:, ::1] P = P_arr
    cdef int32_t best = 0, h, diag, up, left, sub
    cdef Py_ssize_t bi = 0, bj = 0, i, j, c, jlo, jhi
    cdef uint8_t ai, p
    with nogil:
        for c in range(width):
            P[0, c] = 0
        jhi = r if r < na else na
        for i in range(1, jhi + 1):
            P[i, r - i] = 0
        for i in range(1, na + 1):
            jlo = i - r
            if jlo < 1:
                jlo = 1
            jhi = i + r
            if jhi > nb:
                jhi = nb
            ai = a[i - 1]
            for j in range(jlo, jhi + 1):
                c = j - (i - r)
                if ai == b[j - 1] and ai <= 3:
                    sub = match
                else:
                    sub = mismatch
                if i > 1 and j > 1:
                    diag = H[i - 1, c] + sub
                else:
                    diag = sub
                if diag > 0:
                    h = diag
                    p = 1
                else:
                    h = 0
                    p = 0
                if j <= i - 1 + r:
                    if i > 1:
                        up = H[i - 1, c + 1] + gap
                    else:
                        up = gap
                    if up > h:
                        h = up
                        p = 2
                if j - 1 >= i - r:
                    if j > 1:
                        left = H[i, c - 1] + gap
                    else:
                        left = gap
                    if left > h:
                        h = left
                        p = 3
                H[i, c] = h
                P[i, c] = p
                if h > best:
                    best = h
                    bi = i
                    bj = j

    cdef uint8_t[::1] ops = ops_buf
    cdef Py_ssize_t pos = na + nb
    cdef Py_ssize_t ti = bi, tj = bj
    if best > 0:
        with nogil:
            while True:
                p = P[ti, tj - (ti - r)]
                if p == 0:
                    break
                pos -= 1
                if p == 1:
                    ops[pos] = 0
                    ti -= 1
                    tj -= 1
                elif p == 2:
                    ops[pos] = 1
                    ti -= 1
                else:
                    ops[pos] = 2
                    tj -= 1
    return int(best), ti, bi, tj, bj, ops_buf[pos : na + nb].copy()


cdef int64_t _global_fill_trace(const uint8_t[::1] a, Py_ssize_t a0, Py_ssize_t na,
                                const uint8_t[::1] b, Py_ssize_t b0, Py_ssize_t nb,
                                int64_t match, int64_t mismatch, int64_t gap,
                                Py_ssize_t r, int32_t[::1] H, uint8_t[::1] P,
                                uint8_t[::1] ops, Py_ssize_t cap,
                                Py_ssize_t* pos_out) noexcept nogil:
    """End-pinned banded fill of a[a0:a0+na] vs b[b0:b0+nb] using flat
    band buffers; writes the traceback into ops[...:cap] back to front,
    stores the first op index in pos_out and returns the score."""
    cdef Py_ssize_t width = 2 * r + 1
    cdef int32_t h, up, left, sub
    cdef int64_t score
    cdef Py_ssize_t i, j, c, jlo, jhi, jmax0, pos, ti, tj
    cdef uint8_t ai, p
    jmax0 = nb if nb < r else r
    for j in range(0, jmax0 + 1):
        H[j + r] = j * gap
        P[j + r] = 3 if j > 0 else 0
    for i in range(1, na + 1):
        jlo = i - r
        if jlo < 0:
            jlo = 0
        jhi = i + r
        if jhi > nb:
            jhi = nb
        ai = a[a0 + i - 1]
        for j in range(jlo, jhi + 1):
            c = j - (i - r)
            if j == 0:
                H[i * width + c] = i * gap
                P[i * width + c] = 2
                continue
            if ai == b[b0 + j - 1] and ai <= 3:
                sub = match
            else:
                sub = mismatch
            h = H[(i - 1) * width + c] + sub
            p = 1
            if j <= i - 1 + r:
                up = H[(i - 1) * width + c + 1] + gap
                if up > h:
                    h = up
                    p = 2
            if j - 1 >= i - r:
                left = H[i * width + c - 1] + gap
                if left > h:
                    h = left
                    p = 3
            H[i * width + c] = h
            P[i * width + c] = p
    score = H[na * width + nb - (na - r)]
    pos = cap
    ti = na
    tj = nb
    while ti > 0 or tj > 0:
        p = P[ti * width + tj - (ti - r)]
        pos -= 1
        if p == 1:
            ops[pos] = 0
            ti -= 1
            tj -= 1
        elif p == 2:
            ops[pos] = 1
            ti -= 1
        else:
            ops[pos] = 2
            tj -= 1
    pos_out[0] = pos
    return score


def sw_global(const uint8_t[::1] a, const uint8_t[::1] b,
              int64_t match, int64_t mismatch, int64_t gap, Py_ssize_t radius):
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef Py_ssize_t r = radius
    cdef Py_ssize_t width = 2 * r + 1
    # every read cell (H and P alike) is written first: the fill covers
    # the band and the pinned traceback stays inside it
    h_buf, p_buf, ops_buf = _scratch((na + 1) * width, na + nb)
    cdef int32_t[::1] H = h_buf
    cdef uint8_t[::1] P = p_buf
    cdef uint8_t[::1] ops = ops_buf
    cdef int64_t score
    cdef Py_ssize_t pos = 0
    with nogil:
        score = _global_fill_trace(
            a, 0, na, b, 0, nb, match, mismatch, gap, r, H, P, ops,
            na + nb, &pos,
        )
    return int(score), ops_buf[pos : na + nb].copy()


def sw_global_segmented(const uint8_t[::1] a, const uint8_t[::1] b,
                        int64_t match, int64_t mismatch, int64_t gap,
                        Py_ssize_t radius, Py_ssize_t seg):
    """Cut both inputs at the same seg-length boundaries, align each
    pair end-pinned, concatenate tracebacks and sum scores.  Equivalent
    to looping sw_global over the pieces, in one kernel call."""
    cdef Py_ssize_t na = a.shape[0]
    cdef Py_ssize_t nb = b.shape[0]
    cdef Py_ssize_t longest = na if na > nb else nb
    cdef Py_ssize_t nseg = (longest + seg - 1) // seg
    # worst-case band over the segments
    cdef Py_ssize_t r_max = radius, r, diff, cells_max = 0, cells
    cdef Py_ssize_t k, a0, a1, b0, b1, sa, sb
    for k in range(nseg):
        a0 = k * seg
        a1 = a0 + seg if a0 + seg < na else na
        if a0 > na:
            a0 = na
            a1 = na
        b0 = k * seg
        b1 = b0 + seg if b0 + seg < nb else nb
        if b0 > nb:
            b0 = nb
            b1 = nb
        sa = a1 - a0
        sb = b1 - b0
        if sa == 0 or sb == 0:
            continue
        diff = sa - sb if sa > sb else sb - sa
        r = radius if radius > diff else diff
        if r > r_max:
            r_max = r
        cells = (sa + 1) * (2 * r + 1)
        if cells > cells_max:
            cells_max = cells
    h_buf, p_buf, ops_buf = _scratch(cells_max if cells_max else 1, 2 * seg + 2)
    out_arr = np.empty(na + nb, dtype=np.uint8)
    cdef int32_t[::1] H = h_buf
    cdef uint8_t[::1] P = p_buf
    cdef uint8_t[::1] seg_ops = ops_buf
    cdef uint8_t[::1] out = out_arr
    cdef Py_ssize_t out_pos = 0, pos, i
    cdef Py_ssize_t cap = seg_ops.shape[0]
    cdef int64_t total = 0
    with nogil:
        for k in range(nseg):
            a0 = k * seg
            a1 = a0 + seg if a0 + seg < na else na
            if a0 > na:
                a0 = na
                a1 = na
            b0 = k * seg
            b1 = b0 + seg if b0 + seg < nb else nb
            if b0 > nb:
                b0 = nb
                b1 = nb
            sa = a1 - a0
            sb = b1 - b0
            if sa == 0 and sb == 0:
                continue
            if sa == 0:
                total += sb * gap
                for i in range(sb):
                    out[out_pos] = 2
                    out_pos += 1
                continue
            if sb == 0:
                total += sa * gap
                for i in range(sa):
                    out[out_pos] = 1
                    out_pos += 1
                continue
            diff = sa - sb if sa > sb else sb - sa
            r = radius if radius > diff else diff
            total += _global_fill_trace(
                a, a0, sa, b, b0, sb, match, mismatch, gap, r, H, P,
                seg_ops, cap, &pos,
            )
            for i in range(pos, cap):
                out[out_pos] = seg_ops[i]
                out_pos += 1
    return int(total), out_arr[:out_pos]
