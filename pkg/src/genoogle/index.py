"""Bucket-per-subsequence inverted index.

Every masked window value addresses its bucket directly (bucket id ==
word value), so a lookup is one slice of a flat directory.  Entries are
(sequence id, window position) pairs of 4 bytes each, sorted by
(seq_id, position) inside a bucket.

Construction is sort-based: (value, seq, pos) triples are accumulated,
sorted, and grouped.  Runs larger than `run_size` spill to temporary
files and are k-way merged, so banks bigger than memory still build.

File layout (GNIX, little-endian):

    magic "GNIX" | version u16 | weight u8 | mask len u16 + ASCII
    | bank name len u16 + UTF-8
    | directory: 4^weight x (absolute entry offset u64, count u32),
      empty buckets store (0, 0)
    | entries: (seq_id u32, position u32) pairs in bucket order
"""

from __future__ import annotations

import heapq
import os
import struct
import tempfile

import numpy as np

from . import kernels
from .databank import Bank, _read_exact
from .encoding import EncodedWord, SpacedSeedMask
from .errors import (
    BankFormatError,
    CorruptionError,
    MaskFormatError,
    ParameterError,
    ProvenanceError,
)

INDEX_MAGIC = b"GNIX"
INDEX_VERSION = 1
DEFAULT_RUN_SIZE = 16 * 1024 * 1024  # triples held in memory before spilling

_DIR_DTYPE = np.dtype([("offset", "<u8"), ("count", "<u4")])
_ENTRY_DTYPE = np.dtype([("seq", "<u4"), ("pos", "<u4")])
_TRIPLE_DTYPE = np.dtype([("value", "<u4"), ("seq", "<u4"), ("pos", "<u4")])


class InvertedIndex:
    """In-memory index: CSR offsets over flat entry arrays."""

    def __init__(self, weight, mask_pattern, bank_name, offsets, entry_seq, entry_pos):
        self.weight = weight
        self.mask_pattern = mask_pattern
        self.bank_name = bank_name
        self.offsets = offsets  # uint64, length 4^weight + 1
        self.entry_seq = entry_seq  # uint32
        self.entry_pos = entry_pos  # uint32

    @property
    def bucket_count(self) -> int:
        return 4**self.weight

    @property
    def entry_count(self) -> int:
        return int(self.entry_seq.shape[0])

    def bucket(self, value: int) -> tuple[np.ndarray, np.ndarray]:
        lo = int(self.offsets[value])
        hi = int(self.offsets[value + 1])
        return self.entry_seq[lo:hi], self.entry_pos[lo:hi]


def memory_footprint(index: InvertedIndex) -> int:
    """Bytes by the estimate's convention: 8/entry plus 16/bucket."""
    return index.entry_count * 8 + index.bucket_count * 16


def _sorted_triples(values, seqs, positions):
    order = np.lexsort((positions, seqs, values))
    return values[order], seqs[order], positions[order]


def _csr_from_sorted(values, seqs, positions, weight):
    counts = np.bincount(values, minlength=4**weight).astype(np.uint64)
    offsets = np.zeros(4**weight + 1, dtype=np.uint64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, seqs.astype(np.uint32), positions.astype(np.uint32)


def _spill(values, seqs, positions, runs):
    v, s, p = _sorted_triples(values, seqs, positions)
    arr = np.empty(v.shape[0], dtype=_TRIPLE_DTYPE)
    arr["value"], arr["seq"], arr["pos"] = v, s, p
    fh = tempfile.TemporaryFile()
    fh.write(arr.tobytes())
    fh.flush()
    runs.append(fh)


def _run_reader(fh, chunk_triples=65536):
    fh.seek(0)
    while True:
        buf = fh.read(chunk_triples * _TRIPLE_DTYPE.itemsize)
        if not buf:
            return
        arr = np.frombuffer(buf, dtype=_TRIPLE_DTYPE)
        for t in arr:
            yield int(t["value"]), int(t["seq"]), int(t["pos"])


def build_index(bank: Bank, mask: SpacedSeedMask, run_size: int = DEFAULT_RUN_SIZE) -> InvertedIndex:
    """Index every indexable non-overlapping window of the bank."""
    if mask.pattern != bank.meta.mask_pattern:
        raise ProvenanceError(
            f"mask {mask.pattern!r} does not match bank mask {bank.meta.mask_pattern!r}"
        )
    m = mask.length
    mask_pos = mask.positions_array()

    runs: list = []
    buf_values, buf_seqs, buf_positions = [], [], []
    buffered = 0
    for seq_id in range(bank.sequence_count):
        codes = bank.get_codes(seq_id)
        values, valid = kernels.window_values(codes, mask_pos, m, m)
        keep = valid.astype(bool)
        n_kept = int(keep.sum())
        if n_kept == 0:
            continue
        starts = np.arange(0, values.shape[0], dtype=np.uint32) * np.uint32(m)
        buf_values.append(values[keep])
        buf_seqs.append(np.full(n_kept, seq_id, dtype=np.uint32))
        buf_positions.append(starts[keep])
        buffered += n_kept
        if buffered >= run_size:
            _spill(
                np.concatenate(buf_values),
                np.concatenate(buf_seqs),
                np.concatenate(buf_positions),
                runs,
            )
            buf_values, buf_seqs, buf_positions = [], [], []
            buffered = 0

    if buffered or not runs:
        values = np.concatenate(buf_values) if buf_values else np.empty(0, np.uint32)
        seqs = np.concatenate(buf_seqs) if buf_seqs else np.empty(0, np.uint32)
        positions = (
            np.concatenate(buf_positions) if buf_positions else np.empty(0, np.uint32)
        )
        if runs:
            _spill(values, seqs, positions, runs)
        else:
            v, s, p = _sorted_triples(values, seqs, positions)
            offsets, es, ep = _csr_from_sorted(v, s, p, mask.weight)
            return InvertedIndex(
                mask.weight, mask.pattern, bank.meta.bank_name, offsets, es, ep
            )

    # k-way merge of spilled runs
    total = sum(fh.seek(0, os.SEEK_END) // _TRIPLE_DTYPE.itemsize for fh in runs)
    values = np.empty(total, dtype=np.uint32)
    seqs = np.empty(total, dtype=np.uint32)
    positions = np.empty(total, dtype=np.uint32)
    for i, (v, s, p) in enumerate(heapq.merge(*(_run_reader(fh) for fh in runs))):
        values[i], seqs[i], positions[i] = v, s, p
    for fh in runs:
        fh.close()
    offsets, es, ep = _csr_from_sorted(values, seqs, positions, mask.weight)
    return InvertedIndex(mask.weight, mask.pattern, bank.meta.bank_name, offsets, es, ep)


def lookup(index: InvertedIndex, word: EncodedWord) -> list[tuple[int, int]]:
    """All (seq_id, position) occurrences of a masked word; O(1) addressing."""
    if word.length != index.weight:
        raise ParameterError(
            f"word length {word.length} does not match index weight {index.weight}"
        )
    seqs, positions = index.bucket(word.value)
    return [(int(s), int(p)) for s, p in zip(seqs, positions)]


def save_index(index: InvertedIndex, path) -> None:
    mask_b = index.mask_pattern.encode("ascii")
    name_b = index.bank_name.encode("utf-8")
    header = (
        INDEX_MAGIC
        + struct.pack("<H", INDEX_VERSION)
        + struct.pack("<B", index.weight)
        + struct.pack("<H", len(mask_b))
        + mask_b
        + struct.pack("<H", len(name_b))
        + name_b
    )
    entries_start = len(header) + index.bucket_count * _DIR_DTYPE.itemsize
    counts = (index.offsets[1:] - index.offsets[:-1]).astype(np.uint32)
    directory = np.zeros(index.bucket_count, dtype=_DIR_DTYPE)
    nonempty = counts > 0
    directory["offset"][nonempty] = entries_start + index.offsets[:-1][nonempty] * 8
    directory["count"] = counts
    entries = np.empty(index.entry_count, dtype=_ENTRY_DTYPE)
    entries["seq"] = index.entry_seq
    entries["pos"] = index.entry_pos
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(directory.tobytes())
        fh.write(entries.tobytes())


def load_index(path) -> InvertedIndex:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != INDEX_MAGIC:
            raise BankFormatError(f"{path}: not an index file (magic {magic!r})")
        (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
        if version != INDEX_VERSION:
            raise BankFormatError(f"{path}: unsupported index version {version}")
        (weight,) = struct.unpack("<B", _read_exact(fh, 1, "weight"))
        (mask_len,) = struct.unpack("<H", _read_exact(fh, 2, "mask length"))
        mask_pattern = _read_exact(fh, mask_len, "mask pattern").decode("ascii")
        try:
            mask = SpacedSeedMask(mask_pattern)
        except MaskFormatError as exc:
            raise CorruptionError(f"{path}: bad mask in header: {exc}") from exc
        if mask.weight != weight:
            raise CorruptionError(f"{path}: weight {weight} disagrees with mask")
        (name_len,) = struct.unpack("<H", _read_exact(fh, 2, "bank name length"))
        bank_name = _read_exact(fh, name_len, "bank name").decode("utf-8")
        buckets = 4**weight
        directory = np.frombuffer(
            _read_exact(fh, buckets * _DIR_DTYPE.itemsize, "bucket directory"),
            dtype=_DIR_DTYPE,
        )
        counts = directory["count"].astype(np.uint64)
        total = int(counts.sum())
        entries = np.frombuffer(
            _read_exact(fh, total * _ENTRY_DTYPE.itemsize, "entries"),
            dtype=_ENTRY_DTYPE,
        )
        offsets = np.zeros(buckets + 1, dtype=np.uint64)
        np.cumsum(counts, out=offsets[1:])
        entries_start = fh.tell() - total * _ENTRY_DTYPE.itemsize
        nonempty = counts > 0
        expected = entries_start + offsets[:-1][nonempty] * 8
        if not np.array_equal(directory["offset"][nonempty], expected):
            raise CorruptionError(f"{path}: bucket directory offsets are inconsistent")
    return InvertedIndex(
        weight,
        mask_pattern,
        bank_name,
        offsets,
        np.ascontiguousarray(entries["seq"]),
        np.ascontiguousarray(entries["pos"]),
    )
