"""Formatted on-disk sequence banks.

A bank file holds every ingested sequence bit-packed at 2 bits per base
plus a metadata table.  Metadata is loaded fully into memory; sequence
payloads are read from disk on demand with positioned reads, so a loaded
bank can be shared by any number of threads.

File layout (GNDB, all little-endian):

    magic "GNDB" | version u16 | mask len u16 + ASCII | sequence_count u32
    | total_bases u64 | bank name len u16 + UTF-8
    | metadata table (36-byte records, offsets into the string heap)
    | heap size u64 + heap bytes
    | payloads: packed 2-bit words (u32 each), trailing-base count u8,
      ambiguity bitmap (1 bit per base, MSB first)

Ambiguous bases are stored as A in the packed words; the bitmap restores
them as 'N' on decode.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from . import kernels
from .encoding import SpacedSeedMask, codes_to_text, text_to_codes
from .errors import (
    BankFormatError,
    CapacityError,
    CorruptionError,
    IngestError,
    MaskFormatError,
    NotFoundError,
    ParameterError,
)
from .fasta import read_fasta

BANK_MAGIC = b"GNDB"
BANK_VERSION = 1
MAX_SEQUENCE_COUNT = 2**32 - 1
MAX_SEQUENCE_LENGTH = 2**32 - 1

_TABLE_DTYPE = np.dtype(
    [
        ("name_off", "<u8"),
        ("name_len", "<u4"),
        ("desc_off", "<u8"),
        ("desc_len", "<u4"),
        ("length", "<u4"),
        ("payload_off", "<u8"),
    ]
)


@dataclass(frozen=True)
class SequenceInfo:
    """Metadata table row for one sequence."""

    seq_id: int
    name: str
    description: str
    length: int
    payload_offset: int


@dataclass(frozen=True)
class SequenceRecord:
    """A sequence fetched from the bank, bases decoded."""

    seq_id: int
    name: str
    description: str
    length: int
    payload_offset: int
    bases: str


@dataclass
class BankMeta:
    bank_name: str
    mask_pattern: str
    sequence_count: int
    total_bases: int
    sequences: list[SequenceInfo]


class Window(NamedTuple):
    position: int
    bases: str
    indexable: bool


def pack_codes(codes: np.ndarray) -> tuple[bytes, int, bytes]:
    """Pack a code array into (words, trailing count, ambiguity bitmap)."""
    n = codes.shape[0]
    ambig = codes > 3
    clean = np.where(ambig, 0, codes).astype(np.uint32)
    pad = (-n) % 16
    if pad:
        clean = np.concatenate([clean, np.zeros(pad, np.uint32)])
    lanes = clean.reshape(-1, 16)
    words = np.zeros(lanes.shape[0], dtype=np.uint32)
    for k in range(16):
        words = (words << np.uint32(2)) | lanes[:, k]
    return (
        words.astype("<u4").tobytes(),
        n % 16,
        np.packbits(ambig).tobytes(),
    )


def unpack_codes(word_bytes: bytes, length: int, bitmap_bytes: bytes) -> np.ndarray:
    """Inverse of :func:`pack_codes`."""
    if len(bitmap_bytes) < (length + 7) // 8:
        raise CorruptionError("ambiguity bitmap shorter than the sequence")
    return kernels.unpack_2bit(
        np.frombuffer(word_bytes, dtype="<u4"),
        length,
        np.frombuffer(bitmap_bytes, dtype=np.uint8),
    )


def _payload_size(length: int) -> int:
    return 4 * ((length + 15) // 16) + 1 + (length + 7) // 8


def write_bank(
    records: Iterable[tuple[str, str, np.ndarray]],
    bank_name: str,
    mask: SpacedSeedMask,
    path,
) -> BankMeta:
    """Write a bank from (name, description, codes) records.

    Unlike :func:`format_bank` this accepts an empty record list, which
    fragmented banks need when there are fewer sequences than fragments.
    """
    records = list(records)
    if len(records) > MAX_SEQUENCE_COUNT:
        raise CapacityError(f"{len(records)} sequences exceed the 32-bit limit")

    heap = bytearray()
    table = np.zeros(len(records), dtype=_TABLE_DTYPE)
    infos: list[SequenceInfo] = []
    total_bases = 0
    for i, (name, desc, codes) in enumerate(records):
        if codes.shape[0] > MAX_SEQUENCE_LENGTH:
            raise CapacityError(f"sequence {name!r} exceeds the 32-bit length limit")
        name_b = name.encode("utf-8")
        desc_b = desc.encode("utf-8")
        table[i]["name_off"] = len(heap)
        table[i]["name_len"] = len(name_b)
        heap.extend(name_b)
        table[i]["desc_off"] = len(heap)
        table[i]["desc_len"] = len(desc_b)
        heap.extend(desc_b)
        table[i]["length"] = codes.shape[0]
        total_bases += codes.shape[0]

    mask_b = mask.pattern.encode("ascii")
    name_b = bank_name.encode("utf-8")
    header = (
        BANK_MAGIC
        + struct.pack("<H", BANK_VERSION)
        + struct.pack("<H", len(mask_b))
        + mask_b
        + struct.pack("<I", len(records))
        + struct.pack("<Q", total_bases)
        + struct.pack("<H", len(name_b))
        + name_b
    )
    payload_base = len(header) + table.nbytes + 8 + len(heap)
    offset = payload_base
    for i, (_, _, codes) in enumerate(records):
        table[i]["payload_off"] = offset
        offset += _payload_size(codes.shape[0])

    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(table.tobytes())
        fh.write(struct.pack("<Q", len(heap)))
        fh.write(bytes(heap))
        for _, _, codes in records:
            words, trailing, bitmap = pack_codes(codes)
            fh.write(words)
            fh.write(struct.pack("<B", trailing))
            fh.write(bitmap)

    for i, (name, desc, codes) in enumerate(records):
        infos.append(
            SequenceInfo(
                seq_id=i,
                name=name,
                description=desc,
                length=int(table[i]["length"]),
                payload_offset=int(table[i]["payload_off"]),
            )
        )
    return BankMeta(bank_name, mask.pattern, len(records), total_bases, infos)


def format_bank(fasta_source, bank_name: str, mask: SpacedSeedMask, output_path) -> BankMeta:
    """Ingest FASTA into a formatted bank file at output_path."""
    records = []
    for rec in read_fasta(fasta_source):
        try:
            codes = text_to_codes(rec.sequence)
        except Exception as exc:
            raise IngestError(f"record {rec.name!r}: {exc}") from exc
        records.append((rec.name, rec.description, codes))
    if not records:
        raise IngestError("FASTA input holds no records")
    return write_bank(records, bank_name, mask, output_path)


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise CorruptionError(f"bank file truncated while reading {what}")
    return data


class Bank:
    """A loaded bank: resident metadata plus on-demand payload reads."""

    def __init__(self, path, meta: BankMeta):
        self.path = str(path)
        self.meta = meta
        self._fd = os.open(self.path, os.O_RDONLY)

    def close(self):
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    @property
    def sequence_count(self) -> int:
        return self.meta.sequence_count

    @property
    def mask(self) -> SpacedSeedMask:
        return SpacedSeedMask(self.meta.mask_pattern)

    def info(self, seq_id: int) -> SequenceInfo:
        if not 0 <= seq_id < self.meta.sequence_count:
            raise NotFoundError(f"sequence id {seq_id} not in bank (count {self.meta.sequence_count})")
        return self.meta.sequences[seq_id]

    def get_codes(self, seq_id: int) -> np.ndarray:
        """Code array for one sequence; thread-safe positioned read."""
        info = self.info(seq_id)
        size = _payload_size(info.length)
        buf = os.pread(self._fd, size, info.payload_offset)
        if len(buf) != size:
            raise CorruptionError(f"payload of sequence {seq_id} truncated")
        nw = 4 * ((info.length + 15) // 16)
        trailing = buf[nw]
        if trailing != info.length % 16:
            raise CorruptionError(f"payload of sequence {seq_id} has bad trailing count")
        return unpack_codes(buf[:nw], info.length, buf[nw + 1 :])


def load_bank(path) -> Bank:
    """Load bank metadata into memory; payloads stay on disk."""
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != BANK_MAGIC:
            raise BankFormatError(f"{path}: not a bank file (magic {magic!r})")
        (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
        if version != BANK_VERSION:
            raise BankFormatError(f"{path}: unsupported bank version {version}")
        (mask_len,) = struct.unpack("<H", _read_exact(fh, 2, "mask length"))
        mask_pattern = _read_exact(fh, mask_len, "mask pattern").decode("ascii")
        try:
            SpacedSeedMask(mask_pattern)
        except MaskFormatError as exc:
            raise CorruptionError(f"{path}: bad mask in header: {exc}") from exc
        (count,) = struct.unpack("<I", _read_exact(fh, 4, "sequence count"))
        (total_bases,) = struct.unpack("<Q", _read_exact(fh, 8, "total bases"))
        (name_len,) = struct.unpack("<H", _read_exact(fh, 2, "bank name length"))
        bank_name = _read_exact(fh, name_len, "bank name").decode("utf-8")
        table = np.frombuffer(
            _read_exact(fh, count * _TABLE_DTYPE.itemsize, "metadata table"),
            dtype=_TABLE_DTYPE,
        )
        (heap_len,) = struct.unpack("<Q", _read_exact(fh, 8, "heap size"))
        heap = _read_exact(fh, heap_len, "string heap")

        infos = []
        for i in range(count):
            row = table[i]
            n0, n1 = int(row["name_off"]), int(row["name_off"]) + int(row["name_len"])
            d0, d1 = int(row["desc_off"]), int(row["desc_off"]) + int(row["desc_len"])
            if n1 > heap_len or d1 > heap_len:
                raise CorruptionError(f"{path}: heap reference out of range in row {i}")
            infos.append(
                SequenceInfo(
                    seq_id=i,
                    name=heap[n0:n1].decode("utf-8"),
                    description=heap[d0:d1].decode("utf-8"),
                    length=int(row["length"]),
                    payload_offset=int(row["payload_off"]),
                )
            )
        if sum(info.length for info in infos) != total_bases:
            raise CorruptionError(f"{path}: total bases disagree with the table")
    meta = BankMeta(bank_name, mask_pattern, count, total_bases, infos)
    return Bank(path, meta)


def get_sequence(bank: Bank, seq_id: int) -> SequenceRecord:
    """Fetch one sequence with bases decoded (ambiguity restored as N)."""
    info = bank.info(seq_id)
    codes = bank.get_codes(seq_id)
    return SequenceRecord(
        seq_id=info.seq_id,
        name=info.name,
        description=info.description,
        length=info.length,
        payload_offset=info.payload_offset,
        bases=codes_to_text(codes),
    )


def bank_windows(bank: Bank, seq_id: int) -> Iterator[Window]:
    """Non-overlapping mask-length windows of one sequence.

    Windows start at 0, m, 2m, ...; a trailing fragment shorter than m
    is not yielded.  Windows containing an ambiguous base are yielded
    with indexable=False.
    """
    m = bank.mask.length
    codes = bank.get_codes(seq_id)
    for start in range(0, codes.shape[0] - m + 1, m):
        window = codes[start : start + m]
        yield Window(start, codes_to_text(window), bool((window <= 3).all()))


def estimate_index_memory(total_bases: int, window_length: int, weight: int) -> int:
    """Bytes needed for an index: 8 per entry plus 16 per bucket."""
    if total_bases < 0:
        raise ParameterError("total_bases must be >= 0")
    if not 1 <= weight <= 16:
        raise ParameterError("weight must be in 1..16")
    if window_length < weight:
        raise ParameterError("window length must be >= weight")
    return (total_bases // window_length) * 8 + (4**weight) * 16


def estimated_entry_count(total_bases: int, window_length: int) -> int:
    """Number of indexed subsequences for a bank of the given size."""
    if total_bases < 0 or window_length < 1:
        raise ParameterError("arguments must be nonnegative / positive")
    return total_bases // window_length


def bytes_to_mib(n: int) -> float:
    return n / 2.0**20
