"""Minimal FASTA reader.

Accepts LF and CRLF line endings.  The record name is the header token
up to the first whitespace; the remainder is the description.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import IngestError


@dataclass
class FastaRecord:
    name: str
    description: str
    sequence: str


def _iter_lines(source):
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="ascii", errors="strict") as fh:
            yield from fh
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        yield from source
    else:
        raise TypeError(f"unsupported FASTA source: {type(source)!r}")


def read_fasta(source) -> Iterator[FastaRecord]:
    """Yield records from a path or text file object.

    Raises IngestError for sequence data before the first header and for
    headers with no sequence lines.
    """
    name = None
    description = ""
    chunks: list[str] = []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith(">"):
            if name is not None:
                if not chunks:
                    raise IngestError(f"record {name!r} has no sequence data")
                yield FastaRecord(name, description, "".join(chunks))
            header = line[1:].strip()
            parts = header.split(None, 1)
            name = parts[0] if parts else ""
            description = parts[1] if len(parts) > 1 else ""
            chunks = []
        else:
            if name is None:
                raise IngestError(f"sequence data before first header (line {lineno})")
            chunks.append(line.strip())
    if name is not None:
        if not chunks:
            raise IngestError(f"record {name!r} has no sequence data")
        yield FastaRecord(name, description, "".join(chunks))
