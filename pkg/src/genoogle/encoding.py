"""Bit-level DNA codification, word packing and spaced-seed masks.

Each base maps to a fixed 2-bit code (A=0, C=1, G=2, T=3, first base in
the most significant bit pair), so a word of up to 16 bases packs into
one 32-bit value that doubles as its index bucket address.  Input is
case-insensitive and RNA 'U' normalizes to 'T'.  Other letters (N and
the IUPAC wildcards) are ambiguous: windows containing them are never
indexed or looked up, and extension/alignment scores them as guaranteed
mismatches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CorruptWordError,
    InvalidSymbolError,
    MaskFormatError,
    WindowSizeError,
    WordLengthError,
)

ALPHABET = "ACGT"
AMBIGUOUS_CODE = 4
AMBIGUOUS_BASE = "N"
MAX_WORD_LENGTH = 16

_BASE_CODE = {"A": 0, "C": 1, "G": 2, "T": 3, "U": 3}

# 256-entry tables for bulk str -> code translation. 0xFF marks symbols
# that are not bases at all; AMBIGUOUS_CODE marks IUPAC ambiguity letters.
_STRICT = np.full(256, 0xFF, dtype=np.uint8)
_PERMISSIVE = np.full(256, 0xFF, dtype=np.uint8)
for _c in "ABCDGHKMNRSTUVWY":
    _PERMISSIVE[ord(_c)] = AMBIGUOUS_CODE
    _PERMISSIVE[ord(_c.lower())] = AMBIGUOUS_CODE
for _c, _v in _BASE_CODE.items():
    _STRICT[ord(_c)] = _v
    _STRICT[ord(_c.lower())] = _v
    _PERMISSIVE[ord(_c)] = _v
    _PERMISSIVE[ord(_c.lower())] = _v

_CODE_BASE = np.frombuffer(b"ACGTN", dtype=np.uint8)


@dataclass(frozen=True)
class EncodedWord:
    """A <=16-base subsequence packed 2 bits per base into one value."""

    value: int
    length: int


@dataclass(frozen=True)
class SpacedSeedMask:
    """Keep/drop pattern over a window: '1' keeps the base, '0' drops it."""

    pattern: str

    def __post_init__(self):
        p = self.pattern
        if not p:
            raise MaskFormatError("mask pattern is empty")
        bad = set(p) - {"0", "1"}
        if bad:
            raise MaskFormatError(f"mask pattern has invalid characters: {sorted(bad)}")
        if p[0] != "1" or p[-1] != "1":
            raise MaskFormatError("mask pattern must start and end with '1'")
        w = p.count("1")
        if not 1 <= w <= MAX_WORD_LENGTH:
            raise MaskFormatError(f"mask weight {w} outside 1..{MAX_WORD_LENGTH}")

    @property
    def length(self) -> int:
        """Window length m."""
        return len(self.pattern)

    @property
    def weight(self) -> int:
        """Number of kept positions s."""
        return self.pattern.count("1")

    @property
    def positions(self) -> tuple[int, ...]:
        """Offsets of the kept positions within the window."""
        return tuple(i for i, c in enumerate(self.pattern) if c == "1")

    def positions_array(self) -> np.ndarray:
        return np.array(self.positions, dtype=np.int32)


def encode_base(base: str) -> int:
    """Map one base to its 2-bit code (A=0, C=1, G=2, T=3; U -> T)."""
    code = _BASE_CODE.get(base.upper())
    if code is None:
        raise InvalidSymbolError(base, 0)
    return code


def encode_word(bases: str) -> EncodedWord:
    """Pack a 1..16 base string, first base in the most significant pair."""
    n = len(bases)
    if not 1 <= n <= MAX_WORD_LENGTH:
        raise WordLengthError(f"word length {n} outside 1..{MAX_WORD_LENGTH}")
    value = 0
    for i, b in enumerate(bases):
        code = _BASE_CODE.get(b.upper())
        if code is None:
            raise InvalidSymbolError(b, i)
        value = (value << 2) | code
    return EncodedWord(value, n)


def decode_word(word: EncodedWord) -> str:
    """Exact inverse of :func:`encode_word`."""
    n = word.length
    if not 1 <= n <= MAX_WORD_LENGTH:
        raise WordLengthError(f"word length {n} outside 1..{MAX_WORD_LENGTH}")
    if not 0 <= word.value < 4**n:
        raise CorruptWordError(f"value {word.value} does not fit {n} bases")
    out = []
    for shift in range(2 * (n - 1), -1, -2):
        out.append(ALPHABET[(word.value >> shift) & 3])
    return "".join(out)


def parse_mask(pattern: str) -> SpacedSeedMask:
    """Validate and build a spaced-seed mask from a 0/1 pattern string."""
    return SpacedSeedMask(pattern)


def apply_mask(window: str, mask: SpacedSeedMask) -> EncodedWord:
    """Keep the mask's 1-positions of a length-m window and pack them."""
    if len(window) != mask.length:
        raise WindowSizeError(
            f"window length {len(window)} != mask length {mask.length}"
        )
    return encode_word("".join(window[i] for i in mask.positions))


def text_to_codes(text: str, strict: bool = False) -> np.ndarray:
    """Translate a base string to a uint8 code array.

    Ambiguity letters become AMBIGUOUS_CODE (strict=False) or raise.
    Characters that are not IUPAC letters always raise.
    """
    try:
        raw = np.frombuffer(text.encode("ascii"), dtype=np.uint8)
    except UnicodeEncodeError as exc:
        raise InvalidSymbolError(text[exc.start], exc.start) from None
    table = _STRICT if strict else _PERMISSIVE
    codes = table[raw]
    bad = np.nonzero(codes == 0xFF)[0]
    if bad.size:
        pos = int(bad[0])
        raise InvalidSymbolError(text[pos], pos)
    return codes


def codes_to_text(codes: np.ndarray) -> str:
    """Inverse of :func:`text_to_codes`; ambiguous codes render as 'N'."""
    return _CODE_BASE[codes].tobytes().decode("ascii")
