import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from genoogle import Engine, SpacedSeedMask, fragment_bank


def random_dna(rng: random.Random, n: int) -> str:
    return "".join(rng.choices("ACGT", k=n))


def random_dna_fast(rng: np.random.Generator, n: int) -> str:
    return np.frombuffer(b"ACGT", dtype=np.uint8)[
        rng.integers(0, 4, n, dtype=np.uint8)
    ].tobytes().decode()


def mutate(rng: random.Random, seq: str, rate: float) -> str:
    out = list(seq)
    for i, c in enumerate(out):
        if rng.random() < rate:
            out[i] = rng.choice([b for b in "ACGT" if b != c])
    return "".join(out)


def write_fasta(path, records) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        for name, desc, seq in records:
            header = f">{name} {desc}".rstrip()
            fh.write(f"{header}\n")
            for i in range(0, len(seq), 70):
                fh.write(seq[i : i + 70] + "\n")
    return path


def make_engine(tmp_path, sequences, mask_pattern, fragments=1, name="bank") -> Engine:
    """Format the given sequences into a fragmented bank and load it."""
    tmp_path = Path(tmp_path)
    tmp_path.mkdir(parents=True, exist_ok=True)
    records = [(f"seq{i}", f"sequence {i}", s) for i, s in enumerate(sequences)]
    fa = write_fasta(tmp_path / f"{name}.fa", records)
    out = tmp_path / f"{name}-banks"
    fs = fragment_bank(fa, fragments, SpacedSeedMask(mask_pattern), out, name)
    return Engine.open(fs.manifest_path)


@pytest.fixture
def rng():
    return random.Random(0x5EED)
