import numpy as np
import pytest

from genoogle import (
    EncodedWord,
    build_index,
    encode_word,
    estimate_index_memory,
    format_bank,
    load_bank,
    load_index,
    lookup,
    parse_mask,
    save_index,
)
from genoogle.databank import write_bank
from genoogle.errors import (
    BankFormatError,
    CorruptionError,
    ParameterError,
    ProvenanceError,
)
from genoogle.index import memory_footprint

from conftest import random_dna, write_fasta
from oracles import scan_bank_windows


def build(tmp_path, seqs, mask_pattern, name="bank", run_size=None):
    fa = write_fasta(tmp_path / f"{name}.fa", [(f"s{i}", "", s) for i, s in enumerate(seqs)])
    path = tmp_path / f"{name}.gndb"
    format_bank(fa, name, parse_mask(mask_pattern), path)
    bank = load_bank(path)
    kwargs = {} if run_size is None else {"run_size": run_size}
    return bank, build_index(bank, parse_mask(mask_pattern), **kwargs)


class TestBuildIndex:
    def test_single_sequence_two_windows(self, tmp_path):
        bank, idx = build(tmp_path, ["ACGTACGT"], "1111")
        assert lookup(idx, encode_word("ACGT")) == [(0, 0), (0, 4)]
        total = sum(
            len(lookup(idx, EncodedWord(v, 4))) for v in range(4**4)
        )
        assert total == 2

    def test_empty_bank(self, tmp_path):
        meta = write_bank([], "empty", parse_mask("1111"), tmp_path / "e.gndb")
        assert meta.sequence_count == 0
        bank = load_bank(tmp_path / "e.gndb")
        idx = build_index(bank, parse_mask("1111"))
        assert idx.entry_count == 0
        assert lookup(idx, encode_word("ACGT")) == []

    def test_shared_window_sorted_by_seq(self, tmp_path):
        bank, idx = build(tmp_path, ["TTTTACGT", "ACGTAAAA"], "1111")
        assert lookup(idx, encode_word("ACGT")) == [(0, 4), (1, 0)]

    def test_mask_mismatch(self, tmp_path):
        bank, _ = build(tmp_path, ["ACGTACGT"], "1111")
        with pytest.raises(ProvenanceError):
            build_index(bank, parse_mask("101"))

    def test_ambiguous_windows_not_indexed(self, tmp_path):
        bank, idx = build(tmp_path, ["ACGTNNNNACGT"], "1111")
        assert lookup(idx, encode_word("ACGT")) == [(0, 0), (0, 8)]
        assert idx.entry_count == 2

    def test_spill_path_equals_in_memory(self, tmp_path, rng):
        seqs = [random_dna(rng, 300) for _ in range(6)]
        _, idx_mem = build(tmp_path, seqs, "1011", name="m")
        _, idx_spill = build(tmp_path, seqs, "1011", name="s", run_size=16)
        assert np.array_equal(idx_mem.offsets, idx_spill.offsets)
        assert np.array_equal(idx_mem.entry_seq, idx_spill.entry_seq)
        assert np.array_equal(idx_mem.entry_pos, idx_spill.entry_pos)


class TestLookup:
    def test_absent_word(self, tmp_path):
        _, idx = build(tmp_path, ["AAAAAAAA"], "1111")
        assert lookup(idx, encode_word("CGCG")) == []

    def test_length_mismatch(self, tmp_path):
        _, idx = build(tmp_path, ["AAAAAAAA"], "1111")
        with pytest.raises(ParameterError):
            lookup(idx, encode_word("ACG"))

    def test_lookup_matches_scan_for_random_words(self, tmp_path, rng):
        seqs = [random_dna(rng, 500) for _ in range(8)]
        _, idx = build(tmp_path, seqs, "110101")
        expected = scan_bank_windows(seqs, "110101")
        for _ in range(100):
            value = rng.randrange(4**4)
            word = EncodedWord(value, 4)
            assert lookup(idx, word) == expected.get(value, [])


class TestPersistence:
    def test_roundtrip_identity(self, tmp_path, rng):
        seqs = [random_dna(rng, 200) for _ in range(5)]
        _, idx = build(tmp_path, seqs, "10011")
        save_index(idx, tmp_path / "i.gnix")
        loaded = load_index(tmp_path / "i.gnix")
        assert loaded.weight == idx.weight
        assert loaded.mask_pattern == idx.mask_pattern
        assert loaded.bank_name == idx.bank_name
        assert np.array_equal(loaded.offsets, idx.offsets)
        assert np.array_equal(loaded.entry_seq, idx.entry_seq)
        assert np.array_equal(loaded.entry_pos, idx.entry_pos)

    def test_truncated_file(self, tmp_path, rng):
        _, idx = build(tmp_path, [random_dna(rng, 200)], "1011")
        save_index(idx, tmp_path / "i.gnix")
        data = (tmp_path / "i.gnix").read_bytes()
        (tmp_path / "i.gnix").write_bytes(data[: len(data) - 7])
        with pytest.raises(CorruptionError):
            load_index(tmp_path / "i.gnix")

    def test_bad_magic(self, tmp_path, rng):
        _, idx = build(tmp_path, [random_dna(rng, 200)], "1011")
        save_index(idx, tmp_path / "i.gnix")
        data = bytearray((tmp_path / "i.gnix").read_bytes())
        data[:4] = b"NOPE"
        (tmp_path / "i.gnix").write_bytes(bytes(data))
        with pytest.raises(BankFormatError):
            load_index(tmp_path / "i.gnix")


class TestInvariants:
    def test_completeness_and_soundness(self, tmp_path, rng):
        pattern = "110101"
        seqs = [random_dna(rng, rng.randrange(50, 800)) for _ in range(20)]
        _, idx = build(tmp_path, seqs, pattern)
        expected = scan_bank_windows(seqs, pattern)
        # completeness + soundness: exhaustive equality over all buckets
        for value in range(4**4):
            assert lookup(idx, EncodedWord(value, 4)) == expected.get(value, [])
        # conservation
        assert idx.entry_count == sum(len(v) for v in expected.values())

    def test_memory_accounting(self, tmp_path, rng):
        # one sequence, length a multiple of m, no ambiguity: the estimate
        # is exact under its 8/entry + 16/bucket convention
        m = 6
        length = 50 * m
        bank, idx = build(tmp_path, [random_dna(rng, length)], "110101")
        assert idx.entry_count == length // m
        assert memory_footprint(idx) == estimate_index_memory(length, m, 4)
