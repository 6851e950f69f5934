import pytest
from hypothesis import given, settings, strategies as st

import genoogle.databank as databank
from genoogle import (
    SpacedSeedMask,
    bank_windows,
    estimate_index_memory,
    estimated_entry_count,
    format_bank,
    get_sequence,
    load_bank,
    parse_mask,
)
from genoogle.databank import bytes_to_mib
from genoogle.errors import (
    BankFormatError,
    CapacityError,
    CorruptionError,
    IngestError,
    NotFoundError,
    ParameterError,
)

from conftest import random_dna, write_fasta

MASK18 = "111010010100110111"


def fmt(tmp_path, records, mask=MASK18, name="bank"):
    fa = write_fasta(tmp_path / "in.fa", records)
    path = tmp_path / f"{name}.gndb"
    meta = format_bank(fa, name, parse_mask(mask), path)
    return meta, path


class TestFormatBank:
    def test_counts(self, tmp_path, rng):
        meta, _ = fmt(
            tmp_path,
            [("a", "", random_dna(rng, 100)), ("b", "desc here", random_dna(rng, 50))],
        )
        assert meta.sequence_count == 2
        assert meta.total_bases == 150

    def test_empty_fasta(self, tmp_path):
        fa = tmp_path / "empty.fa"
        fa.write_text("")
        with pytest.raises(IngestError):
            format_bank(fa, "bank", parse_mask(MASK18), tmp_path / "bank.gndb")

    def test_record_without_sequence(self, tmp_path):
        fa = tmp_path / "bad.fa"
        fa.write_text(">only_header\n>second\nACGT\n")
        with pytest.raises(IngestError):
            format_bank(fa, "bank", parse_mask(MASK18), tmp_path / "bank.gndb")

    def test_ambiguous_run_accepted_and_flagged(self, tmp_path, rng):
        left = random_dna(rng, 18)
        right = random_dna(rng, 18)
        seq = left + "NNN" + right + random_dna(rng, 15)
        meta, path = fmt(tmp_path, [("a", "", seq)])
        assert meta.sequence_count == 1
        with load_bank(path) as bank:
            windows = list(bank_windows(bank, 0))
        assert [w.position for w in windows] == [0, 18, 36]
        assert [w.indexable for w in windows] == [True, False, True]

    def test_sequence_length_capacity(self, tmp_path, rng, monkeypatch):
        monkeypatch.setattr(databank, "MAX_SEQUENCE_LENGTH", 10)
        with pytest.raises(CapacityError):
            fmt(tmp_path, [("a", "", random_dna(rng, 20))])

    def test_sequence_count_capacity(self, tmp_path, rng, monkeypatch):
        monkeypatch.setattr(databank, "MAX_SEQUENCE_COUNT", 1)
        with pytest.raises(CapacityError):
            fmt(tmp_path, [("a", "", "ACGT"), ("b", "", "ACGT")])


class TestLoadBank:
    def test_metadata_roundtrip(self, tmp_path, rng):
        records = [
            ("alpha", "first sequence", random_dna(rng, 40)),
            ("beta", "", random_dna(rng, 75)),
        ]
        meta, path = fmt(tmp_path, records)
        with load_bank(path) as bank:
            loaded = bank.meta
            assert loaded.bank_name == meta.bank_name
            assert loaded.mask_pattern == meta.mask_pattern
            assert loaded.sequence_count == meta.sequence_count
            assert loaded.total_bases == meta.total_bases
            assert loaded.sequences == meta.sequences

    def test_flipped_magic(self, tmp_path, rng):
        _, path = fmt(tmp_path, [("a", "", random_dna(rng, 30))])
        data = bytearray(path.read_bytes())
        data[:4] = b"XXXX"
        path.write_bytes(bytes(data))
        with pytest.raises(BankFormatError):
            load_bank(path)

    def test_truncated_mid_table(self, tmp_path, rng):
        meta, path = fmt(tmp_path, [("a", "", random_dna(rng, 30))], name="bank")
        header_len = 4 + 2 + 2 + len(MASK18) + 4 + 8 + 2 + len("bank")
        data = path.read_bytes()
        path.write_bytes(data[: header_len + 5])
        with pytest.raises(CorruptionError):
            load_bank(path)


class TestGetSequence:
    def test_normalization(self, tmp_path):
        _, path = fmt(tmp_path, [("a", "", "acgtu" + "ACGT" * 5)])
        with load_bank(path) as bank:
            assert get_sequence(bank, 0).bases == "ACGTT" + "ACGT" * 5

    def test_out_of_range(self, tmp_path, rng):
        _, path = fmt(tmp_path, [("a", "", random_dna(rng, 30))])
        with load_bank(path) as bank:
            with pytest.raises(NotFoundError):
                get_sequence(bank, 1)

    def test_long_roundtrip(self, tmp_path, rng):
        seq = random_dna(rng, 1000)
        _, path = fmt(tmp_path, [("a", "", seq)])
        with load_bank(path) as bank:
            assert get_sequence(bank, 0).bases == seq

    def test_ambiguity_sentinel_preserved(self, tmp_path):
        seq = "ACGTNNRYACGTACGTACGT"
        _, path = fmt(tmp_path, [("a", "", seq)])
        with load_bank(path) as bank:
            # every ambiguity letter decodes to the sentinel N
            assert get_sequence(bank, 0).bases == "ACGTNNNNACGTACGTACGT"


class TestBankWindows:
    @pytest.mark.parametrize(
        "length,expected_positions",
        [(20, [0]), (17, []), (36, [0, 18])],
    )
    def test_window_tiling(self, tmp_path, rng, length, expected_positions):
        _, path = fmt(tmp_path, [("a", "", random_dna(rng, length))])
        with load_bank(path) as bank:
            assert [w.position for w in bank_windows(bank, 0)] == expected_positions

    def test_window_content(self, tmp_path, rng):
        seq = random_dna(rng, 40)
        _, path = fmt(tmp_path, [("a", "", seq)])
        with load_bank(path) as bank:
            windows = list(bank_windows(bank, 0))
        assert windows[0].bases == seq[:18]
        assert windows[1].bases == seq[18:36]


class TestEstimateIndexMemory:
    def test_mask18_reference_figures(self):
        total = estimate_index_memory(4 * 10**9, 18, 11)
        entries = estimated_entry_count(4 * 10**9, 18)
        assert abs(entries - 222e6) / 222e6 <= 0.01
        assert abs(bytes_to_mib(total) - 1759) / 1759 <= 0.01

    def test_mask11_reference_figures(self):
        total = estimate_index_memory(4 * 10**9, 11, 11)
        entries = estimated_entry_count(4 * 10**9, 11)
        assert abs(entries - 363e6) / 363e6 <= 0.01
        assert abs(bytes_to_mib(total) - 2833) / 2833 <= 0.01

    def test_empty_bank(self):
        assert estimate_index_memory(0, 18, 11) == 4**11 * 16

    def test_domain_errors(self):
        with pytest.raises(ParameterError):
            estimate_index_memory(-1, 18, 11)
        with pytest.raises(ParameterError):
            estimate_index_memory(100, 18, 0)
        with pytest.raises(ParameterError):
            estimate_index_memory(100, 18, 17)
        with pytest.raises(ParameterError):
            estimate_index_memory(100, 5, 11)

    @given(
        st.integers(min_value=0, max_value=10**12),
        st.integers(min_value=0, max_value=10**10),
        st.integers(min_value=1, max_value=16),
    )
    def test_monotone_in_bases_and_weight(self, l, delta, s):
        m = 18 if s <= 11 else s
        assert estimate_index_memory(l + delta, m, s) >= estimate_index_memory(l, m, s)
        if s < 16:
            assert estimate_index_memory(l, m + 1, s + 1) >= estimate_index_memory(
                l, m + 1, s
            )


corpus = st.lists(
    st.text(alphabet="ACGTNacgtn", min_size=1, max_size=80), min_size=1, max_size=5
)


@settings(max_examples=25, deadline=None)
@given(corpus)
def test_format_load_get_identity(tmp_path_factory, seqs):
    tmp = tmp_path_factory.mktemp("bankprop")
    records = [(f"s{i}", "", s) for i, s in enumerate(seqs)]
    fa = write_fasta(tmp / "in.fa", records)
    meta = format_bank(fa, "b", parse_mask("111"), tmp / "b.gndb")
    assert meta.sequence_count == len(seqs)
    with load_bank(tmp / "b.gndb") as bank:
        for i, s in enumerate(seqs):
            expected = s.upper().replace("U", "T").replace("N", "N")
            expected = "".join(c if c in "ACGT" else "N" for c in expected)
            assert get_sequence(bank, i).bases == expected


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=200), st.integers(min_value=1, max_value=12))
def test_window_count_property(tmp_path_factory, length, m):
    tmp = tmp_path_factory.mktemp("winprop")
    seq = "ACGT" * ((length + 3) // 4)
    seq = seq[:length]
    fa = write_fasta(tmp / "in.fa", [("s", "", seq)])
    mask = "1" * min(m, 16) if m <= 16 else "1" + "0" * (m - 2) + "1"
    meta = format_bank(fa, "b", parse_mask(mask), tmp / "b.gndb")
    with load_bank(tmp / "b.gndb") as bank:
        windows = list(bank_windows(bank, 0))
    mlen = len(mask)
    assert len(windows) == length // mlen
    assert [w.position for w in windows] == list(range(0, mlen * (length // mlen), mlen))
