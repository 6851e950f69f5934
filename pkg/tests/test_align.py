import pytest

from genoogle import HSP, SearchParams, align_hsp, banded_smith_waterman, segmented_align
from genoogle.errors import ParameterError

from conftest import mutate, random_dna
from oracles import degap, full_smith_waterman, score_from_texts


def params(**kw):
    base = dict(match_score=1, mismatch_score=-3, gap_score=-5, band_radius=400)
    base.update(kw)
    return SearchParams(**base)


class TestBandedSmithWaterman:
    def test_identity(self):
        res = banded_smith_waterman("ACGT", "ACGT", params())
        assert res.score == 4
        assert res.aligned_a == "ACGT"
        assert res.aligned_b == "ACGT"
        assert res.midline == "||||"
        assert (res.a_start, res.a_end, res.b_start, res.b_end) == (0, 4, 0, 4)

    def test_local_optimum_drops_prefix(self):
        res = banded_smith_waterman("ACGT", "AGGT", params())
        assert res.score == 2
        assert res.aligned_a == "GT"
        assert res.aligned_b == "GT"
        assert (res.a_start, res.a_end) == (2, 4)
        assert (res.b_start, res.b_end) == (2, 4)

    def test_empty_input(self):
        with pytest.raises(ParameterError):
            banded_smith_waterman("", "ACGT", params())

    def test_matches_full_matrix_oracle(self, rng):
        for _ in range(200):
            a = random_dna(rng, rng.randrange(5, 120))
            b = random_dna(rng, rng.randrange(5, 120))
            if rng.random() < 0.5:
                b = mutate(rng, a, 0.15)
            p = params(band_radius=max(len(a), len(b)))
            res = banded_smith_waterman(a, b, p)
            score, a0, a1, b0, b1, _ = full_smith_waterman(a, b, 1, -3, -5)
            assert res.score == score
            assert degap(res.aligned_a) == a[a0:a1]
            assert degap(res.aligned_b) == b[b0:b1]

    def test_band_soundness(self, rng):
        # where the unbanded optimum stays within the band, scores agree
        radius = 8
        checked = 0
        while checked < 50:
            a = random_dna(rng, rng.randrange(20, 100))
            b = mutate(rng, a, 0.1)
            score, a0, a1, b0, b1, ops = full_smith_waterman(a, b, 1, -3, -5)
            i, j, on_path = a0, b0, [(a0, b0)]
            for op in ops:
                i += op != 2
                j += op != 1
                on_path.append((i, j))
            if max(abs(i - j) for i, j in on_path) > radius:
                continue
            res = banded_smith_waterman(a, b, params(band_radius=radius))
            assert res.score == score
            checked += 1

    def test_band_monotonicity(self, rng):
        a = random_dna(rng, 80)
        b = mutate(rng, a, 0.2)
        full = banded_smith_waterman(a, b, params(band_radius=80)).score
        prev = None
        for radius in (1, 2, 4, 8, 16, 40, 80, 200):
            score = banded_smith_waterman(a, b, params(band_radius=radius)).score
            if prev is not None:
                assert score >= prev
            prev = score
        assert prev == full

    def test_score_text_consistency(self, rng):
        for _ in range(50):
            a = random_dna(rng, rng.randrange(5, 90))
            b = mutate(rng, a, 0.3)
            res = banded_smith_waterman(a, b, params(band_radius=90))
            assert score_from_texts(res.aligned_a, res.aligned_b, 1, -3, -5) == res.score


class TestSegmentedAlign:
    def test_identical_long_sequences(self, rng):
        seq = random_dna(rng, 3000)
        res = segmented_align(seq, seq, params(segment_length=1000))
        assert res.score == 3000
        assert res.aligned_a == seq
        assert res.aligned_b == seq

    def test_short_inputs_delegate(self, rng):
        a = random_dna(rng, 100)
        b = mutate(rng, a, 0.1)
        p = params(segment_length=2000)
        assert segmented_align(a, b, p) == banded_smith_waterman(a, b, p)

    def test_concatenation_covers_inputs(self, rng):
        a = random_dna(rng, 450)
        b = mutate(rng, a, 0.05)
        res = segmented_align(a, b, params(segment_length=100, band_radius=16))
        assert degap(res.aligned_a) == a
        assert degap(res.aligned_b) == b
        assert score_from_texts(res.aligned_a, res.aligned_b, 1, -3, -5) == res.score

    def test_unequal_lengths(self, rng):
        a = random_dna(rng, 300)
        b = a + random_dna(rng, 40)
        res = segmented_align(a, b, params(segment_length=100, band_radius=16))
        assert degap(res.aligned_a) == a
        assert degap(res.aligned_b) == b

    @pytest.mark.parametrize("segment_length", [1, 2, 3, 7, 30, 60, 119, 120, 121])
    def test_segmentation_consistency_identity(self, rng, segment_length):
        seq = random_dna(rng, 120)
        p = params(segment_length=segment_length, band_radius=120)
        assert segmented_align(seq, seq, p).score == 120


class TestAlignHsp:
    def test_identical_slices(self, rng):
        bank = random_dna(rng, 500)
        query = bank[100:300]
        hsp = HSP(0, 0, 200, 100, 300)
        res = align_hsp(query, bank, hsp, params())
        assert res.score == 200
        assert (res.a_start, res.a_end) == (0, 200)
        assert (res.b_start, res.b_end) == (100, 300)

    def test_single_substitution(self, rng):
        bank = random_dna(rng, 400)
        q = list(bank[50:150])
        q[40] = {"A": "C", "C": "G", "G": "T", "T": "A"}[q[40]]
        query = "".join(q)
        hsp = HSP(0, 0, 100, 50, 150)
        res = align_hsp(query, bank, hsp, params())
        score, *_ = full_smith_waterman(query, bank[50:150], 1, -3, -5)
        assert res.score == score

    def test_absolute_coordinates(self, rng):
        bank = random_dna(rng, 300)
        query = "TTTT" + bank[100:200]
        hsp = HSP(0, 4, 104, 100, 200)
        res = align_hsp(query, bank, hsp, params())
        assert (res.a_start, res.a_end) == (4, 104)
        assert (res.b_start, res.b_end) == (100, 200)

    def test_interval_out_of_range(self, rng):
        bank = random_dna(rng, 100)
        with pytest.raises(ParameterError):
            align_hsp("ACGTACGT", bank, HSP(0, 0, 20, 0, 50), params())
