import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonpair.analysis import (Histogram, correlate, correlate_stream,
                                 estimate_comb_spacing, n_bins_for)
from photonpair.errors import DataFormatError, InvalidConfigError
from photonpair.timetags import TimeTagStream

from oracles import correlate_all_pairs

TICK = 100.1e-12


def hist_of(s, i, bin_width=8.2e-9, window=1e-6, **kw):
    return correlate(np.asarray(s, dtype=np.int64), np.asarray(i, dtype=np.int64),
                     bin_width, window, tick_duration=TICK, **kw)


class TestCorrelate:
    def test_single_coincidence_lands_in_central_bin(self):
        h = hist_of([0], [0])
        assert h.counts.sum() == 1
        idx = int(np.nonzero(h.counts)[0][0])
        assert idx == int(np.floor((0 * TICK + 1e-6) / 8.2e-9))
        lo = -1e-6 + idx * 8.2e-9
        assert lo <= 0 < lo + 8.2e-9

    def test_sign_convention_idler_late_is_positive(self):
        h = hist_of([0], [5000])            # idler 500 ns after signal
        center = h.bin_centers()[np.argmax(h.counts)]
        assert center == pytest.approx(5000 * TICK, abs=8.2e-9)

    def test_brute_force_equivalence_random(self, rng):
        for _ in range(25):
            n_s, n_i = rng.integers(0, 600, 2)
            s = np.sort(rng.integers(0, 150_000, n_s))
            i = np.sort(rng.integers(0, 150_000, n_i))
            h = hist_of(s, i, bin_width=3.3e-9, window=0.4e-6)
            ref = correlate_all_pairs(s, i, TICK, 3.3e-9, 0.4e-6, len(h.counts))
            assert np.array_equal(h.counts, ref)

    @given(st.lists(st.integers(0, 40_000), max_size=160),
           st.lists(st.integers(0, 40_000), max_size=160))
    @settings(max_examples=60, deadline=None)
    def test_brute_force_equivalence_property(self, s, i):
        s = np.sort(np.array(s, dtype=np.int64))
        i = np.sort(np.array(i, dtype=np.int64))
        h = hist_of(s, i, bin_width=0.5e-6, window=2e-6)
        ref = correlate_all_pairs(s, i, TICK, 0.5e-6, 2e-6, len(h.counts))
        assert np.array_equal(h.counts, ref)

    def test_shift_invariance(self, rng):
        s = np.sort(rng.integers(0, 100_000, 300))
        i = np.sort(rng.integers(0, 100_000, 300))
        a = hist_of(s, i)
        b = hist_of(s + 777_777, i + 777_777)
        assert np.array_equal(a.counts, b.counts)

    def test_channel_swap_mirrors(self, rng):
        # bin edges at -1.005us + j*10ns never coincide with a tick value,
        # so the swap mirrors the histogram exactly
        s = np.sort(rng.integers(0, 50_000, 200))
        i = np.sort(rng.integers(0, 50_000, 200))
        a = correlate(s, i, 1e-8, 1.005e-6, tick_duration=TICK)
        b = correlate(i, s, 1e-8, 1.005e-6, tick_duration=TICK)
        assert np.array_equal(a.counts, b.counts[::-1])

    def test_threads_identical(self, rng):
        s = np.sort(rng.integers(0, 3_000_000, 40_000))
        i = np.sort(rng.integers(0, 3_000_000, 40_000))
        a = hist_of(s, i, threads=1)
        b = hist_of(s, i, threads=4)
        assert np.array_equal(a.counts, b.counts)

    def test_empty_streams(self):
        h = hist_of([], [])
        assert h.counts.sum() == 0
        assert h.total_pairs == 0

    def test_unsorted_rejected_with_index(self):
        with pytest.raises(InvalidConfigError, match="index 2"):
            hist_of([0, 10, 5], [0])
        with pytest.raises(InvalidConfigError, match="stream_i"):
            hist_of([0], [10, 3])

    def test_window_validation(self):
        with pytest.raises(InvalidConfigError):
            hist_of([0], [0], bin_width=0.0)
        with pytest.raises(InvalidConfigError):
            hist_of([0], [0], bin_width=1e-6, window=1e-7)

    def test_bin_count_convention(self):
        h = hist_of([0], [0], bin_width=8.2e-9, window=1e-6)
        assert len(h.counts) == n_bins_for(8.2e-9, 1e-6) == 243
        # a delay beyond the last full bin is dropped even inside the window
        d = int(round(0.999e-6 / TICK))
        h2 = hist_of([0], [d])
        last_edge = -1e-6 + 243 * 8.2e-9
        assert h2.counts.sum() == (1 if d * TICK < last_edge else 0)

    def test_stream_wrapper(self):
        st_obj = TimeTagStream(TICK, np.array([0, 100], dtype=np.int64),
                               np.array([50], dtype=np.int64))
        h = correlate_stream(st_obj, 8.2e-9, 1e-6)
        assert h.total_pairs == 2
        assert h.tick_duration == TICK


class TestHistogramIO:
    def test_csv_round_trip(self, tmp_path, rng):
        s = np.sort(rng.integers(0, 100_000, 500))
        i = np.sort(rng.integers(0, 100_000, 500))
        h = hist_of(s, i)
        path = tmp_path / "hist.csv"
        h.write_csv(path)
        again = Histogram.read_csv(path)
        assert np.array_equal(again.counts, h.counts)
        assert again.bin_width == h.bin_width
        assert again.window == h.window
        assert again.total_pairs == h.total_pairs
        assert again.tick_duration == pytest.approx(TICK)

    def test_malformed_rejected(self, tmp_path):
        path = tmp_path / "hist.csv"
        path.write_text("bin_center_seconds,counts\n0.0,3\n")
        with pytest.raises(DataFormatError):
            Histogram.read_csv(path)     # sidecar missing

    def test_counts_validated(self):
        with pytest.raises(InvalidConfigError):
            Histogram(bin_width=1e-9, window=1e-6,
                      counts=np.array([1, 2]), total_pairs=3)


class TestCombSpacingEstimate:
    def test_recovers_spacing_from_fine_histogram(self):
        bin_width, window = 0.5e-9, 0.5e-6
        nb = n_bins_for(bin_width, window)
        centers = -window + (np.arange(nb) + 0.5) * bin_width
        t_rt = 8.278e-9
        counts = np.full(nb, 2.0)
        for k in range(-59, 60):
            j = np.argmin(np.abs(centers - k * t_rt))
            counts[j] += 4000 * np.exp(-abs(k) / 40)
        h = Histogram(bin_width=bin_width, window=window,
                      counts=counts.astype(np.int64), total_pairs=int(counts.sum()))
        est = estimate_comb_spacing(h)
        assert est == pytest.approx(t_rt, rel=2e-3)

    def test_unresolvable_returns_none(self):
        counts = np.zeros(243, dtype=np.int64)
        h = Histogram(bin_width=8.2e-9, window=1e-6, counts=counts, total_pairs=0)
        assert estimate_comb_spacing(h) is None
