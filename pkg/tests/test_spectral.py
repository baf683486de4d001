import numpy as np
import pytest

from zbsim.dynamics import TimeSeries, default_time_grid, expectation_series
from zbsim.spectral import (
    ResolutionError,
    beat_envelope,
    extract_peaks,
    match_frequencies,
    periodogram,
)
from zbsim.spectrum import frequency_set
from zbsim.wavepacket import DEFAULT_MIX, single_mode

N = 4096
DT = 0.05
RES = 2.0 * np.pi / (N * DT)
T = np.arange(N) * DT


def tone_series(spec):
    """spec: iterable of (amplitude, omega, phase)."""
    x = np.zeros(N)
    for a, w, ph in spec:
        x = x + a * np.cos(w * T + ph)
    return TimeSeries(T, x, "synthetic")


class TestPeriodogram:
    def test_single_tone_lands_in_one_bin(self):
        w0 = 137.3 * RES
        spec = periodogram(tone_series([(1.0, w0, 0.4)]))
        k = int(np.argmax(spec.power))
        assert abs(spec.freqs[k] - w0) <= spec.resolution

    def test_resolution_definition(self):
        spec = periodogram(tone_series([(1.0, 100 * RES, 0.0)]))
        assert spec.resolution == pytest.approx(2.0 * np.pi / (N * DT), rel=1e-12)

    @pytest.mark.parametrize("window", ["rect", "hann"])
    def test_parseval(self, window):
        series = tone_series([(1.0, 100.25 * RES, 0.3), (0.4, 300.7 * RES, 1.1)])
        spec = periodogram(series, window)
        energy = float(np.sum(spec.windowed**2))
        assert spec.total_power() == pytest.approx(energy, rel=1e-8)

    def test_rect_parseval_against_raw_series(self):
        series = tone_series([(1.0, 100.25 * RES, 0.3)])
        spec = periodogram(series, "rect")
        detrended = series.values - np.mean(series.values)
        assert spec.total_power() == pytest.approx(float(np.sum(detrended**2)), rel=1e-8)

    def test_mean_removed(self):
        series = TimeSeries(T, np.full(N, 7.3), "flat")
        spec = periodogram(series)
        assert np.max(spec.power) <= 1e-20

    def test_short_series_rejected(self):
        with pytest.raises(ValueError):
            periodogram(TimeSeries(T[:32], np.zeros(32), "short"))

    def test_unknown_window_rejected(self):
        with pytest.raises(ValueError):
            periodogram(tone_series([(1.0, 100 * RES, 0.0)]), window="kaiser")


class TestExtractPeaks:
    def test_constant_series_has_no_peaks(self):
        spec = periodogram(TimeSeries(T, np.full(N, 2.5), "flat"))
        assert extract_peaks(spec).peaks == ()

    @pytest.mark.parametrize("offset", [0.0, 0.25, 0.5])
    def test_single_tone_refined_far_below_bin(self, offset):
        w0 = (100 + offset) * RES
        pk = extract_peaks(periodogram(tone_series([(1.0, w0, 0.3)])))
        assert len(pk.peaks) == 1
        assert abs(pk.peaks[0].omega - w0) <= RES / 1000.0
        assert pk.peaks[0].refined

    def test_rect_window_refinement_within_spec(self):
        w0 = 100.5 * RES
        pk = extract_peaks(periodogram(tone_series([(1.0, w0, 0.3)]), "rect"))
        assert abs(pk.peaks[0].omega - w0) <= RES / 100.0

    def test_round_trip_random_tones(self):
        # tones >= 5 bins apart recover to well below the resolution/10 contract
        rng = np.random.default_rng(42)
        for _ in range(8):
            while True:
                bins = np.sort(rng.uniform(20, N / 4, size=3))
                if np.all(np.diff(bins) >= 5):
                    break
            omegas = bins * RES
            amps = rng.uniform(0.3, 1.0, size=3)
            phases = rng.uniform(0, 2 * np.pi, size=3)
            pk = extract_peaks(periodogram(tone_series(zip(amps, omegas, phases))))
            found = np.sort(pk.omegas())
            assert found.size == 3
            assert np.max(np.abs(found - omegas)) <= RES / 1000.0

    def test_threshold_keeps_weak_tone(self):
        # 25:1 power ratio stays above the 1% cut; 10^-5 amplitude does not
        series = tone_series([(1.0, 100.3 * RES, 0.0), (0.2, 300.6 * RES, 0.7),
                              (1e-5, 700.2 * RES, 0.2)])
        pk = extract_peaks(periodogram(series), rel_threshold=0.01)
        assert len(pk.peaks) == 2

    def test_peaks_sorted_by_power(self):
        series = tone_series([(0.5, 100.3 * RES, 0.0), (1.0, 300.6 * RES, 0.7)])
        pk = extract_peaks(periodogram(series))
        assert pk.peaks[0].power >= pk.peaks[1].power
        assert pk.peaks[0].omega == pytest.approx(300.6 * RES, abs=RES)

    def test_max_peaks_cap(self):
        series = tone_series([(1.0, (60 + 40 * i) * RES, 0.1 * i) for i in range(6)])
        pk = extract_peaks(periodogram(series), max_peaks=3)
        assert len(pk.peaks) == 3


class TestMatchFrequencies:
    def two_tone_peaks(self):
        series = tone_series([(1.0, 100.3 * RES, 0.0), (0.5, 300.6 * RES, 0.7)])
        return extract_peaks(periodogram(series))

    def test_assignments_and_residuals(self):
        pk = self.two_tone_peaks()
        expected = {"low": 100.3 * RES, "high": 300.6 * RES}
        rep = match_frequencies(pk, expected, tol_rel=1e-3)
        assert rep.clean and rep.complete
        assert {a.label for a in rep.assignments} == {"low", "high"}
        for a in rep.assignments:
            assert a.residual_rel <= 1e-5
        strongest = max(rep.assignments, key=lambda a: a.power_fraction)
        assert strongest.label == "low" and strongest.power_fraction == 1.0

    def test_unexplained_peak_flagged(self):
        pk = self.two_tone_peaks()
        rep = match_frequencies(pk, {"low": 100.3 * RES}, tol_rel=1e-3)
        assert not rep.clean
        assert len(rep.unexplained) == 1
        assert rep.unexplained[0].omega == pytest.approx(300.6 * RES, abs=RES)

    def test_missing_tone_listed(self):
        pk = self.two_tone_peaks()
        expected = {"low": 100.3 * RES, "high": 300.6 * RES, "ghost": 500.0 * RES}
        rep = match_frequencies(pk, expected, tol_rel=1e-3)
        assert rep.missing == ("ghost",)
        assert rep.clean and not rep.complete

    def test_insufficient_resolution_is_loud(self):
        short = TimeSeries(T[:64], np.cos(2.0 * T[:64]), "short")
        pk = extract_peaks(periodogram(short))
        with pytest.raises(ResolutionError):
            match_frequencies(pk, {"tone": 2.0}, tol_rel=1e-3)

    def test_frequency_set_input(self, cfg):
        fs = frequency_set(0.5, cfg)
        wp = single_mode(0.5, DEFAULT_MIX, cfg)
        t = default_time_grid(fs)
        pk = extract_peaks(periodogram(expectation_series(wp, "S_y", t)))
        rep = match_frequencies(pk, fs, tol_rel=1e-3)
        assert rep.clean
        assert {a.label for a in rep.assignments} == {"omega_L", "omega_zb2"}
        # the longitudinal tones are absent from a spin series, by design
        assert set(rep.missing) == {"omega_zb1", "omega_zb3"}

    def test_report_serializes(self):
        rep = match_frequencies(self.two_tone_peaks(), {"low": 100.3 * RES, "high": 300.6 * RES})
        doc = rep.as_dict()
        assert doc["clean"] and doc["complete"]
        assert len(doc["assignments"]) == 2


class TestBeatEnvelope:
    def test_synthetic_difference_of_tones(self):
        series = tone_series([(1.0, 2.0, 0.3), (1.0, 1.2, 1.0)])
        carrier, envelope = beat_envelope(series)
        assert envelope == pytest.approx(0.8, rel=1e-2)

    def test_carrier_is_dominant_tone(self):
        series = tone_series([(1.0, 2.0, 0.3), (0.6, 1.2, 1.0)])
        carrier, envelope = beat_envelope(series)
        assert carrier == pytest.approx(2.0, rel=1e-3)
        assert envelope == pytest.approx(0.8, rel=1e-2)

    def test_single_tone_rejected(self):
        with pytest.raises(ValueError):
            beat_envelope(tone_series([(1.0, 2.0, 0.0)]))

    def test_three_tones_rejected(self):
        series = tone_series([(1.0, 1.0, 0.0), (1.0, 2.0, 0.2), (1.0, 3.1, 0.4)])
        with pytest.raises(ValueError):
            beat_envelope(series)


class TestDynamicsPipeline:
    def test_spin_channel_two_tones_above_ten_percent(self, cfg):
        fs = frequency_set(0.5, cfg)
        wp = single_mode(0.5, DEFAULT_MIX, cfg)
        t = default_time_grid(fs)
        spec = periodogram(expectation_series(wp, "S_y", t))
        pk = extract_peaks(spec, rel_threshold=0.10)
        assert len(pk.peaks) == 2

    def test_spin_beat_matches_closed_form(self, cfg):
        fs = frequency_set(0.5, cfg)
        wp = single_mode(0.5, DEFAULT_MIX, cfg)
        t = default_time_grid(fs)
        _, envelope = beat_envelope(expectation_series(wp, "S_y", t))
        assert envelope == pytest.approx(fs.omega_sb, rel=1e-2)

    def test_degenerate_run_single_free_peak(self):
        from zbsim.algebra import ParticleConfig

        cfg0 = ParticleConfig.natural(0.0)
        fs = frequency_set(0.5, cfg0)
        wp = single_mode(0.5, DEFAULT_MIX, cfg0)
        t = default_time_grid(fs)
        pk = extract_peaks(periodogram(expectation_series(wp, "S_y", t)))
        rep = match_frequencies(pk, fs, tol_rel=1e-3)
        assert len(pk.peaks) == 1
        assert rep.clean
        assert rep.assignments[0].expected_omega == pytest.approx(fs.omega_zb2, rel=1e-12)
