import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from photonpair.correlation import (CorrelationCurve, PairCorrelationModel,
                                    default_mode_cutoff, g2_cross, g2_curve,
                                    g2_values, model_from_cavity)
from photonpair.errors import InvalidConfigError

from oracles import g2_double_sum


def symmetric_model(gamma=667e3, fsr=120.8e6, tau0=7.5e-12, M=25):
    return PairCorrelationModel(gamma_s=gamma, gamma_i=gamma, fsr_s=fsr,
                                fsr_i=fsr, tau0=tau0, mode_cutoff=M)


class TestDoubleSumOracle:
    def test_factorized_equals_direct(self, tiny_model, rng):
        taus = rng.uniform(-1e-6, 1e-6, 40)
        for tau in taus:
            ref = g2_double_sum(tiny_model, tau)
            val = g2_cross(tiny_model, tau)
            assert val == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("M", [0, 1, 3, 10])
    def test_small_cutoffs(self, M, rng):
        model = symmetric_model(M=M)
        for tau in rng.uniform(-0.5e-6, 0.5e-6, 10):
            assert g2_cross(model, tau) == pytest.approx(
                g2_double_sum(model, tau), rel=1e-10)

    def test_asymmetric_model(self, rng):
        model = PairCorrelationModel(gamma_s=600e3, gamma_i=750e3, fsr_s=120.8e6,
                                     fsr_i=121.3e6, tau0=5e-12, mode_cutoff=12)
        for tau in rng.uniform(-0.5e-6, 0.5e-6, 10):
            assert g2_cross(model, tau) == pytest.approx(
                g2_double_sum(model, tau), rel=1e-10)

    def test_kernel_path_matches_scalar(self, small_model, rng):
        taus = rng.uniform(-1e-6, 1e-6, 64)
        vec = g2_values(small_model, taus)
        peak = g2_cross(small_model, small_model.tau0 / 2)
        for tau, v in zip(taus, vec):
            assert v == pytest.approx(g2_cross(small_model, tau), abs=1e-9 * peak)


class TestCombStructure:
    def test_single_mode_is_pure_exponential(self):
        model = symmetric_model(M=0)
        x = np.array([10e-9, 50e-9, 200e-9])
        vals = g2_values(model, model.tau0 / 2 + x)
        expected = vals[0] * np.exp(-2 * np.pi * model.gamma_s * (x - x[0]))
        assert np.allclose(vals, expected, rtol=1e-9)

    def test_peaks_at_round_trip_multiples(self, small_model):
        t_rt = 1.0 / small_model.fsr_s
        centers = small_model.tau0 / 2 + np.arange(1, 30) * t_rt
        on = g2_values(small_model, centers)
        off = g2_values(small_model, centers + t_rt / 2)
        assert (on > 100 * off).all()

    def test_envelope_law_through_peak_maxima(self, small_model):
        # peak maxima sit at the cell centers; envelope decays at 2*pi*gamma
        t_rt = 1.0 / small_model.fsr_s
        ks = np.arange(0, 60, 3)
        vals = g2_values(small_model, small_model.tau0 / 2 + ks * t_rt)
        pred = vals[0] * np.exp(-2 * np.pi * small_model.gamma_s * ks * t_rt)
        assert np.abs(vals / pred - 1).max() < 0.01

    def test_branch_symmetry(self, small_model, rng):
        dts = rng.uniform(0, 0.8e-6, 30)
        a = g2_values(small_model, small_model.tau0 / 2 + dts)
        b = g2_values(small_model, small_model.tau0 / 2 - dts)
        assert np.allclose(a, b, rtol=1e-9)

    def test_branch_continuity_at_center(self, small_model):
        eps = 1e-20
        left = g2_cross(small_model, small_model.tau0 / 2 - eps)
        right = g2_cross(small_model, small_model.tau0 / 2)
        assert left == pytest.approx(right, rel=1e-9)

    def test_default_mode_cutoff(self):
        assert default_mode_cutoff(7.50519e-12, 120.8e6) == 1000
        assert default_mode_cutoff(0.0, 120.8e6) == 500
        assert default_mode_cutoff(1e-12, 120.8e6) % 500 == 0


class TestCurve:
    def test_grid_and_normalization(self, small_model):
        curve = g2_curve(small_model, -100e-9, 100e-9, 200.2e-12)
        assert curve.values.max() == 1.0
        assert (curve.values >= 0).all()
        steps = np.diff(curve.taus)
        assert np.allclose(steps, 200.2e-12, rtol=1e-9)

    def test_comb_spacing_on_grid(self, small_model):
        step = 200.2e-12
        curve = g2_curve(small_model, -500e-9, 500e-9, step)
        t_rt = 1.0 / small_model.fsr_s
        k_lo = int(np.ceil((curve.taus[0]) / t_rt)) + 1
        k_hi = int(np.floor((curve.taus[-1]) / t_rt)) - 1
        found = []
        for k in range(k_lo, k_hi + 1):
            c = small_model.tau0 / 2 + k * t_rt
            sel = np.abs(curve.taus - c) <= t_rt / 2
            found.append(curve.taus[sel][np.argmax(curve.values[sel])])
        spacing = np.diff(np.array(found))
        assert np.all(np.abs(spacing - t_rt) <= step + 1e-15)

    def test_empty_grid_rejected(self, small_model):
        with pytest.raises(InvalidConfigError):
            g2_curve(small_model, 1e-9, -1e-9, 1e-10)
        with pytest.raises(InvalidConfigError):
            g2_curve(small_model, -1e-9, 1e-9, 0.0)

    def test_csv_round_trip(self, small_model, tmp_path):
        curve = g2_curve(small_model, -20e-9, 20e-9, 1e-9)
        path = tmp_path / "curve.csv"
        curve.write_csv(path)
        again = CorrelationCurve.read_csv(path)
        assert np.allclose(again.taus, curve.taus, rtol=1e-10)
        assert np.allclose(again.values, curve.values, rtol=1e-10)


class TestModelValidation:
    def test_from_cavity(self, pdc_config):
        model = model_from_cavity(pdc_config)
        assert model.gamma_s == pytest.approx(667.14e3, rel=1e-4)
        assert model.fsr_s == pytest.approx(120.8e6)
        assert model.tau0 == pytest.approx(7.505e-12, rel=1e-3)
        assert model.mode_cutoff == 1000

    @pytest.mark.parametrize("field,value", [
        ("gamma_s", 0.0), ("gamma_i", -1.0), ("fsr_s", 0.0),
        ("tau0", -1e-12), ("mode_cutoff", -1),
    ])
    def test_invariants(self, field, value):
        kwargs = dict(gamma_s=667e3, gamma_i=667e3, fsr_s=120.8e6,
                      fsr_i=120.8e6, tau0=7.5e-12, mode_cutoff=10)
        kwargs[field] = value
        with pytest.raises(InvalidConfigError):
            PairCorrelationModel(**kwargs)

    @given(st.floats(1e3, 1e7), st.floats(1e7, 1e9), st.floats(0, 2e-11))
    @settings(max_examples=25, deadline=None)
    def test_symmetry_property(self, gamma, fsr, tau0):
        model = PairCorrelationModel(gamma_s=gamma, gamma_i=gamma, fsr_s=fsr,
                                     fsr_i=fsr, tau0=tau0, mode_cutoff=8)
        dt = 0.3 / fsr
        a = g2_cross(model, tau0 / 2 + dt)
        b = g2_cross(model, tau0 / 2 - dt)
        assert a == pytest.approx(b, rel=1e-8)
