import json
import subprocess
import sys

import numpy as np
import pytest

from photonpair.analysis import Histogram
from photonpair.correlation import CorrelationCurve
from photonpair.ptag import write_ptag
from photonpair.timetags import TimeTagStream


def run_cli(*args, timeout=120):
    return subprocess.run([sys.executable, "-m", "photonpair.cli", *args],
                          capture_output=True, text=True, timeout=timeout)


class TestParams:
    def test_pdc_values(self):
        out = run_cli("params", "--cavity", "pdc")
        assert out.returncode == 0
        report = json.loads(out.stdout)
        fund = report["fundamental"]
        assert fund["fsr"] == pytest.approx(120.8e6)
        assert fund["finesse"] == pytest.approx(181.07, abs=0.01)
        assert fund["linewidth_fwhm"] == pytest.approx(667.1e3, rel=1e-3)
        assert fund["escape_efficiency"] == pytest.approx(0.288, abs=1e-3)
        assert report["fsr_ratio_pump_to_fundamental"] == 2.0

    def test_shg_values(self):
        report = json.loads(run_cli("params", "--cavity", "shg").stdout)
        assert report["fundamental"]["fsr"] == pytest.approx(278e6)
        assert report["fundamental"]["finesse"] == pytest.approx(100.0, abs=0.1)

    def test_missing_file_exit_2(self):
        out = run_cli("params", "--cavity", "/no/such/file.json")
        assert out.returncode == 2
        assert "error" in out.stderr


class TestModel:
    def test_writes_curve(self, tmp_path):
        path = tmp_path / "curve.csv"
        out = run_cli("model", "--cavity", "pdc", "--mode-cutoff", "300",
                      "--tau-range", "-20e-9", "20e-9", "--step", "200.2e-12",
                      "--delta-alpha", "0", "--out", str(path))
        assert out.returncode == 0
        curve = CorrelationCurve.read_csv(path)
        assert curve.values.max() == pytest.approx(1.0)
        assert len(curve.taus) == 200

    def test_step_larger_than_range_exit_2(self, tmp_path):
        out = run_cli("model", "--cavity", "pdc", "--tau-range", "0", "1e-9",
                      "--step", "1e-8", "--out", str(tmp_path / "x.csv"))
        assert out.returncode == 2


class TestPipeline:
    def test_simulate_correlate_fit_chain(self, tmp_path):
        ptag = tmp_path / "run.ptag"
        out = run_cli("simulate", "--cavity", "pdc", "--gamma", "666e3",
                      "--mode-cutoff", "300", "--rate", "473", "--duration", "120",
                      "--seed", "8", "--jitter", "350e-12",
                      "--dark-s", "100", "--dark-i", "100", "--out", str(ptag))
        assert out.returncode == 0, out.stderr

        hist_csv = tmp_path / "hist.csv"
        out = run_cli("--threads", "2", "correlate", "--input", str(ptag),
                      "--bin", "8.2e-9", "--window", "1e-6",
                      "--out", str(hist_csv))
        assert out.returncode == 0, out.stderr
        hist = Histogram.read_csv(hist_csv)
        assert hist.total_pairs > 40_000

        fit_json = tmp_path / "fit.json"
        out = run_cli("fit", "--input", str(hist_csv), "--mode", "envelope",
                      "--cavity", "pdc", "--out", str(fit_json))
        assert out.returncode == 0, out.stderr
        fit = json.loads(fit_json.read_text())
        assert fit["delta_nu_s_hz"] == pytest.approx(666e3, rel=0.15)

    def test_correlate_empty_ptag(self, tmp_path):
        ptag = tmp_path / "empty.ptag"
        write_ptag(TimeTagStream(100.1e-12, np.empty(0, np.int64),
                                 np.empty(0, np.int64)), ptag)
        hist_csv = tmp_path / "hist.csv"
        out = run_cli("correlate", "--input", str(ptag), "--bin", "8.2e-9",
                      "--window", "1e-6", "--out", str(hist_csv))
        assert out.returncode == 0
        hist = Histogram.read_csv(hist_csv)
        assert hist.counts.sum() == 0

    def test_corrupt_ptag_exit_3(self, tmp_path):
        bad = tmp_path / "bad.ptag"
        bad.write_bytes(b"JUNKJUNKJUNKJUNKJUNK")
        out = run_cli("correlate", "--input", str(bad), "--bin", "8.2e-9",
                      "--window", "1e-6", "--out", str(tmp_path / "h.csv"))
        assert out.returncode == 3
        assert "byte offset" in out.stderr

    def test_degenerate_fit_exit_4(self, tmp_path):
        hist = Histogram(bin_width=8.2e-9, window=1e-6,
                         counts=np.zeros(243, dtype=np.int64), total_pairs=0)
        hist_csv = tmp_path / "zero.csv"
        hist.write_csv(hist_csv)
        out = run_cli("fit", "--input", str(hist_csv), "--mode", "envelope",
                      "--fsr", "120.8e6")
        assert out.returncode == 4

    def test_csv_tag_input_needs_tick(self, tmp_path):
        csv = tmp_path / "tags.csv"
        csv.write_text("channel,ticks\n0,1\n1,2\n")
        out = run_cli("correlate", "--input", str(csv), "--bin", "8.2e-9",
                      "--window", "1e-6", "--out", str(tmp_path / "h.csv"))
        assert out.returncode == 2
        out = run_cli("correlate", "--input", str(csv), "--tick", "100.1e-12",
                      "--bin", "8.2e-9", "--window", "1e-6",
                      "--out", str(tmp_path / "h.csv"))
        assert out.returncode == 0


class TestReproduceFigures:
    def test_emits_all_artifacts(self, tmp_path):
        out = run_cli("reproduce-figures", "--out", str(tmp_path / "figs"),
                      "--mode-cutoff", "1000", timeout=300)
        assert out.returncode == 0, out.stderr
        names = {"fig2a.csv", "fig2b.csv", "fig2c.csv", "fig2d.csv",
                 "fig3a.csv", "fig3b.csv", "fig3a_fit.json"}
        produced = {p.name for p in (tmp_path / "figs").iterdir()}
        assert names <= produced
        fit = json.loads((tmp_path / "figs" / "fig3a_fit.json").read_text())
        assert fit["delta_nu_s_hz"] == pytest.approx(667e3, rel=0.05)
        curve = CorrelationCurve.read_csv(tmp_path / "figs" / "fig2d.csv")
        assert curve.values.max() == pytest.approx(1.0)
