"""Command-line front end.

Subcommands compose through files: ``simulate`` writes a PTAG tag
stream, ``correlate`` turns it into a histogram CSV, ``fit`` extracts
bandwidths, ``model`` and ``params`` evaluate the theory directly, and
``reproduce-figures`` regenerates the bundled reference scenarios.

Exit codes: 0 success, 2 configuration/argument error, 3 data-format
error, 4 fit failure.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

# accept scientific-notation negatives like -50e-9 as positional values
_NEGATIVE_NUMBER = re.compile(r"^-\d+$|^-\d*\.\d+$|^-\d+\.?\d*[eE][+-]?\d+$")

from .errors import (CapacityError, DataFormatError, FitDegenerateError,
                     FitFailedError, InvalidConfigError)

DEFAULT_TAU0 = 0.025 * 0.09 / 299792458.0


class _SubParser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = _NEGATIVE_NUMBER


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="photonpair",
        description="Cavity-enhanced photon-pair source simulator and analyzer")
    p._negative_number_matcher = _NEGATIVE_NUMBER
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads for correlation (default: all cores)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_SubParser)

    q = sub.add_parser("params", help="derived spectral parameters of a cavity")
    q.add_argument("--cavity", required=True,
                   help="cavity config JSON path, or bundled name 'pdc'/'shg'")
    q.set_defaults(func=cmd_params)

    q = sub.add_parser("model", help="evaluate the correlation comb on a grid")
    _model_flags(q)
    q.add_argument("--tau-range", nargs=2, type=float, required=True,
                   metavar=("MIN", "MAX"), help="delay range in seconds")
    q.add_argument("--step", type=float, required=True, help="grid step in seconds")
    q.add_argument("--delta-alpha", type=float, default=0.0,
                   help="waveplate detuning in degrees")
    q.add_argument("--out", required=True, help="output CSV path")
    q.set_defaults(func=cmd_model)

    q = sub.add_parser("simulate", help="generate a synthetic time-tag stream")
    _model_flags(q)
    q.add_argument("--delta-alpha", type=float, default=0.0)
    q.add_argument("--rate", type=float, required=True, help="pair rate in Hz")
    q.add_argument("--duration", type=float, required=True, help="seconds")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--tick", type=float, default=100.1e-12, help="tick duration, s")
    q.add_argument("--efficiency-s", type=float, default=1.0)
    q.add_argument("--efficiency-i", type=float, default=1.0)
    q.add_argument("--dark-s", type=float, default=0.0, help="dark rate ch0, Hz")
    q.add_argument("--dark-i", type=float, default=0.0, help="dark rate ch1, Hz")
    q.add_argument("--jitter", type=float, default=0.0, help="Gaussian sigma, s")
    q.add_argument("--sample-window", type=float, default=None,
                   help="delay truncation window, s (default: 5 decay times)")
    q.add_argument("--out", required=True, help="output PTAG path")
    q.add_argument("--csv", action="store_true", help="also write a CSV dump")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("correlate", help="coincidence histogram from a tag stream")
    q.add_argument("--input", required=True, help="PTAG file (or CSV with --tick)")
    q.add_argument("--tick", type=float, default=None,
                   help="tick duration for CSV input, s")
    q.add_argument("--bin", type=float, required=True, help="bin width, s")
    q.add_argument("--window", type=float, required=True, help="half-window, s")
    q.add_argument("--out", required=True, help="output histogram CSV path")
    q.set_defaults(func=cmd_correlate)

    q = sub.add_parser("fit", help="bandwidth fit on a histogram CSV")
    _model_flags(q)
    q.add_argument("--input", required=True, help="histogram CSV (with .json sidecar)")
    q.add_argument("--mode", choices=("envelope", "full"), default="envelope")
    q.add_argument("--out", default=None, help="write fit JSON here (default stdout)")
    q.set_defaults(func=cmd_fit)

    q = sub.add_parser("reproduce-figures",
                       help="regenerate the bundled reference scenario outputs")
    q.add_argument("--out", required=True, help="output directory")
    q.add_argument("--seed", type=int, default=20160212)
    q.add_argument("--mode-cutoff", type=int, default=2000)
    q.set_defaults(func=cmd_reproduce)

    return p


def _model_flags(q):
    q.add_argument("--cavity", default=None,
                   help="cavity config JSON path or bundled name 'pdc'/'shg'")
    q.add_argument("--gamma", type=float, default=None,
                   help="override both linewidths, Hz")
    q.add_argument("--fsr", type=float, default=None, help="override both FSRs, Hz")
    q.add_argument("--tau0", type=float, default=None,
                   help="signal-idler crystal delay, s")
    q.add_argument("--mode-cutoff", type=int, default=None,
                   help="mode-sum truncation M")


def _resolve_model(args):
    from dataclasses import replace
    from . import correlation
    from .cavity import load_config

    if args.cavity:
        config = load_config(args.cavity)
        model = correlation.model_from_cavity(
            config, tau0=args.tau0, mode_cutoff=args.mode_cutoff)
    else:
        if args.gamma is None or args.fsr is None:
            raise InvalidConfigError("need either --cavity or both --gamma and --fsr")
        tau0 = args.tau0 if args.tau0 is not None else DEFAULT_TAU0
        cutoff = (args.mode_cutoff if args.mode_cutoff is not None
                  else correlation.default_mode_cutoff(tau0, args.fsr))
        model = correlation.PairCorrelationModel(
            gamma_s=args.gamma, gamma_i=args.gamma, fsr_s=args.fsr,
            fsr_i=args.fsr, tau0=tau0, mode_cutoff=cutoff)
        return model
    if args.gamma is not None:
        model = replace(model, gamma_s=args.gamma, gamma_i=args.gamma)
    if args.fsr is not None:
        model = replace(model, fsr_s=args.fsr, fsr_i=args.fsr)
    return model


def cmd_params(args) -> int:
    from .cavity import FUNDAMENTAL, PUMP, derive_spectral_params, load_config

    config = load_config(args.cavity)
    fund = derive_spectral_params(config, FUNDAMENTAL)
    pump = derive_spectral_params(config, PUMP)
    report = {
        "config": config.name or str(args.cavity),
        "fundamental": fund.as_dict(),
        "pump": pump.as_dict(),
        "fsr_ratio_pump_to_fundamental": pump.fsr / fund.fsr,
        "signal_idler_delay_seconds": config.signal_idler_delay(),
    }
    print(json.dumps(report, indent=2))
    return 0


def cmd_model(args) -> int:
    from .correlation import HwpConfig, g2_curve

    model = _resolve_model(args)
    lo, hi = args.tau_range
    hwp = HwpConfig(args.delta_alpha)
    curve = g2_curve(model, lo, hi, args.step, hwp=hwp)
    curve.write_csv(args.out)
    print(f"wrote {len(curve.taus)} points to {args.out}")
    return 0


def cmd_simulate(args) -> int:
    from .correlation import HwpConfig
    from .ptag import write_csv_tags, write_ptag
    from .timetags import DetectorConfig, SimRun, simulate_stream

    model = _resolve_model(args)
    run = SimRun(pair_rate=args.rate, duration=args.duration, seed=args.seed,
                 tick_duration=args.tick)
    det = DetectorConfig(efficiency_s=args.efficiency_s,
                         efficiency_i=args.efficiency_i,
                         dark_rate_s=args.dark_s, dark_rate_i=args.dark_i,
                         jitter_sigma=args.jitter)
    stream = simulate_stream(run, model, HwpConfig(args.delta_alpha), det,
                             window=args.sample_window)
    write_ptag(stream, args.out)
    if args.csv:
        write_csv_tags(stream, str(args.out) + ".csv")
    n_s, n_i = stream.counts()
    print(f"wrote {n_s} + {n_i} tags to {args.out}")
    return 0


def _read_stream(args):
    from .ptag import read_csv_tags, read_ptag

    if str(args.input).endswith(".csv"):
        if args.tick is None:
            raise InvalidConfigError("CSV input needs --tick")
        return read_csv_tags(args.input, args.tick)
    return read_ptag(args.input)


def cmd_correlate(args) -> int:
    from .analysis import correlate_stream

    stream = _read_stream(args)
    hist = correlate_stream(stream, args.bin, args.window, threads=args.threads)
    hist.write_csv(args.out)
    print(f"{hist.total_pairs} pairs in window; histogram written to {args.out}")
    return 0


def cmd_fit(args) -> int:
    from .analysis import Histogram, fit_envelope, fit_full_model

    hist = Histogram.read_csv(args.input)
    if args.mode == "envelope":
        fsr = args.fsr
        if fsr is None and args.cavity:
            from .cavity import FUNDAMENTAL, derive_spectral_params, load_config
            fsr = derive_spectral_params(load_config(args.cavity), FUNDAMENTAL).fsr
        fit = fit_envelope(hist, fsr=fsr)
        payload = {"mode": "envelope", **fit.as_dict()}
    else:
        initial = _resolve_model(args)
        result = fit_full_model(hist, initial)
        payload = {
            "mode": "full",
            "gamma_s_hz": result.model.gamma_s,
            "gamma_i_hz": result.model.gamma_i,
            "tau0_seconds": result.model.tau0,
            "fsr_hz": result.model.fsr_s,
            "amplitude": result.amplitude,
            "background_per_bin": result.background,
            "reduced_chi_square": result.goodness,
            "standard_errors": result.errors,
            "iterations": result.n_iterations,
        }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"fit written to {args.out}")
    else:
        print(text)
    return 0


def cmd_reproduce(args) -> int:
    from .analysis import correlate_stream, fit_envelope
    from .cavity import FUNDAMENTAL, derive_spectral_params, reference_config
    from .correlation import HwpConfig, g2_curve, model_from_cavity
    from .ptag import write_ptag
    from .timetags import DetectorConfig, SimRun, simulate_stream

    os.makedirs(args.out, exist_ok=True)
    config = reference_config("pdc")
    model = model_from_cavity(config, mode_cutoff=args.mode_cutoff)
    step = 200.2e-12

    detunings = [("fig2a.csv", 0.0), ("fig2b.csv", 2.0 / 3.0),
                 ("fig2c.csv", 4.0 / 3.0), ("fig2d.csv", 2.0)]
    for fname, da in detunings:
        curve = g2_curve(model, -200e-9, 200e-9, step, hwp=HwpConfig(da))
        curve.write_csv(os.path.join(args.out, fname))
        print(f"{fname}: waveplate detuning {da:.3g} deg")

    run = SimRun(pair_rate=473.0, duration=660.0, seed=args.seed)
    stream = simulate_stream(run, model, HwpConfig(0.0),
                             DetectorConfig(dark_rate_s=100.0, dark_rate_i=100.0,
                                            jitter_sigma=350e-12))
    write_ptag(stream, os.path.join(args.out, "fig3a.ptag"))
    hist = correlate_stream(stream, 8.2e-9, 1e-6, threads=args.threads)
    hist.write_csv(os.path.join(args.out, "fig3a.csv"))
    fsr = derive_spectral_params(config, FUNDAMENTAL).fsr
    fit = fit_envelope(hist, fsr=fsr)
    with open(os.path.join(args.out, "fig3a_fit.json"), "w") as fh:
        json.dump(fit.as_dict(), fh, indent=2)
        fh.write("\n")
    print(f"fig3a.csv: {hist.total_pairs} pairs, "
          f"bandwidths {fit.delta_nu_s / 1e3:.0f}/{fit.delta_nu_i / 1e3:.0f} kHz")

    curve = g2_curve(model, -1e-6, 1e-6, step, hwp=HwpConfig(0.0))
    curve.write_csv(os.path.join(args.out, "fig3b.csv"))
    print("fig3b.csv: fine comb structure")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidConfigError, CapacityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataFormatError as exc:
        print(f"data format error: {exc}", file=sys.stderr)
        return 3
    except (FitDegenerateError, FitFailedError) as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
