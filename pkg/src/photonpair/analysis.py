"""Coincidence analysis: delay histograms and bandwidth extraction.

``correlate`` streams over two sorted tick sequences with a sliding
window (O(n + matches)); ``fit_envelope`` extracts the per-round-trip
coincidence mass and fits the double exponential decay of the comb
envelope; ``fit_full_model`` refits the complete correlation model to a
binned histogram.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import correlate_ticks
from .correlation import HwpConfig, PairCorrelationModel
from .errors import DataFormatError, FitDegenerateError, FitFailedError, InvalidConfigError
from .timetags import DelaySampler, TimeTagStream

LN2 = math.log(2.0)


@dataclass(eq=False)
class Histogram:
    """Binned coincidence counts over delays in [-window, window).

    Bins are half-open [lower, upper); the bin count is
    floor(2*window/bin_width), so a sliver below +window may be excluded.
    Positive delay means the idler arrived after the signal.
    """

    bin_width: float
    window: float
    counts: np.ndarray
    total_pairs: int
    tick_duration: float | None = None   # tick lattice of the source stream

    def __post_init__(self):
        if len(self.counts) != n_bins_for(self.bin_width, self.window):
            raise InvalidConfigError("counts length inconsistent with bin/window")
        if (np.asarray(self.counts) < 0).any():
            raise InvalidConfigError("counts must be non-negative")

    def bin_centers(self) -> np.ndarray:
        return -self.window + (np.arange(len(self.counts)) + 0.5) * self.bin_width

    def bin_edges(self) -> np.ndarray:
        return -self.window + np.arange(len(self.counts) + 1) * self.bin_width

    def write_csv(self, path) -> None:
        centers = self.bin_centers()
        with open(path, "w") as fh:
            fh.write("bin_center_seconds,counts\n")
            for c, n in zip(centers, self.counts):
                fh.write(f"{c:.12e},{int(n)}\n")
        sidecar = {"bin_width_seconds": self.bin_width,
                   "window_seconds": self.window,
                   "n_bins": int(len(self.counts)),
                   "total_pairs": int(self.total_pairs)}
        if self.tick_duration is not None:
            sidecar["tick_duration_seconds"] = self.tick_duration
        with open(str(path) + ".json", "w") as fh:
            json.dump(sidecar, fh, indent=2)
            fh.write("\n")

    @staticmethod
    def read_csv(path) -> "Histogram":
        try:
            with open(str(path) + ".json") as fh:
                meta = json.load(fh)
            arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except OSError as exc:
            raise DataFormatError(f"cannot read histogram {path!r}: {exc}") from exc
        except (json.JSONDecodeError, ValueError) as exc:
            raise DataFormatError(f"malformed histogram {path!r}: {exc}") from exc
        counts = arr[:, 1] if arr.size else np.zeros(0)
        if (counts < 0).any() or (counts != np.round(counts)).any():
            raise DataFormatError(f"non-integer counts in {path!r}")
        tick = meta.get("tick_duration_seconds")
        return Histogram(bin_width=float(meta["bin_width_seconds"]),
                         window=float(meta["window_seconds"]),
                         counts=counts.astype(np.int64),
                         total_pairs=int(meta["total_pairs"]),
                         tick_duration=float(tick) if tick else None)


def n_bins_for(bin_width: float, window: float) -> int:
    return int(math.floor(2.0 * window / bin_width + 1e-9))


def _check_sorted(ticks, name):
    ticks = np.ascontiguousarray(ticks, dtype=np.int64)
    if len(ticks) > 1:
        bad = np.nonzero(np.diff(ticks) < 0)[0]
        if len(bad):
            raise InvalidConfigError(f"{name} not sorted ascending at index {int(bad[0]) + 1}")
    return ticks


def correlate(stream_s, stream_i, bin_width: float, window: float, *,
              tick_duration: float, threads: int = 1) -> Histogram:
    """Delay histogram (idler minus signal) between two sorted tick arrays.

    Every pair whose delay falls inside a bin is counted, via one forward
    pass with a sliding window over the idler stream.  With threads > 1
    the signal stream is chunked and partial histograms summed; the
    result is identical to the single-threaded one.
    """
    if not bin_width > 0:
        raise InvalidConfigError("bin_width must be positive")
    if not window >= bin_width:
        raise InvalidConfigError("window must be at least one bin wide")
    if not tick_duration > 0:
        raise InvalidConfigError("tick_duration must be positive")
    s = _check_sorted(stream_s, "stream_s")
    it = _check_sorted(stream_i, "stream_i")
    n_bins = n_bins_for(bin_width, window)

    if threads > 1 and len(s) >= 4 * threads:
        bounds = np.linspace(0, len(s), threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(
                lambda j: correlate_ticks(s[bounds[j]:bounds[j + 1]], it,
                                          tick_duration, bin_width, window, n_bins),
                range(threads))
        counts = sum(parts)
    else:
        counts = correlate_ticks(s, it, tick_duration, bin_width, window, n_bins)
    return Histogram(bin_width=bin_width, window=window, counts=counts,
                     total_pairs=int(counts.sum()), tick_duration=tick_duration)


def correlate_stream(stream: TimeTagStream, bin_width: float, window: float,
                     threads: int = 1) -> Histogram:
    return correlate(stream.signal_ticks, stream.idler_ticks, bin_width, window,
                     tick_duration=stream.tick_duration, threads=threads)


# --- envelope fit ------------------------------------------------------------

@dataclass(frozen=True)
class BandwidthFit:
    """Double-exponential envelope fit result."""

    delta_nu_s: float
    delta_nu_s_err: float
    delta_nu_i: float
    delta_nu_i_err: float
    tau_center: float
    amplitude: float
    background: float
    goodness: float        # reduced chi-square

    def __post_init__(self):
        if not (self.delta_nu_s > 0 and self.delta_nu_i > 0):
            raise FitDegenerateError("fitted bandwidth must be positive")
        if self.delta_nu_s_err < 0 or self.delta_nu_i_err < 0:
            raise FitDegenerateError("standard errors must be non-negative")

    def fwhm_correlation_time(self) -> float:
        """FWHM of the fitted coincidence envelope, ln2/(pi*mean bandwidth)."""
        return LN2 / (math.pi * 0.5 * (self.delta_nu_s + self.delta_nu_i))

    def as_dict(self) -> dict:
        return {"delta_nu_s_hz": self.delta_nu_s,
                "delta_nu_s_err_hz": self.delta_nu_s_err,
                "delta_nu_i_hz": self.delta_nu_i,
                "delta_nu_i_err_hz": self.delta_nu_i_err,
                "tau_center_seconds": self.tau_center,
                "amplitude": self.amplitude,
                "background_per_bin": self.background,
                "reduced_chi_square": self.goodness,
                "fwhm_correlation_time_seconds": self.fwhm_correlation_time()}


def estimate_comb_spacing(hist: Histogram):
    """Comb period from resolved peak positions, or None when the binning
    is too coarse to resolve the comb."""
    counts = np.asarray(hist.counts, dtype=float)
    if len(counts) < 16:
        return None
    centers = hist.bin_centers()
    bg = np.median(counts)
    thresh = bg + 4.0 * math.sqrt(bg + 1.0)
    inner = (counts[1:-1] > counts[:-2]) & (counts[1:-1] >= counts[2:])
    idx = np.nonzero(inner & (counts[1:-1] > thresh))[0] + 1
    if len(idx) < 8:
        return None
    taus = centers[idx]
    diffs = np.diff(taus)
    med = float(np.median(diffs))
    if not med > 2.0 * hist.bin_width:
        return None
    # bin-quantized diffs alternate around the true period: seed with the
    # dominant cluster's mean, then refine against integer peak indexes
    good = np.abs(diffs - med) < 0.3 * med
    if not good.any():
        return None
    spacing = float(diffs[good].mean())
    coef = None
    for _ in range(4):
        k = np.rint((taus - taus[0]) / spacing)
        if len(np.unique(k)) < 6:
            return None
        coef = np.polyfit(k, taus, 1)
        spacing = float(coef[0])
        if not spacing > 0:
            return None
    resid = taus - np.polyval(coef, np.rint((taus - taus[0]) / spacing))
    if np.abs(resid).max() > 0.45 * spacing:
        return None
    return spacing


def _cells_from_hist(hist, fsr):
    """Aggregate bins into comb cells anchored at multiples of 1/fsr.

    Returns (cell positions, summed counts, bins per cell, covered
    interval per cell).  With no fsr given and an unresolvable comb,
    each bin is its own cell.
    """
    counts = np.asarray(hist.counts, dtype=float)
    centers = hist.bin_centers()
    b = hist.bin_width
    if fsr is None:
        spacing = estimate_comb_spacing(hist)
        if spacing is None:
            ones = np.ones(len(counts))
            return centers, counts, ones, centers - b / 2, centers + b / 2
    else:
        spacing = 1.0 / fsr
    k = np.rint(centers / spacing).astype(np.int64)
    uniq, inverse = np.unique(k, return_inverse=True)
    sums = np.bincount(inverse, weights=counts)
    nbins = np.bincount(inverse).astype(float)
    lo = np.full(len(uniq), np.inf)
    hi = np.full(len(uniq), -np.inf)
    np.minimum.at(lo, inverse, centers - b / 2)
    np.maximum.at(hi, inverse, centers + b / 2)
    return uniq * spacing, sums, nbins, lo, hi


def _edge_cdf(x, sigma, tick):
    """P(a peak-centered event falls below a boundary at distance x).

    Per-tag quantization puts delays on a tick lattice; summed over the
    lattice the boundary softens into a uniform ramp one tick wide,
    further convolved with the Gaussian spread sigma (jitter, intrinsic
    peak width): CDF of uniform(tick) + normal(sigma).
    """
    from scipy.special import ndtr

    if tick <= 0:
        return ndtr(x / sigma)
    zp = (x + tick / 2.0) / sigma
    zm = (x - tick / 2.0) / sigma

    def integ(z):
        return z * ndtr(z) + np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)

    return (integ(zp) - integ(zm)) * sigma / tick


def _envelope_model(params, taus, nbins, lo, hi, tick):
    """Per-cell expected counts.

    Each comb peak carries the decaying envelope mass; the smeared peak
    splits between its own cell and the adjacent ones (mass conserving),
    on top of a flat background per bin.
    """
    a, dnu_s, dnu_i, tau_c, bg, spread = params
    rate = np.where(taus >= 0, dnu_s, dnu_i)
    env = a * np.exp(np.clip(-2.0 * np.pi * rate * np.abs(taus), -700.0, 0.0))
    pos = taus + tau_c
    below_hi = _edge_cdf(hi - pos, spread, tick)
    below_lo = _edge_cdf(lo - pos, spread, tick)
    out = env * (below_hi - below_lo) + bg * nbins
    # spill into contiguous neighbours
    adj = np.abs(lo[1:] - hi[:-1]) < 0.51 * (tick if tick else 1e-15)
    out[1:] += np.where(adj, env[:-1] * (1.0 - below_hi[:-1]), 0.0)
    out[:-1] += np.where(adj, env[1:] * below_lo[1:], 0.0)
    return out


def fit_envelope(hist: Histogram, fsr: float | None = None) -> BandwidthFit:
    """Bandwidths from the exponential decay of the comb envelope.

    Counts are aggregated per comb cell and A*exp(-2*pi*dnu*|tau|) plus a
    flat background is fitted by Poisson likelihood, one decay constant
    per side.  A spread parameter (jitter, intrinsic peak width) models
    how much of each peak crosses its cell's bin edges; that mass is
    transferred to the neighbouring cell, not dropped.
    """
    from scipy.optimize import least_squares

    taus, y, nbins, lo, hi = _cells_from_hist(hist, fsr)
    if y.sum() <= 0:
        raise FitDegenerateError("histogram is empty")
    tick = hist.tick_duration or 0.0
    if tick:
        # delays live on the tick lattice: a cell captures the ticks
        # inside its bins, so its effective boundaries are tick-snapped
        lo = (np.ceil(lo / tick) - 0.5) * tick
        hi = (np.ceil(hi / tick) - 0.5) * tick
    sigma = np.sqrt(np.maximum(y, 1.0))

    # background starts at zero and may go (slightly) negative: every cell
    # contains a comb peak at coarse binning, so the floor is identified
    # only by the far tail and a one-sided bound would bias the decay
    bg0 = 0.0
    a0 = max(float(y.max()), 1.0)
    occupied = y - bg0 * nbins > 3.0 * sigma
    n_right = int(np.count_nonzero(occupied & (taus > 0)))
    n_left = int(np.count_nonzero(occupied & (taus < 0)))
    if n_right < 10 or n_left < 10:
        raise FitDegenerateError(
            f"need >= 10 occupied comb peaks per side, found {n_left}/{n_right}")

    dnu0 = _initial_decay(taus, y, nbins, bg0, 0.0, a0)
    width = float(np.median(hi - lo))
    spread_ref = width / 64.0
    # tau_c is the within-cell peak offset; the cells themselves anchor
    # the comb, so it stays within half a cell of zero
    p0 = np.array([a0, dnu0, dnu0, 0.0, bg0, spread_ref])
    scale = np.maximum(np.abs(p0), [1.0, 1e3, 1e3, hist.bin_width, 1.0, spread_ref])
    lower = np.array([0.0, 0.0, 0.0, -width / 2, -np.inf, 1e-6 * width]) / scale
    upper = np.array([np.inf, np.inf, np.inf, width / 2, np.inf, 2.0 * width]) / scale

    def resid(u):
        mu = _envelope_model(u * scale, taus, nbins, lo, hi, tick)
        return _deviance_residuals(y, mu)

    # the spread landscape has local minima; start from several widths
    spread_starts = {width / 2048.0, width / 256.0, width / 64.0, width / 8.0}
    if tick:
        spread_starts.add(tick / 4.0)
    sol = None
    for s0 in sorted(spread_starts):
        u0 = p0 / scale
        u0[5] = s0 / scale[5]
        trial = least_squares(resid, np.clip(u0, lower, upper), method="trf",
                              bounds=(lower, upper), xtol=1e-12, ftol=1e-12,
                              max_nfev=4000)
        if sol is None or trial.cost < sol.cost:
            sol = trial
    p = sol.x * scale
    dof = max(len(y) - 6, 1)
    red_chi2 = float(2.0 * sol.cost / dof)
    # pinv: the spread column degenerates when peaks never straddle bin edges
    cov = np.linalg.pinv(sol.jac.T @ sol.jac)
    err = np.sqrt(np.maximum(np.diag(cov), 0.0)) * scale
    err = err * max(1.0, math.sqrt(red_chi2))  # conservative when the model misfits
    return BandwidthFit(delta_nu_s=float(p[1]), delta_nu_s_err=float(err[1]),
                        delta_nu_i=float(p[2]), delta_nu_i_err=float(err[2]),
                        tau_center=float(p[3]), amplitude=float(p[0]),
                        background=float(p[4]), goodness=red_chi2)


def _deviance_residuals(y, mu):
    """Signed square-root Poisson deviance; least squares on these is the
    Poisson maximum-likelihood fit (unbiased at low counts, unlike the
    Gaussian chi-square approximation)."""
    mu = np.maximum(mu, 1e-12)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(y > 0, y * np.log(y / mu) - (y - mu), mu)
    return np.sign(y - mu) * np.sqrt(2.0 * np.maximum(term, 0.0))


def _initial_decay(taus, y, nbins, bg0, tau_c, a0):
    """Log-slope estimate of the decay rate from the right side."""
    net = y - bg0 * nbins
    sel = (taus > tau_c) & (net > max(a0 * 0.02, 3.0))
    if np.count_nonzero(sel) < 3:
        return 1.0 / (2.0 * np.pi * max(taus.max() - tau_c, 1e-9))
    slope = np.polyfit(taus[sel], np.log(net[sel]), 1)[0]
    return max(-slope / (2.0 * np.pi), 1e-3)


# --- full model fit ----------------------------------------------------------

_FULL_PARAMS = ("gamma_s", "gamma_i", "tau0", "fsr", "amplitude", "background")


@dataclass
class FullModelFit:
    """Result of refitting the correlation model to a histogram."""

    model: PairCorrelationModel
    amplitude: float
    background: float
    goodness: float
    errors: dict
    n_iterations: int
    converged: bool


def _pair_fractions(model, hwp, hist):
    """Fraction of the total pair mass landing in each bin.

    Slot decomposition of the comb: per-slot envelope masses and peak
    profiles, distributed across bin edges through the profile CDF
    smeared by the tick-lattice quantization kernel (uniform, one tick).
    """
    sampler = DelaySampler(model, hwp, window=hist.window + 2.0 / model.fsr_s)
    edges = hist.bin_edges()
    tick = hist.tick_duration or 0.0
    out = np.zeros(len(hist.counts), dtype=float)
    p_center, p_r1, p_r2, p_l1, p_l2 = sampler._profiles
    for n, mass in zip(sampler.slots, sampler.slot_masses):
        if mass <= 0:
            continue
        prof = (p_center if n == 0 else
                p_r1 if n == 1 else p_r2 if n > 1 else
                p_l1 if n == -1 else p_l2)
        t_phys = sampler._t_r if n >= 0 else sampler._t_l
        c = sampler._center + n * t_phys
        margin = tick if tick else 0.0
        if c + prof.grid[-1] + margin <= edges[0] or c + prof.grid[0] - margin >= edges[-1]:
            continue
        if tick:
            # delays are per-tag quantized: the boundary softens into a
            # one-tick uniform ramp at the tick-snapped edge, so use the
            # uniform-window average of the profile CDF
            snapped = (np.ceil(edges / tick) - 0.5) * tick
            xs = snapped - c
            g, icdf = _integrated_cdf(prof)
            hi_v = np.interp(xs + tick / 2, g, icdf)
            lo_v = np.interp(xs - tick / 2, g, icdf)
            cdf = (hi_v - lo_v) / tick
        else:
            cdf = np.interp(edges - c, prof.grid, prof.cum / prof.mass,
                            left=0.0, right=1.0)
        out += mass * np.diff(cdf)
    return out


def _integrated_cdf(prof):
    """Grid and running integral of the normalized profile CDF, extended
    flat below and with unit slope above for out-of-range queries."""
    cached = getattr(prof, "_icdf_cache", None)
    if cached is not None:
        return cached
    g = prof.grid
    cdf = prof.cum / prof.mass
    seg = 0.5 * (cdf[1:] + cdf[:-1]) * np.diff(g)
    icdf = np.concatenate(([0.0], np.cumsum(seg)))
    span = g[-1] - g[0]
    g_ext = np.concatenate(([g[0] - span - 1.0], g, [g[-1] + span + 1.0]))
    icdf_ext = np.concatenate(([0.0], icdf, [icdf[-1] + span + 1.0]))
    prof._icdf_cache = (g_ext, icdf_ext)
    return prof._icdf_cache


def fit_full_model(hist: Histogram, initial: PairCorrelationModel,
                   hwp: HwpConfig | None = None, fix: tuple = (),
                   max_iterations: int = 200) -> FullModelFit:
    """Nonlinear least squares of the full comb model against a histogram.

    Free parameters: gamma_s, gamma_i, tau0, fsr (shared), overall
    amplitude and flat background; any can be pinned via ``fix``.
    Derivative-free simplex warm start, then Gauss-Newton with a
    forward-difference Jacobian (1e-8 relative parameter tolerance).
    Raises FitFailedError (carrying the best point) on non-convergence.
    """
    from scipy.optimize import minimize

    if hist.bin_width > 0.25 / initial.fsr_s:
        raise InvalidConfigError("bin width too coarse to resolve the comb "
                                 "(need <= round-trip/4)")
    y = np.asarray(hist.counts, dtype=float)
    if y.sum() <= 0:
        raise FitDegenerateError("histogram is empty")
    sigma = np.sqrt(np.maximum(y, 1.0))
    hwp = hwp if hwp is not None else HwpConfig(0.0)
    for name in fix:
        if name not in _FULL_PARAMS:
            raise InvalidConfigError(f"unknown parameter {name!r} in fix")

    bg0 = float(np.quantile(y, 0.10))
    amp0 = max(float(y.sum() - bg0 * len(y)), 1.0)
    full0 = {"gamma_s": initial.gamma_s, "gamma_i": initial.gamma_i,
             "tau0": initial.tau0, "fsr": initial.fsr_s,
             "amplitude": amp0, "background": max(bg0, 1e-9)}
    free = [k for k in _FULL_PARAMS if k not in fix]
    scale = np.array([max(abs(full0[k]), 1e-12) for k in free])

    def build(u):
        p = dict(full0)
        for k, v in zip(free, u * scale):
            p[k] = v
        return p

    shape_cache = {}

    def fractions(p):
        key = (p["gamma_s"], p["gamma_i"], p["tau0"], p["fsr"])
        frac = shape_cache.get(key)
        if frac is None:
            model = PairCorrelationModel(
                gamma_s=p["gamma_s"], gamma_i=p["gamma_i"],
                fsr_s=p["fsr"], fsr_i=p["fsr"], tau0=p["tau0"],
                mode_cutoff=initial.mode_cutoff,
                omega_s=initial.omega_s, omega_i=initial.omega_i)
            frac = _pair_fractions(model, hwp, hist)
            if len(shape_cache) > 64:
                shape_cache.clear()
            shape_cache[key] = frac
        return frac

    def residuals(u):
        p = build(u)
        if (p["gamma_s"] <= 0 or p["gamma_i"] <= 0 or p["tau0"] < 0
                or p["fsr"] <= 0 or p["amplitude"] < 0 or p["background"] < 0):
            return None
        mu = p["amplitude"] * fractions(p) + p["background"]
        return _deviance_residuals(y, mu)

    def ssr(u):
        r = residuals(u)
        return math.inf if r is None else float(r @ r)

    starts = [np.ones(len(free))]
    if "tau0" in free:
        # jitter-broadened peaks pull the effective width far from the
        # crystal value; offer a bin-scale start as well
        alt = np.ones(len(free))
        alt[free.index("tau0")] = hist.bin_width / 2.0 / scale[free.index("tau0")]
        starts.append(alt)
    u, best = None, math.inf
    for u0 in starts:
        warm = minimize(ssr, u0, method="Nelder-Mead",
                        options={"maxfev": 40 * len(free), "xatol": 1e-5, "fatol": 1e-8})
        cand, fun = (warm.x, warm.fun) if math.isfinite(warm.fun) else (u0, ssr(u0))
        if fun < best:
            u, best = cand, fun

    # Gauss-Newton refinement with step-halving line search
    tol = 1e-8
    h = 1e-4
    n_iter = 0
    converged = False
    r = residuals(u)
    if r is None:
        raise FitFailedError("invalid starting point", best=build(u0))
    cur = float(r @ r)
    jac = None
    for n_iter in range(1, max_iterations + 1):
        jac = np.empty((len(r), len(free)))
        for j in range(len(free)):
            up = u.copy()
            up[j] += h
            rp = residuals(up)
            if rp is None:
                up[j] = u[j] - h
                rp = residuals(up)
                if rp is None:
                    raise FitFailedError("parameter boundary hit", best=build(u))
                jac[:, j] = (r - rp) / h
            else:
                jac[:, j] = (rp - r) / h
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        accepted = False
        lam = 1.0
        for _ in range(20):
            u_try = u + lam * step
            r_try = residuals(u_try)
            if r_try is not None:
                new = float(r_try @ r_try)
                if new < cur - 1e-12 * max(cur, 1.0):
                    moved = float(np.max(np.abs(lam * step) / np.maximum(np.abs(u), 1e-12)))
                    u, r, cur = u_try, r_try, new
                    accepted = True
                    if moved < tol:
                        converged = True
                    break
            lam *= 0.5
        if not accepted:
            converged = True   # no improving direction: at a (local) optimum
            break
        if converged:
            break

    p = build(u)
    dof = max(len(y) - len(free), 1)
    red_chi2 = cur / dof
    errors = {}
    if jac is not None:
        try:
            cov = np.linalg.inv(jac.T @ jac)
            for j, k in enumerate(free):
                errors[k] = float(math.sqrt(max(cov[j, j], 0.0)) * scale[j])
        except np.linalg.LinAlgError:
            pass
    result = FullModelFit(
        model=PairCorrelationModel(
            gamma_s=p["gamma_s"], gamma_i=p["gamma_i"], fsr_s=p["fsr"],
            fsr_i=p["fsr"], tau0=p["tau0"], mode_cutoff=initial.mode_cutoff,
            omega_s=initial.omega_s, omega_i=initial.omega_i),
        amplitude=p["amplitude"], background=p["background"],
        goodness=red_chi2, errors=errors, n_iterations=n_iter, converged=converged)
    if not converged:
        raise FitFailedError(f"no convergence in {max_iterations} iterations",
                             best=result)
    return result
