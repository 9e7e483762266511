"""Two-photon temporal cross-correlation of the cavity-enhanced pair source.

The intensity cross-correlation of a doubly resonant down-conversion
cavity is a decaying comb: coincidences pile up at integer multiples of
the effective round-trip time 1/FSR, each peak has the width of the
signal-idler group delay ``tau0`` accrued in the crystal, and the peak
envelope decays as exp(-2*pi*gamma*|tau|) where gamma is the cavity
linewidth (FWHM).

The amplitude is a double sum over signal and idler longitudinal modes
m_s, m_i with complex mode rates Gamma_k = gamma_k/2 + i*m_k*FSR_k:

    A(tau) = sum_{m_s, m_i} pref / (Gamma_s + Gamma_i)
             * exp(-2*pi*Gamma_s*(tau - tau0/2)) * sinc(i*pi*tau0*Gamma_s)

for tau >= tau0/2 (mirror expression in Gamma_i below), pref =
sqrt(gamma_s*gamma_i*omega_s*omega_i), and G2 = |A|^2.  Because the
tau-dependent factor involves only one photon's mode index, the partner
sum is tau-independent and the evaluation factorizes to O(M) per point
after an O(M^2) setup.

An intracavity half-wave plate swaps the photon polarizations every
physical round trip.  When detuned from the ideal orientation by
``delta_alpha`` it leaks coincidences into odd multiples of half the
effective round-trip time; the per-pass Jones rotation model lives here
too (``flip_trick_amplitudes``, ``g2_with_hwp``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernels import comb_amplitude
from .cavity import SPEED_OF_LIGHT, FUNDAMENTAL, CavityConfig, derive_spectral_params
from .errors import InvalidConfigError

DEFAULT_WAVELENGTH = 795e-9
DEFAULT_OMEGA = 2.0 * math.pi * SPEED_OF_LIGHT / DEFAULT_WAVELENGTH


def csinc(z):
    """sinc(z) = sin(z)/z for complex z, sinc(0) = 1.

    Series expansion below |z| = 1e-4 avoids cancellation near zero.
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 1.0 - zs * zs / 6.0 + zs ** 4 / 120.0
    zb = z[~small]
    out[~small] = np.sin(zb) / zb
    return out if out.ndim else out[()]


def default_mode_cutoff(tau0: float, fsr: float) -> int:
    """Mode-sum truncation resolving peak shapes of width tau0.

    ceil(2/(pi*tau0*fsr)) rounded up to the next multiple of 500; terms
    decay like 1/m^2 beyond the sinc corner at m ~ 1/(pi*tau0*fsr).
    """
    if tau0 <= 0.0:
        return 500
    raw = math.ceil(2.0 / (math.pi * tau0 * fsr))
    return max(500, 500 * math.ceil(raw / 500))


@dataclass(frozen=True)
class PairCorrelationModel:
    """Everything needed to evaluate the correlation comb.

    gamma_* are cavity FWHM linewidths in Hz (the damping rates of the
    mode sum), omega_* optical angular frequencies in rad/s, fsr_* in Hz,
    tau0 the signal-idler crystal group delay in seconds, and
    mode_cutoff M truncates each mode index to |m| <= M.
    """

    gamma_s: float
    gamma_i: float
    fsr_s: float
    fsr_i: float
    tau0: float
    mode_cutoff: int
    omega_s: float = DEFAULT_OMEGA
    omega_i: float = DEFAULT_OMEGA

    def __post_init__(self):
        for attr in ("gamma_s", "gamma_i", "fsr_s", "fsr_i", "omega_s", "omega_i"):
            if not getattr(self, attr) > 0:
                raise InvalidConfigError(f"{attr} must be positive")
        if self.tau0 < 0:
            raise InvalidConfigError("tau0 must be >= 0")
        if self.mode_cutoff < 0:
            raise InvalidConfigError("mode_cutoff must be >= 0")

    def round_trip_time(self) -> float:
        """Comb peak spacing 1/fsr (signal convention), seconds."""
        return 1.0 / self.fsr_s


def model_from_cavity(config: CavityConfig, tau0: float | None = None,
                      mode_cutoff: int | None = None,
                      wavelength: float = DEFAULT_WAVELENGTH) -> PairCorrelationModel:
    """Symmetric signal/idler model from a cavity description."""
    sp = derive_spectral_params(config, FUNDAMENTAL)
    if tau0 is None:
        tau0 = config.signal_idler_delay()
    if mode_cutoff is None:
        mode_cutoff = default_mode_cutoff(tau0, sp.fsr)
    omega = 2.0 * math.pi * SPEED_OF_LIGHT / wavelength
    return PairCorrelationModel(
        gamma_s=sp.linewidth_fwhm, gamma_i=sp.linewidth_fwhm,
        fsr_s=sp.fsr, fsr_i=sp.fsr, tau0=tau0, mode_cutoff=int(mode_cutoff),
        omega_s=omega, omega_i=omega)


# --- mode coefficients -------------------------------------------------------

def _partner_sums(gamma_sum_half, fsr_own, fsr_other, M):
    """w(m) = sum_{|m'| <= M} 1/(Gamma_own(m) + Gamma_other(m')).

    Pair-folded over +-m' for accuracy; O(M^2) but tau-independent, so it
    runs once per model.
    """
    m = np.arange(-M, M + 1)
    a = gamma_sum_half + 1j * m * fsr_own
    w = 1.0 / a
    a2 = a * a
    for k0 in range(1, M + 1, 256):
        ks = np.arange(k0, min(k0 + 256, M + 1), dtype=float) * fsr_other
        w = w + (2.0 * a[:, None] / (a2[:, None] + (ks * ks)[None, :])).sum(axis=1)
    return w


@lru_cache(maxsize=8)
def _branch_data(model: PairCorrelationModel):
    """Per-branch mode rates and summed coefficients, cached per model."""
    M = model.mode_cutoff
    m = np.arange(-M, M + 1)
    pref = math.sqrt(model.gamma_s * model.gamma_i * model.omega_s * model.omega_i)
    gsum = 0.5 * (model.gamma_s + model.gamma_i)
    data = {}
    for key, gamma, fsr, fsr_other in (
            ("s", model.gamma_s, model.fsr_s, model.fsr_i),
            ("i", model.gamma_i, model.fsr_i, model.fsr_s)):
        G = gamma / 2.0 + 1j * m * fsr
        coefs = pref * _partner_sums(gsum, fsr, fsr_other, M) * csinc(1j * math.pi * model.tau0 * G)
        data[key] = {
            "gamma": gamma,
            "fsr": fsr,
            "rates": G,
            "coefs": coefs,            # m = -M..M, for the exact scalar path
            "coefs_fold": np.ascontiguousarray(coefs[M:]),  # m = 0..M
        }
    return data


# --- evaluation --------------------------------------------------------------

def g2_cross(model: PairCorrelationModel, tau: float) -> float:
    """Unnormalized G2 at a single delay, exact mode-sum form.

    Positive tau means the signal photon is detected after the idler
    branch switch at tau0/2; the two branches carry the signal or idler
    mode rates respectively.
    """
    data = _branch_data(model)
    x = tau - model.tau0 / 2.0
    if x >= 0:
        b = data["s"]
        amp = np.sum(b["coefs"] * np.exp(-2 * np.pi * b["rates"] * x))
    else:
        b = data["i"]
        amp = np.sum(b["coefs"] * np.exp(2 * np.pi * b["rates"] * x))
    val = abs(amp) ** 2
    if not math.isfinite(val):
        raise FloatingPointError(f"correlation sum overflowed at tau={tau!r}")
    return val


def g2_values(model: PairCorrelationModel, taus) -> np.ndarray:
    """Unnormalized G2 on an array of delays (fast kernel path)."""
    taus = np.asarray(taus, dtype=float)
    data = _branch_data(model)
    x = taus - model.tau0 / 2.0
    out = np.empty(x.shape, dtype=float)
    pos = x >= 0
    for mask, key in ((pos, "s"), (~pos, "i")):
        if not mask.any():
            continue
        b = data[key]
        ax = np.abs(x[mask])
        amp = comb_amplitude(np.ascontiguousarray(ax), b["coefs_fold"], b["fsr"])
        out[mask] = (np.exp(-np.pi * b["gamma"] * ax) * amp) ** 2
    if not np.isfinite(out).all():
        raise FloatingPointError("correlation sum overflowed")
    return out


@dataclass(frozen=True)
class CorrelationCurve:
    """Sampled correlation curve, peak-normalized to 1."""

    taus: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if len(self.taus) != len(self.values):
            raise InvalidConfigError("taus and values must have equal length")

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("tau_seconds,normalized_value\n")
            for t, v in zip(self.taus, self.values):
                fh.write(f"{t:.12e},{v:.12e}\n")

    @staticmethod
    def read_csv(path) -> "CorrelationCurve":
        arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return CorrelationCurve(taus=arr[:, 0], values=arr[:, 1])


def g2_curve(model: PairCorrelationModel, tau_min: float, tau_max: float,
             step: float, hwp: "HwpConfig | None" = None) -> CorrelationCurve:
    """Sample the correlation on a regular grid and normalize to peak 1."""
    if not (tau_min < tau_max):
        raise InvalidConfigError(f"empty grid: tau_min={tau_min!r} >= tau_max={tau_max!r}")
    if not step > 0:
        raise InvalidConfigError(f"step must be positive, got {step!r}")
    if step > tau_max - tau_min:
        raise InvalidConfigError("step larger than the requested range")
    n = int(math.floor((tau_max - tau_min) / step)) + 1
    taus = tau_min + step * np.arange(n)
    vals = g2_values(model, taus) if hwp is None else g2_hwp_values(model, hwp, taus)
    peak = vals.max()
    if peak > 0:
        vals = vals / peak
    return CorrelationCurve(taus=taus, values=vals)


# --- half-wave plate leakage -------------------------------------------------

@dataclass(frozen=True)
class HwpConfig:
    """Intracavity half-wave plate detuning.

    ``delta_alpha`` is the angular offset from the ideal orientation in
    degrees.  One effective round trip comprises two plate passes.
    """

    delta_alpha: float
    passes_per_effective_round_trip: int = 2

    def __post_init__(self):
        if not 0.0 <= self.delta_alpha <= 45.0:
            raise InvalidConfigError(
                f"delta_alpha must be within [0, 45] degrees, got {self.delta_alpha!r}")
        if self.passes_per_effective_round_trip != 2:
            raise InvalidConfigError("passes_per_effective_round_trip is fixed at 2")

    def rotation_per_pass(self) -> float:
        """Polarization rotation per plate pass, radians (pi/2 when ideal)."""
        return math.pi / 2.0 + 2.0 * math.radians(self.delta_alpha)


def jones_rotation(angle: float) -> np.ndarray:
    return np.array([[math.cos(angle), -math.sin(angle)],
                     [math.sin(angle), math.cos(angle)]])


def polarization_sequence(hwp: HwpConfig, n_passes: int) -> np.ndarray:
    """Jones vectors after 0..n successive plate passes, starting from H."""
    rot = jones_rotation(hwp.rotation_per_pass())
    seq = np.empty((n_passes + 1, 2))
    v = np.array([1.0, 0.0])
    seq[0] = v
    for k in range(1, n_passes + 1):
        v = rot @ v
        seq[k] = v
    return seq


def flip_trick_amplitudes(hwp: HwpConfig, n_physical_round_trips: int) -> tuple[float, float]:
    """Squared projections after n plate passes onto the ideal-sequence
    polarization (amp_same) and its orthogonal leak mode (amp_flipped).

    The ideal sequence rotates by exactly 90 degrees per pass; a detuned
    plate rotates by 90 + 2*delta_alpha, so the state deviates from the
    ideal one by 2*n*delta_alpha after n passes: amp_same =
    cos^2(2*n*delta_alpha), amp_flipped = sin^2(2*n*delta_alpha).  The
    leak peaks when n*2*delta_alpha reaches 90 degrees, n =
    45/delta_alpha.  The projections sum to 1 (rotations are unitary);
    this closed form equals the n-fold Jones matrix product with the
    common n*90-degree rotation reduced exactly.
    """
    n = n_physical_round_trips
    if n < 0:
        raise InvalidConfigError("n_physical_round_trips must be >= 0")
    phi = 2.0 * n * math.radians(hwp.delta_alpha)
    return math.cos(phi) ** 2, math.sin(phi) ** 2


def _slot_weights(model, hwp, taus):
    """Coincidence weight per half-spacing slot, plus slot metadata.

    Returns (weights, slot_index, t_phys, branch_gamma) arrays.  The
    weight cos^2(n * (pi/2 + 2*delta_alpha)) equals amp_same for even n
    and amp_flipped for odd n: only leaked photons coincide at odd slots.
    """
    x = np.asarray(taus, dtype=float) - model.tau0 / 2.0
    pos = x >= 0
    t_phys = np.where(pos, 0.5 / model.fsr_s, 0.5 / model.fsr_i)
    gamma = np.where(pos, model.gamma_s, model.gamma_i)
    n = np.rint(x / t_phys).astype(np.int64)
    weights = slot_weight(hwp, n)
    return weights, n, t_phys, gamma


def slot_weight(hwp: HwpConfig, n):
    """Coincidence weight of comb slot n: the retained amplitude at even
    slots, the leaked amplitude at odd ones (cos^2(n*(pi/2 + 2*da))
    with the n*pi/2 part reduced exactly, so ideal alignment zeroes the
    odd slots identically)."""
    n = np.asarray(n)
    phi = (2.0 * math.radians(hwp.delta_alpha)) * n
    odd = (n % 2) != 0
    w = np.where(odd, np.sin(phi), np.cos(phi)) ** 2
    return w if w.ndim else float(w)


def g2_hwp_values(model: PairCorrelationModel, hwp: HwpConfig, taus) -> np.ndarray:
    """Correlation including plate-leak peaks at odd half-spacing slots.

    Even slots are the unmodified comb scaled by the retained amplitude;
    odd-slot peaks reuse the neighbouring even peak's shape shifted by
    half a round trip, rescaled to the envelope at their own position and
    weighted by the leak amplitude.  At delta_alpha = 0 this reduces
    exactly to the plain comb with zero odd peaks.
    """
    taus = np.asarray(taus, dtype=float)
    weights, n, t_phys, gamma = _slot_weights(model, hwp, taus)
    odd = (n % 2) != 0
    out = np.zeros(taus.shape, dtype=float)
    if (~odd).any():
        out[~odd] = g2_values(model, taus[~odd])
    live = odd & (weights > 0)
    if live.any():
        shift = np.sign(n[live]) * t_phys[live]
        borrowed = g2_values(model, taus[live] - shift)
        out[live] = borrowed * np.exp(-2 * np.pi * gamma[live] * t_phys[live])
    return out * weights


def g2_with_hwp(model: PairCorrelationModel, hwp: HwpConfig, tau: float) -> float:
    """Scalar version of :func:`g2_hwp_values`."""
    return float(g2_hwp_values(model, hwp, np.array([tau]))[0])
