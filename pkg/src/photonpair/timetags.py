"""Synthetic detector time-tag streams for the pair source.

Pairs are emitted as a homogeneous Poisson process; each pair gets a
signal-idler delay drawn from the correlation comb, then the detector
chain applies efficiency, Gaussian jitter, dark counts and quantization
to integer ticks.  Streams are bit-reproducible for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np

from .correlation import HwpConfig, PairCorrelationModel, g2_values, slot_weight
from .errors import CapacityError, InvalidConfigError

DEFAULT_TICK = 100.1e-12  # s

_MAX_TICKS = 2 ** 62
_MAX_EVENTS = 2 ** 31


class TimeTagRecord(NamedTuple):
    """One detection event: channel 0 (signal) or 1 (idler), integer ticks."""

    channel: int
    ticks: int


@dataclass(frozen=True)
class DetectorConfig:
    """Detection chain imperfections (plumbing defaults, all overridable)."""

    efficiency_s: float = 1.0
    efficiency_i: float = 1.0
    dark_rate_s: float = 100.0     # Hz
    dark_rate_i: float = 100.0     # Hz
    jitter_sigma: float = 350e-12  # s, Gaussian per detection

    def __post_init__(self):
        for attr in ("efficiency_s", "efficiency_i"):
            v = getattr(self, attr)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfigError(f"{attr} must be in [0, 1], got {v!r}")
        for attr in ("dark_rate_s", "dark_rate_i", "jitter_sigma"):
            if getattr(self, attr) < 0:
                raise InvalidConfigError(f"{attr} must be >= 0")


@dataclass(frozen=True)
class SimRun:
    """One simulated acquisition."""

    pair_rate: float       # detected-pair rate before detector losses, Hz
    duration: float        # s
    seed: int
    tick_duration: float = DEFAULT_TICK

    def __post_init__(self):
        if self.pair_rate < 0:
            raise InvalidConfigError("pair_rate must be >= 0")
        if not self.duration > 0:
            raise InvalidConfigError("duration must be > 0")
        if not self.tick_duration > 0:
            raise InvalidConfigError("tick_duration must be > 0")


@dataclass(eq=False)
class TimeTagStream:
    """Two channels of sorted integer-tick detection events.

    Channel 0 is the signal, channel 1 the idler.
    """

    tick_duration: float
    signal_ticks: np.ndarray
    idler_ticks: np.ndarray

    def channel(self, index: int) -> np.ndarray:
        if index == 0:
            return self.signal_ticks
        if index == 1:
            return self.idler_ticks
        raise InvalidConfigError(f"channel must be 0 or 1, got {index!r}")

    def counts(self) -> tuple[int, int]:
        return len(self.signal_ticks), len(self.idler_ticks)

    def records(self) -> Iterator[TimeTagRecord]:
        """All events in chronological order (ties: signal first)."""
        n_s, n_i = self.counts()
        ch = np.concatenate([np.zeros(n_s, np.uint8), np.ones(n_i, np.uint8)])
        tk = np.concatenate([self.signal_ticks, self.idler_ticks])
        for j in np.lexsort((ch, tk)):
            yield TimeTagRecord(int(ch[j]), int(tk[j]))


# --- delay sampling ----------------------------------------------------------

def _profile_grid(half_lo, half_hi, tau0, gamma):
    """Sampling grid for one slot profile: coarse across the slot, fine
    around the peak core (width ~ tau0) and the envelope decay scale."""
    decay = 1.0 / (2.0 * math.pi * gamma)
    coarse = min(10e-12, max(decay / 20.0, 0.2e-12))
    width = half_lo + half_hi
    coarse = min(coarse, width / 64.0)
    pts = [np.arange(-half_lo, half_hi + coarse / 2, coarse)]
    core = max(16.0 * tau0, 60e-12)
    if core < width:
        fine = max(tau0 / 16.0, 0.05e-12)
        pts.append(np.arange(-min(core, half_lo), min(core, half_hi) + fine / 2, fine))
    grid = np.unique(np.concatenate(pts))
    return np.clip(grid, -half_lo, half_hi)


class _SlotProfile:
    """Tabulated within-slot density with exact piecewise-linear sampling."""

    def __init__(self, grid, values):
        self.grid = grid
        self.values = np.maximum(values, 0.0)
        seg = 0.5 * (self.values[1:] + self.values[:-1]) * np.diff(grid)
        self.mass = float(seg.sum())
        self.cum = np.concatenate(([0.0], np.cumsum(seg)))

    def sample(self, u):
        """Map uniforms in [0,1) to offsets distributed as the profile."""
        r = u * self.mass
        j = np.clip(np.searchsorted(self.cum, r, side="right") - 1, 0, len(self.grid) - 2)
        x0 = self.grid[j]
        dx = self.grid[j + 1] - x0
        f0 = self.values[j]
        f1 = self.values[j + 1]
        rr = r - self.cum[j]
        slope = (f1 - f0) / dx
        t = np.empty_like(rr)
        lin = np.abs(slope) * dx < 1e-12 * np.maximum(f0, f1)
        favg = np.maximum(0.5 * (f0 + f1), 1e-300)
        t[lin] = rr[lin] / favg[lin]
        q = ~lin
        disc = np.maximum(f0[q] ** 2 + 2.0 * slope[q] * rr[q], 0.0)
        t[q] = (np.sqrt(disc) - f0[q]) / slope[q]
        return x0 + np.clip(t, 0.0, dx)


class DelaySampler:
    """Draws signal-idler delays from the (plate-weighted) correlation comb.

    Two stages: the slot index n (peaks at n times half the effective
    round-trip time) comes from the discrete envelope distribution; the
    offset within the slot comes from a tabulated peak profile.  Peak
    shapes repeat exactly along the comb up to the envelope factor, so
    one profile per side suffices for |n| >= 2.
    """

    def __init__(self, model: PairCorrelationModel, hwp: HwpConfig | None = None,
                 window: float | None = None):
        self.model = model
        self.hwp = hwp if hwp is not None else HwpConfig(0.0)
        if window is None:
            window = 5.0 / (2.0 * math.pi * min(model.gamma_s, model.gamma_i))
        self.window = window
        self._build()

    def _build(self):
        m = self.model
        center = m.tau0 / 2.0
        t_r = 0.5 / m.fsr_s
        t_l = 0.5 / m.fsr_i
        n_r = max(1, int(math.ceil(self.window / t_r)))
        n_l = max(1, int(math.ceil(self.window / t_l)))

        def prof(tau_center, half_lo, half_hi, gamma):
            grid = _profile_grid(half_lo, half_hi, m.tau0, gamma)
            return _SlotProfile(grid, g2_values(m, tau_center + grid))

        p_center = prof(center, t_l / 2.0, t_r / 2.0, max(m.gamma_s, m.gamma_i))
        p_r1 = prof(center, t_r / 2.0, t_r / 2.0, m.gamma_s)   # borrow shape, slot +1
        p_r2 = prof(center + 2.0 * t_r, t_r / 2.0, t_r / 2.0, m.gamma_s)
        p_l1 = prof(center, t_l / 2.0, t_l / 2.0, m.gamma_i)
        p_l2 = prof(center - 2.0 * t_l, t_l / 2.0, t_l / 2.0, m.gamma_i)

        slots = np.arange(-n_l, n_r + 1)
        weights = slot_weight(self.hwp, slots)
        env = np.where(slots >= 0,
                       np.exp(-2.0 * np.pi * m.gamma_s * slots * t_r),
                       np.exp(+2.0 * np.pi * m.gamma_i * slots * t_l))
        shape_mass = np.empty(len(slots))
        for j, n in enumerate(slots):
            if n == 0:
                shape_mass[j] = p_center.mass
            elif n > 0:
                base = p_r1 if abs(n) == 1 else p_r2
                # profiles carry their own envelope at the tabulation slot
                ref = math.exp(-2.0 * math.pi * m.gamma_s * (0 if abs(n) == 1 else 2) * t_r)
                shape_mass[j] = base.mass / ref
            else:
                base = p_l1 if abs(n) == 1 else p_l2
                ref = math.exp(-2.0 * math.pi * m.gamma_i * (0 if abs(n) == 1 else 2) * t_l)
                shape_mass[j] = base.mass / ref
        masses = weights * env * shape_mass
        total = masses.sum()
        if not total > 0:
            raise InvalidConfigError("delay density has zero mass in the window")
        self.slots = slots
        self.slot_masses = masses / total
        self._cum = np.cumsum(self.slot_masses)
        self._profiles = (p_center, p_r1, p_r2, p_l1, p_l2)
        self._t_r, self._t_l, self._center = t_r, t_l, center

    def slot_probability(self, n: int) -> float:
        j = np.searchsorted(self.slots, n)
        if j >= len(self.slots) or self.slots[j] != n:
            return 0.0
        return float(self.slot_masses[j])

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` delays (seconds)."""
        u_slot = rng.random(size)
        u_off = rng.random(size)
        j = np.searchsorted(self._cum, u_slot, side="right")
        j = np.clip(j, 0, len(self.slots) - 1)
        n = self.slots[j]
        p_center, p_r1, p_r2, p_l1, p_l2 = self._profiles
        out = np.empty(size)
        for prof, mask in ((p_center, n == 0),
                           (p_r1, n == 1), (p_r2, n >= 2),
                           (p_l1, n == -1), (p_l2, n <= -2)):
            if mask.any():
                out[mask] = prof.sample(u_off[mask])
        t_phys = np.where(n >= 0, self._t_r, self._t_l)
        return self._center + n * t_phys + out


@lru_cache(maxsize=4)
def _cached_sampler(model, hwp, window):
    return DelaySampler(model, hwp, window)


def sample_pair_delay(model: PairCorrelationModel, hwp: HwpConfig,
                      rng: np.random.Generator, size: int | None = None,
                      window: float | None = None):
    """Delay draws from the normalized comb density over +-window."""
    sampler = _cached_sampler(model, hwp, window)
    out = sampler.sample(rng, 1 if size is None else size)
    return float(out[0]) if size is None else out


# --- stream generation -------------------------------------------------------

def _quantize(times, tick):
    """Round half-up to integer ticks."""
    return np.floor(times / tick + 0.5).astype(np.int64)


def simulate_stream(run: SimRun, model: PairCorrelationModel,
                    hwp: HwpConfig | None = None,
                    det: DetectorConfig | None = None,
                    window: float | None = None) -> TimeTagStream:
    """Generate a two-channel tick stream; identical seed gives identical
    output byte for byte."""
    det = det if det is not None else DetectorConfig()
    hwp = hwp if hwp is not None else HwpConfig(0.0)
    if run.duration / run.tick_duration > _MAX_TICKS:
        raise CapacityError("duration exceeds representable tick range")
    expected = run.duration * (2.0 * run.pair_rate + det.dark_rate_s + det.dark_rate_i)
    if expected > _MAX_EVENTS:
        raise CapacityError(f"expected event count {expected:.3g} exceeds capacity")

    sampler = _cached_sampler(model, hwp, window)
    rng = np.random.default_rng(run.seed)

    n_pairs = int(rng.poisson(run.pair_rate * run.duration))
    emit = np.sort(rng.random(n_pairs) * run.duration)
    delays = sampler.sample(rng, n_pairs)
    keep_s = rng.random(n_pairs) < det.efficiency_s
    keep_i = rng.random(n_pairs) < det.efficiency_i

    s_times = emit[keep_s]
    i_times = (emit + delays)[keep_i]
    if det.jitter_sigma > 0:
        s_times = s_times + rng.normal(0.0, det.jitter_sigma, len(s_times))
        i_times = i_times + rng.normal(0.0, det.jitter_sigma, len(i_times))

    chans = []
    for times, dark_rate in ((s_times, det.dark_rate_s), (i_times, det.dark_rate_i)):
        if dark_rate > 0:
            n_dark = int(rng.poisson(dark_rate * run.duration))
            times = np.concatenate([times, rng.random(n_dark) * run.duration])
        times = times[(times >= 0.0) & (times < run.duration)]
        chans.append(np.sort(_quantize(times, run.tick_duration)))

    return TimeTagStream(tick_duration=run.tick_duration,
                         signal_ticks=chans[0], idler_ticks=chans[1])
