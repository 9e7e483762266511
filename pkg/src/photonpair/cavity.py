"""Spectral properties of the bow-tie enhancement cavities.

Everything measurable about a cavity (free spectral range, finesse,
linewidth, escape efficiency) is derived here from a small geometric and
coating description.  Two reference configurations matching the shipped
source are bundled as JSON (``pdc_cavity.json``, ``shg_cavity.json``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict
from importlib import resources

from .errors import InvalidConfigError

SPEED_OF_LIGHT = 299792458.0  # m/s

# Half-power point of sinc^2: (sin x / x)^2 = 1/2.
_SINC_SQ_HALF_POWER = 1.39155737825151

FUNDAMENTAL = "fundamental"
PUMP = "pump"
_ROLES = (FUNDAMENTAL, PUMP)


def _check_fraction(name, value, lo=0.0, hi=1.0, lo_open=True, hi_open=False):
    bad_lo = value <= lo if lo_open else value < lo
    bad_hi = value >= hi if hi_open else value > hi
    if bad_lo or bad_hi:
        raise InvalidConfigError(f"{name} = {value!r} outside valid range")


@dataclass(frozen=True)
class MirrorSet:
    """Power reflectivities of the four cavity mirrors, per wavelength.

    M1 is the pump in-coupler, M4 the fundamental out-coupler; M2/M3 are
    the curved high reflectors.
    """

    r1_pump: float
    r2: float
    r3: float
    r4_pump: float
    r1_fund: float
    r2_fund: float
    r3_fund: float
    r4_fund: float

    def __post_init__(self):
        for name in ("r1_pump", "r2", "r3", "r4_pump",
                     "r1_fund", "r2_fund", "r3_fund", "r4_fund"):
            _check_fraction(f"mirrors.{name}", getattr(self, name))

    def outcoupler_transmission(self, wavelength_role: str) -> float:
        """Transmission of the mirror photons leave through (M4 at the
        fundamental, M1 at the pump)."""
        if wavelength_role == FUNDAMENTAL:
            return 1.0 - self.r4_fund
        return 1.0 - self.r1_pump


@dataclass(frozen=True)
class CavityConfig:
    """Physical cavity description.

    ``round_trip_length`` is the effective optical round-trip length in
    meters, calibrated so that c/L reproduces the measured pump FSR (it
    folds in refractive path corrections).  ``flip_trick`` marks an
    intracavity half-wave plate that swaps the photon polarizations every
    physical round trip, which doubles the effective cavity length for
    the fundamental only.  Internal losses are quoted per effective round
    trip and exclude the out-coupler transmission.
    """

    round_trip_length: float
    flip_trick: bool
    mirrors: MirrorSet
    internal_loss_fund: float
    internal_loss_pump: float
    crystal_length: float = 0.025
    group_index_mismatch: float = 0.09
    name: str = ""

    def __post_init__(self):
        if not self.round_trip_length > 0:
            raise InvalidConfigError(
                f"round_trip_length must be positive, got {self.round_trip_length!r}")
        if self.crystal_length < 0:
            raise InvalidConfigError("crystal_length must be >= 0")
        for attr in ("internal_loss_fund", "internal_loss_pump"):
            _check_fraction(attr, getattr(self, attr), lo_open=False, hi_open=True)

    def internal_loss(self, wavelength_role: str) -> float:
        return (self.internal_loss_fund if wavelength_role == FUNDAMENTAL
                else self.internal_loss_pump)

    def signal_idler_delay(self) -> float:
        """Group delay between the orthogonally polarized photons
        accrued in one crystal transit, seconds."""
        return self.crystal_length * self.group_index_mismatch / SPEED_OF_LIGHT


@dataclass(frozen=True)
class SpectralParams:
    """Derived spectral quantities for one wavelength role."""

    fsr: float                    # Hz
    finesse: float
    linewidth_fwhm: float         # Hz, = fsr / finesse
    total_round_trip_loss: float
    escape_efficiency: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PhaseMatchEnvelope:
    """Temperature acceptance of the nonlinear crystal."""

    t_center: float   # degrees C
    fwhm: float       # Kelvin

    def __post_init__(self):
        if not self.fwhm > 0:
            raise InvalidConfigError(f"phase-match fwhm must be > 0, got {self.fwhm!r}")


def derive_fsr(config: CavityConfig, wavelength_role: str) -> float:
    """Free spectral range in Hz for the given wavelength role.

    The half-wave plate doubles the effective path for the fundamental,
    halving its FSR; the pump is unaffected.
    """
    _require_role(wavelength_role)
    length = config.round_trip_length
    if wavelength_role == FUNDAMENTAL and config.flip_trick:
        length *= 2.0
    return SPEED_OF_LIGHT / length


def derive_finesse(total_loss: float) -> float:
    """Finesse from the total power loss per (effective) round trip.

    Uses the low-loss form 2*pi/loss, which is accurate to better than
    the coating tolerances for the percent-level losses handled here.
    """
    if not 0.0 < total_loss < 1.0:
        raise InvalidConfigError(f"total round-trip loss {total_loss!r} outside (0, 1)")
    return 2.0 * math.pi / total_loss


def derive_escape_efficiency(outcoupler_transmission: float, total_loss: float) -> float:
    """Probability that an intracavity photon leaves through the
    out-coupler rather than being lost elsewhere."""
    if not 0.0 < outcoupler_transmission:
        raise InvalidConfigError("outcoupler transmission must be positive")
    if not total_loss < 1.0:
        raise InvalidConfigError(f"total loss {total_loss!r} must be < 1")
    if outcoupler_transmission > total_loss:
        raise InvalidConfigError(
            f"outcoupler transmission {outcoupler_transmission!r} exceeds "
            f"total loss {total_loss!r}")
    return outcoupler_transmission / total_loss


def derive_spectral_params(config: CavityConfig, wavelength_role: str) -> SpectralParams:
    """All derived spectral quantities for one wavelength role."""
    _require_role(wavelength_role)
    fsr = derive_fsr(config, wavelength_role)
    transmission = config.mirrors.outcoupler_transmission(wavelength_role)
    total_loss = config.internal_loss(wavelength_role) + transmission
    finesse = derive_finesse(total_loss)
    return SpectralParams(
        fsr=fsr,
        finesse=finesse,
        linewidth_fwhm=fsr / finesse,
        total_round_trip_loss=total_loss,
        escape_efficiency=derive_escape_efficiency(transmission, total_loss),
    )


def phase_match_weight(env: PhaseMatchEnvelope, temperature: float) -> float:
    """Relative conversion weight sinc^2 at a crystal temperature (deg C).

    Scaled so the weight is exactly 0.5 at ``t_center +- fwhm/2``.
    """
    x = _SINC_SQ_HALF_POWER * (temperature - env.t_center) / (env.fwhm / 2.0)
    if x == 0.0:
        return 1.0
    return (math.sin(x) / x) ** 2


def _require_role(role):
    if role not in _ROLES:
        raise InvalidConfigError(f"wavelength_role must be one of {_ROLES}, got {role!r}")


# --- JSON configuration I/O -------------------------------------------------

def config_to_dict(config: CavityConfig) -> dict:
    d = asdict(config)
    d["mirrors"] = asdict(config.mirrors)
    return d


def config_from_dict(d: dict) -> CavityConfig:
    try:
        mirrors = MirrorSet(**d["mirrors"])
        return CavityConfig(
            round_trip_length=float(d["round_trip_length"]),
            flip_trick=bool(d["flip_trick"]),
            mirrors=mirrors,
            internal_loss_fund=float(d["internal_loss_fund"]),
            internal_loss_pump=float(d["internal_loss_pump"]),
            crystal_length=float(d.get("crystal_length", 0.025)),
            group_index_mismatch=float(d.get("group_index_mismatch", 0.09)),
            name=str(d.get("name", "")),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidConfigError(f"bad cavity config: {exc}") from exc


def save_config(config: CavityConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(config), fh, indent=2)
        fh.write("\n")


def load_config(path) -> CavityConfig:
    """Load a cavity config from a JSON file or a bundled name
    ('pdc' / 'shg')."""
    name = str(path)
    if name in ("pdc", "shg"):
        return reference_config(name)
    try:
        with open(path) as fh:
            d = json.load(fh)
    except OSError as exc:
        raise InvalidConfigError(f"cannot read cavity config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(f"invalid JSON in {path!r}: {exc}") from exc
    return config_from_dict(d)


def reference_config(name: str) -> CavityConfig:
    """Bundled reference configuration: 'pdc' or 'shg'."""
    fname = {"pdc": "pdc_cavity.json", "shg": "shg_cavity.json"}.get(name)
    if fname is None:
        raise InvalidConfigError(f"unknown reference config {name!r}")
    text = resources.files("photonpair.configs").joinpath(fname).read_text()
    return config_from_dict(json.loads(text))
