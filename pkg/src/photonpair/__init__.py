"""photonpair: simulator and analysis toolkit for a cavity-enhanced
narrowband photon-pair source.

Submodules
----------
cavity       spectral cavity quantities (FSR, finesse, linewidth, escape)
correlation  two-photon cross-correlation comb and waveplate-leak model
timetags     synthetic detector tick streams and delay sampling
ptag         binary/CSV time-tag file formats
analysis     streaming coincidence correlator and bandwidth fits
cli          command-line front end
"""

from ._kernels import BACKEND
from .cavity import (CavityConfig, MirrorSet, PhaseMatchEnvelope, SpectralParams,
                     derive_escape_efficiency, derive_finesse, derive_fsr,
                     derive_spectral_params, load_config, phase_match_weight,
                     reference_config)
from .correlation import (CorrelationCurve, HwpConfig, PairCorrelationModel,
                          default_mode_cutoff, flip_trick_amplitudes, g2_cross,
                          g2_curve, g2_values, g2_with_hwp, model_from_cavity)
from .analysis import (BandwidthFit, FullModelFit, Histogram, correlate,
                       correlate_stream, fit_envelope, fit_full_model)
from .timetags import (DelaySampler, DetectorConfig, SimRun, TimeTagRecord,
                       TimeTagStream, sample_pair_delay, simulate_stream)
from .ptag import read_csv_tags, read_ptag, write_csv_tags, write_ptag

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "__version__",
    "CavityConfig", "MirrorSet", "PhaseMatchEnvelope", "SpectralParams",
    "derive_fsr", "derive_finesse", "derive_escape_efficiency",
    "derive_spectral_params", "phase_match_weight", "load_config",
    "reference_config",
    "PairCorrelationModel", "HwpConfig", "CorrelationCurve",
    "g2_cross", "g2_values", "g2_curve", "g2_with_hwp",
    "flip_trick_amplitudes", "model_from_cavity", "default_mode_cutoff",
    "DetectorConfig", "SimRun", "TimeTagRecord", "TimeTagStream", "DelaySampler",
    "sample_pair_delay", "simulate_stream",
    "read_ptag", "write_ptag", "read_csv_tags", "write_csv_tags",
    "Histogram", "BandwidthFit", "FullModelFit",
    "correlate", "correlate_stream", "fit_envelope", "fit_full_model",
]
