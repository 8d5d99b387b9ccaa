"""Chaotic optical communication simulator and time-frequency
eavesdropping toolkit: delayed-feedback laser carrier generation,
CMA/CMO message embedding, and the scalogram-ratio detection plus
band-pass extraction attack.
"""

from .attack import (AttackConfig, DetectionReport, ExtractionResult,
                     calibrate_threshold, detect, extract, extract_at)
from .dsp import (BpfSpec, FilterRealization, PowerSpectrum, apply_bpf,
                  bandwidth, design_bpf, power_spectrum, snr)
from .encrypt import MessageSpec, Scheme, encrypt_cma, encrypt_cmo
from .laser import (DriveWaveform, InitialState, IntegrationDiverged,
                    LaserParams, SimConfig, TimeTrace, integrate_laser,
                    perturbed_init)
from .tfa import (FrequencyGrid, MsrCurve, Scalogram, WaveletParams, cwt,
                  cwt_direct, msr, psl)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig", "BpfSpec", "DetectionReport", "DriveWaveform",
    "ExtractionResult", "FilterRealization", "FrequencyGrid", "InitialState",
    "IntegrationDiverged", "LaserParams", "MessageSpec", "MsrCurve",
    "PowerSpectrum", "Scalogram", "Scheme", "SimConfig", "TimeTrace",
    "WaveletParams", "apply_bpf", "bandwidth", "calibrate_threshold", "cwt",
    "cwt_direct", "design_bpf", "detect", "encrypt_cma", "encrypt_cmo",
    "extract", "extract_at", "integrate_laser", "msr", "perturbed_init",
    "power_spectrum", "psl", "snr",
]
