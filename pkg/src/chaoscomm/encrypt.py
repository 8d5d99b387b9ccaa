"""Message embedding: chaos masking (CMA) multiplies the transmitted
power by the sinusoid outside the emitter; chaos modulation (CMO)
injects it through the bias current and so perturbs the chaos itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .laser import DriveWaveform, LaserParams, SimConfig, TimeTrace, integrate_laser


class Scheme(str, Enum):
    CMA = "cma"
    CMO = "cmo"


@dataclass(frozen=True)
class MessageSpec:
    """Sinusoidal message: frequency in GHz, modulation depth in [0, 1)."""

    freq: float
    md: float
    scheme: Scheme = Scheme.CMA
    phase: float = 0.0

    def __post_init__(self):
        if self.freq <= 0:
            raise ValueError("message frequency must be positive")
        if not (0 <= self.md < 1):
            raise ValueError("modulation depth must lie in [0, 1)")


def encrypt_cma(carrier: TimeTrace, msg: MessageSpec) -> TimeTrace:
    """P(t) * (1 + MD * sin(2*pi*f*t)) applied sample-wise."""
    if msg.scheme is not Scheme.CMA:
        raise ValueError("encrypt_cma requires a CMA message spec")
    t = carrier.times_ns
    mod = 1.0 + msg.md * np.sin(2 * math.pi * msg.freq * t + msg.phase)
    return TimeTrace(carrier.samples * mod, carrier.dt, carrier.t0)


def encrypt_cmo(params: LaserParams, config: SimConfig,
                msg: MessageSpec) -> TimeTrace:
    """Integrate the laser with I(t) = I_b * (1 + MD * sin(2*pi*f*t)).

    The modulation is on for the whole simulated span (transient
    included): the modulated emitter is treated as a stationary source.
    """
    if msg.scheme is not Scheme.CMO:
        raise ValueError("encrypt_cmo requires a CMO message spec")
    drive = DriveWaveform(i_bias=params.i_bias, md=msg.md,
                          freq=msg.freq, phase=msg.phase)
    return integrate_laser(params, config, drive)
