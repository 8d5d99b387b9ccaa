"""Delayed-feedback semiconductor laser simulation.

Integrates the Lang-Kobayashi rate equations for the photon variable
S(t), optical phase phi(t) and carrier density N(t) with a single
external-cavity delay, producing the chaotic power traces used as the
communication carrier.

Unit conventions: time in ns, densities in um^-3, currents in mA,
wavelength in nm.  The recorded "power" is S(t) itself; every
downstream statistic in this package is ratio-based, so the absolute
scale is irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._kernels import ELEMENTARY_CHARGE, integrate_loop

SPEED_OF_LIGHT_NM_PER_NS = 2.99792458e8


class IntegrationDiverged(RuntimeError):
    """Raised when the laser state goes non-finite during integration."""

    def __init__(self, t_ns: float):
        self.t_ns = t_ns
        super().__init__(f"laser integration diverged at t = {t_ns:.4f} ns")


@dataclass(frozen=True)
class LaserParams:
    """Physical constants of the emitter laser.

    Defaults reproduce the single-mode edge-emitter operating point used
    throughout this package (threshold current 12 mA, 4 ns external
    cavity, weak 1% external reflector).
    """

    beta: float = 1e-5          # spontaneous emission factor
    gamma_conf: float = 0.4     # optical confinement factor
    g: float = 2.125e-3         # differential gain (um^3/ns)
    n0: float = 4e5             # transparency carrier density (um^-3)
    eps: float = 3e-5           # gain saturation (um^3)
    tau_n: float = 2.0          # carrier lifetime (ns)
    tau_p: float = 2e-3         # photon lifetime (ns)
    tau_in: float = 9e-3        # intracavity round-trip time (ns)
    tau_fb: float = 4.0         # feedback delay (ns)
    r: float = 0.3              # laser-cavity amplitude reflectivity
    r_ext: float = 0.01         # external-reflector amplitude reflectivity
    alpha: float = 5.5          # linewidth enhancement factor
    lambda0: float = 1550.0     # central wavelength (nm)
    i_th: float = 12.0          # threshold current (mA)
    i_bias: float = 42.0        # operating bias current (mA)
    volume: float = 150.0       # active layer volume (um^3)
    q: float = ELEMENTARY_CHARGE

    def __post_init__(self):
        for name in ("tau_n", "tau_p", "tau_in", "tau_fb", "volume", "lambda0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not (0 <= self.r < 1):
            raise ValueError("r must be in [0, 1)")
        if not (0 <= self.r_ext < 1):
            raise ValueError("r_ext must be in [0, 1)")
        if self.r == 0 and self.r_ext > 0:
            raise ValueError("feedback strength undefined for r = 0 with r_ext > 0")

    @property
    def kappa(self) -> float:
        """Feedback strength (1 - r^2) * r_ext / r."""
        if self.r_ext == 0:
            return 0.0
        return (1.0 - self.r ** 2) * self.r_ext / self.r

    @property
    def feedback_phase(self) -> float:
        """Constant part of the phase recursion, 2*pi*tau*c/lambda mod 2*pi."""
        cycles = self.tau_fb * SPEED_OF_LIGHT_NM_PER_NS / self.lambda0
        return 2.0 * math.pi * math.fmod(cycles, 1.0)

    def pump_rate(self, current_ma: float) -> float:
        """Carrier injection I/(qV) in um^-3 ns^-1 for a current in mA."""
        return current_ma * 1e-12 / (self.q * self.volume)


@dataclass(frozen=True)
class InitialState:
    """Laser state at t = 0; held constant over [-tau_fb, 0] as history."""

    s: float = 1.0
    n: float = 4.4e5        # 1.1 * default transparency density
    phi: float = 0.0

    def __post_init__(self):
        if self.s <= 0:
            raise ValueError("initial photon variable must be positive")


@dataclass(frozen=True)
class SimConfig:
    """Integration control: fixed-step RK4 with decimated recording."""

    dt: float = 1.0             # step (ps)
    duration: float = 440.0     # total simulated time (ns)
    transient: float = 40.0     # discarded initial span (ns)
    record_stride: int = 10     # samples per recorded point
    init: InitialState = field(default_factory=InitialState)
    s_floor_frac: float = 1e-6  # clamp S at this fraction of its running mean

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not (0 <= self.transient < self.duration):
            raise ValueError("transient must lie in [0, duration)")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    @property
    def dt_ns(self) -> float:
        return self.dt * 1e-3

    def delay_steps(self, params: LaserParams) -> int:
        ratio = params.tau_fb / self.dt_ns
        steps = round(ratio)
        if steps < 1 or abs(ratio - steps) > 1e-9 * max(1.0, steps):
            raise ValueError(
                f"dt = {self.dt} ps does not divide the feedback delay "
                f"{params.tau_fb} ns evenly")
        return steps


@dataclass(frozen=True)
class DriveWaveform:
    """Bias current rule I(t) = i_bias * (1 + md * sin(2*pi*freq*t + phase)).

    The default (md = 0) is the constant operating bias.  freq in GHz,
    t in ns measured from simulation start.
    """

    i_bias: float
    md: float = 0.0
    freq: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.i_bias < 0:
            raise ValueError("bias current must be non-negative")
        if abs(self.md) > 1:
            raise ValueError("|md| > 1 would drive the current negative")

    def current(self, t_ns):
        return self.i_bias * (1.0 + self.md * np.sin(
            2.0 * math.pi * self.freq * t_ns + self.phase))


@dataclass(frozen=True)
class TimeTrace:
    """Uniformly sampled real power sequence.

    dt is the sample interval in ps, t0 the time of the first sample in
    ns.  transient_samples flags a leading span that carries filter
    start-up artifacts (zero for raw simulator output).
    """

    samples: np.ndarray
    dt: float
    t0: float = 0.0
    transient_samples: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("trace must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("trace contains non-finite samples")
        if self.dt <= 0:
            raise ValueError("sample interval must be positive")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def dt_ns(self) -> float:
        return self.dt * 1e-3

    @property
    def sample_rate_gsps(self) -> float:
        """Sample rate in GS/s (equivalently GHz)."""
        return 1e3 / self.dt

    @property
    def times_ns(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.dt_ns

    @property
    def duration_ns(self) -> float:
        return self.samples.size * self.dt_ns

    def steady(self) -> "TimeTrace":
        """Trace with the flagged start-up span removed."""
        if self.transient_samples == 0:
            return self
        return TimeTrace(self.samples[self.transient_samples:], self.dt,
                         self.t0 + self.transient_samples * self.dt_ns)


def perturbed_init(base: InitialState, seed: int) -> InitialState:
    """Seed-derived initial condition for run-to-run independence.

    Perturbs S(0) and N(0) by a few percent; after the transient the
    attractor statistics are seed-independent but individual chaotic
    trajectories decorrelate completely.
    """
    rng = np.random.default_rng(seed)
    return replace(base,
                   s=base.s * (1.0 + 0.5 * rng.uniform(-1, 1)),
                   n=base.n * (1.0 + 0.05 * rng.uniform(-1, 1)),
                   phi=rng.uniform(0, 2 * math.pi))


def integrate_laser(params: LaserParams, config: SimConfig,
                    drive: DriveWaveform | None = None) -> TimeTrace:
    """Integrate the rate equations and return the recorded power trace.

    The trace starts at t = config.transient (the discarded span covers
    the relaxation onto the chaotic attractor) and holds
    floor((duration - transient) / (dt * record_stride)) samples.

    Raises IntegrationDiverged if the state goes non-finite.
    """
    if drive is None:
        drive = DriveWaveform(i_bias=params.i_bias)
    dt_ns = config.dt_ns
    d = config.delay_steps(params)
    n_steps = int(round(config.duration / dt_ns))

    s = np.empty(d + n_steps + 1)
    phi = np.empty(d + n_steps + 1)
    nden = np.empty(d + n_steps + 1)
    s[: d + 1] = config.init.s
    phi[: d + 1] = config.init.phi
    nden[: d + 1] = config.init.n

    fail = integrate_loop(
        s, phi, nden, d, n_steps, dt_ns,
        params.beta, params.gamma_conf, params.g, params.n0, params.eps,
        params.tau_n, params.tau_p, params.tau_in,
        params.alpha, params.kappa, params.feedback_phase,
        params.pump_rate(drive.i_bias), drive.md,
        2.0 * math.pi * drive.freq, drive.phase,
        config.s_floor_frac)
    if fail >= 0:
        raise IntegrationDiverged(fail * dt_ns)

    skip = int(round(config.transient / dt_ns))
    n_rec = (n_steps - skip) // config.record_stride
    recorded = s[d + skip: d + skip + n_rec * config.record_stride:
                 config.record_stride].copy()
    return TimeTrace(recorded, dt=config.dt * config.record_stride,
                     t0=config.transient)
