"""Time-frequency analysis: complex Morlet CWT, scalogram and the
mean-scalogram-ratio (MSR) detection statistic with its peak sidelobe
level (PSL).

The wavelet is psi(t) = (pi*fb)^(-1/2) * exp(2i*pi*fc*t) * exp(-t^2/fb).
An analysis frequency f (GHz) maps to scale a = fc / (ridge_cal * f * 1)
in ns.  ridge_cal corrects a systematic localization bias of the MSR
peak search: on a broadband background the constant-Q ridge of a tone
peaks below the tone frequency by a fixed fraction, so the scales are
pre-shifted by that fraction and the grid labels stay true frequencies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .laser import TimeTrace


class UndefinedRatio(ValueError):
    """MSR is undefined (all scalogram rows identically zero)."""


# PSL of a curve whose sidelobe maximum is exactly zero.
PSL_INFINITE = float("inf")


@dataclass(frozen=True)
class WaveletParams:
    fb: float = 0.5         # bandwidth parameter
    fc: float = 1.0         # wavelet center frequency
    ridge_cal: float = 0.84  # MSR ridge localization calibration

    def __post_init__(self):
        if self.fb <= 0 or self.fc <= 0:
            raise ValueError("wavelet parameters must be positive")
        if not 0 < self.ridge_cal <= 1:
            raise ValueError("ridge_cal must lie in (0, 1]")

    def scale_ns(self, freq_ghz: float) -> float:
        """Scale assigned to an analysis frequency, in ns."""
        return self.fc / (self.ridge_cal * freq_ghz)


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform, strictly increasing analysis frequencies in GHz."""

    freqs: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=np.float64)
        object.__setattr__(self, "freqs", freqs)
        if freqs.size < 5:
            raise ValueError("grid needs at least 5 frequencies")
        df = np.diff(freqs)
        if np.any(df <= 0):
            raise ValueError("frequencies must be strictly increasing")
        if not np.allclose(df, df[0], rtol=1e-9):
            raise ValueError("grid spacing must be uniform")
        if freqs[0] <= 0:
            raise ValueError("frequencies must be positive")

    @classmethod
    def default(cls) -> "FrequencyGrid":
        # 0.25 .. 6.0 GHz in 0.05 GHz steps (116 bins)
        return cls(np.round(np.arange(0.25, 6.0 + 1e-9, 0.05), 10))

    @classmethod
    def regular(cls, start: float, stop: float, step: float) -> "FrequencyGrid":
        n = int(round((stop - start) / step)) + 1
        return cls(start + step * np.arange(n))

    @property
    def spacing(self) -> float:
        return float(self.freqs[1] - self.freqs[0])

    def __len__(self) -> int:
        return self.freqs.size


@dataclass(frozen=True)
class Scalogram:
    """CWT magnitudes; rows follow grid.freqs, columns the time samples.

    edge_margin[i] is the number of columns at each end of row i that
    fall within three wavelet e-folding widths of the trace boundary;
    msr() excludes them from row means.
    """

    values: np.ndarray
    grid: FrequencyGrid
    dt: float               # ps
    edge_margin: np.ndarray

    def __post_init__(self):
        if self.values.shape[0] != len(self.grid):
            raise ValueError("row count must match the frequency grid")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ValueError("scalogram entries must be finite and non-negative")

    def to_csv(self, path) -> None:
        """Header row = frequencies (GHz), first column = time (ns)."""
        t_ns = np.arange(self.values.shape[1]) * self.dt * 1e-3
        header = "time_ns," + ",".join(f"{f:.6g}" for f in self.grid.freqs)
        body = np.column_stack([t_ns, self.values.T])
        np.savetxt(path, body, delimiter=",", header=header, comments="")


@dataclass(frozen=True)
class MsrCurve:
    """MSR per interior frequency bin plus its peak and PSL."""

    freqs: np.ndarray       # interior bins only (first/last two excluded)
    eta: np.ndarray
    peak_freq: float
    psl_db: float
    spacing: float

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.eta))

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.freqs, self.eta]),
                   delimiter=",", header="freq_ghz,msr", comments="")


def morlet_conj(x: np.ndarray, w: WaveletParams) -> np.ndarray:
    """Complex-conjugate mother wavelet evaluated at x = (t - b) / a."""
    norm = 1.0 / math.sqrt(math.pi * w.fb)
    return norm * np.exp(-2j * math.pi * w.fc * x) * np.exp(-x * x / w.fb)


def cwt_point(trace: TimeTrace, freq_ghz: float, b_ns: float,
              w: WaveletParams) -> float:
    """Direct quadrature of the transform at one (scale, shift) pair.

    O(N) per point; the reference oracle for the FFT path.
    """
    a = w.scale_ns(freq_ghz)
    t = trace.times_ns
    integ = np.sum(trace.samples * morlet_conj((t - b_ns) / a, w)) * trace.dt_ns
    return abs(integ / math.sqrt(a))


def cwt_direct(trace: TimeTrace, grid: FrequencyGrid,
               w: WaveletParams | None = None) -> Scalogram:
    """Quadrature evaluation at every (frequency, shift); O(N^2) per row.

    Only usable for short traces; exists to pin down the FFT path.
    """
    w = w or WaveletParams()
    _check_grid(trace, grid)
    t = trace.times_ns
    out = np.empty((len(grid), len(trace)))
    for i, f in enumerate(grid.freqs):
        a = w.scale_ns(f)
        for k in range(len(trace)):
            x = (t - t[k]) / a
            out[i, k] = abs(np.sum(trace.samples * morlet_conj(x, w))
                            * trace.dt_ns / math.sqrt(a))
    return Scalogram(out, grid, trace.dt, _edge_margins(trace, grid, w))


def cwt(trace: TimeTrace, grid: FrequencyGrid,
        w: WaveletParams | None = None) -> Scalogram:
    """Scalogram of the trace over the grid (FFT convolution per scale).

    The trace is treated as zero outside its support; each row equals
    the direct quadrature to FFT round-off.
    """
    w = w or WaveletParams()
    _check_grid(trace, grid)
    n = len(trace)
    if n < 16:
        raise ValueError("trace too short for CWT (need >= 16 samples)")
    dt_ns = trace.dt_ns
    nfft = _next_fast_len(2 * n - 1)
    spec = np.fft.fft(trace.samples, nfft)

    out = np.empty((len(grid), n))
    for i, f in enumerate(grid.freqs):
        a = w.scale_ns(f)
        scale = dt_ns / math.sqrt(a)
        # circular buffer: lag m >= 0 at index m, lag m < 0 at nfft + m
        buf = np.zeros(nfft, dtype=np.complex128)
        buf[:n] = morlet_conj(-np.arange(n) * dt_ns / a, w) * scale
        buf[nfft - (n - 1):] = morlet_conj(
            np.arange(n - 1, 0, -1) * dt_ns / a, w) * scale
        conv = np.fft.ifft(spec * np.fft.fft(buf))
        out[i] = np.abs(conv[:n])
    return Scalogram(out, grid, trace.dt, _edge_margins(trace, grid, w))


def msr(sc: Scalogram) -> MsrCurve:
    """Five-bin mean-scalogram ratio over the interior frequency bins.

    eta_i = mean(row i) / sum of mean(row m) for m in i-2 .. i+2; the
    two bins at each grid edge lack a full neighborhood and are
    excluded from the curve and the peak search.
    """
    nrows, ncols = sc.values.shape
    if nrows < 5:
        raise ValueError("MSR needs at least 5 frequency rows")
    means = np.empty(nrows)
    for i in range(nrows):
        m = int(sc.edge_margin[i])
        m = min(m, (ncols - 1) // 2)
        means[i] = sc.values[i, m: ncols - m].mean()
    if not np.any(means > 0):
        raise UndefinedRatio("all scalogram rows are identically zero")

    window = np.convolve(means, np.ones(5), mode="valid")  # sums i-2..i+2
    eta = means[2:-2] / window
    freqs = sc.grid.freqs[2:-2]
    peak = int(np.argmax(eta))
    return MsrCurve(freqs=freqs, eta=eta, peak_freq=float(freqs[peak]),
                    psl_db=psl_value(eta), spacing=sc.grid.spacing)


def psl_value(eta: np.ndarray, exclusion: int = 2) -> float:
    """10*log10(peak / largest value more than `exclusion` bins away)."""
    eta = np.asarray(eta, dtype=np.float64)
    if eta.size < 3:
        raise ValueError("PSL needs at least 3 bins")
    peak = int(np.argmax(eta))
    mask = np.abs(np.arange(eta.size) - peak) > exclusion
    if not np.any(mask):
        raise ValueError("exclusion window swallows the whole curve")
    side = eta[mask].max()
    if side <= 0:
        return PSL_INFINITE
    return 10.0 * math.log10(eta[peak] / side)


def psl(curve: MsrCurve) -> float:
    return curve.psl_db


def _check_grid(trace: TimeTrace, grid: FrequencyGrid) -> None:
    nyquist = 0.5 * trace.sample_rate_gsps
    bad = grid.freqs[grid.freqs >= nyquist]
    if bad.size:
        raise ValueError(
            f"grid frequency {bad[0]:g} GHz at or above Nyquist {nyquist:g} GHz")


def _edge_margins(trace: TimeTrace, grid: FrequencyGrid,
                  w: WaveletParams) -> np.ndarray:
    # three e-folding widths of the Gaussian envelope, in samples
    scales = np.array([w.scale_ns(f) for f in grid.freqs])
    widths_ns = 3.0 * scales * math.sqrt(w.fb)
    return np.ceil(widths_ns / trace.dt_ns).astype(np.int64)


def _next_fast_len(n: int) -> int:
    try:
        from scipy.fft import next_fast_len
        return next_fast_len(n)
    except ImportError:
        m = 1
        while m < n:
            m <<= 1
        return m
