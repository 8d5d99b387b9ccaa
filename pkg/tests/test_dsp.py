"""Spectral estimation, filter-design conformance and SNR scoring."""

import math

import numpy as np
import pytest
from scipy import signal

import chaoscomm as cc
from chaoscomm import dsp


def tone(freq_ghz, n=4096, dt_ps=50.0, amp=1.0, phase=0.0, offset=0.0):
    t = np.arange(n) * dt_ps * 1e-3
    return cc.TimeTrace(offset + amp * np.sin(2 * math.pi * freq_ghz * t + phase),
                        dt=dt_ps)


def white_noise(n=8192, dt_ps=50.0, seed=0):
    rng = np.random.default_rng(seed)
    return cc.TimeTrace(rng.normal(0.0, 1.0, n), dt=dt_ps)


# -- power spectrum ---------------------------------------------------------

def test_tone_peak_dominates():
    spec = cc.power_spectrum(tone(2.0))
    idx = int(np.argmax(spec.psd))
    assert abs(spec.freqs[idx] - 2.0) <= spec.rbw
    median_db = 10 * np.log10(np.median(spec.psd[1:]) + 1e-300)
    peak_db = 10 * np.log10(spec.psd[idx])
    assert peak_db - median_db >= 30


def test_constant_trace_has_no_off_dc_power():
    spec = cc.power_spectrum(cc.TimeTrace(np.full(4096, 3.0), dt=50.0))
    assert np.all(spec.psd[1:] < 1e-15)
    with pytest.raises(dsp.BandwidthUndefined):
        cc.bandwidth(spec)


def test_energy_consistency_on_stationary_input():
    trace = white_noise(n=16384)
    spec = cc.power_spectrum(trace)
    integrated = np.sum(spec.psd) * spec.rbw
    ms = np.mean((trace.samples - trace.samples.mean()) ** 2)
    assert integrated == pytest.approx(ms, rel=0.01)


def test_short_trace_rejected():
    with pytest.raises(ValueError):
        cc.power_spectrum(cc.TimeTrace(np.ones(100), dt=50.0))


# -- bandwidth --------------------------------------------------------------

def test_tone_bandwidth_at_tone():
    spec = cc.power_spectrum(tone(2.0, n=8192))
    assert cc.bandwidth(spec) == pytest.approx(2.0, abs=2 * spec.rbw)


def test_flat_noise_bandwidth_near_80pct_nyquist():
    # white at 20 GS/s -> flat to 10 GHz; 80%-energy point near 8 GHz
    bws = [cc.bandwidth(cc.power_spectrum(white_noise(dt_ps=50.0, seed=s)))
           for s in range(3)]
    assert np.mean(bws) == pytest.approx(8.0, abs=0.4)


# -- band-pass design -------------------------------------------------------

SPECIMENS = [dsp.BpfSpec(center=c) for c in (1.0, 2.0, 4.0)]
FS = 100.0


@pytest.mark.parametrize("spec", SPECIMENS, ids=lambda s: f"{s.center}GHz")
def test_bpf_magnitude_conformance(spec):
    f = cc.design_bpf(spec, FS)
    lo, hi = spec.passband
    band = np.linspace(lo, hi, 201)
    resp = f.response_db(band)
    assert resp.max() <= 0.05
    assert resp.min() >= -spec.ripple_db - 0.05
    slo, shi = spec.stopband_edges
    assert np.all(f.response_db(np.array([slo, shi])) <= -spec.atten_db + 0.05)


@pytest.mark.parametrize("spec", SPECIMENS, ids=lambda s: f"{s.center}GHz")
def test_bpf_minimality(spec):
    f = cc.design_bpf(spec, FS)
    assert f.order >= 2
    lo, hi = spec.passband
    wn = [lo, hi]
    sos = signal.cheby1(f.order - 1, spec.ripple_db, wn, btype="bandpass",
                        output="sos", fs=FS)
    smaller = dsp.FilterRealization(sos=sos, spec=spec, sample_rate=FS,
                                    order=f.order - 1)
    slo, shi = spec.stopband_edges
    stop_ok = np.all(smaller.response_db(np.array([slo, shi]))
                     <= -spec.atten_db)
    band = np.linspace(lo, hi, 201)
    ripple_ok = smaller.response_db(band).min() >= -spec.ripple_db - 1e-6
    assert not (stop_ok and ripple_ok)


def test_bpf_design_deterministic():
    a = cc.design_bpf(SPECIMENS[0], FS)
    b = cc.design_bpf(SPECIMENS[0], FS)
    assert np.array_equal(a.sos, b.sos)


@pytest.mark.parametrize("spec", SPECIMENS, ids=lambda s: f"{s.center}GHz")
def test_bpf_impulse_response_decays(spec):
    f = cc.design_bpf(spec, FS)
    impulse = np.zeros(100_000)
    impulse[0] = 1.0
    h = signal.sosfilt(f.sos, impulse)
    assert np.max(np.abs(h[-1000:])) < 1e-8 * np.max(np.abs(h))


def test_bpf_spec_validation():
    with pytest.raises(ValueError):
        dsp.BpfSpec(center=0.05)             # passband would cross 0 GHz
    with pytest.raises(ValueError):
        cc.design_bpf(dsp.BpfSpec(center=49.9), FS)   # stopband past Nyquist


# -- filtering --------------------------------------------------------------

def test_inband_tone_passes_within_ripple():
    f = cc.design_bpf(dsp.BpfSpec(center=2.0), FS)
    trace = tone(2.0, n=40000, dt_ps=10.0)
    out = cc.apply_bpf(f, trace).steady()
    amp = math.sqrt(2.0 * np.mean(out.samples ** 2))
    assert 10 ** (-3.1 / 20) <= amp <= 1.01


def test_stopband_tone_attenuated():
    f = cc.design_bpf(dsp.BpfSpec(center=2.0), FS)
    trace = tone(2.0 + 0.3, n=40000, dt_ps=10.0)    # at the stopband edge
    out = cc.apply_bpf(f, trace).steady()
    amp = math.sqrt(2.0 * np.mean(out.samples ** 2))
    assert amp <= 10 ** (-20.0 / 20) * 1.05


def test_zero_in_zero_out():
    f = cc.design_bpf(dsp.BpfSpec(center=2.0), FS)
    out = cc.apply_bpf(f, cc.TimeTrace(np.zeros(1000), dt=10.0))
    assert np.all(out.samples == 0)


def test_sample_rate_mismatch_rejected():
    f = cc.design_bpf(dsp.BpfSpec(center=2.0), FS)
    with pytest.raises(ValueError, match="sample rate"):
        cc.apply_bpf(f, cc.TimeTrace(np.zeros(1000), dt=25.0))


# -- SNR --------------------------------------------------------------------

def test_pure_tone_snr_capped():
    assert cc.snr(tone(1.0, n=20000, dt_ps=10.0), 1.0) == dsp.SNR_CAP_DB


def test_snr_phase_invariance():
    a = cc.snr(tone(1.0, n=20000, dt_ps=10.0, phase=0.0, offset=0.3), 1.0)
    b = cc.snr(tone(1.0, n=20000, dt_ps=10.0, phase=1.1, offset=0.3), 1.0)
    assert a == b == dsp.SNR_CAP_DB


def test_equal_power_components_give_zero_db():
    # signal at 1 GHz plus an orthogonal in-band residual of equal power
    n, dt_ps = 100000, 10.0
    t = np.arange(n) * dt_ps * 1e-3
    sig = math.sqrt(2.0) * np.sin(2 * math.pi * 1.0 * t)
    res = math.sqrt(2.0) * np.sin(2 * math.pi * 1.05 * t + 0.4)
    trace = cc.TimeTrace(sig + res, dt=dt_ps)
    assert cc.snr(trace, 1.0) == pytest.approx(0.0, abs=0.5)


def test_snr_accepts_message_spec_reference():
    trace = tone(1.0, n=20000, dt_ps=10.0)
    msg = cc.MessageSpec(freq=1.0, md=0.05)
    assert cc.snr(trace, msg) == cc.snr(trace, 1.0)


def test_snr_needs_ten_periods():
    with pytest.raises(ValueError, match="10"):
        cc.snr(tone(1.0, n=500, dt_ps=10.0), 1.0)
