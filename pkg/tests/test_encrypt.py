"""Message-embedding contracts: CMA closed form and its algebraic
properties, CMO equivalence with a drive-modulated integration."""

import math
from dataclasses import replace

import numpy as np
import pytest

import chaoscomm as cc
from chaoscomm import Scheme


def constant_trace(value=2.0, n=2000, dt=10.0):
    return cc.TimeTrace(np.full(n, value), dt=dt)


def test_zero_depth_is_identity():
    carrier = constant_trace()
    out = cc.encrypt_cma(carrier, cc.MessageSpec(freq=1.0, md=0.0))
    assert np.array_equal(out.samples, carrier.samples)


def test_cma_closed_form():
    carrier = constant_trace(value=2.0)
    msg = cc.MessageSpec(freq=1.0, md=0.5)
    out = cc.encrypt_cma(carrier, msg)
    t = carrier.times_ns
    expected = 2.0 * (1.0 + 0.5 * np.sin(2 * math.pi * t))
    assert np.allclose(out.samples, expected, rtol=1e-14, atol=0)


def test_cma_preserves_metadata_and_positivity():
    rng = np.random.default_rng(0)
    carrier = cc.TimeTrace(rng.uniform(0.5, 2.0, 1000), dt=5.0, t0=3.0)
    out = cc.encrypt_cma(carrier, cc.MessageSpec(freq=2.0, md=0.99))
    assert (out.dt, out.t0, len(out)) == (carrier.dt, carrier.t0, len(carrier))
    assert np.all(out.samples >= 0)


def test_cma_commutes_with_positive_scaling():
    rng = np.random.default_rng(1)
    carrier = cc.TimeTrace(rng.uniform(0.5, 2.0, 1000), dt=5.0)
    msg = cc.MessageSpec(freq=1.5, md=0.3)
    scaled_first = cc.encrypt_cma(
        cc.TimeTrace(2.0 * carrier.samples, carrier.dt), msg)
    scaled_after = cc.encrypt_cma(carrier, msg)
    assert np.array_equal(scaled_first.samples, 2.0 * scaled_after.samples)


def test_depth_bounds_rejected():
    with pytest.raises(ValueError):
        cc.MessageSpec(freq=1.0, md=1.0)
    with pytest.raises(ValueError):
        cc.MessageSpec(freq=1.0, md=-0.1)
    with pytest.raises(ValueError):
        cc.MessageSpec(freq=0.0, md=0.1)


def test_scheme_mismatch_rejected():
    carrier = constant_trace()
    with pytest.raises(ValueError):
        cc.encrypt_cma(carrier, cc.MessageSpec(freq=1.0, md=0.1,
                                               scheme=Scheme.CMO))
    with pytest.raises(ValueError):
        cc.encrypt_cmo(cc.LaserParams(), cc.SimConfig(),
                       cc.MessageSpec(freq=1.0, md=0.1, scheme=Scheme.CMA))


def test_cmo_zero_depth_matches_plain_integration():
    params = cc.LaserParams()
    config = cc.SimConfig(duration=12.0, transient=2.0)
    plain = cc.integrate_laser(params, config)
    modulated = cc.encrypt_cmo(params, config,
                               cc.MessageSpec(freq=1.0, md=0.0,
                                              scheme=Scheme.CMO))
    assert np.array_equal(plain.samples, modulated.samples)
