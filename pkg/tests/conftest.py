"""Shared fixtures.

The carrier/attack fixtures are session-scoped because each production
length trace costs an integration plus a full scalogram; the acceptance
suite reuses them across criteria.
"""

import numpy as np
import pytest

import chaoscomm as cc
from chaoscomm import attack


@pytest.fixture(scope="session")
def laser():
    return cc.LaserParams()


@pytest.fixture(scope="session")
def sim():
    return cc.SimConfig()


@pytest.fixture(scope="session")
def acfg():
    return cc.AttackConfig()


def make_carrier(laser, sim, seed):
    from dataclasses import replace
    init = cc.perturbed_init(cc.InitialState(), seed)
    return cc.integrate_laser(laser, replace(sim, init=init))


@pytest.fixture(scope="session")
def carriers20(laser, sim):
    """Twenty production-length carrier realizations, seeds 0..19."""
    return [make_carrier(laser, sim, seed) for seed in range(20)]


@pytest.fixture(scope="session")
def carrier_curves(carriers20, acfg):
    return [attack._decision_curve(c, acfg) for c in carriers20]


@pytest.fixture(scope="session")
def threshold(carrier_curves, acfg):
    """Detection threshold calibrated on the first carrier realization."""
    return carrier_curves[0].psl_db + acfg.margin_db


@pytest.fixture(scope="session")
def short_sim():
    """80 ns run (40 ns recorded): enough bins for detection statistics
    at a fraction of the production cost."""
    return cc.SimConfig(duration=120.0, transient=40.0)


@pytest.fixture(scope="session")
def short_carrier(laser, short_sim):
    return make_carrier(laser, short_sim, 11)
