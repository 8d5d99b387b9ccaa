"""Hot integration kernel for the delayed-feedback laser rate equations.

The RK4 loop is strictly sequential (each step reads the delayed state
written thousands of steps earlier), so it is compiled with numba by
default.  Set ``CHAOSCOMM_NO_NUMBA=1`` to select the pure-Python/numpy
fallback with identical semantics (used on platforms without numba and
by the benchmark for comparison).
"""

import math
import os

import numpy as np

USE_NUMBA = os.environ.get("CHAOSCOMM_NO_NUMBA", "").lower() not in ("1", "true", "yes")

# Elementary charge (C); kept here so both kernel paths share one value.
ELEMENTARY_CHARGE = 1.602176634e-19


def lk_rhs(s, phi, n, s_d, phi_d, pump, beta, gamma_conf, g, n0, eps,
           tau_n, tau_p, tau_in, alpha, kappa, theta0):
    """Right-hand side of the rate equations at one instant.

    ``s_d``/``phi_d`` are the photon variable and optical phase one
    feedback delay in the past; ``pump`` is the carrier injection rate
    (per ns per um^3).  Returns (ds/dt, dphi/dt, dn/dt) in 1/ns units.
    Exposed unjitted so tests can probe individual terms (e.g. that the
    feedback summands vanish identically at kappa = 0).
    """
    s_safe = s if s > 1e-30 else 1e-30
    sd_safe = s_d if s_d > 1e-30 else 1e-30
    gain = g * (n - n0) / (1.0 + eps * s_safe)
    theta = theta0 + phi - phi_d
    fb = kappa / tau_in
    ds = (beta * gamma_conf * n / tau_n
          + gamma_conf * gain * s_safe
          - s_safe / tau_p
          + 2.0 * fb * math.sqrt(s_safe * sd_safe) * math.cos(theta))
    dphi = (0.5 * alpha * (gamma_conf * gain - 1.0 / tau_p)
            - fb * math.sqrt(sd_safe / s_safe) * math.sin(theta))
    dn = pump - n / tau_n - gain * s_safe
    return ds, dphi, dn


def _loop(s, phi, n, n_delay, n_steps, dt,
          beta, gamma_conf, g, n0, eps, tau_n, tau_p, tau_in,
          alpha, kappa, theta0,
          pump0, pump_md, pump_omega, pump_phase,
          floor_frac):
    """Fixed-step RK4 over the delay system.

    Arrays s, phi, n have length n_delay + n_steps + 1; indices
    0..n_delay hold the (constant) history for t in [-tau, 0].  Delayed
    values at RK half-steps are linearly interpolated between grid
    points.  Returns -1 on success or the failing step index if the
    state went non-finite.
    """
    d = n_delay
    run_mean = s[d]
    for i in range(d, d + n_steps):
        t = (i - d) * dt
        si = s[i]
        pi = phi[i]
        ni = n[i]

        sd0 = s[i - d]
        pd0 = phi[i - d]
        sd1 = s[i - d + 1]
        pd1 = phi[i - d + 1]
        sdh = 0.5 * (sd0 + sd1)
        pdh = 0.5 * (pd0 + pd1)

        # stage 1
        pump = pump0 * (1.0 + pump_md * math.sin(pump_omega * t + pump_phase))
        ss = si if si > 1e-30 else 1e-30
        sd = sd0 if sd0 > 1e-30 else 1e-30
        gain = g * (ni - n0) / (1.0 + eps * ss)
        theta = theta0 + pi - pd0
        fb = kappa / tau_in
        k1s = (beta * gamma_conf * ni / tau_n + gamma_conf * gain * ss
               - ss / tau_p + 2.0 * fb * math.sqrt(ss * sd) * math.cos(theta))
        k1p = (0.5 * alpha * (gamma_conf * gain - 1.0 / tau_p)
               - fb * math.sqrt(sd / ss) * math.sin(theta))
        k1n = pump - ni / tau_n - gain * ss

        # stage 2
        th = t + 0.5 * dt
        pump = pump0 * (1.0 + pump_md * math.sin(pump_omega * th + pump_phase))
        s2 = si + 0.5 * dt * k1s
        p2 = pi + 0.5 * dt * k1p
        n2 = ni + 0.5 * dt * k1n
        ss = s2 if s2 > 1e-30 else 1e-30
        sd = sdh if sdh > 1e-30 else 1e-30
        gain = g * (n2 - n0) / (1.0 + eps * ss)
        theta = theta0 + p2 - pdh
        k2s = (beta * gamma_conf * n2 / tau_n + gamma_conf * gain * ss
               - ss / tau_p + 2.0 * fb * math.sqrt(ss * sd) * math.cos(theta))
        k2p = (0.5 * alpha * (gamma_conf * gain - 1.0 / tau_p)
               - fb * math.sqrt(sd / ss) * math.sin(theta))
        k2n = pump - n2 / tau_n - gain * ss

        # stage 3
        s3 = si + 0.5 * dt * k2s
        p3 = pi + 0.5 * dt * k2p
        n3 = ni + 0.5 * dt * k2n
        ss = s3 if s3 > 1e-30 else 1e-30
        gain = g * (n3 - n0) / (1.0 + eps * ss)
        theta = theta0 + p3 - pdh
        k3s = (beta * gamma_conf * n3 / tau_n + gamma_conf * gain * ss
               - ss / tau_p + 2.0 * fb * math.sqrt(ss * sd) * math.cos(theta))
        k3p = (0.5 * alpha * (gamma_conf * gain - 1.0 / tau_p)
               - fb * math.sqrt(sd / ss) * math.sin(theta))
        k3n = pump - n3 / tau_n - gain * ss

        # stage 4
        tf = t + dt
        pump = pump0 * (1.0 + pump_md * math.sin(pump_omega * tf + pump_phase))
        s4 = si + dt * k3s
        p4 = pi + dt * k3p
        n4 = ni + dt * k3n
        ss = s4 if s4 > 1e-30 else 1e-30
        sd = sd1 if sd1 > 1e-30 else 1e-30
        gain = g * (n4 - n0) / (1.0 + eps * ss)
        theta = theta0 + p4 - pd1
        k4s = (beta * gamma_conf * n4 / tau_n + gamma_conf * gain * ss
               - ss / tau_p + 2.0 * fb * math.sqrt(ss * sd) * math.cos(theta))
        k4p = (0.5 * alpha * (gamma_conf * gain - 1.0 / tau_p)
               - fb * math.sqrt(sd / ss) * math.sin(theta))
        k4n = pump - n4 / tau_n - gain * ss

        sn = si + dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
        pn = pi + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        nn = ni + dt / 6.0 * (k1n + 2.0 * k2n + 2.0 * k3n + k4n)

        run_mean += 1e-3 * (sn - run_mean)
        floor = floor_frac * run_mean
        if floor < 1e-30:
            floor = 1e-30
        if sn < floor:
            sn = floor

        if not (math.isfinite(sn) and math.isfinite(pn) and math.isfinite(nn)):
            return i - d

        s[i + 1] = sn
        phi[i + 1] = pn
        n[i + 1] = nn
    return -1


if USE_NUMBA:
    import numba

    integrate_loop = numba.njit(cache=True, fastmath=False)(_loop)
else:
    integrate_loop = _loop

integrate_loop_numpy = _loop
