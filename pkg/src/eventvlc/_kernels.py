"""Compiled inner loops. Kept separate so the rest of the package imports
without triggering JIT compilation."""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def pixel_events(logs, slot_us, dt_us, e_lp, e_hp, diff_on, diff_off, refractory_us):
    """Threshold-crossing events of one pixel.

    ``logs`` holds one log-intensity value per slot. The slot series is held
    on a ``dt_us`` grid and pushed through a low-pass stage then a high-pass
    stage (``x - slow_lowpass(x)``), both exact zero-order-hold first-order
    recurrences initialised at steady state. Returns event offsets (us,
    relative to the signal start) and polarities.
    """
    n_slots = logs.shape[0]
    n_steps = int(math.ceil(n_slots * slot_us / dt_us - 1e-9))
    cap = 256
    times = np.empty(cap, np.float64)
    pols = np.empty(cap, np.int8)
    n = 0

    x_prev = logs[0]
    y = logs[0]
    z = logs[0]
    ref = 0.0
    v = 0.0
    dead = False
    dead_until = 0.0
    use_dead = refractory_us > 0.0

    for k in range(1, n_steps):
        t = k * dt_us
        j = int(t / slot_us + 1e-9)
        if j >= n_slots:
            j = n_slots - 1
        y_new = e_lp * y + (1.0 - e_lp) * x_prev
        z = e_hp * z + (1.0 - e_hp) * y
        y = y_new
        x_prev = logs[j]
        v_before = v
        v = y - z

        if dead:
            if t < dead_until:
                continue
            # re-arm with the value held at the end of the dead time; the
            # current step may fire straight away
            ref = v_before
            dead = False

        d = v - ref
        if d >= diff_on:
            pol = 1
        elif -d >= diff_off:
            pol = 0
        else:
            continue

        if n == cap:
            cap *= 2
            new_t = np.empty(cap, np.float64)
            new_p = np.empty(cap, np.int8)
            new_t[:n] = times[:n]
            new_p[:n] = pols[:n]
            times = new_t
            pols = new_p
        times[n] = t
        pols[n] = pol
        n += 1
        ref = v
        if use_dead:
            dead = True
            dead_until = t + refractory_us

    return times[:n], pols[:n]
