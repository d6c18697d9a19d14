"""Fixed-step classical RK4 with divergence detection.

All flows in this package are smooth and non-stiff at desk scale, so a
plain fourth-order scheme with caller-supplied dt is enough; oracle
comparisons against matrix exponentials are done in the test suite.
"""

from __future__ import annotations

import numpy as np


class DivergenceError(RuntimeError):
    """Integration produced non-finite values.

    ``last_valid_time`` is the last time with a finite state; ``partial``
    holds (times, states) up to and including that time.
    """

    def __init__(self, last_valid_time, partial=None):
        super().__init__(
            f"integration diverged after t = {last_valid_time:.6g}")
        self.last_valid_time = last_valid_time
        self.partial = partial


def rk4_path(f, y0, t_end, dt, guard=None):
    """Integrate y' = f(y) from 0 to t_end with fixed step dt.

    Returns (times, states) with states[i] the state at times[i].  If
    ``guard`` is given and guard(y) goes False, the path is truncated at
    the last valid state and returned with a flag:
    (times, states, stopped_early).
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("need dt > 0 and t_end > 0")
    y = np.array(y0, dtype=float)
    n_steps = int(round(t_end / dt))
    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1,) + y.shape)
    times[0] = 0.0
    states[0] = y
    stopped = False
    for i in range(n_steps):
        t = i * dt
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise DivergenceError(t, partial=(times[:i + 1].copy(),
                                              states[:i + 1].copy()))
        if guard is not None and not guard(y):
            times = times[:i + 1]
            states = states[:i + 1]
            stopped = True
            break
        times[i + 1] = (i + 1) * dt
        states[i + 1] = y
    if guard is None:
        return times, states
    return times, states, stopped
