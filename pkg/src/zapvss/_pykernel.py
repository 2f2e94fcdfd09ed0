"""Pure-Python filter loop, composed from the reference per-sample functions.

Used when the compiled core is unavailable, and as the cross-check for it.
"""
from __future__ import annotations

import numpy as np

from . import adaptive, stepsize

DIVERGENCE_LIMIT = 1e12


def run_filter(x, d, h_pre, h_post, switch_at, spec):
    """Run one adaptive filter over ``x``/``d``; see :func:`zapvss.kernel.run_filter`."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(d, dtype=float)
    h_pre = np.asarray(h_pre, dtype=float)
    h_post = np.asarray(h_post, dtype=float)
    n_samples = x.size
    L = h_pre.size

    ratio = np.full(n_samples, np.nan)
    kappas = np.full(n_samples, np.nan)
    state = adaptive.FilterState.zeros(L)
    ctrl = spec.initial_controller(state.w)
    h = h_pre
    h_energy = float(np.dot(h, h))

    for n in range(n_samples):
        if n == switch_at:
            h = h_post
            h_energy = float(np.dot(h, h))
        state = adaptive.push_sample(state, x[n])
        e = adaptive.filter_error(state, d[n])
        ctrl, kappa = stepsize.controller_step(ctrl, state.w, e, spec.vss)
        params = adaptive.AdaptParams(spec.mu, kappa, spec.beta, spec.attractor)
        state = adaptive.update(state, e, params)
        diff = h - state.w
        r = float(np.dot(diff, diff)) / h_energy
        if not np.isfinite(r) or r > DIVERGENCE_LIMIT:
            return ratio, kappas, n
        ratio[n] = r
        kappas[n] = kappa
    return ratio, kappas, -1
