# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-sample filter loop (same arithmetic as ``_pykernel``)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, exp, expm1, log1p, atan, pow, sqrt, isfinite

cnp.import_array()

cdef double DIVERGENCE_LIMIT = 1e12

cdef enum:
    ATT_NONE = 0
    ATT_L0 = 1
    ATT_L1 = 2
    CTRL_FIXED = 0
    CTRL_YOU = 1
    CTRL_PROPOSED = 2
    HOYER = 7


cdef inline double _sgn(double v) noexcept nogil:
    if v > 0.0:
        return 1.0
    if v < 0.0:
        return -1.0
    return 0.0


cdef double _measure(const double[::1] w, int kind, double sigma, double p) noexcept nogil:
    cdef Py_ssize_t L = w.shape[0], k
    cdef double acc = 0.0, a, sa, l1 = 0.0, l2 = 0.0, sl, eps, peak = 0.0
    if kind == HOYER:
        for k in range(L):
            if fabs(w[k]) > peak:
                peak = fabs(w[k])
        if peak == 0.0:
            return 0.0
        for k in range(L):
            a = fabs(w[k]) / peak
            l1 += a
            l2 += a * a
        sl = sqrt(<double>L)
        eps = L / (L - sl) * (1.0 - l1 / (sl * sqrt(l2)))
        if eps < 0.0:
            return 0.0
        if eps > 1.0:
            return 1.0
        return eps
    for k in range(L):
        a = fabs(w[k])
        if kind == 1:
            acc += a
        elif kind == 2:
            acc += a / pow(a + sigma, 1.0 - p)
        elif kind == 3:
            acc += -expm1(-sigma * a)
        elif kind == 4:
            acc += log1p(sigma * a)
        elif kind == 5:
            acc += atan(sigma * a)
        else:
            if a <= 1.0 / sigma:
                sa = sigma * a
                acc += 2.0 * sa - sa * sa
            else:
                acc += 1.0
    return acc


def run_filter(x, d, h_pre, h_post, Py_ssize_t switch_at, spec):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef const double[::1] hpre = np.ascontiguousarray(h_pre, dtype=np.float64)
    cdef const double[::1] hpost = np.ascontiguousarray(h_post, dtype=np.float64)
    cdef Py_ssize_t n_samples = xv.shape[0]
    cdef Py_ssize_t L = hpre.shape[0]

    cdef double mu = spec.mu
    cdef double beta = spec.beta
    cdef int attractor = spec.attractor_code
    cdef int controller = spec.controller_code
    cdef int kind = spec.measure.code
    cdef double sigma = spec.measure.sigma
    cdef double p = spec.measure.p
    vss = spec.vss
    cdef double lam = vss.lam, alpha = vss.alpha, gamma = vss.gamma
    cdef double eta = vss.eta, kappa_min = vss.kappa_min, conv_ratio = vss.conv_ratio
    cdef Py_ssize_t conv_short = vss.conv_short, conv_long = vss.conv_long

    xp_arr = np.zeros(n_samples + L - 1)
    xp_arr[L - 1:] = xv
    cdef double[::1] xp = xp_arr
    w_arr = np.zeros(L)
    cdef double[::1] w = w_arr
    e2_arr = np.zeros(conv_long)
    cdef double[::1] e2 = e2_arr
    ratio_arr = np.full(n_samples, np.nan)
    kappa_arr = np.full(n_samples, np.nan)
    cdef double[::1] ratio = ratio_arr
    cdef double[::1] kappas = kappa_arr

    cdef const double[::1] h = hpre
    cdef double h_energy = 0.0
    cdef double kappa = vss.kappa0
    cdef double phi = 0.0
    cdef double y, e, mue, j_now, delta, wk, att, diff, err, r
    cdef double long_mean, short_mean, katt
    cdef Py_ssize_t n, k, base, count = 0
    cdef Py_ssize_t diverged = -1

    if controller == CTRL_PROPOSED:
        phi = _measure(w, kind, sigma, p)
    for k in range(L):
        h_energy += h[k] * h[k]

    with nogil:
        for n in range(n_samples):
            if n == switch_at:
                h = hpost
                h_energy = 0.0
                for k in range(L):
                    h_energy += h[k] * h[k]
            base = n + L - 1
            y = 0.0
            for k in range(L):
                y += xp[base - k] * w[k]
            e = dv[n] - y

            if controller == CTRL_YOU:
                e2[count % conv_long] = e * e
                count += 1
                if count % conv_long == 0:
                    long_mean = 0.0
                    for k in range(conv_long):
                        long_mean += e2[k]
                    long_mean /= conv_long
                    short_mean = 0.0
                    for k in range(conv_long - conv_short, conv_long):
                        short_mean += e2[k]
                    short_mean /= conv_short
                    if long_mean > 0.0 and short_mean / long_mean <= conv_ratio and kappa >= kappa_min:
                        kappa *= eta
            elif controller == CTRL_PROPOSED:
                j_now = _measure(w, kind, sigma, p)
                delta = j_now - phi
                phi = (1.0 - lam) * phi + lam * j_now
                kappa = (1.0 - alpha) * kappa + alpha * gamma * fabs(delta)

            mue = mu * e
            katt = kappa * beta
            err = 0.0
            for k in range(L):
                wk = w[k]
                if attractor == ATT_L1:
                    att = kappa * _sgn(wk)
                elif attractor == ATT_L0:
                    att = katt * _sgn(wk) * exp(-beta * fabs(wk))
                else:
                    att = 0.0
                wk = (wk + mue * xp[base - k]) - att
                w[k] = wk
                diff = h[k] - wk
                err += diff * diff
            r = err / h_energy
            if not isfinite(r) or r > DIVERGENCE_LIMIT:
                diverged = n
                break
            ratio[n] = r
            kappas[n] = kappa
    return ratio_arr, kappa_arr, diverged
