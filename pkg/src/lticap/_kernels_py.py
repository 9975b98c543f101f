"""Pure numpy implementations of the vectorized hot kernels.

Every function here has a twin with the same signature in the compiled
``_kernels`` extension. Inputs are 1-D float64 arrays (or scalars for the
parameters); outputs are new float64 arrays.
"""

import numpy as np

LOG2E = 1.4426950408889634
# below this 1/x overflows; use the leading-order series instead
_TINY = 1e-300


def g_array(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    big = x >= _TINY
    xb = x[big]
    out[big] = (np.log1p(xb) + xb * np.log1p(1.0 / xb)) * LOG2E
    small = (x > 0.0) & ~big
    xs = x[small]
    out[small] = xs * (1.0 - np.log(xs)) * LOG2E
    return out


def butterworth_sq(omega, cutoff, h0sq, conventional):
    omega = np.asarray(omega, dtype=np.float64)
    with np.errstate(over="ignore"):
        u = (omega / cutoff) ** 8
        if conventional:
            return h0sq / (1.0 + u)
        return h0sq / ((1.0 + u) * (1.0 + u))


def stage_noise(h2, n_t, n_t1):
    h2 = np.asarray(h2, dtype=np.float64)
    return np.where(h2 <= 1.0, (1.0 - h2) * n_t, (h2 - 1.0) * n_t1)


def cascade_accumulate(h2_stages, sn_stages):
    h2_stages = np.atleast_2d(np.asarray(h2_stages, dtype=np.float64))
    sn_stages = np.atleast_2d(np.asarray(sn_stages, dtype=np.float64))
    h2 = np.ones(h2_stages.shape[1])
    sn = np.zeros(h2_stages.shape[1])
    for hk, sk in zip(h2_stages, sn_stages):
        sn = hk * sn + sk
        h2 = h2 * hk
    return h2, sn


def hsw_alloc(h2, sn, beta, gain_floor):
    h2 = np.asarray(h2, dtype=np.float64)
    sn = np.asarray(sn, dtype=np.float64)
    valid = h2 > gain_floor
    y = np.zeros_like(h2)
    with np.errstate(over="ignore", divide="ignore"):
        y[valid] = 1.0 / np.expm1(beta / h2[valid])
    on = valid & (y > sn)
    nbar = np.zeros_like(h2)
    nbar[on] = (y[on] - sn[on]) / h2[on]
    integrand = np.zeros_like(h2)
    integrand[on] = g_array(y[on]) - g_array(sn[on])
    return nbar, integrand


def hsw_threshold(h2, sn, beta, gain_floor):
    h2 = np.asarray(h2, dtype=np.float64)
    sn = np.asarray(sn, dtype=np.float64)
    valid = h2 > gain_floor
    t = -1.0 - sn
    with np.errstate(over="ignore", divide="ignore"):
        t[valid] = 1.0 / np.expm1(beta / h2[valid]) - sn[valid]
    return t


def _classical_floor(h2, sn, scheme):
    # noise referred to the channel input, on the scale of the water level
    if scheme == 1:  # homodyne: S_hom/|H|^2 against beta/2
        return (2.0 * sn + 1.0) / 4.0 / h2
    return (sn + 1.0) / h2  # heterodyne: 2 S_het/|H|^2 against beta


def classical_alloc(h2, sn, beta, scheme, gain_floor):
    """scheme: 1 = homodyne, 2 = heterodyne."""
    h2 = np.asarray(h2, dtype=np.float64)
    sn = np.asarray(sn, dtype=np.float64)
    level = beta / 2.0 if scheme == 1 else beta
    valid = h2 > gain_floor
    nbar = np.zeros_like(h2)
    integrand = np.zeros_like(h2)
    floor = _classical_floor(h2[valid], sn[valid], scheme)
    nv = np.maximum(level - floor, 0.0)
    nbar[valid] = nv
    if scheme == 1:
        integrand[valid] = 0.5 * np.log1p(nv * h2[valid] / ((2.0 * sn[valid] + 1.0) / 4.0)) * LOG2E
    else:
        integrand[valid] = np.log1p(nv * h2[valid] / (sn[valid] + 1.0)) * LOG2E
    return nbar, integrand


def classical_threshold(h2, sn, beta, scheme, gain_floor):
    h2 = np.asarray(h2, dtype=np.float64)
    sn = np.asarray(sn, dtype=np.float64)
    level = beta / 2.0 if scheme == 1 else beta
    valid = h2 > gain_floor
    t = np.full_like(h2, -1.0)
    t[valid] = level - _classical_floor(h2[valid], sn[valid], scheme)
    return t
