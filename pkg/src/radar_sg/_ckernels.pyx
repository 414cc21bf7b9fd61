# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: the hypergeometric mixture sum and the Monte Carlo
drop loop. Mirrors :mod:`radar_sg._pykernels`."""

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport exp, log, log1p, lgamma, pow
from libc.stdint cimport int64_t
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_poisson,
    random_standard_exponential,
    random_standard_gamma,
    random_standard_uniform,
)

import numpy as np

from .errors import ConvergenceError

cdef enum:
    K_NONE = 0
    K_GAMMA = 1
    K_POISSON_GAMMA = 2
    K_NEGBIN_GAMMA = 3

NO_FADING = K_NONE
GAMMA = K_GAMMA
POISSON_GAMMA = K_POISSON_GAMMA
NEGBIN_GAMMA = K_NEGBIN_GAMMA

cdef double _RESCALE = 1e250
cdef long _MAX_TERMS = 10000000


cdef int _positive_series(double u, double den, double w,
                          double *total_out, double *log_scale_out) noexcept nogil:
    cdef double term = 1.0, total = 1.0, log_scale = 0.0, ratio, bound
    cdef long n = 0
    while True:
        ratio = (u + n) / (den + n) * w
        term *= ratio
        total += term
        n += 1
        bound = ratio if ratio > w else w
        if bound < 1.0 and term * bound / (1.0 - bound) <= 1e-17 * total:
            break
        if total > _RESCALE:
            total /= _RESCALE
            term /= _RESCALE
            log_scale += log(_RESCALE)
        if n > _MAX_TERMS:
            return -1
    total_out[0] = total
    log_scale_out[0] = log_scale
    return 0


cdef double _log_gamma_ratio(double b, double p) noexcept nogil:
    # ln Gamma(b + p) - ln Gamma(b) without differencing two large lgamma values
    cdef double shift = 0.0, c, ic, ib, ic2, ib2, stirling
    while b < 20.0:
        shift -= log1p(p / b)
        b += 1.0
    c = b + p
    ic = 1.0 / c
    ib = 1.0 / b
    ic2 = ic * ic
    ib2 = ib * ib
    stirling = (ic * (1.0 / 12 - ic2 * (1.0 / 360 - ic2 * (1.0 / 1260 - ic2 * (1.0 / 1680 - ic2 / 1188))))
                - ib * (1.0 / 12 - ib2 * (1.0 / 360 - ib2 * (1.0 / 1260 - ib2 * (1.0 / 1680 - ib2 / 1188)))))
    return shift + (b - 0.5) * log1p(p / b) + p * log(c) - p + stirling


def log_gamma_ratio(double b, double p):
    """``ln Gamma(b + p) - ln Gamma(b)`` for ``b > 0`` and ``0 < p < 1``."""
    return _log_gamma_ratio(b, p)


cdef int _hyp(double p, double b, double x, double *out) noexcept nogil:
    cdef double w, v, total = 0.0, log_scale = 0.0, lead, tail
    if x == 0.0:
        out[0] = 1.0
        return 0
    if x <= 1.0:
        w = x / (1.0 + x)
        if _positive_series(b, 1.0 - p, w, &total, &log_scale) != 0:
            return -1
        out[0] = exp(log(total) + log_scale - b * log1p(x))
        return 0
    v = 1.0 / (1.0 + x)
    if _positive_series(b, b + p + 1.0, v, &total, &log_scale) != 0:
        return -1
    lead = exp(p * log(x) + lgamma(1.0 - p) + _log_gamma_ratio(b, p))
    tail = p / (b + p) * exp(log(total) + log_scale - b * log1p(x))
    out[0] = lead + tail
    return 0


def hyp2f1_c1a(double p, double b, double x):
    """``2F1(-p, b; 1 - p; -x)`` for ``0 < p < 1``, ``b > 0``, ``x >= 0``."""
    cdef double out = 0.0
    if _hyp(p, b, x, &out) != 0:
        raise ConvergenceError("hypergeometric series exceeded the term cap")
    return out


def mixture_hyp_sum(double p, double b0, const double[::1] weights, double x):
    """``sum_l weights[l] * (2F1(-p, b0 + l; 1 - p; -x) - 1)``."""
    cdef Py_ssize_t l, n = weights.shape[0]
    cdef double acc = 0.0, value = 0.0
    cdef int status = 0
    with nogil:
        for l in range(n):
            if weights[l] == 0.0:
                continue
            if _hyp(p, b0 + l, x, &value) != 0:
                status = -1
                break
            acc += weights[l] * (value - 1.0)
    if status != 0:
        raise ConvergenceError("hypergeometric series exceeded the term cap")
    return acc


cdef inline double _draw(bitgen_t *bg, int kind, double kappa, double mu, double m,
                         double rate) noexcept nogil:
    cdef int64_t l
    cdef double lam
    if kind == K_NONE:
        return 1.0
    if kind == K_GAMMA:
        if mu == 1.0:
            return random_standard_exponential(bg)
        return random_standard_gamma(bg, mu) / mu
    if kind == K_POISSON_GAMMA:
        l = random_poisson(bg, mu * kappa)
    else:
        lam = random_standard_gamma(bg, m) * (mu * kappa / m)
        l = random_poisson(bg, lam)
    return random_standard_gamma(bg, l + mu) / rate


def simulate_batch(object rng, Py_ssize_t trials, double rho, double delta0,
                   double r_max, double lane, double alpha_i, double gamma0,
                   int kind, double kappa, double mu, double m, bint rayleigh_desired,
                   double gbar_p, double signal_const, double sigma2,
                   thresholds):
    """Success counts, one per threshold, over ``trials`` independent drops."""
    cdef const double[::1] thr = np.ascontiguousarray(thresholds, dtype=np.float64)
    cdef Py_ssize_t n_thr = thr.shape[0]
    successes_arr = np.zeros(n_thr, dtype=np.int64)
    cdef int64_t[::1] successes = successes_arr
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise TypeError("rng must be a numpy Generator")
    cdef bitgen_t *bg = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    cdef double span = r_max - delta0
    cdef double mean_count = rho * span
    cdef double rate = mu * (1.0 + kappa)
    cdef double half_alpha = -0.5 * alpha_i
    cdef int path_mode = 2 if alpha_i == 2.0 else (4 if alpha_i == 4.0 else 0)
    cdef double lane2 = lane * lane
    cdef Py_ssize_t trial, j
    cdef int64_t k, count
    cdef double interference, r, d2, path, gp, signal, noisy
    with rng.bit_generator.lock, nogil:
        for trial in range(trials):
            count = random_poisson(bg, mean_count) if mean_count > 0 else 0
            interference = 0.0
            for k in range(count):
                r = delta0 + span * random_standard_uniform(bg)
                d2 = r * r + lane2
                if path_mode == 2:
                    path = 1.0 / d2
                elif path_mode == 4:
                    path = 1.0 / (d2 * d2)
                else:
                    path = pow(d2, half_alpha)
                interference += gamma0 * _draw(bg, kind, kappa, mu, m, rate) * path
            if rayleigh_desired:
                gp = gbar_p * random_standard_exponential(bg) * random_standard_exponential(bg)
            else:
                gp = 1.0
            signal = signal_const * gp
            noisy = interference + sigma2
            for j in range(n_thr):
                if signal > thr[j] * noisy:
                    successes[j] += 1
    return successes_arr
