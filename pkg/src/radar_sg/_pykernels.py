"""Pure-Python implementations of the hot kernels.

Same signatures as the compiled ``_ckernels`` module. Used when the
extension is not built or when ``RADAR_SG_PURE_PYTHON=1`` is set.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError

# fading kinds understood by simulate_batch
NO_FADING = 0
GAMMA = 1
POISSON_GAMMA = 2
NEGBIN_GAMMA = 3

_MAX_TERMS = 10_000_000
_RESCALE = 1e250


def _positive_series(first_ratio_num: float, den: float, w: float) -> tuple[float, float]:
    """Sum ``sum_n (u)_n / (d)_n w^n`` for ``u, d > 0`` and ``0 <= w < 1``.

    Returns ``(mantissa, log_scale)``; the sum is ``mantissa * exp(log_scale)``.
    """
    u = first_ratio_num
    term = 1.0
    total = 1.0
    log_scale = 0.0
    n = 0
    while True:
        ratio = (u + n) / (den + n) * w
        term *= ratio
        total += term
        n += 1
        bound = max(ratio, w)
        if bound < 1.0 and term * bound / (1.0 - bound) <= 1e-17 * total:
            break
        if total > _RESCALE:
            total /= _RESCALE
            term /= _RESCALE
            log_scale += math.log(_RESCALE)
        if n > _MAX_TERMS:
            raise ConvergenceError(f"hypergeometric series exceeded {_MAX_TERMS} terms")
    return total, log_scale


def log_gamma_ratio(b: float, p: float) -> float:
    """``ln Gamma(b + p) - ln Gamma(b)`` for ``b > 0`` and ``0 < p < 1``.

    Differencing two large ``lgamma`` values loses about ``ln b`` ulps; here
    the argument is shifted above 20 with ``log1p`` terms and the Stirling
    expansions are subtracted analytically, so no large terms cancel.
    """
    shift = 0.0
    while b < 20.0:
        shift -= math.log1p(p / b)
        b += 1.0
    c = b + p
    ic, ib = 1.0 / c, 1.0 / b
    ic2, ib2 = ic * ic, ib * ib
    stirling = (ic * (1 / 12 - ic2 * (1 / 360 - ic2 * (1 / 1260 - ic2 * (1 / 1680 - ic2 / 1188))))
                - ib * (1 / 12 - ib2 * (1 / 360 - ib2 * (1 / 1260 - ib2 * (1 / 1680 - ib2 / 1188)))))
    return shift + (b - 0.5) * math.log1p(p / b) + p * math.log(c) - p + stirling


def hyp2f1_c1a(p: float, b: float, x: float) -> float:
    """``2F1(-p, b; 1 - p; -x)`` for ``0 < p < 1``, ``b > 0``, ``x >= 0``."""
    if x == 0.0:
        return 1.0
    if x <= 1.0:
        w = x / (1.0 + x)
        total, log_scale = _positive_series(b, 1.0 - p, w)
        return math.exp(math.log(total) + log_scale - b * math.log1p(x))
    v = 1.0 / (1.0 + x)
    total, log_scale = _positive_series(b, b + p + 1.0, v)
    lead = math.exp(p * math.log(x) + math.lgamma(1.0 - p) + log_gamma_ratio(b, p))
    tail = p / (b + p) * math.exp(math.log(total) + log_scale - b * math.log1p(x))
    return lead + tail


def mixture_hyp_sum(p: float, b0: float, weights: np.ndarray, x: float) -> float:
    """``sum_l weights[l] * (2F1(-p, b0 + l; 1 - p; -x) - 1)``."""
    acc = 0.0
    for l, w in enumerate(weights):
        if w == 0.0:
            continue
        acc += w * (hyp2f1_c1a(p, b0 + l, x) - 1.0)
    return acc


def draw_power(rng: np.random.Generator, kind: int, kappa: float, mu: float, m: float,
               size: int) -> np.ndarray:
    """Vectorised unit-mean fading power draws for one of the kind codes."""
    if kind == NO_FADING:
        return np.ones(size)
    rate = mu * (1.0 + kappa)
    if kind == GAMMA:
        return rng.standard_gamma(mu, size) / mu
    if kind == POISSON_GAMMA:
        l = rng.poisson(mu * kappa, size)
    else:
        lam = rng.standard_gamma(m, size) * (mu * kappa / m)
        l = rng.poisson(lam)
    return rng.standard_gamma(l + mu) / rate


def simulate_batch(rng: np.random.Generator, trials: int, rho: float, delta0: float,
                   r_max: float, lane: float, alpha_i: float, gamma0: float,
                   kind: int, kappa: float, mu: float, m: float, rayleigh_desired: bool,
                   gbar_p: float, signal_const: float, sigma2: float,
                   thresholds: np.ndarray) -> np.ndarray:
    """Success counts, one per threshold, over ``trials`` independent drops."""
    counts = rng.poisson(rho * (r_max - delta0), trials)
    total = int(counts.sum())
    r = delta0 + (r_max - delta0) * rng.random(total)
    g = draw_power(rng, kind, kappa, mu, m, total)
    d2 = r * r + lane * lane
    if alpha_i == 2.0:
        path = 1.0 / d2
    elif alpha_i == 4.0:
        path = 1.0 / (d2 * d2)
    else:
        path = d2 ** (-0.5 * alpha_i)
    owner = np.repeat(np.arange(trials), counts)
    interference = np.bincount(owner, weights=gamma0 * g * path, minlength=trials)
    if rayleigh_desired:
        gp = gbar_p * rng.standard_exponential(trials) * rng.standard_exponential(trials)
    else:
        gp = np.ones(trials)
    signal = signal_const * gp
    noisy = interference + sigma2
    thresholds = np.asarray(thresholds, dtype=float)
    return np.array([np.count_nonzero(signal > t * noisy) for t in thresholds], dtype=np.int64)
