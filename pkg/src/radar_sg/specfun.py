"""Special functions and Gauss-Laguerre quadrature.

Everything here is a pure function of its arguments. The hypergeometric
series runs in the compiled kernel when it is available (see
:mod:`radar_sg.kernels`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConvergenceError, InvalidArgument

__all__ = [
    "QuadratureRule",
    "gauss_laguerre_rule",
    "hyp2f1_negz",
    "erfc",
    "ln_gamma",
    "gamma_ratio_half",
    "bessel_k0",
    "bessel_k1",
]

EULER_GAMMA = 0.57721566490153286061
_SQRT_PI = math.sqrt(math.pi)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# B_{2k} / (2k (2k-1)) for the Stirling series, k = 1..8
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)


def _zeta_minus_one(k: int) -> float:
    # zeta(k) - 1 by Euler-Maclaurin summation from n = 10
    n0 = 10
    head = math.fsum(n ** -k for n in range(2, n0))
    tail = n0 ** (1 - k) / (k - 1) + 0.5 * n0 ** -k
    rising = float(k)
    power = n0 ** (-k - 1)
    for j, b2j in enumerate((1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730), start=1):
        tail += b2j / math.factorial(2 * j) * rising * power
        rising *= (k + 2 * j - 1) * (k + 2 * j)
        power /= n0 * n0
    return head + tail


# (-1)^k (zeta(k) - 1) / k for the expansion of ln Gamma about 1 and 2
_LNGAMMA_SERIES = tuple((-1) ** k * _zeta_minus_one(k) / k for k in range(2, 64))


# ---------------------------------------------------------------------------
# Gauss-Laguerre
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Laguerre rule for the weight ``exp(-t)`` on ``[0, inf)``.

    ``nodes`` are ascending; ``weights`` sum to one. Both arrays are
    read-only so a rule can be shared freely.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, func) -> float:
        """Approximate ``int_0^inf exp(-t) func(t) dt``."""
        return float(np.dot(self.weights, func(self.nodes)))


def _laguerre_pair(n: int, t: float) -> tuple[float, float, float]:
    """Return ``(L_n(t), L_{n-1}(t), log_scale)`` with both values scaled.

    The true polynomial values are ``value * exp(log_scale)``; rescaling
    keeps the recurrence finite for large ``n`` and ``t``.
    """
    p_prev, p = 1.0, 1.0 - t
    log_scale = 0.0
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1 - t) * p - k * p_prev) / (k + 1)
        if abs(p) > 1e150:
            p_prev *= 1e-150
            p *= 1e-150
            log_scale += 150.0 * math.log(10.0)
    return p, p_prev, log_scale


@lru_cache(maxsize=64)
def gauss_laguerre_rule(order: int) -> QuadratureRule:
    """Nodes and weights of the order-``order`` Gauss-Laguerre rule.

    Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix of
    the Laguerre recurrence (Golub-Welsch), refined by Newton steps on
    ``L_N``. Weights come from the first eigenvector components where those
    are well conditioned; below ``1e-6`` they switch to
    ``w_i = t_i / (N L_{N-1}(t_i))**2``, which keeps full relative accuracy
    for the tiny weights at the largest nodes. Weights smaller than the
    float64 range underflow to 0.0 (only for orders above roughly 180).

    Parameters
    ----------
    order : int
        Number of nodes, ``1 <= order <= 200``.

    Raises
    ------
    InvalidArgument
        If ``order`` is not an integer in ``[1, 200]``.
    """
    if isinstance(order, bool) or int(order) != order or not 1 <= order <= 200:
        raise InvalidArgument(f"quadrature order must be an integer in [1, 200], got {order!r}")
    n = int(order)
    if n == 1:
        nodes = np.array([1.0])
        weights = np.array([1.0])
    else:
        diag = 2.0 * np.arange(n) + 1.0
        off = np.arange(1.0, n)
        jacobi = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
        eigvals, eigvecs = np.linalg.eigh(jacobi)
        order_idx = np.argsort(eigvals)
        nodes = eigvals[order_idx]
        weights = eigvecs[0, order_idx] ** 2
        for i, t in enumerate(nodes):
            for _ in range(4):
                p, p_prev, _scale = _laguerre_pair(n, t)
                # L_n / L_n' with L_n' = n (L_n - L_{n-1}) / t
                step = p * t / (n * (p - p_prev))
                t -= step
                if abs(step) <= 4e-16 * t:
                    break
            nodes[i] = t
            if weights[i] < 1e-6:
                _p, p_prev, scale = _laguerre_pair(n, t)
                weights[i] = math.exp(math.log(t) - 2.0 * (math.log(n * abs(p_prev)) + scale))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(order=n, nodes=nodes, weights=weights)


# ---------------------------------------------------------------------------
# Gauss hypergeometric function on the negative real axis
# ---------------------------------------------------------------------------

def hyp2f1_negz(a: float, b: float, c: float, z: float) -> float:
    """``2F1(a, b; 1 + a; z)`` for ``-1 < a < 0``, ``b > 0`` and ``z <= 0``.

    This is the family produced by integrating ``1 - (1 + s r^-alpha)^-b``
    over a half line, with ``a = -1/alpha``. Two positive-term series cover
    the whole half axis:

    * ``|z| <= 1``: the Pfaff transform
      ``(1 - z)^-b 2F1(1, b; 1 + a; z / (z - 1))``;
    * ``|z| > 1``: inversion about ``1/z``, whose first branch terminates
      because ``c = 1 + a``, leaving
      ``X^-a G(1+a) G(b-a) / G(b) + a/(a-b) (1+X)^-b 2F1(b, 1; b-a+1; 1/(1+X))``
      with ``X = -z``.

    Neither branch cancels, so the relative accuracy is close to machine
    precision for any ``|z|``.

    Raises
    ------
    InvalidArgument
        On non-finite input, ``c`` a nonpositive integer, ``c != 1 + a`` or
        any argument outside the ranges above.
    """
    for name, v in (("a", a), ("b", b), ("c", c), ("z", z)):
        if not math.isfinite(v):
            raise InvalidArgument(f"{name} must be finite, got {v!r}")
    if c <= 0 and c == math.floor(c):
        raise InvalidArgument(f"c must not be a nonpositive integer, got {c!r}")
    if not -1.0 < a < 0.0:
        raise InvalidArgument(f"a must lie in (-1, 0), got {a!r}")
    if abs(c - (1.0 + a)) > 1e-12:
        raise InvalidArgument(f"only c = 1 + a is supported, got a={a!r}, c={c!r}")
    if b <= 0:
        raise InvalidArgument(f"b must be positive, got {b!r}")
    if z > 0:
        raise InvalidArgument(f"z must be nonpositive, got {z!r}")
    if z == 0:
        return 1.0
    return kernels.hyp2f1_c1a(-a, b, -z)


# ---------------------------------------------------------------------------
# Gamma function
# ---------------------------------------------------------------------------

def ln_gamma(x: float) -> float:
    """Natural logarithm of the gamma function for ``x > 0``.

    On ``[0.5, 2.5]`` a zeta-function series about 1 or 2 keeps the relative
    error small next to the zeros; elsewhere the argument is shifted above 15
    with the recurrence and the Stirling series is summed.
    """
    if not x > 0 or not math.isfinite(x):
        raise InvalidArgument(f"ln_gamma requires finite x > 0, got {x!r}")
    if 0.5 <= x <= 2.5:
        return _ln_gamma_near_roots(x)
    shift = 0.0
    if x < 15.0:
        prod = 1.0
        while x < 15.0:
            prod *= x
            x += 1.0
        shift = math.log(prod)
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    for coef in reversed(_STIRLING):
        series = series * inv2 + coef
    series *= inv
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series - shift


def _ln_gamma_near_roots(x: float) -> float:
    # ln Gamma(2 + e) = (1 - gamma) e + sum_k (-1)^k (zeta(k) - 1) e^k / k, and
    # ln Gamma(1 + e) = that - log1p(e); accurate relative to the zeros at 1 and 2
    eps = x - 2.0 if x >= 1.5 else x - 1.0
    total = 0.0
    power = eps
    for coef in _LNGAMMA_SERIES:
        power *= eps
        term = coef * power
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    total += (1.0 - EULER_GAMMA) * eps
    if x < 1.5:
        total -= math.log1p(eps)
    return total


def gamma_ratio_half(x: float) -> float:
    """``Gamma(x + 1/2) / Gamma(x)`` evaluated in log space."""
    return math.exp(ln_gamma(x + 0.5) - ln_gamma(x))


# ---------------------------------------------------------------------------
# Complementary error function
# ---------------------------------------------------------------------------

def _erf_series(x: float) -> float:
    # erf(x) = 2/sqrt(pi) exp(-x^2) sum 2^n x^(2n+1) / (2n+1)!!, positive terms
    x2 = x * x
    term = x
    total = x
    n = 0
    while True:
        n += 1
        term *= 2.0 * x2 / (2 * n + 1)
        total += term
        if term <= 1e-17 * total:
            break
    return 2.0 / _SQRT_PI * math.exp(-x2) * total


def _erfc_cf(x: float) -> float:
    # erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    # evaluated with the modified Lentz algorithm
    tiny = 1e-300
    f = x
    c = x
    d = 0.0
    for n in range(1, 5000):
        an = 0.5 * n
        d = x + an * d
        d = tiny if d == 0 else d
        c = x + an / c
        c = tiny if c == 0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:  # pragma: no cover - converges in well under 5000 steps for x >= 2
        raise ConvergenceError(f"erfc continued fraction did not converge at x={x!r}")
    return math.exp(-x * x) / (_SQRT_PI * f)


def erfc(x: float) -> float:
    """Complementary error function.

    Positive-term series for ``|x| < 2``, continued fraction above, and the
    reflection ``erfc(-x) = 2 - erfc(x)`` for negative arguments.
    """
    if not math.isfinite(x):
        raise InvalidArgument(f"erfc requires a finite argument, got {x!r}")
    if x < 0:
        return 2.0 - erfc(-x)
    if x == 0.0:
        return 1.0
    if x < 2.0:
        return 1.0 - _erf_series(x)
    if x > 27.3:
        return 0.0
    return _erfc_cf(x)


# ---------------------------------------------------------------------------
# Modified Bessel functions of the second kind, orders 0 and 1
# ---------------------------------------------------------------------------

def _bessel_k_series(x: float) -> tuple[float, float]:
    # Power series about 0 (A&S 9.6.13 and 9.6.11 with n = 1)
    y = 0.25 * x * x
    log_half = math.log(0.5 * x)
    term0 = 1.0          # y^k / (k!)^2
    term1 = 1.0          # y^k / (k! (k+1)!)
    harmonic = 0.0       # H_k
    i0 = 1.0
    i1 = 1.0
    s0 = 0.0             # sum H_k y^k/(k!)^2, k >= 1
    s1 = 1.0 - 2.0 * EULER_GAMMA  # sum (psi(k+1) + psi(k+2)) y^k/(k!(k+1)!)
    k = 0
    while True:
        k += 1
        term0 *= y / (k * k)
        term1 *= y / (k * (k + 1))
        harmonic += 1.0 / k
        i0 += term0
        i1 += term1
        s0 += harmonic * term0
        psi_sum = 2.0 * (harmonic - EULER_GAMMA) + 1.0 / (k + 1)
        s1 += psi_sum * term1
        if term0 < 1e-18 * i0 and term1 < 1e-18 * i1:
            break
    k0 = -(log_half + EULER_GAMMA) * i0 + s0
    half_x = 0.5 * x
    k1 = 1.0 / x + log_half * half_x * i1 - 0.5 * half_x * s1
    return k0, k1


def _bessel_k_cf2(x: float) -> tuple[float, float]:
    # Steed's continued fraction CF2 (Temme's normalisation), order 0 and 1
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 10000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    else:  # pragma: no cover
        raise ConvergenceError(f"Bessel K continued fraction did not converge at x={x!r}")
    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def _bessel_k01(x: float) -> tuple[float, float]:
    if not x > 0 or not math.isfinite(x):
        raise InvalidArgument(f"Bessel K requires finite x > 0, got {x!r}")
    if x < 2.0:
        return _bessel_k_series(x)
    return _bessel_k_cf2(x)


def bessel_k0(x: float) -> float:
    """Modified Bessel function of the second kind, order zero."""
    return _bessel_k01(x)[0]


def bessel_k1(x: float) -> float:
    """Modified Bessel function of the second kind, order one."""
    return _bessel_k01(x)[1]
