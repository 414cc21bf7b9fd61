"""Closed-form ranging success probability.

Two desired-channel families are covered:

* Rayleigh-faded round trip (product of two exponentials), approximated by a
  Gauss-Laguerre exponential mixture and combined with the Laplace transform
  of the interference (:func:`ps_rayleigh_desired`,
  :func:`ps_rayleigh_desired_arbitrary_L`);
* unfaded desired channel with ``alpha_i = 2`` and interferers starting at
  the origin, where the interference is Levy distributed
  (:func:`ps_no_fading_desired`).

Interferers may follow any fading model from :mod:`radar_sg.channels`. The
``method`` switch selects the exact gamma-mixture expansion or the
moment-matched single gamma.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import gammainc

from . import kernels
from .channels import (
    DEFAULT_TOL,
    FadingModel,
    NoFading,
    Rayleigh,
    canonical_params,
    mixture_weights,
    moment_match,
)
from .errors import InvalidArgument, UnsupportedParameters
from .specfun import erfc, gamma_ratio_half, gauss_laguerre_rule, ln_gamma

C_LIGHT = 299_792_458.0
DEFAULT_ORDER = 10


class Method(str, enum.Enum):
    EXACT = "exact"
    APPROX = "approx"

    @classmethod
    def coerce(cls, value) -> "Method":
        try:
            return cls(value)
        except ValueError:
            raise InvalidArgument(f"method must be 'exact' or 'approx', got {value!r}") from None


@dataclass(frozen=True)
class Scenario:
    """Deployment and radio parameters for one evaluation.

    Attributes
    ----------
    R : float
        Distance to the target.
    alpha_d, alpha_i : float
        Path-loss exponents of the desired and interfering links (> 1).
    delta0 : float
        Minimum longitudinal interferer distance.
    L : float
        Inter-lane distance.
    rho_i : float
        Interferer density per unit length.
    gamma0, gamma1 : float
        One-way power constant and target constant; ``c0 = gamma0 * gamma1``.
    sigma2 : float
        Noise power.
    T : float
        Linear SINR threshold.
    gbar_p : float
        Mean power of the desired round-trip channel.
    """

    R: float = 1.0
    alpha_d: float = 4.0
    alpha_i: float = 4.0
    delta0: float = 1.0
    L: float = 0.0
    rho_i: float = 1.0
    gamma0: float = 1.0
    gamma1: float = 1.0
    sigma2: float = 0.0
    T: float = 1.0
    gbar_p: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidArgument(f"scenario field {f.name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise InvalidArgument(f"scenario field {f.name} must be finite, got {value!r}")
            object.__setattr__(self, f.name, float(value))
        for name in ("R", "gamma0", "gamma1", "T", "gbar_p"):
            if getattr(self, name) <= 0:
                raise InvalidArgument(f"scenario field {name} must be > 0, got {getattr(self, name)!r}")
        for name in ("delta0", "L", "rho_i", "sigma2"):
            if getattr(self, name) < 0:
                raise InvalidArgument(f"scenario field {name} must be >= 0, got {getattr(self, name)!r}")
        for name in ("alpha_d", "alpha_i"):
            if getattr(self, name) <= 1:
                raise InvalidArgument(f"scenario field {name} must be > 1, got {getattr(self, name)!r}")

    @property
    def c0(self) -> float:
        return self.gamma0 * self.gamma1

    @property
    def signal_scale(self) -> float:
        """Interference-free mean received signal ``c0 R^(-2 alpha_d)``."""
        return self.c0 * self.R ** (-2.0 * self.alpha_d)

    def with_updates(self, **changes) -> "Scenario":
        return replace(self, **changes)


def scenario_from_physical(G_t: float, P0: float, f: float, sigma_c: float, theta_beam: float,
                           delta0: float, **other) -> Scenario:
    """Build a :class:`Scenario` from antenna and radar quantities.

    ``gamma0 = G_t^2 P0 (c / (4 pi f))^2``, ``gamma1 = sigma_c / (4 pi)`` and
    ``L = delta0 tan(theta_beam / 2)``. Remaining scenario fields pass
    through ``other``.
    """
    for name, value in (("G_t", G_t), ("P0", P0), ("f", f), ("sigma_c", sigma_c)):
        if not (value > 0 and math.isfinite(value)):
            raise InvalidArgument(f"{name} must be positive and finite, got {value!r}")
    if not 0 < theta_beam < math.pi:
        raise InvalidArgument(f"theta_beam must lie in (0, pi), got {theta_beam!r}")
    if "L" in other or "gamma0" in other or "gamma1" in other:
        raise InvalidArgument("L, gamma0 and gamma1 are derived and cannot be passed directly")
    gamma0 = G_t ** 2 * P0 * (C_LIGHT / (4.0 * math.pi * f)) ** 2
    gamma1 = sigma_c / (4.0 * math.pi)
    return Scenario(delta0=delta0, L=delta0 * math.tan(theta_beam / 2.0),
                    gamma0=gamma0, gamma1=gamma1, **other)


# ---------------------------------------------------------------------------
# Interferer descriptions shared by all formulas
# ---------------------------------------------------------------------------

@lru_cache(maxsize=256)
def _mixture(kappa: float, mu: float, m: float, tol: float):
    mix = mixture_weights(kappa, mu, m, tol)
    return np.ascontiguousarray(mix.weights), float(mix.shapes[0]), mix.rate


def _gamma_terms(model: FadingModel, method: Method, tol: float):
    """Return ``(weights, first_shape, scale)`` of the interferer power law.

    Each term ``l`` is Gamma with shape ``first_shape + l`` and scale
    ``scale``; ``None`` marks the unfaded case.
    """
    triple = canonical_params(model)
    if triple is None:
        return None
    kappa, mu, m = triple
    if method is Method.APPROX:
        match = moment_match(kappa, mu, m)
        return np.ones(1), match.shape, match.scale
    weights, shape0, rate = _mixture(kappa, mu, m, tol)
    return weights, shape0, 1.0 / rate


def _levy_coefficient(terms) -> float:
    """``E[sqrt(g)] * sqrt(pi)``: ``pi^(1/2) sum_l w_l Gamma(l+a+1/2)/Gamma(l+a) scale^(1/2)``."""
    if terms is None:
        return math.sqrt(math.pi)
    weights, shape0, scale = terms
    total = 0.0
    for l, w in enumerate(weights):
        total += w * gamma_ratio_half(shape0 + l)
    return math.sqrt(math.pi * scale) * total


def _unfaded_tail_integral(x: float, delta0: float, alpha: float) -> float:
    """``int_delta0^inf (1 - exp(-x r^-alpha)) dr`` in terms of the incomplete gamma."""
    p = 1.0 / alpha
    big = x / delta0 ** alpha
    lead = x ** p * math.exp(ln_gamma(1.0 - p)) * float(gammainc(1.0 - p, big))
    return lead - delta0 * -math.expm1(-big)


def _interference_exponent(s: float, scn: Scenario, terms) -> float:
    """``-log L_I(s)`` for the one-sided field, ignoring the lane offset."""
    if s == 0 or scn.rho_i == 0:
        return 0.0
    x = s * scn.gamma0
    if scn.delta0 == 0:
        if scn.alpha_i != 2:
            raise UnsupportedParameters(
                "delta0 = 0 is only supported for alpha_i = 2 (Levy closed form)")
        return scn.rho_i * math.sqrt(x) * _levy_coefficient(terms)
    if terms is None:
        return scn.rho_i * _unfaded_tail_integral(x, scn.delta0, scn.alpha_i)
    weights, shape0, scale = terms
    p = 1.0 / scn.alpha_i
    arg = x * scale / scn.delta0 ** scn.alpha_i
    return scn.rho_i * scn.delta0 * kernels.mixture_hyp_sum(p, shape0, weights, arg)


def laplace_interference(s: float, scn: Scenario, model: FadingModel,
                         method=Method.EXACT, tol: float = DEFAULT_TOL) -> float:
    """Laplace transform ``E[exp(-s I)]`` of the aggregate interference.

    Interferers form a Poisson field of density ``rho_i`` on ``(delta0, inf)``
    with path loss ``r^-alpha_i`` (the lane offset ``L`` is neglected; see
    :func:`laplace_interference_rayleigh_L` for the exact lane-aware form).

    Parameters
    ----------
    s : float
        Transform variable, ``s >= 0``.
    scn : Scenario
    model : FadingModel
        Interferer fading.
    method : {"exact", "approx"}
        Gamma-mixture expansion or moment-matched single gamma.
    tol : float
        Mixture truncation tolerance.

    Raises
    ------
    UnsupportedParameters
        For ``delta0 = 0`` with ``alpha_i != 2``.
    """
    if not (s >= 0 and math.isfinite(s)):
        raise InvalidArgument(f"s must be finite and >= 0, got {s!r}")
    method = Method.coerce(method)
    return math.exp(-_interference_exponent(s, scn, _gamma_terms(model, method, tol)))


def laplace_interference_rayleigh_L(s: float, scn: Scenario) -> float:
    """Laplace transform for Rayleigh interferers with ``alpha_i = 2`` and any ``L``.

    ``exp(-rho_i s gamma0 arccot(delta0 / q) / q)`` with
    ``q = sqrt(L^2 + s gamma0)``.
    """
    if scn.alpha_i != 2:
        raise UnsupportedParameters("the lane-aware closed form requires alpha_i = 2")
    if not (s >= 0 and math.isfinite(s)):
        raise InvalidArgument(f"s must be finite and >= 0, got {s!r}")
    x = s * scn.gamma0
    if x == 0 or scn.rho_i == 0:
        return 1.0
    q = math.sqrt(scn.L * scn.L + x)
    # arccot(delta0 / q) on (0, pi/2]
    return math.exp(-scn.rho_i * x * math.atan2(q, scn.delta0) / q)


# ---------------------------------------------------------------------------
# Success probability
# ---------------------------------------------------------------------------

def _quadrature_sum(scn: Scenario, order: int, laplace) -> float:
    rule = gauss_laguerre_rule(order)
    base = scn.T / (scn.signal_scale * scn.gbar_p)
    total = 0.0
    for t, w in zip(rule.nodes, rule.weights):
        s = base / t
        total += w * laplace(s) * math.exp(-s * scn.sigma2)
    return total


def ps_rayleigh_desired(scn: Scenario, model: FadingModel, method=Method.EXACT,
                        order: int = DEFAULT_ORDER, tol: float = DEFAULT_TOL) -> float:
    """Success probability with a Rayleigh-faded round trip.

    ``sum_i w_i L_I(s_i) exp(-s_i sigma2)`` with
    ``s_i = T R^(2 alpha_d) / (c0 t_i gbar_p)`` and ``(t_i, w_i)`` the order-``order``
    Gauss-Laguerre rule.
    """
    method = Method.coerce(method)
    terms = _gamma_terms(model, method, tol)
    return _quadrature_sum(scn, order, lambda s: math.exp(-_interference_exponent(s, scn, terms)))


def ps_rayleigh_desired_arbitrary_L(scn: Scenario, order: int = DEFAULT_ORDER) -> float:
    """Rayleigh round trip, Rayleigh interferers, ``alpha_i = 2``, any lane offset."""
    if scn.alpha_i != 2:
        raise UnsupportedParameters("the lane-aware closed form requires alpha_i = 2")
    return _quadrature_sum(scn, order, lambda s: laplace_interference_rayleigh_L(s, scn))


def ps_no_fading_desired(scn: Scenario, model: FadingModel, method=Method.EXACT,
                         tol: float = DEFAULT_TOL) -> float:
    """Success probability with an unfaded desired channel.

    Valid for ``alpha_i = 2`` and ``delta0 = L = 0``, where the interference
    is Levy distributed: ``P_s = erfc(A / (2 sqrt(S0/T - sigma2)))`` with
    ``A = rho_i sqrt(gamma0) sqrt(pi) E[sqrt(g)]``. Returns 0 when the
    interference-free signal already misses the threshold.
    """
    method = Method.coerce(method)
    problems = []
    if scn.alpha_i != 2:
        problems.append("alpha_i = 2")
    if scn.delta0 != 0:
        problems.append("delta0 = 0")
    if scn.L != 0:
        problems.append("L = 0")
    if problems:
        raise UnsupportedParameters(
            "the unfaded-desired closed form requires " + ", ".join(problems))
    margin = scn.signal_scale / scn.T - scn.sigma2
    if margin <= 0:
        return 0.0
    a = scn.rho_i * math.sqrt(scn.gamma0) * _levy_coefficient(_gamma_terms(model, method, tol))
    return erfc(a / (2.0 * math.sqrt(margin)))


def ps_closed_form(scn: Scenario, desired: str, model: FadingModel, method=Method.EXACT,
                   order: int = DEFAULT_ORDER, tol: float = DEFAULT_TOL) -> float:
    """Dispatch to the closed form matching ``desired`` in ``{"rayleigh", "none"}``.

    A Rayleigh round trip with Rayleigh interferers, ``alpha_i = 2`` and
    ``L > 0`` uses the lane-aware expression; every other Rayleigh case uses
    the lane-free one.
    """
    if desired == "rayleigh":
        if scn.L > 0 and isinstance(model, Rayleigh) and scn.alpha_i == 2:
            return ps_rayleigh_desired_arbitrary_L(scn, order)
        return ps_rayleigh_desired(scn, model, method, order, tol)
    if desired == "none":
        return ps_no_fading_desired(scn, model, method, tol)
    raise InvalidArgument(f"desired must be 'rayleigh' or 'none', got {desired!r}")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


__all__ = [
    "C_LIGHT", "DEFAULT_ORDER", "Method", "NoFading", "Scenario", "db_to_linear",
    "laplace_interference", "laplace_interference_rayleigh_L", "linear_to_db",
    "ps_closed_form", "ps_no_fading_desired", "ps_rayleigh_desired",
    "ps_rayleigh_desired_arbitrary_L", "scenario_from_physical",
]
