"""Fading models, gamma-mixture representations and the product channel.

All fading powers have unit mean. A kappa-mu shadowed power with parameters
``(kappa, mu, m)`` has the exact representation

    f(x) = sum_l w_l Gamma(x; shape l + mu, rate mu (1 + kappa))

with negative-binomial weights ``w_l`` (size ``m``, success probability
``mu kappa / (mu kappa + m)``); as ``m -> inf`` the weights become Poisson
with mean ``mu kappa``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from . import kernels
from .errors import ConvergenceError, InvalidArgument
from .specfun import QuadratureRule, bessel_k0, bessel_k1, gauss_laguerre_rule, ln_gamma

INF = math.inf
MAX_MIXTURE_TERMS = 100_000
DEFAULT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Fading models
# ---------------------------------------------------------------------------

def _check_positive(name, value, allow_inf=False):
    if not (value > 0) or (math.isinf(value) and not allow_inf) or math.isnan(value):
        raise InvalidArgument(f"{name} must be positive{' or inf' if allow_inf else ''}, got {value!r}")


def _check_nonnegative(name, value):
    if not (value >= 0) or not math.isfinite(value):
        raise InvalidArgument(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class NoFading:
    """Deterministic unit channel power."""

    def spec(self) -> str:
        return "none"


@dataclass(frozen=True)
class Rayleigh:
    """Exponential power with unit mean."""

    def spec(self) -> str:
        return "rayleigh"


@dataclass(frozen=True)
class Nakagami:
    """Nakagami-m power: Gamma(m, 1/m)."""

    m: float

    def __post_init__(self):
        _check_positive("Nakagami m", self.m)

    def spec(self) -> str:
        return f"nakagami:m={self.m!r}"


@dataclass(frozen=True)
class Rician:
    """Rician power with factor ``K``."""

    K: float

    def __post_init__(self):
        _check_nonnegative("Rician K", self.K)

    def spec(self) -> str:
        return f"rician:K={self.K!r}"


@dataclass(frozen=True)
class KappaMu:
    kappa: float
    mu: float

    def __post_init__(self):
        _check_nonnegative("kappa", self.kappa)
        _check_positive("mu", self.mu)

    def spec(self) -> str:
        return f"km:k={self.kappa!r},mu={self.mu!r}"


@dataclass(frozen=True)
class RicianShadowed:
    K: float
    m: float

    def __post_init__(self):
        _check_nonnegative("Rician K", self.K)
        _check_positive("shadowing m", self.m)

    def spec(self) -> str:
        return f"rs:K={self.K!r},m={self.m!r}"


@dataclass(frozen=True)
class KappaMuShadowed:
    """The general model; ``m = inf`` means no shadowing (kappa-mu)."""

    kappa: float
    mu: float
    m: float

    def __post_init__(self):
        _check_nonnegative("kappa", self.kappa)
        _check_positive("mu", self.mu)
        _check_positive("shadowing m", self.m, allow_inf=True)

    def spec(self) -> str:
        return f"kms:k={self.kappa!r},mu={self.mu!r},m={self.m!r}"


FadingModel = Union[NoFading, Rayleigh, Nakagami, Rician, KappaMu, RicianShadowed, KappaMuShadowed]
Triple = Tuple[float, float, float]


def canonical_params(model: FadingModel) -> Optional[Triple]:
    """Map a fading model to its ``(kappa, mu, m)`` triple.

    ``NoFading`` has no finite triple (it is the limit ``m_hat -> inf`` of
    Nakagami) and maps to ``None``.
    """
    if isinstance(model, NoFading):
        return None
    if isinstance(model, Rayleigh):
        return (0.0, 1.0, INF)
    if isinstance(model, Nakagami):
        return (0.0, float(model.m), INF)
    if isinstance(model, Rician):
        return (float(model.K), 1.0, INF)
    if isinstance(model, KappaMu):
        return (float(model.kappa), float(model.mu), INF)
    if isinstance(model, RicianShadowed):
        return (float(model.K), 1.0, float(model.m))
    if isinstance(model, KappaMuShadowed):
        return (float(model.kappa), float(model.mu), float(model.m))
    raise InvalidArgument(f"unknown fading model {model!r}")


def parse_model(text: str) -> FadingModel:
    """Parse a model string such as ``kms:k=1,mu=2,m=3`` or ``nakagami:m=2``.

    Recognised kinds: ``none``, ``rayleigh``, ``nakagami:m=``, ``rician:K=``,
    ``km:k=,mu=``, ``rs:K=,m=``, ``kms:k=,mu=,m=`` (``m=inf`` allowed).
    """
    kind, _, rest = text.strip().partition(":")
    kind = kind.lower()
    params = {}
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise InvalidArgument(f"malformed model parameter {item!r} in {text!r}")
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise InvalidArgument(f"model parameter {key.strip()!r} is not a number: {value!r}") from None

    def take(*names):
        missing = [n for n in names if n not in params]
        extra = set(params) - set(names)
        if missing or extra:
            raise InvalidArgument(
                f"model {kind!r} expects parameters {list(names)}, got {sorted(params)}")
        return [params[n] for n in names]

    if kind in ("none", "nofading"):
        take()
        return NoFading()
    if kind == "rayleigh":
        take()
        return Rayleigh()
    if kind == "nakagami":
        return Nakagami(*take("m"))
    if kind == "rician":
        return Rician(*take("K"))
    if kind in ("km", "kappamu"):
        return KappaMu(*take("k", "mu"))
    if kind in ("rs", "ricianshadowed"):
        return RicianShadowed(*take("K", "m"))
    if kind in ("kms", "kappamushadowed"):
        return KappaMuShadowed(*take("k", "mu", "m"))
    raise InvalidArgument(f"unknown fading model kind {kind!r}")


# ---------------------------------------------------------------------------
# Gamma mixture and moment matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaMixture:
    """Truncated gamma mixture ``sum_l weights[l] Gamma(shapes[l], rate)``."""

    weights: np.ndarray
    shapes: np.ndarray
    rate: float
    truncation_mass: float

    @property
    def first_shape(self) -> float:
        return float(self.shapes[0])

    def moment(self, order: int) -> float:
        """Raw moment of the (truncated) mixture."""
        # E[X^k] for Gamma(a, rate c) is Gamma(a + k) / (Gamma(a) c^k)
        logs = [ln_gamma(a + order) - ln_gamma(a) for a in self.shapes]
        return float(np.dot(self.weights, np.exp(logs))) / self.rate ** order

    def pdf(self, x: float) -> float:
        if x <= 0:
            raise InvalidArgument(f"pdf requires x > 0, got {x!r}")
        c = self.rate
        total = 0.0
        log_cx = math.log(c * x)
        for w, a in zip(self.weights, self.shapes):
            if w > 0:
                total += w * math.exp((a - 1.0) * log_cx - c * x - ln_gamma(a)) * c
        return total


def mixture_weights(kappa: float, mu: float, m: float, tol: float = DEFAULT_TOL) -> GammaMixture:
    """Gamma-mixture weights of the kappa-mu shadowed power.

    Terms ``l = 0, 1, ...`` are kept until the captured probability reaches
    ``1 - tol``. ``m = inf`` gives the Poisson weights of the kappa-mu
    limit. Weights are computed in log space.

    Raises
    ------
    InvalidArgument
        For ``tol`` outside ``(0, 1)`` or invalid fading parameters.
    ConvergenceError
        If more than ``MAX_MIXTURE_TERMS`` terms would be needed.
    """
    if not 0 < tol < 1:
        raise InvalidArgument(f"tol must lie in (0, 1), got {tol!r}")
    _check_nonnegative("kappa", kappa)
    _check_positive("mu", mu)
    _check_positive("m", m, allow_inf=True)
    rate = mu * (1.0 + kappa)
    mk = mu * kappa
    if mk == 0:  # also catches a subnormal kappa whose product underflows
        return GammaMixture(np.array([1.0]), np.array([float(mu)]), rate, 1.0)
    if math.isinf(m):
        log_w0 = -mk
        log_step = math.log(mk)

        def log_weight(l):
            return log_w0 + l * log_step - ln_gamma(l + 1.0)
    else:
        log_q = math.log(mk) - math.log(mk + m)
        log_1mq = math.log(m) - math.log(mk + m)
        lg_m = ln_gamma(m)

        def log_weight(l):
            return ln_gamma(m + l) - lg_m - ln_gamma(l + 1.0) + l * log_q + m * log_1mq

    weights = []
    # Neumaier-compensated running mass, so thousands of tiny terms do not drift
    cumulative = carry = 0.0
    target = 1.0 - tol
    l = 0
    while cumulative + carry < target:
        if l >= MAX_MIXTURE_TERMS:
            raise ConvergenceError(
                f"mixture for kappa={kappa}, mu={mu}, m={m} needs more than {MAX_MIXTURE_TERMS} terms "
                f"(captured mass {cumulative:.3g})")
        w = math.exp(log_weight(l))
        weights.append(w)
        total = cumulative + w
        carry += (cumulative - total) + w if cumulative >= w else (w - total) + cumulative
        cumulative = total
        l += 1
    mass = math.fsum(weights)
    weights = np.array(weights)
    shapes = mu + np.arange(len(weights), dtype=float)
    return GammaMixture(weights, shapes, rate, float(min(mass, 1.0)))


@dataclass(frozen=True)
class GammaMatch:
    """Single gamma law with unit mean: ``shape * scale == 1``."""

    shape: float
    scale: float


def moment_match(kappa: float, mu: float, m: float) -> GammaMatch:
    """Two-moment gamma approximation of a unit-mean kappa-mu shadowed power."""
    _check_nonnegative("kappa", kappa)
    _check_positive("mu", mu)
    _check_positive("m", m, allow_inf=True)
    if math.isinf(m):
        k = mu * (1.0 + kappa) ** 2 / (1.0 + 2.0 * kappa)
    else:
        k = m * mu * (1.0 + kappa) ** 2 / (m + mu * kappa ** 2 + 2.0 * m * kappa)
    return GammaMatch(shape=k, scale=1.0 / k)


def kappa_mu_shadowed_pdf(x: float, kappa: float, mu: float, m: float,
                          tol: float = DEFAULT_TOL) -> float:
    """Density of the unit-mean kappa-mu shadowed power at ``x > 0``.

    The dropped mixture terms all have shape at least one, so their density
    is bounded by the rate ``c``; the mixture is truncated at mass
    ``1 - tol / c`` to keep the absolute error below ``tol``.
    """
    if not x > 0:
        raise InvalidArgument(f"pdf requires x > 0, got {x!r}")
    rate = mu * (1.0 + kappa)
    inner_tol = min(tol, tol / rate)
    mix = mixture_weights(kappa, mu, m, inner_tol)
    if (1.0 - mix.truncation_mass) * rate > tol * (1 + 1e-6):
        raise ConvergenceError(f"truncation error bound exceeds tol={tol!r}")
    return mix.pdf(x)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def fading_kind(triple: Optional[Triple]) -> int:
    """Kernel sampler code for a canonical triple (``None`` = no fading)."""
    if triple is None:
        return kernels.NO_FADING
    kappa, _mu, m = triple
    if kappa == 0:
        return kernels.GAMMA
    if math.isinf(m):
        return kernels.POISSON_GAMMA
    return kernels.NEGBIN_GAMMA


def sample_power(kappa: float, mu: float, m: float, rng: np.random.Generator, size=None):
    """Draw unit-mean kappa-mu shadowed powers.

    Finite ``m``: ``lam ~ Gamma(m, mu kappa / m)``, ``l ~ Poisson(lam)``,
    power ``~ Gamma(l + mu, rate mu (1 + kappa))``. Gamma-Poisson
    compounding yields the negative-binomial index for any real ``m > 0``.
    ``m = inf`` draws ``l ~ Poisson(mu kappa)`` directly and ``kappa = 0`` is
    plain ``Gamma(mu, rate mu)``.

    Returns a float when ``size`` is None, otherwise an array.
    """
    n = 1 if size is None else size
    out = kernels._pykernels.draw_power(rng, fading_kind((kappa, mu, m)), kappa, mu, m, n)
    return float(out[0]) if size is None else out


def sample_model(model: FadingModel, rng: np.random.Generator, size=None):
    """Draw powers for any fading model (``NoFading`` gives ones)."""
    triple = canonical_params(model)
    if triple is None:
        return 1.0 if size is None else np.ones(size)
    return sample_power(*triple, rng, size=size)


# ---------------------------------------------------------------------------
# Rayleigh-Rayleigh product channel
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductChannel:
    """Exponential-mixture surrogate of ``g_p = g_0 g_0'``.

    Component ``i`` is exponential with mean ``mean_power * rule.nodes[i]``
    and weight ``rule.weights[i]``.
    """

    mean_power: float
    rule: QuadratureRule

    @property
    def means(self) -> np.ndarray:
        return self.mean_power * self.rule.nodes


def product_pdf_exact(x: float, mean_power: float = 1.0) -> float:
    """``2 K0(2 sqrt(x / g)) / g`` for the product of two exponentials."""
    if not x > 0:
        raise InvalidArgument(f"product pdf requires x > 0, got {x!r}")
    _check_positive("mean_power", mean_power)
    return 2.0 * bessel_k0(2.0 * math.sqrt(x / mean_power)) / mean_power


def product_ccdf_exact(x: float, mean_power: float = 1.0) -> float:
    """``z K1(z)`` with ``z = 2 sqrt(x / g)``; equals 1 at ``x = 0``."""
    _check_positive("mean_power", mean_power)
    if x < 0:
        raise InvalidArgument(f"product ccdf requires x >= 0, got {x!r}")
    if x == 0:
        return 1.0
    z = 2.0 * math.sqrt(x / mean_power)
    if z > 1400.0:
        return 0.0
    return z * bessel_k1(z)


def product_mixture(mean_power: float = 1.0, order: int = 10) -> ProductChannel:
    _check_positive("mean_power", mean_power)
    return ProductChannel(mean_power=float(mean_power), rule=gauss_laguerre_rule(order))


def product_ccdf_approx(x: float, channel: ProductChannel) -> float:
    """``sum_i w_i exp(-x / (g t_i))``."""
    if x < 0:
        raise InvalidArgument(f"product ccdf requires x >= 0, got {x!r}")
    return float(np.dot(channel.rule.weights, np.exp(-x / channel.means)))
