"""Monte Carlo estimator of the ranging success probability.

Each trial drops a Poisson field of interferers on ``(delta0, r_max]``, draws
their fading and the desired round-trip channel, and tests
``c0 g_p R^(-2 alpha_d) > T (I + sigma2)``. Trials are split into batches,
each with its own counter-based Philox stream keyed by ``(seed, batch)``, so
results do not depend on the thread count or scheduling.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import kernels
from .analysis import Scenario
from .channels import FadingModel, NoFading, Rayleigh, canonical_params, fading_kind
from .errors import InvalidArgument, UnsupportedParameters

MIN_TRIALS = 1000
DEFAULT_BATCH = 50_000
RELATIVE_TRUNCATION = 1e-4
_UINT64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Attributes
    ----------
    trials : int
        Number of independent drops (at least 1000).
    r_max : float, optional
        Truncation radius. ``None`` selects the smallest radius whose expected
        omitted interference is at most ``1e-4 * c0 R^(-2 alpha_d)``.
    seed : int
        Unsigned 64-bit root seed.
    batch : int
        Trials per independent random stream.
    tail_mean : bool
        Add the expected interference beyond ``r_max`` to every trial. This
        removes the first-order truncation bias and allows small radii for
        heavy-tailed fields such as ``alpha_i = 2``.
    """

    trials: int = 100_000
    r_max: Optional[float] = None
    seed: int = 0
    batch: int = DEFAULT_BATCH
    tail_mean: bool = False

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, (int, np.integer)):
            raise InvalidArgument(f"trials must be an integer, got {self.trials!r}")
        if self.trials < MIN_TRIALS:
            raise InvalidArgument(f"trials must be >= {MIN_TRIALS}, got {self.trials}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not 0 <= self.seed <= _UINT64_MAX:
            raise InvalidArgument(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if isinstance(self.batch, bool) or not isinstance(self.batch, (int, np.integer)) or self.batch < 1:
            raise InvalidArgument(f"batch must be a positive integer, got {self.batch!r}")
        if self.r_max is not None and not (math.isfinite(self.r_max) and self.r_max > 0):
            raise InvalidArgument(f"r_max must be positive and finite, got {self.r_max!r}")


@dataclass(frozen=True)
class MonteCarloEstimate:
    p_hat: float
    stderr: float
    trials: int
    seed: int
    truncation_bias_bound: float
    r_max: float
    threshold: float

    @property
    def successes(self) -> int:
        return int(round(self.p_hat * self.trials))


def truncation_bound(scn: Scenario, r_max: float) -> float:
    """Expected interference from beyond ``r_max``.

    ``rho_i gamma0 int_{r_max}^inf (r^2 + L^2)^(-alpha_i/2) dr``, which never
    exceeds ``rho_i gamma0 r_max^(1 - alpha_i) / (alpha_i - 1)``.
    """
    if scn.alpha_i <= 1:
        raise UnsupportedParameters("alpha_i <= 1 makes the mean interference infinite")
    if not r_max > scn.delta0:
        raise InvalidArgument(f"r_max must exceed delta0={scn.delta0}, got {r_max!r}")
    if scn.rho_i == 0:
        return 0.0
    a = scn.alpha_i
    scale = scn.rho_i * scn.gamma0
    if scn.L == 0:
        return scale * r_max ** (1.0 - a) / (a - 1.0)
    # substitute r = r_max / u to integrate over a finite interval
    lane2 = scn.L * scn.L

    def integrand(u):
        r = r_max / u
        return (r * r + lane2) ** (-0.5 * a) * r_max / (u * u)

    value, _ = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)
    return scale * value


def default_r_max(scn: Scenario, relative: float = RELATIVE_TRUNCATION) -> float:
    """Smallest radius with ``truncation_bound <= relative * c0 R^(-2 alpha_d)``."""
    if scn.rho_i == 0:
        return scn.delta0 + 1.0
    target = relative * scn.signal_scale
    a = scn.alpha_i
    # radius where the L = 0 upper bound reaches the target; the exact tail is no larger
    upper = (scn.rho_i * scn.gamma0 / ((a - 1.0) * target)) ** (1.0 / (a - 1.0))
    if upper <= scn.delta0:
        return math.nextafter(scn.delta0, math.inf)
    if scn.L == 0:
        return upper
    lower = scn.delta0 * (1 + 1e-12) if scn.delta0 > 0 else upper * 1e-9
    if truncation_bound(scn, lower) <= target:
        return lower
    return brentq(lambda r: truncation_bound(scn, r) - target, lower, upper, xtol=1e-12 * upper)


def _thread_count(limit: int) -> int:
    env = os.environ.get("RADAR_SG_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise InvalidArgument(f"RADAR_SG_THREADS must be an integer, got {env!r}") from None
        if cap < 1:
            raise InvalidArgument(f"RADAR_SG_THREADS must be >= 1, got {cap}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, limit))


def _desired_is_rayleigh(desired) -> bool:
    if isinstance(desired, Rayleigh) or desired == "rayleigh":
        return True
    if isinstance(desired, NoFading) or desired == "none":
        return False
    raise InvalidArgument(f"desired must be Rayleigh or NoFading, got {desired!r}")


def batch_rng(seed: int, index: int) -> np.random.Generator:
    """Philox stream for batch ``index`` of root ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def simulate_ps_grid(scn: Scenario, desired: Union[str, FadingModel], model: FadingModel,
                     cfg: SimConfig, thresholds: Optional[Sequence[float]] = None
                     ) -> List[MonteCarloEstimate]:
    """Estimate the success probability at several linear thresholds.

    The same drops are reused for every threshold (common random numbers),
    so the returned curve is monotone in ``T``. ``thresholds`` defaults to
    ``[scn.T]``.
    """
    rayleigh = _desired_is_rayleigh(desired)
    thr = np.array([scn.T] if thresholds is None else thresholds, dtype=np.float64)
    if thr.ndim != 1 or thr.size == 0 or not np.all(np.isfinite(thr)) or np.any(thr <= 0):
        raise InvalidArgument("thresholds must be a non-empty list of positive finite values")
    r_max = default_r_max(scn) if cfg.r_max is None else float(cfg.r_max)
    if not r_max > scn.delta0:
        raise InvalidArgument(f"r_max={r_max} must exceed delta0={scn.delta0}")
    bias = truncation_bound(scn, r_max)
    triple = canonical_params(model)
    kind = fading_kind(triple)
    kappa, mu, m = triple if triple is not None else (0.0, 1.0, math.inf)
    floor = scn.sigma2 + (bias if cfg.tail_mean else 0.0)

    sizes = [cfg.batch] * (cfg.trials // cfg.batch)
    if cfg.trials % cfg.batch:
        sizes.append(cfg.trials % cfg.batch)

    def run(index):
        return kernels.simulate_batch(
            batch_rng(cfg.seed, index), sizes[index], scn.rho_i, scn.delta0, r_max, scn.L,
            scn.alpha_i, scn.gamma0, kind, kappa, mu, m, rayleigh, scn.gbar_p,
            scn.signal_scale, floor, thr)

    workers = _thread_count(len(sizes))
    if workers == 1:
        counts = [run(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(run, range(len(sizes))))
    total = np.sum(counts, axis=0)

    out = []
    for t, k in zip(thr, total):
        p = float(k) / cfg.trials
        out.append(MonteCarloEstimate(
            p_hat=p, stderr=math.sqrt(p * (1.0 - p) / cfg.trials), trials=cfg.trials,
            seed=cfg.seed, truncation_bias_bound=bias, r_max=r_max, threshold=float(t)))
    return out


def simulate_ps(scn: Scenario, desired: Union[str, FadingModel], model: FadingModel,
                cfg: SimConfig) -> MonteCarloEstimate:
    """Estimate the success probability at ``scn.T``."""
    return simulate_ps_grid(scn, desired, model, cfg)[0]
