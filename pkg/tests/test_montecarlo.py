import math
import types

import mpmath
import numpy as np
import pytest
from scipy import integrate

from radar_sg import analysis as an
from radar_sg import channels as ch
from radar_sg import montecarlo as mc
from radar_sg.errors import InvalidArgument, UnsupportedParameters

DEFAULT = an.Scenario()
LEVY = an.Scenario(alpha_i=2, delta0=0, L=0)


def exact_rayleigh_ps(scn, model):
    """Round-trip average done by adaptive quadrature instead of the Laguerre rule."""
    base = scn.T / (scn.signal_scale * scn.gbar_p)
    f = lambda t: math.exp(-t) * an.laplace_interference(base / t, scn, model) * math.exp(-base * scn.sigma2 / t)
    return sum(integrate.quad(f, a, b, epsabs=1e-12, limit=400)[0] for a, b in ((0, 1e-3), (1e-3, 1), (1, math.inf)))


# --- configuration ------------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [dict(trials=999), dict(trials=1.5e4), dict(seed=-1), dict(seed=2 ** 64),
                                    dict(batch=0), dict(r_max=-1.0), dict(r_max=math.inf), dict(trials=True)])
def test_config_validation(kwargs):
    with pytest.raises(InvalidArgument):
        mc.SimConfig(**kwargs)


def test_rmax_must_exceed_delta0():
    with pytest.raises(InvalidArgument):
        mc.simulate_ps(DEFAULT, "rayleigh", ch.Rayleigh(), mc.SimConfig(trials=1000, r_max=1.0))


def test_bad_desired_and_thresholds():
    cfg = mc.SimConfig(trials=1000)
    with pytest.raises(InvalidArgument):
        mc.simulate_ps(DEFAULT, ch.Nakagami(2), ch.Rayleigh(), cfg)
    with pytest.raises(InvalidArgument):
        mc.simulate_ps_grid(DEFAULT, "rayleigh", ch.Rayleigh(), cfg, [1.0, -1.0])


# --- truncation ----------------------------------------------------------------------

def test_truncation_bound_examples():
    assert mc.truncation_bound(DEFAULT.with_updates(rho_i=0), 10.0) == 0.0
    assert mc.truncation_bound(an.Scenario(alpha_i=2, delta0=0), 100.0) == pytest.approx(0.01, rel=1e-14)
    lane = an.Scenario(alpha_i=2, delta0=0, L=1)
    assert mc.truncation_bound(lane, 100.0) == pytest.approx(math.pi / 2 - math.atan(100.0), rel=1e-10)


@pytest.mark.parametrize("scn", [DEFAULT, an.Scenario(alpha_i=2.5, L=2.0, rho_i=3, gamma0=2), an.Scenario(alpha_i=3, L=0.5)])
def test_truncation_bound_properties(scn):
    radii = [2.0, 5.0, 20.0, 100.0, 1000.0]
    values = [mc.truncation_bound(scn, r) for r in radii]
    assert values == sorted(values, reverse=True)
    for r, v in zip(radii, values):
        upper = scn.rho_i * scn.gamma0 * r ** (1 - scn.alpha_i) / (scn.alpha_i - 1)
        assert 0 < v <= upper * (1 + 1e-12)
        direct = float(mpmath.quad(lambda x: (x * x + scn.L ** 2) ** (-scn.alpha_i / 2), [r, 10 * r, mpmath.inf]))
        assert v == pytest.approx(scn.rho_i * scn.gamma0 * direct, rel=1e-8)


def test_truncation_bound_errors():
    with pytest.raises(InvalidArgument):
        mc.truncation_bound(DEFAULT, 0.5)
    fake = types.SimpleNamespace(alpha_i=1.0, delta0=0.0, rho_i=1.0, gamma0=1.0, L=0.0)
    with pytest.raises(UnsupportedParameters):
        mc.truncation_bound(fake, 10.0)


@pytest.mark.parametrize("scn", [DEFAULT, DEFAULT.with_updates(L=1.0), an.Scenario(alpha_i=3, R=2, delta0=0)])
def test_default_radius_meets_target(scn):
    r = mc.default_r_max(scn)
    target = mc.RELATIVE_TRUNCATION * scn.signal_scale
    assert mc.truncation_bound(scn, r) == pytest.approx(target, rel=1e-6)


# --- estimator ---------------------------------------------------------------------------

@pytest.mark.parametrize("desired", ["rayleigh", "none"])
def test_no_interference_no_noise(desired):
    est = mc.simulate_ps(DEFAULT.with_updates(rho_i=0), desired, ch.Rayleigh(), mc.SimConfig(trials=5000))
    assert est.p_hat == 1.0 and est.stderr == 0.0
    assert est.truncation_bias_bound == 0.0


def test_reproducible_and_thread_independent(monkeypatch):
    cfg = mc.SimConfig(trials=40_000, seed=123, batch=7_000)
    monkeypatch.setenv("RADAR_SG_THREADS", "1")
    a = mc.simulate_ps_grid(DEFAULT, "rayleigh", ch.KappaMuShadowed(2, 2, 1), cfg, [0.5, 1, 2])
    monkeypatch.setenv("RADAR_SG_THREADS", "4")
    b = mc.simulate_ps_grid(DEFAULT, "rayleigh", ch.KappaMuShadowed(2, 2, 1), cfg, [0.5, 1, 2])
    assert a == b
    assert [e.threshold for e in a] == [0.5, 1.0, 2.0]


def test_invalid_thread_setting(monkeypatch):
    monkeypatch.setenv("RADAR_SG_THREADS", "zero")
    with pytest.raises(InvalidArgument):
        mc.simulate_ps(DEFAULT, "rayleigh", ch.Rayleigh(), mc.SimConfig(trials=1000))


def test_stderr_and_fields():
    est = mc.simulate_ps(DEFAULT, "rayleigh", ch.Rayleigh(), mc.SimConfig(trials=20_000, seed=4))
    assert est.stderr == pytest.approx(math.sqrt(est.p_hat * (1 - est.p_hat) / 20_000))
    assert (est.trials, est.seed) == (20_000, 4)
    assert est.successes == round(est.p_hat * est.trials)
    assert est.r_max == pytest.approx(mc.default_r_max(DEFAULT))


def test_common_random_numbers_give_monotone_curve():
    ests = mc.simulate_ps_grid(DEFAULT, "rayleigh", ch.Nakagami(2), mc.SimConfig(trials=20_000),
                               [an.db_to_linear(d) for d in range(-10, 21, 5)])
    p = [e.p_hat for e in ests]
    assert p == sorted(p, reverse=True)


def test_disjoint_seeds_agree():
    cfg = dict(trials=300_000)
    a = mc.simulate_ps(DEFAULT, "rayleigh", ch.KappaMuShadowed(1, 2, 3), mc.SimConfig(seed=1, **cfg))
    b = mc.simulate_ps(DEFAULT, "rayleigh", ch.KappaMuShadowed(1, 2, 3), mc.SimConfig(seed=2, **cfg))
    assert a.p_hat != b.p_hat
    assert abs(a.p_hat - b.p_hat) <= 6 * math.hypot(a.stderr, b.stderr)


def test_nakagami_interferers_match_exact_round_trip_average():
    est = mc.simulate_ps(DEFAULT, "rayleigh", ch.Nakagami(3), mc.SimConfig(trials=10 ** 6, seed=11))
    assert abs(est.p_hat - exact_rayleigh_ps(DEFAULT, ch.Nakagami(3))) <= 4 * est.stderr


def test_nakagami_interferers_match_default_order_closed_form():
    # the documented example compares against the default ten-node rule
    est = mc.simulate_ps(DEFAULT, "rayleigh", ch.Nakagami(3), mc.SimConfig(trials=10 ** 6, seed=11))
    closed = an.ps_rayleigh_desired(DEFAULT, ch.Nakagami(3))
    assert abs(est.p_hat - closed) <= 4 * est.stderr, (est.p_hat, closed, est.stderr)


def test_tail_mean_compensation_matches_levy_law():
    cfg = mc.SimConfig(trials=10 ** 6, seed=12, r_max=100.0, tail_mean=True)
    thresholds = [an.db_to_linear(d) for d in (-10, 0, 10)]
    for est, t in zip(mc.simulate_ps_grid(LEVY, "none", ch.Rayleigh(), cfg, thresholds), thresholds):
        closed = an.ps_no_fading_desired(LEVY.with_updates(T=t), ch.Rayleigh())
        assert abs(est.p_hat - closed) <= 4 * est.stderr + 1e-12


def test_plain_truncation_is_biased_upward_for_heavy_tail():
    cfg = mc.SimConfig(trials=200_000, seed=13, r_max=5.0)
    est = mc.simulate_ps(LEVY, "none", ch.Rayleigh(), cfg)
    closed = an.ps_no_fading_desired(LEVY, ch.Rayleigh())
    # dropping the far field removes about 1/r_max of mean interference and raises P_s
    assert est.p_hat - closed > 4 * est.stderr


def _random_scenarios(n, seed):
    rng = np.random.default_rng(seed)
    models = [ch.NoFading(), ch.Rayleigh(), ch.Nakagami(2.5), ch.Rician(3.0), ch.KappaMu(2.0, 1.5),
              ch.RicianShadowed(4.0, 0.8), ch.KappaMuShadowed(1.5, 2.0, 3.0)]
    out = []
    for i in range(n):
        model = models[i % len(models)]
        t = an.db_to_linear(rng.uniform(-5, 15))
        if i % 3 == 2:
            scn = an.Scenario(alpha_i=2, delta0=0, L=0, alpha_d=rng.choice([2.0, 4.0]), R=rng.uniform(0.7, 1.3),
                              rho_i=rng.uniform(0.3, 1.5), sigma2=rng.uniform(0, 0.05), T=t)
            out.append((scn, "none", model, mc.SimConfig(trials=10 ** 6, seed=i, r_max=100.0, tail_mean=True)))
        else:
            alpha = rng.choice([2.0, 3.0, 4.0])
            L = 1.0 if (alpha == 2.0 and isinstance(model, ch.Rayleigh)) else 0.0
            scn = an.Scenario(alpha_i=alpha, delta0=rng.uniform(0.5, 2.0), L=L, rho_i=rng.uniform(0.3, 1.5),
                              sigma2=rng.uniform(0, 0.1), T=t)
            cfg = mc.SimConfig(trials=10 ** 6, seed=i, r_max=100.0, tail_mean=True) if alpha == 2 else \
                mc.SimConfig(trials=10 ** 6, seed=i)
            out.append((scn, "rayleigh", model, cfg))
    return out


@pytest.mark.slow
@pytest.mark.parametrize("case", _random_scenarios(30, 2024), ids=lambda c: f"{c[1]}-{type(c[2]).__name__}")
def test_estimator_consistency_random_scenarios(case):
    # closed forms use a high Laguerre order so that the residual is the simulator's own error
    scn, desired, model, cfg = case
    est = mc.simulate_ps(scn, desired, model, cfg)
    closed = an.ps_closed_form(scn, desired, model, order=150)
    assert abs(est.p_hat - closed) <= max(4 * est.stderr, 0.005)
