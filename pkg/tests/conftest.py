"""Shared scenarios and independent oracles for the test suite."""

import math

import mpmath as mp
import numpy as np
import pytest

from v2xcoop.game import ChannelRealization, GameParams, NoInteriorOptimum, price_ceiling, stationary_power, utility_source
from v2xcoop.pep import Scenario
from v2xcoop.runconfig import DEFAULT_DISTANCE, db_to_linear


def cc_cdf_oracle(M, m, rho, mean_snr, gamma0, dps=30):
    """Exact CC combiner CDF as a negative-binomial mixture of Gamma laws.

    With Gaussian correlation r = sqrt(rho) the branch vector is a common
    component plus independent ones; conditioning on the common part gives
    a Poisson-Gamma mixture of Gamma(M m + n) terms. Summed explicitly in
    extended precision until the remaining mixture weight is negligible.
    """
    with mp.workdps(dps):
        r = mp.sqrt(mp.mpf(rho))
        X = mp.mpf(m) * gamma0 / mean_snr
        w = M * r / (1 - r + M * r)
        weight = (1 - w) ** m
        total = mp.mpf(0)
        mass = mp.mpf(0)
        n = 0
        while True:
            total += weight * mp.gammainc(M * m + n, 0, X / (1 - r), regularized=True)
            mass += weight
            if 1 - mass < mp.mpf("1e-25"):
                break
            weight *= (m + n) * w / (n + 1)
            n += 1
        return float(total)


def gamma_cdf_oracle(shape, x):
    return float(mp.gammainc(shape, 0, x, regularized=True))


def binomial_se(p, n):
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def default_scenario(model="ec", **kw):
    """Defaults: 25 dB, gamma0 -10 dB, N=5, M=10, phi=0.5, m=1, rho=0.1, L=10."""
    args = dict(
        snr=db_to_linear(25.0),
        gamma0=db_to_linear(-10.0),
        n_helpers=5,
        antennas=10,
        phi=0.5,
        m=1.0,
        rho=0.1,
        model=model,
        d_first=DEFAULT_DISTANCE,
        d_second=DEFAULT_DISTANCE,
        alpha=2.0,
        blocks=10,
    )
    args.update(kw)
    return Scenario.build(**args)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def agrees_with_oracle(k, n, p, z=3.0):
    """Monte Carlo count ``k`` of ``n`` is consistent with probability ``p``.

    The normal 3-SE rule when at least 10 events are expected; with fewer,
    an exact two-sided binomial test at the same false-alarm rate (0.27%),
    because a single event is already many "standard errors" away there.
    """
    from scipy import stats

    if n * p >= 10 and n * (1 - p) >= 10:
        return abs(k / n - p) <= z * binomial_se(p, n)
    alpha = 2 * stats.norm.sf(z)
    return stats.binomtest(k, n, p).pvalue >= alpha


# --- game oracles -------------------------------------------------------------

def random_instance(rng):
    """A realization and priced parameters with an interior optimum ``P* > 0``."""
    while True:
        ch = ChannelRealization(
            h_sq_first=rng.uniform(0.2, 3.0),
            eta=rng.uniform(1.0, 20.0),
            d_first=rng.uniform(5.0, 60.0),
            d_second=rng.uniform(10.0, 100.0),
            alpha=rng.choice([2.0, 2.5, 3.0]),
            noise=rng.uniform(0.5, 2.0),
        )
        base = GameParams(
            steepness=rng.uniform(0.05, 1.0),
            revenue_weight=10 ** rng.uniform(3, 7),
            helper_cost=rng.uniform(0.1, 5.0),
            gamma0=rng.uniform(0.1, 10.0),
        )
        ceiling = price_ceiling(ch, base)
        params = base.at_price(ceiling * rng.uniform(0.01, 0.9))
        try:
            if stationary_power(ch, params) > 0:
                return ch, params
        except NoInteriorOptimum:
            pass


def instances(n, seed):
    rng = np.random.default_rng(seed)
    return [random_instance(rng) for _ in range(n)]


def golden_argmax(ch, params, dps=40):
    """Maximize the source utility in extended precision by golden-section search.

    The bracket starts where the end-to-end SNR reaches gamma0 (U_s is concave
    from there on) and doubles until the utility drops below its start value.
    """
    with mp.workdps(dps):
        eta, h = mp.mpf(ch.eta), mp.mpf(ch.h_sq_first)
        p1, p2 = mp.mpf(ch.d_first) ** ch.alpha, mp.mpf(ch.d_second) ** ch.alpha
        varpi = ch.noise * (eta * p1 + h * p2)
        phi = eta * p1 / (eta * p1 + h * p2)
        a, w, g0, price = (mp.mpf(v) for v in (params.steepness, params.revenue_weight, params.gamma0, params.price))

        def U(P):
            return w / (1 + mp.exp(-a * (eta * h * P / varpi - g0))) - price * (1 - phi) * P

        lo = varpi * g0 / (eta * h)
        step = varpi / (a * eta * h)
        hi = lo + step
        while U(hi) >= U(lo):
            step *= 2
            hi = lo + step
        inv = (mp.sqrt(5) - 1) / 2
        x1, x2 = hi - inv * (hi - lo), lo + inv * (hi - lo)
        f1, f2 = U(x1), U(x2)
        while hi - lo > mp.mpf(10) ** (-30) * hi:
            if f1 < f2:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + inv * (hi - lo)
                f2 = U(x2)
            else:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - inv * (hi - lo)
                f1 = U(x1)
        return float((lo + hi) / 2)


def second_difference(ch, params, P, rel=1e-4):
    h = rel * P
    return utility_source(P + h, ch, params) - 2 * utility_source(P, ch, params) + utility_source(P - h, ch, params)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance PASS/FAIL lines at the end of the run."""
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
