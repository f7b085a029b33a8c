"""Stackelberg pricing game between the source (leader) and the selected helper.

The source picks its power split and total power to maximize

    U_s = w_p * sigmoid(a * (snr_e2e - gamma0)) - p * (1 - phi) * P,

and the helper prices its relaying power at ``p`` per Watt, earning
``U_H = (p * (1 - phi) - c) * P``. With the split chosen to equalize the two
hop SNRs the end-to-end SNR is ``eta * |h|^2 * P / varpi`` where
``varpi = N0 * (eta * d1**alpha + |h|^2 * d2**alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import optimize

from .montecarlo import _integer_m, _unit_powers, coloring_matrix


class NoInteriorOptimum(ArithmeticError):
    """The price is too high for any profitable purchase of relay power."""


@dataclass(frozen=True)
class ChannelRealization:
    h_sq_first: float
    eta: float
    d_first: float
    d_second: float
    alpha: float = 2.0
    noise: float = 1.0

    def __post_init__(self):
        for name in ("h_sq_first", "eta", "d_first", "d_second", "noise"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def path1(self):
        return self.d_first ** self.alpha

    @property
    def path2(self):
        return self.d_second ** self.alpha

    @property
    def varpi(self):
        return self.noise * (self.eta * self.path1 + self.h_sq_first * self.path2)


@dataclass(frozen=True)
class GameParams:
    steepness: float
    revenue_weight: float
    helper_cost: float
    gamma0: float
    price: Optional[float] = None
    max_power: float = math.inf

    def __post_init__(self):
        if not self.steepness > 0:
            raise ValueError("steepness a must be positive")
        if not self.revenue_weight > 0:
            raise ValueError("revenue weight w_p must be positive")
        if not self.helper_cost > 0:
            raise ValueError("helper cost c must be positive")
        if not self.gamma0 > 0:
            raise ValueError("threshold gamma0 must be positive")
        if self.price is not None and not self.price > 0:
            raise ValueError("price must be positive")

    def at_price(self, price):
        return replace(self, price=price)


@dataclass(frozen=True)
class Equilibrium:
    phi_star: float
    price_star: float
    power_star: float
    utility_source: float
    utility_helper: float
    interior: bool
    foc_residual: float


def _sigmoid(u):
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


def _sigmoid_slope(u):
    # s(1 - s), written so it never overflows
    e = math.exp(-abs(u))
    return e / (1.0 + e) ** 2


def _price(params):
    if params.price is None:
        raise ValueError("GameParams.price is not set")
    return params.price


def satisfaction(e2e_snr, params):
    """Sigmoid satisfaction of the source with its end-to-end SNR."""
    return _sigmoid(params.steepness * (e2e_snr - params.gamma0))


def hop_snrs(phi, power, ch, complement=None):
    """Per-hop SNRs for split ``phi``; pass ``complement = 1 - phi`` if known more accurately."""
    if complement is None:
        complement = 1.0 - phi
    g1 = phi * power * ch.h_sq_first / (ch.path1 * ch.noise)
    g2 = complement * power * ch.eta / (ch.path2 * ch.noise)
    return g1, g2


def optimal_phi(ch):
    """Power split that equalizes the two hop SNRs."""
    num = ch.eta * ch.path1
    return num / (num + ch.h_sq_first * ch.path2)


def relay_share(ch):
    """``1 - optimal_phi(ch)``, computed without cancellation when the split is near 1."""
    num = ch.h_sq_first * ch.path2
    return num / (num + ch.eta * ch.path1)


def e2e_snr_at_optimum(power, ch):
    return ch.eta * ch.h_sq_first * power / ch.varpi


def utility_source(power, ch, params):
    """Source utility with the split fixed at its optimum."""
    reward = params.revenue_weight * satisfaction(e2e_snr_at_optimum(power, ch), params)
    return reward - _price(params) * relay_share(ch) * power


def utility_helper(power, ch, params):
    return (_price(params) * relay_share(ch) - params.helper_cost) * power


def source_marginal(power, ch, params):
    """Exact derivative of :func:`utility_source` with respect to total power."""
    k = ch.eta * ch.h_sq_first / ch.varpi
    u = params.steepness * (k * power - params.gamma0)
    gain = params.steepness * k * params.revenue_weight * _sigmoid_slope(u)
    return gain - _price(params) * relay_share(ch)


def source_curvature(power, ch, params):
    """Second derivative of :func:`utility_source`; negative wherever the SNR exceeds gamma0."""
    k = ch.eta * ch.h_sq_first / ch.varpi
    u = params.steepness * (k * power - params.gamma0)
    s = _sigmoid(u)
    return params.revenue_weight * (params.steepness * k) ** 2 * _sigmoid_slope(u) * (1.0 - 2.0 * s)


def price_ceiling(ch, params):
    """Largest price with a real stationary point: ``a eta w_p / (4 N0 d2^alpha)``."""
    return params.steepness * ch.eta * params.revenue_weight / (4.0 * ch.noise * ch.path2)


def stationary_power(ch, params):
    """The closed-form stationary power (may be negative).

    Raises :class:`NoInteriorOptimum` when the discriminant is negative.
    """
    a = params.steepness
    w = params.revenue_weight
    eta = ch.eta
    k2 = ch.noise * _price(params) * ch.path2  # N0 p d2^alpha
    disc = (a * eta * w) ** 2 - 4.0 * a * eta * k2 * w
    if disc < 0:
        raise NoInteriorOptimum(
            f"price {params.price} exceeds the ceiling {price_ceiling(ch, params)}"
        )
    arg = (a * eta * w - 2.0 * k2 + math.sqrt(disc)) / (2.0 * k2)
    if not arg > 0:
        raise NoInteriorOptimum("non-positive logarithm argument")
    hk = eta * ch.h_sq_first
    return ch.varpi * math.log(arg) / (a * hk) + ch.varpi * params.gamma0 / hk


def optimal_power(ch, params):
    """Source best response ``P* = max(P_bar, 0)``, clipped to ``params.max_power``."""
    return min(max(stationary_power(ch, params), 0.0), params.max_power)


def optimal_price(ch, params):
    """Helper price: ``c (eta d1^a + |h|^2 d2^a) / (|h|^2 d2^a)``, i.e. ``c / (1 - phi*)``."""
    hd = ch.h_sq_first * ch.path2
    return (ch.eta * params.helper_cost * ch.path1 + params.helper_cost * hd) / hd


def stackelberg_equilibrium(ch, params):
    """Leader split, follower price, then leader power; utilities at the result.

    A price above the ceiling means no trade: ``P* = 0`` and ``interior`` is False.
    """
    phi = optimal_phi(ch)
    price = optimal_price(ch, params)
    at = params.at_price(price)
    try:
        power = optimal_power(ch, at)
        interior = power > 0
    except NoInteriorOptimum:
        power, interior = 0.0, False
    foc = source_marginal(power, ch, at) if interior else 0.0
    return Equilibrium(
        phi_star=phi,
        price_star=price,
        power_star=power,
        utility_source=utility_source(power, ch, at),
        utility_helper=utility_helper(power, ch, at) if power > 0 else 0.0,
        interior=interior,
        foc_residual=foc,
    )


def respond_at_price(ch, params):
    """Source best response to the fixed price ``params.price``.

    Same record as :func:`stackelberg_equilibrium` but the price is imposed
    rather than chosen by the helper.
    """
    phi = optimal_phi(ch)
    try:
        power = optimal_power(ch, params)
        interior = power > 0
    except NoInteriorOptimum:
        power, interior = 0.0, False
    return Equilibrium(
        phi_star=phi,
        price_star=_price(params),
        power_star=power,
        utility_source=utility_source(power, ch, params),
        utility_helper=utility_helper(power, ch, params) if power > 0 else 0.0,
        interior=interior,
        foc_residual=source_marginal(power, ch, params) if interior else 0.0,
    )


def numeric_best_price(ch, params, xatol=1e-10):
    """Helper's exact best response against the leader's power rule.

    Maximizes ``U_H(p, P*(p))`` numerically between the break-even price and
    the ceiling. Returns ``(price, helper_utility)``; the closed-form
    :func:`optimal_price` comes from an approximate derivative, so the two
    differ in general.
    """
    lo = params.helper_cost / relay_share(ch)
    hi = price_ceiling(ch, params)
    if hi <= lo:
        return lo, 0.0

    def neg(p):
        at = params.at_price(p)
        try:
            return -utility_helper(optimal_power(ch, at), ch, at)
        except NoInteriorOptimum:
            return 0.0

    res = optimize.minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
    return float(res.x), float(-res.fun)


def sample_realizations(n_helpers, array, d_first, d_second, alpha, noise, rng, size):
    """Draw channel realizations for the game.

    The first-hop gain is the best of ``n_helpers`` equidistant helpers and
    ``eta`` is the RSU array's summed branch power.
    """
    m = _integer_m(array.branch.m)
    h = _unit_powers(rng, m, (size, n_helpers)).max(axis=1)
    B = None if array.rho == 0 else coloring_matrix(array)
    eta = _unit_powers(rng, m, (size, array.antennas), B).sum(axis=1)
    return [
        ChannelRealization(float(hi), float(ei), d_first, d_second, alpha, noise)
        for hi, ei in zip(np.asarray(h), np.asarray(eta))
    ]
