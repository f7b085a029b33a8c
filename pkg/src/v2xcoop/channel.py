"""SNR distributions for a single Nakagami-m hop and for the RSU combiner.

Fading power is normalized to unit mean, so the mean SNR of a hop is the
deterministic factor ``phi * P / (d**alpha * N0)`` (or ``1 - phi`` for the
second hop).

Correlation coefficients ``rho`` are *power* correlations, i.e. the
correlation between branch SNRs. The constant-correlation combiner density
is naturally written in terms of the correlation of the underlying complex
Gaussian components, which is ``sqrt(rho)``; see :attr:`CorrelatedArray.gaussian_corr`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy import integrate

from .specfun import (
    DEFAULT_CONTROL,
    DomainError,
    humbert_phi1,
    log_kummer_1f1,
    reg_lower_gamma,
)

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8
QUAD_LIMIT = 200


class Phase(enum.Enum):
    FIRST = "first"
    SECOND = "second"


class CorrelationModel(str, enum.Enum):
    CC = "cc"
    EC = "ec"


class SeriesPathRefused(ValueError):
    """The closed-form CC series cannot be evaluated for these parameters."""


@dataclass(frozen=True)
class FadingLink:
    """One Nakagami-m hop: shape ``m`` and linear mean SNR, plus its geometry."""

    m: float
    mean_snr: float
    distance: float = 1.0
    pathloss_exp: float = 2.0

    def __post_init__(self):
        if not self.m >= 0.5:
            raise ValueError(f"Nakagami m must be >= 0.5, got {self.m}")
        # zero is allowed: a hop that received no power
        if not self.mean_snr >= 0:
            raise ValueError(f"mean SNR must be non-negative, got {self.mean_snr}")
        if not self.distance > 0:
            raise ValueError(f"distance must be positive, got {self.distance}")


@dataclass(frozen=True)
class CorrelatedArray:
    """The RSU array: ``antennas`` branches sharing one ``branch`` law.

    ``rho`` is the branch power correlation: constant for CC, ``rho**|i-j|``
    for EC.
    """

    antennas: int
    model: CorrelationModel
    rho: float
    branch: FadingLink

    def __post_init__(self):
        object.__setattr__(self, "model", CorrelationModel(self.model))
        if int(self.antennas) != self.antennas or self.antennas < 1:
            raise ValueError(f"antenna count must be a positive integer, got {self.antennas}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"correlation must lie in [0, 1), got {self.rho}")

    @property
    def gaussian_corr(self):
        """Correlation of the complex Gaussian components behind ``rho``."""
        return math.sqrt(self.rho)

    @property
    def independent(self):
        return self.rho == 0.0 or self.antennas == 1


@dataclass(frozen=True)
class PowerBudget:
    total_power: float
    split: float
    noise: float = 1.0

    def __post_init__(self):
        if not self.total_power > 0:
            raise ValueError("total power must be positive")
        if not 0.0 < self.split <= 1.0:
            raise ValueError(f"power split must lie in (0, 1], got {self.split}")
        if not self.noise > 0:
            raise ValueError("noise power must be positive")

    @property
    def snr(self):
        return self.total_power / self.noise


def mean_snr(budget, phase, distance, alpha):
    """Mean SNR of a hop. A second hop with ``split == 1`` gets zero power and returns 0."""
    if not distance > 0:
        raise ValueError("distance must be positive")
    share = budget.split if Phase(phase) is Phase.FIRST else 1.0 - budget.split
    return share * budget.total_power / (distance ** alpha * budget.noise)


def _dead_link_cdf(gamma0):
    return 1.0 if gamma0 > 0 else 0.0


def iid_snr_cdf(link, gamma0):
    """CDF of a single Gamma-distributed hop SNR at ``gamma0``."""
    if gamma0 < 0:
        raise DomainError("threshold must be non-negative")
    if link.mean_snr == 0:
        return _dead_link_cdf(gamma0)
    return reg_lower_gamma(link.m, link.m * gamma0 / link.mean_snr)


def mrc_iid_cdf(antennas, link, gamma0):
    """CDF of the MRC sum of ``antennas`` independent, identical branches."""
    if gamma0 < 0:
        raise DomainError("threshold must be non-negative")
    if link.mean_snr == 0:
        return _dead_link_cdf(gamma0)
    return reg_lower_gamma(antennas * link.m, link.m * gamma0 / link.mean_snr)


# ---------------------------------------------------------------------------
# constant correlation
# ---------------------------------------------------------------------------

def _require(array, model):
    if array.model is not model:
        raise ValueError(f"expected a {model.value.upper()} array, got {array.model.value.upper()}")


def _cc_log_density_factory(array, ctl):
    # density of x = m z / zbar; returns log g(x) for x > 0
    M = array.antennas
    m = array.branch.m
    r = array.gaussian_corr
    Mm = M * m
    k = M * r / ((1.0 - r) * (1.0 - r + M * r))
    log_norm = (
        -m * (M - 1) * math.log1p(-r)
        - m * math.log(1.0 - r + M * r)
        - math.lgamma(Mm)
    )
    inv = 1.0 / (1.0 - r)

    def log_g(x):
        return (Mm - 1.0) * math.log(x) - x * inv + log_kummer_1f1(m, Mm, k * x, ctl) + log_norm

    return log_g


def _cc_density_x(array, ctl):
    log_g = _cc_log_density_factory(array, ctl)
    Mm = array.antennas * array.branch.m

    def g(x):
        if x <= 0.0:
            if Mm > 1.0:
                return 0.0
            return math.exp(log_g(1e-300)) if Mm == 1.0 else math.inf
        return math.exp(log_g(x))

    return g


def cc_combiner_pdf(array, z, ctl=DEFAULT_CONTROL):
    """Density of the MRC output SNR under constant correlation.

    Defined for ``0 < rho < 1``; the independent case has no correlated
    density in this form and must go through the Gamma law.
    """
    _require(array, CorrelationModel.CC)
    if not 0.0 < array.rho < 1.0:
        raise ValueError("cc_combiner_pdf needs 0 < rho < 1")
    if z < 0:
        return 0.0
    scale = array.branch.m / array.branch.mean_snr
    return scale * _cc_density_x(array, ctl)(z * scale)


def cc_combiner_cdf_quad(array, gamma0, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, ctl=DEFAULT_CONTROL):
    """Adaptive Gauss-Kronrod integral of the CC density up to ``gamma0``.

    Thresholds above the mean integrate the upper tail instead and return its
    complement, which keeps the integration range where the mass is.
    """
    _require(array, CorrelationModel.CC)
    if not 0.0 < array.rho < 1.0:
        raise ValueError("the CC density needs 0 < rho < 1")
    if gamma0 < 0:
        raise DomainError("threshold must be non-negative")
    if gamma0 == 0:
        return 0.0
    g = _cc_density_x(array, ctl)
    x0 = array.branch.m * gamma0 / array.branch.mean_snr
    mean_x = array.antennas * array.branch.m
    if x0 <= mean_x:
        val, _ = integrate.quad(g, 0.0, x0, epsabs=epsabs, epsrel=epsrel, limit=QUAD_LIMIT)
    else:
        tail, _ = integrate.quad(g, x0, math.inf, epsabs=epsabs, epsrel=epsrel, limit=QUAD_LIMIT)
        val = 1.0 - tail
    return min(1.0, max(0.0, val))


def cc_combiner_cdf(array, gamma0, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL):
    """Outage probability of the CC combiner, ``Pr(sum of branch SNRs < gamma0)``.

    ``rho == 0`` and single-antenna arrays use the independent Gamma law.
    """
    _require(array, CorrelationModel.CC)
    if array.independent:
        return mrc_iid_cdf(array.antennas, array.branch, gamma0)
    return cc_combiner_cdf_quad(array, gamma0, epsabs, epsrel)


def cc_series_limit(array):
    """Upper limit of the finite sum in the printed CC closed form."""
    r = array.gaussian_corr
    M = array.antennas
    return (1.0 - r + M * r) / (M * r) - 1.0


def cc_combiner_cdf_series(array, gamma0, ctl=DEFAULT_CONTROL, int_tol=1e-9):
    """The Phi1-based closed form for the CC outage, evaluated as printed.

    Cross-check only. The finite sum runs to ``(1 - r + M r)/(M r) - 1``,
    which is an integer only for special correlations; anything else is
    refused with :class:`SeriesPathRefused` rather than rounded.
    """
    _require(array, CorrelationModel.CC)
    M = array.antennas
    m = array.branch.m
    if M < 2 or not 0.0 < array.rho < 1.0:
        raise SeriesPathRefused("series form needs M >= 2 and 0 < rho < 1")
    upper = cc_series_limit(array)
    n_max = round(upper)
    if abs(upper - n_max) > int_tol or n_max < 0:
        raise SeriesPathRefused(f"sum limit {upper!r} is not a non-negative integer")
    r = array.gaussian_corr
    zbar = array.branch.mean_snr
    Mm = M * m
    v = Mm - m
    big = 1.0 - r + M * r
    x = M * r / big
    y = M * r * m * gamma0 / (zbar * (1.0 - r) * big)
    pre = math.exp(
        m * math.log((1.0 - r) / (M * r))
        + v * math.log(big / (M * r))
        - math.lgamma(m)
        - math.lgamma(v)
    )
    head = pre * humbert_phi1(m, Mm, Mm, x, 0.0, ctl)
    tail_terms = [
        gamma0 ** n / math.factorial(n) * humbert_phi1(m, Mm - n, Mm, x, y, ctl)
        for n in range(n_max + 1)
    ]
    tail = pre * math.exp(-big * gamma0 / (M * r)) * math.fsum(tail_terms)
    return head - tail


# ---------------------------------------------------------------------------
# exponential correlation
# ---------------------------------------------------------------------------

def ec_lambda(M, rho_e):
    """Sum of all entries of the EC power-correlation matrix (variance factor).

    Equals ``M + 2 rho/(1-rho) (M - (1 - rho^M)/(1 - rho))``; evaluated as
    ``M + 2 sum_k (M-k) rho^k``, which does not cancel as ``rho -> 1``.
    """
    if int(M) != M or M < 1:
        raise ValueError("M must be a positive integer")
    if not 0.0 <= rho_e < 1.0:
        raise ValueError("rho_e must lie in [0, 1)")
    if rho_e == 0.0:
        return float(M)
    M = int(M)
    return M + 2.0 * math.fsum((M - k) * rho_e ** k for k in range(1, M))


def _ec_shape_scale(array):
    M = array.antennas
    m = array.branch.m
    lam = ec_lambda(M, array.rho)
    return m * M * M / lam, lam * array.branch.mean_snr / (M * m)


def ec_combiner_pdf(array, z):
    """Moment-matched Gamma density of the EC combiner output."""
    _require(array, CorrelationModel.EC)
    if z <= 0:
        return 0.0
    k, theta = _ec_shape_scale(array)
    return math.exp((k - 1.0) * math.log(z) - z / theta - math.lgamma(k) - k * math.log(theta))


def ec_combiner_cdf(array, gamma0):
    """EC combiner outage as a regularized *lower* incomplete gamma."""
    _require(array, CorrelationModel.EC)
    if gamma0 < 0:
        raise DomainError("threshold must be non-negative")
    if array.independent:
        return mrc_iid_cdf(array.antennas, array.branch, gamma0)
    k, theta = _ec_shape_scale(array)
    return reg_lower_gamma(k, gamma0 / theta)


def combiner_cdf(array, gamma0):
    if array.branch.mean_snr == 0:
        return _dead_link_cdf(gamma0)
    if array.model is CorrelationModel.CC:
        return cc_combiner_cdf(array, gamma0)
    return ec_combiner_cdf(array, gamma0)
