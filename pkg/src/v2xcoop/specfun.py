"""Special functions used by the combiner and relay-selection distributions.

Everything here is plain 64-bit floating point. The incomplete gamma pair uses
the usual series / continued-fraction split, and the hypergeometric series are
summed with Neumaier-compensated accumulation so that results do not depend on
anything but the arguments and the :class:`SeriesControl`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "DomainError",
    "SeriesNotConverged",
    "SeriesControl",
    "DEFAULT_CONTROL",
    "reg_lower_gamma",
    "reg_upper_gamma",
    "kummer_1f1",
    "log_kummer_1f1",
    "humbert_phi1",
]

_EPS = 2.220446049250313e-16
_GAMMA_MAX_ITER = 100_000
_FPMIN = 1e-300


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class SeriesNotConverged(ArithmeticError):
    """A series hit ``max_terms`` before meeting its tolerance."""

    def __init__(self, name, partial_sum, last_term, terms):
        self.partial_sum = partial_sum
        self.last_term = last_term
        self.terms = terms
        super().__init__(
            f"{name}: no convergence after {terms} terms "
            f"(partial sum {partial_sum!r}, last term {last_term!r})"
        )


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy shared by the hypergeometric series."""

    rel_tol: float = 1e-12
    abs_tol: float = 1e-300
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise ValueError("max_terms must be a positive integer")

    def small(self, term, total):
        return abs(term) < max(self.rel_tol * abs(total), self.abs_tol)


DEFAULT_CONTROL = SeriesControl()


class _Neumaier:
    # compensated running sum; `scale` lets the log-domain series rescale in place
    __slots__ = ("s", "c")

    def __init__(self, start=0.0):
        self.s = float(start)
        self.c = 0.0

    def add(self, x):
        t = self.s + x
        if abs(self.s) >= abs(x):
            self.c += (self.s - t) + x
        else:
            self.c += (x - t) + self.s
        self.s = t

    def scale(self, f):
        self.s *= f
        self.c *= f

    @property
    def value(self):
        return self.s + self.c


def _is_nonpositive_int(v):
    return v <= 0 and float(v).is_integer()


# ---------------------------------------------------------------------------
# incomplete gamma
# ---------------------------------------------------------------------------

def _check_gamma_args(a, x):
    if not (math.isfinite(a) and a > 0):
        raise DomainError(f"incomplete gamma needs a > 0, got a={a!r}")
    if math.isnan(x) or x < 0:
        raise DomainError(f"incomplete gamma needs x >= 0, got x={x!r}")


def _gamma_prefactor(a, x):
    # x^a e^{-x} / Gamma(a), in log space to survive large a
    return math.exp(a * math.log(x) - x - math.lgamma(a))


def _lower_series(a, x):
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * _gamma_prefactor(a, x)
    raise SeriesNotConverged("reg_lower_gamma series", total, term, _GAMMA_MAX_ITER)


def _upper_contfrac(a, x):
    # modified Lentz evaluation of the Legendre continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * _gamma_prefactor(a, x)
    raise SeriesNotConverged("reg_upper_gamma continued fraction", h, delta, _GAMMA_MAX_ITER)


def reg_lower_gamma(a, x):
    """Regularized lower incomplete gamma ``P(a, x) = gamma(a, x) / Gamma(a)``.

    Uses the power series for ``x < a + 1`` and the continued fraction for the
    complement otherwise.
    """
    a = float(a)
    x = float(x)
    _check_gamma_args(a, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _lower_series(a, x))
    return max(0.0, 1.0 - _upper_contfrac(a, x))


def reg_upper_gamma(a, x):
    """Regularized upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    a = float(a)
    x = float(x)
    _check_gamma_args(a, x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _lower_series(a, x))
    return min(1.0, _upper_contfrac(a, x))


# ---------------------------------------------------------------------------
# confluent hypergeometric 1F1
# ---------------------------------------------------------------------------

def _check_b(b, name):
    if _is_nonpositive_int(b):
        raise DomainError(f"{name}: b={b!r} is a non-positive integer")


def _tail_ratio_bound(a, b, x, n):
    """Bound on |t_{k+1} / t_k| for every k > n in the 1F1 series, or inf.

    Once ``a + k`` and ``b + k`` are positive, ``(a+k)/(b+k)`` moves
    monotonically towards 1 and ``|x|/(k+1)`` decreases, so the bound is
    attained at ``k = n + 1``.
    """
    k = n + 1
    if a + k <= 0.0 or b + k <= 0.0:
        return math.inf
    return abs(x) / (k + 1) * max(1.0, (a + k) / (b + k))


def _tail_small(term, total, q, ctl):
    # both the last term and the neglected tail, at most |term| q / (1 - q)
    # when all later ratios are <= q, must be under the tolerance
    return q < 1.0 and ctl.small(term * max(1.0, q / (1.0 - q)), total)


def _kummer_series(a, b, x, ctl):
    acc = _Neumaier(1.0)
    term = 1.0
    for n in range(ctl.max_terms):
        term *= (a + n) / (b + n) * x / (n + 1)
        acc.add(term)
        if term == 0.0:
            return acc.value
        # a small term alone is not enough: later terms may grow again
        if _tail_small(term, acc.value, _tail_ratio_bound(a, b, x, n), ctl):
            return acc.value
    raise SeriesNotConverged("kummer_1f1", acc.value, term, ctl.max_terms)


def kummer_1f1(a, b, x, ctl=DEFAULT_CONTROL):
    """Kummer's confluent hypergeometric function 1F1(a; b; x).

    Ascending series with compensated summation. Negative ``x`` goes through
    Kummer's transformation ``e^x 1F1(b - a; b; -x)`` so the summed terms keep
    one sign for the parameter ranges used here. Overflows to ``inf`` for very
    large positive ``x``; use :func:`log_kummer_1f1` there.
    """
    a = float(a)
    b = float(b)
    x = float(x)
    _check_b(b, "kummer_1f1")
    if x == 0.0 or a == 0.0:
        return 1.0
    if x < 0.0:
        if _is_nonpositive_int(a):
            # terminating polynomial, the transform would not terminate
            return _kummer_series(a, b, x, ctl)
        return math.exp(x) * _kummer_series(b - a, b, -x, ctl)
    if x < 600.0 or a < 0 or b < 0:
        return _kummer_series(a, b, x, ctl)
    log_val = log_kummer_1f1(a, b, x, ctl)
    return math.inf if log_val > 709.0 else math.exp(log_val)


def _log_kummer_series(a, b, x, ctl):
    # positive-term series summed relative to a moving scale
    acc = _Neumaier(1.0)
    term = 1.0
    log_scale = 0.0
    for n in range(ctl.max_terms):
        term *= (a + n) / (b + n) * x / (n + 1)
        acc.add(term)
        if term > 1e250:
            f = 1.0 / term
            acc.scale(f)
            log_scale -= math.log(f)
            term = 1.0
        if _tail_small(term, acc.value, _tail_ratio_bound(a, b, x, n), ctl):
            return log_scale + math.log(acc.value)
    raise SeriesNotConverged("log_kummer_1f1", acc.value, term, ctl.max_terms)


def _log_kummer_asymptotic(a, b, x, ctl):
    # 1F1 ~ Gamma(b)/Gamma(a) e^x x^(a-b) sum_k (b-a)_k (1-a)_k / (k! x^k)
    acc = _Neumaier(1.0)
    term = 1.0
    prev = math.inf
    for k in range(ctl.max_terms):
        term *= (b - a + k) * (1.0 - a + k) / ((k + 1) * x)
        if term == 0.0:
            break
        if abs(term) > prev:
            raise SeriesNotConverged("log_kummer_1f1 asymptotic", acc.value, term, k)
        acc.add(term)
        prev = abs(term)
        if ctl.small(term, acc.value):
            break
    return math.lgamma(b) - math.lgamma(a) + x + (a - b) * math.log(x) + math.log(acc.value)


def log_kummer_1f1(a, b, x, ctl=DEFAULT_CONTROL):
    """Natural log of 1F1(a; b; x) for ``a > 0``, ``b > 0``, ``x >= 0``.

    All series terms are positive here, so the sum is carried with a running
    scale and never overflows. Very large ``x`` switches to the asymptotic
    expansion, whose neglected part is of relative order ``e^{-x}``.
    """
    a = float(a)
    b = float(b)
    x = float(x)
    if not (a > 0 and b > 0 and x >= 0):
        raise DomainError("log_kummer_1f1 needs a > 0, b > 0, x >= 0")
    if x == 0.0:
        return 0.0
    if x > 2000.0 and x > 20.0 * (a + b):
        return _log_kummer_asymptotic(a, b, x, ctl)
    if x > 0.9 * ctl.max_terms:
        ctl = SeriesControl(ctl.rel_tol, ctl.abs_tol, int(2 * x + 20 * math.sqrt(x) + 100))
    return _log_kummer_series(a, b, x, ctl)


# ---------------------------------------------------------------------------
# Humbert Phi1
# ---------------------------------------------------------------------------

def humbert_phi1(a, b, c, x, y, ctl=DEFAULT_CONTROL):
    """Humbert's confluent double series Phi1(a, b; c; x, y).

        sum_{m,n>=0} (a)_{m+n} (b)_m / ((c)_{m+n} m! n!) x^m y^n

    Summed along anti-diagonals ``m + n = k``; each diagonal is added exactly
    with ``math.fsum`` and the diagonals accumulate with compensation. The sum
    stops after two consecutive diagonals fall under the tolerance, and only
    once ``k`` is past every sign change of the Pochhammer factors and past
    the peaks of ``|y|^n / n!`` and ``(b)_j |x|^j / j!``, so a diagonal that
    is small by cancellation or near-zero coefficients cannot end the sum.
    """
    a = float(a)
    b = float(b)
    c = float(c)
    x = float(x)
    y = float(y)
    _check_b(c, "humbert_phi1")
    if not abs(x) < 1.0:
        raise DomainError(f"humbert_phi1 needs |x| < 1, got x={x!r}")

    u = [1.0]  # (b)_j x^j / j!
    v = [1.0]  # y^n / n!
    coef = 1.0  # (a)_k / (c)_k
    acc = _Neumaier(1.0)
    quiet = 0
    diag = 1.0
    k_min = max(-a, -b, -c, abs(y), (abs(b) * abs(x) - 1.0) / (1.0 - abs(x)), 0.0) + 1.0
    for k in range(1, ctl.max_terms):
        u.append(u[-1] * (b + k - 1) * x / k)
        v.append(v[-1] * y / k)
        coef *= (a + k - 1) / (c + k - 1)
        if coef == 0.0:
            return acc.value
        diag = coef * math.fsum(u[j] * v[k - j] for j in range(k + 1))
        acc.add(diag)
        if ctl.small(diag, acc.value):
            quiet += 1
            if quiet >= 2 and k >= k_min:
                return acc.value
        else:
            quiet = 0
    raise SeriesNotConverged("humbert_phi1", acc.value, diag, ctl.max_terms)
