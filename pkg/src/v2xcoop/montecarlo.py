"""Link-level Monte Carlo oracle for the two-hop relay link.

Every fading power is built from complex Gaussians: a Nakagami-m power with
integer ``m`` is the mean of ``m`` unit-power ``|CN(0, 1)|^2`` draws, and the
RSU branches are correlated by coloring the Gaussian vectors with the
symmetric square root of their correlation matrix. For complex Gaussians the
power correlation equals the squared magnitude of the Gaussian correlation,
so a target power correlation ``rho`` is produced by Gaussian correlation
``sqrt(rho)`` (CC) or ``sqrt(rho)**|i-j|`` (EC).

Trials are split into fixed-size chunks, each with its own Philox stream
keyed by ``(seed, stream_id, chunk)``. Results therefore do not depend on the
number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import CorrelationModel
from .pep import PepEstimate, packet_error_from_block

CHUNK = 8192
Z95 = 1.959963984540054


@dataclass(frozen=True)
class RngSpec:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")

    def generator(self, chunk=0):
        ss = np.random.SeedSequence([self.seed, self.stream_id, chunk])
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class TrialResult:
    first_hop_snr: float
    second_hop_snr: float
    e2e_snr: float
    outage: bool
    helper: int


def _integer_m(m):
    if float(m) != int(m) or m < 1:
        raise ValueError(f"the sampler needs an integer Nakagami m >= 1, got {m}")
    return int(m)


def gaussian_corr_matrix(array):
    """Correlation matrix of the complex Gaussian components of the RSU branches."""
    M = array.antennas
    r = math.sqrt(array.rho)
    if array.model is CorrelationModel.CC:
        R = np.full((M, M), r)
        np.fill_diagonal(R, 1.0)
    else:
        idx = np.arange(M)
        R = r ** np.abs(idx[:, None] - idx[None, :])
    return R


def coloring_matrix(array):
    """Symmetric square root ``B`` of the Gaussian correlation matrix (``B @ B = R``)."""
    R = gaussian_corr_matrix(array)
    w, V = np.linalg.eigh(R)
    assert w.min() > 0, "correlation matrix is not positive definite"
    return (V * np.sqrt(w)) @ V.T


def _unit_powers(rng, m, shape, coloring=None):
    # mean of m unit-power |CN(0,1)|^2 draws, optionally colored along the last axis
    z = rng.standard_normal((shape[0], m, *shape[1:], 2))
    g = (z[..., 0] + 1j * z[..., 1]) * math.sqrt(0.5)
    if coloring is not None:
        g = g @ coloring.T
    return (g.real ** 2 + g.imag ** 2).sum(axis=1) / m


def sample_correlated_gains(array, rng, size=None):
    """Draw branch powers ``|h_j|^2`` with Gamma(m, 1/m) marginals.

    Returns shape ``(M,)`` for ``size=None`` else ``(size, M)``.
    """
    m = _integer_m(array.branch.m)
    n = 1 if size is None else int(size)
    B = None if array.rho == 0 else coloring_matrix(array)
    out = _unit_powers(rng, m, (n, array.antennas), B)
    return out[0] if size is None else out


def select_helper(first_hop_snrs):
    """Index and SNR of the strongest helper; ties go to the lowest index."""
    snrs = np.asarray(first_hop_snrs)
    i = np.argmax(snrs, axis=-1)
    return i, np.take_along_axis(snrs, np.expand_dims(i, -1), -1)[..., 0]


def simulate_hops(scenario, rng, n):
    """Per-hop SNRs of ``n`` independent blocks.

    Returns ``(first_hop_snr, second_hop_snr, helper_index)`` arrays.
    """
    m = _integer_m(scenario.rsu.branch.m)
    for link in scenario.source_links:
        _integer_m(link.m)
    means1 = np.array([link.mean_snr for link in scenario.source_links])
    g1 = _unit_powers(rng, m, (n, len(means1)))
    helper, first = select_helper(g1 * means1)
    array = scenario.rsu
    B = None if array.rho == 0 else coloring_matrix(array)
    g2 = _unit_powers(rng, m, (n, array.antennas), B)
    second = array.branch.mean_snr * g2.sum(axis=1)
    return first, second, helper


def run_trial(scenario, rng):
    """One block: pick the best helper, decode-and-forward, combine at the RSU."""
    first, second, helper = simulate_hops(scenario, rng, 1)
    f = float(first[0])
    s = float(second[0])
    e2e = min(f, s)
    return TrialResult(f, s, e2e, e2e < scenario.gamma0, int(helper[0]))


def _chunk_outages(scenario, rng_spec, chunk, n):
    first, second, _ = simulate_hops(scenario, rng_spec.generator(chunk), n)
    return int(np.count_nonzero(np.minimum(first, second) < scenario.gamma0))


def count_outages(scenario, trials, rng_spec, workers=1):
    """Number of outage blocks among ``trials`` draws; independent of ``workers``."""
    sizes = [CHUNK] * (trials // CHUNK)
    if trials % CHUNK:
        sizes.append(trials % CHUNK)
    jobs = list(enumerate(sizes))
    if workers <= 1:
        return sum(_chunk_outages(scenario, rng_spec, c, n) for c, n in jobs)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        counts = pool.map(lambda job: _chunk_outages(scenario, rng_spec, *job), jobs)
        return sum(counts)


def estimate_from_counts(outages, trials, blocks):
    """Packet error estimate and its 95% Wald interval mapped through ``1 - (1 - p)^L``."""
    p = outages / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    lo = max(0.0, p - Z95 * se)
    hi = min(1.0, p + Z95 * se)
    half = 0.5 * (packet_error_from_block(hi, blocks) - packet_error_from_block(lo, blocks))
    return PepEstimate(
        value=packet_error_from_block(p, blocks),
        method="monte-carlo",
        blocks=blocks,
        block_prob=p,
        trials=trials,
        outages=outages,
        half_width=half,
        block_se=se,
    )


def estimate_pep(scenario, blocks, trials, rng_spec, workers=1):
    if trials < 100:
        raise ValueError("need at least 100 trials")
    if blocks < 1:
        raise ValueError("block count must be >= 1")
    k = count_outages(scenario, trials, rng_spec, workers)
    return estimate_from_counts(k, trials, blocks)
