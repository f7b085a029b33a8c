"""Packet error probability of the two-hop relay link.

A block is lost when the bottleneck SNR falls below the decoding threshold,
i.e. when the best source-helper hop *or* the helper-RSU combiner is in
outage. A packet spanning ``L`` independently faded blocks is lost when any
block is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

from .channel import (
    CorrelatedArray,
    CorrelationModel,
    FadingLink,
    Phase,
    PowerBudget,
    combiner_cdf,
    iid_snr_cdf,
    mean_snr,
)

SPEED_OF_LIGHT = 299_792_458.0


class BlockError(NamedTuple):
    first_hop: float
    second_hop: float
    block: float


@dataclass(frozen=True)
class PepEstimate:
    """A packet error probability together with how it was obtained."""

    value: float
    method: str  # "closed-form", "quadrature" or "monte-carlo"
    blocks: int
    block_prob: float
    trials: Optional[int] = None
    outages: Optional[int] = None
    half_width: float = 0.0
    block_se: float = 0.0


@dataclass(frozen=True)
class Scenario:
    """A full network instance.

    ``source_links`` holds one link per candidate helper; the selected helper
    reaches the RSU through ``rsu``, whose branch distance is the helper-RSU
    distance. ``blocks`` forces the block count instead of deriving it from
    the packet size and coherence time.
    """

    source_links: Sequence[FadingLink]
    rsu: CorrelatedArray
    budget: PowerBudget
    gamma0: float
    packet_bits: float = 1600.0
    carrier_hz: float = 5.9e9
    speed_mps: float = 20.0
    blocks: Optional[int] = None
    tc_model: str = "paper"

    def __post_init__(self):
        object.__setattr__(self, "source_links", tuple(self.source_links))
        if not self.source_links:
            raise ValueError("need at least one helper")
        if not self.gamma0 > 0:
            raise ValueError("threshold gamma0 must be positive")
        if self.blocks is not None and (int(self.blocks) != self.blocks or self.blocks < 1):
            raise ValueError("forced block count must be a positive integer")
        if self.tc_model not in ("paper", "classical"):
            raise ValueError(f"unknown coherence-time model {self.tc_model!r}")

    @classmethod
    def build(
        cls,
        *,
        snr,
        gamma0,
        n_helpers=5,
        antennas=10,
        phi=0.5,
        m=1.0,
        rho=0.1,
        model="ec",
        d_first=1.0,
        d_second=1.0,
        alpha=2.0,
        noise=1.0,
        **kw,
    ):
        """Derive per-hop mean SNRs from power, split and geometry.

        ``d_first`` may be a scalar (all helpers equidistant) or one distance
        per helper, in which case ``n_helpers`` is ignored.
        """
        if isinstance(d_first, (int, float)):
            d_first = [float(d_first)] * int(n_helpers)
        budget = PowerBudget(snr * noise, phi, noise)
        links = [
            FadingLink(m, mean_snr(budget, Phase.FIRST, d, alpha), d, alpha) for d in d_first
        ]
        branch = FadingLink(m, mean_snr(budget, Phase.SECOND, d_second, alpha), d_second, alpha)
        rsu = CorrelatedArray(int(antennas), CorrelationModel(model), rho, branch)
        return cls(links, rsu, budget, gamma0, **kw)

    def with_model(self, model):
        return replace(self, rsu=replace(self.rsu, model=CorrelationModel(model)))


def coherence_time(carrier_hz, speed_mps, model="paper"):
    """Channel coherence time.

    ``"paper"`` evaluates ``3 c f_c / (4 sqrt(pi) (c + v))`` literally; its
    units are unusual but it decreases with speed as it should.
    ``"classical"`` is the textbook ``9 c / (16 pi v f_c)`` (infinite at rest).
    """
    if not carrier_hz > 0:
        raise ValueError("carrier frequency must be positive")
    if speed_mps < 0:
        raise ValueError("speed must be non-negative")
    c = SPEED_OF_LIGHT
    if model == "paper":
        return 3.0 * c * carrier_hz / (4.0 * math.sqrt(math.pi) * (c + speed_mps))
    if model == "classical":
        if speed_mps == 0:
            return math.inf
        return 9.0 * c / (16.0 * math.pi * speed_mps * carrier_hz)
    raise ValueError(f"unknown coherence-time model {model!r}")


def block_ratio(packet_bits, tc, gamma0):
    """Packet size over the bits one coherence block carries at threshold rate."""
    return packet_bits / (tc * math.log2(1.0 + gamma0))


def blocks_from_ratio(ratio):
    return max(1, math.ceil(ratio))


def num_blocks(scenario):
    """Block count L: forced value if given, else ceil of the ratio, at least 1."""
    if scenario.blocks is not None:
        return int(scenario.blocks)
    tc = coherence_time(scenario.carrier_hz, scenario.speed_mps, scenario.tc_model)
    return blocks_from_ratio(block_ratio(scenario.packet_bits, tc, scenario.gamma0))


def best_relay_outage(source_links, gamma0):
    """Probability that even the best of the independent source-helper hops is in outage."""
    if not source_links:
        raise ValueError("need at least one helper link")
    p = 1.0
    for link in source_links:
        p *= iid_snr_cdf(link, gamma0)
    return p


def second_hop_outage(scenario):
    return combiner_cdf(scenario.rsu, scenario.gamma0)


def combine_hops(p_first, p_second):
    """Union of two independent outage events."""
    return p_first + p_second - p_first * p_second


def block_error_components(scenario):
    pa = best_relay_outage(scenario.source_links, scenario.gamma0)
    pb = second_hop_outage(scenario)
    return BlockError(pa, pb, min(1.0, max(0.0, combine_hops(pa, pb))))


def block_error_prob(scenario):
    return block_error_components(scenario).block


def packet_error_from_block(p_block, blocks):
    """``1 - (1 - p)^L`` computed without cancellation for small ``p``."""
    if blocks < 1:
        raise ValueError("block count must be >= 1")
    if not 0.0 <= p_block <= 1.0:
        raise ValueError("block error probability must lie in [0, 1]")
    if p_block == 1.0:
        return 1.0
    return -math.expm1(blocks * math.log1p(-p_block))


def packet_error_prob(scenario, blocks=None):
    L = num_blocks(scenario) if blocks is None else blocks
    return packet_error_from_block(block_error_prob(scenario), L)


def analytic_estimate(scenario, blocks=None):
    """Packet error probability from the analytical path, with provenance."""
    L = num_blocks(scenario) if blocks is None else blocks
    p = block_error_prob(scenario)
    rsu = scenario.rsu
    numeric = rsu.model is CorrelationModel.CC and not rsu.independent
    return PepEstimate(
        value=packet_error_from_block(p, L),
        method="quadrature" if numeric else "closed-form",
        blocks=L,
        block_prob=p,
    )
