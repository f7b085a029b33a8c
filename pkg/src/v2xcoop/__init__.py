"""Outage and packet error analysis for a two-hop V2X uplink.

A source vehicle reaches a multi-antenna roadside unit through the best of
several helper vehicles (decode-and-forward). The package provides

- ``specfun``: incomplete gamma, Kummer 1F1 and Humbert Phi1 with explicit
  convergence control;
- ``channel``: Nakagami-m hop and correlated-combiner SNR distributions;
- ``pep``: block outage and packet error probability;
- ``montecarlo``: a seeded link-level simulator used as an oracle;
- ``game``: the source/helper Stackelberg power-pricing game;
- ``cli``: sweeps, validation runs and figure recipes (``python -m v2xcoop``).
"""

__version__ = "0.1.0"

from .channel import CorrelatedArray, CorrelationModel, FadingLink, Phase, PowerBudget  # noqa: E402
from .pep import PepEstimate, Scenario, analytic_estimate, packet_error_prob  # noqa: E402
from .montecarlo import RngSpec, estimate_pep  # noqa: E402

__all__ = [
    "__version__",
    "CorrelatedArray",
    "CorrelationModel",
    "FadingLink",
    "Phase",
    "PowerBudget",
    "PepEstimate",
    "Scenario",
    "analytic_estimate",
    "packet_error_prob",
    "RngSpec",
    "estimate_pep",
]
