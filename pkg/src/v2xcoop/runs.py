"""Table builders behind the ``pep``, ``validate`` and ``game`` subcommands.

Each builder takes a resolved :class:`RunConfig` and returns
``(columns, rows, summary)``; rows come out in sweep order.
"""

from __future__ import annotations

import math

from .channel import CorrelatedArray, FadingLink
from .game import (
    ChannelRealization,
    GameParams,
    respond_at_price,
    sample_realizations,
    stackelberg_equilibrium,
)
from .montecarlo import RngSpec, count_outages, estimate_from_counts
from .pep import block_error_components, num_blocks, packet_error_from_block
from .runconfig import ConfigError, db_to_linear, linear_to_db

MIN_VALIDATE_TRIALS = 1000
Z_LIMIT = 3.0


def _lead(config):
    return [config.sweep.variable] if config.sweep is not None else []


def _lead_value(value, config):
    return [value] if config.sweep is not None else []


def pep_table(config):
    models = config.models
    columns = _lead(config) + ["blocks", "p_first"]
    for m in models:
        columns += [f"p_second_{m}", f"p_block_{m}", f"pep_{m}"]
    rows = []
    for value, cfg in config.points():
        row = _lead_value(value, config)
        first = None
        per_model = []
        L = None
        for m in models:
            sc = cfg.scenario(m)
            L = num_blocks(sc)
            comp = block_error_components(sc)
            first = comp.first_hop
            per_model += [comp.second_hop, comp.block, packet_error_from_block(comp.block, L)]
        rows.append(row + [L, first] + per_model)
    summary = f"pep: {len(rows)} point(s), model(s) {','.join(models)}"
    return columns, rows, summary


def validate_table(config, corrupt=0.0, workers=None):
    """Analytic block outage against the Monte Carlo oracle at every point.

    ``corrupt`` is added to the analytic block probability (harness self-test).
    The z-score uses the binomial standard error at the analytic probability.
    """
    if config.trials < MIN_VALIDATE_TRIALS:
        raise ConfigError(f"validate needs at least {MIN_VALIDATE_TRIALS} trials")
    workers = config.workers if workers is None else workers
    columns = _lead(config) + [
        "model", "blocks", "p_block_analytic", "p_block_mc", "outages", "trials",
        "block_se", "z", "pep_analytic", "pep_mc", "pep_mc_half_width", "status",
    ]
    rows = []
    worst = 0.0
    failed = 0
    for i, (value, cfg) in enumerate(config.points()):
        for j, m in enumerate(("cc", "ec")):
            if m not in config.models:
                continue
            sc = cfg.scenario(m)
            L = num_blocks(sc)
            p = min(1.0, max(0.0, block_error_components(sc).block + corrupt))
            k = count_outages(sc, cfg.trials, RngSpec(cfg.seed, 2 * i + j), workers)
            n = cfg.trials
            p_hat = k / n
            se = math.sqrt(p * (1.0 - p) / n)
            if se > 0:
                z = (p_hat - p) / se
            else:
                z = 0.0 if p_hat == p else math.inf
            ok = abs(z) <= Z_LIMIT
            failed += not ok
            worst = max(worst, abs(z))
            mc = estimate_from_counts(k, n, L)
            rows.append(_lead_value(value, config) + [
                m, L, p, p_hat, k, n, se, z,
                packet_error_from_block(p, L), mc.value, mc.half_width,
                "PASS" if ok else "FAIL",
            ])
    status = "FAIL" if failed else "PASS"
    summary = f"validate: {status} ({failed} of {len(rows)} rows beyond |z| > {Z_LIMIT:g}; max |z| = {worst:.3f})"
    return columns, rows, summary, not failed


def game_params(cfg):
    return GameParams(
        steepness=cfg.steepness,
        revenue_weight=cfg.revenue_weight,
        helper_cost=cfg.helper_cost,
        gamma0=db_to_linear(cfg.gamma0_db),
        price=cfg.price,
    )


def game_realizations(cfg, model):
    """Channel draws for one game point.

    ``draws == 0`` uses the mean channel (``|h|^2 = 1``, ``eta = M``);
    otherwise ``draws`` realizations from the seeded stream, identical across
    sweep points (common random numbers).
    """
    d1, d2 = cfg.geometry()
    if cfg.draws == 0:
        return [ChannelRealization(1.0, float(cfg.m_antennas), d1, d2, cfg.alpha, cfg.noise)]
    array = CorrelatedArray(cfg.m_antennas, model, cfg.rho, FadingLink(cfg.m_fading, 1.0))
    rng = RngSpec(cfg.seed).generator(0)
    return sample_realizations(cfg.n_helpers, array, d1, d2, cfg.alpha, cfg.noise, rng, cfg.draws)


def game_point(cfg, model):
    params = game_params(cfg)
    records = []
    for ch in game_realizations(cfg, model):
        if params.price is None:
            records.append(stackelberg_equilibrium(ch, params))
        else:
            records.append(respond_at_price(ch, params))
    n = len(records)

    def mean(attr):
        return math.fsum(getattr(r, attr) for r in records) / n

    power = mean("power_star")
    return {
        "price": mean("price_star"),
        "phi_star": mean("phi_star"),
        "power_star": power,
        "power_star_db": linear_to_db(power) if power > 0 else None,
        "utility_source": mean("utility_source"),
        "utility_helper": mean("utility_helper"),
        "no_trade": sum(not r.interior for r in records),
        "draws": n,
        "foc_residual": max(abs(r.foc_residual) for r in records),
    }


GAME_FIELDS = [
    "price", "phi_star", "power_star", "power_star_db", "utility_source",
    "utility_helper", "no_trade", "draws", "foc_residual",
]


def game_table(config):
    columns = _lead(config) + ["model"] + GAME_FIELDS + ["flag"]
    rows = []
    flagged = 0
    for value, cfg in config.points():
        for m in config.models:
            rec = game_point(cfg, m)
            flag = "no_interior_optimum" if rec["no_trade"] else ""
            flagged += bool(flag)
            rows.append(_lead_value(value, config) + [m] + [rec[k] for k in GAME_FIELDS] + [flag])
    summary = f"game: {len(rows)} row(s), {flagged} with draws lacking an interior optimum"
    return columns, rows, summary
