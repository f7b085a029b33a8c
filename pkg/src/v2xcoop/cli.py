"""Command-line interface: ``pep``, ``validate``, ``game``, ``reproduce``, ``selftest``.

Exit status: 0 success, 1 usage or configuration error, 2 numeric failure,
3 validation (or required figure claim) failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

from . import __version__
from .figures import FIGURES, reproduce
from .runconfig import ConfigError, RunConfig, Sweep, db_to_linear, render
from .runs import game_table, pep_table, validate_table

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_FAIL = 0, 1, 2, 3

# flag name -> (RunConfig field, type, help)
FLAGS = [
    ("--snr-db", "snr_db", float, "transmit SNR P/N0 in dB"),
    ("--gamma0-db", "gamma0_db", float, "decoding threshold in dB"),
    ("--n-helpers", "n_helpers", int, "number of candidate helper vehicles N"),
    ("--m-antennas", "m_antennas", int, "RSU antennas M"),
    ("--phi", "phi", float, "share of power spent on the first hop"),
    ("--m-fading", "m_fading", float, "Nakagami shape m"),
    ("--rho", "rho", float, "branch power correlation"),
    ("--model", "model", str, "correlation model: cc, ec or both"),
    ("--blocks", "blocks", int, "force the number of blocks per packet L"),
    ("--packet-bits", "packet_bits", float, "packet size in bits (derives L)"),
    ("--carrier-hz", "carrier_hz", float, "carrier frequency in Hz (derives L)"),
    ("--speed", "speed", float, "vehicle speed in m/s (derives L)"),
    ("--tc-model", "tc_model", str, "coherence-time model: paper or classical"),
    ("--d-first", "d_first", float, "source-helper distance in m"),
    ("--d-second", "d_second", float, "helper-RSU distance in m"),
    ("--d-source-rsu", "d_source_rsu", float,
     "source-RSU distance in m; sets d_second = hypot(d_first, this)"),
    ("--ratio", "ratio", float, "set d_first = ratio * d_second"),
    ("--alpha", "alpha", float, "path-loss exponent"),
    ("--noise", "noise", float, "noise power N0"),
    ("--trials", "trials", int, "Monte Carlo trials per sweep point"),
    ("--seed", "seed", int, "random seed"),
    ("--workers", "workers", int, "threads for Monte Carlo chunks (results do not depend on it)"),
    ("--steepness", "steepness", float, "sigmoid steepness a"),
    ("--revenue-weight", "revenue_weight", float, "satisfaction weight w_p"),
    ("--helper-cost", "helper_cost", float, "helper cost per unit power c"),
    ("--price", "price", float, "fix the helper price instead of the equilibrium price"),
    ("--draws", "draws", int, "channel draws averaged per game point (0: mean channel)"),
    ("--sweep", "sweep", str, "VAR:START:STOP:POINTS[:log]"),
    ("--format", "format", str, "csv or json (JSON lines)"),
]
CHOICES = {"model": ["cc", "ec", "both"], "tc_model": ["paper", "classical"], "format": ["csv", "json"]}
BLOCK_SOURCES = {"packet_bits", "carrier_hz", "speed"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _common():
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="JSON config file (flags override it)")
    p.add_argument("--save-config", help="write the resolved config to this JSON file")
    p.add_argument("--out", help="output file (default: stdout)")
    for flag, dest, typ, hlp in FLAGS:
        p.add_argument(flag, dest=dest, type=typ, choices=CHOICES.get(dest), help=hlp)
    return p


def build_parser():
    parser = _Parser(prog="v2xcoop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()
    sub.add_parser("pep", parents=[common], help="analytic packet error over a sweep")
    v = sub.add_parser("validate", parents=[common], help="analytic against Monte Carlo")
    v.add_argument("--corrupt-analytic", type=float, default=0.0, help=argparse.SUPPRESS)
    sub.add_parser("game", parents=[common], help="Stackelberg equilibrium over a sweep")
    r = sub.add_parser("reproduce", help="run a frozen figure recipe")
    r.add_argument("figure", choices=FIGURES)
    r.add_argument("--out", default=".", help="output directory")
    r.add_argument("--format", choices=["csv", "json"], default="csv")
    sub.add_parser("selftest", help="quick internal consistency checks")
    return parser


def resolve_config(args):
    """Built-in defaults, then the config file, then explicit flags."""
    ns = vars(args)
    base = RunConfig.load(ns["config"]) if "config" in ns else RunConfig()
    overrides = {dest: ns[dest] for _, dest, _, _ in FLAGS if dest in ns}
    if "sweep" in overrides:
        overrides["sweep"] = Sweep.parse(overrides["sweep"])
    if BLOCK_SOURCES & overrides.keys() and "blocks" not in overrides:
        overrides["blocks"] = None  # derive L from packet size and coherence time
    if "out" in ns:
        overrides["out"] = ns["out"]
    try:
        cfg = replace(base, **overrides).validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    if "save_config" in ns:
        cfg.dump(ns["save_config"])
    return cfg


def _emit(text, cfg):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_pep(cfg):
    columns, rows, summary = pep_table(cfg)
    _emit(render("pep", cfg, columns, rows), cfg)
    print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_validate(cfg, corrupt=0.0):
    columns, rows, summary, ok = validate_table(cfg, corrupt=corrupt)
    _emit(render("validate", cfg, columns, rows), cfg)
    print(summary, file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_game(cfg):
    columns, rows, summary = game_table(cfg)
    extra = {"realizations": "mean channel" if cfg.draws == 0 else f"average of {cfg.draws} seeded draws"}
    _emit(render("game", cfg, columns, rows, extra=extra), cfg)
    print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_reproduce(figure, out_dir, fmt="csv"):
    cap, ok = reproduce(figure, out_dir, fmt)
    sys.stdout.write(cap)
    return EXIT_OK if ok else EXIT_FAIL


def selftest_checks():
    """``(name, passed)`` pairs for a fast end-to-end sanity run."""
    from .channel import CorrelatedArray, FadingLink, combiner_cdf, ec_lambda, mrc_iid_cdf
    from .game import ChannelRealization, GameParams, satisfaction, source_marginal, stackelberg_equilibrium
    from .pep import packet_error_from_block

    link = FadingLink(1.0, 0.5)
    checks = []
    iid = mrc_iid_cdf(10, link, 2.0)
    for model in ("cc", "ec"):
        v = combiner_cdf(CorrelatedArray(10, model, 1e-6, link), 2.0)
        checks.append((f"{model} combiner reduces to i.i.d. MRC as rho -> 0", abs(v / iid - 1) < 1e-3))
    checks.append(("ec_lambda(M, 0) == M", ec_lambda(7, 0.0) == 7))
    params = GameParams(0.1, 3e4, 1.0, 0.1)
    checks.append(("satisfaction(gamma0) == 0.5", satisfaction(0.1, params) == 0.5))
    checks.append(("1-(1-0.09)^5 rounds to 0.376", round(packet_error_from_block(0.09, 5), 3) == 0.376))
    eq = stackelberg_equilibrium(ChannelRealization(1.2, 4.0, 10.0, 30.0, 1.5, 0.015), params)
    foc = source_marginal(eq.power_star, ChannelRealization(1.2, 4.0, 10.0, 30.0, 1.5, 0.015),
                          params.at_price(eq.price_star))
    checks.append(("game first-order condition at P*", eq.interior and abs(foc) < 1e-9))
    cfg = RunConfig(trials=20_000, sweep=Sweep("gamma0_db", -20.0, 0.0, 3))
    _, _, _, ok = validate_table(cfg)
    checks.append(("analytic vs Monte Carlo at the defaults (3 points, both models)", ok))
    checks.append(("dB boundary: -10 dB is 0.1", math.isclose(db_to_linear(-10.0), 0.1, rel_tol=1e-15)))
    return checks


def cmd_selftest():
    checks = selftest_checks()
    for name, ok in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_FAIL


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "selftest":
            return cmd_selftest()
        if args.command == "reproduce":
            return cmd_reproduce(args.figure, args.out, args.format)
        cfg = resolve_config(args)
        if args.command == "pep":
            return cmd_pep(cfg)
        if args.command == "validate":
            return cmd_validate(cfg, args.corrupt_analytic)
        return cmd_game(cfg)
    except (ConfigError, OSError) as exc:
        print(f"v2xcoop: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"v2xcoop: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"v2xcoop: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
