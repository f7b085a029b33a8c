"""Run configuration, sweep specs and the CSV / JSON-lines writers used by the CLI.

SNR-like inputs are in dB here and only here; everything handed to the
numerical modules is linear.
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from . import __version__
from .pep import Scenario

# Helper-to-node distance giving an EC packet error of 0.09 at gamma0 = -5 dB,
# L = 5, alpha = 2 with the remaining defaults (helpers midway, d1 = d2).
DEFAULT_DISTANCE = 17.319

INT_FIELDS = {"n_helpers", "m_antennas", "blocks", "trials", "seed", "draws", "workers"}
SWEEPABLE = {
    "snr_db", "gamma0_db", "n_helpers", "m_antennas", "phi", "m_fading", "rho",
    "blocks", "d_first", "d_second", "alpha", "speed", "packet_bits", "carrier_hz",
    "price", "ratio", "d_source_rsu", "steepness", "revenue_weight", "helper_cost",
}


class ConfigError(ValueError):
    """Invalid run configuration (exit status 1)."""


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    return 10.0 * math.log10(x) if x > 0 else -math.inf


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.variable not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {self.variable!r}; choose from {sorted(SWEEPABLE)}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("sweep bounds must be finite")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigError("a sweep needs at least 2 points")
        if self.scale not in ("linear", "log"):
            raise ConfigError("sweep scale must be linear or log")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError("log sweeps need positive bounds")

    @classmethod
    def parse(cls, text):
        parts = text.split(":")
        if len(parts) not in (4, 5):
            raise ConfigError(f"bad sweep {text!r}, expected VAR:START:STOP:POINTS[:log]")
        try:
            start, stop = float(parts[1]), float(parts[2])
            points = int(parts[3])
        except ValueError as exc:
            raise ConfigError(f"bad sweep {text!r}: {exc}") from None
        scale = "linear"
        if len(parts) == 5:
            if parts[4] != "log":
                raise ConfigError(f"bad sweep scale {parts[4]!r}")
            scale = "log"
        return cls(parts[0], start, stop, points, scale)

    def values(self):
        if self.scale == "log":
            v = np.geomspace(self.start, self.stop, self.points)
        else:
            v = np.linspace(self.start, self.stop, self.points)
        if self.variable in INT_FIELDS:
            return [int(round(x)) for x in v]
        return [float(x) for x in v]


@dataclass(frozen=True)
class RunConfig:
    snr_db: float = 25.0
    gamma0_db: float = -10.0
    n_helpers: int = 5
    m_antennas: int = 10
    phi: float = 0.5
    m_fading: float = 1.0
    rho: float = 0.1
    model: str = "both"
    blocks: Optional[int] = 10
    packet_bits: float = 1600.0
    carrier_hz: float = 5.9e9
    speed: float = 20.0
    tc_model: str = "paper"
    d_first: float = DEFAULT_DISTANCE
    d_second: float = DEFAULT_DISTANCE
    d_source_rsu: Optional[float] = None
    ratio: Optional[float] = None
    alpha: float = 2.0
    noise: float = 1.0
    trials: int = 100_000
    seed: int = 1
    workers: int = 1
    # game
    steepness: float = 0.1
    revenue_weight: float = 3.0e4
    helper_cost: float = 1.0
    price: Optional[float] = None
    draws: int = 0
    sweep: Optional[Sweep] = None
    out: Optional[str] = None
    format: str = "csv"

    def validate(self):
        if self.model not in ("cc", "ec", "both"):
            raise ConfigError("model must be cc, ec or both")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.tc_model not in ("paper", "classical"):
            raise ConfigError("tc-model must be paper or classical")
        if self.n_helpers < 1 or self.m_antennas < 1:
            raise ConfigError("need at least one helper and one antenna")
        if not 0.0 < self.phi <= 1.0:
            raise ConfigError("phi must lie in (0, 1]")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigError("rho must lie in [0, 1)")
        if self.m_fading < 0.5:
            raise ConfigError("Nakagami m must be >= 0.5")
        if self.blocks is not None and self.blocks < 1:
            raise ConfigError("blocks must be >= 1")
        if min(self.d_first, self.d_second) <= 0:
            raise ConfigError("distances must be positive")
        if self.trials < 1 or self.workers < 1 or self.draws < 0:
            raise ConfigError("trials and workers must be positive, draws non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return self

    @property
    def models(self):
        return ["cc", "ec"] if self.model == "both" else [self.model]

    def with_value(self, name, value):
        return replace(self, **{name: value}).validate()

    def geometry(self):
        """Resolved ``(d_first, d_second)``.

        ``ratio`` sets ``d_first = ratio * d_second``; ``d_source_rsu`` places
        the helper perpendicular to the source-RSU line, so
        ``d_second = hypot(d_first, d_source_rsu)``.
        """
        d2 = self.d_second
        d1 = self.d_first if self.ratio is None else self.ratio * d2
        if self.d_source_rsu is not None:
            d2 = math.hypot(d1, self.d_source_rsu)
        return d1, d2

    def scenario(self, model):
        d1, d2 = self.geometry()
        return Scenario.build(
            snr=db_to_linear(self.snr_db),
            gamma0=db_to_linear(self.gamma0_db),
            n_helpers=self.n_helpers,
            antennas=self.m_antennas,
            phi=self.phi,
            m=self.m_fading,
            rho=self.rho,
            model=model,
            d_first=d1,
            d_second=d2,
            alpha=self.alpha,
            noise=self.noise,
            packet_bits=self.packet_bits,
            carrier_hz=self.carrier_hz,
            speed_mps=self.speed,
            blocks=self.blocks,
            tc_model=self.tc_model,
        )

    def points(self):
        """``(swept value, config)`` pairs; one point when nothing is swept."""
        if self.sweep is None:
            return [(None, self)]
        return [(v, self.with_value(self.sweep.variable, v)) for v in self.sweep.values()]

    # --- serialization -----------------------------------------------------

    def to_dict(self):
        """Everything that determines the results; ``out`` and ``workers`` do not."""
        d = dataclasses.asdict(self)
        d.pop("out")
        d.pop("workers")
        return d

    def dump(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if data.get("sweep") is not None:
            sw = data["sweep"]
            if isinstance(sw, str):
                data["sweep"] = Sweep.parse(sw)
            elif isinstance(sw, dict):
                data["sweep"] = Sweep(**sw)
        for k in INT_FIELDS & set(data):
            if data[k] is not None:
                data[k] = int(data[k])
        return cls(**data).validate()

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def render(command, config, columns, rows, extra=None):
    """Serialize rows with a self-describing header.

    CSV gets a ``#``-prefixed JSON header line; JSON-lines gets the header as
    its first object. Output is deterministic for identical inputs.
    """
    header = {
        "tool": "v2xcoop",
        "version": __version__,
        "command": command,
        "seed": config.seed,
        "config": config.to_dict(),
    }
    if extra:
        header.update(extra)
    buf = io.StringIO()
    if config.format == "json":
        buf.write(json.dumps(header, sort_keys=True) + "\n")
        for row in rows:
            buf.write(json.dumps(dict(zip(columns, row)), sort_keys=False) + "\n")
    else:
        buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
        buf.write(",".join(columns) + "\n")
        for row in rows:
            buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def field_default(name):
    for f in fields(RunConfig):
        if f.name == name:
            return f.default
    raise KeyError(name)
