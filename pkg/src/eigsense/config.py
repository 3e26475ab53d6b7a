"""Run configuration: defaults per command, config files and flag overrides.

Config files are YAML (JSON is accepted too, being a subset). Keys may sit at
the top level or under ``scenario:`` / ``campaign:`` sections. A run manifest
is itself a valid config file: its ``config`` section is read back verbatim.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .detectors import ALL_DETECTORS, DetectorKind
from .errors import ConfigError
from .montecarlo import CampaignConfig
from .signal_model import ScenarioConfig


@dataclass
class RunConfig:
    sensors: int = 8
    samples: int = 200
    p: Optional[list] = None
    snr_db: Optional[list] = dataclasses.field(default_factory=lambda: [-13.0])
    signal_variance: Optional[float] = None
    noise_variance: float = 1.0
    field: str = "real"
    channel: str = "unit"
    channel_gains: Optional[list] = None
    stacking: str = "horizontal"
    detectors: list = dataclasses.field(default_factory=lambda: [d.value for d in ALL_DETECTORS])
    trials: int = 10_000
    pfa: float = 0.1
    seed: int = 0
    realizations: int = 50
    axis: str = "snr"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def scenario(self, p: Optional[int] = None, snr_db: Optional[float] = None) -> ScenarioConfig:
        if snr_db is None and self.signal_variance is None:
            snr_db = self.snr_db[0]
        return ScenarioConfig(
            num_sensors=self.sensors,
            num_samples=self.samples,
            overlap=self.p[0] if p is None else p,
            snr_db=snr_db,
            signal_variance=self.signal_variance,
            noise_variance=self.noise_variance,
            field_mode=self.field,
            channel_model=self.channel,
            channel_gains=self.channel_gains,
            stacking=self.stacking,
            master_seed=self.seed,
        )

    def campaign(self, with_snr_grid: bool = False) -> CampaignConfig:
        return CampaignConfig(
            scenario=self.scenario(),
            detectors=tuple(self.detectors),
            trials=self.trials,
            alpha=self.pfa,
            p_grid=tuple(self.p),
            snr_grid=tuple(self.snr_db) if with_snr_grid else None,
        )


COMMAND_DEFAULTS = {
    "eigs": dict(sensors=6, p=[2], snr_db=[3.0], realizations=50),
    "roc": dict(),
    "sweep": dict(snr_db=[float(s) for s in range(-20, 1)], detectors=["rlrt", "glrt"], trials=1000),
    "calibrate": dict(),
}

_INT = {"sensors", "samples", "trials", "seed", "realizations"}
_FLOAT = {"signal_variance", "noise_variance", "pfa"}


def load_config_file(path) -> dict:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML/JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    flat = {}
    for key, value in data.items():
        if key in ("scenario", "campaign") and isinstance(value, dict):
            flat.update(value)
        else:
            flat[key] = value
    return flat


def _normalize(key, value):
    if value is None:
        return None
    try:
        if key in _INT:
            if isinstance(value, bool) or int(value) != value:
                raise ValueError
            return int(value)
        if key in _FLOAT:
            return float(value)
        if key == "p":
            return [int(v) for v in (value if isinstance(value, list) else [value])]
        if key == "snr_db":
            return [float(v) for v in (value if isinstance(value, list) else [value])]
        if key == "detectors":
            vals = value if isinstance(value, list) else [value]
            if "all" in vals:
                return [d.value for d in ALL_DETECTORS]
            return [DetectorKind(str(v).lower()).value for v in vals]
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    return value


def resolve(command: str, file_values: Optional[dict] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Defaults, then command defaults, then the config file, then flags."""
    known = {f.name for f in dataclasses.fields(RunConfig)}
    values = dict(COMMAND_DEFAULTS.get(command, {}))
    explicit = set()
    for source, keep_none in ((file_values or {}, True), (overrides or {}, False)):
        for key, value in source.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if value is None and not keep_none:
                continue
            values[key] = value
            if value is not None:
                explicit.add(key)
    values = {k: _normalize(k, v) for k, v in values.items()}
    if values.get("signal_variance") is not None:
        if "snr_db" in explicit:
            raise ConfigError("specify either snr_db or signal_variance, not both")
        values["snr_db"] = None
    elif not values.get("snr_db", True):
        raise ConfigError("need snr_db or signal_variance")
    cfg = RunConfig(**values)
    if cfg.p is None:
        cfg.p = list(range(1, cfg.sensors))
    if cfg.axis not in ("snr", "p"):
        raise ConfigError(f"axis must be 'snr' or 'p', got {cfg.axis!r}")
    if not cfg.p:
        raise ConfigError("empty p list")
    # build every scenario once so validation errors surface before any work
    for p in cfg.p:
        for snr in (cfg.snr_db or [None]):
            cfg.scenario(p, snr)
    return cfg


def parse_list(text: str, kind=float) -> list:
    """Comma-separated values; ``a:b`` or ``a:b:step`` expands to an inclusive range."""
    out = []
    for token in str(text).split(","):
        token = token.strip()
        if not token:
            continue
        try:
            if ":" in token:
                parts = [float(x) for x in token.split(":")]
                if len(parts) not in (2, 3):
                    raise ValueError
                start, stop = parts[0], parts[1]
                step = parts[2] if len(parts) == 3 else 1.0
                if step == 0 or (stop - start) / step < 0:
                    raise ValueError
                n = int(np.floor((stop - start) / step + 1e-9)) + 1
                out.extend(kind(round(start + i * step, 10)) for i in range(n))
            else:
                value = float(token)
                if kind is int and value != int(value):
                    raise ValueError
                out.append(kind(value))
        except ValueError:
            raise ConfigError(f"cannot parse list element {token!r}") from None
    return out
