"""Run configuration: a flat ``key = value`` text format.

Blank lines and ``#`` comments are ignored.  List values are comma
separated.  Every problem in a file is reported at once through
:class:`~jointra.errors.ConfigError`.  Example::

    # three cells, desk-scale defaults
    ttis = 200
    seeds = 10
    users_per_cell = 5
    schedulers = joint, single_cell
    sweep_users = 2, 4, 6, 8, 10
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .linklevel import SystemConfig
from .pairing import CellSizes
from .powerctl import PowerControlParams

SCHEDULERS = ("joint", "single_cell", "round_robin")
PATHLOSS_MODELS = ("case1",)
FADING_MODES = ("subcarrier", "rb")
WEIGHT_RULES = ("diagonal", "full")
REQUIRED = ("ttis", "seeds")


@dataclass(frozen=True)
class RunConfig:
    # scenario
    cells: int = 3
    users_per_cell: tuple[int, ...] = (5,)
    rbs: int = 6
    isd: float = 500.0
    pathloss_model: str = "case1"
    pathloss_intercept: float = 128.1
    pathloss_slope: float = 37.6
    shadowing_std: float = 0.0
    min_distance: float = 35.0
    fading: str = "subcarrier"
    # link
    subcarriers_per_rb: int = 12
    subcarrier_bandwidth: float = 15000.0
    rx_antennas: int = 2
    tx_antennas: int = 1
    noise_psd: float = -174.0
    weight_rule: str = "diagonal"
    # power control
    p_max: float = 24.0
    p0: float = -60.0
    alpha: float = 0.6
    # fairness
    delta: float = 1.0
    beta: float = 0.95
    epsilon_init: float = 1.0
    # simulation
    ttis: int = 200
    seeds: int = 10
    first_seed: int = 0
    tti_duration: float = 0.0005
    schedulers: tuple[str, ...] = ("joint", "single_cell")
    sweep_users: tuple[int, ...] = ()
    sweep_ttis: int = 0
    # solver
    node_limit: int = 200_000
    # execution / output
    workers: int = 1
    output_dir: str = "results"

    @property
    def sizes(self) -> CellSizes:
        k = self.users_per_cell
        return CellSizes(k * self.cells if len(k) == 1 else k)

    @property
    def seed_list(self) -> list[int]:
        return list(range(self.first_seed, self.first_seed + self.seeds))

    @property
    def bandwidth(self) -> float:
        """Occupied bandwidth per cell, Hz."""
        return self.rbs * self.subcarriers_per_rb * self.subcarrier_bandwidth

    def system(self) -> SystemConfig:
        return SystemConfig(self.subcarriers_per_rb, self.subcarrier_bandwidth, self.rx_antennas,
                            self.tx_antennas, self.noise_psd, self.weight_rule == "full")

    def power_control(self) -> PowerControlParams:
        return PowerControlParams(self.p_max, self.p0, self.alpha)

    def with_users(self, k: int) -> "RunConfig":
        return replace(self, users_per_cell=(int(k),))

    def validate(self) -> list[str]:
        errs = []

        def need(ok, key, msg):
            if not ok:
                errs.append(f"{key}: {msg}")

        need(self.cells >= 1, "cells", "must be >= 1")
        need(self.cells <= 7, "cells", "layouts exist for at most 7 cells")
        need(len(self.users_per_cell) in (1, self.cells), "users_per_cell",
             "give one value or one per cell")
        need(all(k >= 1 for k in self.users_per_cell), "users_per_cell", "must be >= 1")
        need(self.rbs >= 1, "rbs", "must be >= 1")
        need(self.isd > 0, "isd", "must be > 0")
        need(self.pathloss_model in PATHLOSS_MODELS, "pathloss_model",
             f"must be one of {', '.join(PATHLOSS_MODELS)}")
        need(self.shadowing_std >= 0, "shadowing_std", "must be >= 0")
        need(0 < self.min_distance < self.isd / 2, "min_distance", "must lie in (0, isd/2)")
        need(self.fading in FADING_MODES, "fading", f"must be one of {', '.join(FADING_MODES)}")
        need(self.subcarriers_per_rb >= 1, "subcarriers_per_rb", "must be >= 1")
        need(self.subcarrier_bandwidth > 0, "subcarrier_bandwidth", "must be > 0")
        need(self.rx_antennas >= 1, "rx_antennas", "must be >= 1")
        need(self.tx_antennas >= 1, "tx_antennas", "must be >= 1")
        need(self.weight_rule in WEIGHT_RULES, "weight_rule",
             f"must be one of {', '.join(WEIGHT_RULES)}")
        need(0.0 <= self.alpha <= 1.0, "alpha", "must lie in [0, 1]")
        need(self.delta >= 0, "delta", "must be >= 0")
        need(0.0 <= self.beta <= 1.0, "beta", "must lie in [0, 1]")
        need(self.epsilon_init > 0, "epsilon_init", "must be > 0")
        need(self.ttis >= 1, "ttis", "must be >= 1")
        need(self.seeds >= 1, "seeds", "must be >= 1")
        need(self.first_seed >= 0, "first_seed", "must be >= 0")
        need(self.tti_duration > 0, "tti_duration", "must be > 0")
        need(len(self.schedulers) >= 1, "schedulers", "at least one scheduler is required")
        for s in self.schedulers:
            need(s in SCHEDULERS, "schedulers", f"unknown scheduler {s!r}")
        need(len(set(self.schedulers)) == len(self.schedulers), "schedulers", "duplicates")
        need(all(k >= 1 for k in self.sweep_users), "sweep_users", "must be >= 1")
        need(self.sweep_ttis >= 0, "sweep_ttis", "must be >= 0")
        need(self.node_limit >= 1, "node_limit", "must be >= 1")
        need(self.workers >= 1, "workers", "must be >= 1")
        return errs


def _convert(key: str, raw: str, kind):
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is str:
        if not raw:
            raise ValueError("empty value")
        return raw
    # tuple fields: int tuples except schedulers
    items = [v.strip() for v in raw.split(",") if v.strip()]
    if key == "schedulers":
        return tuple(items)
    return tuple(int(v) for v in items)


_KINDS = {f.name: (tuple if f.type.startswith("tuple") else
                   {"int": int, "float": float, "str": str}[f.type]) for f in fields(RunConfig)}


def parse_config(text: str) -> RunConfig:
    errs: list[str] = []
    values: dict = {}
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errs.append(f"line {lineno}: syntax error, expected 'key = value'")
            continue
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _KINDS:
            errs.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errs.append(f"line {lineno}: duplicate key {key!r} (first set on line {seen[key]})")
            continue
        seen[key] = lineno
        try:
            values[key] = _convert(key, raw, _KINDS[key])
        except ValueError:
            errs.append(f"line {lineno}: {key}: cannot parse {raw!r}")
    for key in REQUIRED:
        if key not in seen:
            errs.append(f"{key}: missing required key")
    config = RunConfig(**values)
    errs.extend(config.validate())
    if errs:
        raise ConfigError(errs)
    return config


def format_config(config: RunConfig) -> str:
    """Inverse of :func:`parse_config`."""
    lines = []
    for f in fields(config):
        v = getattr(config, f.name)
        if isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
