"""INI-style run configuration: ``[rates]``, ``[costs]`` and ``[options]``.

A rate is written either directly in 1/s (``tau_L = 0.2``) or as a mean
inter-event time with a unit suffix (``tau_L_mean_s = 5``,
``tau_P_mean_min = 5``); exactly one form per parameter.  Unknown sections
or keys are errors.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from sigstorm.model import COST_KEYS, RATE_KEYS, UMTS_COSTS, ModelParams, SignallingCosts

REQUIRED_RATES = ("lambda_L", "lambda_H", "mu_L", "mu_H")
_UNIT_SUFFIXES = {"": None, "_mean_s": 1.0, "_mean_min": 60.0}
OPTION_KEYS = ("pch_enabled", "seed", "replications", "horizon", "sweep", "metric",
               "n_users", "samples")


class ConfigError(ValueError):
    """Invalid configuration; ``problems`` holds one line per violation."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class SweepAxis:
    param: str
    lo: float
    hi: float
    points: int
    scale: str = "linear"

    @classmethod
    def parse(cls, text: str) -> "SweepAxis":
        """Parse ``PARAM=lo:hi:points[:log]``."""
        try:
            param, rng = text.split("=", 1)
            parts = rng.split(":")
            if len(parts) not in (3, 4):
                raise ValueError
            scale = "linear"
            if len(parts) == 4:
                if parts[3] not in ("log", "linear"):
                    raise ValueError
                scale = parts[3]
            axis = cls(param.strip(), float(parts[0]), float(parts[1]), int(parts[2]), scale)
        except ValueError:
            raise ConfigError([f"bad sweep {text!r}; expected PARAM=lo:hi:points[:log]"]) from None
        problems = axis.problems()
        if problems:
            raise ConfigError(problems)
        return axis

    def problems(self) -> list[str]:
        out = []
        if self.param not in RATE_KEYS + COST_KEYS + ("fraction",):
            out.append(f"unknown sweep parameter {self.param!r}")
        if self.points < 2:
            out.append("sweep needs at least 2 points")
        if self.scale == "log" and not (self.lo > 0 and self.hi > 0):
            out.append("log sweep needs positive bounds")
        return out

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)

    def __str__(self) -> str:
        tail = ":log" if self.scale == "log" else ""
        return f"{self.param}={self.lo!r}:{self.hi!r}:{self.points}{tail}"


@dataclass(frozen=True)
class RunSpec:
    command: str
    params: ModelParams
    costs: SignallingCosts = UMTS_COSTS
    seed: int = 1
    replications: int = 10
    horizon: float = 1e6
    sweep: SweepAxis | None = None
    metric: str | None = None
    n_users: int = 10_000
    samples: int = 100
    out: str | None = None


def _parse_float(raw: str, key: str, problems: list[str]) -> float | None:
    try:
        return float(raw)
    except ValueError:
        problems.append(f"{key}: not a number: {raw!r}")
        return None


def _parse_bool(raw: str, key: str, problems: list[str]) -> bool | None:
    low = raw.strip().lower()
    if low in ("true", "on", "yes", "1"):
        return True
    if low in ("false", "off", "no", "0"):
        return False
    problems.append(f"{key}: not a boolean: {raw!r}")
    return None


def _rates(section, problems: list[str]) -> dict[str, float]:
    found: dict[str, tuple[str, float]] = {}
    for key, raw in section.items():
        for suffix, unit in _UNIT_SUFFIXES.items():
            name = key[: len(key) - len(suffix)] if suffix else key
            if suffix and not key.endswith(suffix):
                continue
            if name in RATE_KEYS:
                break
        else:
            problems.append(f"[rates] unknown key {key!r}")
            continue
        value = _parse_float(raw, key, problems)
        if value is None:
            continue
        if unit is not None:
            if value < 0:
                problems.append(f"{key}: mean time must be >= 0")
                continue
            value = math.inf if value == 0 else 1.0 / (value * unit)
        if name in found:
            problems.append(f"{name} given more than once ({found[name][0]}, {key})")
            continue
        found[name] = (key, value)
    for name in REQUIRED_RATES:
        if name not in found:
            problems.append(f"[rates] missing {name}")
    return {name: v for name, (_, v) in found.items()}


def parse_config(text: str, command: str = "loads", out: str | None = None) -> RunSpec:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    problems: list[str] = []
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"unreadable config: {exc}".splitlines()[0]]) from None

    for name in parser.sections():
        if name not in ("rates", "costs", "options"):
            problems.append(f"unknown section [{name}]")
    rates = _rates(parser["rates"], problems) if parser.has_section("rates") else {}
    if not parser.has_section("rates"):
        problems.append("missing section [rates]")

    cost_upd: dict[str, float | bool] = {}
    if parser.has_section("costs"):
        for key, raw in parser["costs"].items():
            if key not in COST_KEYS:
                problems.append(f"[costs] unknown key {key!r}")
                continue
            v = _parse_float(raw, key, problems)
            if v is not None:
                cost_upd[key] = v

    opts: dict = {}
    if parser.has_section("options"):
        for key, raw in parser["options"].items():
            if key not in OPTION_KEYS:
                problems.append(f"[options] unknown key {key!r}")
            elif key == "pch_enabled":
                b = _parse_bool(raw, key, problems)
                if b is not None:
                    cost_upd["pch_enabled"] = b
            elif key in ("seed", "replications", "n_users", "samples"):
                try:
                    opts[key] = int(raw)
                except ValueError:
                    problems.append(f"{key}: not an integer: {raw!r}")
            elif key == "horizon":
                v = _parse_float(raw, key, problems)
                if v is not None:
                    opts[key] = v
            elif key == "sweep":
                try:
                    opts[key] = SweepAxis.parse(raw)
                except ConfigError as exc:
                    problems.extend(exc.problems)
            else:
                opts[key] = raw.strip()

    if problems:
        raise ConfigError(problems)
    params = ModelParams(**rates)
    costs = replace(UMTS_COSTS, **cost_upd)
    spec = RunSpec(command=command, params=params, costs=costs, out=out, **opts)
    problems = spec_problems(spec)
    if problems:
        raise ConfigError(problems)
    return spec


def spec_problems(spec: RunSpec) -> list[str]:
    from sigstorm.model import validate_params

    out = validate_params(spec.params, spec.costs)
    if spec.replications < 1:
        out.append("replications must be >= 1")
    if spec.n_users < 0:
        out.append("n_users must be >= 0")
    if spec.samples < 1:
        out.append("samples must be >= 1")
    if not spec.horizon > 0:
        out.append("horizon must be > 0")
    if spec.sweep is not None:
        out.extend(spec.sweep.problems())
    return out


def load_config(path: str | Path, command: str = "loads", out: str | None = None) -> RunSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc.strerror}"]) from None
    return parse_config(text, command=command, out=out)


def dump_config(spec: RunSpec) -> str:
    """Config text that :func:`parse_config` maps back to ``spec``."""
    lines = ["[rates]"]
    lines += [f"{k} = {getattr(spec.params, k)!r}" for k in RATE_KEYS]
    lines += ["", "[costs]"]
    lines += [f"{f.name} = {getattr(spec.costs, f.name)!r}" for f in fields(spec.costs)
              if f.name != "pch_enabled"]
    lines += ["", "[options]",
              f"pch_enabled = {'true' if spec.costs.pch_enabled else 'false'}",
              f"seed = {spec.seed}",
              f"replications = {spec.replications}",
              f"horizon = {spec.horizon!r}",
              f"n_users = {spec.n_users}",
              f"samples = {spec.samples}"]
    if spec.sweep is not None:
        lines.append(f"sweep = {spec.sweep}")
    if spec.metric is not None:
        lines.append(f"metric = {spec.metric}")
    return "\n".join(lines) + "\n"
