"""Run configuration: dotted-key text files, figure presets and ``--set`` overrides.

A config file is flat TOML with dotted keys::

    params.epsilon = 2.0
    params.g = 2.0
    sweep.axis = "Delta"
    sweep.n_points = 401

Resolution order is defaults, then preset, then file, then overrides. Unknown
keys and ill-typed values raise :class:`ConfigError`.
"""
from __future__ import annotations

import copy
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import InvalidParams, QuadromechError
from .model import PARAM_NAMES, SystemParams
from .transmission import SweepAxis


class ConfigError(QuadromechError, ValueError):
    """Invalid, unknown or ill-typed configuration entry."""


DEFAULTS: dict[str, dict[str, Any]] = {
    "params": {
        "omega_a": 0.0,
        "omega_m": 1.0,
        "omega_e": 0.0,
        "omega_D": 0.0,
        "g": 0.0,
        "g_op": 0.0,
        "eta": 1.0,
        "epsilon": 2.0,
        "Gamma": 0.2,
        "gamma": 0.0,
    },
    "steady": {"mode": "self_consistent", "Q_s": 0.0, "initial_Q": 0.0, "tol": 1e-12, "max_iter": 10_000},
    "sweep": {"axis": "Delta", "start": -10.0, "stop": 10.0, "n_points": 2001, "Q_s_squared": 0.0},
    "map": {
        "x_axis": "omega_a",
        "x_start": -3.0,
        "x_stop": 3.0,
        "x_n": 21,
        "y_axis": "g_op",
        "y_start": -0.5,
        "y_stop": 0.5,
        "y_n": 21,
    },
    "evolve": {"model": "adiabatic", "t_end": 20.0, "dt_max": 0.05, "tol": 1e-10, "fixed_dt": 0.0},
    "initial": {
        "a_re": 0.0,
        "a_im": 0.0,
        "b_re": 0.0,
        "b_im": 0.0,
        "e_re": 0.0,
        "e_im": 0.0,
        "Q": 0.0,
        "P": 0.0,
        "dXa": 0.0,
        "dPa": 0.0,
        "dQ": 0.0,
        "dP": 0.0,
    },
    "noise": {"in_Xa": 0.0, "in_Pa": 0.0, "in_Q": 0.0, "in_P": 0.0},
    "output": {"path": "", "format": "csv"},
}

_INT_KEYS = {("steady", "max_iter"), ("sweep", "n_points"), ("map", "x_n"), ("map", "y_n")}
_CHOICES = {
    ("steady", "mode"): ("self_consistent", "prescribed"),
    ("sweep", "axis"): tuple(a.value for a in SweepAxis),
    ("map", "x_axis"): PARAM_NAMES,
    ("map", "y_axis"): PARAM_NAMES,
    ("evolve", "model"): ("full", "adiabatic", "fluctuation"),
    ("output", "format"): ("csv", "json"),
}

# Figure presets. The first figure does not state g; g = epsilon is the only value that
# reproduces the quoted peak T = 0.04 at Delta = Delta_e = 0.
_FIG_BASE = {"epsilon": 2.0, "gamma": 2.0, "eta": 1.0, "g": 2.0, "omega_a": 0.0, "omega_D": 0.0, "g_op": 0.0}

PRESETS: dict[str, list[dict[str, dict[str, Any]]]] = {
    "fig1": [
        {"params": {**_FIG_BASE, "omega_e": de}, "sweep": {"axis": "Delta", "start": -10.0, "stop": 10.0, "n_points": 2001}}
        for de in (0.0, 1.0, 5.0, 10.0, 100.0)
    ],
    "fig2": [
        {
            "params": {**_FIG_BASE, "omega_e": 0.0, "omega_a": d},
            "sweep": {"axis": "g", "start": 0.0, "stop": 3.0, "n_points": 301, "Q_s_squared": 0.0},
        }
        for d in (0.0, 0.5, 1.0, 2.0)
    ],
    "fig3": [
        {
            "params": {**_FIG_BASE, "omega_e": 0.0, "omega_m": wm},
            "sweep": {"axis": "omega_D_upper_sideband", "start": -10.0, "stop": 10.0, "n_points": 2001},
        }
        for wm in (0.2, 0.4, 0.6, 1.0)
    ],
}


def _merge(dst: dict, src: Mapping, origin: str) -> None:
    for section, block in src.items():
        if section not in DEFAULTS:
            raise ConfigError(f"{origin}: unknown section {section!r}")
        if not isinstance(block, Mapping):
            raise ConfigError(f"{origin}: section {section!r} must be a table")
        for key, value in block.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"{origin}: unknown key {section}.{key}")
            dst[section][key] = _coerce(section, key, value)


def _coerce(section: str, key: str, value: Any) -> Any:
    default = DEFAULTS[section][key]
    name = f"{section}.{key}"
    if (section, key) in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{name} must be a string, got {value!r}")
    choices = _CHOICES.get((section, key))
    if choices is not None and value not in choices:
        raise ConfigError(f"{name} must be one of {list(choices)}, got {value!r}")
    return value


def parse_override(text: str) -> dict:
    """Turn ``section.key=value`` into a nested dict; the value is read as TOML, falling back to a bare string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = (s.strip() for s in text.split("=", 1))
    if key.count(".") != 1:
        raise ConfigError(f"override key {key!r} must be section.key")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    section, name = key.split(".")
    return {section: {name: value}}


def load_file(path: str | Path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def resolve(
    file_data: Optional[Mapping] = None,
    overrides: tuple[str, ...] | list[str] = (),
    preset: Optional[str] = None,
    curve: int = 1,
) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        curves = PRESETS[preset]
        if not 1 <= curve <= len(curves):
            raise ConfigError(f"preset {preset} has curves 1..{len(curves)}, got {curve}")
        _merge(cfg, curves[curve - 1], f"preset {preset}")
    if file_data:
        _merge(cfg, file_data, "config file")
    for text in overrides:
        _merge(cfg, parse_override(text), f"--set {text}")
    params_from_config(cfg)
    return cfg


def params_from_config(cfg: Mapping) -> SystemParams:
    try:
        return SystemParams(**cfg["params"])
    except InvalidParams as exc:
        raise ConfigError(str(exc)) from None


def dump(cfg: Mapping) -> str:
    """Render a resolved config back to the dotted-key file format."""
    lines = []
    for section, block in cfg.items():
        for key, value in block.items():
            if isinstance(value, str):
                lines.append(f"{section}.{key} = {json.dumps(value)}")
            else:
                lines.append(f"{section}.{key} = {value!r}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunConfig:
    """A resolved configuration together with the physical parameters it implies."""

    data: dict

    @property
    def params(self) -> SystemParams:
        return params_from_config(self.data)

    def __getitem__(self, section: str) -> dict:
        return self.data[section]
