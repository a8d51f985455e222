"""Flat key/value experiment files.

A config file is TOML without tables::

    # five clients, two arms
    M = 5
    K = 2
    T = 10000
    c = 0.9
    runs = 5

Keys are the :class:`~drfed.simulator.ExperimentConfig` fields plus the
harness keys in :data:`HARNESS_KEYS`.  A ``.json`` path is read as a run
manifest instead, which replays that run exactly.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .simulator import ExperimentConfig

SEED_ENV = "DRFED_SEED"
HARNESS_KEYS = {"runs": 50}


def parse_value(text: str) -> Any:
    """Interpret an override value as a TOML scalar, else as a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def parse_override(item: str) -> tuple[str, Any]:
    key, sep, value = item.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"override {item!r} is not KEY=VALUE", key=key or item)
    return key, parse_value(value.strip())


def read_file(path: str | os.PathLike) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {str(p)!r} not found", key="config")
    text = p.read_text()
    if p.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"manifest {str(p)!r} is not valid JSON: {exc}", key="config") from None
        if "config" not in data:
            raise ConfigError(f"manifest {str(p)!r} has no 'config' entry", key="config")
        out = dict(data["config"])
        if "runs" in data:
            out["runs"] = data["runs"]
        return out
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {str(p)!r}: {exc}", key="config") from None
    for k, v in data.items():
        if isinstance(v, dict):
            raise ConfigError(f"tables are not supported ([{k}])", key=k)
    return data


def load(path=None, overrides=(), env=None) -> tuple[ExperimentConfig, dict]:
    """Merge file, ``DRFED_SEED`` and ``KEY=VALUE`` overrides, in that order.

    Returns the validated experiment config and the harness settings.
    """
    env = os.environ if env is None else env
    data = read_file(path) if path is not None else {}
    if env.get(SEED_ENV):
        try:
            data["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}", key="seed") from None
    for item in overrides:
        k, v = parse_override(item) if isinstance(item, str) else item
        data[k] = v
    harness = dict(HARNESS_KEYS)
    for k in list(data):
        if k in HARNESS_KEYS:
            v = data.pop(k)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{k} must be a positive integer", key=k)
            harness[k] = v
    return ExperimentConfig.from_mapping(data), harness
