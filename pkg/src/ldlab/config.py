"""Configuration schema and INI loader for the command line.

Flat sections [kernel], [grid], [anneal], [sweep]. Every key has a type,
default, unit, and help line; unknown or duplicate keys and bad values
are rejected with the offending key named. Resolution order is
defaults <- config file <- command-line flags.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class Key:
    typ: type
    default: object
    unit: str
    help: str


# Sentinel defaults 0 / "" mean "derive at run time"; the help text says
# how. Units are "-" for dimensionless quantities.
SCHEMA = {
    "kernel": {
        "n": Key(int, 3, "-", "space dimension, 2 or 3"),
        "alpha": Key(float, 1.0, "-", "kernel exponent, must lie in (0, n)"),
    },
    "grid": {
        "h": Key(float, 1.0 / 16, "length", "cell edge length"),
        "box": Key(str, "auto", "cells",
                   "comma-separated cell counts per axis, or auto"),
    },
    "anneal": {
        "budget": Key(int, 200_000, "proposals", "total proposed moves"),
        "t0": Key(float, 0.0, "energy",
                  "initial temperature; 0 selects 0.5*h^(n-1)"),
        "decay": Key(float, 0.999, "-",
                     "temperature decay factor applied once per sweep"),
        "w_boundary": Key(float, 0.95, "-",
                          "relative weight of boundary swap moves"),
        "w_far": Key(float, 0.05, "-",
                     "relative weight of far relocation moves"),
        "seed": Key(int, 0, "-", "RNG seed"),
        "snapshot_every": Key(int, 0, "proposals",
                              "trace interval; 0 selects one sweep"),
    },
    "sweep": {
        "masses": Key(str, "0.5,1,2,4,8", "mass",
                      "comma-separated mass list"),
        "samples": Key(int, 100, "-",
                       "sample count for randomized checks"),
        "m": Key(float, 1.0, "mass", "target mass for single-set verbs"),
    },
}


def defaults() -> dict:
    return {sec: {k: spec.default for k, spec in keys.items()}
            for sec, keys in SCHEMA.items()}


def _convert(section: str, key: str, raw: str):
    spec = SCHEMA[section][key]
    if spec.typ is str:
        return raw
    try:
        if spec.typ is int:
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"{section}.{key}: expected {spec.typ.__name__}, got {raw!r}")


def validate(cfg: dict) -> dict:
    n = cfg["kernel"]["n"]
    alpha = cfg["kernel"]["alpha"]
    if n not in (2, 3):
        raise ConfigError(f"kernel.n: must be 2 or 3, got {n}")
    if not 0.0 < alpha < n:
        raise ConfigError(f"kernel.alpha: alpha must lie in (0, n), "
                          f"got {alpha} with n = {n}")
    if cfg["grid"]["h"] <= 0:
        raise ConfigError(f"grid.h: must be positive, got {cfg['grid']['h']}")
    if not 0.0 < cfg["anneal"]["decay"] <= 1.0:
        raise ConfigError("anneal.decay: must lie in (0, 1]")
    for k in ("w_boundary", "w_far"):
        if cfg["anneal"][k] < 0:
            raise ConfigError(f"anneal.{k}: must be nonnegative")
    if cfg["anneal"]["w_boundary"] + cfg["anneal"]["w_far"] <= 0:
        raise ConfigError("anneal.w_boundary: move weights sum to zero")
    if cfg["anneal"]["budget"] < 0:
        raise ConfigError("anneal.budget: must be nonnegative")
    if cfg["anneal"]["t0"] < 0:
        raise ConfigError("anneal.t0: must be nonnegative")
    if cfg["sweep"]["samples"] < 1:
        raise ConfigError("sweep.samples: must be at least 1")
    return cfg


def load_config(path) -> dict:
    """Parse an INI file into a fully resolved config dict.

    Missing file, unknown section or key, duplicate key, or a value of
    the wrong type all raise ConfigError naming the offender. An empty
    file yields the documented defaults.
    """
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    parser = configparser.ConfigParser(strict=True, interpolation=None)
    try:
        parser.read_string(p.read_text(encoding="utf-8"), source=str(p))
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"{e.section}.{e.option}: duplicate key")
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"[{e.section}]: duplicate section")
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}")
    cfg = defaults()
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"[{section}]: unknown section")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"{section}.{key}: unknown key")
            cfg[section][key] = _convert(section, key, raw)
    return validate(cfg)


def parse_masses(raw: str) -> list:
    try:
        out = [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"sweep.masses: not a comma-separated float list: "
                          f"{raw!r}")
    if not out:
        raise ConfigError("sweep.masses: empty list")
    if any(m <= 0 for m in out):
        raise ConfigError("sweep.masses: masses must be positive")
    return out


def parse_box(raw: str, n: int):
    """'auto' -> None, else tuple of n positive cell counts."""
    if raw.strip() == "auto":
        return None
    try:
        dims = tuple(int(tok) for tok in raw.split(","))
    except ValueError:
        raise ConfigError(f"grid.box: not a comma-separated int list: {raw!r}")
    if len(dims) != n or any(d < 1 for d in dims):
        raise ConfigError(f"grid.box: need {n} positive cell counts")
    return dims


def help_lines() -> list:
    """One formatted line per config key: name, default, unit, help."""
    out = []
    for sec, keys in SCHEMA.items():
        for k, spec in keys.items():
            out.append(f"  {sec}.{k:<15} default={spec.default!r:<12} "
                       f"unit={spec.unit:<9} {spec.help}")
    return out
