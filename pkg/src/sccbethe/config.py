"""Flat ``key = value`` experiment configuration.

Files hold one assignment per line; ``#`` starts a comment. Command-line
``--set key=value`` overrides are applied after the file. Numbers accept
plain floats, fractions (``4/3``) and multiples of pi (``2pi``, ``0.5*pi``).
"""
from __future__ import annotations

import math
import os
import re
from fractions import Fraction

from .errors import ConfigError

__all__ = ["DEFAULTS", "parse_number", "parse_config_text", "load_config", "resolve_workers"]

WORKERS_ENV = "SCCBETHE_WORKERS"

_PI = re.compile(r"^\s*([+-]?[0-9.eE+-]*?)\s*\*?\s*pi\s*$")


def parse_number(text: str) -> float:
    text = str(text).strip()
    match = _PI.match(text)
    try:
        if match:
            factor = match.group(1)
            return (float(factor) if factor not in ("", "+", "-") else float(factor + "1")) * math.pi
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a number: {text!r}") from exc


def _int(text):
    value = parse_number(text)
    if value != int(value):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(value)


def _float_list(text):
    items = [s for s in str(text).split(",") if s.strip()]
    if not items:
        raise ConfigError("empty list")
    return [parse_number(s) for s in items]


def _bool(text):
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _choice(*options):
    def parse(text):
        value = str(text).strip()
        if value not in options:
            raise ConfigError(f"expected one of {', '.join(options)}, got {value!r}")
        return value
    return parse


def _text(text):
    return str(text).strip()


# key: (parser, default)
DEFAULTS = {
    "N": (_int, "100"),
    "lam": (parse_number, "1"),
    "q": (parse_number, "4/3"),
    "sequence": (_choice("free", "quasifree"), "free"),
    "t": (parse_number, "0.006"),
    "omega": (parse_number, "1000"),
    "omega0": (parse_number, "0"),
    "q_prime": (parse_number, "1000"),
    "q_list": (_float_list, "4/3,6,60"),
    "t_min": (parse_number, "0"),
    "t_max": (parse_number, "0.1"),
    "t_steps": (_int, "201"),
    "u_min": (parse_number, "0"),
    "u_max": (parse_number, "0.02"),
    "u_steps": (_int, "401"),
    "phi_min": (parse_number, "0"),
    "phi_max": (parse_number, "2pi"),
    "phi_steps": (_int, "629"),
    "delta": (parse_number, "1e-5"),
    "guard": (parse_number, "1e-3"),
    "eta1_t_min": (parse_number, "0.004"),
    "eta1_t_max": (parse_number, "0.029"),
    "eta1_t_steps": (_int, "26"),
    "q_prime_list": (_float_list, "125,250,500,1000"),
    "include_free": (_bool, "true"),
    "calibration_t": (parse_number, "0.006"),
    "rapidity_perturbation": (parse_number, "0"),
    "format": (_choice("csv", "json"), "csv"),
    "output": (_text, "."),
    "workers": (_int, "0"),
}


def parse_config_text(text: str) -> dict:
    """Raw ``key -> string`` assignments from config-file text."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        raw[key] = value
    return raw


def load_config(path: str | None = None, overrides=()) -> dict:
    """Resolved configuration with typed values.

    Raises
    ------
    ConfigError
        Unreadable file, unknown key, or a value that does not parse.
    """
    raw = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        raw[key] = value
    unknown = sorted(set(raw) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    resolved = {}
    for key, (parse, default) in DEFAULTS.items():
        try:
            resolved[key] = parse(raw.get(key, default))
        except ConfigError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    _check(resolved)
    return resolved


def _check(cfg):
    for prefix in ("t", "u", "phi", "eta1_t"):
        lo, hi, steps = cfg[f"{prefix}_min"], cfg[f"{prefix}_max"], cfg[f"{prefix}_steps"]
        if steps < 2:
            raise ConfigError(f"{prefix}_steps must be >= 2")
        if not hi > lo:
            raise ConfigError(f"{prefix}_max must exceed {prefix}_min")
    for key in ("t", "t_min", "u_min", "eta1_t_min", "calibration_t"):
        if cfg[key] < 0:
            raise ConfigError(f"{key} must be nonnegative")
    if cfg["phi_min"] < 0:
        raise ConfigError("phi_min must be nonnegative (dwell times are nonnegative)")
    if not cfg["delta"] > 0 or not cfg["guard"] >= 0:
        raise ConfigError("delta must be positive and guard nonnegative")
    if cfg["q"] == 0 or cfg["q_prime"] == 0 or 0.0 in cfg["q_list"] or 0.0 in cfg["q_prime_list"]:
        raise ConfigError("q values must be nonzero")
    if cfg["workers"] < 0:
        raise ConfigError("workers must be >= 0")


def resolve_workers(cfg: dict) -> int:
    """Worker count: config value if positive, else ``SCCBETHE_WORKERS``, else 1."""
    if cfg.get("workers"):
        return cfg["workers"]
    env = os.environ.get(WORKERS_ENV, "").strip()
    if not env:
        return 1
    try:
        value = int(env)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    if value < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1")
    return value
