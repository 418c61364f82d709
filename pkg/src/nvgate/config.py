"""Flat key-value configuration files.

The calibrated defaults (level energies, dipole parameters, drive parameters)
live in ``data/nv_defaults.cfg`` inside the package. The format is one
``key = value`` pair per line, ``#`` starts a comment, keys are dotted paths
like ``level.e1_ghz``. Values parse as float when possible, otherwise stay
strings.
"""

from __future__ import annotations

import hashlib
from importlib import resources


class ConfigError(Exception):
    """Malformed configuration input."""


def parse_config(text: str) -> dict:
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in cfg:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            cfg[key] = float(value)
        except ValueError:
            cfg[key] = value
    return cfg


def load_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def default_config_text() -> str:
    return resources.files("nvgate.data").joinpath("nv_defaults.cfg").read_text()


def default_config() -> dict:
    return parse_config(default_config_text())


def merge_config(base: dict, overrides: dict) -> dict:
    unknown = set(overrides) - set(base)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = dict(base)
    merged.update(overrides)
    return merged


def config_digest(cfg: dict) -> str:
    """Short stable hash of a configuration, for output provenance headers."""
    blob = "\n".join(f"{k}={cfg[k]!r}" for k in sorted(cfg))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]
