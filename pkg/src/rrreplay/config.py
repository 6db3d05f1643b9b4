"""Flat ``key=value`` simulation config files.

Blank lines and ``#`` comments are ignored.  A ``preset=NAME`` line seeds
every field from that preset, wherever it appears; the remaining keys
override it.  Example::

    preset=fig3
    sampler=rrc
    seeds=1000
"""

from __future__ import annotations

import dataclasses

from .sim import ConfigError, SimConfig, preset

_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}
_CASTS = {"int": int, "float": float, "str": str}


def _cast(name: str, raw: str):
    kind = _FIELDS[name].type
    try:
        if kind == "int":
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return _CASTS[kind](raw)
    except ValueError:
        raise ConfigError(f"{name}: expected {kind}, got {raw!r}") from None


def read_pairs(text: str, source: str = "<config>") -> tuple[str | None, dict]:
    """Preset name (if any) and typed field overrides from config text."""
    preset_name = None
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        where = f"{source}:{lineno}"
        if not sep:
            raise ConfigError(f"{where}: expected key=value, got {line!r}")
        if key == "preset":
            preset_name = raw
            continue
        if key not in _FIELDS:
            raise ConfigError(f"{where}: unknown field {key!r}")
        try:
            values[key] = _cast(key, raw)
        except ConfigError as e:
            raise ConfigError(f"{where}: {e}") from None
    return preset_name, values


def resolve(text: str | None = None, preset_name: str | None = None,
            source: str = "<config>", **overrides) -> SimConfig:
    """Preset, then config-file fields, then explicit overrides; validated."""
    file_preset, values = read_pairs(text or "", source)
    name = preset_name or file_preset
    cfg = preset(name) if name else SimConfig()
    cfg = cfg.replace(**values)
    cfg = cfg.replace(**{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


def parse_config(text: str, source: str = "<config>") -> SimConfig:
    return resolve(text, source=source)


def load_config(path) -> SimConfig:
    with open(path) as fh:
        return parse_config(fh.read(), str(path))
