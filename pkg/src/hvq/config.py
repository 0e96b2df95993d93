"""Flat ``key = value`` run configuration with per-subcommand schemas.

Files hold one assignment per line; ``#`` starts a comment.  Command-line
``key=value`` pairs override file values.  Angles need an explicit unit
suffix (``22.5deg``, ``0.39rad``).  Unknown or repeated keys and values that
do not parse raise :class:`ConfigError`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

from .errors import ConfigError

SEED_MAX = 2**64 - 1
_ANGLE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(deg|rad)\s*$")


def parse_angle(text: str) -> float:
    """Angle in radians from ``<number>deg`` or ``<number>rad``."""
    m = _ANGLE.match(text)
    if not m:
        raise ConfigError(f"angle {text!r} needs a 'deg' or 'rad' suffix")
    value = float(m.group(1))
    return math.radians(value) if m.group(2) == "deg" else value


def parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= SEED_MAX:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {value}")
    return value


def parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        text = text.strip()
        if text not in options:
            raise ConfigError(f"{text!r} is not one of {', '.join(options)}")
        return text

    parse.__name__ = "choice"
    return parse


def positive(kind: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str):
        value = kind(text)
        if not value > 0:
            raise ConfigError(f"expected a positive value, got {text!r}")
        return value

    parse.__name__ = f"positive_{kind.__name__}"
    return parse


@dataclass(frozen=True)
class Field:
    parse: Callable[[str], Any]
    default: Any
    help: str = ""


Schema = Mapping[str, Field]


def parse_assignments(lines: Iterable[str], origin: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{origin}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{origin}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def read_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_assignments(text.splitlines(), str(path))


def resolve(schema: Schema, *sources: Mapping[str, str]) -> dict[str, Any]:
    """Defaults overridden by each source in turn; every key must be in ``schema``."""
    raw: dict[str, str] = {}
    for src in sources:
        for key, value in src.items():
            if key not in schema:
                known = ", ".join(sorted(schema))
                raise ConfigError(f"unknown key {key!r} (known: {known})")
            raw[key] = value
    resolved = {}
    for key, field in schema.items():
        if key not in raw:
            resolved[key] = field.default
            continue
        try:
            resolved[key] = field.parse(raw[key])
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {raw[key]!r} ({exc})") from exc
    return resolved
