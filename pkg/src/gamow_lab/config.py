"""Flat key = value scenario files with dotted section keys.

    # comment
    line.preset = "sodium-3p"
    support = "half"
    time.max = 500
    time.spacing = "log"

Values are Python literals (numbers, strings, lists, dicts, complex); a bare
word that is not a literal is kept as a string.
"""
from __future__ import annotations

import ast
from pathlib import Path


class ConfigError(ValueError):
    pass


def parse_value(text: str):
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_assignment(line: str) -> tuple[str, object]:
    if "=" not in line:
        raise ConfigError(f"expected key = value, got {line!r}")
    key, value = line.split("=", 1)
    key = key.strip()
    if not key or any(c.isspace() for c in key):
        raise ConfigError(f"bad key {key!r}")
    return key, parse_value(value)


def parse_config(text: str) -> dict:
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            key, value = parse_assignment(line)
        except ConfigError as exc:
            raise ConfigError(f"line {n}: {exc}") from None
        out[key] = value
    return out


def load_config(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
