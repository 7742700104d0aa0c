"""Flat ``key = value`` experiment configuration.

Blank lines and ``#`` comments are allowed.  Unknown keys and malformed
values raise :class:`ConfigError` with the offending line number.  The raw
lines are kept so that serialising reproduces the input text.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError

_PI_RE = re.compile(r"^\s*([0-9.eE+\-/]*)\s*\*?\s*pi\s*$")


def parse_real(text: str) -> float:
    """Decimal, fraction (``5/2``) or multiple of pi (``4pi``, ``2*pi``, ``pi``)."""
    t = text.strip()
    m = _PI_RE.match(t)
    if m:
        coef = m.group(1)
        return (float(Fraction(coef)) if coef else 1.0) * math.pi
    try:
        return float(Fraction(t))
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a real number: {text!r}") from None


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational number: {text!r}") from None


def parse_int(text: str) -> int:
    t = text.strip()
    if not re.fullmatch(r"[+-]?\d+", t):
        raise ValueError(f"not an integer: {text!r}")
    return int(t)


def parse_list(text: str) -> tuple:
    items = [x for x in text.split(",") if x.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(parse_real(x) for x in items)


def _choice(*options):
    def parse(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"{t!r} is not one of {', '.join(options)}")
        return t

    return parse


def _optional(parse):
    def wrapped(text):
        return None if text.strip().lower() in ("", "none") else parse(text)

    return wrapped


# key -> (parser, default)
SCHEMA = {
    "gamma": (parse_rational, Fraction(5, 2)),
    "zero_mode": (parse_real, 0.0),
    "d": (parse_int, 3),
    "n": (parse_int, 32),
    "L": (parse_real, 4 * math.pi),
    "dt": (parse_real, 2e-3),
    "T": (parse_real, 1.0),
    "scheme": (_choice("ip-rk4"), "ip-rk4"),
    "dealias": (parse_real, 0.5),
    "sample_stride": (parse_int, 10),
    "snapshot_every": (parse_int, 0),
    "data.kind": (_choice("corpus", "gaussian", "zero"), "corpus"),
    "data.amplitude": (parse_real, 1.0),
    "data.seed": (parse_int, 0),
    "data.envelope": (parse_real, 2.2),
    "data.kmax": (_optional(parse_real), None),
    "data.width": (parse_real, 1.0),
    "p": (parse_rational, Fraction(11, 5)),
    "N": (_optional(parse_real), None),
    "N_schedule": (parse_list, (2.0, 4.0, 8.0, 16.0)),
    "T_max": (parse_real, 4.0),
}


@dataclass
class ExperimentConfig:
    values: dict = dc_field(default_factory=dict)
    lines: list = dc_field(default_factory=list)
    source: str | None = None

    @classmethod
    def parse(cls, text: str, source=None) -> "ExperimentConfig":
        values, seen = {}, {}
        lines = text.splitlines()
        for lineno, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
            key, val = (x.strip() for x in line.split("=", 1))
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r}", lineno)
            if key in seen:
                raise ConfigError(f"duplicate key {key!r} (first set on line {seen[key]})", lineno)
            try:
                values[key] = SCHEMA[key][0](val)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
            seen[key] = lineno
        return cls(values, lines, source)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        p = Path(path)
        try:
            text = p.read_text()
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {p}") from None
        except OSError as exc:
            raise ConfigError(f"cannot read config file {p}: {exc}") from None
        return cls.parse(text, str(p))

    def serialize(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")

    def __getitem__(self, key):
        if key not in SCHEMA:
            raise KeyError(key)
        return self.values.get(key, SCHEMA[key][1])

    def get(self, key, default=None):
        return self.values.get(key, default)

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        vals = dict(self.values)
        lines = list(self.lines)
        for key, text in kwargs.items():
            key = key.replace("__", ".")
            if key not in SCHEMA:
                raise ConfigError(f"unknown key {key!r}")
            try:
                vals[key] = SCHEMA[key][0](str(text))
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
            new = f"{key} = {text}"
            for i, raw in enumerate(lines):
                body = raw.split("#", 1)[0]
                if "=" in body and body.split("=", 1)[0].strip() == key:
                    lines[i] = new
                    break
            else:
                lines.append(new)
        return ExperimentConfig(vals, lines, self.source)

    def resolved(self) -> dict:
        """Every known key with its effective value, in schema order."""
        return {key: self[key] for key in SCHEMA}

    def canonical(self) -> str:
        out = []
        for key, val in self.resolved().items():
            if isinstance(val, tuple):
                val = ",".join(_fmt(v) for v in val)
            out.append(f"{key} = {_fmt(val)}")
        return "\n".join(out) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)
