"""Unit parsing and formatting.

All internal frequencies are angular (rad/s) and all times are seconds.
A frequency given with an ordinary-frequency suffix (Hz, GHz, ...) is
converted to angular frequency by multiplying with 2*pi; this is the single
most likely user error, so it is stated here and in the CLI help.

In normalized mode quantities are dimensionless (times in units of tau_a,
bandwidths in 1/tau_a) and bare numbers are expected; unit suffixes are then
rejected.
"""

from __future__ import annotations

import math
import re

from .errors import ConfigError

TWO_PI = 2.0 * math.pi

# ordinary-frequency suffixes, converted to rad/s with a factor 2*pi
_FREQUENCY_SUFFIXES = {
    "thz": TWO_PI * 1e12,
    "ghz": TWO_PI * 1e9,
    "mhz": TWO_PI * 1e6,
    "khz": TWO_PI * 1e3,
    "hz": TWO_PI,
}

_TIME_SUFFIXES = {
    "fs": 1e-15,
    "ps": 1e-12,
    "ns": 1e-9,
    "us": 1e-6,
    "ms": 1e-3,
    "s": 1.0,
}

_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


def _split_number(text: str) -> tuple[float, str]:
    m = _NUMBER_RE.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse numeric value from {text!r}")
    return float(m.group(0)), text.strip()[m.end():].strip()


def parse_frequency(text: str, normalized: bool = False) -> float:
    """Parse a bandwidth/frequency string into rad/s.

    Accepted suffixes: Hz/kHz/MHz/GHz/THz (ordinary frequency, multiplied by
    2*pi) and 'rad/s' (taken verbatim). In normalized mode the value must be
    a bare number.
    """
    value, suffix = _split_number(text)
    suffix_lc = suffix.lower()
    if normalized:
        if suffix:
            raise ConfigError(
                f"unit suffix {suffix!r} not allowed in normalized mode: {text!r}"
            )
        return value
    if suffix_lc in ("rad/s", "rads"):
        return value
    if suffix_lc in _FREQUENCY_SUFFIXES:
        return value * _FREQUENCY_SUFFIXES[suffix_lc]
    if not suffix:
        if value == 0.0:
            return 0.0
        raise ConfigError(
            f"frequency {text!r} needs a unit suffix (e.g. 100GHz or 6.28e11rad/s); "
            "use --normalized for dimensionless input"
        )
    raise ConfigError(f"unknown frequency unit {suffix!r} in {text!r}")


def parse_time(text: str, normalized: bool = False) -> float:
    """Parse a delay string into seconds (suffixes fs/ps/ns/us/ms/s)."""
    value, suffix = _split_number(text)
    suffix_lc = suffix.lower()
    if normalized:
        if suffix:
            raise ConfigError(
                f"unit suffix {suffix!r} not allowed in normalized mode: {text!r}"
            )
        return value
    if suffix_lc in _TIME_SUFFIXES:
        return value * _TIME_SUFFIXES[suffix_lc]
    if not suffix:
        if value == 0.0:
            return 0.0
        raise ConfigError(
            f"time {text!r} needs a unit suffix (e.g. 1ps); "
            "use --normalized for dimensionless input"
        )
    raise ConfigError(f"unknown time unit {suffix!r} in {text!r}")


def format_float(x: float) -> str:
    """17-significant-digit decimal representation (round-trips exactly)."""
    return format(float(x), ".17g")
