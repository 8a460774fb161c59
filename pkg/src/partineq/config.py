"""Run configuration read from an INI file.

Every real is written as a decimal or rational string (``0.11``, ``1/3``) so a
file means the same thing on every platform.  Layout::

    [run]
    precision_bits = 256
    memory_budget_bytes = 8589934592
    worker_count = 1
    f_err_max = 1e-4        ; or "none"

    [params]                ; overrides for every d
    epsilon = 0.11
    [params.even]           ; overrides for even d only
    delta = 1/3
    weights = 1/800, 1/800, 1/2, 1/800, 1/800, 1/800, 1/800
    [params.odd]

``weights`` lists K1..K7; K8 is the remainder.  Errors name the line.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError, PartineqError
from .exact import DEFAULT_MEMORY_BUDGET
from .params import (
    DEFAULT_F_ERR_MAX, DEFAULT_PRECISION_BITS, TABLE_DELTA, TABLE_SHARED, TABLE_WEIGHTS,
    BoundParams, parity,
)

RUN_KEYS = {"precision_bits", "memory_budget_bytes", "worker_count", "f_err_max"}
PARAM_KEYS = {"epsilon", "epsilon2", "delta", "xi", "c", "epsilon1", "weights"}
PARAM_SECTIONS = ("params", "params.even", "params.odd")
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(/\d+)?$")


@dataclass(frozen=True)
class Config:
    precision_bits: int = DEFAULT_PRECISION_BITS
    memory_budget_bytes: int = DEFAULT_MEMORY_BUDGET
    worker_count: int = 1
    f_err_max: Fraction | None = DEFAULT_F_ERR_MAX
    overrides: dict = field(default_factory=dict)   # section -> {key: value}

    def params_for(self, d: int) -> BoundParams:
        p = parity(d)
        values = dict(TABLE_SHARED, delta=TABLE_DELTA[p], weights=TABLE_WEIGHTS[p])
        values.update(self.overrides.get("params", {}))
        values.update(self.overrides.get(f"params.{p}", {}))
        return BoundParams.build(f_err_max=self.f_err_max,
                                 precision_bits=self.precision_bits, **values)


def _line_index(text: str) -> dict:
    """(section, key) -> 1-based line number."""
    where = {}
    section = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            where[(section, None)] = no
            continue
        key = re.split(r"[=:]", line, maxsplit=1)[0].strip().lower()
        where.setdefault((section, key), no)
    return where


def _fraction(text: str, line) -> Fraction:
    text = text.strip()
    if not _NUMBER.match(text):
        raise ConfigError(f"expected a decimal or rational number, got {text!r}", line)
    return Fraction(text)


def _int(text: str, line) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigError(f"expected an integer, got {text.strip()!r}", line) from None


def parse_config(text: str) -> Config:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"cannot parse {line.strip()!r}", lineno) from None
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None
    lines = _line_index(text)
    kwargs = {}
    overrides = {}
    for section in cp.sections():
        sec_line = lines.get((section, None))
        if section == "run":
            for key, raw in cp.items(section):
                line = lines.get((section, key))
                if key not in RUN_KEYS:
                    raise ConfigError(f"unknown key {key!r} in [run]", line)
                if key == "f_err_max":
                    kwargs[key] = None if raw.strip().lower() == "none" else _fraction(raw, line)
                else:
                    kwargs[key] = _int(raw, line)
        elif section in PARAM_SECTIONS:
            values = {}
            for key, raw in cp.items(section):
                line = lines.get((section, key))
                if key not in PARAM_KEYS:
                    raise ConfigError(f"unknown key {key!r} in [{section}]", line)
                if key == "weights":
                    parts = [w for w in raw.split(",") if w.strip()]
                    if len(parts) not in (7, 8):
                        raise ConfigError("weights lists K1..K7 (K8 is the remainder)", line)
                    values[key] = tuple(_fraction(w, line) for w in parts[:7])
                else:
                    values[key] = _fraction(raw, line)
            overrides[section] = values
        else:
            raise ConfigError(f"unknown section [{section}]", sec_line)
    if kwargs.get("precision_bits", DEFAULT_PRECISION_BITS) < 16:
        raise ConfigError("precision_bits must be >= 16", lines.get(("run", "precision_bits")))
    if kwargs.get("worker_count", 1) < 1:
        raise ConfigError("worker_count must be >= 1", lines.get(("run", "worker_count")))
    config = Config(overrides=overrides, **kwargs)
    # validate parameters for both parities now so errors surface at load time
    for d, sec in ((4, "params.even"), (5, "params.odd")):
        try:
            config.params_for(d)
        except PartineqError as exc:
            line = lines.get((sec, None)) or lines.get(("params", None))
            raise ConfigError(str(exc), line) from None
    return config


def load_config(path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def default_config_text() -> str:
    """A config file reproducing the built-in defaults."""
    def row(ks):
        return ", ".join(str(k) for k in ks)

    return (
        "[run]\n"
        f"precision_bits = {DEFAULT_PRECISION_BITS}\n"
        f"memory_budget_bytes = {DEFAULT_MEMORY_BUDGET}\n"
        "worker_count = 1\n"
        f"f_err_max = {DEFAULT_F_ERR_MAX}\n\n"
        "[params]\n"
        + "".join(f"{k} = {v}\n" for k, v in TABLE_SHARED.items())
        + "\n[params.even]\n"
        f"delta = {TABLE_DELTA['even']}\n"
        f"weights = {row(TABLE_WEIGHTS['even'])}\n\n"
        "[params.odd]\n"
        f"delta = {TABLE_DELTA['odd']}\n"
        f"weights = {row(TABLE_WEIGHTS['odd'])}\n"
    )
