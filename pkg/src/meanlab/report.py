"""Run configuration and bit-stable report serialisation (JSON and CSV).

Doubles are written with 17 significant digits, which round-trips every
IEEE double; mpmath numbers are written with all of their requested digits.
Object keys are sorted and nothing time- or locale-dependent is emitted, so
identical configurations produce byte-identical reports.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import DomainError

CSV_HEADER = ("id", "a", "b", "v", "r", "p", "dim", "pair", "gap", "relative_gap", "precision", "verdict")
GUARD_DIGITS = 10


def format_number(x) -> str:
    """Locale-independent decimal text of a number."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if hasattr(x, "_mpf_"):
        digits = max(1, x.context.dps - GUARD_DIGITS)
        return x.context.nstr(x, digits, min_fixed=-4, max_fixed=digits)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _encode(obj, indent, level, out):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, (int, np.integer)) or hasattr(obj, "_mpf_"):
        out.append(format_number(obj))
    elif isinstance(obj, (float, np.floating)):
        text = format_number(obj)
        out.append(text if math.isfinite(obj) else json.dumps(text))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(sep)
            out.append(pad + json.dumps(str(key), ensure_ascii=True) + ": ")
            _encode(obj[key], indent, level + 1, out)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(sep)
            out.append(pad)
            _encode(item, indent, level + 1, out)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def encode_json(obj, indent: int | None = 2) -> str:
    """Key-sorted JSON with 17-significant-digit doubles; non-finite values become strings."""
    out = []
    _encode(obj, indent, 0, out)
    return "".join(out)


# -- configuration ----------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Settings shared by every command; echoed into each report."""

    seed: int = 0
    samples: int = 100_000
    tol: float = 1e-12
    loewner_tol: float = 1e-8
    nodes: int = 32
    digits: int = 50
    precision: str = "escalate"
    format: str = "json"
    output: str | None = None
    threads: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.format not in ("json", "csv"):
            raise DomainError(f"unknown output format {self.format!r}")
        if self.precision not in ("double", "escalate"):
            raise DomainError(f"unknown precision policy {self.precision!r}")
        if self.digits < 30:
            raise DomainError("digits must be at least 30")
        if self.nodes < 2:
            raise DomainError("quadrature needs at least 2 nodes")
        if self.samples < 1:
            raise DomainError("samples must be positive")
        if self.threads is not None and self.threads < 1:
            raise DomainError("threads must be positive")

    def echo(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name not in ("extra", "output", "threads")}
        out.update(self.extra)
        return out

    @property
    def escalation_digits(self) -> int | None:
        return self.digits if self.precision == "escalate" else None


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig) if f.name != "extra"}


def _coerce(key, text):
    kind = _FIELD_TYPES[key]
    if text.lower() in ("", "none", "null") and "None" in kind:
        return None
    try:
        if kind.startswith("int"):
            return int(float(text)) if "e" in text.lower() else int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise DomainError(f"config key {key!r}: cannot parse {text!r}") from None
    return text


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {n}: expected key=value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise DomainError(f"config line {n}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path=None, overrides: dict | None = None, extra: dict | None = None) -> RunConfig:
    """File values first, then non-None ``overrides`` (flags win)."""
    values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise DomainError(f"cannot read config file: {exc}") from None
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    return RunConfig(**values, extra=dict(extra or {}))


# -- envelope -------------------------------------------------------------------------------------

_HELD = ("holds", "no-violation-found")


def summarize(records, skipped: int = 0) -> dict:
    verdicts = [r["verdict"] for r in records]
    return {
        "checked": len(verdicts),
        "held": sum(v in _HELD for v in verdicts),
        "violated": verdicts.count("violated"),
        "indeterminate": verdicts.count("indeterminate"),
        "skipped": int(skipped),
    }


@dataclass
class ReportEnvelope:
    config: dict
    cases: list
    skipped: int = 0
    exit: int = 0
    findings: dict | None = None
    version: str = __version__

    @property
    def summary(self) -> dict:
        return summarize(self.cases, self.skipped)

    def to_dict(self) -> dict:
        out = {"version": self.version, "config": self.config, "cases": self.cases,
               "summary": self.summary, "exit": self.exit}
        if self.findings is not None:
            out["findings"] = self.findings
        return out

    def to_json(self) -> str:
        return encode_json(self.to_dict()) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rec in self.cases:
            pt = rec.get("point", {})
            row = [rec["id"]]
            for key in CSV_HEADER[1:8]:
                val = pt.get(key)
                row.append("" if val is None else (val if isinstance(val, str) else format_number(val)))
            row += [format_number(rec["gap"]), format_number(rec["relative_gap"]), rec["precision"], rec["verdict"]]
            writer.writerow(row)
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()
