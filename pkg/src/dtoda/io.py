"""Deterministic JSON/CSV output and config parsing for the command line."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .grunsky import UnivalentPair
from .series import TruncatedSeries
from .welding import CircleHomeo


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration (exit code 1)."""


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        # strict JSON has no inf/nan; a failed probe reads as null
        return "null"
    if x == 0:
        return "0.0"
    s = format(x, ".17g")
    # keep it a JSON float, not an int
    return s if any(c in s for c in ".e") else s + ".0"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and floats printed to 17 significant digits."""
    return _emit(_plain(obj), indent, 0) + "\n"


def csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text() if path != "-" else sys.stdin.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from e
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {path}: {e.msg} at line {e.lineno} column {e.colno}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"expected a number or [re, im], got {v!r}")


def gamma_from_config(spec: dict) -> CircleHomeo:
    if not isinstance(spec, dict):
        raise ConfigError("'gamma' must be an object")
    kind = spec.get("type")
    try:
        if kind == "identity":
            return CircleHomeo.identity()
        if kind == "mobius":
            return CircleHomeo.mobius(_complex(spec.get("a", 0.0)), float(spec.get("alpha", 0.0)))
        if kind == "perturbed_mobius":
            base = dict(spec.get("base", {"type": "mobius", "a": 0.0, "alpha": 0.0}))
            a = _complex(base.get("a", 0.0))
            base["a"] = [a.real, a.imag]
            return CircleHomeo.from_json({**spec, "base": base})
        return CircleHomeo.from_json(spec)
    except (KeyError, TypeError) as e:
        raise ConfigError(f"incomplete circle map spec: {e}") from e
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from e


def pair_from_config(spec: dict, order: int | None = None) -> UnivalentPair:
    """Pair JSON as written by ``weld``: ``a`` rows ``[k, re, im]`` from k = 1, ``bs`` from k = 0."""
    if not isinstance(spec, dict):
        raise ConfigError("'pair' must be an object")
    if spec.get("type") == "identity":
        return UnivalentPair.identity(order or 64)
    try:
        a_rows = spec["a"]
        bs_rows = spec.get("bs", [[0, 0.0, 0.0]])
        na = max(int(r[0]) for r in a_rows)
        nb = max(int(r[0]) for r in bs_rows)
        a = np.zeros(na, complex)
        bs = np.zeros(nb + 1, complex)
        for k, re, im in a_rows:
            a[int(k) - 1] = complex(re, im)
        for k, re, im in bs_rows:
            bs[int(k)] = complex(re, im)
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise ConfigError(f"malformed pair spec: {e}") from e
    if a[0] == 0:
        raise ConfigError("pair needs a nonzero a_1")
    n = max(order or 0, int(spec.get("order", 0)), na, nb)
    return UnivalentPair.from_coeffs(a, bs, n)


def series_from_config(spec) -> TruncatedSeries:
    """A Laurent series from rows ``[k, re, im]`` or a ``{"k": value}`` map."""
    try:
        if isinstance(spec, dict):
            coeffs = {int(k): _complex(v) for k, v in spec.items()}
        else:
            coeffs = {int(k): complex(re, im) for k, re, im in spec}
    except (TypeError, ValueError) as e:
        raise ConfigError(f"malformed series: {e}") from e
    if not coeffs:
        raise ConfigError("empty series")
    return TruncatedSeries.from_dict(coeffs, max(abs(k) for k in coeffs) + 1)
