"""Deterministic JSON and CSV output.

Floats are written with 17 significant digits, keys keep insertion order and
non-finite numbers become ``null``, so equal inputs give byte-identical text.
"""

import enum
import math

import numpy as np


def _scalar(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        text = "%.17g" % x
        if all(c not in text for c in ".en"):
            text += ".0"
        return text
    return None


def _string(s):
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def dumps(obj, indent=2, _level=0):
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, enum.Enum):
        obj = obj.value
    if isinstance(obj, str):
        return _string(obj)
    sc = _scalar(obj)
    if sc is not None:
        return sc
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_string(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(_scalar(v) is not None or v is None for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def fmt(x):
    """CSV cell for a float: shortest round-trip representation."""
    x = float(x)
    return repr(x) if math.isfinite(x) else "nan"
