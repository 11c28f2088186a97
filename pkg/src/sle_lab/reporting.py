"""Deterministic JSON and CSV output with 17-significant-digit floats."""

import json
import math

import numpy as np

__all__ = ["to_json", "write_text", "write_columns"]


def _scalar(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return "null"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return json.dumps(str(x))
        return format(x + 0.0, ".17g")  # + 0.0 turns -0.0 into 0
    if isinstance(x, complex):
        return _encode([x.real, x.imag], 0)
    return json.dumps(str(x), ensure_ascii=False)


def _encode(obj, level):
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, level + 1)}" for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, level + 1) for v in obj) + "\n" + end + "]"
    return _scalar(obj)


def to_json(obj):
    """Sorted-key JSON; non-finite floats become strings so the output stays valid JSON."""
    return _encode(obj, 0) + "\n"


def write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_columns(path, header, columns):
    """CSV of equal-length columns, floats with 17 significant digits."""
    rows = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, rows, delimiter=",", header=",".join(header), comments="", fmt="%.17g", encoding="utf-8")
