"""Deterministic text output: JSON with 17-significant-digit floats, CSV."""

from __future__ import annotations

import numpy as np

__all__ = ["format_float", "dumps_json", "write_csv"]


def format_float(x: float) -> str:
    if np.isnan(x):
        return "NaN"
    if np.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def dumps_json(obj, indent: int = 2) -> str:
    """JSON text with stable key order and reproducible float formatting."""
    return "".join(_emit(obj, indent, 0)) + "\n"


def _emit(obj, indent, level):
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            yield "{}"
            return
        yield "{\n"
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            yield f'{pad_in}"{k}": '
            yield from _emit(v, indent, level + 1)
            yield ",\n" if i + 1 < len(items) else "\n"
        yield pad + "}"
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(np.asarray(obj).tolist()) if isinstance(obj, np.ndarray) else list(obj)
        if not seq:
            yield "[]"
            return
        simple = all(isinstance(x, (int, float, bool)) or x is None for x in seq)
        if simple:
            yield "[" + ", ".join("".join(_emit(x, indent, 0)) for x in seq) + "]"
            return
        yield "[\n"
        for i, x in enumerate(seq):
            yield pad_in
            yield from _emit(x, indent, level + 1)
            yield ",\n" if i + 1 < len(seq) else "\n"
        yield pad + "]"
    elif isinstance(obj, bool) or obj is None:
        yield {True: "true", False: "false", None: "null"}[obj]
    elif isinstance(obj, (int, np.integer)):
        yield str(int(obj))
    elif isinstance(obj, (float, np.floating)):
        yield format_float(float(obj))
    elif isinstance(obj, str):
        yield '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    else:
        raise TypeError(f"cannot serialize {type(obj)!r}")


def write_csv(path_or_file, columns: dict):
    """Write named columns (equal-length arrays) as CSV with 17-digit floats."""
    names = list(columns)
    rows = len(next(iter(columns.values()))) if columns else 0
    lines = [",".join(names)]
    for r in range(rows):
        lines.append(",".join(format_float(float(columns[n][r])) for n in names))
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)
    return text
