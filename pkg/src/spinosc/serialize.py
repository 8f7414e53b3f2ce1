"""Deterministic CSV/JSON emission shared by the library and the CLI.

Floats are written with 12 significant digits, '.' decimal separator and
'\\n' line endings, so identical configs produce byte-identical artifacts.
CSV files carry one comment line recording the full config, then a header
row naming the columns.  JSON is pretty-printed with sorted keys.
"""

from __future__ import annotations

import json

import numpy as np


def fmt_float(x) -> str:
    """12-significant-digit, locale-independent float formatting."""
    if isinstance(x, complex) or isinstance(x, np.complexfloating):
        if abs(x.imag) > 0:
            return f"{fmt_float(x.real)}{'+' if x.imag >= 0 else '-'}{fmt_float(abs(x.imag))}j"
        x = x.real
    x = float(x)
    if x != x or x in (float("inf"), float("-inf")):
        return str(x)
    return format(x, ".12g")


def fmt_cell(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return fmt_float(x)


def round_floats(obj, sig: int = 12):
    """Recursively round floats to ``sig`` significant digits for JSON."""
    if isinstance(obj, dict):
        return {k: round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, sig) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if x != x or x in (float("inf"), float("-inf")) or x == 0.0:
            return x
        return float(format(x, f".{sig}g"))
    if isinstance(obj, (complex, np.complexfloating)):
        return [round_floats(obj.real, sig), round_floats(obj.imag, sig)]
    if isinstance(obj, np.ndarray):
        return round_floats(obj.tolist(), sig)
    return obj


def write_csv(path, header, rows, config: dict | None = None):
    """CSV with a '# config: ...' comment line and a named header row."""
    lines = []
    if config is not None:
        lines.append("# config: " + json.dumps(round_floats(config), sort_keys=True))
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(fmt_cell(x) for x in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        return text
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return text


def dump_json(path, payload) -> str:
    text = json.dumps(round_floats(payload), indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text
