"""Deterministic CSV/JSON emission with '#'-prefixed metadata headers.

Numbers are written with 17 significant digits (round-trip exact for
IEEE-754 doubles); no timestamps are included so that identical
configuration and seed produce byte-identical files.
"""

import json

VERSION = "0.1.0"


def format_value(x):
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return f"{x:.17g}"
    if isinstance(x, complex):
        return f"{x.real:.17g}{x.imag:+.17g}j"
    return str(x)


def meta_lines(meta):
    lines = [f"# gkpsim {VERSION}"]
    for key in meta or {}:
        val = meta[key]
        if isinstance(val, (dict, list)):
            val = json.dumps(val, sort_keys=True)
        lines.append(f"# {key} = {val}")
    return lines


def write_csv(path, columns, rows, meta=None):
    out = meta_lines(meta)
    out.append(",".join(columns))
    for row in rows:
        out.append(",".join(format_value(x) for x in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def write_json(path, record, meta=None):
    doc = {"tool": f"gkpsim {VERSION}"}
    if meta:
        doc["config"] = meta
    doc.update(record)
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
