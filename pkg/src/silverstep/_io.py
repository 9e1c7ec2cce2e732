"""Deterministic file output: 17-significant-digit floats, atomic writes.

Every float that reaches a file goes through fmt17 so outputs are
byte-identical across runs and round-trip exactly. Files are written
to a sibling temp path and moved into place with os.replace.
"""

import json
import math
import os
import tempfile

__all__ = [
    "fmt17",
    "json_text",
    "json_line",
    "write_text_atomic",
    "write_csv_atomic",
    "read_json",
]


def fmt17(x):
    """Shortest 17-significant-digit decimal form of a float."""
    x = float(x)
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _emit(obj, indent, out, pretty=True):
    pad = " " * indent
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt17(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        if not pretty:
            out.append("{")
            for i, (k, v) in enumerate(obj.items()):
                out.append(json.dumps(str(k)) + ": ")
                _emit(v, 0, out, pretty=False)
                if i < len(obj) - 1:
                    out.append(", ")
            out.append("}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(pad + "  " + json.dumps(str(k)) + ": ")
            _emit(v, indent + 2, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        seq = list(obj)
        if not seq:
            out.append("[]")
            return
        nested = pretty and any(isinstance(v, (dict, list, tuple)) for v in seq)
        if nested:
            out.append("[\n")
            for i, v in enumerate(seq):
                out.append(pad + "  ")
                _emit(v, indent + 2, out)
                out.append(",\n" if i < len(seq) - 1 else "\n")
            out.append(pad + "]")
        else:
            out.append("[")
            for i, v in enumerate(seq):
                _emit(v, indent, out, pretty=pretty)
                if i < len(seq) - 1:
                    out.append(", ")
            out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def json_text(obj):
    """Render to JSON with insertion order kept and floats via fmt17."""
    out = []
    _emit(obj, 0, out)
    out.append("\n")
    return "".join(out)


def json_line(obj):
    """Single-line JSON, same float formatting; for JSONL report streams."""
    out = []
    _emit(obj, 0, out, pretty=False)
    return "".join(out)


def write_text_atomic(path, text):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return path


def _cell(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".17g")
    return str(v)


def write_csv_atomic(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    return write_text_atomic(path, "\n".join(lines) + "\n")


def read_json(path):
    with open(path, "r") as fh:
        return json.load(fh)
