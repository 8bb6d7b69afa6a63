"""JSON text with floats written at 17 significant digits."""

from __future__ import annotations

import json
import math

import numpy as np


def _float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"cannot serialize non-finite value {v!r}")
    s = format(v, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _encode(obj, out: list[str], indent: str, level: int) -> None:
    pad = "\n" + indent * (level + 1) if indent else ""
    end = "\n" + indent * level if indent else ""
    sep = "," + pad if indent else ","
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(bool(obj)) if obj is not None else "null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{" + pad)
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(sep)
            out.append(json.dumps(str(k), ensure_ascii=False) + (": " if indent else ":"))
            _encode(v, out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = obj.tolist() if isinstance(obj, np.ndarray) else obj
        # numeric arrays stay on one line
        flat = all(not isinstance(x, (dict, list, tuple)) for x in items)
        if not items:
            out.append("[]")
            return
        if flat:
            out.append("[")
            for i, v in enumerate(items):
                if i:
                    out.append(",")
                _encode(v, out, "", 0)
            out.append("]")
            return
        out.append("[" + pad)
        for i, v in enumerate(items):
            if i:
                out.append(sep)
            _encode(v, out, indent, level + 1)
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int | None = 1) -> str:
    out: list[str] = []
    _encode(obj, out, " " * indent if indent else "", 0)
    return "".join(out) + "\n"


def loads(text: str):
    return json.loads(text)
