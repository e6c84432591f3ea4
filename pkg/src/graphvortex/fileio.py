"""Deterministic JSON serialization helpers.

Every float is written with 17 significant digits, which is enough for a
binary64 value to round-trip exactly.  Combined with insertion-ordered
dicts this makes repeated runs of the command line tools byte-identical.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any


def fmt_float(x: float) -> str:
    """Render a float with 17 significant digits (lossless round-trip)."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"refusing to serialize non-finite value {x!r}")
    return format(x, ".17g")


def dumps(obj: Any) -> str:
    """Serialize dicts/lists/scalars to JSON with 17-digit floats."""
    if isinstance(obj, dict):
        items = ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items())
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int,)):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    # numpy scalars and similar
    if hasattr(obj, "item"):
        return dumps(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dumps(obj) + "\n", encoding="utf-8")


def load(path: str | Path) -> Any:
    return json.loads(Path(path).read_text(encoding="utf-8"))
