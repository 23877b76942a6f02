"""Textual references to crews and simplicial modules.

Grammar::

    ref  := point | sphere:N | circle:N | simplex:N | em:P,N
          | wedge:(ref,ref,...) | power:(ref,R) | cyl:ref | PATH.json

A JSON file holding a chain complex (it has a ``ranks`` key) is read as the
Dold-Kan module of that complex; any other JSON file is read as a crew.
"""

from __future__ import annotations

import json
from pathlib import Path

from .chains import ChainComplex
from .errors import ValidationError
from .simplicial.constructions import point, polygon_circle, power, reduced_cylinder, sphere, standard_simplex, wedge
from .simplicial.crew import Crew
from .simplicial.modules import DEFAULT_LEVEL_CAP, dold_kan, em_module


def split_args(text: str) -> list[str]:
    """Split on top-level commas."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ValidationError(f"unbalanced parentheses in {text!r}")
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise ValidationError(f"unbalanced parentheses in {text!r}")
    parts.append("".join(cur).strip())
    return parts


def _ints(arg: str, count: int, ref: str) -> list[int]:
    parts = [a.strip() for a in arg.split(",")]
    try:
        vals = [int(a) for a in parts]
    except ValueError:
        vals = []
    if len(vals) != count or any(v < 0 for v in vals):
        raise ValidationError(f"{ref!r} needs {count} nonnegative integer argument(s)")
    return vals


def _group(arg: str, ref: str) -> list[str]:
    arg = arg.strip()
    if not (arg.startswith("(") and arg.endswith(")")):
        raise ValidationError(f"{ref!r}: arguments must be parenthesized")
    return split_args(arg[1:-1])


def _load_file(path: str, level_cap: int):
    try:
        obj = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    if "ranks" in obj:
        return dold_kan(ChainComplex.from_json(obj), level_cap, name=Path(path).name)
    return Crew.from_json(obj)


def resolve(ref: str, caps=None):
    """Build the crew or module a reference names."""
    level_cap = getattr(caps, "levels", DEFAULT_LEVEL_CAP)
    simplex_cap = getattr(caps, "simplices", None)
    ref = ref.strip()
    if ref.endswith(".json"):
        return _load_file(ref, level_cap)
    head, sep, arg = ref.partition(":")
    if head == "point" and not sep:
        return point()
    if not sep:
        raise ValidationError(f"unknown reference {ref!r}")
    if head == "sphere":
        return sphere(*_ints(arg, 1, ref))
    if head == "circle":
        (m,) = _ints(arg, 1, ref)
        if m < 1:
            raise ValidationError("circle:N needs N >= 1")
        return polygon_circle(m)
    if head == "simplex":
        return standard_simplex(*_ints(arg, 1, ref))
    if head == "em":
        p, n = _ints(arg, 2, ref)
        return em_module(p, n, level_cap)
    if head == "wedge":
        parts = [resolve(a, caps) for a in _group(arg, ref)]
        if any(not isinstance(K, Crew) for K in parts):
            raise ValidationError("wedge summands must be crews")
        return wedge(parts)
    if head == "power":
        parts = _group(arg, ref)
        if len(parts) != 2:
            raise ValidationError("power takes (ref, r)")
        K = resolve(parts[0], caps)
        if not isinstance(K, Crew):
            raise ValidationError("power needs a crew")
        (r,) = _ints(parts[1], 1, ref)
        return power(K, r) if simplex_cap is None else power(K, r, simplex_cap)
    if head == "cyl":
        K = resolve(arg, caps)
        if not isinstance(K, Crew):
            raise ValidationError("cyl needs a crew")
        return reduced_cylinder(K)
    raise ValidationError(f"unknown reference {ref!r}")
