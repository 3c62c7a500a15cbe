"""Tiny predicate language for naming subsets of a Cayley window.

A predicate is one or more clauses joined by ``&``:

    all                 every point
    prefix:ab           normal-form label starts with "ab"
    x0>=0               coordinate 0 compared with an integer (>=, <=, >, <, ==, !=)
    x1%2==0             coordinate 1 modulo 2 equals 0

Coordinates come from :meth:`GroupModel.coords`; free groups have none.
"""
from __future__ import annotations

import operator
import re

from .errors import PreconditionError

_OPS = {">=": operator.ge, "<=": operator.le, ">": operator.gt, "<": operator.lt,
        "==": operator.eq, "!=": operator.ne}
_COORD = re.compile(r"^x(\d+)(?:%(\d+))?\s*(>=|<=|==|!=|>|<)\s*(-?\d+)$")


def _clause(text: str):
    text = text.strip()
    if text == "all":
        return lambda label, coords: True
    if text.startswith("prefix:"):
        pre = text[len("prefix:"):]
        return lambda label, coords: label.startswith(pre)
    m = _COORD.match(text)
    if not m:
        raise PreconditionError(f"cannot parse predicate clause {text!r}")
    i, mod, op, k = int(m.group(1)), m.group(2), _OPS[m.group(3)], int(m.group(4))
    mod = int(mod) if mod else None

    def test(label, coords):
        if coords is None or i >= len(coords):
            raise PreconditionError(f"point {label} has no coordinate x{i}")
        v = coords[i] % mod if mod else coords[i]
        return op(v, k)
    return test


def compile_predicate(text: str):
    clauses = [_clause(c) for c in text.split("&")]
    return lambda label, coords: all(c(label, coords) for c in clauses)


def select(cball, n: int, text: str) -> list[int]:
    """Indices among the first ``n`` ball vertices satisfying ``text``."""
    pred = compile_predicate(text)
    group = cball.group
    return [i for i in range(n)
            if pred(group.format(cball.vertices[i]), group.coords(cball.vertices[i]))]
