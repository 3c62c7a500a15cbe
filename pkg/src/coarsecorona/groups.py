"""Finitely generated groups given by concrete evaluation models.

A :class:`GroupModel` never stores a presentation. Each element has a
canonical hashable normal form and the model knows how to right-multiply
by every generator, which is all that Cayley ball enumeration needs.

Generating sets are symmetrized at construction: callers list the
positive generators only, and the model appends the formal inverses
(an element that is its own inverse gets a single self-inverse symbol).
"""
from __future__ import annotations

import enum
import math
import re
import string
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Sequence

from .errors import PreconditionError

Element = Hashable


class Family(str, enum.Enum):
    FREE_ABELIAN = "free_abelian"
    FREE = "free"
    INFINITE_DIHEDRAL = "infinite_dihedral"
    CYCLIC = "cyclic"
    HEISENBERG = "heisenberg"
    PRODUCT = "product"


@dataclass(frozen=True)
class GeneratorSymbol:
    id: int
    label: str
    inverse_id: int


@dataclass(frozen=True, eq=False)
class GroupModel:
    """Symmetric generating set plus an exact element model.

    ``steps[i]`` right-multiplies an element by generator ``i``. Elements
    are compared by ``==`` on their normal forms.
    """

    name: str
    generators: tuple[GeneratorSymbol, ...]
    identity: Element
    steps: tuple[Callable[[Element], Element], ...]
    formatter: Callable[[Element], str]
    coordinates: Callable[[Element], tuple[int, ...] | None]
    spec: dict = field(default_factory=dict)

    def multiply(self, element: Element, generator: GeneratorSymbol | int) -> Element:
        gid = generator.id if isinstance(generator, GeneratorSymbol) else generator
        return self.steps[gid](element)

    def inverse(self, generator: GeneratorSymbol | int) -> GeneratorSymbol:
        gid = generator.id if isinstance(generator, GeneratorSymbol) else generator
        return self.generators[self.generators[gid].inverse_id]

    def word(self, letters: Sequence[int], start: Element | None = None) -> Element:
        e = self.identity if start is None else start
        for g in letters:
            e = self.steps[g](e)
        return e

    def format(self, element: Element) -> str:
        return self.formatter(element)

    def coords(self, element: Element) -> tuple[int, ...] | None:
        return self.coordinates(element)

    @property
    def degree(self) -> int:
        return len(self.generators)

    def to_spec(self) -> dict:
        return _copy_spec(self.spec)

    def __repr__(self):
        return f"GroupModel({self.name!r}, |S|={self.degree})"


def _copy_spec(spec):
    if isinstance(spec, dict):
        return {k: _copy_spec(v) for k, v in spec.items()}
    if isinstance(spec, (list, tuple)):
        return [_copy_spec(v) for v in spec]
    return spec


def _symmetrize(moves, negate, label, same):
    """Build generator symbols and their moves from positive generators.

    ``moves`` are opaque per-generator data, ``negate`` gives the inverse
    move and ``same`` decides equality of moves.
    """
    symbols = []
    out_moves = []
    for mv in moves:
        if any(same(mv, m) for m in out_moves):
            continue
        inv = negate(mv)
        gid = len(symbols)
        if same(inv, mv):
            symbols.append(GeneratorSymbol(gid, label(mv), gid))
            out_moves.append(mv)
            continue
        symbols.append(GeneratorSymbol(gid, label(mv), gid + 1))
        symbols.append(GeneratorSymbol(gid + 1, label(inv), gid))
        out_moves.extend([mv, inv])
    return tuple(symbols), out_moves


# -- free abelian ----------------------------------------------------------

def free_abelian(n: int, generators: Sequence[Sequence[int]] | None = None) -> GroupModel:
    """ℤⁿ with integer-vector elements.

    ``generators`` defaults to the standard basis. Custom sets must span ℤⁿ;
    for n = 1 this is checked via the gcd, for larger n it is the caller's
    responsibility.
    """
    if not isinstance(n, int) or n < 1:
        raise PreconditionError(f"free_abelian needs n >= 1, got {n!r}")
    standard = generators is None
    if standard:
        vecs = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    else:
        vecs = [tuple(int(c) for c in v) for v in generators]
        if not vecs:
            raise PreconditionError("empty generating set")
        for v in vecs:
            if len(v) != n:
                raise PreconditionError(f"generator {v} has wrong length for Z^{n}")
            if not any(v):
                raise PreconditionError("zero vector is not a valid generator")
        if n == 1 and math.gcd(*[v[0] for v in vecs]) != 1:
            raise PreconditionError("generators do not span Z")

    def label(v):
        if n == 1:
            return f"{v[0]:+d}"
        if standard or _is_signed_unit(v):
            i = next(j for j, c in enumerate(v) if c)
            return f"{'-' if v[i] < 0 else ''}e{i + 1}"
        return "(" + ",".join(str(c) for c in v) + ")"

    symbols, moves = _symmetrize(
        vecs, lambda v: tuple(-c for c in v), label, lambda a, b: a == b)
    steps = tuple(_vector_step(m) for m in moves)

    if n == 1:
        fmt = lambda e: str(e[0])
    else:
        fmt = lambda e: "(" + ",".join(str(c) for c in e) + ")"
    spec: dict[str, Any] = {"family": Family.FREE_ABELIAN.value, "params": {"n": n}}
    if not standard:
        spec["generators"] = [list(v) for v in vecs]
    name = "Z" if n == 1 else f"Z^{n}"
    if not standard:
        name += "<" + ",".join(s.label for s in symbols if s.id <= s.inverse_id) + ">"
    return GroupModel(name, symbols, (0,) * n, steps, fmt, lambda e: tuple(e), spec)


def _is_signed_unit(v):
    return sum(abs(c) for c in v) == 1


def _vector_step(move):
    if sum(1 for c in move if c) == 1:
        i = next(j for j, c in enumerate(move) if c)
        d = move[i]
        return lambda e: e[:i] + (e[i] + d,) + e[i + 1:]
    return lambda e: tuple(a + b for a, b in zip(e, move))


# -- free groups ---------------------------------------------------------

def free(n: int) -> GroupModel:
    """Free group on ``n`` letters; elements are reduced words.

    A word is a tuple of non-zero ints, ``+i`` for the i-th letter and
    ``-i`` for its inverse. Letters print as a, b, ... with capitals for
    inverses; the empty word prints as ``1``.
    """
    if not isinstance(n, int) or n < 1:
        raise PreconditionError(f"free group needs n >= 1, got {n!r}")
    if n > 26:
        raise PreconditionError("at most 26 free generators are supported")
    letters = string.ascii_lowercase[:n]

    def step(x):
        def apply(w):
            if w and w[-1] == -x:
                return w[:-1]
            return w + (x,)
        return apply

    def show(x):
        return letters[x - 1] if x > 0 else letters[-x - 1].upper()

    symbols, moves = _symmetrize(
        list(range(1, n + 1)), lambda x: -x, show, lambda a, b: a == b)
    fmt = lambda w: "".join(show(x) for x in w) or "1"
    return GroupModel(f"F{n}", symbols, (), tuple(step(m) for m in moves), fmt,
                      lambda w: None, {"family": Family.FREE.value, "params": {"n": n}})


# -- infinite dihedral ---------------------------------------------------

def infinite_dihedral() -> GroupModel:
    """D∞ as affine maps x ↦ εx + k, stored as (k, ε).

    Generators: translation t = (1, +1) with inverse, reflection s = (0, -1).
    """
    symbols = (
        GeneratorSymbol(0, "t", 1),
        GeneratorSymbol(1, "T", 0),
        GeneratorSymbol(2, "s", 2),
    )
    steps = (
        lambda e: (e[0] + e[1], e[1]),
        lambda e: (e[0] - e[1], e[1]),
        lambda e: (e[0], -e[1]),
    )
    fmt = lambda e: f"({e[0]},{'+' if e[1] > 0 else '-'})"
    return GroupModel("Dinf", symbols, (0, 1), steps, fmt, lambda e: tuple(e),
                      {"family": Family.INFINITE_DIHEDRAL.value, "params": {}})


# -- finite cyclic -------------------------------------------------------

def cyclic(m: int, generators: Sequence[int] | None = None) -> GroupModel:
    if not isinstance(m, int) or m < 1:
        raise PreconditionError(f"cyclic group needs m >= 1, got {m!r}")
    standard = generators is None
    res = [1 % m] if standard else [int(g) % m for g in generators]
    if not res:
        raise PreconditionError("empty generating set")
    if math.gcd(m, *res) != 1:
        raise PreconditionError(f"generators {list(generators)} do not generate Z/{m}")

    symbols, moves = _symmetrize(
        res, lambda k: (-k) % m, lambda k: f"+{k}", lambda a, b: a == b)
    steps = tuple((lambda d: (lambda e: ((e[0] + d) % m,)))(k) for k in moves)
    spec: dict[str, Any] = {"family": Family.CYCLIC.value, "params": {"m": m}}
    name = f"Z/{m}"
    if not standard:
        spec["generators"] = list(res)
        name += "<" + ",".join(str(k) for k in res) + ">"
    return GroupModel(name, symbols, (0,), steps, lambda e: str(e[0]),
                      lambda e: tuple(e), spec)


# -- discrete Heisenberg -------------------------------------------------

def heisenberg() -> GroupModel:
    """Upper unitriangular integer 3x3 matrices, stored as (a, b, c).

    (a, b, c) is the matrix with a, b on the superdiagonal and c in the
    corner, so (a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab').
    """
    symbols = (
        GeneratorSymbol(0, "x", 1),
        GeneratorSymbol(1, "X", 0),
        GeneratorSymbol(2, "y", 3),
        GeneratorSymbol(3, "Y", 2),
    )
    steps = (
        lambda e: (e[0] + 1, e[1], e[2]),
        lambda e: (e[0] - 1, e[1], e[2]),
        lambda e: (e[0], e[1] + 1, e[2] + e[0]),
        lambda e: (e[0], e[1] - 1, e[2] - e[0]),
    )
    fmt = lambda e: f"({e[0]},{e[1]},{e[2]})"
    return GroupModel("H3", symbols, (0, 0, 0), steps, fmt, lambda e: tuple(e),
                      {"family": Family.HEISENBERG.value, "params": {}})


def heisenberg_multiply(g, h):
    """Full matrix product on normal forms; used as an independent check."""
    return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])


# -- products ------------------------------------------------------------

def product(a: GroupModel, b: GroupModel) -> GroupModel:
    """Direct product with generating set (S_a x {1}) ∪ ({1} x S_b)."""
    k = a.degree
    symbols = tuple(
        [GeneratorSymbol(s.id, f"1:{s.label}", s.inverse_id) for s in a.generators]
        + [GeneratorSymbol(s.id + k, f"2:{s.label}", s.inverse_id + k) for s in b.generators]
    )
    steps = tuple(
        [(lambda f: (lambda e: (f(e[0]), e[1])))(f) for f in a.steps]
        + [(lambda f: (lambda e: (e[0], f(e[1]))))(f) for f in b.steps]
    )

    def coords(e):
        ca, cb = a.coords(e[0]), b.coords(e[1])
        if ca is None or cb is None:
            return None
        return tuple(ca) + tuple(cb)

    fmt = lambda e: f"[{a.format(e[0])};{b.format(e[1])}]"
    spec = {"family": Family.PRODUCT.value, "factors": [a.to_spec(), b.to_spec()]}
    return GroupModel(f"{a.name} x {b.name}", symbols, (a.identity, b.identity),
                      steps, fmt, coords, spec)


# -- construction from enums, specs and short names ------------------------

def make_builtin(family: Family | str, **params) -> GroupModel:
    """Construct a built-in model, e.g. ``make_builtin("free", n=2)``."""
    try:
        family = Family(family)
    except ValueError:
        raise PreconditionError(f"unknown family {family!r}") from None
    gens = params.pop("generators", None)
    needed = {Family.FREE_ABELIAN: ("n",), Family.FREE: ("n",), Family.CYCLIC: ("m",)}.get(family, ())
    missing = [k for k in needed if k not in params]
    extra = sorted(set(params) - set(needed))
    if missing or extra:
        raise PreconditionError(
            f"{family.value}: missing parameters {missing}, unexpected {extra}")
    if family is Family.FREE_ABELIAN:
        return free_abelian(params["n"], gens)
    if family is Family.FREE:
        return free(params["n"])
    if family is Family.CYCLIC:
        return cyclic(params["m"], gens)
    if family is Family.INFINITE_DIHEDRAL:
        return infinite_dihedral()
    if family is Family.HEISENBERG:
        return heisenberg()
    raise PreconditionError("products are built with product() or from_spec()")


def from_spec(spec: dict) -> GroupModel:
    """Inverse of :meth:`GroupModel.to_spec`."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise PreconditionError("group spec must be a mapping with a 'family' field")
    if spec["family"] == Family.PRODUCT.value:
        factors = spec.get("factors") or []
        if len(factors) < 2:
            raise PreconditionError("product spec needs at least two factors")
        model = from_spec(factors[0])
        for f in factors[1:]:
            model = product(model, from_spec(f))
        return model
    params = dict(spec.get("params") or {})
    if "generators" in spec:
        params["generators"] = spec["generators"]
    return make_builtin(spec["family"], **params)


_SHORT = [
    (re.compile(r"^Z\^?(\d+)$"), lambda m: free_abelian(int(m.group(1)))),
    (re.compile(r"^Z$"), lambda m: free_abelian(1)),
    (re.compile(r"^F(\d+)$"), lambda m: free(int(m.group(1)))),
    (re.compile(r"^(Z/|C)(\d+)$"), lambda m: cyclic(int(m.group(2)))),
    (re.compile(r"^D(inf|∞)$"), lambda m: infinite_dihedral()),
    (re.compile(r"^(H3|Heis|Heisenberg)$"), lambda m: heisenberg()),
]


def parse_builtin(text: str) -> GroupModel:
    """Parse a short name such as ``Z``, ``Z2``, ``F2``, ``Z/5``, ``Dinf``,
    ``H3`` or a product ``ZxZ/2``."""
    parts = [p.strip() for p in re.split(r"\s*[x×]\s*", text.strip())]
    if not all(parts):
        raise PreconditionError(f"cannot parse group name {text!r}")
    models = []
    for p in parts:
        for pat, build in _SHORT:
            m = pat.match(p)
            if m:
                models.append(build(m))
                break
        else:
            raise PreconditionError(f"unknown builtin group {p!r}")
    model = models[0]
    for other in models[1:]:
        model = product(model, other)
    return model
