"""Command-line front end.

Every command prints one report on stdout. Exit status: 0 success,
1 precondition error, 2 vertex budget exceeded, 3 internal invariant
violation.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .cayley import ball, export_graph, summary
from .coarse import (SubsetFamily, diverge_coarsely, from_ball, line_window, load_snapshot,
                     mu_components)
from .ends import count_ends
from .errors import CoarseError, PreconditionError
from .groups import from_spec, parse_builtin
from .maps import PartialMap, classify, profile
from .select import select
from .verdict import classify_group, lemma41_guard, Corona
from .witness import decomposability_witness, extract_ray, geodesic_line, two_ended_split

SCHEMA_VERSION = "coarsecorona-report/1"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _load_group(args):
    if args.group_spec:
        try:
            spec = json.loads(Path(args.group_spec).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise PreconditionError(f"cannot read group spec: {exc}") from None
        return from_spec(spec)
    if args.builtin:
        return parse_builtin(args.builtin)
    raise PreconditionError("give --builtin NAME or --group-spec PATH")


def _snapshot_arg(text, budget):
    """``N:L``, ``Z:L``, ``builtin:NAME:r`` or a snapshot file path."""
    if text.startswith("N:"):
        return line_window(0, int(text[2:]))
    if text.startswith("Z:"):
        L = int(text[2:])
        return line_window(-L, L)
    if text.startswith("builtin:"):
        _, name, r = text.split(":", 2)
        r = int(r)
        return from_ball(ball(parse_builtin(name), 2 * r, budget), r)
    try:
        return load_snapshot(Path(text).read_text(encoding="utf-8"))
    except OSError as exc:
        raise PreconditionError(f"cannot read snapshot {text!r}: {exc}") from None


def _read_pairs(path):
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise PreconditionError(f"cannot read map file: {exc}") from None
    pairs = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise PreconditionError(f"map line {line!r} is not 'x y'")
        pairs.append(tuple(parts))
    return pairs


# -- commands ------------------------------------------------------------

def cmd_ball(args):
    group = _load_group(args)
    b = ball(group, args.R, args.budget)
    if args.format in ("edge-list", "dot"):
        return export_graph(b, args.format)
    return summary(b)


def cmd_ends(args):
    group = _load_group(args)
    return count_ends(group, args.r_max, args.ratio, args.window, args.budget).to_dict()


def _window(args):
    group = _load_group(args)
    b = ball(group, args.R, args.budget)
    return b, from_ball(b, args.R // 2)


def cmd_diverge(args):
    b, snap = _window(args)
    if len(args.subset) < 2:
        raise PreconditionError("diverge needs at least two --subset predicates")
    fam = SubsetFamily(snap, [select(b, len(snap), p) for p in args.subset])
    rep = diverge_coarsely(fam, args.r_values, args.shell_margin)
    out = rep.to_dict()
    out["subsets"] = list(args.subset)
    out["sizes"] = [len(s) for s in fam.subsets]
    return out


def cmd_components(args):
    b, snap = _window(args)
    pieces = mu_components(snap, select(b, len(snap), args.subset), args.mu)
    return {"subset": args.subset, "mu": args.mu, "count": len(pieces),
            "pieces": [[snap.labels[i] for i in p] for p in pieces]}


def cmd_profile(args):
    dom = _snapshot_arg(args.domain, args.budget)
    cod = _snapshot_arg(args.codomain, args.budget)
    f = PartialMap.from_labels(dom, cod, _read_pairs(args.map))
    p = profile(f)
    scale = args.scale if args.scale is not None else int(min(dom.scale_note, cod.scale_note))
    return {"profile": p.to_dict(), "classification": classify(p, scale).to_dict()}


def cmd_ray(args):
    group = _load_group(args)
    return extract_ray(ball(group, args.R, args.budget)).to_dict()


def cmd_line(args):
    group = _load_group(args)
    b = ball(group, args.R, args.budget)
    path = geodesic_line(b, args.pair_budget)
    return {"half_length": args.R // 2,
            "line": None if path is None else [b.label(v) for v in path],
            "found": path is not None}


def cmd_witness(args):
    group = _load_group(args)
    rep = count_ends(group, args.r_max, budget=args.budget)
    b = ball(group, args.R, args.budget)
    return decomposability_witness(b, args.n_max, args.r_values, args.shell_margin, rep).to_dict()


def cmd_split(args):
    group = _load_group(args)
    rep = count_ends(group, args.r_max, budget=args.budget)
    return two_ended_split(ball(group, args.R, args.budget), rep).to_dict()


def cmd_verdict(args):
    group = _load_group(args)
    rep = count_ends(group, args.r_max, args.ratio, args.window, args.budget)
    v = classify_group(rep)
    out = v.to_dict()
    out["ends"] = rep.to_dict()
    if v.classification not in (Corona.EMPTY, Corona.INCONCLUSIVE):
        out["lemma41_guard"] = lemma41_guard(group, v)
    return out


# -- parser ----------------------------------------------------------------

def build_parser():
    p = _Parser(prog="coarsecorona", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help, formats=("json", "text")):
        sp = sub.add_parser(name, help=help)
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--builtin", help="short group name, e.g. Z, Z2, F2, Z/5, Dinf, H3, ZxZ/2")
        g.add_argument("--group-spec", help="path to a JSON group spec")
        sp.add_argument("--format", choices=formats, default=formats[0] if "json" not in formats else "json")
        sp.add_argument("--budget", type=int, default=None, help="vertex budget")
        sp.set_defaults(func=func)
        return sp

    sp = add("ball", cmd_ball, "enumerate a Cayley ball", ("json", "text", "edge-list", "dot"))
    sp.add_argument("--R", type=int, required=True)

    for name, func, help in (("ends", cmd_ends, "count ends"),
                             ("verdict", cmd_verdict, "classify the Higson corona")):
        sp = add(name, func, help)
        sp.add_argument("--r-max", type=int, default=6)
        sp.add_argument("--ratio", type=int, default=3)
        sp.add_argument("--window", type=int, default=3)

    sp = add("diverge", cmd_diverge, "coarse divergence of named subsets")
    sp.add_argument("--R", type=int, required=True, help="ball radius; window is R // 2")
    sp.add_argument("--subset", action="append", default=[])
    sp.add_argument("--r-values", type=_int_list, default=[1, 2, 3])
    sp.add_argument("--shell-margin", type=int, default=3)

    sp = add("components", cmd_components, "mu-connected components of a subset")
    sp.add_argument("--R", type=int, required=True, help="ball radius; window is R // 2")
    sp.add_argument("--subset", default="all")
    sp.add_argument("--mu", type=int, default=1)

    sp = add("profile", cmd_profile, "expansion profile of a map given as label pairs")
    sp.add_argument("--domain", required=True, help="N:L, Z:L, builtin:NAME:r or snapshot file")
    sp.add_argument("--codomain", required=True)
    sp.add_argument("--map", required=True, help="file of 'x y' label pairs")
    sp.add_argument("--scale", type=int, default=None)

    sp = add("ray", cmd_ray, "geodesic ray from the identity")
    sp.add_argument("--R", type=int, required=True)

    sp = add("line", cmd_line, "geodesic line through the identity")
    sp.add_argument("--R", type=int, required=True)
    sp.add_argument("--pair-budget", type=int, default=100_000)

    sp = add("witness", cmd_witness, "decomposability witness for a one-ended group")
    sp.add_argument("--R", type=int, required=True)
    sp.add_argument("--n-max", type=int, default=4)
    sp.add_argument("--r-values", type=_int_list, default=[1, 2, 3, 4, 5])
    sp.add_argument("--shell-margin", type=int, default=5)
    sp.add_argument("--r-max", type=int, default=5)

    sp = add("split", cmd_split, "two-ended split and Z-equivalence")
    sp.add_argument("--R", type=int, required=True)
    sp.add_argument("--r-max", type=int, default=6)
    return p


def render(command, group_label, result, fmt):
    if isinstance(result, str):
        return result
    doc = {"schema": SCHEMA_VERSION, "command": command, "group": group_label,
           "result": result}
    if fmt == "text":
        return "\n".join(_flatten(doc)) + "\n"
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield f"{prefix}: {json.dumps(obj, ensure_ascii=False)}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    group_label = args.builtin or args.group_spec
    try:
        result = args.func(args)
    except CoarseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        partial = getattr(exc, "partial", None)
        if partial is not None:
            sys.stdout.write(render(args.command, group_label,
                                    {"partial": partial.to_dict()}, "json"))
        return exc.exit_code
    sys.stdout.write(render(args.command, group_label, result, args.format))
    return 0


def main_exit():
    sys.exit(main())


def schema() -> dict:
    """The JSON schema every ``--format json`` report validates against."""
    from importlib.resources import files
    return json.loads(files(__package__).joinpath("schema/report.schema.json").read_text("utf-8"))


if __name__ == "__main__":
    main_exit()
