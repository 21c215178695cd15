"""Command-line front end.

Exit codes: 0 the query holds / the argument is valid; 1 it fails /
is invalid; 2 the bounded check came back unknown; 3 usage, parse or
I/O errors.
"""

from __future__ import annotations

import argparse
import json
import string
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .atomic_base import (
    AtomicBase,
    BaseError,
    EnumerationCapError,
    derives,
    enumerate_bases,
    parse_base,
)
from .argument import (
    Assumption,
    EmptyTop,
    Inf,
    StructureError,
    instantiate,
    parse_structure,
    parse_structures,
)
from .base_semantics import logical_consequence, models
from .formula import Atom, Disj, Formula, FormulaError, negation, parse_formula, render_formula
from .justification import (
    JustificationError,
    JustificationSet,
    RSystem,
    or_detour,
    parse_rules,
    reduces,
)
from .sexpr import SexprError
from .validity import (
    Argument,
    Bounds,
    CONSEQUENCE_VARIANTS,
    ValidityError,
    Verdict,
    axiom_structure,
    consequence,
    em_witness,
    synthesize_closed,
    valid,
)

__all__ = ["main", "run", "search_counterexample", "RunConfig"]

_PARSE_ERRORS = (
    FormulaError,
    BaseError,
    EnumerationCapError,
    StructureError,
    JustificationError,
    SexprError,
    ValidityError,
    OSError,
)


@dataclass
class RunConfig:
    """A parsed invocation; run() maps it to an exit code."""

    command: str
    args: argparse.Namespace


class _Cli(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(3, f"{self.prog}: error: {message}\n")


def _emit(args, payload: dict, text: str) -> None:
    if getattr(args, "format", "text") == "lines":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _verdict_exit(v: Verdict) -> int:
    return {"valid": 0, "invalid": 1, "unknown": 2}[v.status]


def _load_base(path: str) -> AtomicBase:
    p = Path(path)
    try:
        return parse_base(p.read_text(encoding="utf-8"), id=p.stem)
    except BaseError as e:
        raise BaseError(f"{path}: {e}") from None


def _parse_enumerate_spec(spec: str) -> tuple[list[Atom], int]:
    body = spec.split(":", 1)[1]
    opts = dict(kv.split("=", 1) for kv in body.split(","))
    n_atoms = int(opts.pop("atoms"))
    n_rules = int(opts.pop("rules"))
    if opts:
        raise BaseError(f"unknown enumerate options: {sorted(opts)}")
    atoms = [Atom(string.ascii_lowercase[i]) for i in range(n_atoms)]
    return atoms, n_rules


def _load_family(specs: Iterable[str]) -> list[AtomicBase]:
    family: list[AtomicBase] = []
    for spec in specs:
        if spec.startswith("enumerate:"):
            atoms, n_rules = _parse_enumerate_spec(spec)
            family.extend(enumerate_bases(atoms, n_rules, consistent_only=True))
        else:
            family.append(_load_base(spec))
    return sorted(family, key=lambda b: b.id)


def _load_rules(path: str) -> JustificationSet:
    try:
        return parse_rules(Path(path).read_text(encoding="utf-8"))
    except JustificationError as e:
        raise JustificationError(f"{path}: {e}") from None


def _load_structure(path: str):
    try:
        return parse_structure(Path(path).read_text(encoding="utf-8"))
    except StructureError as e:
        raise StructureError(f"{path}: {e}") from None


def _load_structures(path: str):
    try:
        return parse_structures(Path(path).read_text(encoding="utf-8"))
    except StructureError as e:
        raise StructureError(f"{path}: {e}") from None


def _bounds_from(args) -> Bounds:
    sigma = []
    for path in getattr(args, "sigma_pool", None) or []:
        sigma.extend(_load_structures(path))
    exts = tuple(_load_rules(p) for p in getattr(args, "extensions", None) or [])
    return Bounds(
        max_reduction_steps=args.max_steps,
        sigma_candidates=tuple(sigma),
        extensions=exts,
    )


def _context_from(args) -> list[Formula]:
    raw = getattr(args, "context", None)
    if not raw:
        return []
    return [parse_formula(part) for part in raw.split(";") if part.strip()]


def search_counterexample(
    context: Iterable[Formula],
    goal: Formula,
    atoms: list[Atom],
    max_rules: int,
    cap: int = 200_000,
) -> AtomicBase | None:
    """First enumerated consistent base on which the goal fails, or None."""
    context = tuple(context)
    for base in enumerate_bases(atoms, max_rules, consistent_only=True, cap=cap):
        if not models(base, context, goal):
            return base
    return None


# ---------------------------------------------------------------------------
# commands


def _cmd_derive(args) -> int:
    base = _load_base(args.base)
    goal = parse_formula(args.goal)
    if not isinstance(goal, Atom):
        raise FormulaError("derivability is about atoms; give an atom goal")
    ok = derives(base, (), goal)
    _emit(
        args,
        {"record": "result", "command": "derive", "base": base.id, "goal": goal.name, "holds": ok},
        f"{base.id} {'derives' if ok else 'does not derive'} {goal.name}",
    )
    return 0 if ok else 1


def _cmd_models(args) -> int:
    base = _load_base(args.base)
    goal = parse_formula(args.goal)
    ctx = [parse_formula(part) for part in (args.ctx.split(";") if args.ctx else []) if part.strip()]
    ok = models(base, ctx, goal)
    shown = (", ".join(render_formula(f) for f in ctx) + " " if ctx else "") + "|= " + render_formula(goal)
    _emit(
        args,
        {
            "record": "result",
            "command": "models",
            "base": base.id,
            "context": [render_formula(f) for f in ctx],
            "goal": render_formula(goal),
            "holds": ok,
        },
        f"on {base.id}: {shown}: {'holds' if ok else 'fails'}",
    )
    return 0 if ok else 1


def _cmd_consequence(args) -> int:
    goal = parse_formula(args.goal)
    ctx = _context_from(args)
    family = _load_family(args.family)
    if args.variant == "base":
        cv = logical_consequence(ctx, goal, family)
        v = Verdict("valid" if cv.holds else "invalid",
                    "" if cv.holds else f"fails on {cv.counterexample}", cv.counterexample)
    else:
        v = consequence(args.variant, ctx, goal, family, _bounds_from(args))
    _emit(
        args,
        {
            "record": "result",
            "command": "consequence",
            "variant": args.variant,
            "goal": render_formula(goal),
            "context": [render_formula(f) for f in ctx],
            "family_size": len(family),
            "status": v.status,
            "reason": v.reason,
        },
        f"{args.variant} over {len(family)} base(s): {v.status}" + (f" ({v.reason})" if v.reason else ""),
    )
    return _verdict_exit(v)


def _cmd_reduce(args) -> int:
    rules = _load_rules(args.rules)
    frm = _load_structure(args.frm)
    to = _load_structure(args.to)
    ok = reduces(rules, frm, to, args.max_steps)
    _emit(
        args,
        {"record": "result", "command": "reduce", "max_steps": args.max_steps, "holds": ok},
        f"reduces within {args.max_steps} step(s): {'yes' if ok else 'no'}",
    )
    return 0 if ok else 1


def _cmd_valid(args) -> int:
    structure = _load_structure(args.structure)
    rules = _load_rules(args.rules)
    base = _load_base(args.base)
    v = valid(Argument(structure, rules), base, _bounds_from(args))
    _emit(
        args,
        {
            "record": "result",
            "command": "valid",
            "base": base.id,
            "status": v.status,
            "reason": v.reason,
        },
        f"on {base.id}: {v.status}" + (f" ({v.reason})" if v.reason else ""),
    )
    return _verdict_exit(v)


def _cmd_search(args) -> int:
    goal = parse_formula(args.goal)
    ctx = _context_from(args)
    atoms = [Atom(name.strip()) for name in args.atoms.split(",") if name.strip()]
    try:
        found = search_counterexample(ctx, goal, atoms, args.max_rules, cap=args.cap)
    except EnumerationCapError as e:
        _emit(args, {"record": "result", "command": "search", "error": "cap-exceeded", "detail": str(e)},
              f"enumeration cap exceeded: {e}")
        return 3
    if found is None:
        _emit(
            args,
            {"record": "result", "command": "search", "counterexample": None},
            "no counterexample in the searched family",
        )
        return 0
    _emit(
        args,
        {"record": "result", "command": "search", "counterexample": found.id},
        f"counterexample: {found.id}",
    )
    return 1


# ---------------------------------------------------------------------------
# demos: executable versions of the worked examples


def _demo_detour(args) -> int:
    a, b, c = Atom("a"), Atom("b"), Atom("c")
    branch1 = Inf("atm", c, (Assumption(a, 1),))
    branch2 = Inf("atm", c, (Assumption(b, 2),))
    d = Inf("orE", c, (Assumption(Disj(a, b)), branch1, branch2), frozenset({1, 2}))
    steps = JustificationSet((or_detour(),))
    bases = [
        parse_base("-> a\na -> c\nb -> c\n", id="left"),
        parse_base("-> b\na -> c\nb -> c\n", id="right"),
        parse_base("-> a\n-> b\na -> c\nb -> c\n", id="both"),
    ]
    ok = True
    for base in bases:
        v = valid(Argument(d, steps), base, _bounds_from(args))
        ok &= v.is_valid
        _emit(
            args,
            {"record": "demo", "name": "detour", "base": base.id, "status": v.status},
            f"case analysis on {base.id}: {v.status}",
        )
    closed = instantiate(d, {Disj(a, b): synthesize_closed(bases[0], Disj(a, b))})
    target = Inf("atm", c, (Inf("atm", a, (EmptyTop(),)),))
    one = reduces(steps, closed, target, 1) and not reduces(steps, closed, target, 0)
    ok &= one
    _emit(
        args,
        {"record": "demo", "name": "detour", "one_step": one},
        f"detour removed in exactly one step: {'yes' if one else 'no'}",
    )
    return 0 if ok else 1


def _demo_em(args) -> int:
    family = _load_family(args.family or ["enumerate:atoms=2,rules=2"])
    f = Atom("a")
    ok = True
    for base in family:
        w = em_witness(base, f)
        v = valid(w, base, _bounds_from(args))
        ok &= v.is_valid
        arm = w.steps.members[0].name
        _emit(
            args,
            {"record": "demo", "name": "em", "base": base.id, "arm": arm, "status": v.status},
            f"excluded middle on {base.id}: witness via {arm}: {v.status}",
        )
    return 0 if ok else 1


def _demo_chain(args) -> int:
    p, q, r, s = map(Atom, "pqrs")
    qs = Disj(q, s)
    rules = parse_rules(
        'chain_rule: (inf step2 "q | s" (inf step1 "r" (inf atm "p" (empty)))) '
        '=> (inf orI1 "q | s" (inf atm "q" (inf atm "p" (empty))))'
    )
    base = parse_base("-> p\np -> q\n", id="two-rule")
    empty = AtomicBase(frozenset(), id="empty")
    open_chain = Inf("step2", qs, (Inf("step1", r, (Assumption(p),)),))
    closed_chain = Inf("step2", qs, (Inf("step1", r, (Inf("atm", p, (EmptyTop(),)),)),))
    bounds = _bounds_from(args)
    checks = [
        ("open chain on the two-rule base", valid(Argument(open_chain, rules), base, bounds), "valid"),
        ("closed chain on the two-rule base", valid(Argument(closed_chain, rules), base, bounds), "valid"),
        ("closed chain on the empty base", valid(Argument(closed_chain, rules), empty, bounds), "invalid"),
    ]
    ok = True
    for label, v, want in checks:
        good = (v.status == want) or (want == "invalid" and v.is_unknown)
        ok &= good
        _emit(
            args,
            {"record": "demo", "name": "chain", "check": label, "status": v.status, "expected": want},
            f"{label}: {v.status} (expected {want})",
        )
    return 0 if ok else 1


def _demo_graph(args) -> int:
    family = _load_family(args.family or ["enumerate:atoms=1,rules=1"])
    f = Atom("a")
    goal = Disj(f, negation(f))
    bounds = _bounds_from(args)
    ok = True
    union = RSystem(())
    for base in family:
        w = em_witness(base, f, mode="graph")
        union = union | w.steps
        v = valid(w, base, bounds)
        ok &= v.is_valid
        _emit(
            args,
            {"record": "demo", "name": "graph", "base": base.id, "status": v.status},
            f"graph witness on {base.id}: {v.status}",
        )
    for base in family:
        v = valid(Argument(axiom_structure(goal), union), base, bounds)
        ok &= v.is_valid
    v = consequence("delta-sh", (), goal, family, bounds)
    ok &= v.is_valid
    _emit(
        args,
        {"record": "demo", "name": "graph", "union_pairs": len(union), "status": v.status},
        f"pooled reduction system ({len(union)} pair(s)) on every base: {v.status}",
    )
    return 0 if ok else 1


_DEMOS = {"detour": _demo_detour, "em": _demo_em, "chain": _demo_chain, "graph": _demo_graph}


def _cmd_demo(args) -> int:
    return _DEMOS[args.name](args)


# ---------------------------------------------------------------------------


def _add_common(sp, family=False):
    sp.add_argument("--max-steps", type=int, default=10, dest="max_steps")
    sp.add_argument("--sigma-pool", nargs="*", dest="sigma_pool", metavar="FILE")
    sp.add_argument("--extensions", nargs="*", dest="extensions", metavar="FILE")
    sp.add_argument("--format", choices=("text", "lines"), default="text")
    if family:
        sp.add_argument(
            "--family",
            nargs="*",
            metavar="SPEC",
            help="base files and/or enumerate:atoms=K,rules=M",
        )


def build_parser() -> argparse.ArgumentParser:
    p = _Cli(prog="ptslab", description="proof-theoretic semantics at desk scale")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Cli)

    sp = sub.add_parser("derive", help="atomic derivability on a base")
    sp.add_argument("base")
    sp.add_argument("goal")
    _add_common(sp)
    sp.set_defaults(func=_cmd_derive)

    sp = sub.add_parser("models", help="base-semantics consequence on one base")
    sp.add_argument("base")
    sp.add_argument("ctx_or_goal")
    sp.add_argument("maybe_goal", nargs="?")
    _add_common(sp)
    sp.set_defaults(func=_cmd_models)

    sp = sub.add_parser("consequence", help="consequence over a family of bases")
    sp.add_argument("variant", choices=("base",) + CONSEQUENCE_VARIANTS)
    sp.add_argument("goal")
    sp.add_argument("--context", help="semicolon-separated formulas")
    _add_common(sp, family=True)
    sp.set_defaults(func=_cmd_consequence)

    sp = sub.add_parser("reduce", help="bounded reduction between two structures")
    sp.add_argument("rules")
    sp.add_argument("frm", metavar="from")
    sp.add_argument("to")
    _add_common(sp)
    sp.set_defaults(func=_cmd_reduce)

    sp = sub.add_parser("valid", help="bounded validity of an argument on a base")
    sp.add_argument("structure")
    sp.add_argument("rules")
    sp.add_argument("base")
    _add_common(sp)
    sp.set_defaults(func=_cmd_valid)

    sp = sub.add_parser("search", help="first enumerated base refuting a consequence")
    sp.add_argument("goal")
    sp.add_argument("--context", help="semicolon-separated formulas")
    sp.add_argument("--atoms", required=True, help="comma-separated atom names")
    sp.add_argument("--max-rules", type=int, default=2, dest="max_rules")
    sp.add_argument("--cap", type=int, default=200_000)
    sp.add_argument("--format", choices=("text", "lines"), default="text")
    sp.set_defaults(func=_cmd_search)

    sp = sub.add_parser("demo", help="run a packaged worked example")
    sp.add_argument("name", choices=sorted(_DEMOS))
    _add_common(sp, family=True)
    sp.set_defaults(func=_cmd_demo)

    return p


def run(config: RunConfig) -> int:
    """Execute a parsed invocation."""
    try:
        return config.args.func(config.args)
    except _PARSE_ERRORS as e:
        print(f"ptslab: error: {e}", file=sys.stderr)
        return 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "models":
        # models BASE [CTX] GOAL: the goal is the last positional
        if args.maybe_goal is None:
            args.ctx, args.goal = None, args.ctx_or_goal
        else:
            args.ctx, args.goal = args.ctx_or_goal, args.maybe_goal
    return run(RunConfig(args.command, args))


if __name__ == "__main__":
    sys.exit(main())
