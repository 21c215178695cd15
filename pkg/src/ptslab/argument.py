"""Argument structures: formula trees with assumption discharge.

A structure is an assumption leaf, an empty top marker, or an inference
node with a rule tag, a conclusion, premise subtrees and a set of
integer discharge labels. A labelled assumption leaf must be discharged
by exactly one inference node strictly below it; unlabelled leaves are
the open assumptions. Inference tags are free-form: structures are not
confined to any fixed rule set, only canonicity singles out the four
introduction shapes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

from .formula import Conj, Disj, Formula, Impl, parse_formula, render_formula
from .sexpr import SexprError, Sym, read_all_sexprs, read_sexpr

__all__ = [
    "StructureError",
    "ConclusionMismatch",
    "AssumptionEscape",
    "Assumption",
    "EmptyTop",
    "Inf",
    "ArgStructure",
    "StructureInfo",
    "conclusion_of",
    "check_structure",
    "analyze",
    "size_of",
    "labels_of",
    "relabel",
    "freshen",
    "positions",
    "subtree_at",
    "cut_subtree",
    "substitute",
    "instantiate",
    "is_canonical",
    "immediate_substructures",
    "canonical_form",
    "canonical_key",
    "structures_equal",
    "parse_structure",
    "parse_structures",
    "render_structure",
]


class StructureError(ValueError):
    pass


class ConclusionMismatch(StructureError):
    pass


class AssumptionEscape(StructureError):
    pass


@dataclass(frozen=True)
class Assumption:
    formula: Formula
    label: int | None = None


@dataclass(frozen=True)
class EmptyTop:
    pass


@dataclass(frozen=True)
class Inf:
    tag: str
    conclusion: Formula
    children: tuple["ArgStructure", ...]
    discharges: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.tag:
            raise StructureError("inference nodes need a rule tag")
        if not self.children:
            raise StructureError("inference nodes need at least one child; use (empty) for none")
        object.__setattr__(self, "discharges", frozenset(self.discharges))


ArgStructure = Assumption | EmptyTop | Inf


def conclusion_of(d: ArgStructure) -> Formula:
    match d:
        case Assumption(f, _):
            return f
        case Inf(_, c, _, _):
            return c
    raise StructureError("an empty top node has no conclusion")


def _walk(d: ArgStructure) -> Iterator[ArgStructure]:
    yield d
    if isinstance(d, Inf):
        for ch in d.children:
            yield from _walk(ch)


def check_structure(d: ArgStructure) -> None:
    """Raise StructureError unless d is well formed."""
    if isinstance(d, EmptyTop):
        raise StructureError("an empty node cannot stand alone")

    def walk(node, binder_sets):
        match node:
            case EmptyTop():
                return
            case Assumption(f, lbl):
                if lbl is not None:
                    n = sum(lbl in s for s in binder_sets)
                    if n != 1:
                        raise StructureError(
                            f"label {lbl} on assumption {render_formula(f)} has "
                            f"{n} discharging inferences below it (need exactly 1)"
                        )
            case Inf(_, _, children, dis):
                below = binder_sets + (dis,)
                for ch in children:
                    walk(ch, below)

    walk(d, ())


@dataclass(frozen=True)
class StructureInfo:
    conclusion: Formula
    open_assumptions: Counter  # Formula -> occurrence count

    @property
    def closed(self) -> bool:
        return not self.open_assumptions


def analyze(d: ArgStructure) -> StructureInfo:
    """Conclusion, open assumptions (with multiplicity) and closedness."""
    check_structure(d)
    opens: Counter = Counter()
    for node in _walk(d):
        if isinstance(node, Assumption) and node.label is None:
            opens[node.formula] += 1
    return StructureInfo(conclusion_of(d), opens)


def open_set(d: ArgStructure) -> frozenset[Formula]:
    return frozenset(analyze(d).open_assumptions)


def size_of(d: ArgStructure) -> int:
    return sum(1 for _ in _walk(d))


def labels_of(d: ArgStructure) -> frozenset[int]:
    out = set()
    for node in _walk(d):
        if isinstance(node, Assumption) and node.label is not None:
            out.add(node.label)
        elif isinstance(node, Inf):
            out.update(node.discharges)
    return frozenset(out)


def relabel(d: ArgStructure, mapping: dict[int, int]) -> ArgStructure:
    match d:
        case Assumption(f, lbl):
            return Assumption(f, mapping.get(lbl, lbl))
        case EmptyTop():
            return d
        case Inf(tag, c, children, dis):
            return Inf(
                tag,
                c,
                tuple(relabel(ch, mapping) for ch in children),
                frozenset(mapping.get(l, l) for l in dis),
            )
    raise StructureError(f"not a structure: {d!r}")


def freshen(d: ArgStructure, used: frozenset[int]) -> ArgStructure:
    """Rename d's labels away from the used set, deterministically."""
    own = labels_of(d)
    clashing = sorted(own & used)
    if not clashing:
        return d
    nxt = max(used | own) + 1
    mapping = {}
    for l in clashing:
        mapping[l] = nxt
        nxt += 1
    return relabel(d, mapping)


def positions(d: ArgStructure, order: str = "post") -> list[tuple[int, ...]]:
    """Paths of all substructure positions; post order is innermost first."""
    out: list[tuple[int, ...]] = []

    def walk(node, path):
        if isinstance(node, EmptyTop):
            return
        if order == "pre":
            out.append(path)
        if isinstance(node, Inf):
            for i, ch in enumerate(node.children):
                walk(ch, path + (i,))
        if order == "post":
            out.append(path)

    walk(d, ())
    return out


def subtree_at(d: ArgStructure, path: tuple[int, ...]) -> ArgStructure:
    node = d
    for i in path:
        if not isinstance(node, Inf) or not 0 <= i < len(node.children):
            raise StructureError(f"no substructure at position {path}")
        node = node.children[i]
    return node


def cut_subtree(
    d: ArgStructure, path: tuple[int, ...]
) -> tuple[ArgStructure, list[tuple[int, frozenset[Formula]]]]:
    """The substructure at path as a standalone structure.

    Leaves whose discharge sits outside the subtree are opened up; the
    returned context list maps each such outer label to the formulas it
    bound, ordered from the nearest enclosing inference outward.
    """
    node = d
    ancestor_sets: list[frozenset[int]] = []
    for i in path:
        if not isinstance(node, Inf) or not 0 <= i < len(node.children):
            raise StructureError(f"no substructure at position {path}")
        ancestor_sets.append(node.discharges)
        node = node.children[i]
    if isinstance(node, EmptyTop):
        raise StructureError("an empty node is not a substructure")

    inner = set()
    for n in _walk(node):
        if isinstance(n, Inf):
            inner.update(n.discharges)
    outer_bound: dict[int, set[Formula]] = {}

    def strip(n):
        match n:
            case Assumption(f, lbl) if lbl is not None and lbl not in inner:
                outer_bound.setdefault(lbl, set()).add(f)
                return Assumption(f, None)
            case Inf(tag, c, children, dis):
                return Inf(tag, c, tuple(strip(ch) for ch in children), dis)
            case _:
                return n

    standalone = strip(node)
    context: list[tuple[int, frozenset[Formula]]] = []
    for dis in reversed(ancestor_sets):  # nearest enclosing inference first
        for l in sorted(dis):
            if l in outer_bound:
                context.append((l, frozenset(outer_bound[l])))
    stray = set(outer_bound) - {l for l, _ in context}
    if stray:
        raise StructureError(f"labels {sorted(stray)} have no discharging inference")
    return standalone, context


def _rebind(d: ArgStructure, context: list[tuple[int, frozenset[Formula]]]) -> ArgStructure:
    # open leaves matching a context-bound formula are recaptured by the
    # nearest enclosing label for it
    def capture(n):
        match n:
            case Assumption(f, None):
                for l, forms in context:
                    if f in forms:
                        return Assumption(f, l)
                return n
            case Inf(tag, c, children, dis):
                return Inf(tag, c, tuple(capture(ch) for ch in children), dis)
            case _:
                return n

    return capture(d)


def _graft(d: ArgStructure, path: tuple[int, ...], replacement: ArgStructure) -> ArgStructure:
    if not path:
        return replacement
    assert isinstance(d, Inf)
    i = path[0]
    children = list(d.children)
    children[i] = _graft(children[i], path[1:], replacement)
    return Inf(d.tag, d.conclusion, tuple(children), d.discharges)


def substitute(
    d: ArgStructure, path: tuple[int, ...], replacement: ArgStructure
) -> ArgStructure:
    """Replace the substructure at path, renaming labels to avoid capture.

    The replacement must share the target's conclusion and may not bring
    in open assumptions the target did not already have.
    """
    target, context = cut_subtree(d, path)
    if conclusion_of(replacement) != conclusion_of(target):
        raise ConclusionMismatch(
            f"replacement concludes {render_formula(conclusion_of(replacement))}, "
            f"target concludes {render_formula(conclusion_of(target))}"
        )
    extra = open_set(replacement) - open_set(target)
    if extra:
        names = ", ".join(sorted(render_formula(f) for f in extra))
        raise AssumptionEscape(f"replacement introduces open assumptions: {names}")
    fresh = freshen(replacement, labels_of(d))
    rebound = _rebind(fresh, context)
    out = _graft(d, path, rebound)
    check_structure(out)
    return out


def instantiate(d: ArgStructure, mapping: dict[Formula, ArgStructure]) -> ArgStructure:
    """Replace every open assumption leaf by the structure mapped to its formula."""
    info = analyze(d)
    missing = [f for f in info.open_assumptions if f not in mapping]
    if missing:
        names = ", ".join(sorted(render_formula(f) for f in missing))
        raise StructureError(f"no instance given for open assumptions: {names}")
    used = set(labels_of(d))
    images: dict[Formula, ArgStructure] = {}
    for f in sorted(info.open_assumptions, key=render_formula):
        img = mapping[f]
        if conclusion_of(img) != f:
            raise StructureError(
                f"instance for {render_formula(f)} concludes "
                f"{render_formula(conclusion_of(img))}"
            )
        img = freshen(img, frozenset(used))
        used |= labels_of(img)
        images[f] = img

    def repl(n):
        match n:
            case Assumption(f, None):
                return images[f]
            case Inf(tag, c, children, dis):
                return Inf(tag, c, tuple(repl(ch) for ch in children), dis)
            case _:
                return n

    out = repl(d)
    check_structure(out)
    return out


def _bound_leaf_formulas(d: Inf) -> set[Formula]:
    out = set()
    for n in _walk(d):
        if isinstance(n, Assumption) and n.label in d.discharges:
            out.add(n.formula)
    return out


def is_canonical(d: ArgStructure) -> bool:
    """Does the structure end with an introduction for its main connective?

    The check is by shape, not by tag: any inference whose premises and
    discharge fit one of the four introduction schemes counts.
    """
    if not isinstance(d, Inf):
        return False
    kids = d.children
    if any(isinstance(k, EmptyTop) for k in kids):
        return False
    match d.conclusion:
        case Conj(l, r):
            return (
                not d.discharges
                and len(kids) == 2
                and conclusion_of(kids[0]) == l
                and conclusion_of(kids[1]) == r
            )
        case Disj(l, r):
            return (
                not d.discharges
                and len(kids) == 1
                and conclusion_of(kids[0]) in (l, r)
            )
        case Impl(l, r):
            if len(kids) != 1 or conclusion_of(kids[0]) != r:
                return False
            return all(f == l for f in _bound_leaf_formulas(d))
        case _:
            return False


def immediate_substructures(d: ArgStructure) -> list[ArgStructure]:
    """The premise subtrees as standalone structures (discharges opened up)."""
    if not isinstance(d, Inf):
        return []
    out = []
    for i, ch in enumerate(d.children):
        if isinstance(ch, EmptyTop):
            continue
        sub, _ = cut_subtree(d, (i,))
        out.append(sub)
    return out


def canonical_form(d: ArgStructure) -> ArgStructure:
    """Rename labels into a first-use numbering so equal-up-to-relabelling
    structures become identical."""
    first_leaf: dict[int, int] = {}
    first_node: dict[int, int] = {}
    idx = 0

    def scan(n):
        nonlocal idx
        my = idx
        idx += 1
        match n:
            case Assumption(_, lbl) if lbl is not None:
                first_leaf.setdefault(lbl, my)
            case Inf(_, _, children, dis):
                for l in dis:
                    first_node.setdefault(l, my)
                for ch in children:
                    scan(ch)
            case _:
                pass

    scan(d)
    labels = set(first_leaf) | set(first_node)
    big = 1 << 30
    ordered = sorted(labels, key=lambda l: (first_leaf.get(l, big), first_node.get(l, big), l))
    return relabel(d, {l: i + 1 for i, l in enumerate(ordered)})


def structures_equal(d1: ArgStructure, d2: ArgStructure) -> bool:
    """Equality up to renaming of discharge labels."""
    return canonical_form(d1) == canonical_form(d2)


def canonical_key(d: ArgStructure) -> str:
    """A stable text key identifying d up to label renaming."""
    return render_structure(canonical_form(d))


# ---------------------------------------------------------------------------
# text form:  (assume "a & b" :label 1) | (empty)
#             (inf orE "c" (child) ... :discharge (1 2))


def render_structure(d: ArgStructure) -> str:
    match d:
        case Assumption(f, lbl):
            tail = f" :label {lbl}" if lbl is not None else ""
            return f'(assume "{render_formula(f)}"{tail})'
        case EmptyTop():
            return "(empty)"
        case Inf(tag, c, children, dis):
            parts = ["inf", tag, f'"{render_formula(c)}"']
            parts.extend(render_structure(ch) for ch in children)
            if dis:
                parts.append(":discharge (" + " ".join(str(l) for l in sorted(dis)) + ")")
            return "(" + " ".join(parts) + ")"
    raise StructureError(f"not a structure: {d!r}")


def _structure_from_sexpr(x) -> ArgStructure:
    if not isinstance(x, list) or not x or not isinstance(x[0], Sym):
        raise StructureError(f"expected a structure form, got {x!r}")
    head = x[0].text
    if head == "empty":
        if len(x) != 1:
            raise StructureError("(empty) takes no arguments")
        return EmptyTop()
    if head == "assume":
        if len(x) < 2 or not isinstance(x[1], str):
            raise StructureError("(assume ...) needs a quoted formula")
        label = None
        rest = x[2:]
        if rest:
            if len(rest) != 2 or rest[0] != Sym(":label") or not isinstance(rest[1], int):
                raise StructureError("(assume ...) options: :label N")
            label = rest[1]
        return Assumption(parse_formula(x[1]), label)
    if head == "inf":
        if len(x) < 3 or not isinstance(x[1], Sym) or not isinstance(x[2], str):
            raise StructureError("(inf TAG \"FORMULA\" CHILD...) expected")
        tag = x[1].text
        concl = parse_formula(x[2])
        rest = list(x[3:])
        discharges: frozenset[int] = frozenset()
        if Sym(":discharge") in rest:
            k = rest.index(Sym(":discharge"))
            spec = rest[k + 1 :]
            if len(spec) != 1 or not isinstance(spec[0], list) or not all(
                isinstance(i, int) for i in spec[0]
            ):
                raise StructureError(":discharge needs a list of integer labels")
            discharges = frozenset(spec[0])
            rest = rest[:k]
        children = tuple(_structure_from_sexpr(c) for c in rest)
        return Inf(tag, concl, children, discharges)
    raise StructureError(f"unknown structure form {head!r}")


def parse_structure(text: str) -> ArgStructure:
    try:
        x = read_sexpr(text)
    except SexprError as e:
        raise StructureError(str(e)) from None
    d = _structure_from_sexpr(x)
    check_structure(d)
    return d


def parse_structures(text: str) -> list[ArgStructure]:
    """Read every structure in the text (e.g. a pool file)."""
    try:
        forms = read_all_sexprs(text)
    except SexprError as e:
        raise StructureError(str(e)) from None
    out = []
    for x in forms:
        d = _structure_from_sexpr(x)
        check_structure(d)
        out.append(d)
    return out
