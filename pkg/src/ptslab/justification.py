"""Justifications: rewrite devices on argument structures.

Three realizations share one contract (output keeps the conclusion and
may only shrink the open assumptions):

  * SchematicRewrite -- pattern => template clauses over formula (?A),
    structure (?D) and discharge-label (?l) metavariables; closed under
    instantiation by construction.
  * ConstantMap -- a finite table of structure pairs.
  * ChoiceFunction -- selects a justification set per (structure, base).

A justification set induces one-step rewriting anywhere inside a
structure; an RSystem is the graph reading, a stored set of whole
structure pairs stepped at the root. Both feed one bounded search
engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Union

from .argument import (
    ArgStructure,
    Assumption,
    EmptyTop,
    Inf,
    StructureError,
    canonical_form,
    canonical_key,
    check_structure,
    conclusion_of,
    cut_subtree,
    freshen,
    instantiate,
    labels_of,
    open_set,
    positions,
    render_structure,
    size_of,
    structures_equal,
    substitute,
)
from .formula import (
    Atom,
    Conj,
    Disj,
    Formula,
    FormulaError,
    FVar,
    Impl,
    parse_formula,
    render_formula,
)
from .sexpr import SexprError, Sym, read_sexpr

__all__ = [
    "JustificationError",
    "JustificationContractError",
    "PVar",
    "PAssume",
    "PEmpty",
    "PInf",
    "DSpec",
    "TVar",
    "TAssume",
    "TEmpty",
    "TInf",
    "TPlug",
    "SchematicRewrite",
    "ConstantMap",
    "ChoiceFunction",
    "Justification",
    "JustificationSet",
    "RSystem",
    "StepSource",
    "apply_justification",
    "step_candidates",
    "reach",
    "reduces",
    "graph_of",
    "check_closure",
    "is_schematic",
    "parse_rules",
    "or_detour",
    "em_refutation_rule",
]


class JustificationError(ValueError):
    pass


class JustificationContractError(JustificationError):
    """Output broke the same-conclusion / no-new-assumptions contract."""


# ---------------------------------------------------------------------------
# patterns and templates


@dataclass(frozen=True)
class PVar:
    name: str
    concludes: Formula | FVar | None = None


@dataclass(frozen=True)
class PAssume:
    formula: Formula | FVar
    labelvar: str | None = None


@dataclass(frozen=True)
class PEmpty:
    pass


@dataclass(frozen=True)
class DSpec:
    labelvar: str
    formula: Formula | FVar | None = None


@dataclass(frozen=True)
class PInf:
    tag: str
    conclusion: Formula | FVar
    children: tuple["Pattern", ...]
    discharge: tuple[DSpec, ...] = ()


Pattern = Union[PVar, PAssume, PEmpty, PInf]


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TAssume:
    formula: Formula | FVar
    labelvar: str | None = None


@dataclass(frozen=True)
class TEmpty:
    pass


@dataclass(frozen=True)
class TInf:
    tag: str
    conclusion: Formula | FVar
    children: tuple["Template", ...]
    discharge: tuple[str, ...] = ()


@dataclass(frozen=True)
class TPlug:
    """Insert the filler at every leaf of `source` carrying label `labelvar`."""

    source: str
    labelvar: str
    filler: "Template"


Template = Union[TVar, TAssume, TEmpty, TInf, TPlug]


class _Bindings:
    __slots__ = ("fvars", "svars", "lvars")

    def __init__(self, fvars=None, svars=None, lvars=None):
        self.fvars: dict[str, Formula] = fvars or {}
        self.svars: dict[str, ArgStructure] = svars or {}
        self.lvars: dict[str, int] = lvars or {}

    def copy(self) -> "_Bindings":
        return _Bindings(dict(self.fvars), dict(self.svars), dict(self.lvars))


def _match_formula(pat, f: Formula, b: _Bindings) -> bool:
    match pat:
        case FVar(name):
            if name in b.fvars:
                return b.fvars[name] == f
            b.fvars[name] = f
            return True
        case Atom():
            return pat == f
        case Conj(l, r):
            return isinstance(f, Conj) and _match_formula(l, f.left, b) and _match_formula(r, f.right, b)
        case Disj(l, r):
            return isinstance(f, Disj) and _match_formula(l, f.left, b) and _match_formula(r, f.right, b)
        case Impl(l, r):
            return isinstance(f, Impl) and _match_formula(l, f.left, b) and _match_formula(r, f.right, b)
    raise JustificationError(f"bad formula pattern {pat!r}")


def _subst_formula(pat, b: _Bindings) -> Formula:
    match pat:
        case FVar(name):
            try:
                return b.fvars[name]
            except KeyError:
                raise JustificationError(f"unbound formula variable ?{name}") from None
        case Atom():
            return pat
        case Conj(l, r):
            return Conj(_subst_formula(l, b), _subst_formula(r, b))
        case Disj(l, r):
            return Disj(_subst_formula(l, b), _subst_formula(r, b))
        case Impl(l, r):
            return Impl(_subst_formula(l, b), _subst_formula(r, b))
    raise JustificationError(f"bad formula template {pat!r}")


def _leaves_with_label(d: ArgStructure, label: int) -> list[Assumption]:
    out = []

    def walk(n):
        match n:
            case Assumption(_, l) if l == label:
                out.append(n)
            case Inf(_, _, children, _):
                for ch in children:
                    walk(ch)
            case _:
                pass

    walk(d)
    return out


def _match(pat: Pattern, d: ArgStructure, b: _Bindings) -> _Bindings | None:
    match pat:
        case PVar(name, concludes):
            if isinstance(d, EmptyTop):
                return None
            if concludes is not None and not _match_formula(concludes, conclusion_of(d), b):
                return None
            if name in b.svars:
                return b if structures_equal(b.svars[name], d) else None
            b.svars[name] = d
            return b
        case PEmpty():
            return b if isinstance(d, EmptyTop) else None
        case PAssume(fpat, labelvar):
            if not isinstance(d, Assumption):
                return None
            if labelvar is None:
                if d.label is not None:
                    return None
            else:
                if d.label is None:
                    return None
                if labelvar in b.lvars:
                    if b.lvars[labelvar] != d.label:
                        return None
                else:
                    b.lvars[labelvar] = d.label
            return b if _match_formula(fpat, d.formula, b) else None
        case PInf(tag, cpat, children, dspecs):
            if not isinstance(d, Inf) or d.tag != tag or len(d.children) != len(children):
                return None
            if len(d.discharges) != len(dspecs):
                return None
            if not _match_formula(cpat, d.conclusion, b):
                return None
            for cp, ch in zip(children, d.children):
                got = _match(cp, ch, b)
                if got is None:
                    return None
                b = got
            if not dspecs:
                return b
            for perm in itertools.permutations(sorted(d.discharges)):
                trial = b.copy()
                ok = True
                for spec, label in zip(dspecs, perm):
                    if spec.labelvar in trial.lvars:
                        if trial.lvars[spec.labelvar] != label:
                            ok = False
                            break
                    else:
                        trial.lvars[spec.labelvar] = label
                    if spec.formula is not None:
                        for leaf in _leaves_with_label(d, label):
                            if not _match_formula(spec.formula, leaf.formula, trial):
                                ok = False
                                break
                    if not ok:
                        break
                if ok:
                    return trial
            return None
    raise JustificationError(f"bad pattern {pat!r}")


class _LabelAlloc:
    def __init__(self, start: int):
        self.next = start

    def take(self) -> int:
        n = self.next
        self.next += 1
        return n


def _plug(tree: ArgStructure, label: int, fill: ArgStructure) -> ArgStructure:
    fill = freshen(fill, labels_of(tree))

    def go(n):
        match n:
            case Assumption(_, l) if l == label:
                return fill
            case Inf(tag, c, children, dis):
                return Inf(tag, c, tuple(go(ch) for ch in children), dis)
            case _:
                return n

    return go(tree)


def _build(t: Template, b: _Bindings, alloc: _LabelAlloc) -> ArgStructure:
    match t:
        case TVar(name):
            try:
                return b.svars[name]
            except KeyError:
                raise JustificationError(f"unbound structure variable ?{name}") from None
        case TEmpty():
            return EmptyTop()
        case TAssume(fpat, labelvar):
            lbl = None
            if labelvar is not None:
                if labelvar not in b.lvars:
                    b.lvars[labelvar] = alloc.take()
                lbl = b.lvars[labelvar]
            return Assumption(_subst_formula(fpat, b), lbl)
        case TInf(tag, cpat, children, discharge):
            labels = []
            for lv in discharge:
                if lv not in b.lvars:
                    b.lvars[lv] = alloc.take()
                labels.append(b.lvars[lv])
            kids = tuple(_build(ch, b, alloc) for ch in children)
            return Inf(tag, _subst_formula(cpat, b), kids, frozenset(labels))
        case TPlug(source, labelvar, filler):
            try:
                tree = b.svars[source]
                label = b.lvars[labelvar]
            except KeyError as e:
                raise JustificationError(f"plug refers to unbound variable {e}") from None
            return _plug(tree, label, _build(filler, b, alloc))
    raise JustificationError(f"bad template {t!r}")


def _pattern_vars(pat: Pattern) -> tuple[set[str], set[str], set[str]]:
    fv: set[str] = set()
    sv: set[str] = set()
    lv: set[str] = set()

    def fwalk(fp):
        match fp:
            case FVar(name):
                fv.add(name)
            case Conj(l, r) | Disj(l, r) | Impl(l, r):
                fwalk(l)
                fwalk(r)
            case _:
                pass

    def walk(p):
        match p:
            case PVar(name, concludes):
                sv.add(name)
                if concludes is not None:
                    fwalk(concludes)
            case PAssume(fpat, labelvar):
                fwalk(fpat)
                if labelvar:
                    lv.add(labelvar)
            case PInf(_, cpat, children, dspecs):
                fwalk(cpat)
                for spec in dspecs:
                    lv.add(spec.labelvar)
                    if spec.formula is not None:
                        fwalk(spec.formula)
                for ch in children:
                    walk(ch)
            case _:
                pass

    walk(pat)
    return fv, sv, lv


def _template_vars(t: Template) -> tuple[set[str], set[str]]:
    fv: set[str] = set()
    sv: set[str] = set()

    def fwalk(fp):
        match fp:
            case FVar(name):
                fv.add(name)
            case Conj(l, r) | Disj(l, r) | Impl(l, r):
                fwalk(l)
                fwalk(r)
            case _:
                pass

    def walk(tt):
        match tt:
            case TVar(name):
                sv.add(name)
            case TAssume(fpat, _):
                fwalk(fpat)
            case TInf(_, cpat, children, _):
                fwalk(cpat)
                for ch in children:
                    walk(ch)
            case TPlug(source, _, filler):
                sv.add(source)
                walk(filler)
            case _:
                pass

    walk(t)
    return fv, sv


def _count_svar_uses(pat: Pattern) -> dict[str, int]:
    counts: dict[str, int] = {}

    def walk(p):
        match p:
            case PVar(name, _):
                counts[name] = counts.get(name, 0) + 1
            case PInf(_, _, children, _):
                for ch in children:
                    walk(ch)
            case _:
                pass

    walk(pat)
    return counts


# ---------------------------------------------------------------------------
# the three justification kinds


@dataclass(frozen=True)
class SchematicRewrite:
    """A named rewrite rule; clauses are tried in order, first match applies."""

    name: str
    clauses: tuple[tuple[Pattern, Template], ...]

    def __post_init__(self):
        if not self.clauses:
            raise JustificationError(f"rule {self.name}: no clauses")
        for pat, tmpl in self.clauses:
            pfv, psv, _plv = _pattern_vars(pat)
            for v, n in _count_svar_uses(pat).items():
                if n > 1:
                    raise JustificationError(
                        f"rule {self.name}: structure variable ?{v} bound {n} times (patterns are linear)"
                    )
            tfv, tsv = _template_vars(tmpl)
            if not tfv <= pfv:
                raise JustificationError(
                    f"rule {self.name}: template formula variables {sorted(tfv - pfv)} unbound"
                )
            if not tsv <= psv:
                raise JustificationError(
                    f"rule {self.name}: template structure variables {sorted(tsv - psv)} unbound"
                )


@dataclass(frozen=True)
class ConstantMap:
    """A finite table of rewrites, looked up modulo label renaming."""

    name: str
    pairs: tuple[tuple[ArgStructure, ArgStructure], ...]

    def __post_init__(self):
        index: dict[str, tuple[ArgStructure, ArgStructure]] = {}
        for k, v in self.pairs:
            key = canonical_key(k)
            if key in index and not structures_equal(index[key][1], v):
                raise JustificationError(f"table {self.name}: two images for one structure")
            index[key] = (k, v)
        object.__setattr__(self, "_index", index)

    def lookup(self, d: ArgStructure) -> ArgStructure | None:
        hit = self._index.get(canonical_key(d))
        return hit[1] if hit else None


@dataclass(frozen=True)
class ChoiceFunction:
    """Selects a justification set per (structure, base id) pair."""

    name: str
    table: dict[tuple[str, str], "JustificationSet"]

    def selection(self, d: ArgStructure, base_id: str) -> "JustificationSet | None":
        return self.table.get((canonical_key(d), base_id))


Justification = Union[SchematicRewrite, ConstantMap, ChoiceFunction]


@dataclass(frozen=True)
class JustificationSet:
    members: tuple[Justification, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.members, key=lambda j: j.name))
        names = [j.name for j in ordered]
        if len(set(names)) != len(names):
            raise JustificationError(f"duplicate justification names: {names}")
        object.__setattr__(self, "members", ordered)

    def union(self, other: "JustificationSet") -> "JustificationSet":
        byname = {j.name: j for j in self.members}
        for j in other.members:
            if j.name in byname:
                if byname[j.name] != j:
                    raise JustificationError(f"conflicting justifications named {j.name}")
            else:
                byname[j.name] = j
        return JustificationSet(tuple(byname.values()))

    def __or__(self, other):
        return self.union(other)

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class RSystem:
    """A set of whole-structure reduction pairs, stepped at the root."""

    pairs: tuple[tuple[ArgStructure, ArgStructure], ...] = ()

    def __post_init__(self):
        seen = set()
        kept = []
        for a, z in self.pairs:
            if conclusion_of(z) != conclusion_of(a):
                raise JustificationContractError(
                    f"reduction pair changes the conclusion: "
                    f"{render_formula(conclusion_of(a))} vs {render_formula(conclusion_of(z))}"
                )
            extra = open_set(z) - open_set(a)
            if extra:
                raise JustificationContractError(
                    "reduction pair introduces assumptions: "
                    + ", ".join(sorted(render_formula(f) for f in extra))
                )
            key = (canonical_key(a), canonical_key(z))
            if key not in seen:
                seen.add(key)
                kept.append((a, z))
        object.__setattr__(self, "pairs", tuple(kept))

    def union(self, other: "RSystem") -> "RSystem":
        return RSystem(self.pairs + other.pairs)

    def __or__(self, other):
        return self.union(other)

    def __len__(self):
        return len(self.pairs)


StepSource = Union[JustificationSet, RSystem]


def _check_contract(name: str, din: ArgStructure, dout: ArgStructure) -> None:
    try:
        check_structure(dout)
    except StructureError as e:
        raise JustificationContractError(f"{name}: malformed output: {e}") from None
    if conclusion_of(dout) != conclusion_of(din):
        raise JustificationContractError(
            f"{name}: conclusion changed from {render_formula(conclusion_of(din))} "
            f"to {render_formula(conclusion_of(dout))}"
        )
    extra = open_set(dout) - open_set(din)
    if extra:
        raise JustificationContractError(
            f"{name}: new open assumptions "
            + ", ".join(sorted(render_formula(f) for f in extra))
        )


def _apply_rewrite(rule: SchematicRewrite, d: ArgStructure) -> ArgStructure | None:
    for pat, tmpl in rule.clauses:
        b = _match(pat, d, _Bindings())
        if b is None:
            continue
        alloc = _LabelAlloc(max(labels_of(d), default=0) + 1)
        out = _build(tmpl, b, alloc)
        _check_contract(rule.name, d, out)
        return out
    return None


def apply_justification(
    j: Justification, d: ArgStructure, base: "str | None" = None
) -> ArgStructure | None:
    """Apply j to the whole structure d; None when d is outside j's domain."""
    match j:
        case SchematicRewrite():
            return _apply_rewrite(j, d)
        case ConstantMap():
            out = j.lookup(d)
            if out is None:
                return None
            _check_contract(j.name, d, out)
            return out
        case ChoiceFunction():
            if base is None:
                raise JustificationError(f"choice function {j.name} needs a base id")
            sel = j.selection(d, base)
            if sel is None:
                return None
            for member in sel.members:
                out = apply_justification(member, d, base)
                if out is not None:
                    return out
            return None
    raise JustificationError(f"not a justification: {j!r}")


# ---------------------------------------------------------------------------
# one-step rewriting and bounded reduction search


def step_candidates(
    src: StepSource, d: ArgStructure, base: str | None = None
) -> list[ArgStructure]:
    """All one-step reducts, innermost-leftmost positions first."""
    out: list[ArgStructure] = []
    seen: set[str] = set()
    if isinstance(src, RSystem):
        key = canonical_key(d)
        for a, z in src.pairs:
            if canonical_key(a) == key:
                k = canonical_key(z)
                if k not in seen:
                    seen.add(k)
                    out.append(z)
        return out
    for pos in positions(d, "post"):
        sub, _ctx = cut_subtree(d, pos)
        for j in src.members:
            try:
                r = apply_justification(j, sub, base)
            except JustificationContractError:
                continue
            if r is None:
                continue
            nxt = substitute(d, pos, r)
            k = canonical_key(nxt)
            if k not in seen:
                seen.add(k)
                out.append(nxt)
    return out


def reach(
    src: StepSource,
    start: ArgStructure,
    base: str | None = None,
    max_steps: int = 10,
    max_size: int = 400,
) -> tuple[list[tuple[ArgStructure, int]], bool]:
    """Breadth-first reducts with depths, plus a flag set when a bound cut
    the search off (depth cap with work left, or an oversize reduct)."""
    reached = [(start, 0)]
    seen = {canonical_key(start)}
    frontier = [start]
    bound_hit = False
    depth = 0
    while frontier and depth < max_steps:
        depth += 1
        nxt = []
        for d in frontier:
            for c in step_candidates(src, d, base):
                if size_of(c) > max_size:
                    bound_hit = True
                    continue
                k = canonical_key(c)
                if k in seen:
                    continue
                seen.add(k)
                reached.append((c, depth))
                nxt.append(c)
        frontier = nxt
    # the depth cap only matters if the last frontier still had somewhere to go
    for d in frontier:
        if bound_hit:
            break
        for c in step_candidates(src, d, base):
            if size_of(c) > max_size or canonical_key(c) not in seen:
                bound_hit = True
                break
    return reached, bound_hit


def reduces(
    src: StepSource,
    frm: ArgStructure,
    to: ArgStructure,
    max_steps: int,
    base: str | None = None,
) -> bool:
    """Is there a chain of at most max_steps one-step rewrites from frm to to?
    Zero steps count: a structure reduces to itself."""
    target = canonical_key(to)
    reached, _ = reach(src, frm, base, max_steps=max_steps, max_size=1 << 30)
    return any(canonical_key(d) == target for d, _depth in reached)


def graph_of(j: Justification, domain: Iterable[ArgStructure], base: str | None = None) -> RSystem:
    """The graph of j over the domain, as a reduction system."""
    pairs = []
    for d in domain:
        out = apply_justification(j, d, base)
        if out is None:
            raise JustificationError(f"{j.name} is not defined on {render_structure(d)}")
        pairs.append((d, out))
    return RSystem(tuple(pairs))


def check_closure(
    j: Justification,
    samples: Iterable[tuple[ArgStructure, dict[Formula, ArgStructure]]],
    base: str | None = None,
) -> bool:
    """Is j closed under instantiation on these samples?

    For each (d, sigma): applying j to the sigma-instance of d must be
    defined and must equal the sigma-instance of j's output on d.
    """
    for d, sigma in samples:
        out = apply_justification(j, d, base)
        if out is None:
            return False
        inst = instantiate(d, sigma)
        lhs = apply_justification(j, inst, base)
        if lhs is None:
            return False
        rhs = instantiate(out, sigma)
        if not structures_equal(lhs, rhs):
            return False
    return True


# ---------------------------------------------------------------------------
# schematicity


def _lvar_for(label: int) -> str:
    return f"L{label}"


def _struct_to_pattern(d: ArgStructure) -> Pattern:
    match d:
        case Assumption(f, lbl):
            return PAssume(f, _lvar_for(lbl) if lbl is not None else None)
        case EmptyTop():
            return PEmpty()
        case Inf(tag, c, children, dis):
            return PInf(
                tag,
                c,
                tuple(_struct_to_pattern(ch) for ch in children),
                tuple(DSpec(_lvar_for(l)) for l in sorted(dis)),
            )
    raise JustificationError(f"not a structure: {d!r}")


def _struct_to_template(d: ArgStructure) -> Template:
    match d:
        case Assumption(f, lbl):
            return TAssume(f, _lvar_for(lbl) if lbl is not None else None)
        case EmptyTop():
            return TEmpty()
        case Inf(tag, c, children, dis):
            return TInf(
                tag,
                c,
                tuple(_struct_to_template(ch) for ch in children),
                tuple(_lvar_for(l) for l in sorted(dis)),
            )
    raise JustificationError(f"not a structure: {d!r}")


class _Gen:
    """Shared anti-unification state: one variable per generalized pair."""

    def __init__(self):
        self.fmemo: dict[tuple, str] = {}
        self.smemo: dict[tuple, str] = {}

    def fvar(self, a, z) -> FVar:
        key = (repr(a), repr(z))
        if key not in self.fmemo:
            self.fmemo[key] = f"G{len(self.fmemo) + len(self.smemo)}"
        return FVar(self.fmemo[key])

    def svar(self, a, z) -> str:
        key = (repr(a), repr(z))
        if key not in self.smemo:
            self.smemo[key] = f"G{len(self.fmemo) + len(self.smemo)}"
        return self.smemo[key]


def _gen_formula(p, f: Formula, g: _Gen):
    if isinstance(p, FVar):
        return p
    match p, f:
        case (Atom(), Atom()) if p == f:
            return p
        case (Conj(a, b), Conj(x, y)):
            return Conj(_gen_formula(a, x, g), _gen_formula(b, y, g))
        case (Disj(a, b), Disj(x, y)):
            return Disj(_gen_formula(a, x, g), _gen_formula(b, y, g))
        case (Impl(a, b), Impl(x, y)):
            return Impl(_gen_formula(a, x, g), _gen_formula(b, y, g))
    return g.fvar(p, f)


def _gen_pattern(p: Pattern, d: ArgStructure, g: _Gen) -> Pattern:
    match p, d:
        case (PAssume(fp, lv), Assumption(f, lbl)) if lv == (_lvar_for(lbl) if lbl is not None else None):
            return PAssume(_gen_formula(fp, f, g), lv)
        case (PEmpty(), EmptyTop()):
            return p
        case (PInf(tag, cp, children, dspecs), Inf(tag2, c, kids, dis)) if (
            tag == tag2
            and len(children) == len(kids)
            and tuple(s.labelvar for s in dspecs) == tuple(_lvar_for(l) for l in sorted(dis))
        ):
            return PInf(
                tag,
                _gen_formula(cp, c, g),
                tuple(_gen_pattern(cp2, k2, g) for cp2, k2 in zip(children, kids)),
                dspecs,
            )
        case _:
            return PVar(g.svar(p, d))


def _gen_template(t: Template, d: ArgStructure, g: _Gen) -> Template:
    match t, d:
        case (TAssume(fp, lv), Assumption(f, lbl)) if lv == (_lvar_for(lbl) if lbl is not None else None):
            return TAssume(_gen_formula(fp, f, g), lv)
        case (TEmpty(), EmptyTop()):
            return t
        case (TInf(tag, cp, children, dlv), Inf(tag2, c, kids, dis)) if (
            tag == tag2
            and len(children) == len(kids)
            and dlv == tuple(_lvar_for(l) for l in sorted(dis))
        ):
            return TInf(
                tag,
                _gen_formula(cp, c, g),
                tuple(_gen_template(t2, k2, g) for t2, k2 in zip(children, kids)),
                dlv,
            )
        case _:
            return TVar(g.svar(t, d))


def _table_is_schematic(cm: ConstantMap) -> bool:
    entries = sorted(
        ((canonical_form(k), canonical_form(v)) for k, v in cm.pairs),
        key=lambda kv: canonical_key(kv[0]),
    )
    if len(entries) < 2:
        # a lone ground pair is a table entry, not a rewriting scheme
        return False
    k0, v0 = entries[0]
    pat: Pattern = _struct_to_pattern(k0)
    tmpl: Template = _struct_to_template(v0)
    for k, v in entries[1:]:
        g = _Gen()
        pat = _gen_pattern(pat, k, g)
        tmpl = _gen_template(tmpl, v, g)
    tfv, tsv = _template_vars(tmpl)
    pfv, psv, _ = _pattern_vars(pat)
    if not (tfv <= pfv and tsv <= psv):
        return False  # the output is not a function of the matched parts
    for v, n in _count_svar_uses(pat).items():
        if n > 1:
            return False
    rule = SchematicRewrite(cm.name + "~scheme", ((pat, tmpl),))
    for k, v in entries:
        try:
            out = _apply_rewrite(rule, k)
        except JustificationContractError:
            return False
        if out is None or not structures_equal(out, v):
            return False
    return True


def is_schematic(j: Justification) -> bool:
    """Is j expressible as a base-independent structure-rewriting rule?

    Rewrite rules are schematic outright; choice functions are not (they
    are defined on structure/base pairs, not structures). A finite table
    counts only when anti-unifying its pairs yields a single rewrite
    scheme whose instances reproduce exactly the table.
    """
    match j:
        case SchematicRewrite():
            return True
        case ChoiceFunction():
            return False
        case ConstantMap():
            return _table_is_schematic(j)
    raise JustificationError(f"not a justification: {j!r}")


# ---------------------------------------------------------------------------
# rule files:  name: PATTERN => TEMPLATE      (repeated names merge clauses)


def _formula_pat(text: str):
    return parse_formula(text, metavars=True)


def _meta_name(x) -> str | None:
    if isinstance(x, Sym) and x.text.startswith("?"):
        return x.text[1:]
    return None


def _pattern_from_sexpr(x) -> Pattern:
    name = _meta_name(x)
    if name:
        return PVar(name)
    if not isinstance(x, list) or not x:
        raise JustificationError(f"bad pattern {x!r}")
    head = _meta_name(x[0])
    if head:
        # (?D :concludes "F")
        if len(x) == 3 and x[1] == Sym(":concludes") and isinstance(x[2], str):
            return PVar(head, _formula_pat(x[2]))
        raise JustificationError(f"bad structure-variable pattern {x!r}")
    if not isinstance(x[0], Sym):
        raise JustificationError(f"bad pattern {x!r}")
    kind = x[0].text
    if kind == "empty":
        return PEmpty()
    if kind == "assume":
        if len(x) < 2 or not isinstance(x[1], str):
            raise JustificationError("(assume ...) needs a quoted formula")
        lv = None
        rest = x[2:]
        if rest:
            if len(rest) != 2 or rest[0] != Sym(":label") or _meta_name(rest[1]) is None:
                raise JustificationError("(assume ...) pattern options: :label ?l")
            lv = _meta_name(rest[1])
        return PAssume(_formula_pat(x[1]), lv)
    if kind == "inf":
        if len(x) < 3 or not isinstance(x[1], Sym) or not isinstance(x[2], str):
            raise JustificationError('(inf TAG "FORMULA" CHILD...) expected')
        rest = list(x[3:])
        dspecs: tuple[DSpec, ...] = ()
        if Sym(":discharge") in rest:
            k = rest.index(Sym(":discharge"))
            spec = rest[k + 1 :]
            if len(spec) != 1 or not isinstance(spec[0], list):
                raise JustificationError(":discharge needs a list")
            specs = []
            for item in spec[0]:
                if _meta_name(item):
                    specs.append(DSpec(_meta_name(item)))
                elif (
                    isinstance(item, list)
                    and len(item) == 2
                    and _meta_name(item[0])
                    and isinstance(item[1], str)
                ):
                    specs.append(DSpec(_meta_name(item[0]), _formula_pat(item[1])))
                else:
                    raise JustificationError(f"bad discharge spec {item!r}")
            dspecs = tuple(specs)
            rest = rest[:k]
        children = tuple(_pattern_from_sexpr(c) for c in rest)
        return PInf(x[1].text, _formula_pat(x[2]), children, dspecs)
    raise JustificationError(f"unknown pattern form {kind!r}")


def _template_from_sexpr(x) -> Template:
    name = _meta_name(x)
    if name:
        return TVar(name)
    if not isinstance(x, list) or not x or not isinstance(x[0], Sym):
        raise JustificationError(f"bad template {x!r}")
    kind = x[0].text
    if kind == "empty":
        return TEmpty()
    if kind == "plug":
        if len(x) != 4 or not _meta_name(x[1]) or not _meta_name(x[2]):
            raise JustificationError("(plug ?D ?l TEMPLATE) expected")
        return TPlug(_meta_name(x[1]), _meta_name(x[2]), _template_from_sexpr(x[3]))
    if kind == "assume":
        if len(x) < 2 or not isinstance(x[1], str):
            raise JustificationError("(assume ...) needs a quoted formula")
        lv = None
        rest = x[2:]
        if rest:
            if len(rest) != 2 or rest[0] != Sym(":label") or _meta_name(rest[1]) is None:
                raise JustificationError("(assume ...) template options: :label ?l")
            lv = _meta_name(rest[1])
        return TAssume(_formula_pat(x[1]), lv)
    if kind == "inf":
        if len(x) < 3 or not isinstance(x[1], Sym) or not isinstance(x[2], str):
            raise JustificationError('(inf TAG "FORMULA" CHILD...) expected')
        rest = list(x[3:])
        dlvars: tuple[str, ...] = ()
        if Sym(":discharge") in rest:
            k = rest.index(Sym(":discharge"))
            spec = rest[k + 1 :]
            if len(spec) != 1 or not isinstance(spec[0], list) or not all(
                _meta_name(i) for i in spec[0]
            ):
                raise JustificationError(":discharge needs a list of ?l variables")
            dlvars = tuple(_meta_name(i) for i in spec[0])
            rest = rest[:k]
        children = tuple(_template_from_sexpr(c) for c in rest)
        return TInf(x[1].text, _formula_pat(x[2]), children, dlvars)
    raise JustificationError(f"unknown template form {kind!r}")


def _split_arrow(line: str, lineno: int) -> tuple[str, str]:
    in_str = False
    i = 0
    while i < len(line) - 1:
        c = line[i]
        if c == '"' and (i == 0 or line[i - 1] != "\\"):
            in_str = not in_str
        elif not in_str and line[i] == "=" and line[i + 1] == ">":
            return line[:i], line[i + 2 :]
        i += 1
    raise JustificationError(f"line {lineno}: expected 'name: PATTERN => TEMPLATE'")


def parse_rules(text: str) -> JustificationSet:
    """Parse a rewrite-rule file into a set of schematic rewrites."""
    clauses: dict[str, list[tuple[Pattern, Template]]] = {}
    order: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        name, colon, body = line.partition(":")
        if not colon or not name.strip():
            raise JustificationError(f"line {lineno}: expected 'name: PATTERN => TEMPLATE'")
        name = name.strip()
        lhs, rhs = _split_arrow(body, lineno)
        try:
            pat = _pattern_from_sexpr(read_sexpr(lhs))
            tmpl = _template_from_sexpr(read_sexpr(rhs))
        except (SexprError, FormulaError, StructureError, JustificationError) as e:
            raise JustificationError(f"line {lineno}: {e}") from None
        if name not in clauses:
            clauses[name] = []
            order.append(name)
        clauses[name].append((pat, tmpl))
    return JustificationSet(
        tuple(SchematicRewrite(n, tuple(clauses[n])) for n in order)
    )


_OR_DETOUR_TEXT = """
or_detour: (inf orE "?B" (inf orI1 "?A1 | ?A2" (?D1 :concludes "?A1")) (?D2 :concludes "?B") (?D3 :concludes "?B") :discharge ((?l1 "?A1") (?l2 "?A2"))) => (plug ?D2 ?l1 ?D1)
or_detour: (inf orE "?B" (inf orI2 "?A1 | ?A2" (?D1 :concludes "?A2")) (?D2 :concludes "?B") (?D3 :concludes "?B") :discharge ((?l1 "?A1") (?l2 "?A2"))) => (plug ?D3 ?l2 ?D1)
"""

_EM_REFUTE_TEXT = """
em_refute: (inf ax "?A | ~?A" (empty)) => (inf orI2 "?A | ~?A" (inf impI "~?A" (inf step "_|_" (assume "?A" :label ?l)) :discharge (?l)))
"""

_cache: dict[str, SchematicRewrite] = {}


def or_detour() -> SchematicRewrite:
    """Removes a disjunction detour: an elimination whose major premise was
    just introduced collapses onto the matching case branch."""
    if "or" not in _cache:
        _cache["or"] = parse_rules(_OR_DETOUR_TEXT).members[0]
    return _cache["or"]


def em_refutation_rule() -> SchematicRewrite:
    """Rewrites an excluded-middle axiom node to the right-injection form
    built over a vacuous refutation of the left disjunct."""
    if "em" not in _cache:
        _cache["em"] = parse_rules(_EM_REFUTE_TEXT).members[0]
    return _cache["em"]
