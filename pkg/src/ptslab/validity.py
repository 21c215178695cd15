"""Bounded proof-theoretic validity of arguments on a base.

A closed argument is valid when it reduces to a closed derivation on
the base (atomic conclusion) or to a closed canonical structure whose
immediate substructures are valid with the same steps (otherwise). An
open argument must stay valid under substitution of valid closed
arguments for its assumptions, for every extension of its steps.

The substitution and extension quantifiers are finitized by pools, so
verdicts are three-valued: Invalid always carries a recheckable
witness, and Valid on open arguments is explicitly pool-relative.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Literal

from .atomic_base import AtomicBase, AtomicDerivation, atomic_derivation, is_consistent
from .argument import (
    ArgStructure,
    Assumption,
    EmptyTop,
    Inf,
    analyze,
    canonical_key,
    conclusion_of,
    immediate_substructures,
    instantiate,
    is_canonical,
)
from .base_semantics import models
from .formula import Atom, Conj, Disj, Formula, FVar, Impl, negation, render_formula
from .justification import (
    ChoiceFunction,
    ConstantMap,
    JustificationSet,
    PInf,
    PVar,
    RSystem,
    SchematicRewrite,
    StepSource,
    TVar,
    em_refutation_rule,
    graph_of,
    is_schematic,
    reach,
)

__all__ = [
    "ValidityError",
    "InconsistentBaseError",
    "Argument",
    "Bounds",
    "Verdict",
    "ExhaustedSearch",
    "FailingInstance",
    "axiom_structure",
    "synthesize_closed",
    "is_derivation_structure",
    "valid",
    "recheck_invalid",
    "em_assertion_map",
    "em_witness",
    "choice_justification",
    "consequence",
    "CONSEQUENCE_VARIANTS",
]


class ValidityError(ValueError):
    pass


class InconsistentBaseError(ValidityError):
    pass


@dataclass(frozen=True)
class Argument:
    structure: ArgStructure
    steps: StepSource


@dataclass(frozen=True)
class Bounds:
    max_reduction_steps: int = 10
    max_structure_size: int = 400
    sigma_candidates: tuple[ArgStructure, ...] = ()
    extensions: tuple[StepSource, ...] = ()
    synthesize_sigma: bool = True

    def __post_init__(self):
        if self.max_reduction_steps < 0 or self.max_structure_size < 0:
            raise ValidityError("bounds must be non-negative")


@dataclass(frozen=True)
class ExhaustedSearch:
    """Every reduct within bounds was explored and none qualified."""

    start: str
    explored: tuple[str, ...]
    max_steps: int


@dataclass(frozen=True)
class FailingInstance:
    """A substitution whose members check valid while the instance does not."""

    sigma: tuple[tuple[Formula, ArgStructure], ...]
    extension_index: int
    inner: "Verdict"


@dataclass(frozen=True)
class Verdict:
    status: Literal["valid", "invalid", "unknown"]
    reason: str = ""
    witness: object = None

    @property
    def is_valid(self) -> bool:
        return self.status == "valid"

    @property
    def is_invalid(self) -> bool:
        return self.status == "invalid"

    @property
    def is_unknown(self) -> bool:
        return self.status == "unknown"

    @staticmethod
    def valid(reason: str = "") -> "Verdict":
        return Verdict("valid", reason)

    @staticmethod
    def invalid(reason: str = "", witness: object = None) -> "Verdict":
        return Verdict("invalid", reason, witness)

    @staticmethod
    def unknown(reason: str = "") -> "Verdict":
        return Verdict("unknown", reason)


def axiom_structure(f: Formula) -> Inf:
    """A one-inference structure asserting f from no premises."""
    return Inf("ax", f, (EmptyTop(),))


def _derivation_structure(der: AtomicDerivation) -> ArgStructure:
    if der.rule is None:
        return Assumption(der.conclusion)
    kids = tuple(_derivation_structure(c) for c in der.children)
    return Inf("atm", der.conclusion, kids or (EmptyTop(),))


def is_derivation_structure(d: ArgStructure, base: AtomicBase) -> bool:
    """Is d (as a bare tree, tags aside) a closed derivation on the base?"""
    if not isinstance(d, Inf) or d.discharges or not isinstance(d.conclusion, Atom):
        return False
    kid_concls = []
    for ch in d.children:
        if isinstance(ch, EmptyTop):
            continue
        if not is_derivation_structure(ch, base):
            return False
        kid_concls.append(conclusion_of(ch))
    want = sorted(kid_concls, key=lambda a: a.name)
    return any(
        r.conclusion == d.conclusion and sorted(r.premises, key=lambda a: a.name) == want
        for r in base.rules
    )


def synthesize_closed(base: AtomicBase, f: Formula) -> ArgStructure | None:
    """A closed structure for f that is valid on the base with any steps,
    or None when f does not hold on the base.

    Atoms become derivations; conjunctions and disjunctions get their
    introductions; an implication is introduced over its consequent when
    that holds, and otherwise over a one-step refutation of its
    unobtainable antecedent, which is vacuously valid.
    """
    counter = itertools.count(1)

    def go(g: Formula) -> ArgStructure | None:
        match g:
            case Atom():
                der = atomic_derivation(base, (), g)
                return None if der is None else _derivation_structure(der)
            case Conj(l, r):
                a, b = go(l), go(r)
                return Inf("andI", g, (a, b)) if a is not None and b is not None else None
            case Disj(l, r):
                a = go(l)
                if a is not None:
                    return Inf("orI1", g, (a,))
                b = go(r)
                return Inf("orI2", g, (b,)) if b is not None else None
            case Impl(l, r):
                b = go(r)
                if b is not None:
                    return Inf("impI", g, (b,))
                if go(l) is None:
                    n = next(counter)
                    body = Inf("step", r, (Assumption(l, n),))
                    return Inf("impI", g, (body,), frozenset({n}))
                return None
        raise ValidityError(f"not a formula: {g!r}")

    return go(f)


# ---------------------------------------------------------------------------
# the checker


def _extend(steps: StepSource, ext: StepSource) -> StepSource:
    if isinstance(steps, JustificationSet) and isinstance(ext, JustificationSet):
        return steps | ext
    if isinstance(steps, RSystem) and isinstance(ext, RSystem):
        return steps | ext
    raise ValidityError("an extension must be of the same kind as the steps source")


class _Checker:
    def __init__(self, base: AtomicBase, bounds: Bounds):
        self.base = base
        self.bounds = bounds
        self._memo: dict[tuple[str, int], Verdict] = {}
        # memo keys use object ids, so every step source we see is pinned
        # for the checker's lifetime to keep those ids unique
        self._pins: dict[int, StepSource] = {}
        self._ext_cache: dict[int, list[StepSource]] = {}

    def check(self, d: ArgStructure, steps: StepSource) -> Verdict:
        self._pins.setdefault(id(steps), steps)
        key = (canonical_key(d), id(steps))
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        info = analyze(d)
        if info.closed:
            out = self._closed(d, steps, isinstance(info.conclusion, Atom))
        else:
            out = self._open(d, steps, sorted(info.open_assumptions, key=render_formula))
        self._memo[key] = out
        return out

    def _extensions_for(self, steps: StepSource) -> list[StepSource]:
        key = id(steps)
        if key not in self._ext_cache:
            exts = [steps] + [_extend(steps, e) for e in self.bounds.extensions]
            for e in exts:
                self._pins.setdefault(id(e), e)
            self._ext_cache[key] = exts
        return self._ext_cache[key]

    def _closed(self, d: ArgStructure, steps: StepSource, atomic: bool) -> Verdict:
        reached, bound_hit = reach(
            steps,
            d,
            self.base.id,
            max_steps=self.bounds.max_reduction_steps,
            max_size=self.bounds.max_structure_size,
        )
        saw_unknown = bound_hit
        for r, depth in reached:
            if atomic:
                if is_derivation_structure(r, self.base):
                    return Verdict.valid(f"reduces to a derivation on the base in {depth} step(s)")
                continue
            if not is_canonical(r) or not analyze(r).closed:
                continue
            subs = immediate_substructures(r)
            sub_verdicts = [self.check(s, steps) for s in subs]
            if all(v.is_valid for v in sub_verdicts):
                return Verdict.valid(
                    f"canonical reduct at depth {depth} with valid immediate substructures"
                )
            if any(v.is_unknown for v in sub_verdicts):
                saw_unknown = True
        if saw_unknown:
            return Verdict.unknown("reduction bound hit before a qualifying reduct was found")
        kind = "closed derivation" if atomic else "canonical reduct with valid substructures"
        return Verdict.invalid(
            f"search exhausted: no {kind} among {len(reached)} reduct(s)",
            witness=ExhaustedSearch(
                canonical_key(d),
                tuple(canonical_key(r) for r, _ in reached),
                self.bounds.max_reduction_steps,
            ),
        )

    def _sigma_candidates(self, f: Formula) -> list[ArgStructure]:
        out: list[ArgStructure] = []
        seen: set[str] = set()
        if self.bounds.synthesize_sigma:
            syn = synthesize_closed(self.base, f)
            if syn is not None:
                out.append(syn)
                seen.add(canonical_key(syn))
        for cand in self.bounds.sigma_candidates:
            if conclusion_of(cand) != f:
                continue
            info = analyze(cand)
            if not info.closed:
                continue
            k = canonical_key(cand)
            if k not in seen:
                seen.add(k)
                out.append(cand)
        return out

    def _open(self, d: ArgStructure, steps: StepSource, assumptions: list[Formula]) -> Verdict:
        extensions = self._extensions_for(steps)
        pools = {f: self._sigma_candidates(f) for f in assumptions}
        tainted = False
        checked = 0
        for ext_index, ext in enumerate(extensions):
            for combo in itertools.product(*(pools[f] for f in assumptions)):
                sigma = dict(zip(assumptions, combo))
                member_verdicts = [self.check(s, ext) for s in combo]
                if any(v.is_invalid for v in member_verdicts):
                    continue  # the conditional's antecedent fails for this sigma
                if any(v.is_unknown for v in member_verdicts):
                    tainted = True
                    continue
                inst = instantiate(d, sigma)
                v = self.check(inst, ext)
                if v.is_invalid:
                    return Verdict.invalid(
                        "a valid substitution instance fails: " + v.reason,
                        witness=FailingInstance(tuple(sigma.items()), ext_index, v),
                    )
                if v.is_unknown:
                    tainted = True
                else:
                    checked += 1
        if tainted:
            return Verdict.unknown("some pool instantiation hit a bound")
        if checked == 0:
            names = ", ".join(render_formula(f) for f in assumptions)
            return Verdict.valid(
                f"vacuous: the pool offers no valid closed argument for {names}"
            )
        return Verdict.valid(
            f"pool-relative: {checked} substitution(s) over {len(extensions)} step source(s) hold"
        )


def valid(arg: Argument, base: AtomicBase, bounds: Bounds = Bounds()) -> Verdict:
    """Bounded validity of the argument on the base."""
    steps = arg.steps
    if isinstance(steps, (SchematicRewrite, ConstantMap, ChoiceFunction)):
        steps = JustificationSet((steps,))
    return _Checker(base, bounds).check(arg.structure, steps)


def recheck_invalid(arg: Argument, base: AtomicBase, bounds: Bounds, verdict: Verdict) -> bool:
    """Confirm an Invalid verdict from its witness alone."""
    if not verdict.is_invalid:
        return False
    w = verdict.witness
    if isinstance(w, ExhaustedSearch):
        again = valid(arg, base, bounds)
        return again.is_invalid and isinstance(again.witness, ExhaustedSearch) and (
            set(again.witness.explored) == set(w.explored)
        )
    if isinstance(w, FailingInstance):
        steps = arg.steps
        if isinstance(steps, (SchematicRewrite, ConstantMap, ChoiceFunction)):
            steps = JustificationSet((steps,))
        extensions: list[StepSource] = [steps]
        for ext in bounds.extensions:
            extensions.append(_extend(steps, ext))
        ext = extensions[w.extension_index]
        checker = _Checker(base, bounds)
        for _f, s in w.sigma:
            if not checker.check(s, ext).is_valid:
                return False
        inst = instantiate(arg.structure, dict(w.sigma))
        return checker.check(inst, ext).is_invalid
    return False


# ---------------------------------------------------------------------------
# excluded-middle witnesses


def em_assertion_map(base: AtomicBase, f: Formula) -> ConstantMap:
    """Points the excluded-middle axiom for f at a left injection over a
    synthesized closed structure for f. Base-specific by construction."""
    syn = synthesize_closed(base, f)
    if syn is None:
        raise ValidityError(f"{render_formula(f)} does not hold on {base.id}")
    g = Disj(f, negation(f))
    return ConstantMap(f"em_assert[{base.id}]", ((axiom_structure(g), Inf("orI1", g, (syn,))),))


def em_witness(base: AtomicBase, f: Formula, mode: str = "functions") -> Argument:
    """A closed argument for f-or-not-f valid on the base.

    Picks the refutation rewrite when f fails on the base and the
    base-specific assertion table otherwise; in graph mode the chosen
    device is replaced by its graph on the axiom.
    """
    if mode not in ("functions", "graph"):
        raise ValidityError(f"unknown witness mode {mode!r}")
    if not is_consistent(base):
        raise InconsistentBaseError(f"base {base.id} derives absurdity")
    g = Disj(f, negation(f))
    ax = axiom_structure(g)
    j = em_assertion_map(base, f) if models(base, (), f) else em_refutation_rule()
    if mode == "graph":
        return Argument(ax, graph_of(j, [ax], base.id))
    return Argument(ax, JustificationSet((j,)))


def choice_justification(f: Formula, family: Iterable[AtomicBase]) -> ChoiceFunction:
    """Selects, per base, the justification set that makes the
    excluded-middle axiom for f valid there."""
    g = Disj(f, negation(f))
    ax_key = canonical_key(axiom_structure(g))
    table = {}
    for b in family:
        j = em_assertion_map(b, f) if models(b, (), f) else em_refutation_rule()
        table[(ax_key, b.id)] = JustificationSet((j,))
    return ChoiceFunction(f"em_choice[{render_formula(f)}]", table)


# ---------------------------------------------------------------------------
# logical-consequence variants over a finite family

CONSEQUENCE_VARIANTS = ("delta", "delta-star", "delta-sh", "delta-s")


def _projection_rule(n_context: int) -> SchematicRewrite:
    kids = tuple(PVar(f"X{i}") for i in range(n_context)) + (PVar("W", FVar("G")),)
    return SchematicRewrite(
        "project_last", ((PInf("step", FVar("G"), kids, ()), TVar("W")),)
    )


def _context_structure(context: list[Formula], goal: Formula, extra: ArgStructure | None) -> Inf:
    kids: tuple[ArgStructure, ...] = tuple(Assumption(g) for g in context)
    if extra is not None:
        kids = kids + (extra,)
    return Inf("step", goal, kids)


def _delta_witness(base: AtomicBase, context: list[Formula], goal: Formula) -> Argument:
    # assumes the goal follows from the context on this base
    if not context:
        return Argument(synthesize_closed(base, goal), JustificationSet())
    if any(not models(base, (), g) for g in context):
        return Argument(_context_structure(context, goal, None), JustificationSet())
    core = synthesize_closed(base, goal)
    d = _context_structure(context, goal, core)
    return Argument(d, JustificationSet((_projection_rule(len(context)),)))


def _uniform_structure(context: list[Formula], goal: Formula) -> ArgStructure:
    if not context:
        return axiom_structure(goal)
    return _context_structure(context, goal, None)


def _default_sigma(base: AtomicBase, context: list[Formula]) -> dict[Formula, ArgStructure] | None:
    sigma = {}
    for g in context:
        s = synthesize_closed(base, g)
        if s is None:
            return None
        sigma[g] = s
    return sigma


def _uniform_instances(
    d: ArgStructure, context: list[Formula], goal: Formula, family: list[AtomicBase]
) -> list[tuple[AtomicBase, ArgStructure, ArgStructure]]:
    """Per base: the pool instance of d and the synthesized target it
    should rewrite to. Bases whose context fails contribute nothing."""
    out = []
    for b in family:
        sigma = _default_sigma(b, context)
        if sigma is None:
            continue
        inst = instantiate(d, sigma) if context else d
        out.append((b, inst, synthesize_closed(b, goal)))
    return out


def consequence(
    variant: str,
    context: Iterable[Formula],
    goal: Formula,
    family: Iterable[AtomicBase],
    bounds: Bounds = Bounds(),
    candidates: Iterable[Argument] = (),
) -> Verdict:
    """The four argument-based consequence readings over a finite family.

    delta       -- per base, some valid argument from context to goal;
    delta-star  -- one (structure, justification set) valid on every base,
                   built by pooling the per-base justifications;
    delta-sh    -- one (structure, reduction system) valid on every base,
                   pooling the per-base reduction pairs;
    delta-s     -- like delta-star but every justification must pass the
                   schematicity test; no fabricated positives.
    """
    if variant not in CONSEQUENCE_VARIANTS:
        raise ValidityError(f"unknown variant {variant!r}; pick one of {CONSEQUENCE_VARIANTS}")
    context = sorted(set(context), key=render_formula)
    seen_ids = set()
    family = [b for b in family if not (b.id in seen_ids or seen_ids.add(b.id))]
    candidates = list(candidates)
    if not family:
        return Verdict.unknown("empty family")

    for b in family:
        if not models(b, context, goal):
            return Verdict.invalid(
                f"the goal does not follow from the context on {b.id}", witness=b.id
            )

    if variant == "delta":
        unknowns = []
        for b in family:
            arg = None
            for cand in candidates:
                if valid(cand, b, bounds).is_valid:
                    arg = cand
                    break
            if arg is None:
                arg = _delta_witness(b, context, goal)
                v = valid(arg, b, bounds)
                if not v.is_valid:
                    unknowns.append((b.id, v))
        if unknowns:
            b_id, v = unknowns[0]
            return Verdict.unknown(f"constructed witness did not verify on {b_id}: {v.reason}")
        return Verdict.valid(f"per-base witnesses verified on all {len(family)} base(s)")

    d = _uniform_structure(context, goal)
    per_base = _uniform_instances(d, context, goal, family)

    if variant == "delta-star":
        maps = tuple(
            ConstantMap(f"pooled[{b.id}]", ((inst, target),)) for b, inst, target in per_base
        )
        pool = [cand for cand in candidates if isinstance(cand.steps, JustificationSet)]
        pool.append(Argument(d, JustificationSet(maps)))
        label = "pooled per-base justification sets"
    elif variant == "delta-sh":
        pairs = tuple((inst, target) for _b, inst, target in per_base)
        pool = [cand for cand in candidates if isinstance(cand.steps, RSystem)]
        pool.append(Argument(d, RSystem(pairs)))
        label = "pooled per-base reduction pairs"
    else:  # delta-s
        pool = [
            cand
            for cand in candidates
            if isinstance(cand.steps, JustificationSet)
            and all(is_schematic(j) for j in cand.steps.members)
        ]
        if isinstance(goal, Disj) and goal.right == negation(goal.left) and not context:
            pool.append(Argument(axiom_structure(goal), JustificationSet((em_refutation_rule(),))))
        label = "schematic candidates only (rewrite-rule schematicity test)"

    saw_unknown = False
    for cand in pool:
        verdicts = [valid(cand, b, bounds) for b in family]
        if all(v.is_valid for v in verdicts):
            return Verdict.valid(f"uniform witness valid on all {len(family)} base(s); {label}")
        if any(v.is_unknown for v in verdicts):
            saw_unknown = True
    if variant == "delta-s":
        return Verdict.unknown("no schematic witness found")
    if saw_unknown:
        return Verdict.unknown("uniform witness checks hit bounds")
    return Verdict.unknown("no uniform witness found in pool")
