import pytest

from ptslab import (
    Argument,
    Assumption,
    Atom,
    AtomicBase,
    BOT,
    Bounds,
    Disj,
    EmptyTop,
    ExhaustedSearch,
    FailingInstance,
    Impl,
    InconsistentBaseError,
    Inf,
    JustificationSet,
    RSystem,
    axiom_structure,
    analyze,
    apply_justification,
    choice_justification,
    consequence,
    em_assertion_map,
    em_refutation_rule,
    em_witness,
    enumerate_bases,
    is_derivation_structure,
    is_schematic,
    models,
    negation,
    or_detour,
    parse_base,
    parse_rules,
    recheck_invalid,
    structures_equal,
    synthesize_closed,
    valid,
)

from genlib import make_rng, random_formula

a, b, c, p, q, r, s = map(Atom, "abcpqrs")
EMPTY = AtomicBase(frozenset())
PQ = parse_base("-> p\np -> q\n")


# --- synthesis --------------------------------------------------------------


def test_synthesize_atoms_yield_derivations():
    d = synthesize_closed(PQ, q)
    assert is_derivation_structure(d, PQ)
    assert synthesize_closed(EMPTY, p) is None


def test_synthesize_matches_base_consequence():
    rng = make_rng(11)
    fam = list(enumerate_bases([a, b], 2))
    for base in fam[:30]:
        for _ in range(15):
            f = random_formula(rng, 3, atoms=[a, b])
            built = synthesize_closed(base, f)
            assert (built is not None) == models(base, (), f)
            if built is not None:
                info = analyze(built)
                assert info.closed and info.conclusion == f
                v = valid(Argument(built, JustificationSet()), base)
                assert v.is_valid, (base.id, str(f), v)


# --- closed arguments -------------------------------------------------------


def test_closed_atomic_derivation_is_valid():
    d = synthesize_closed(PQ, q)
    v = valid(Argument(d, JustificationSet()), PQ)
    assert v.is_valid


def test_closed_atomic_exhaustion_is_invalid_with_witness():
    d = Inf("atm", p, (EmptyTop(),))
    v = valid(Argument(d, JustificationSet()), EMPTY)
    assert v.is_invalid
    assert isinstance(v.witness, ExhaustedSearch)
    assert recheck_invalid(Argument(d, JustificationSet()), EMPTY, Bounds(), v)


def test_closed_bottom_argument_invalid_on_consistent_base():
    d = Inf("boom", BOT, (Inf("atm", p, (EmptyTop(),)),))
    v = valid(Argument(d, JustificationSet()), PQ)
    assert v.is_invalid


def test_closed_nonatomic_needs_canonical_reduct():
    ax = axiom_structure(Disj(p, negation(p)))
    v = valid(Argument(ax, JustificationSet()), PQ)
    assert v.is_invalid  # no steps, the axiom is not canonical
    v = valid(Argument(ax, JustificationSet((em_refutation_rule(),))), PQ)
    assert v.is_invalid  # p holds here, so the refutation arm cannot close
    v = valid(Argument(ax, JustificationSet((em_refutation_rule(),))), EMPTY)
    assert v.is_valid


def test_unknown_on_bound_hit():
    # r never becomes derivable and the reducts keep growing, so the
    # bounded search cannot conclude either way
    grow = parse_rules('grow: (inf g "r" ?D) => (inf g "r" (inf g "r" ?D))').members[0]
    d = Inf("g", r, (Assumption(p),))
    v = valid(Argument(d, JustificationSet((grow,))), PQ, Bounds(max_reduction_steps=3))
    assert v.is_unknown


# --- open arguments ---------------------------------------------------------


def test_vacuous_refutation_argument():
    refute = Inf("step", BOT, (Assumption(a),))
    v = valid(Argument(refute, JustificationSet()), EMPTY)
    assert v.is_valid and "vacuous" in v.reason


def test_assumption_leaf_is_valid_open_argument():
    v = valid(Argument(Assumption(p), JustificationSet()), PQ)
    assert v.is_valid


def test_open_invalid_carries_recheckable_instance():
    # q follows from p on PQ, but this structure steps to r which never obtains
    d = Inf("bad", r, (Assumption(p),))
    arg = Argument(d, JustificationSet())
    v = valid(arg, PQ)
    assert v.is_invalid
    assert isinstance(v.witness, FailingInstance)
    assert recheck_invalid(arg, PQ, Bounds(), v)


def test_open_argument_user_pool():
    d = Inf("use", q, (Assumption(p),))
    chain = parse_rules(
        'collapse: (inf use "q" (?D :concludes "p")) => (inf atm "q" ?D)'
    )
    v = valid(Argument(d, chain), PQ)
    assert v.is_valid
    # an extra pool candidate only adds obligations, and they hold here too
    stray = Inf("cls", p, (EmptyTop(),))
    v = valid(Argument(d, chain), PQ, Bounds(sigma_candidates=(stray,)))
    assert v.is_valid


def test_extension_pool_strengthens_the_requirement():
    # extending the steps can only add obligations: a substitution that is
    # valid only under the extension must still keep the instance valid
    base = parse_base("-> c\n")
    d = Inf("use", r, (Assumption(c),))
    boxed = Inf("boxed", c, (Inf("atm", c, (EmptyTop(),)),))
    unbox = parse_rules("unbox: (inf boxed \"c\" ?D) => ?D")
    plain = Bounds(synthesize_sigma=False, sigma_candidates=(boxed,))
    v_plain = valid(Argument(d, JustificationSet()), base, plain)
    assert v_plain.is_valid and "vacuous" in v_plain.reason
    extended = Bounds(
        synthesize_sigma=False, sigma_candidates=(boxed,), extensions=(unbox,)
    )
    v_ext = valid(Argument(d, JustificationSet()), base, extended)
    assert v_ext.is_invalid
    assert isinstance(v_ext.witness, FailingInstance)
    assert v_ext.witness.extension_index == 1
    arg = Argument(d, JustificationSet())
    assert recheck_invalid(arg, base, extended, v_ext)


# --- excluded-middle witnesses ----------------------------------------------


def test_em_witness_arms():
    w = em_witness(EMPTY, p)
    assert w.steps.members[0].name == "em_refute"
    assert valid(w, EMPTY).is_valid

    base = parse_base("-> p\n")
    w = em_witness(base, p)
    assert w.steps.members[0].name.startswith("em_assert")
    assert valid(w, base).is_valid
    assert not is_schematic(w.steps.members[0])


def test_em_witness_rejects_inconsistent_base():
    with pytest.raises(InconsistentBaseError):
        em_witness(parse_base("-> bot\n"), p)


def test_em_witness_graph_mode():
    base = parse_base("-> p\n")
    w = em_witness(base, p, mode="graph")
    assert isinstance(w.steps, RSystem) and len(w.steps) == 1
    frm, to = w.steps.pairs[0]
    assert structures_equal(frm, axiom_structure(Disj(p, negation(p))))
    assert valid(w, base).is_valid
    # the pair is the graph of the chosen device
    j = em_assertion_map(base, p)
    assert structures_equal(to, apply_justification(j, frm))


def test_em_family_recheck():
    fam = list(enumerate_bases([a, b], 2))[:50]
    for base in fam:
        w = em_witness(base, a)
        assert valid(w, base, Bounds(max_reduction_steps=10)).is_valid, base.id


def test_choice_justification_selects_per_base():
    fam = [EMPTY, parse_base("-> a\n")]
    ch = choice_justification(a, fam)
    assert not is_schematic(ch)
    g = Disj(a, negation(a))
    for base in fam:
        v = valid(Argument(axiom_structure(g), JustificationSet((ch,))), base)
        assert v.is_valid, base.id
    sel_empty = ch.table[(list(ch.table)[0][0], EMPTY.id)]
    assert sel_empty.members[0].name == "em_refute"


# --- the worked case-analysis argument --------------------------------------


def _case_argument():
    d2 = Inf("atm", c, (Assumption(a, 1),))
    d3 = Inf("atm", c, (Assumption(b, 2),))
    d = Inf("orE", c, (Assumption(Disj(a, b)), d2, d3), frozenset({1, 2}))
    return Argument(d, JustificationSet((or_detour(),)))


def test_case_analysis_valid_on_three_bases():
    bases = [
        parse_base("-> a\na -> c\nb -> c\n"),
        parse_base("-> b\na -> c\nb -> c\n"),
        parse_base("-> a\n-> b\na -> c\nb -> c\n"),
    ]
    assert len({x.id for x in bases}) == 3
    for base in bases:
        assert valid(_case_argument(), base).is_valid, base.id


def test_case_analysis_graph_agrees_with_functions():
    # replacing the justification set by its one-step graph over the
    # reachable set preserves the closed verdict
    base = parse_base("-> a\na -> c\nb -> c\n")
    arg = _case_argument()
    sigma = {Disj(a, b): synthesize_closed(base, Disj(a, b))}
    from ptslab import instantiate
    from ptslab.justification import reach

    closed = instantiate(arg.structure, sigma)
    reached, _ = reach(arg.steps, closed, base.id, max_steps=10, max_size=400)
    pairs = []
    for d, _depth in reached:
        from ptslab.justification import step_candidates

        for nxt in step_candidates(arg.steps, d, base.id):
            pairs.append((d, nxt))
    graph = RSystem(tuple(pairs))
    v_fun = valid(Argument(closed, arg.steps), base)
    v_gra = valid(Argument(closed, graph), base)
    assert v_fun.status == v_gra.status == "valid"


# --- consequence variants ---------------------------------------------------


def test_consequence_em_all_variants():
    fam = list(enumerate_bases([a], 1))
    g = Disj(a, negation(a))
    assert consequence("delta", (), g, fam).is_valid
    assert consequence("delta-star", (), g, fam).is_valid
    assert consequence("delta-sh", (), g, fam).is_valid
    v = consequence("delta-s", (), g, fam)
    assert v.is_unknown and "schematic" in v.reason


def test_consequence_schematic_succeeds_on_refutation_only_family():
    fam = [EMPTY, parse_base("b -> a\n")]  # a fails on both
    g = Disj(a, negation(a))
    assert consequence("delta-s", (), g, fam).is_valid


def test_consequence_definite_failure():
    v = consequence("delta", (), p, [PQ, EMPTY])
    assert v.is_invalid and v.witness == "{}"
    v2 = consequence("delta-sh", (), p, [PQ, EMPTY])
    assert v2.is_invalid


def test_consequence_with_context():
    fam = list(enumerate_bases([p, q], 1))
    assert consequence("delta", [p], p, fam).is_valid
    assert consequence("delta", [p, Impl(p, q)], q, fam).is_valid
    assert consequence("delta-star", [p], p, fam).is_valid
    assert consequence("delta-sh", [p], p, fam).is_valid


def test_consequence_user_candidate():
    fam = [EMPTY, parse_base("b -> a\n")]
    g = Disj(a, negation(a))
    cand = Argument(axiom_structure(g), JustificationSet((em_refutation_rule(),)))
    v = consequence("delta-star", (), g, fam, candidates=[cand])
    assert v.is_valid


def test_consequence_unknown_variant_rejected():
    with pytest.raises(Exception):
        consequence("nope", (), p, [PQ])


# --- verdict monotonicity ---------------------------------------------------


def test_bound_monotonicity_spot():
    rng = make_rng(12)
    fam = list(enumerate_bases([a, b], 2))
    steps_options = [
        JustificationSet(),
        JustificationSet((or_detour(),)),
        JustificationSet((or_detour(), em_refutation_rule())),
    ]
    flips = []
    for i in range(120):
        base = rng.choice(fam)
        f = random_formula(rng, 2, atoms=[a, b])
        kind = rng.random()
        if kind < 0.4:
            d = axiom_structure(Disj(f, negation(f)))
        elif kind < 0.7:
            built = synthesize_closed(base, f)
            d = built if built is not None else Inf("step", f, (Assumption(c),))
        else:
            d = Inf("step", f, (Assumption(rng.choice([a, b, c])),))
        steps = rng.choice(steps_options)
        k = rng.randint(1, 4)
        v1 = valid(Argument(d, steps), base, Bounds(max_reduction_steps=k))
        v2 = valid(Argument(d, steps), base, Bounds(max_reduction_steps=2 * k))
        if {v1.status, v2.status} == {"valid", "invalid"}:
            flips.append((base.id, v1.status, v2.status))
    assert not flips


def test_delta_holds_on_fifty_base_family():
    fam = list(enumerate_bases([a, b], 2))[:50]
    v = consequence("delta", (), Disj(a, negation(a)), fam)
    assert v.is_valid


def test_choice_selection_arms():
    fam = [EMPTY, parse_base("-> a\n")]
    ch = choice_justification(a, fam)
    key = list(ch.table)[0][0]
    assert ch.table[(key, EMPTY.id)].members[0].name == "em_refute"
    assert ch.table[(key, "{-> a}")].members[0].name.startswith("em_assert")


def test_extension_kind_must_match_steps():
    d = Inf("use", q, (Assumption(p),))
    rpairs = RSystem()
    with pytest.raises(Exception, match="same kind"):
        valid(Argument(d, rpairs), PQ, Bounds(extensions=(JustificationSet(),)))


def test_valid_is_deterministic_and_label_invariant():
    from ptslab.argument import relabel

    rng = make_rng(22)
    fam = list(enumerate_bases([a, b], 2))
    steps = JustificationSet((or_detour(), em_refutation_rule()))
    for _ in range(60):
        base = rng.choice(fam)
        d2 = Inf("atm", c, (Assumption(a, 1),))
        d3 = Inf("atm", c, (Assumption(b, 2),))
        d = Inf("orE", c, (Assumption(Disj(a, b)), d2, d3), frozenset({1, 2}))
        v1 = valid(Argument(d, steps), base)
        v2 = valid(Argument(d, steps), base)
        v3 = valid(Argument(relabel(d, {1: 7, 2: 5}), steps), base)
        assert v1.status == v2.status == v3.status


def test_refutation_argument_fails_where_the_atom_holds():
    # the one-step refutation of a is vacuously valid only while no closed
    # valid argument for a exists; a base deriving a defeats it
    refute = Inf("step", BOT, (Assumption(a),))
    arg = Argument(refute, JustificationSet())
    assert valid(arg, EMPTY).is_valid
    base = parse_base("-> a\n")
    v = valid(arg, base)
    assert v.is_invalid
    assert isinstance(v.witness, FailingInstance)


def test_consequence_tolerates_duplicate_family_entries():
    fam = [EMPTY, parse_base("-> a\n"), EMPTY, parse_base("-> a\n")]
    g = Disj(a, negation(a))
    assert consequence("delta-star", (), g, fam).is_valid
    assert consequence("delta-sh", (), g, fam).is_valid
