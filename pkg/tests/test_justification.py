import pytest

from ptslab import (
    Assumption,
    Atom,
    ChoiceFunction,
    ConstantMap,
    Disj,
    EmptyTop,
    Inf,
    JustificationContractError,
    JustificationError,
    JustificationSet,
    RSystem,
    analyze,
    apply_justification,
    canonical_key,
    check_closure,
    em_refutation_rule,
    graph_of,
    is_canonical,
    is_schematic,
    negation,
    or_detour,
    parse_rules,
    reduces,
    structures_equal,
)
from ptslab.justification import reach, step_candidates

from genlib import make_rng, random_detour_redex, random_sigma

a, b, c = Atom("a"), Atom("b"), Atom("c")


def _redex(major_intro="orI1"):
    d1 = Assumption(a if major_intro == "orI1" else b)
    d2 = Inf("atm", c, (Assumption(a, 1),))
    d3 = Inf("atm", c, (Assumption(b, 2),))
    major = Inf(major_intro, Disj(a, b), (d1,))
    return Inf("orE", c, (major, d2, d3), frozenset({1, 2}))


def test_detour_application_left():
    out = apply_justification(or_detour(), _redex("orI1"))
    assert structures_equal(out, Inf("atm", c, (Assumption(a),)))


def test_detour_application_right():
    out = apply_justification(or_detour(), _redex("orI2"))
    assert structures_equal(out, Inf("atm", c, (Assumption(b),)))


def test_detour_keeps_conclusion_and_opens():
    for redex in (_redex("orI1"), _redex("orI2")):
        out = apply_justification(or_detour(), redex)
        assert analyze(out).conclusion == analyze(redex).conclusion
        assert set(analyze(out).open_assumptions) <= set(analyze(redex).open_assumptions)


def test_out_of_domain_is_none():
    assert apply_justification(or_detour(), Assumption(a)) is None
    assert apply_justification(em_refutation_rule(), _redex()) is None


def test_em_refutation_output_is_canonical():
    ax = Inf("ax", Disj(a, negation(a)), (EmptyTop(),))
    out = apply_justification(em_refutation_rule(), ax)
    assert is_canonical(out)
    assert analyze(out).closed
    assert analyze(out).conclusion == Disj(a, negation(a))


def test_constant_map_lookup_modulo_labels():
    redex = _redex()
    out = apply_justification(or_detour(), redex)
    cm = ConstantMap("table", ((redex, out),))
    from ptslab.argument import relabel

    probe = relabel(redex, {1: 9, 2: 11})
    assert structures_equal(apply_justification(cm, probe), out)


def test_constant_map_contract_violation():
    # image sneaks in a new open assumption
    key = Inf("t", c, (Assumption(a),))
    bad = Inf("t", c, (Assumption(b),))
    cm = ConstantMap("bad", ((key, bad),))
    with pytest.raises(JustificationContractError):
        apply_justification(cm, key)


def test_rsystem_rejects_bad_pairs():
    with pytest.raises(JustificationContractError):
        RSystem(((Assumption(a), Assumption(b)),))
    with pytest.raises(JustificationContractError):
        RSystem(((Inf("t", c, (EmptyTop(),)), Inf("t", c, (Assumption(a),))),))


def test_reduces_examples():
    steps = JustificationSet((or_detour(),))
    redex = _redex()
    out = apply_justification(or_detour(), redex)
    assert reduces(steps, redex, out, 1)
    assert not reduces(steps, redex, out, 0)
    assert reduces(steps, redex, redex, 0)  # zero-length chains count
    assert not reduces(JustificationSet(), redex, out, 10)


def test_reduces_inside_context():
    # the redex sits under another inference; rewriting happens in place
    steps = JustificationSet((or_detour(),))
    host = Inf("wrap", Disj(c, c), (_redex(),))
    target = Inf("wrap", Disj(c, c), (Inf("atm", c, (Assumption(a),)),))
    assert reduces(steps, host, target, 1)


def test_reduces_transitive_under_budget_addition():
    steps = JustificationSet((or_detour(),))
    host = Inf("orE", c, (Inf("orI1", Disj(a, b), (Assumption(a),)),
                          Inf("atm", c, (Assumption(a, 1),)),
                          Inf("atm", c, (Assumption(b, 2),))), frozenset({1, 2}))
    mid = apply_justification(or_detour(), host)
    assert reduces(steps, host, mid, 1)
    assert reduces(steps, host, mid, 5)  # budget only ever helps


def test_rsystem_steps_are_root_level():
    redex = _redex()
    out = apply_justification(or_detour(), redex)
    sys_ = RSystem(((redex, out),))
    assert reduces(sys_, redex, out, 1)
    wrapped = Inf("wrap", c, (redex,))
    wrapped_out = Inf("wrap", c, (out,))
    assert not reduces(sys_, wrapped, wrapped_out, 5)


def test_graph_of_agrees_with_application():
    rule = em_refutation_rule()
    ax = Inf("ax", Disj(a, negation(a)), (EmptyTop(),))
    g = graph_of(rule, [ax])
    assert len(g) == 1
    frm, to = g.pairs[0]
    assert structures_equal(to, apply_justification(rule, ax))
    assert reduces(g, frm, to, 1)
    assert graph_of(rule, []).pairs == ()
    with pytest.raises(JustificationError):
        graph_of(rule, [Assumption(a)])  # outside the domain


def test_check_closure_on_detour_rule():
    rng = make_rng(10)
    samples = []
    for _ in range(50):
        redex = random_detour_redex(rng)
        samples.append((redex, random_sigma(rng, redex)))
    assert check_closure(or_detour(), samples)


def test_check_closure_identity_rewrite():
    ident = parse_rules('ident: (inf mk "?A" ?D) => (inf mk "?A" ?D)').members[0]
    d = Inf("mk", a, (Assumption(b),))
    sigma = {b: Inf("cls", b, (EmptyTop(),))}
    assert check_closure(ident, [(d, sigma)])


def test_check_closure_catches_instance_gap():
    # the table knows the open structure but not its instances
    d = Inf("mk", a, (Assumption(b),))
    out = Inf("mk2", a, (Assumption(b),))
    cm = ConstantMap("gappy", ((d, out),))
    sigma = {b: Inf("cls", b, (EmptyTop(),))}
    assert not check_closure(cm, [(d, sigma)])


def test_choice_function_needs_base():
    ax = Inf("ax", Disj(a, negation(a)), (EmptyTop(),))
    ch = ChoiceFunction("pick", {(canonical_key(ax), "b1"): JustificationSet((em_refutation_rule(),))})
    with pytest.raises(JustificationError):
        apply_justification(ch, ax)
    assert apply_justification(ch, ax, "nope") is None
    out = apply_justification(ch, ax, "b1")
    assert structures_equal(out, apply_justification(em_refutation_rule(), ax))


def test_is_schematic_verdicts():
    assert is_schematic(or_detour())
    assert is_schematic(em_refutation_rule())
    ax = Inf("ax", Disj(a, negation(a)), (EmptyTop(),))
    table = ConstantMap(
        "one_base", ((ax, Inf("orI1", Disj(a, negation(a)), (Inf("atm", a, (EmptyTop(),)),))),)
    )
    assert not is_schematic(table)  # a lone base-specific pointer is no scheme
    ch = ChoiceFunction("pick", {(canonical_key(ax), "x"): JustificationSet((or_detour(),))})
    assert not is_schematic(ch)


def test_is_schematic_generalizable_table():
    rule = em_refutation_rule()
    ax1 = Inf("ax", Disj(a, negation(a)), (EmptyTop(),))
    ax2 = Inf("ax", Disj(b, negation(b)), (EmptyTop(),))
    good = ConstantMap("uniform", ((ax1, apply_justification(rule, ax1)),
                                   (ax2, apply_justification(rule, ax2))))
    assert is_schematic(good)
    # same keys, but the images import base-specific material
    w1 = Inf("orI1", Disj(a, negation(a)), (Inf("atm", a, (EmptyTop(),)),))
    w2 = Inf("orI1", Disj(b, negation(b)), (Inf("atm", b, (Inf("atm", a, (EmptyTop(),)),)),))
    mixed = ConstantMap("pointer", ((ax1, w1), (ax2, w2)))
    assert not is_schematic(mixed)


def test_step_candidates_order_is_deterministic():
    steps = JustificationSet((or_detour(),))
    host = Inf("wrap", Disj(c, c), (_redex(), _redex()))
    outs = [canonical_key(x) for x in step_candidates(steps, host)]
    assert outs == [canonical_key(x) for x in step_candidates(steps, host)]
    assert len(outs) == 2  # one per redex position, deduplicated


def test_reach_reports_bound_hits():
    grow = parse_rules('grow: (inf g "a" ?D) => (inf g "a" (inf g "a" ?D))').members[0]
    start = Inf("g", a, (Assumption(b),))
    _, hit = reach(JustificationSet((grow,)), start, None, max_steps=3, max_size=1000)
    assert hit  # still growing when the depth ran out
    done, hit = reach(JustificationSet(), start, None, max_steps=3, max_size=1000)
    assert not hit and len(done) == 1
    _, hit = reach(JustificationSet((grow,)), start, None, max_steps=50, max_size=5)
    assert hit  # size pruning


def test_rule_file_parsing_and_errors():
    js = parse_rules("# comment\nident: (inf mk \"?A\" ?D) => (inf mk \"?A\" ?D)\n")
    assert [j.name for j in js.members] == ["ident"]
    with pytest.raises(JustificationError, match="line 1"):
        parse_rules("oops\n")
    with pytest.raises(JustificationError, match="unbound"):
        parse_rules("r: (inf mk \"?A\" ?D) => (inf mk \"?B\" ?D)\n")  # unbound ?B


def test_rule_linearity_enforced():
    with pytest.raises(JustificationError, match="linear"):
        parse_rules('r: (inf two "?A" ?D ?D) => ?D\n')


def test_justification_set_name_discipline():
    with pytest.raises(JustificationError):
        JustificationSet((or_detour(), or_detour()))
    merged = JustificationSet((or_detour(),)) | JustificationSet((em_refutation_rule(),))
    assert len(merged) == 2
    assert [j.name for j in merged.members] == sorted(j.name for j in merged.members)


def test_reduces_composes_across_budgets():
    steps = JustificationSet((or_detour(),))
    inner = _redex("orI1")
    resolved = apply_justification(or_detour(), inner)
    # a structure holding two independent redexes
    host = Inf("pair", Disj(c, c), (inner, _redex("orI2")))
    mid = Inf("pair", Disj(c, c), (resolved, _redex("orI2")))
    end = Inf("pair", Disj(c, c), (resolved, apply_justification(or_detour(), _redex("orI2"))))
    assert reduces(steps, host, mid, 1)
    assert reduces(steps, mid, end, 1)
    assert reduces(steps, host, end, 2)
    assert not reduces(steps, host, end, 1)


def test_one_step_candidates_respect_global_contract():
    # wherever a rewrite fires inside a structure, the whole structure keeps
    # its conclusion, never gains open assumptions, and stays well formed
    rng = make_rng(20)
    steps = JustificationSet((or_detour(), em_refutation_rule()))
    checked = 0
    for _ in range(150):
        redex = random_detour_redex(rng)
        host = Inf("wrap", Disj(c, c), (redex,)) if rng.random() < 0.5 else redex
        before = analyze(host)
        for nxt in step_candidates(steps, host):
            after = analyze(nxt)  # raises if malformed
            assert after.conclusion == before.conclusion
            assert set(after.open_assumptions) <= set(before.open_assumptions)
            checked += 1
    assert checked > 100


def test_canonical_form_is_idempotent_and_relabel_invariant():
    from ptslab.argument import canonical_form, relabel

    rng = make_rng(21)
    for _ in range(100):
        d = random_detour_redex(rng)
        cf = canonical_form(d)
        assert canonical_form(cf) == cf
        shuffled = relabel(d, {1: rng.randint(10, 60), 2: rng.randint(61, 99)})
        assert canonical_form(shuffled) == cf
