import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cacmod import load_signature
from cacmod.errors import ClassBoundExceeded, FuelExhausted
from cacmod.reduction import (
    beta_step,
    cap_aliens,
    e_class,
    equivalent,
    joinable_modulo,
    match_modulo,
    normalize,
    normalize_with_trace,
    rel_step,
    replay,
    restricted_normalize,
    rule_steps,
)
from cacmod.signature import Limits
from cacmod.syntax import to_signature, parse
from cacmod.terms import Abs, App, Bound, Symb, Var, app, is_algebraic, spine, subterm_at
from conftest import ASSOC, COMM, NAT, term
from oracles import from_term, naive_class, one_steps, oracle_joinable

AC5 = """
symbol nat : *
symbol zero : nat
symbol a : nat
symbol b : nat
symbol s : nat => nat
symbol plus : nat => nat => nat
""" + COMM + ASSOC

RULES_T = [(("plus", "x", ("zero",)), "x"),
           (("plus", "x", ("s", "y")), ("s", ("plus", "x", "y")))]
COMM_T = (("plus", "x", "y"), ("plus", "y", "x"))
ASSOC_T = (("plus", "x", ("plus", "y", "z")), ("plus", ("plus", "x", "y"), "z"))


def algebraic_terms(consts, unary, binary, depth):
    level = list(consts)
    for _ in range(depth - 1):
        level = list(consts) + [app(Symb(f), t) for f in unary for t in level] + \
            [app(Symb(f), t, u) for f in binary for t in level for u in level]
    return level


def test_beta_step_examples():
    sig = load_signature(NAT)
    assert beta_step(term(sig, "([x:nat] x) zero")) == {Symb("zero")}
    assert beta_step(term(sig, "s zero")) == set()
    t = term(sig, "([x:nat][y:nat] x) u v")
    assert beta_step(t) == {term(sig, "([y:nat] u) v")}


def test_e_class_commutativity_only(nat_comm):
    cls = e_class(term(nat_comm, "plus x y"), nat_comm)
    assert set(cls.members) == {term(nat_comm, "plus x y"), term(nat_comm, "plus y x")}
    assert not cls.truncated


def test_e_class_ac_of_three_atoms_has_twelve_members():
    sig = load_signature(AC5 + "symbol c : nat\n")
    cls = e_class(term(sig, "plus (plus a b) c"), sig)
    assert len(cls) == 12
    assert {from_term(m) for m in cls.members} == naive_class(from_term(cls.representative),
                                                              [COMM_T, ASSOC_T])


def test_e_class_agrees_with_naive_closure_depth_3():
    sig = load_signature(AC5)
    terms = algebraic_terms([Symb("zero"), Symb("a"), Symb("b")], ["s"], ["plus"], 3)
    assert len(terms) == 243
    for t in terms:
        cls = e_class(t, sig)
        assert {from_term(m) for m in cls.members} == naive_class(from_term(t), [COMM_T, ASSOC_T])


def test_e_class_symmetry():
    sig = load_signature(AC5)
    terms = algebraic_terms([Symb("zero"), Symb("a"), Var("x")], ["s"], ["plus"], 3)[::7]
    for t in terms:
        for u in e_class(t, sig).members:
            assert t in e_class(u, sig)


def test_infinite_class_is_truncated():
    sig = load_signature(NAT + "eq [x:nat] plus x zero = x\n")
    cls = e_class(term(sig, "plus x zero"), sig, bound=50)
    assert cls.truncated and len(cls) == 51
    with pytest.raises(ClassBoundExceeded):
        equivalent(term(sig, "plus x zero"), term(sig, "s x"),
                   to_signature(parse(NAT + "eq [x:nat] plus x zero = x\n"), Limits(50, 1000)))


def test_e_class_traces_replay(nat_ac):
    t = term(nat_ac, "plus (plus x (s y)) zero")
    cls = e_class(t, nat_ac)
    for m in cls.members:
        assert replay(t, cls.trace_to(m), nat_ac) == m


def test_match_modulo_examples(nat_comm, nat_rules):
    assert match_modulo(term(nat_comm, "plus x zero"), term(nat_comm, "plus zero (s z)"), nat_comm) \
        == [{"x": term(nat_comm, "s z")}]
    assert match_modulo(term(nat_comm, "plus x zero"), term(nat_comm, "s z"), nat_comm) == []
    assert match_modulo(term(nat_rules, "plus x x"), term(nat_rules, "plus a a"), nat_rules) \
        == [{"x": Var("a")}]


def test_rel_step_examples(nat_rules, nat_comm):
    t = term(nat_rules, "plus zero (s zero)")
    assert {u for u, _ in rel_step(t, nat_rules)} == {term(nat_rules, "s (plus zero zero)")}
    assert {u for u, _ in rel_step(t, nat_comm)} == {term(nat_comm, "s (plus zero zero)"),
                                                     term(nat_comm, "s zero")}
    assert rel_step(Var("x"), nat_comm) == []
    for u, trace in rel_step(t, nat_comm):
        assert replay(t, trace, nat_comm) == u


def test_rel_step_agrees_with_brute_force_definition(nat_ac):
    terms = algebraic_terms([Symb("zero"), Var("x")], ["s"], ["plus"], 3)
    for t in terms:
        expected = set()
        for m in naive_class(from_term(t), [COMM_T, ASSOC_T]):
            expected |= one_steps(m, RULES_T)
        assert {from_term(u) for u, _ in rel_step(t, nat_ac)} == expected


def test_normalize_examples(nat_ac, lists):
    two = "s (s zero)"
    assert normalize(term(nat_ac, f"plus ({two}) ({two})"), nat_ac) == term(nat_ac, "s (s (s (s zero)))")
    assert normalize(term(nat_ac, "s zero"), nat_ac) == term(nat_ac, "s zero")
    t = term(lists, "app A (app A l l') l''")
    assert normalize(t, lists) == term(lists, "app A l (app A l' l'')")


def test_normalize_traces_replay(nat_ac):
    t = term(nat_ac, "plus (s zero) (plus zero (s (s x)))")
    nf, trace = normalize_with_trace(t, nat_ac)
    assert replay(t, trace, nat_ac) == nf


@given(st.integers(0, 10_000))
@settings(max_examples=150, deadline=None)
def test_normal_forms_are_normal(seed):
    sig = NAT_AC_SIG
    t = random_term(random.Random(seed), 3)
    assert rel_step(normalize(t, sig), sig) == []


NAT_AC_SIG = load_signature(NAT + COMM + ASSOC)


def random_term(rng, depth):
    if depth <= 1 or rng.random() < 0.25:
        return rng.choice([Symb("zero"), Var("x"), Var("y")])
    if rng.random() < 0.35:
        return app(Symb("s"), random_term(rng, depth - 1))
    return app(Symb("plus"), random_term(rng, depth - 1), random_term(rng, depth - 1))


def perturb(rng, t, steps):
    pairs = RULES_T + [COMM_T, ASSOC_T, (COMM_T[1], COMM_T[0]), (ASSOC_T[1], ASSOC_T[0])]
    u = from_term(t)
    for _ in range(steps):
        nxt = sorted(one_steps(u, pairs), key=repr)
        if not nxt:
            break
        u = rng.choice(nxt)
    return u


def to_term(u):
    if isinstance(u, str):
        return Var(u)
    return app(Symb(u[0]), *(to_term(a) for a in u[1:]))


def test_joinable_agrees_with_reachability_oracle():
    rng = random.Random(2024)
    sig = NAT_AC_SIG
    pairs = []
    while len(pairs) < 1000:
        t = random_term(rng, 3)
        if rng.random() < 0.5:
            u = to_term(perturb(rng, t, rng.randint(1, 3)))
        else:
            u = random_term(rng, 3)
        pairs.append((t, u))
    disagreements = []
    joinable = 0
    for t, u in pairs:
        got = joinable_modulo(t, u, sig)
        want = oracle_joinable(from_term(t), from_term(u), RULES_T, [COMM_T, ASSOC_T], depth=6)
        joinable += got
        if got != want:
            disagreements.append((t, u, got, want))
    assert disagreements == []
    assert 200 < joinable < 900


def test_joinable_examples(nat_comm):
    assert joinable_modulo(term(nat_comm, "plus zero (s zero)"), term(nat_comm, "plus (s zero) zero"),
                           nat_comm)
    assert not joinable_modulo(Var("x"), Var("y"), nat_comm)
    t = term(nat_comm, "plus x (s y)")
    assert joinable_modulo(t, t, nat_comm)


def test_restricted_normalize_examples():
    sig = load_signature(NAT + "symbol g : nat => nat\nrule [x:nat] g x -> plus x zero\n")
    assert sig.precedence().greater("g", "plus")
    assert restricted_normalize(term(sig, "plus zero zero"), "g", sig) == Symb("zero")
    assert restricted_normalize(term(sig, "plus zero zero"), "plus", sig) == term(sig, "plus zero zero")
    assert restricted_normalize(term(sig, "([x:nat] x) zero"), "s", sig) == Symb("zero")


def test_fuel_exhaustion_is_a_typed_error():
    sig = load_signature(NAT + "symbol loop : nat => nat\nrule [x:nat] loop x -> loop (s x)\n")
    with pytest.raises(FuelExhausted):
        normalize(term(sig, "loop zero"), sig, fuel=100)
    with pytest.raises(FuelExhausted):
        joinable_modulo(term(sig, "loop zero"), Symb("zero"), sig, fuel=100)


CAP = NAT + COMM + "symbol f : nat => nat kind ho\n"


def test_cap_and_aliens_examples():
    sig = load_signature(CAP)
    t = term(sig, "plus (plus a zero) (f b)")
    res = cap_aliens(t, sig)
    assert res.cap == app(Symb("plus"), term(sig, "plus a zero"), Var("_z1"))
    assert [u for _, u in res.aliens] == [term(sig, "f b")]
    assert subterm_at(t, res.aliens[0][0]) == term(sig, "f b")
    res = cap_aliens(term(sig, "f b"), sig)
    assert res.cap == Var("_z1") and res.aliens == [((), term(sig, "f b"))]
    res = cap_aliens(term(sig, "plus (f (plus zero zero)) (f zero)"), sig)
    assert res.cap == app(Symb("plus"), Var("_z1"), Var("_z1"))
    res = cap_aliens(term(sig, "plus (f zero) (f (s zero))"), sig)
    assert res.cap == app(Symb("plus"), Var("_z1"), Var("_z2")) and not res.approximate


def test_cap_is_first_order_and_maximal():
    sig = load_signature(CAP + "symbol h : nat => nat => nat kind ho\n")
    atoms = [Symb("zero"), Var("x"), term(sig, "f x"), term(sig, "h zero x")]
    for t in algebraic_terms(atoms, ["s", "f"], ["plus"], 3):
        res = cap_aliens(t, sig)
        assert is_algebraic(res.cap, sig)
        for (p, alien), name in zip(res.aliens, res.variables):
            assert subterm_at(res.cap, p) == Var(name)
            head = spine(alien)[0]
            assert not (isinstance(head, Symb) and sig.is_first_order(head.name))


def linear_beta_terms(sig):
    nat = Symb("nat")
    atoms = [Symb("zero"), Var("a")]
    bodies = algebraic_terms(atoms + [Bound(0)], ["s"], ["plus"], 2)
    redexes = [App(Abs(nat, body, "y"), arg) for body in bodies for arg in atoms + [term(sig, "plus a zero")]]
    terms = list(redexes)
    for r in redexes:
        for u in atoms:
            terms += [app(Symb("plus"), r, u), app(Symb("plus"), u, r), app(Symb("s"), r)]
        terms.append(Abs(nat, app(Symb("plus"), Bound(0), r), "x"))
    return terms


def test_equivalence_commutes_with_beta():
    sig = load_signature(AC5.replace("symbol b : nat\n", ""))
    violations = 0
    checked = 0
    for t in linear_beta_terms(sig):
        after = [e_class(w, sig) for w in beta_step(t)]
        for u in e_class(t, sig).members:
            for v in beta_step(u):
                checked += 1
                if not any(v in cls for cls in after):
                    violations += 1
    assert checked > 1000
    assert violations == 0


def test_rule_steps_are_syntactic(nat_comm):
    t = term(nat_comm, "plus zero (s zero)")
    assert [u for _, u in rule_steps(t, nat_comm)] == [term(nat_comm, "s (plus zero zero)")]
