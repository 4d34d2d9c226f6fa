"""Acceptance criteria, one test (and one printed line) per criterion."""

import itertools
import random
import time

from cacmod import load_signature
from cacmod.cli import run
from cacmod.closure import general_schema_equation, general_schema_rule, status_less
from cacmod.conditions import (
    FAIL,
    PASS,
    assemble_report,
    check_E_linear,
    check_equation_shape,
    check_finite_classes,
    check_no_predicate_equations,
)
from cacmod.confluence import CONFLUENT, HUET_ROUTE, confluence_verdict, critical_pairs, cp_joinable
from cacmod.errors import ClassBoundExceeded, FuelExhausted
from cacmod.reduction import beta_step, cap_aliens, e_class, joinable_modulo, normalize, rel_step
from cacmod.signature import Limits, Status
from cacmod.syntax import parse, to_signature
from cacmod.terms import STAR, Symb, Var, is_algebraic, spine, subterm_at
from cacmod.typecheck import check, check_rule_typing
from conftest import ACCEPTANCE, ASSOC, COMM, CORPUS, NAT, corpus, term
from oracles import brute_force_cps, from_term, naive_class, oracle_joinable
from test_confluence import _tuple_cps
from test_reduction import (
    AC5,
    ASSOC_T,
    COMM_T,
    RULES_T,
    algebraic_terms,
    linear_beta_terms,
    perturb,
    random_term,
    to_term,
)
from test_closure import SMALL


def report(number, title, checks):
    failed = [name for name, ok in checks if not ok]
    line = f"[{'PASS' if not failed else 'FAIL'}] criterion {number}: {title}"
    if failed:
        line += f" (failed: {', '.join(failed)})"
    print(line)
    ACCEPTANCE.append(line)
    assert not failed, line


def test_criterion_1_worked_examples():
    start = time.perf_counter()
    checks = []
    nat = load_signature(NAT + "symbol P : nat => *\n")
    checks.append(("plus rules typing", all(check_rule_typing(r, nat).passed for r in nat.rules)))
    checks.append(("plus rules schema", all(general_schema_rule(r, nat).passed for r in nat.rules)))
    two = "s (s zero)"
    checks.append(("2+2 = 4", normalize(term(nat, f"plus ({two}) ({two})"), nat)
                   == term(nat, "s (s (s (s zero)))")))
    env = (("p", term(nat, f"P (plus ({two}) ({two}))")),)
    checks.append(("P(2+2) proof at P 4", check(env, Var("p"), term(nat, "P (s (s (s (s zero))))"), nat)))

    lists = corpus("lists")
    checks.append(("app rules typing", all(check_rule_typing(r, lists).passed for r in lists.rules)))
    checks.append(("app rules schema", all(general_schema_rule(r, lists).passed for r in lists.rules)))

    nat_ac = corpus("nat_ac")
    checks.append(("comm/assoc schema", all(general_schema_equation(e, nat_ac).passed
                                            for e in nat_ac.equations)))

    checks.append(("distributivity not linear",
                   check_E_linear(corpus("distrib_eq"))[-1].verdict == FAIL))
    checks.append(("x+0 = x infinite classes",
                   check_finite_classes(corpus("neutral_eq"))[-1].verdict == FAIL))
    checks.append(("x*0 = 0, x+(-x) = 0 shape",
                   [v.verdict for v in check_equation_shape(corpus("invalid_eqs"))] == [FAIL, FAIL]))

    sets = corpus("sets")
    for name, fn in [("shape", check_equation_shape), ("linear", check_E_linear),
                     ("finite classes", check_finite_classes)]:
        checks.append((f"sets {name}", all(v.verdict == PASS for v in fn(sets))))
    checks.append(("sets schema", all(general_schema_equation(e, sets).passed for e in sets.equations)))

    conj = corpus("and_comm")
    checks.append(("and: no predicate equations",
                   check_no_predicate_equations(conj)[0].verdict == FAIL))
    cenv = (("A", STAR), ("B", STAR), ("a", Var("A")), ("b", Var("B")))
    redex = term(conj, "pi1 B A (pair A B a b)")
    checks.append(("pi1 redex checks at B", check(cenv, redex, Var("B"), conj)))
    checks.append(("reduct a", Var("a") in {u for u, _ in rel_step(redex, conj)}))
    checks.append(("reduct does not check at B", not check(cenv, Var("a"), Var("B"), conj)))

    elapsed = time.perf_counter() - start
    checks.append((f"runtime {elapsed:.2f}s < 10s", elapsed < 10))
    report(1, f"worked examples ({elapsed:.2f}s)", checks)


def test_criterion_2_oracle_equivalence():
    checks = []
    ac = load_signature(AC5)
    terms = algebraic_terms([Symb("zero"), Symb("a"), Symb("b")], ["s"], ["plus"], 3)
    checks.append(("e_class vs naive closure",
                   all({from_term(m) for m in e_class(t, ac).members}
                       == naive_class(from_term(t), [COMM_T, ASSOC_T]) for t in terms)))
    abc = load_signature(AC5 + "symbol c : nat\n")
    checks.append(("(a+b)+c has 12 members", len(e_class(term(abc, "plus (plus a b) c"), abc)) == 12))

    sig = load_signature(NAT + COMM + ASSOC)
    rng = random.Random(2024)
    disagreements = 0
    for _ in range(1000):
        t = random_term(rng, 3)
        u = to_term(perturb(rng, t, rng.randint(1, 3))) if rng.random() < 0.5 else random_term(rng, 3)
        want = oracle_joinable(from_term(t), from_term(u), RULES_T, [COMM_T, ASSOC_T], depth=6)
        disagreements += joinable_modulo(t, u, sig) != want
    checks.append((f"joinable vs reachability ({disagreements} disagreements)", disagreements == 0))

    agree = True
    for path in sorted(CORPUS.glob("*.cac")):
        s = corpus(path.stem)
        rules = [(r.id, from_term(r.lhs), from_term(r.rhs)) for r in s.rules]
        eqs = [(e.id, from_term(e.lhs), from_term(e.rhs)) for e in s.equations]
        agree &= _tuple_cps(s) == brute_force_cps(rules, eqs)
    checks.append(("critical pairs vs brute force", agree))
    nat_comm = load_signature(NAT + COMM)
    cp = [c for c in critical_pairs(nat_comm)
          if c.outer == "E1:lr" and c.inner == "R1" and c.position == ()][0]
    checks.append(("CP (x, 0+x)", cp.pair == (Var("x"), term(nat_comm, "plus zero x"))))
    checks.append(("CP (x, 0+x) joinable", cp_joinable(cp, nat_comm)))
    report(2, "oracle equivalence", checks)


def test_criterion_3_invariants():
    checks = []
    sig = load_signature(AC5.replace("symbol b : nat\n", ""))
    violations = 0
    for t in linear_beta_terms(sig):
        after = [e_class(w, sig) for w in beta_step(t)]
        for u in e_class(t, sig).members:
            for v in beta_step(u):
                violations += not any(v in cls for cls in after)
    checks.append((f"equivalence commutes with beta ({violations} violations)", violations == 0))

    cap_sig = load_signature(NAT + COMM + "symbol f : nat => nat kind ho\n")
    maximal = True
    for t in algebraic_terms([Symb("zero"), Var("x"), term(cap_sig, "f x")], ["s", "f"], ["plus"], 3):
        res = cap_aliens(t, cap_sig)
        maximal &= is_algebraic(res.cap, cap_sig)
        for (p, alien), name in zip(res.aliens, res.variables):
            maximal &= subterm_at(res.cap, p) == Var(name) and subterm_at(t, p) == alien
            maximal &= spine(alien)[0] == Symb("f")
    checks.append(("cap/aliens maximality", maximal))

    tuples = [list(p) for p in itertools.product(SMALL[:8], repeat=2)]
    less = {(i, j) for i, a in enumerate(tuples) for j, b in enumerate(tuples)
            if status_less(a, b, Status.MUL)}
    irreflexive = all((i, i) not in less for i in range(len(tuples)))
    transitive = all((i, k) in less for i, j in less for k in range(len(tuples)) if (j, k) in less)
    checks.append(("Mul strict partial order", irreflexive and transitive))

    nat_ac = load_signature(NAT + COMM + ASSOC)
    rng = random.Random(11)
    checks.append(("normal forms are normal",
                   all(rel_step(normalize(t, nat_ac), nat_ac) == []
                       for t in (random_term(rng, 3) for _ in range(200)))))

    same = all(assemble_report(corpus(n), search_steps=300).dumps()
               == assemble_report(corpus(n), search_steps=300).dumps()
               for n in ("nat_ac", "lists", "sets", "and_comm"))
    checks.append(("report determinism", same))
    report(3, "invariant suites", checks)


def test_criterion_4_confluence_pipeline(capsys):
    checks = []
    code = run(["confluence", str(CORPUS / "nat_ac.cac"), "--attest-fo-sn"])
    out = capsys.readouterr().out
    checks.append(("CLI verdict", code == 0 and f"verdict: {CONFLUENT}" in out))
    checks.append(("Huet route", f"theorem: {HUET_ROUTE}" in out))
    checks.append(("arrow confluent note", "→ is confluent" in out))
    non_ll = load_signature(NAT + COMM + ASSOC + "symbol eqn : nat => nat => nat\n"
                            "rule [x:nat] eqn x x -> zero\n")
    checks.append(("non-left-linear gives UNKNOWN",
                   confluence_verdict(non_ll, sn_passed=True).verdict == "UNKNOWN"))
    unjoinable = load_signature(NAT + COMM + ASSOC + "rule plus zero zero -> s zero\n")
    checks.append(("unjoinable CP gives FAIL",
                   confluence_verdict(unjoinable, sn_passed=True).verdict == "FAIL"))
    report(4, "confluence pipeline", checks)


def test_criterion_5_negative_controls():
    checks = []
    loop = load_signature(NAT + "symbol f : nat => nat\nrule [x:nat] f x -> f x\n")
    checks.append(("f x -> f x fails schema", not general_schema_rule(loop.rules[-1], loop).passed))
    dup = load_signature(NAT + COMM + "symbol d : nat => nat\nrule [x:nat] d x -> plus x x\n"
                         "symbol list : * => *\nsymbol nil : (A:*) list A\n"
                         "symbol id : (A:*) list A => list A\nrule [A:*, l:list A] id A l -> l\n")
    entry = assemble_report(dup, attest_fo_sn=True).entry("R1-non-duplicating")
    checks.append(("duplicating rule fails", bool(dup.higher_order_rules) and entry.required
                   and entry.verdict == FAIL))
    spin = load_signature(NAT + "symbol g : nat => nat\nrule [x:nat] g x -> g (s x)\n")
    try:
        normalize(term(spin, "g zero"), spin, fuel=100)
        fuel_ok = False
    except FuelExhausted:
        fuel_ok = True
    checks.append(("fuel exhaustion is typed", fuel_ok))
    src = NAT + "eq [x:nat] plus x zero = x\n"
    small = to_signature(parse(src), Limits(50, 1000))
    try:
        joinable_modulo(term(small, "plus x zero"), term(small, "s x"), small)
        bound_ok = False
    except ClassBoundExceeded:
        bound_ok = True
    checks.append(("class bound overflow is typed", bound_ok))
    report(5, "negative controls", checks)
