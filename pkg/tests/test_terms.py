import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cacmod import load_signature
from cacmod.errors import InvalidPosition
from cacmod.terms import (
    STAR,
    Abs,
    App,
    Bound,
    Symb,
    Var,
    apply_subst,
    app,
    free_vars,
    instantiate,
    is_algebraic,
    lam,
    linear,
    pi,
    positions,
    replace_at,
    show,
    spine,
    spine_path,
    subterm_at,
)
from conftest import NAT, term
from oracles import from_named, named_fv, named_subst, to_named
from strategies import substitutions, terms

SIG = load_signature(NAT + "symbol times : nat => nat => nat\nsymbol P : nat => *\n")


def test_free_vars_examples():
    assert free_vars(term(SIG, "[x:nat] x")) == frozenset()
    assert free_vars(term(SIG, "plus x y")) == {"x", "y"}
    t = term(SIG, "(x:A) P x y")
    assert free_vars(t) == {"A", "y"}
    assert free_vars(t) == named_fv(to_named(t))


def test_subst_examples():
    assert apply_subst(Var("x"), {"x": Symb("zero")}) == Symb("zero")
    t = term(SIG, "[x:nat] y")
    out = apply_subst(t, {"y": Var("x")})
    # the binder no longer captures: the body is the free x
    assert out == Abs(Symb("nat"), Var("x"), "x")
    assert show(out) == "[x':nat] x"
    assert apply_subst(term(SIG, "plus x y"), {"x": term(SIG, "s z"), "y": Symb("zero")}) \
        == term(SIG, "plus (s z) zero")


def test_alpha_equivalence_is_structural():
    assert lam("x", STAR, Var("x")) == lam("y", STAR, Var("y"))
    assert pi("a", STAR, Var("a")) == pi("b", STAR, Var("b"))
    assert lam("x", STAR, Var("z")) != lam("x", STAR, Var("x"))


@given(terms(), substitutions())
@settings(max_examples=300, deadline=None)
def test_subst_agrees_with_named_oracle(t, theta):
    expected = from_named(named_subst(to_named(t), {x: to_named(u) for x, u in theta.items()}))
    assert apply_subst(t, theta) == expected


@given(terms(), substitutions())
@settings(max_examples=300, deadline=None)
def test_free_vars_of_substitution(t, theta):
    fv = free_vars(t)
    expected = (fv - set(theta)).union(*(free_vars(theta[x]) for x in fv & set(theta)))
    assert free_vars(apply_subst(t, theta)) == expected


@given(terms())
@settings(max_examples=200, deadline=None)
def test_free_vars_agrees_with_named_oracle(t):
    assert free_vars(t) == named_fv(to_named(t))


@given(terms(), st.data())
@settings(max_examples=300, deadline=None)
def test_position_round_trip(t, data):
    p = data.draw(st.sampled_from(positions(t)))
    assert replace_at(t, p, subterm_at(t, p)) == t
    marker = Var("marker")
    assert subterm_at(replace_at(t, p, marker), p) == marker


def test_position_round_trip_exhaustive_small():
    base = [Var("x"), Symb("c")]
    layer = base + [App(a, b) for a in base for b in base] + [Abs(a, Bound(0), "v") for a in base]
    level = layer + [App(a, b) for a in layer for b in layer[:4]]
    for t in level:
        for p in positions(t):
            assert replace_at(t, p, subterm_at(t, p)) == t


def test_positions_and_spine_paths():
    t = term(SIG, "plus x zero")
    assert subterm_at(t, (2,)) == Symb("zero")
    assert replace_at(t, (2,), term(SIG, "s y")) == term(SIG, "plus x (s y)")
    assert spine_path(t, (2,)) == [2]
    assert spine_path(t, (1, 2)) == [1]
    assert spine_path(t, (1, 1)) == [0]
    assert spine_path(t, (1,)) == [["prefix", 1]]
    with pytest.raises(InvalidPosition):
        subterm_at(t, (3,))


def test_is_algebraic_examples():
    assert is_algebraic(term(SIG, "plus x (s y)"), SIG)
    assert not is_algebraic(term(SIG, "[x:nat] x"), SIG)
    assert not is_algebraic(term(SIG, "plus x"), SIG)


def test_linear_examples():
    assert linear(term(SIG, "plus x y"))
    assert not linear(term(SIG, "plus (times x y) (times x z)"))
    assert not linear(term(SIG, "plus x x"))


def test_beta_instantiation_under_binders():
    # ([x:nat][y:nat] x) a  ->  [y:nat] a, with a containing no bound index
    body = term(SIG, "[x:nat][y:nat] x")
    assert instantiate(body.body, Var("a")) == Abs(Symb("nat"), Var("a"), "y")


def test_spine_view():
    t = app(Symb("plus"), Var("x"), Symb("zero"))
    assert spine(t) == (Symb("plus"), [Var("x"), Symb("zero")])
