"""Beta, rule and equation steps; rewriting modulo the equations.

Matching modulo the equations enumerates the (finite, by hypothesis)
equivalence class of the subject and matches syntactically against each
member. A size bound guards against infinite classes.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

from .errors import ClassBoundExceeded, FuelExhausted
from .signature import Signature
from .terms import (
    Abs,
    App,
    Prod,
    Symb,
    Term,
    Var,
    apply_subst,
    arg_position,
    free_vars,
    head_symbol,
    instantiate,
    replace_at,
    show,
    spine,
    spine_path,
    subterm_at,
)


@dataclass(frozen=True)
class Step:
    relation: str  # "beta", "rule" or "eq"
    position: tuple
    id: str | None = None
    direction: str | None = None  # "lr" / "rl" for equation steps
    subst: tuple = ()  # sorted (variable, term) pairs

    def to_json(self, before: Term) -> dict:
        out = {"relation": self.relation, "position": spine_path(before, self.position)}
        if self.id is not None:
            out["id"] = self.id
        if self.direction is not None:
            out["direction"] = self.direction
        if self.subst:
            out["subst"] = {x: show(u) for x, u in self.subst}
        return out


@dataclass(frozen=True)
class ReductionTrace:
    steps: tuple[Step, ...] = ()

    def __add__(self, other: "ReductionTrace") -> "ReductionTrace":
        return ReductionTrace(self.steps + other.steps)

    def __len__(self):
        return len(self.steps)

    def to_json(self, source: Term, sig: Signature) -> list[dict]:
        out = []
        t = source
        for s in self.steps:
            out.append(s.to_json(t))
            t = apply_step(t, s, sig)
        return out


@dataclass(frozen=True)
class EClass:
    representative: Term
    members: tuple[Term, ...]
    truncated: bool
    _parents: dict = field(default_factory=dict, repr=False, compare=False)

    def __contains__(self, t):
        return t in self._parents

    def __len__(self):
        return len(self.members)

    def trace_to(self, t: Term) -> ReductionTrace:
        """Equation steps leading from the representative to ``t``."""
        steps = []
        while True:
            parent = self._parents[t]
            if parent is None:
                break
            t, step = parent
            steps.append(step)
        return ReductionTrace(tuple(reversed(steps)))


class CapAliens(NamedTuple):
    cap: Term
    aliens: list  # (position, alien) in left-to-right order
    variables: list  # variable name given to each alien
    approximate: bool  # some joinability test ran out of fuel


# ---------- matching ----------

def match(pattern: Term, subject: Term, sigma: dict | None = None) -> dict | None:
    """Syntactic matching of an algebraic pattern (non-linear patterns allowed)."""
    sigma = {} if sigma is None else sigma
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        match p:
            case Var(x):
                bound = sigma.get(x)
                if bound is None:
                    sigma[x] = s
                elif bound != s:
                    return None
            case App(pf, pa):
                if not isinstance(s, App):
                    return None
                stack.append((pf, s.fun))
                stack.append((pa, s.arg))
            case _:
                if p != s:
                    return None
    return sigma


def _frozen(sigma: dict) -> tuple:
    return tuple(sorted(sigma.items()))


# ---------- root steps and traversal ----------

RootStep = Callable[[Term], Iterator[tuple[Step, Term]]]


def _beta_root(t: Term):
    if isinstance(t, App) and isinstance(t.fun, Abs):
        yield Step("beta", ()), instantiate(t.fun.body, t.arg)


def _rules_by_head(sig: Signature, rules=None) -> dict:
    def build(rs):
        index: dict = {}
        for r in rs:
            index.setdefault(r.head, []).append((r, r.lhs))
        return index

    if rules is None:
        return sig._cached("rules_by_head", lambda: build(sig.rules))
    return build(rules)


def _rule_root(index: dict) -> RootStep:
    def step(t):
        h = head_symbol(t)
        for rule, lhs in index.get(h, ()):
            sigma = match(lhs, t)
            if sigma is not None:
                yield Step("rule", (), rule.id, None, _frozen(sigma)), apply_subst(rule.rhs, sigma)
    return step


def _usable_orientations(sig: Signature) -> dict:
    """Equation orientations indexed by source head; orientations that would invent variables are unusable."""
    def build():
        index: dict = {}
        for eq in sig.equations:
            for direction, src, tgt in eq.orientations():
                if not free_vars(tgt) <= free_vars(src):
                    continue
                index.setdefault(head_symbol(src), []).append((eq.id, direction, src, tgt))
        return index
    return sig._cached("eq_index", build)


def _partial(t: Term, sig: Signature) -> bool:
    """A symbol applied to fewer arguments than its arity (not a subterm in the algebraic sense)."""
    head, args = spine(t)
    return isinstance(head, Symb) and head.name in sig.symbols and len(args) < sig.arity(head.name)


def _eq_root(sig: Signature) -> RootStep:
    index = _usable_orientations(sig)
    var_headed = index.get(None, [])

    def step(t):
        h = head_symbol(t)
        if var_headed and _partial(t, sig):
            candidates = index.get(h, [])
        else:
            candidates = index.get(h, []) + var_headed if h is not None else var_headed
        for eq_id, direction, src, tgt in candidates:
            sigma = match(src, t)
            if sigma is not None:
                yield Step("eq", (), eq_id, direction, _frozen(sigma)), apply_subst(tgt, sigma)
    return step


def _relocate(step: Step, prefix: tuple) -> Step:
    return Step(step.relation, prefix + step.position, step.id, step.direction, step.subst)


def _everywhere(t: Term, root: RootStep, innermost: bool = False, pos: tuple = ()):
    """All one-step rewrites of ``t`` by ``root`` applied at any position."""
    if not innermost:
        for s, new in root(t):
            yield _relocate(s, pos), new
    match t:
        case App(f, a):
            for s, nf in _everywhere(f, root, innermost, pos + (1,)):
                yield s, App(nf, a)
            for s, na in _everywhere(a, root, innermost, pos + (2,)):
                yield s, App(f, na)
        case Abs(ty, b, hint):
            for s, nt in _everywhere(ty, root, innermost, pos + (1,)):
                yield s, Abs(nt, b, hint)
            for s, nb in _everywhere(b, root, innermost, pos + (2,)):
                yield s, Abs(ty, nb, hint)
        case Prod(ty, b, hint):
            for s, nt in _everywhere(ty, root, innermost, pos + (1,)):
                yield s, Prod(nt, b, hint)
            for s, nb in _everywhere(b, root, innermost, pos + (2,)):
                yield s, Prod(ty, nb, hint)
    if innermost:
        for s, new in root(t):
            yield _relocate(s, pos), new


def _union(*roots: RootStep) -> RootStep:
    def step(t):
        for r in roots:
            yield from r(t)
    return step


def _first(it):
    return next(iter(it), None)


# ---------- public steps ----------

def beta_step(t: Term) -> set[Term]:
    return {new for _, new in _everywhere(t, _beta_root)}


def rule_steps(t: Term, sig: Signature, rules=None) -> list[tuple[Step, Term]]:
    """Syntactic rule steps (no equations), outermost positions first."""
    return list(_everywhere(t, _rule_root(_rules_by_head(sig, rules))))


def eq_steps(t: Term, sig: Signature) -> list[tuple[Step, Term]]:
    return list(_everywhere(t, _eq_root(sig)))


def apply_step(t: Term, step: Step, sig: Signature) -> Term:
    """Replay one recorded step; raises ValueError if it does not apply."""
    sub = subterm_at(t, step.position)
    match step.relation:
        case "beta":
            if not (isinstance(sub, App) and isinstance(sub.fun, Abs)):
                raise ValueError(f"no beta-redex at {list(step.position)}")
            new = instantiate(sub.fun.body, sub.arg)
        case "rule":
            rule = sig.rule(step.id)
            sigma = match(rule.lhs, sub)
            if sigma is None:
                raise ValueError(f"rule {step.id} does not match at {list(step.position)}")
            new = apply_subst(rule.rhs, sigma)
        case "eq":
            eq = sig.equation(step.id)
            src, tgt = (eq.lhs, eq.rhs) if step.direction == "lr" else (eq.rhs, eq.lhs)
            sigma = match(src, sub)
            if sigma is None:
                raise ValueError(f"equation {step.id} does not match at {list(step.position)}")
            new = apply_subst(tgt, sigma)
        case _:
            raise ValueError(f"unknown relation {step.relation}")
    return replace_at(t, step.position, new)


def replay(t: Term, trace: ReductionTrace, sig: Signature) -> Term:
    for s in trace.steps:
        t = apply_step(t, s, sig)
    return t


# ---------- equivalence classes ----------

def e_class(t: Term, sig: Signature, bound: int | None = None) -> EClass:
    """Breadth-first closure of ``t`` under single equation steps."""
    bound = sig.limits.max_class_size if bound is None else bound
    root = _eq_root(sig)
    parents: dict = {t: None}
    order = [t]
    if not sig.equations:
        return EClass(t, (t,), False, parents)
    queue = deque([t])
    while queue:
        u = queue.popleft()
        for step, v in _everywhere(u, root):
            if v in parents:
                continue
            parents[v] = (u, step)
            order.append(v)
            if len(order) > bound:
                return EClass(t, tuple(order), True, parents)
            queue.append(v)
    return EClass(t, tuple(order), False, parents)


def _checked_class(t: Term, sig: Signature) -> EClass:
    cls = e_class(t, sig)
    if cls.truncated:
        raise ClassBoundExceeded(sig.limits.max_class_size, t)
    return cls


def equivalent(t: Term, u: Term, sig: Signature) -> bool:
    """``t ~ u``; raises if the class of ``t`` is too large to decide."""
    if t == u:
        return True
    cls = e_class(t, sig)
    if u in cls:
        return True
    if cls.truncated:
        raise ClassBoundExceeded(sig.limits.max_class_size, t)
    return False


def match_modulo(pattern: Term, subject: Term, sig: Signature) -> list[dict]:
    out, seen = [], set()
    for m in _checked_class(subject, sig).members:
        sigma = match(pattern, m)
        if sigma is not None and _frozen(sigma) not in seen:
            seen.add(_frozen(sigma))
            out.append(sigma)
    return out


def rel_step(t: Term, sig: Signature) -> list[tuple[Term, ReductionTrace]]:
    """One step of beta or of rewriting modulo the equations, with evidence."""
    out: dict = {}
    for step, new in _everywhere(t, _beta_root):
        out.setdefault(new, ReductionTrace((step,)))
    rules = _rule_root(_rules_by_head(sig))
    cls = _checked_class(t, sig)
    for m in cls.members:
        prefix = None
        for step, new in _everywhere(m, rules):
            if new not in out:
                if prefix is None:
                    prefix = cls.trace_to(m)
                out[new] = prefix + ReductionTrace((step,))
    return list(out.items())


# ---------- normal forms ----------

def _normalize(t: Term, sig: Signature, fuel: int | None, root: RootStep,
               modulo: bool, record: bool):
    fuel = sig.limits.fuel if fuel is None else fuel
    rules_only = _rule_root(_rules_by_head(sig)) if modulo else None
    steps: list[Step] = []
    used = 0
    while True:
        found = _first(_everywhere(t, root, innermost=True))
        prefix = ()
        if found is None and modulo and sig.equations:
            cls = _checked_class(t, sig)
            for m in cls.members[1:]:
                found = _first(_everywhere(m, rules_only, innermost=True))
                if found is not None:
                    prefix = cls.trace_to(m).steps
                    break
        if found is None:
            return t, ReductionTrace(tuple(steps))
        used += 1
        if used > fuel:
            raise FuelExhausted(fuel, t)
        step, t = found
        if record:
            steps.extend(prefix)
            steps.append(step)


def normalize(t: Term, sig: Signature, fuel: int | None = None) -> Term:
    """A normal form for beta plus rewriting modulo, leftmost-innermost."""
    root = _union(_beta_root, _rule_root(_rules_by_head(sig)))
    return _normalize(t, sig, fuel, root, True, False)[0]


def normalize_with_trace(t: Term, sig: Signature, fuel: int | None = None):
    root = _union(_beta_root, _rule_root(_rules_by_head(sig)))
    return _normalize(t, sig, fuel, root, True, True)


def joinable_modulo(t: Term, u: Term, sig: Signature, fuel: int | None = None) -> bool:
    if t == u:
        return True
    return equivalent(normalize(t, sig, fuel), normalize(u, sig, fuel), sig)


def restricted_normalize(t: Term, f: str, sig: Signature, fuel: int | None = None) -> Term:
    """Normal form for beta plus the rules whose head is strictly below ``f``; no equations."""
    prec = sig.precedence()
    rules = [r for r in sig.rules if prec.greater(f, r.head)]
    root = _union(_beta_root, _rule_root(_rules_by_head(sig, rules)))
    return _normalize(t, sig, fuel, root, False, False)[0]


# ---------- cap and aliens ----------

CAP_PREFIX = "_z"


def cap_aliens(t: Term, sig: Signature, fuel: int | None = None) -> CapAliens:
    """Largest first-order algebraic top part of ``t`` and the subterms cut off below it.

    Aliens that are joinable modulo the equations share a variable; the
    classes are numbered in left-to-right order.
    """
    aliens: list = []

    def walk(u: Term, pos: tuple) -> Term:
        if isinstance(u, Var):
            return u
        head, args = spine(u)
        if (isinstance(head, Symb) and sig.is_first_order(head.name)
                and len(args) == sig.arity(head.name)):
            new = head
            for i, a in enumerate(args):
                new = App(new, walk(a, pos + arg_position(len(args), i)))
            return new
        aliens.append((pos, u))
        return Var(f"{CAP_PREFIX}?")

    walk(t, ())
    reps: list[Term] = []
    names: list[str] = []
    approximate = False
    for _, alien in aliens:
        for k, rep in enumerate(reps):
            try:
                same = joinable_modulo(rep, alien, sig, fuel)
            except (FuelExhausted, ClassBoundExceeded):
                approximate, same = True, False
            if same:
                names.append(f"{CAP_PREFIX}{k + 1}")
                break
        else:
            reps.append(alien)
            names.append(f"{CAP_PREFIX}{len(reps)}")
    cap = t
    for (pos, _), name in zip(aliens, names):
        cap = replace_at(cap, pos, Var(name))
    return CapAliens(cap, aliens, names, approximate)
