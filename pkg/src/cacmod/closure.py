"""Computability closure, accessibility and the General Schema.

``closure_check`` decides the closure judgment by syntax-directed
inference, mirroring ``typecheck.infer`` except that

* a symbol ``g`` is usable on its own only when ``g`` is strictly below the
  head ``f`` in the precedence,
* a symbol equivalent to ``f`` must be applied to at least its arity, with
  arguments smaller than the left-hand side arguments for the status of ``f``
  and each argument itself in the closure,
* variables of the rule environment behave as symbols below ``f``,
* conversion only uses beta and the rules of symbols below ``f``.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

from .errors import FuelExhausted
from .reduction import restricted_normalize
from .signature import Equation, RewriteRule, Signature, Status, env_lookup
from .terms import (
    BOX,
    Abs,
    App,
    Bound,
    Prod,
    Sort,
    Symb,
    Term,
    Var,
    abstract,
    apply_subst,
    free_vars,
    fresh_name,
    instantiate,
    instantiate_telescope,
    prod_telescope,
    show,
    spine,
)


class Polarity(enum.Enum):
    ONLY_POSITIVE = "only-positive"
    HAS_NEGATIVE = "has-negative"
    ABSENT = "absent"


class ClosureFailure(Exception):
    def __init__(self, rule: str, message: str):
        super().__init__(f"({rule}) {message}")
        self.rule = rule
        self.message = message


# ---------- positivity and accessibility ----------

def positive_occurrence(c: str, t: Term, positive: bool = True) -> Polarity:
    """Polarity of the occurrences of symbol ``c`` in ``t`` (domains of products flip it)."""
    found_pos = found_neg = False

    def walk(u: Term, pol: bool):
        nonlocal found_pos, found_neg
        match u:
            case Symb(name) if name == c:
                if pol:
                    found_pos = True
                else:
                    found_neg = True
            case Prod(ty, body):
                walk(ty, not pol)
                walk(body, pol)
            case App(f, a):
                walk(f, pol)
                walk(a, pol)
            case Abs(ty, body):
                walk(ty, pol)
                walk(body, pol)

    walk(t, positive)
    if found_neg:
        return Polarity.HAS_NEGATIVE
    return Polarity.ONLY_POSITIVE if found_pos else Polarity.ABSENT


def _accessible_args(g: str, args: list[Term], sig: Signature) -> list[Term]:
    decl = sig.symbols[g]
    if len(args) != decl.arity:
        return []
    out_head = sig.output_head(g)
    if out_head is None or not sig.symbols[out_head].is_predicate or not sig.is_constant(out_head):
        return []
    if sig.is_constant(g):
        return list(args)  # constructor: every argument
    doms, _ = prod_telescope(decl.type)
    return [a for a, (_, ty) in zip(args, doms)
            if positive_occurrence(out_head, ty) is not Polarity.HAS_NEGATIVE]


def accessible_vars(f: str, lhs_args, sig: Signature, rho=None) -> set[str]:
    """Variables reachable from the left-hand side arguments through accessible positions.

    Variables eliminated by the repair substitution ``rho`` are not counted.
    """
    out: set[str] = set()
    stack = list(lhs_args)
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            out.add(t.name)
            continue
        head, args = spine(t)
        if isinstance(head, Symb):
            stack.extend(_accessible_args(head.name, args, sig))
    return out - set(rho or {})


# ---------- status comparison ----------

def _spine_subterm(small: Term, big: Term) -> bool:
    """Strict subterm through application arguments only (no partial applications)."""
    head, args = spine(big)
    for a in args:
        if a == small or _spine_subterm(small, a):
            return True
    if isinstance(big, (Abs, Prod)):
        return any(small == c or _spine_subterm(small, c) for c in (big.ty, big.body))
    return False


def status_less(smaller, larger, status: Status) -> bool:
    """Status extension of the strict subterm ordering: is ``smaller`` below ``larger``?"""
    smaller, larger = list(smaller), list(larger)
    if status is Status.LEX:
        for u, l in zip(smaller, larger):
            if u == l:
                continue
            return _spine_subterm(u, l)
        return False
    # multiset extension: remove common elements, every remaining element
    # on the left must be dominated by some remaining element on the right
    left, right = Counter(smaller), Counter(larger)
    common = left & right
    left -= common
    right -= common
    if not left and not right:
        return False
    return all(any(_spine_subterm(u, l) for l in right) for u in left)


# ---------- the closure judgment ----------

@dataclass
class ClosureContext:
    sig: Signature
    head: str
    lhs_args: tuple
    env: tuple = ()
    rho: dict = field(default_factory=dict)
    status: Status | None = None
    fuel: int | None = None
    _checked_types: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        if self.status is None:
            self.status = self.sig.symbols[self.head].status
        self.prec = self.sig.precedence()

    def env_type(self, x: str):
        return env_lookup(self.env, x)


def _fresh(hint, delta, ctx, *terms):
    avoid = {x for x, _ in delta} | {x for x, _ in ctx.env}
    for t in terms:
        avoid |= free_vars(t)
    return fresh_name(hint, avoid)


def _same(ctx: ClosureContext, a: Term, b: Term) -> bool:
    if a == b:
        return True
    return (restricted_normalize(a, ctx.head, ctx.sig, ctx.fuel)
            == restricted_normalize(b, ctx.head, ctx.sig, ctx.fuel))


def _as_product(ctx, ty: Term, subject: Term) -> Prod:
    if isinstance(ty, Prod):
        return ty
    nf = restricted_normalize(ty, ctx.head, ctx.sig, ctx.fuel)
    if isinstance(nf, Prod):
        return nf
    raise ClosureFailure("app", f"{show(subject)} is applied but has type {show(ty)}")


def _symbol_type(ctx: ClosureContext, g: str, node: str) -> Term:
    ty = ctx.sig.symbols[g].type
    if g not in ctx._checked_types:
        ctx._checked_types.add(g)
        _sort(ctx, (), ty, node)
    return ty


def _sort(ctx, delta, ty: Term, node: str) -> Sort:
    s = _infer(ctx, delta, ty)
    if not isinstance(s, Sort):
        s = restricted_normalize(s, ctx.head, ctx.sig, ctx.fuel)
    if not isinstance(s, Sort):
        raise ClosureFailure(node, f"{show(ty)} is not a type")
    return s


def _check(ctx, delta, t: Term, ty: Term):
    inferred = _infer(ctx, delta, t)
    if inferred == ty:
        return
    if ty != BOX:
        _sort(ctx, delta, ty, "conv")
    if not _same(ctx, inferred, ty):
        raise ClosureFailure("conv", f"{show(t)} has type {show(inferred)}, "
                                     f"not convertible to {show(ty)} using smaller rules")


def _infer(ctx: ClosureContext, delta: tuple, t: Term) -> Term:
    head, args = spine(t)
    if isinstance(head, Symb) and head.name != ctx.head and not ctx.prec.greater(ctx.head, head.name) \
            and not ctx.prec.equivalent(ctx.head, head.name):
        raise ClosureFailure("symb<", f"{head.name} is not smaller than {ctx.head}")
    if isinstance(head, Symb) and ctx.prec.equivalent(ctx.head, head.name):
        return _infer_equivalent(ctx, delta, head.name, args, t)
    match t:
        case Sort("*"):
            return BOX
        case Sort():
            raise ClosureFailure("ax", "box has no type")
        case Var(x):
            ty = env_lookup(delta, x)
            if ty is not None:
                return ty
            ty = ctx.env_type(x)
            if ty is None:
                raise ClosureFailure("var", f"variable {x} is neither bound nor in the rule environment")
            if ("var", x) not in ctx._checked_types:
                ctx._checked_types.add(("var", x))
                _sort(ctx, (), ty, "symb<")
            return ty
        case Bound():
            raise ClosureFailure("var", "loose bound variable")
        case Symb(g):
            return _symbol_type(ctx, g, "symb<")
        case App(f, a):
            p = _as_product(ctx, _infer(ctx, delta, f), f)
            _check(ctx, delta, a, p.ty)
            return instantiate(p.body, a)
        case Abs(ty, body, hint):
            _sort(ctx, delta, ty, "abs")
            x = _fresh(hint, delta, ctx, body)
            inner = delta + ((x, ty),)
            b_ty = _infer(ctx, inner, instantiate(body, Var(x)))
            _sort(ctx, inner, b_ty, "abs")
            return Prod(ty, abstract(b_ty, x), hint)
        case Prod(ty, body, hint):
            _sort(ctx, delta, ty, "prod")
            x = _fresh(hint, delta, ctx, body)
            return _sort(ctx, delta + ((x, ty),), instantiate(body, Var(x)), "prod")
    raise ClosureFailure("var", f"not a term: {t!r}")


def _infer_equivalent(ctx, delta, g: str, args: list[Term], t: Term) -> Term:
    arity = ctx.sig.symbols[g].arity
    if len(args) < arity:
        raise ClosureFailure("symb=", f"{g} is equivalent to {ctx.head} but applied to "
                                      f"{len(args)} < {arity} arguments")
    direct = args[:arity]
    if not status_less(direct, ctx.lhs_args, ctx.status):
        raise ClosureFailure(
            "symb=", f"arguments ({', '.join(show(a) for a in direct)}) of {g} are not smaller than "
                     f"({', '.join(show(a) for a in ctx.lhs_args)}) for the {ctx.status.value} status")
    ty = _symbol_type(ctx, g, "symb=")
    for a in direct:
        p = ty if isinstance(ty, Prod) else _as_product(ctx, ty, Symb(g))
        _check(ctx, delta, a, p.ty)
        ty = instantiate(p.body, a)
    for a in args[arity:]:
        p = _as_product(ctx, ty, t)
        _check(ctx, delta, a, p.ty)
        ty = instantiate(p.body, a)
    return ty


def closure_check(ctx: ClosureContext, t: Term, ty: Term) -> bool:
    try:
        _check(ctx, (), t, ty)
        return True
    except ClosureFailure:
        return False


def closure_explain(ctx: ClosureContext, t: Term, ty: Term) -> ClosureFailure | None:
    try:
        _check(ctx, (), t, ty)
        return None
    except ClosureFailure as e:
        return e


# ---------- General Schema ----------

@dataclass
class SchemaVerdict:
    id: str
    passed: bool
    failed_rule: str | None = None  # name of the failing closure rule, or "accessibility"
    message: str | None = None
    orientations: dict = field(default_factory=dict)  # equations: direction -> SchemaVerdict
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_json(self) -> dict:
        out = {"id": self.id, "verdict": self.verdict}
        if self.failed_rule:
            out["failed_rule"] = self.failed_rule
            out["message"] = self.message
        if self.orientations:
            out["orientations"] = {k: v.to_json() for k, v in self.orientations.items()}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


INTERPRETATION_NOTES = [
    "symb=: each argument of an equivalent symbol is itself checked in the closure at its declared type",
    "status comparisons use the syntactic strict subterm ordering, not subterms modulo the equations",
]


def general_schema_rule(rule: RewriteRule, sig: Signature, fuel: int | None = None) -> SchemaVerdict:
    access = accessible_vars(rule.head, rule.lhs_args, sig, rule.rho)
    missing = [x for x, _ in rule.env if x not in access]
    if missing:
        return SchemaVerdict(rule.id, False, "accessibility",
                             f"environment variables {missing} are not accessible in the left-hand side")
    target = apply_subst(instantiate_telescope(sig.symbols[rule.head].type, list(rule.lhs_args)),
                         rule.rho)
    ctx = ClosureContext(sig, rule.head, tuple(rule.lhs_args), tuple(rule.env), dict(rule.rho),
                         fuel=fuel)
    try:
        failure = closure_explain(ctx, rule.rhs, target)
    except FuelExhausted as e:
        return SchemaVerdict(rule.id, False, "conv", str(e))
    if failure:
        return SchemaVerdict(rule.id, False, failure.rule, failure.message)
    return SchemaVerdict(rule.id, True)


def _equation_direction(eq: Equation, src: Term, tgt: Term, label: str, sig: Signature,
                        fuel) -> SchemaVerdict:
    f, ls = spine(src)
    g, ms = spine(tgt)
    if not isinstance(f, Symb) or not isinstance(g, Symb):
        return SchemaVerdict(label, False, "shape", "both sides must be headed by a symbol")
    if len(ms) != sig.arity(g.name) or len(ls) != sig.arity(f.name):
        return SchemaVerdict(label, False, "shape", "sides must be fully applied")
    access = accessible_vars(f.name, ls, sig, eq.rho)
    env_names = {x for x, _ in eq.env}
    used = set()
    for m in ms:
        used |= free_vars(apply_subst(m, eq.rho))
    missing = sorted((used & env_names) - access)
    if missing:
        return SchemaVerdict(label, False, "accessibility",
                             f"variables {missing} are not accessible in {show(src)}")
    ctx = ClosureContext(sig, f.name, tuple(ls), tuple(eq.env), dict(eq.rho), fuel=fuel)
    ty = sig.symbols[g.name].type
    for m in ms:
        if not isinstance(ty, Prod):
            return SchemaVerdict(label, False, "app", f"type of {g.name} has too few products")
        expected = apply_subst(ty.ty, eq.rho)
        try:
            failure = closure_explain(ctx, apply_subst(m, eq.rho), expected)
        except FuelExhausted as e:
            return SchemaVerdict(label, False, "conv", str(e))
        if failure:
            return SchemaVerdict(label, False, failure.rule,
                                 f"argument {show(m)}: {failure.message}")
        ty = instantiate(ty.body, m)
    return SchemaVerdict(label, True)


def general_schema_equation(eq: Equation, sig: Signature, fuel: int | None = None) -> SchemaVerdict:
    """Check the arguments of each side in the closure of the other side, in both directions."""
    results = {}
    for direction, src, tgt in eq.orientations():
        results[direction] = _equation_direction(eq, src, tgt, f"{eq.id}:{direction}", sig, fuel)
    failed = [v for v in results.values() if not v.passed]
    if failed:
        first = failed[0]
        return SchemaVerdict(eq.id, False, first.failed_rule, f"{first.id}: {first.message}",
                             results)
    return SchemaVerdict(eq.id, True, orientations=results)
