"""Type inference for CC extended with symbols, converting modulo beta, rules and equations.

Environments are sequences of ``(name, type)`` pairs; binders are opened
with fresh names so that every subject handled here is free of loose
de Bruijn indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import IllTyped
from .reduction import joinable_modulo, normalize
from .signature import Equation, RewriteRule, Signature, env_lookup
from .terms import (
    BOX,
    STAR,
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
    show,
    spine,
)


@dataclass(frozen=True)
class Judgment:
    env: tuple
    subject: Term
    type: Term

    def to_json(self) -> dict:
        return {"env": [[x, show(t)] for x, t in self.env],
                "subject": show(self.subject), "type": show(self.type)}


def _fresh(hint: str, env, *terms) -> str:
    avoid = {x for x, _ in env}
    for t in terms:
        avoid |= free_vars(t)
    return fresh_name(hint, avoid)


def infer(env, t: Term, sig: Signature, trace: list | None = None) -> Term:
    """A type of ``t`` in ``env``; raises ``IllTyped`` with the failing sub-judgment."""
    env = tuple(env)
    ty = _infer(env, t, sig, trace)
    if trace is not None:
        trace.append(Judgment(env, t, ty))
    return ty


def _infer(env, t, sig, trace):
    match t:
        case Sort("*"):
            return BOX
        case Sort():
            raise IllTyped("box has no type", t, env)
        case Var(x):
            ty = env_lookup(env, x)
            if ty is None:
                raise IllTyped(f"unbound variable {x}", t, env)
            return ty
        case Bound():
            raise IllTyped("loose bound variable", t, env)
        case Symb(f):
            if f not in sig.symbols:
                raise IllTyped(f"unknown symbol {f}", t, env)
            return sig.symbols[f].type
        case App(f, a):
            p = as_product(env, infer(env, f, sig, trace), sig, f)
            ta = infer(env, a, sig, trace)
            if not convertible(ta, p.ty, sig):
                raise IllTyped(
                    f"argument {show(a)} has type {show(ta)} but {show(p.ty)} was expected", t, env)
            return instantiate(p.body, a)
        case Abs(ty, body, hint):
            infer_sort(sig, env, ty, trace)
            x = _fresh(hint, env, body)
            inner = env + ((x, ty),)
            b_ty = infer(inner, instantiate(body, Var(x)), sig, trace)
            infer_sort(sig, inner, b_ty, trace)
            return Prod(ty, abstract(b_ty, x), hint)
        case Prod(ty, body, hint):
            infer_sort(sig, env, ty, trace)
            x = _fresh(hint, env, body)
            return infer_sort(sig, env + ((x, ty),), instantiate(body, Var(x)), trace)
    raise IllTyped(f"not a term: {t!r}", t, env)


def as_product(env, ty: Term, sig: Signature, subject=None) -> Prod:
    if isinstance(ty, Prod):
        return ty
    nf = normalize(ty, sig)
    if isinstance(nf, Prod):
        return nf
    raise IllTyped(f"{show(subject) if subject is not None else 'term'} of type {show(ty)} "
                   "is applied but its type is not a product", subject, env)


def infer_sort(sig: Signature, env, ty: Term, trace: list | None = None) -> Sort:
    s = infer(env, ty, sig, trace)
    if not isinstance(s, Sort):
        s = normalize(s, sig)
    if not isinstance(s, Sort):
        raise IllTyped(f"{show(ty)} is not a type (its type is {show(s)})", ty, env)
    return s


def convertible(a: Term, b: Term, sig: Signature) -> bool:
    """Common reduct modulo: compare normal forms up to the equations."""
    return a == b or joinable_modulo(a, b, sig)


def check(env, t: Term, ty: Term, sig: Signature) -> bool:
    env = tuple(env)
    try:
        inferred = infer(env, t, sig)
    except IllTyped:
        return False
    if inferred == ty:
        return True
    if ty == BOX:
        return False
    try:
        infer_sort(sig, env, ty)
    except IllTyped:
        return False
    return convertible(inferred, ty, sig)


def check_env(env, sig: Signature):
    """Raise ``IllTyped`` unless each declared type is well-sorted in its prefix."""
    seen = set()
    for i, (x, ty) in enumerate(env):
        if x in seen:
            raise IllTyped(f"{x} declared twice", Var(x), env)
        infer_sort(sig, tuple(env[:i]), ty)
        seen.add(x)


# ---------- rules, equations and substitutions ----------

@dataclass
class TypingVerdict:
    id: str
    target: Term | None = None
    results: dict = field(default_factory=dict)  # judgment name -> error message or None

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(v is None for v in self.results.values())

    def to_json(self) -> dict:
        return {"id": self.id, "passed": self.passed,
                "target": show(self.target) if self.target is not None else None,
                "judgments": {k: ("ok" if v is None else v) for k, v in self.results.items()}}


def _record(verdict: TypingVerdict, name: str, env, subject: Term, ty: Term, sig):
    try:
        inferred = infer(env, subject, sig)
        if inferred != ty and not convertible(inferred, ty, sig):
            raise IllTyped(f"{show(subject)} has type {show(inferred)}, not {show(ty)}")
        verdict.results[name] = None
    except IllTyped as e:
        verdict.results[name] = str(e)


def check_rule_typing(rule: RewriteRule, sig: Signature) -> TypingVerdict:
    """Both ``env |- f l rho : U gamma rho`` and ``env |- r : U gamma rho``."""
    verdict = TypingVerdict(rule.id)
    try:
        check_env(rule.env, sig)
    except IllTyped as e:
        verdict.results["env"] = str(e)
        return verdict
    target = apply_subst(instantiate_telescope(sig.symbols[rule.head].type, list(rule.lhs_args)),
                         rule.rho)
    verdict.target = target
    _record(verdict, "lhs", rule.env, apply_subst(rule.lhs, rule.rho), target, sig)
    _record(verdict, "rhs", rule.env, rule.rhs, target, sig)
    return verdict


def check_equation_typing(eq: Equation, sig: Signature) -> TypingVerdict:
    """Both sides (after ``rho``) at the type of the left-hand side."""
    verdict = TypingVerdict(eq.id)
    try:
        check_env(eq.env, sig)
        lhs = apply_subst(eq.lhs, eq.rho)
        head, args = spine(lhs)
        if isinstance(head, Symb):
            target = instantiate_telescope(sig.symbols[head.name].type, args)
        else:
            target = infer(eq.env, lhs, sig)
    except (IllTyped, ValueError) as e:
        verdict.results["env"] = str(e)
        return verdict
    verdict.target = target
    _record(verdict, "lhs", eq.env, lhs, target, sig)
    _record(verdict, "rhs", eq.env, apply_subst(eq.rhs, eq.rho), target, sig)
    return verdict


def substitution_preserves_typing(theta, gamma, delta, sig: Signature) -> bool:
    """``theta : gamma ~> delta``: every ``x theta`` has type ``(x gamma) theta`` in ``delta``."""
    for x, ty in gamma:
        image = theta.get(x, Var(x))
        if not check(delta, image, apply_subst(ty, theta), sig):
            return False
    return True


def is_type_of_kind(sig: Signature, env, ty: Term) -> bool:
    """Is ``ty`` a kind, i.e. typed by box?"""
    try:
        return infer_sort(sig, env, ty) == BOX
    except IllTyped:
        return False


__all__ = [
    "Judgment", "TypingVerdict", "infer", "infer_sort", "check", "check_env", "convertible",
    "as_product", "check_rule_typing", "check_equation_typing", "substitution_preserves_typing",
    "STAR", "BOX",
]
