"""Critical pairs between rules and equations, and confluence modulo verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ClassBoundExceeded, FuelExhausted
from .reduction import Step, joinable_modulo
from .signature import Signature
from .terms import (
    App,
    Symb,
    Term,
    Var,
    apply_subst,
    free_vars,
    fresh_name,
    linear,
    rename_vars,
    replace_at,
    show,
    spine,
    spine_path,
    subterm_at,
    subterms,
    var_occurrences,
)

CONFLUENT = "∼-confluent on ∼-classes"
HUET_ROUTE = "huet: SN + E linear + local ∼-confluence + local ∼-coherence"
LEFT_LINEAR_ROUTE = "left-linear combination: E linear + R left-linear + R ∼-confluent on ∼-classes"

DEFINITIONS = {
    "local-confluence-modulo": "R is locally ∼-confluent: ←R →R ⊆ R* ∼ ←R*",
    "local-coherence": "R is locally ∼-coherent: E R ⊆ R* ∼ ←R*",
    "confluence-on-classes": "⊳ is ∼-confluent on ∼-classes: ←⊳* ∼ ⊳* ⊆ ⊳* ∼ ←⊳*",
}


# ---------- unification ----------

def _walk(t: Term, sigma: dict) -> Term:
    while isinstance(t, Var) and t.name in sigma:
        t = sigma[t.name]
    return t


def _resolve(t: Term, sigma: dict) -> Term:
    t = _walk(t, sigma)
    if isinstance(t, App):
        return App(_resolve(t.fun, sigma), _resolve(t.arg, sigma))
    return t


def _occurs(x: str, t: Term, sigma: dict) -> bool:
    t = _walk(t, sigma)
    if isinstance(t, Var):
        return t.name == x
    if isinstance(t, App):
        return _occurs(x, t.fun, sigma) or _occurs(x, t.arg, sigma)
    return False


def unify_algebraic(s: Term, t: Term) -> dict | None:
    """Most general unifier of two algebraic terms, with occurs-check."""
    sigma: dict = {}
    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a, b = _walk(a, sigma), _walk(b, sigma)
        if a == b:
            continue
        if isinstance(b, Var):
            if _occurs(b.name, a, sigma):
                return None
            sigma[b.name] = a
        elif isinstance(a, Var):
            if _occurs(a.name, b, sigma):
                return None
            sigma[a.name] = b
        elif isinstance(a, App) and isinstance(b, App):
            stack.append((a.arg, b.arg))
            stack.append((a.fun, b.fun))
        else:
            return None
    return {x: _resolve(u, sigma) for x, u in sigma.items()}


# ---------- critical pairs ----------

@dataclass(frozen=True)
class _Item:
    """A rule or an oriented equation seen as ``lhs -> rhs``."""
    id: str
    is_rule: bool
    lhs: Term
    rhs: Term
    direction: str | None = None

    def step(self, position: tuple) -> Step:
        if self.is_rule:
            return Step("rule", position, self.id)
        return Step("eq", position, self.id, self.direction)

    @property
    def label(self) -> str:
        return self.id if self.is_rule else f"{self.id}:{self.direction}"


@dataclass(frozen=True)
class CriticalPair:
    kind: str  # "RR", "RE" (rule into equation) or "ER" (equation into rule)
    outer: str
    inner: str
    position: tuple  # in the outer left-hand side
    mgu: tuple  # sorted (variable, term)
    peak: Term
    pair: tuple  # (reduct by the inner step, reduct by the outer step)
    inner_step: Step = field(compare=False)
    outer_step: Step = field(compare=False)
    outer_lhs: Term = field(compare=False)

    def to_json(self, joinable=None) -> dict:
        out = {
            "kind": self.kind,
            "outer": self.outer,
            "inner": self.inner,
            "position": spine_path(self.outer_lhs, self.position),
            "mgu": {x: show(u) for x, u in self.mgu},
            "peak": show(self.peak),
            "pair": [show(self.pair[0]), show(self.pair[1])],
        }
        if joinable is not None:
            out["joinable"] = joinable
        return out


def _items(sig: Signature) -> tuple[list[_Item], list[_Item]]:
    rules = [_Item(r.id, True, r.lhs, r.rhs) for r in sig.rules]
    eqs = []
    for e in sig.equations:
        for direction, src, tgt in e.orientations():
            if isinstance(spine(src)[0], Symb):
                eqs.append(_Item(e.id, False, src, tgt, direction))
    return rules, eqs


def overlap_positions(lhs: Term, sig: Signature) -> list[tuple]:
    """Non-variable positions of an algebraic term: its fully applied symbol nodes."""
    out = []
    for p, u in subterms(lhs):
        head, args = spine(u)
        if isinstance(head, Symb) and head.name in sig.symbols and len(args) == sig.arity(head.name):
            out.append(p)
    return out


def _rename_apart(item: _Item) -> tuple[Term, Term]:
    names = var_occurrences(item.lhs) | var_occurrences(item.rhs)
    ren = {x: f"_{x}" for x in names}
    return rename_vars(item.lhs, ren), rename_vars(item.rhs, ren)


def _tidy(terms: list[Term]) -> dict:
    """Map generated ``_x`` names back to readable ones where no clash arises."""
    seen: list[str] = []
    for t in terms:
        for x in var_occurrences(t):
            if x not in seen:
                seen.append(x)
    taken = {x for x in seen if not x.startswith("_")}
    ren = {}
    for x in seen:
        if x.startswith("_"):
            new = fresh_name(x.lstrip("_") or "x", taken)
            taken.add(new)
            ren[x] = new
    return ren


def _overlaps(outer: _Item, inner: _Item, kind: str, sig: Signature, skip_root: bool):
    inner_lhs, inner_rhs = _rename_apart(inner)
    for p in overlap_positions(outer.lhs, sig):
        if skip_root and p == ():
            continue
        sigma = unify_algebraic(subterm_at(outer.lhs, p), inner_lhs)
        if sigma is None:
            continue
        peak = apply_subst(outer.lhs, sigma)
        by_inner = replace_at(peak, p, apply_subst(inner_rhs, sigma))
        by_outer = apply_subst(outer.rhs, sigma)
        ren = _tidy([peak, by_inner, by_outer])
        mgu = {ren.get(x, x): rename_vars(u, ren) for x, u in sigma.items()}
        yield CriticalPair(
            kind, outer.label, inner.label, p, tuple(sorted(mgu.items())),
            rename_vars(peak, ren), (rename_vars(by_inner, ren), rename_vars(by_outer, ren)),
            inner.step(p), outer.step(()), outer.lhs)


def critical_pairs(sig: Signature) -> list[CriticalPair]:
    rules, eqs = _items(sig)
    out = []
    for outer in rules:
        for inner in rules:
            out.extend(_overlaps(outer, inner, "RR", sig, skip_root=outer.id == inner.id))
    for outer in eqs:
        for inner in rules:
            out.extend(_overlaps(outer, inner, "RE", sig, skip_root=False))
    for outer in rules:
        for inner in eqs:
            out.extend(_overlaps(outer, inner, "ER", sig, skip_root=False))
    return out


def cp_joinable(cp: CriticalPair, sig: Signature, fuel: int | None = None) -> bool:
    return joinable_modulo(cp.pair[0], cp.pair[1], sig, fuel)


# ---------- verdict ----------

def left_linear(sig: Signature) -> bool:
    return all(linear(r.lhs) for r in sig.rules)


def equations_linear(sig: Signature) -> bool:
    return all(linear(e.lhs) and linear(e.rhs) for e in sig.equations)


def equations_well_shaped(sig: Signature) -> bool:
    return all(isinstance(spine(s)[0], Symb) and free_vars(e.lhs) == free_vars(e.rhs)
               for e in sig.equations for s in (e.lhs, e.rhs))


@dataclass
class ConfluenceResult:
    verdict: str  # CONFLUENT, "FAIL" or "UNKNOWN"
    theorem_used: str | None
    blocking_conditions: list
    critical_pairs: list  # (CriticalPair, joinable: bool | None)
    notes: list

    @property
    def confluent(self) -> bool:
        return self.verdict == CONFLUENT

    def to_json(self) -> dict:
        return {
            "critical_pairs": [cp.to_json(j) for cp, j in self.critical_pairs],
            "verdict": self.verdict,
            "theorem_used": self.theorem_used,
            "blocking_conditions": list(self.blocking_conditions),
            "notes": list(self.notes),
        }


def confluence_verdict(sig: Signature, sn_passed: bool, rules_sn: bool = False,
                       fuel: int | None = None) -> ConfluenceResult:
    """Conclude confluence modulo from the critical pairs.

    ``sn_passed``: the beta-plus-rewriting-modulo relation is known to terminate.
    ``rules_sn``: rewriting modulo with the rules alone is known to terminate.
    """
    notes = [f"{k}: {v}" for k, v in DEFINITIONS.items()]
    cps = critical_pairs(sig)
    if not equations_linear(sig):
        return ConfluenceResult("UNKNOWN", None, ["E is linear"],
                                [(cp, None) for cp in cps], notes)
    if not equations_well_shaped(sig):
        return ConfluenceResult("UNKNOWN", None,
                                ["equation sides are symbol-headed and have the same variables"],
                                [(cp, None) for cp in cps], notes)
    results, blocking, failures = [], [], []
    for cp in cps:
        try:
            ok = cp_joinable(cp, sig, fuel)
        except (FuelExhausted, ClassBoundExceeded) as e:
            ok = None
            blocking.append(f"critical pair {cp.outer}/{cp.inner}: {e}")
        results.append((cp, ok))
        if ok is False:
            failures.append(cp)
    if failures:
        cp = failures[0]
        return ConfluenceResult(
            "FAIL", None,
            [f"critical pair {cp.outer}/{cp.inner} ({show(cp.pair[0])}, {show(cp.pair[1])}) "
             "has distinct normal forms that are not ∼-equivalent"],
            results, notes)
    if blocking:
        return ConfluenceResult("UNKNOWN", None, blocking, results, notes)
    if not left_linear(sig):
        return ConfluenceResult("UNKNOWN", None,
                                ["R is left-linear (needed for local ∼-coherence from critical pairs)"],
                                results, notes)
    arrow_note = ("E is linear, so ⊳ ∼-confluent on ∼-classes is equivalent to "
                  "→ = →β ∪ →R ∪ →E being confluent: → is confluent")
    if sn_passed:
        return ConfluenceResult(CONFLUENT, HUET_ROUTE, [], results, notes + [arrow_note])
    if rules_sn:
        combination = ("critical pairs between R ∪ E and β are trivial since left-hand sides "
                       "are algebraic")
        return ConfluenceResult(CONFLUENT, LEFT_LINEAR_ROUTE, [], results,
                                notes + [combination, arrow_note])
    return ConfluenceResult("UNKNOWN", None,
                            ["strong normalization of ⊳ (or of ∼→R) is not established"],
                            results, notes)
