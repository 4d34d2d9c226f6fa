"""The strong-normalization checklist and its report.

Each ``check_*`` function returns per-item ``Verdict`` records; the
``assemble_report`` fold turns them into one entry per condition and an
overall verdict. An entry is PASS only when its checker proved it, ASSUMED
only under an explicit attestation, and UNKNOWN whenever a bounded search
came back empty.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .closure import INTERPRETATION_NOTES, general_schema_equation, general_schema_rule
from .confluence import CONFLUENT, confluence_verdict, critical_pairs
from .errors import ClassBoundExceeded, FuelExhausted
from .reduction import ReductionTrace, e_class, rel_step
from .signature import Limits, Signature
from .terms import (
    Symb,
    Term,
    Var,
    app,
    free_vars,
    has_loose_bound,
    is_algebraic,
    is_kind,
    linear,
    prod_telescope,
    show,
    spine,
    symbol_count,
    symbols_of,
    var_occurrences,
)
from .typecheck import check_equation_typing, check_rule_typing

PASS, FAIL, ASSUMED, UNKNOWN, INFORMATIONAL = "PASS", "FAIL", "ASSUMED", "UNKNOWN", "INFORMATIONAL"
FO_SN = "fo-sn"


@dataclass
class Verdict:
    subject: str
    verdict: str
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"subject": self.subject, "verdict": self.verdict, **self.evidence}


@dataclass
class ConditionEntry:
    id: str
    statement: str
    verdict: str
    evidence: list = field(default_factory=list)
    required: bool = True

    def to_json(self) -> dict:
        return {"id": self.id, "statement": self.statement, "verdict": self.verdict,
                "required": self.required, "evidence": list(self.evidence)}


@dataclass
class ConditionReport:
    conditions: list[ConditionEntry]
    notes: list[str]
    symbols: list[dict] = field(default_factory=list)

    def entry(self, cid: str) -> ConditionEntry:
        for c in self.conditions:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def overall(self) -> str:
        required = [c.verdict for c in self.conditions if c.required]
        if FAIL in required:
            return FAIL
        if UNKNOWN in required:
            return UNKNOWN
        return PASS

    def to_json(self) -> dict:
        return {"conditions": [c.to_json() for c in self.conditions],
                "overall": self.overall, "notes": list(self.notes), "symbols": self.symbols}

    def dumps(self, timestamp: str | None = None) -> str:
        data = self.to_json()
        if timestamp is not None:
            data["timestamp"] = timestamp
        return json.dumps(data, indent=2, ensure_ascii=False)


def _fold(items: list[Verdict]) -> str:
    vs = {v.verdict for v in items}
    for v in (FAIL, UNKNOWN, ASSUMED):
        if v in vs:
            return v
    return PASS


# ---------- equations ----------

def check_equation_shape(sig: Signature) -> list[Verdict]:
    """Both sides algebraic, both headed by a symbol, same variables."""
    out = []
    for eq in sig.equations:
        problems = []
        if not (is_algebraic(eq.lhs, sig) and is_algebraic(eq.rhs, sig)):
            problems.append("both sides must be algebraic")
        if not all(isinstance(spine(s)[0], Symb) for s in (eq.lhs, eq.rhs)):
            problems.append("both sides must be headed by a function symbol")
        if free_vars(eq.lhs) != free_vars(eq.rhs):
            problems.append("left and right-hand sides have distinct sets of variables: "
                            f"{sorted(free_vars(eq.lhs))} vs {sorted(free_vars(eq.rhs))}")
        ev = {"equation": str(eq)}
        if problems:
            ev["problems"] = problems
        out.append(Verdict(eq.id, FAIL if problems else PASS, ev))
    return out


def check_E_linear(sig: Signature) -> list[Verdict]:
    out = []
    for eq in sig.equations:
        ev = {"equation": str(eq)}
        repeated = sorted(x for s in (eq.lhs, eq.rhs)
                          for x, n in var_occurrences(s).items() if n > 1)
        if repeated:
            ev["repeated_variables"] = sorted(set(repeated))
        ok = linear(eq.lhs) and linear(eq.rhs)
        out.append(Verdict(eq.id, PASS if ok else FAIL, ev))
    return out


def _probe(side: Term, sig: Signature, bound: int) -> dict | None:
    cls = e_class(side, sig, bound)
    if not cls.truncated:
        return None
    last = cls.members[-1]
    trace = cls.trace_to(last)
    return {"probe_from": show(side), "class_exceeds": bound, "reached": show(last),
            "trace": trace.to_json(side, sig)}


def check_finite_classes(sig: Signature, probe_bound: int | None = None) -> list[Verdict]:
    """Permutative equations pass; others are probed by bounded enumeration."""
    bound = min(sig.limits.max_class_size, 2000) if probe_bound is None else probe_bound
    out = []
    for eq in sig.equations:
        ev = {"equation": str(eq)}
        if (symbol_count(eq.lhs) == symbol_count(eq.rhs)
                and var_occurrences(eq.lhs) == var_occurrences(eq.rhs)):
            ev["criterion"] = "size- and variable-multiset-preserving"
            out.append(Verdict(eq.id, PASS, ev))
            continue
        for direction, src, tgt in eq.orientations():
            if isinstance(src, Var) and src.name in free_vars(tgt) and tgt != src:
                ev["proof"] = (f"orientation {direction} rewrites any term t to {show(tgt)} with t in it, "
                               "so every class is infinite")
        found = None
        for side in (eq.lhs, eq.rhs):
            try:
                found = _probe(side, sig, bound)
            except (FuelExhausted, ClassBoundExceeded):
                found = None
            if found:
                break
        if found:
            ev.update(found)
            out.append(Verdict(eq.id, FAIL, ev))
        elif "proof" in ev:
            out.append(Verdict(eq.id, FAIL, ev))
        else:
            ev["criterion"] = f"not permutative; probe found no class larger than {bound}"
            out.append(Verdict(eq.id, UNKNOWN, ev))
    return out


def check_no_predicate_equations(sig: Signature) -> list[Verdict]:
    out = []
    for eq in sig.equations:
        preds = sorted(h for h in sig.equation_heads(eq) if sig.symbols[h].is_predicate)
        ev = {"equation": str(eq)}
        if preds:
            ev["predicate_heads"] = preds
        out.append(Verdict(eq.id, FAIL if preds else PASS, ev))
    return out


def check_equation_schema(sig: Signature, fuel: int | None = None) -> list[Verdict]:
    out = []
    for eq in sig.equations:
        v = general_schema_equation(eq, sig, fuel)
        out.append(Verdict(eq.id, v.verdict, {"schema": v.to_json()}))
    return out


# ---------- first-order block ----------

def _first_order_signature(sig: Signature) -> Signature:
    sub = Signature(Limits(min(sig.limits.max_class_size, 1000), sig.limits.fuel))
    sub.symbols = dict(sig.symbols)
    sub.rules = list(sig.first_order_rules)
    sub.equations = list(sig.first_order_equations)
    return sub


def _compositions(n: int, k: int):
    """Ordered ways of writing ``n`` as a sum of ``k`` positive integers."""
    for cuts in itertools.combinations(range(1, n), k - 1):
        bounds = (0, *cuts, n)
        yield [bounds[i + 1] - bounds[i] for i in range(k)]


def _algebraic_depth(t: Term) -> int:
    return 1 + max((_algebraic_depth(a) for a in spine(t)[1]), default=0)


def _typed_pool(sig: Signature, depth: int, per_size: int = 40, max_size: int = 7) -> list[Term]:
    """Small well-sorted first-order terms, built size by size.

    Only non-dependent first-order function symbols are used; each type gets
    one variable. ``depth`` bounds the term depth.
    """
    makers = []
    for f, d in sorted(sig.symbols.items()):
        if d.is_predicate or not sig.is_first_order(f):
            continue
        doms, out = prod_telescope(d.type)
        if len(doms) != d.arity:
            continue
        doms = [ty for _, ty in doms]
        if any(has_loose_bound(t) for t in doms + [out]):
            continue
        makers.append((f, [show(t) for t in doms], show(out)))
    types = sorted({t for _, doms, out in makers for t in doms + [out]})
    table: dict = {(t, 1): [Var(f"_v{i}")] for i, t in enumerate(types)}
    for n in range(1, max_size + 1):
        for f, doms, out in makers:
            bucket = table.setdefault((out, n), [])
            if not doms:
                if n == 1:
                    bucket.append(Symb(f))
                continue
            if n - 1 < len(doms):
                continue
            for sizes in _compositions(n - 1, len(doms)):
                pools = [table.get((t, m), []) for t, m in zip(doms, sizes)]
                for args in itertools.product(*pools):
                    if len(bucket) >= per_size:
                        break
                    u = app(Symb(f), *args)
                    if _algebraic_depth(u) <= depth:
                        bucket.append(u)
    terms = [u for (_, n), ts in sorted(table.items(), key=lambda kv: kv[0][1]) for u in ts
             if not isinstance(u, Var)]
    return terms


def _class_key(t: Term, sig: Signature) -> Term:
    cls = e_class(t, sig)
    if cls.truncated:
        raise ClassBoundExceeded(sig.limits.max_class_size, t)
    return min(cls.members, key=lambda u: (symbol_count(u), show(u)))


def refutation_search(sig: Signature, steps: int = 10_000, depth: int = 4,
                      path_limit: int = 64) -> dict | None:
    """Look for a cycle of rewriting modulo among small first-order terms.

    Returns evidence ``{start, trace, end}`` where ``end`` is equivalent to
    ``start`` and ``trace`` replays from ``start`` to ``end``; ``None`` when
    the budget ran out without finding one. Sound for refutation only.
    """
    sub = _first_order_signature(sig)
    if not sub.rules:
        return None
    if any(isinstance(src, Var) for e in sub.equations for _, src, _ in e.orientations()):
        return None  # every class is infinite; nothing can be enumerated
    starts = [r.lhs for r in sub.rules] + _typed_pool(sig, depth)
    budget = steps
    done: set = set()
    for start in starts:
        try:
            start_key = _class_key(start, sub)
        except ClassBoundExceeded:
            continue
        if start_key in done:
            continue
        # iterative DFS; each frame: (term, key, successors iterator, trace from parent)
        path = [(start, start_key, None, ReductionTrace())]
        on_path = {start_key: 0}
        while path and budget > 0:
            term, key, succ, _ = path[-1]
            if succ is None:
                budget -= 1
                try:
                    succ = iter(rel_step(term, sub)) if len(path) < path_limit else iter(())
                except (ClassBoundExceeded, FuelExhausted):
                    succ = iter(())
                path[-1] = (term, key, succ, path[-1][3])
            nxt = next(succ, None)
            if nxt is None:
                done.add(key)
                del on_path[key]
                path.pop()
                continue
            new, trace = nxt
            try:
                new_key = _class_key(new, sub)
            except ClassBoundExceeded:
                continue
            if new_key in on_path:
                i = on_path[new_key]
                full = ReductionTrace()
                for _, _, _, tr in path[i + 1:]:
                    full = full + tr
                full = full + trace
                origin = path[i][0]
                return {"start": show(origin), "end": show(new),
                        "trace": full.to_json(origin, sub),
                        "note": "end is equivalent to start modulo the first-order equations",
                        "_terms": (origin, full, new)}
            if new_key in done:
                continue
            on_path[new_key] = len(path)
            path.append((new, new_key, None, trace))
        if budget <= 0:
            break
    return None


def check_first_order_block(sig: Signature, attested: bool = False, steps: int = 10_000,
                            depth: int = 4) -> dict[str, list[Verdict]]:
    """Non-duplication, first-order-only symbols and SN of the first-order part."""
    r1, e1 = sig.first_order_rules, sig.first_order_equations
    nondup = []
    for r in r1:
        lv, rv = var_occurrences(r.lhs), var_occurrences(r.rhs)
        dup = sorted(x for x, n in rv.items() if n > lv[x])
        ev = {"rule": str(r)}
        if dup:
            ev["duplicated"] = dup
        nondup.append(Verdict(r.id, FAIL if dup else PASS, ev))
    fo_only = []
    for item, sides in [(r, (r.lhs, r.rhs)) for r in r1] + [(e, (e.lhs, e.rhs)) for e in e1]:
        syms = symbols_of(sides[0]) | symbols_of(sides[1])
        bad = sorted(s for s in syms if not sig.is_first_order(s))
        ev = {"item": str(item)}
        if bad:
            ev["higher_order_symbols"] = bad
        fo_only.append(Verdict(item.id, FAIL if bad else PASS, ev))
    if not r1:
        sn = [Verdict("R1", PASS, {"reason": "no first-order rules"})]
    elif attested:
        sn = [Verdict("R1", ASSUMED, {"reason": "attested by the user (fo-sn)"})]
    else:
        found = refutation_search(sig, steps, depth)
        if found:
            found = {k: v for k, v in found.items() if not k.startswith("_")}
            sn = [Verdict("R1", FAIL, {"cycle": found})]
        else:
            sn = [Verdict("R1", UNKNOWN, {
                "reason": f"refutation search (depth {depth}, {steps} steps) found no cycle; "
                          "termination is not proved"})]
    return {"non_duplicating": nondup, "first_order_symbols": fo_only, "sn": sn}


# ---------- higher-order rules ----------

def safety(rule, sig: Signature) -> tuple[bool, str | None]:
    """Arguments at kind-typed positions are pairwise distinct variables."""
    doms, _ = prod_telescope(sig.symbols[rule.head].type)
    seen = set()
    for i, (a, (_, ty)) in enumerate(zip(rule.lhs_args, doms)):
        if not is_kind(ty):
            continue
        if not isinstance(a, Var):
            return False, f"argument {i + 1} ({show(a)}) has kind type {show(ty)} but is not a variable"
        if a.name in seen:
            return False, f"variable {a.name} repeated at kind-typed positions"
        seen.add(a.name)
    return True, None


def smallness(rule, sig: Signature) -> tuple[bool, list[str]]:
    """Every predicate variable of the right-hand side is one of the left-hand side arguments."""
    env = dict(rule.env)
    bad = sorted(x for x in free_vars(rule.rhs)
                 if x in env and is_kind(env[x]) and Var(x) not in rule.lhs_args)
    return not bad, bad


def check_higher_order_rules(sig: Signature, fuel: int | None = None) -> dict[str, list[Verdict]]:
    schema, safe, predicate = [], [], []
    for r in sig.higher_order_rules:
        v = general_schema_rule(r, sig, fuel)
        schema.append(Verdict(r.id, v.verdict, {"rule": str(r), "schema": v.to_json()}))
        ok, why = safety(r, sig)
        ev = {"rule": str(r)}
        if why:
            ev["reason"] = why
        safe.append(Verdict(r.id, PASS if ok else FAIL, ev))
    pred_rules = [r for r in sig.rules if sig.symbols[r.head].is_predicate]
    if pred_rules:
        ids = {r.id for r in pred_rules}
        cps = [cp for cp in critical_pairs(sig) if cp.outer in ids or cp.inner in ids]
        for r in pred_rules:
            ev = {"rule": str(r)}
            mine = [cp.to_json() for cp in cps if r.id in (cp.outer, cp.inner)]
            sv = general_schema_rule(r, sig, fuel)
            small, bad = smallness(r, sig)
            ev["schema"] = sv.to_json()
            if mine:
                ev["critical_pairs"] = mine
            if not small:
                ev["not_small"] = bad
            ok = sv.passed and small and not mine
            predicate.append(Verdict(r.id, PASS if ok else FAIL, ev))
    return {"schema": schema, "safe": safe, "predicate": predicate}


def check_typing(sig: Signature) -> list[Verdict]:
    out = []
    for r in sig.rules:
        v = check_rule_typing(r, sig)
        out.append(Verdict(r.id, PASS if v.passed else FAIL, {"typing": v.to_json()}))
    for e in sig.equations:
        v = check_equation_typing(e, sig)
        out.append(Verdict(e.id, PASS if v.passed else FAIL, {"typing": v.to_json()}))
    return out


# ---------- report ----------

STATEMENTS = {
    "confluence": "→β ∪ →R ∪ →E is confluent (required when there are type-level rules)",
    "R1-non-duplicating": "first-order rules are non-duplicating (required when there are higher-order rules)",
    "first-order-symbols": "first-order rules and equations only contain first-order symbols",
    "R1-SN": "rewriting modulo the first-order equations with the first-order rules terminates "
             "on first-order algebraic terms",
    "R-omega-schema": "higher-order rules satisfy the General Schema",
    "R-omega-safe": "higher-order rules are safe (no matching on predicates)",
    "predicate-rules": "rules on predicate symbols have no critical pair, satisfy the General "
                       "Schema and are small",
    "no-predicate-equations": "no equation has a predicate symbol as head",
    "E-linear": "both sides of every equation are linear",
    "finite-classes": "equivalence classes modulo the equations are finite",
    "E-schema": "every equation satisfies the General Schema in both directions",
    "equation-shape": "equation sides are algebraic, symbol-headed and have the same variables",
    "rule-typing": "rules and equations are well-typed (left and right-hand sides at the same type)",
}

REPORT_NOTES = [
    "safety: every left-hand side argument at a kind-typed position must be a variable, "
    "and those variables pairwise distinct",
    "finite classes: size- and variable-multiset-preservation is sufficient, not necessary; "
    "other equations are probed by bounded enumeration",
    "strong normalization of the first-order block is attested or refuted, never proved",
    "symbols heading a side of an equation count as defined, not constant",
    "equation orientations that would introduce variables are not used as rewrite steps",
    "confluence inside this report is computed without assuming strong normalization",
    *INTERPRETATION_NOTES,
]


def _symbol_table(sig: Signature) -> list[dict]:
    kinds = sig.classify_first_order()
    cd = sig.classify_constant_defined()
    return [{"name": f, "type": show(d.type), "sort": show(d.sort), "arity": d.arity,
             "status": d.status.value, "order": kinds[f].value, "class": cd[f]}
            for f, d in sig.symbols.items()]


def assemble_report(sig: Signature, attest_fo_sn: bool = False, search_steps: int = 10_000,
                    search_depth: int = 4, fuel: int | None = None) -> ConditionReport:
    attested = attest_fo_sn or FO_SN in sig.attestations
    entries = []

    def add(cid, items, required=True):
        verdict = _fold(items)
        entries.append(ConditionEntry(cid, STATEMENTS[cid], verdict,
                                      [v.to_json() for v in items], required))

    ho_rules = sig.higher_order_rules
    type_level = [r for r in sig.rules if sig.symbols[r.head].is_predicate]
    conf = confluence_verdict(sig, sn_passed=False, fuel=fuel)
    conf_items = [Verdict("confluence", PASS if conf.verdict == CONFLUENT else conf.verdict,
                          {"result": conf.to_json()})]
    if type_level:
        add("confluence", conf_items)
    else:
        entries.append(ConditionEntry("confluence", STATEMENTS["confluence"], INFORMATIONAL,
                                      [v.to_json() for v in conf_items], False))
    fo = check_first_order_block(sig, attested, search_steps, search_depth)
    add("R1-non-duplicating", fo["non_duplicating"], required=bool(ho_rules))
    add("first-order-symbols", fo["first_order_symbols"])
    add("R1-SN", fo["sn"])
    ho = check_higher_order_rules(sig, fuel)
    add("R-omega-schema", ho["schema"])
    add("R-omega-safe", ho["safe"])
    add("predicate-rules", ho["predicate"])
    add("no-predicate-equations", check_no_predicate_equations(sig))
    add("E-linear", check_E_linear(sig))
    add("finite-classes", check_finite_classes(sig))
    add("E-schema", check_equation_schema(sig, fuel))
    add("equation-shape", check_equation_shape(sig))
    add("rule-typing", check_typing(sig))
    notes = list(REPORT_NOTES)
    if attested:
        notes.append("strong normalization of the first-order block is ASSUMED by explicit attestation")
    return ConditionReport(entries, notes, _symbol_table(sig))
