"""Symbols, rewrite rules, equations and their classification.

A ``Signature`` is filled once (symbols first, then rules and equations)
and treated as read-only afterwards; derived data such as the
first-order/higher-order partition and the precedence are cached and the
cache is dropped on every mutation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

import networkx as nx

from .errors import NotAConstantPredicate, SignatureError
from .terms import (
    BOX,
    STAR,
    Prod,
    Symb,
    Term,
    app,
    free_vars,
    instantiate_telescope,
    is_algebraic,
    is_kind,
    prod_telescope,
    show,
    spine,
    symbols_of,
)


class Status(enum.Enum):
    MUL = "mul"
    LEX = "lex"


class Kind(enum.Enum):
    FIRST_ORDER = "fo"
    HIGHER_ORDER = "ho"


@dataclass(frozen=True)
class Limits:
    max_class_size: int = 10_000
    fuel: int = 100_000


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    type: Term
    sort: Term  # STAR for function symbols, BOX for predicate symbols
    arity: int
    status: Status = Status.MUL
    declared_kind: Kind | None = None
    declared_constant: bool = False

    @property
    def is_predicate(self) -> bool:
        return self.sort == BOX

    def output_type(self) -> Term:
        """``U`` in ``(x1:T1)...(xn:Tn)U`` with n the arity (may mention bound indices)."""
        t = self.type
        for _ in range(self.arity):
            t = t.body
        return t


@dataclass(frozen=True)
class RewriteRule:
    """``head lhs_args -> rhs`` with typing environment ``env`` and repair substitution ``rho``."""

    id: str
    head: str
    lhs_args: tuple[Term, ...]
    rhs: Term
    env: tuple[tuple[str, Term], ...] = ()
    rho: Mapping[str, Term] = field(default_factory=dict)

    @property
    def lhs(self) -> Term:
        return app(Symb(self.head), *self.lhs_args)

    def __str__(self):
        return f"{show(self.lhs)} -> {show(self.rhs)}"


@dataclass(frozen=True)
class Equation:
    """``lhs = rhs``, stored once and used in both directions."""

    id: str
    lhs: Term
    rhs: Term
    env: tuple[tuple[str, Term], ...] = ()
    rho: Mapping[str, Term] = field(default_factory=dict)

    def orientations(self):
        """``(direction, source, target)`` for both readings of the equation."""
        return (("lr", self.lhs, self.rhs), ("rl", self.rhs, self.lhs))

    def as_rules(self) -> list[RewriteRule]:
        """Both orientations as rule-shaped records (only meaningful for symbol-headed sides)."""
        out = []
        for direction, src, tgt in self.orientations():
            head, args = spine(src)
            if isinstance(head, Symb):
                out.append(RewriteRule(f"{self.id}:{direction}", head.name, tuple(args), tgt,
                                       self.env, self.rho))
        return out

    def __str__(self):
        return f"{show(self.lhs)} = {show(self.rhs)}"


class Signature:
    def __init__(self, limits: Limits | None = None):
        self.symbols: dict[str, SymbolDecl] = {}
        self.rules: list[RewriteRule] = []
        self.equations: list[Equation] = []
        self.precedence_decls: list[tuple[str, str, str]] = []  # (f, ">" or "=", g)
        self.attestations: set[str] = set()
        self.limits = limits or Limits()
        self._cache: dict = {}

    # ----- population -----

    def declare(self, name: str, type_: Term, *, status: Status = Status.MUL,
                kind: Kind | None = None, constant: bool = False,
                arity: int | None = None) -> SymbolDecl:
        """Declare a symbol; its sort is obtained by typing ``type_`` in the current signature."""
        from .typecheck import infer_sort

        if name in self.symbols:
            raise SignatureError(f"symbol {name} declared twice")
        if free_vars(type_):
            raise SignatureError(f"type of {name} is not closed: free {sorted(free_vars(type_))}")
        sort = infer_sort(self, (), type_)
        doms, _ = prod_telescope(type_)
        if arity is None:
            arity = len(doms)
        elif arity > len(doms):
            raise SignatureError(f"arity {arity} of {name} exceeds its product prefix")
        decl = SymbolDecl(name, type_, sort, arity, status, kind, constant)
        self.symbols[name] = decl
        self._cache.clear()
        return decl

    def add_rule(self, head: str, lhs_args, rhs: Term, env=(), rho=None,
                 rule_id: str | None = None) -> RewriteRule:
        rule = RewriteRule(rule_id or f"R{len(self.rules) + 1}", head, tuple(lhs_args), rhs,
                           tuple(env), dict(rho or {}))
        self._check_rule(rule)
        self.rules.append(rule)
        self._cache.clear()
        return rule

    def add_equation(self, lhs: Term, rhs: Term, env=(), rho=None,
                     eq_id: str | None = None) -> Equation:
        """Add an equation.

        Only well-formedness of the terms is enforced here: the shape
        conditions (algebraic, symbol-headed, same variables) are verdicts of
        the condition checker so that violations can be reported.
        """
        eq = Equation(eq_id or f"E{len(self.equations) + 1}", lhs, rhs, tuple(env), dict(rho or {}))
        for side in (lhs, rhs):
            self._check_symbols_known(side, eq.id)
        self._check_env_rho(eq.env, eq.rho, eq.id)
        self.equations.append(eq)
        self._cache.clear()
        return eq

    def declare_precedence(self, f: str, rel: str, g: str):
        for s in (f, g):
            if s not in self.symbols:
                raise SignatureError(f"unknown symbol {s} in precedence")
        if rel not in (">", "="):
            raise SignatureError(f"unknown precedence relation {rel}")
        self.precedence_decls.append((f, rel, g))
        self._cache.clear()

    def attest(self, what: str):
        self.attestations.add(what)
        self._cache.clear()

    def _check_symbols_known(self, t: Term, where: str):
        for s in symbols_of(t):
            if s not in self.symbols:
                raise SignatureError(f"{where}: unknown symbol {s}")

    def _check_env_rho(self, env, rho, where):
        names = [x for x, _ in env]
        if len(set(names)) != len(names):
            raise SignatureError(f"{where}: environment declares a variable twice")
        clash = set(rho) & set(names)
        if clash:
            raise SignatureError(f"{where}: dom(rho) meets dom(env) on {sorted(clash)}")

    def _check_rule(self, rule: RewriteRule):
        if rule.head not in self.symbols:
            raise SignatureError(f"{rule.id}: unknown head symbol {rule.head}")
        self._check_symbols_known(rule.lhs, rule.id)
        self._check_symbols_known(rule.rhs, rule.id)
        if not is_algebraic(rule.lhs, self):
            raise SignatureError(f"{rule.id}: left-hand side {show(rule.lhs)} is not algebraic")
        missing = free_vars(rule.rhs) - free_vars(rule.lhs)
        if missing:
            raise SignatureError(
                f"{rule.id}: right-hand side variables {sorted(missing)} do not occur on the left")
        self._check_env_rho(rule.env, rule.rho, rule.id)

    # ----- lookups -----

    def arity(self, name: str) -> int:
        return self.symbols[name].arity

    def rule(self, rule_id: str) -> RewriteRule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    def equation(self, eq_id: str) -> Equation:
        for e in self.equations:
            if e.id == eq_id:
                return e
        raise KeyError(eq_id)

    def copy(self) -> "Signature":
        other = Signature(self.limits)
        other.symbols = dict(self.symbols)
        other.rules = list(self.rules)
        other.equations = list(self.equations)
        other.precedence_decls = list(self.precedence_decls)
        other.attestations = set(self.attestations)
        return other

    def _cached(self, key, compute):
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    # ----- classification -----

    def defining_heads(self) -> set[str]:
        heads = {r.head for r in self.rules}
        for e in self.equations:
            for side in (e.lhs, e.rhs):
                h, _ = spine(side)
                if isinstance(h, Symb):
                    heads.add(h.name)
        return heads

    def is_constant(self, name: str) -> bool:
        return name not in self.defining_heads()

    def classify_constant_defined(self) -> dict[str, str]:
        heads = self.defining_heads()
        return {f: ("defined" if f in heads else "constant") for f in self.symbols}

    def output_head(self, name: str) -> str | None:
        """Head symbol of the output type of ``name`` if it is a symbol."""
        h, _ = spine(self.symbols[name].output_type())
        return h.name if isinstance(h, Symb) else None

    def constructors_of(self, pred: str) -> list[str]:
        decl = self.symbols.get(pred)
        if decl is None or not decl.is_predicate or not self.is_constant(pred):
            raise NotAConstantPredicate(f"{pred} is not a constant predicate symbol")
        return [f for f, d in self.symbols.items()
                if not d.is_predicate and self.is_constant(f) and self.output_head(f) == pred]

    def is_primitive(self, pred: str) -> bool:
        decl = self.symbols.get(pred)
        if decl is None or not decl.is_predicate or not self.is_constant(pred):
            raise NotAConstantPredicate(f"{pred} is not a constant predicate symbol")
        doms, _ = prod_telescope(decl.type)
        if any(is_kind(ty) for _, ty in doms):
            return False  # polymorphic
        for c in self.constructors_of(pred):
            cdoms, _ = prod_telescope(self.symbols[c].type)
            for _, ty in cdoms[: self.symbols[c].arity]:
                if is_kind(ty) or isinstance(ty, Prod):
                    return False
        return True

    def _is_first_order(self, name: str) -> bool:
        decl = self.symbols[name]
        out = decl.output_type()
        if decl.is_predicate:
            return out == STAR
        h, _ = spine(out)
        if not isinstance(h, Symb):
            return False
        hd = self.symbols[h.name]
        return hd.is_predicate and self.is_constant(h.name) and self.is_primitive(h.name)

    def classify_first_order(self) -> dict[str, Kind]:
        def compute():
            out = {}
            for name, decl in self.symbols.items():
                fo = self._is_first_order(name)
                if decl.declared_kind is Kind.HIGHER_ORDER:
                    fo = False
                elif decl.declared_kind is Kind.FIRST_ORDER and not fo:
                    raise SignatureError(f"{name} cannot be declared first-order")
                out[name] = Kind.FIRST_ORDER if fo else Kind.HIGHER_ORDER
            return out

        return self._cached("kinds", compute)

    def is_first_order(self, name: str) -> bool:
        return self.classify_first_order()[name] is Kind.FIRST_ORDER

    @property
    def first_order_rules(self) -> list[RewriteRule]:
        return [r for r in self.rules if self.is_first_order(r.head)]

    @property
    def higher_order_rules(self) -> list[RewriteRule]:
        return [r for r in self.rules if not self.is_first_order(r.head)]

    def equation_heads(self, eq: Equation) -> set[str]:
        return {h.name for h in (spine(eq.lhs)[0], spine(eq.rhs)[0]) if isinstance(h, Symb)}

    @property
    def first_order_equations(self) -> list[Equation]:
        return [e for e in self.equations
                if self.equation_heads(e) and all(self.is_first_order(h) for h in self.equation_heads(e))]

    @property
    def higher_order_equations(self) -> list[Equation]:
        fo = self.first_order_equations
        return [e for e in self.equations if e not in fo]

    # ----- precedence -----

    def dependency_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.symbols)
        for name, decl in self.symbols.items():
            for s in symbols_of(decl.type):
                g.add_edge(name, s)
        for r in self.rules:
            for s in symbols_of(r.lhs) | symbols_of(r.rhs):
                g.add_edge(r.head, s)
        for e in self.equations:
            used = symbols_of(e.lhs) | symbols_of(e.rhs)
            for h in self.equation_heads(e):
                for s in used:
                    g.add_edge(h, s)
        for f, rel, h in self.precedence_decls:
            g.add_edge(f, h)
            if rel == "=":
                g.add_edge(h, f)
        return g

    def precedence(self) -> "Precedence":
        return self._cached("precedence", lambda: Precedence.from_graph(self.dependency_graph()))


class Precedence:
    """Quasi-order on symbols: equivalence classes are strongly connected components."""

    def __init__(self, component: dict[str, int], reach: dict[int, set[int]]):
        self.component = component
        self.reach = reach  # component -> components strictly below it

    @classmethod
    def from_graph(cls, g: nx.DiGraph) -> "Precedence":
        cond = nx.condensation(g)
        component = dict(cond.graph["mapping"])
        reach = {c: set(nx.descendants(cond, c)) for c in cond.nodes}
        return cls(component, reach)

    def equivalent(self, f: str, g: str) -> bool:
        return self.component[f] == self.component[g]

    def greater(self, f: str, g: str) -> bool:
        """``f >_F g`` (strict part)."""
        return self.component[g] in self.reach[self.component[f]]

    def greater_eq(self, f: str, g: str) -> bool:
        return self.equivalent(f, g) or self.greater(f, g)

    def classes(self) -> list[list[str]]:
        groups: dict[int, list[str]] = {}
        for s, c in self.component.items():
            groups.setdefault(c, []).append(s)
        return [sorted(v) for _, v in sorted(groups.items(), key=lambda kv: sorted(kv[1]))]


def env_names(env) -> list[str]:
    return [x for x, _ in env]


def env_lookup(env, name: str) -> Term | None:
    for x, ty in reversed(env):
        if x == name:
            return ty
    return None


def symbol_output(sig: Signature, name: str, args: list[Term]) -> Term:
    """``U{x -> args}`` for ``name : (x:T)U`` applied to exactly its arity."""
    return instantiate_telescope(sig.symbols[name].type, args)
