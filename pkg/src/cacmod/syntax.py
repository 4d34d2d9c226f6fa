"""Concrete syntax of signature files.

One declaration per line, ``#`` starts a comment::

    symbol NAME : TERM [constant] [status mul|lex] [kind fo|ho] [arity N]
    rule [ENV] TERM -> TERM [with X := TERM, ...]
    eq [ENV] TERM = TERM [with X := TERM, ...]
    precedence f > g
    attest fo-sn

Terms: ``*``, ``box``, ``[x:T] u``, ``(x:T) U``, ``T => U``, application by
juxtaposition and parentheses. Identifiers starting with ``_`` are reserved
for generated variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CacError, ParseError
from .signature import Kind, Limits, Signature, Status
from .terms import (
    BOX,
    STAR,
    Abs,
    App,
    Bound,
    Prod,
    Symb,
    Term,
    Var,
    show,
    spine,
)

_TOKEN = re.compile(r"\s+|#.*|=>|->|:=|[\[\]():,=>*]|[A-Za-z_][A-Za-z0-9_']*|\d+")
_RESERVED = {"box", "with", "constant", "status", "kind", "arity"}


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1) -> list[Token]:
    out, i = [], 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, i + 1)
        tok = m.group()
        if not tok.isspace() and not tok.startswith("#"):
            out.append(Token(tok, line, i + 1))
        i = m.end()
    return out


# ---------- AST ----------

@dataclass(frozen=True)
class SymbolStmt:
    name: str
    type: Term
    constant: bool = False
    status: str | None = None
    kind: str | None = None
    arity: int | None = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RuleStmt:
    env: tuple
    lhs: Term
    rhs: Term
    subst: tuple = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class EqStmt:
    env: tuple
    lhs: Term
    rhs: Term
    subst: tuple = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class PrecedenceStmt:
    chain: tuple  # f, rel, g, rel, h ...
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class AttestStmt:
    what: str
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class SpecFile:
    declarations: tuple


# ---------- parser ----------

class _Parser:
    def __init__(self, tokens: list[Token], symbols, line: int = 0, allow_free: bool = True):
        self.toks = tokens
        self.i = 0
        self.symbols = symbols
        self.line = line
        self.allow_free = allow_free

    def peek(self, k: int = 0) -> str | None:
        j = self.i + k
        return self.toks[j].text if j < len(self.toks) else None

    def error(self, msg: str):
        if self.i < len(self.toks):
            t = self.toks[self.i]
            raise ParseError(msg, t.line, t.column)
        raise ParseError(msg + " at end of line", self.line, None)

    def next(self) -> str:
        if self.i >= len(self.toks):
            self.error("unexpected end of input")
        t = self.toks[self.i].text
        self.i += 1
        return t

    def expect(self, text: str):
        if self.peek() != text:
            self.error(f"expected {text!r}, found {self.peek()!r}")
        self.i += 1

    def ident(self) -> str:
        t = self.peek()
        if t is None or not (t[0].isalpha() or t[0] == "_") or t in _RESERVED:
            self.error(f"expected an identifier, found {t!r}")
        if t.startswith("_"):
            self.error(f"identifier {t} is reserved")
        self.i += 1
        return t

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    # terms ------------------------------------------------------------

    def _binder_ahead(self) -> bool:
        return self.peek() == "[" or (self.peek() == "(" and self.peek(2) == ":")

    def term(self, scope: list) -> Term:
        if self._binder_ahead():
            return self.binder(scope)
        left = self.application(scope)
        if self.peek() == "=>":
            self.i += 1
            right = self.term(scope + ["_"])
            return Prod(left, right, "_")
        return left

    def binder(self, scope: list) -> Term:
        close = "]" if self.next() == "[" else ")"
        decls = []
        inner = list(scope)
        while True:
            x = self.ident()
            self.expect(":")
            decls.append((x, self.term(inner)))
            inner = inner + [x]
            if self.peek() == ",":
                self.i += 1
                continue
            break
        self.expect(close)
        body = self.term(inner)
        node = Abs if close == "]" else Prod
        for x, ty in reversed(decls):
            body = node(ty, body, x)
        return body

    def application(self, scope: list) -> Term:
        t = self.atom(scope)
        while self._starts_atom():
            if self._binder_ahead():
                t = App(t, self.binder(scope))
                break
            t = App(t, self.atom(scope))
        return t

    def _starts_atom(self) -> bool:
        p = self.peek()
        if p is None:
            return False
        return p in ("*", "(", "[", "box") or ((p[0].isalpha() or p[0] == "_") and p not in _RESERVED)

    def atom(self, scope: list) -> Term:
        p = self.peek()
        if p == "*":
            self.i += 1
            return STAR
        if p == "box":
            self.i += 1
            return BOX
        if p == "(":
            self.i += 1
            t = self.term(scope)
            self.expect(")")
            return t
        if p == "[":
            return self.binder(scope)
        name = self.ident()
        for k, x in enumerate(reversed(scope)):
            if x == name:
                return Bound(k)
        if name in self.symbols:
            return Symb(name)
        if not self.allow_free:
            self.i -= 1
            self.error(f"unknown identifier {name}")
        return Var(name)

    # declarations -------------------------------------------------------

    def env(self) -> tuple:
        self.expect("[")
        decls = []
        if self.peek() != "]":
            while True:
                x = self.ident()
                self.expect(":")
                decls.append((x, self.term([])))
                if self.peek() != ",":
                    break
                self.i += 1
        self.expect("]")
        return tuple(decls)

    def subst(self) -> tuple:
        if self.peek() != "with":
            return ()
        self.i += 1
        pairs = []
        while True:
            x = self.ident()
            self.expect(":=")
            pairs.append((x, self.term([])))
            if self.peek() != ",":
                break
            self.i += 1
        return tuple(pairs)

    def finish(self):
        if not self.at_end():
            self.error(f"unexpected {self.peek()!r}")


def parse(source: str) -> SpecFile:
    decls = []
    symbols: set[str] = set()
    for lineno, raw in enumerate(source.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        keyword, _, rest = stripped.partition(" ")
        if keyword == "attest":
            what = rest.strip()
            if what != "fo-sn":
                raise ParseError(f"unknown attestation {what!r}", lineno, len(keyword) + 2)
            decls.append(AttestStmt(what, lineno))
            continue
        toks = tokenize(raw, lineno)
        p = _Parser(toks[1:], symbols, lineno)
        if keyword == "symbol":
            decls.append(_symbol(p, lineno))
            symbols.add(decls[-1].name)
        elif keyword in ("rule", "eq"):
            env = p.env() if p.peek() == "[" and _env_ahead(p) else ()
            lhs = p.term([])
            p.expect("->" if keyword == "rule" else "=")
            rhs = p.term([])
            sub = p.subst()
            p.finish()
            cls = RuleStmt if keyword == "rule" else EqStmt
            decls.append(cls(env, lhs, rhs, sub, lineno))
        elif keyword == "precedence":
            chain = [p.ident()]
            while p.peek() in (">", "="):
                chain += [p.next(), p.ident()]
            if len(chain) < 3:
                p.error("expected a precedence 'f > g' or 'f = g'")
            p.finish()
            for name in chain[::2]:
                if name not in symbols:
                    raise ParseError(f"unknown symbol {name} in precedence", lineno, None)
            decls.append(PrecedenceStmt(tuple(chain), lineno))
        else:
            raise ParseError(f"unknown declaration {keyword!r}", lineno, 1)
    return SpecFile(tuple(decls))


def _env_ahead(p: _Parser) -> bool:
    """A leading ``[`` opens an environment unless it is an abstraction on the left-hand side."""
    depth = 0
    for j in range(p.i, len(p.toks)):
        t = p.toks[j].text
        if t == "[":
            depth += 1
        elif t == "]":
            depth -= 1
            if depth == 0:
                nxt = p.toks[j + 1].text if j + 1 < len(p.toks) else None
                return nxt not in ("->", "=")
        elif t == "," and depth == 1:
            return True
    return True


def _symbol(p: _Parser, lineno: int) -> SymbolStmt:
    name = p.ident()
    p.expect(":")
    p.allow_free = False
    ty = p.term([])
    constant, status, kind, arity = False, None, None, None
    while not p.at_end():
        kw = p.next()
        if kw == "constant":
            constant = True
        elif kw == "status":
            status = p.next()
            if status not in ("mul", "lex"):
                p.i -= 1
                p.error("status must be mul or lex")
        elif kw == "kind":
            kind = p.next()
            if kind not in ("fo", "ho"):
                p.i -= 1
                p.error("kind must be fo or ho")
        elif kw == "arity":
            n = p.next()
            if not n.isdigit():
                p.i -= 1
                p.error("arity must be a natural number")
            arity = int(n)
        else:
            p.i -= 1
            p.error(f"unexpected {kw!r}")
    return SymbolStmt(name, ty, constant, status, kind, arity, lineno)


def parse_term(text: str, sig: Signature) -> Term:
    p = _Parser(tokenize(text), sig.symbols)
    t = p.term([])
    p.finish()
    return t


def parse_env(text: str, sig: Signature) -> tuple:
    text = text.strip()
    if not text:
        return ()
    if not text.startswith("["):
        text = f"[{text}]"
    p = _Parser(tokenize(text), sig.symbols)
    env = p.env()
    p.finish()
    return env


# ---------- printing ----------

def _show_env(env) -> str:
    return "[" + ", ".join(f"{x}:{show(t)}" for x, t in env) + "]"


def print_decl(d) -> str:
    match d:
        case SymbolStmt():
            parts = [f"symbol {d.name} : {show(d.type)}"]
            if d.constant:
                parts.append("constant")
            if d.status:
                parts.append(f"status {d.status}")
            if d.kind:
                parts.append(f"kind {d.kind}")
            if d.arity is not None:
                parts.append(f"arity {d.arity}")
            return " ".join(parts)
        case RuleStmt() | EqStmt():
            kw, sep = ("rule", "->") if isinstance(d, RuleStmt) else ("eq", "=")
            env = f" {_show_env(d.env)}" if d.env else ""
            lhs = show(d.lhs)
            if not d.env and lhs.startswith("["):
                lhs = f"({lhs})"
            s = f"{kw}{env} {lhs} {sep} {show(d.rhs)}"
            if d.subst:
                s += " with " + ", ".join(f"{x} := {show(t)}" for x, t in d.subst)
            return s
        case PrecedenceStmt():
            return "precedence " + " ".join(d.chain)
        case AttestStmt():
            return f"attest {d.what}"
    raise TypeError(d)


def print_spec(spec: SpecFile) -> str:
    return "\n".join(print_decl(d) for d in spec.declarations) + "\n"


# ---------- building signatures ----------

def to_signature(spec: SpecFile, limits: Limits | None = None) -> Signature:
    sig = Signature(limits)
    for d in spec.declarations:
        try:
            _load(sig, d)
        except ParseError:
            raise
        except CacError as e:
            raise ParseError(str(e), d.line, None) from e
    return sig


def _load(sig: Signature, d):
    match d:
        case SymbolStmt():
            sig.declare(d.name, d.type,
                        status=Status(d.status) if d.status else Status.MUL,
                        kind=Kind(d.kind) if d.kind else None,
                        constant=d.constant, arity=d.arity)
        case RuleStmt():
            head, args = spine(d.lhs)
            if not isinstance(head, Symb):
                raise ParseError("left-hand side of a rule must be headed by a symbol", d.line, None)
            sig.add_rule(head.name, args, d.rhs, d.env, dict(d.subst))
            if sig.symbols[head.name].declared_constant:
                raise ParseError(f"{head.name} is declared constant but heads a rule", d.line, None)
        case EqStmt():
            sig.add_equation(d.lhs, d.rhs, d.env, dict(d.subst))
        case PrecedenceStmt():
            for k in range(0, len(d.chain) - 2, 2):
                sig.declare_precedence(d.chain[k], d.chain[k + 1], d.chain[k + 2])
        case AttestStmt():
            sig.attest(d.what)


def load_signature(source: str, limits: Limits | None = None) -> Signature:
    return to_signature(parse(source), limits)


def load_file(path, limits: Limits | None = None) -> Signature:
    return load_signature(Path(path).read_text(), limits)
