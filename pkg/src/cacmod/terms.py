"""Terms of the Calculus of Algebraic Constructions.

Bound variables are de Bruijn indices (``Bound``) and free variables are
names (``Var``), so alpha-equivalent terms are equal as Python values.
Binders keep a name hint that takes no part in equality.

Positions are Dewey paths over the binary tree: for ``App`` child 1 is the
function and child 2 the argument; for ``Abs``/``Prod`` child 1 is the
domain and child 2 the body.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .errors import InvalidPosition


@dataclass(frozen=True, slots=True)
class Sort:
    name: str  # "*" or "box"

    def __str__(self):
        return show(self)


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Bound:
    index: int

    def __str__(self):
        return show(self)


@dataclass(frozen=True, slots=True)
class Symb:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Abs:
    ty: "Term"
    body: "Term"
    hint: str = field(default="x", compare=False)

    def __str__(self):
        return show(self)


@dataclass(frozen=True, slots=True)
class App:
    fun: "Term"
    arg: "Term"

    def __str__(self):
        return show(self)


@dataclass(frozen=True, slots=True)
class Prod:
    ty: "Term"
    body: "Term"
    hint: str = field(default="x", compare=False)

    def __str__(self):
        return show(self)


Term = Union[Sort, Var, Bound, Symb, Abs, App, Prod]
Position = tuple  # tuple[int, ...]
Substitution = Mapping[str, Term]

STAR = Sort("*")
BOX = Sort("box")


# ---------- construction and views ----------

def app(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def spine(t: Term) -> tuple[Term, list[Term]]:
    """Split ``f t1 ... tn`` into ``(f, [t1, ..., tn])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def head_symbol(t: Term) -> str | None:
    h, _ = spine(t)
    return h.name if isinstance(h, Symb) else None


def arg_position(nargs: int, i: int) -> Position:
    """Binary position of argument ``i`` (0-based) of a spine with ``nargs`` arguments."""
    return (1,) * (nargs - 1 - i) + (2,)


def arrow(dom: Term, cod: Term) -> Prod:
    """Non-dependent product ``dom => cod``; ``cod`` must not use bound index 0."""
    return Prod(dom, shift(cod, 1), "_")


def pi(name: str, dom: Term, cod: Term) -> Prod:
    """Dependent product binding the free variable ``name`` of ``cod``."""
    return Prod(dom, abstract(cod, name), name)


def lam(name: str, dom: Term, body: Term) -> Abs:
    return Abs(dom, abstract(body, name), name)


def prod_telescope(t: Term) -> tuple[list[tuple[str, Term]], Term]:
    """Domains of the leading products of ``t`` (still de Bruijn) and the codomain."""
    doms = []
    while isinstance(t, Prod):
        doms.append((t.hint, t.ty))
        t = t.body
    return doms, t


def instantiate_telescope(ty: Term, args: list[Term]) -> Term:
    """``(x1:T1)...(xn:Tn)U`` applied to ``args``: ``U{x->args}`` (needs n >= len(args) products)."""
    for a in args:
        if not isinstance(ty, Prod):
            raise ValueError("not enough products in type")
        ty = instantiate(ty.body, a)
    return ty


# ---------- de Bruijn machinery ----------

def shift(t: Term, by: int, cutoff: int = 0) -> Term:
    match t:
        case Bound(i):
            return Bound(i + by) if i >= cutoff else t
        case App(f, a):
            return App(shift(f, by, cutoff), shift(a, by, cutoff))
        case Abs(ty, body, hint):
            return Abs(shift(ty, by, cutoff), shift(body, by, cutoff + 1), hint)
        case Prod(ty, body, hint):
            return Prod(shift(ty, by, cutoff), shift(body, by, cutoff + 1), hint)
    return t


def instantiate(body: Term, u: Term, depth: int = 0) -> Term:
    """Replace bound index ``depth`` of ``body`` by ``u`` and drop one binder level."""
    match body:
        case Bound(i):
            if i == depth:
                return shift(u, depth) if depth else u
            return Bound(i - 1) if i > depth else body
        case App(f, a):
            return App(instantiate(f, u, depth), instantiate(a, u, depth))
        case Abs(ty, b, hint):
            return Abs(instantiate(ty, u, depth), instantiate(b, u, depth + 1), hint)
        case Prod(ty, b, hint):
            return Prod(instantiate(ty, u, depth), instantiate(b, u, depth + 1), hint)
    return body


def abstract(t: Term, name: str, depth: int = 0) -> Term:
    """Turn the free variable ``name`` into bound index ``depth`` (inverse of instantiate)."""
    match t:
        case Var(n):
            return Bound(depth) if n == name else t
        case Bound(i):
            return Bound(i + 1) if i >= depth else t
        case App(f, a):
            return App(abstract(f, name, depth), abstract(a, name, depth))
        case Abs(ty, b, hint):
            return Abs(abstract(ty, name, depth), abstract(b, name, depth + 1), hint)
        case Prod(ty, b, hint):
            return Prod(abstract(ty, name, depth), abstract(b, name, depth + 1), hint)
    return t


def uses_bound(t: Term, depth: int = 0) -> bool:
    """Does ``t`` mention bound index ``depth`` (relative to its root)?"""
    match t:
        case Bound(i):
            return i == depth
        case App(f, a):
            return uses_bound(f, depth) or uses_bound(a, depth)
        case Abs(ty, b) | Prod(ty, b):
            return uses_bound(ty, depth) or uses_bound(b, depth + 1)
    return False


def has_loose_bound(t: Term, depth: int = 0) -> bool:
    match t:
        case Bound(i):
            return i >= depth
        case App(f, a):
            return has_loose_bound(f, depth) or has_loose_bound(a, depth)
        case Abs(ty, b) | Prod(ty, b):
            return has_loose_bound(ty, depth) or has_loose_bound(b, depth + 1)
    return False


# ---------- variables and substitutions ----------

def var_occurrences(t: Term) -> Counter:
    counts: Counter = Counter()
    stack = [t]
    while stack:
        u = stack.pop()
        match u:
            case Var(n):
                counts[n] += 1
            case App(f, a):
                stack += (a, f)
            case Abs(ty, b) | Prod(ty, b):
                stack += (b, ty)
    return counts


def free_vars(t: Term) -> frozenset[str]:
    return frozenset(var_occurrences(t))


def symbols_of(t: Term) -> set[str]:
    out = set()
    for _, u in subterms(t):
        if isinstance(u, Symb):
            out.add(u.name)
    return out


def apply_subst(t: Term, theta: Substitution, depth: int = 0) -> Term:
    """Simultaneous capture-avoiding substitution of free variables.

    Replacements are shifted when pushed under binders, so they may
    themselves contain loose bound indices (as when rewriting under a binder).
    """
    if not theta:
        return t
    match t:
        case Var(n):
            if n in theta:
                u = theta[n]
                return shift(u, depth) if depth else u
            return t
        case App(f, a):
            return App(apply_subst(f, theta, depth), apply_subst(a, theta, depth))
        case Abs(ty, b, hint):
            return Abs(apply_subst(ty, theta, depth), apply_subst(b, theta, depth + 1), hint)
        case Prod(ty, b, hint):
            return Prod(apply_subst(ty, theta, depth), apply_subst(b, theta, depth + 1), hint)
    return t


def compose(first: Substitution, second: Substitution) -> dict[str, Term]:
    """The substitution ``t -> (t first) second``."""
    out = {x: apply_subst(u, second) for x, u in first.items()}
    for x, u in second.items():
        out.setdefault(x, u)
    return out


def rename_vars(t: Term, renaming: Mapping[str, str]) -> Term:
    return apply_subst(t, {a: Var(b) for a, b in renaming.items()})


def fresh_name(base: str, avoid) -> str:
    base = base if base and base != "_" else "x"
    name = base
    while name in avoid:
        name += "'"
    return name


# ---------- positions ----------

def children(t: Term) -> tuple:
    match t:
        case App(f, a):
            return (f, a)
        case Abs(ty, b) | Prod(ty, b):
            return (ty, b)
    return ()


def subterms(t: Term, prefix: Position = ()) -> Iterator[tuple[Position, Term]]:
    """All ``(position, subterm)`` pairs, pre-order, left to right."""
    yield prefix, t
    for i, c in enumerate(children(t), start=1):
        yield from subterms(c, prefix + (i,))


def positions(t: Term) -> list[Position]:
    return [p for p, _ in subterms(t)]


def subterm_at(t: Term, p: Position) -> Term:
    for i in p:
        cs = children(t)
        if not 1 <= i <= len(cs):
            raise InvalidPosition(f"position {list(p)} is not valid")
        t = cs[i - 1]
    return t


def replace_at(t: Term, p: Position, u: Term) -> Term:
    if not p:
        return u
    i, rest = p[0], p[1:]
    match t:
        case App(f, a):
            if i == 1:
                return App(replace_at(f, rest, u), a)
            if i == 2:
                return App(f, replace_at(a, rest, u))
        case Abs(ty, b, hint):
            if i == 1:
                return Abs(replace_at(ty, rest, u), b, hint)
            if i == 2:
                return Abs(ty, replace_at(b, rest, u), hint)
        case Prod(ty, b, hint):
            if i == 1:
                return Prod(replace_at(ty, rest, u), b, hint)
            if i == 2:
                return Prod(ty, replace_at(b, rest, u), hint)
    raise InvalidPosition(f"position {list(p)} is not valid")


def binder_depth(t: Term, p: Position) -> int:
    """Number of binders crossed to reach ``p`` through a body."""
    depth = 0
    for i in p:
        if isinstance(t, (Abs, Prod)) and i == 2:
            depth += 1
        t = subterm_at(t, (i,))
    return depth


def spine_path(t: Term, p: Position) -> list:
    """Render a binary position spine-relative for reports.

    Integers ``k >= 1`` select argument ``k`` of an application spine and
    ``0`` its head; ``"ty"``/``"body"`` enter binders.
    """
    out: list = []
    p = tuple(p)
    while p:
        if isinstance(t, App):
            head, args = spine(t)
            n = len(args)
            ones = 0
            while ones < len(p) and ones < n and p[ones] == 1:
                ones += 1
            if ones == n:
                out.append(0)
                t, p = head, p[n:]
                continue
            if ones == len(p):
                # ends on a partial application f t1 ... tk
                out.append(["prefix", n - ones])
                break
            idx = n - ones
            out.append(idx)
            t, p = args[idx - 1], p[ones + 1:]
        elif isinstance(t, (Abs, Prod)):
            out.append("ty" if p[0] == 1 else "body")
            t, p = children(t)[p[0] - 1], p[1:]
        else:
            raise InvalidPosition(f"position {list(p)} is not valid")
    return out


# ---------- syntactic predicates ----------

def is_algebraic(t: Term, sig) -> bool:
    """Only variables and symbols applied to exactly their arity."""
    head, args = spine(t)
    if isinstance(head, Var):
        return not args
    if isinstance(head, Symb):
        if sig.arity(head.name) != len(args):
            return False
        return all(is_algebraic(a, sig) for a in args)
    return False


def linear(t: Term) -> bool:
    return all(n == 1 for n in var_occurrences(t).values())


def symbol_count(t: Term) -> int:
    return sum(1 for _, u in subterms(t) if isinstance(u, Symb))


def depth(t: Term) -> int:
    cs = children(t)
    return 1 + max((depth(c) for c in cs), default=0)


def is_kind(t: Term) -> bool:
    """``(x1:T1)...(xn:Tn) *``: the types whose inhabitants are type families."""
    while isinstance(t, Prod):
        t = t.body
    return t == STAR


# ---------- printing ----------

_ATOM, _APP, _TOP = 2, 1, 0


def show(t: Term, ctx: tuple = ()) -> str:
    return _show(t, list(ctx), _TOP)


def _binder_name(hint: str, body: Term, ctx: list) -> str:
    avoid = set(ctx) | set(free_vars(body)) | symbols_of(body)
    return fresh_name(hint, avoid)


def _show(t: Term, ctx: list, level: int) -> str:
    match t:
        case Sort(name):
            return name
        case Var(n) | Symb(n):
            return n
        case Bound(i):
            return ctx[-1 - i] if i < len(ctx) else f"#{i}"
        case App():
            head, args = spine(t)
            s = " ".join([_show(head, ctx, _ATOM)] + [_show(a, ctx, _ATOM) for a in args])
            return f"({s})" if level > _APP else s
        case Abs(ty, body, hint):
            x = _binder_name(hint, body, ctx)
            s = f"[{x}:{_show(ty, ctx, _TOP)}] {_show(body, ctx + [x], _TOP)}"
            return f"({s})" if level > _TOP else s
        case Prod(ty, body, hint):
            if not uses_bound(body):
                # the body is printed in a context where index 0 is unnamed
                s = f"{_show(ty, ctx, _APP)} => {_show(body, ctx + ['_'], _TOP)}"
            else:
                x = _binder_name(hint, body, ctx)
                s = f"({x}:{_show(ty, ctx, _TOP)}) {_show(body, ctx + [x], _TOP)}"
            return f"({s})" if level > _TOP else s
    raise TypeError(f"not a term: {t!r}")
