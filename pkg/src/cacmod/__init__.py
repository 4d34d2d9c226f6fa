"""Kernel and checker for the Calculus of Algebraic Constructions with rewriting modulo equations."""

from .closure import (
    ClosureContext,
    SchemaVerdict,
    accessible_vars,
    closure_check,
    general_schema_equation,
    general_schema_rule,
    status_less,
)
from .conditions import ConditionReport, assemble_report
from .confluence import CriticalPair, confluence_verdict, cp_joinable, critical_pairs, unify_algebraic
from .errors import (
    CacError,
    ClassBoundExceeded,
    FuelExhausted,
    IllTyped,
    InvalidPosition,
    NotAConstantPredicate,
    ParseError,
    SignatureError,
)
from .reduction import (
    ReductionTrace,
    Step,
    cap_aliens,
    e_class,
    equivalent,
    joinable_modulo,
    match_modulo,
    normalize,
    rel_step,
    replay,
)
from .signature import Equation, Kind, Limits, RewriteRule, Signature, Status, SymbolDecl
from .syntax import load_file, load_signature, parse, parse_env, parse_term, print_spec
from .terms import BOX, STAR, Abs, App, Bound, Prod, Sort, Symb, Term, Var, show
from .typecheck import check, check_equation_typing, check_rule_typing, infer

__all__ = [
    "ClosureContext", "SchemaVerdict", "accessible_vars", "closure_check",
    "general_schema_equation", "general_schema_rule", "status_less", "ConditionReport",
    "assemble_report", "CriticalPair", "confluence_verdict", "cp_joinable", "critical_pairs",
    "unify_algebraic", "CacError", "ClassBoundExceeded", "FuelExhausted", "IllTyped",
    "InvalidPosition", "NotAConstantPredicate", "ParseError", "SignatureError",
    "ReductionTrace", "Step", "cap_aliens", "e_class", "equivalent", "joinable_modulo",
    "match_modulo", "normalize", "rel_step", "replay", "Equation", "Kind", "Limits",
    "RewriteRule", "Signature", "Status", "SymbolDecl", "load_file", "load_signature", "parse",
    "parse_env", "parse_term", "print_spec", "BOX", "STAR", "Abs", "App", "Bound", "Prod",
    "Sort", "Symb", "Term", "Var", "show", "check", "check_equation_typing",
    "check_rule_typing", "infer",
]
