from .core import (
    ONE,
    ZERO,
    Base,
    DerivativeRule,
    Expr,
    FuncDeriv,
    Jet,
    MissingBindingError,
    Momentum,
    Param,
    RuleSet,
    VarId,
    as_expr,
    biharmonic_rule,
    coefficient_split,
    equals,
    evaluate,
    func,
    normalize,
    only_base,
    p,
    param,
    partial,
    specialize_functions,
    substitute,
    u,
    x,
)
from .parser import ExprSyntaxError, ParseContext, UnknownVariableError, parse, parse_tree
from .printer import to_text, var_text

__all__ = [
    "ONE", "ZERO", "Base", "DerivativeRule", "Expr", "FuncDeriv", "Jet",
    "MissingBindingError", "Momentum", "Param", "RuleSet", "VarId", "as_expr",
    "biharmonic_rule", "coefficient_split", "equals", "evaluate", "func",
    "normalize", "only_base", "p", "param", "partial", "specialize_functions",
    "substitute", "u", "x", "ExprSyntaxError", "ParseContext",
    "UnknownVariableError", "parse", "parse_tree", "to_text", "var_text",
]
