"""Continuous-logic kernel: formulas, moduli, structures, evaluation."""

from .evaluate import ModulusReport, check_modulus, evaluate, infer_sorts, modulus_of
from .formula import (
    AbsDiff,
    App,
    CMax,
    CMin,
    Const,
    Dist,
    Half,
    Inf,
    Max,
    Min,
    Neg,
    Pred,
    Sup,
    TruncAdd,
    TruncSub,
    Var,
    free_vars,
    truncate,
)
from .modulus import Modulus
from .structure import FunctionSymbol, PredicateSymbol, Sort, Structure, check_metric

__all__ = [
    "AbsDiff", "App", "CMax", "CMin", "Const", "Dist", "FunctionSymbol", "Half", "Inf",
    "Max", "Min", "Modulus", "ModulusReport", "Neg", "Pred", "PredicateSymbol", "Sort",
    "Structure", "Sup", "TruncAdd", "TruncSub", "Var", "check_metric", "check_modulus",
    "evaluate", "free_vars", "infer_sorts", "modulus_of", "truncate",
]
