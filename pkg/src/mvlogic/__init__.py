"""Exact-arithmetic toolkit for Lukasiewicz infinite-valued logic.

Everything is computed over exact rationals (``fractions.Fraction``); no
floating point is used anywhere. The package provides:

* a parser / printer for propositional and predicate formulas,
* the MV-algebra on [0,1] and exact propositional evaluation,
* an exact piecewise-linear infimum solver and tautology decider,
* finite fuzzy models and closed-formula evaluation,
* the classical (not/and/or) fragment with prenex form, Skolemization
  and bounded Herbrand refutation,
* builders and verifiers for a parametric hardness-reduction formula
  family at desk scale,
* a command line front end (``mvlogic``).
"""

from mvlogic.algebra import apply_connective
from mvlogic.syntax import (
    Signature,
    Formula,
    ClosedFormula,
    parse,
    print_formula,
    universal_closure,
    subformulas,
)
from mvlogic.propositional import (
    evaluate,
    infimum,
    is_tautology,
    is_predicate_tautology,
)
from mvlogic.models import FuzzyModel, eval_closed, epsilon_value, crisp_round

__all__ = [
    "apply_connective",
    "Signature",
    "Formula",
    "ClosedFormula",
    "parse",
    "print_formula",
    "universal_closure",
    "subformulas",
    "evaluate",
    "infimum",
    "is_tautology",
    "is_predicate_tautology",
    "FuzzyModel",
    "eval_closed",
    "epsilon_value",
    "crisp_round",
]
