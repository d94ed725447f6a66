"""Propositional evaluation, exact infimum, and the tautology deciders.

The value function of a propositional formula is piecewise linear in the
assignment. ``infimum`` case-splits every min / max / truncation node into
its linear regimes, accumulates the regime inequalities, and minimizes the
resulting affine objective exactly over each feasible region; the global
infimum is the least regional minimum and is always attained.

``is_tautology`` runs the same split lazily, stopping at the first region
whose minimum is below 1; ``is_predicate_tautology`` reduces a predicate
formula to its maximal propositional skeleton first (sound because
propositional tautologies are closed under substitution).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from mvlogic import algebra
from mvlogic.algebra import ONE, ZERO, as_truth_value
from mvlogic.linear import (
    ConstraintSystem,
    Infeasible,
    affine_add,
    affine_const,
    affine_eval,
    affine_neg,
    affine_sub,
    affine_var,
    leq_constraint,
)
from mvlogic.syntax import (
    And,
    Atom,
    Exists,
    Falsity,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    StrictAnd,
    StrictOr,
    Truth,
    unwrap,
)


class PropositionalError(ValueError):
    pass


def variables(f: Formula) -> tuple:
    """0-ary atom names, sorted; rejects quantifiers and non-0-ary atoms."""
    f = unwrap(f)
    names = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            if node.args:
                raise PropositionalError(f"atom {node.relation} is not propositional")
            names.add(node.relation)
        elif isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, (And, Or, StrictAnd, StrictOr, Implies)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Forall, Exists)):
            raise PropositionalError("quantifier in propositional context")
        elif not isinstance(node, (Truth, Falsity)):
            raise TypeError(f"not a formula: {node!r}")
    return tuple(sorted(names))


def evaluate(f: Formula, assignment: Mapping[str, Fraction]) -> Fraction:
    """Homomorphic extension of the assignment; exact."""
    f = unwrap(f)
    if isinstance(f, Atom):
        if f.args:
            raise PropositionalError(f"atom {f.relation} is not propositional")
        try:
            return as_truth_value(assignment[f.relation])
        except KeyError:
            raise PropositionalError(f"unbound variable {f.relation!r}") from None
    if isinstance(f, Truth):
        return ONE
    if isinstance(f, Falsity):
        return ZERO
    if isinstance(f, Not):
        return ONE - evaluate(f.operand, assignment)
    if isinstance(f, (Forall, Exists)):
        raise PropositionalError("quantifier in propositional context")
    a = evaluate(f.left, assignment)
    b = evaluate(f.right, assignment)
    if isinstance(f, And):
        return algebra.meet(a, b)
    if isinstance(f, Or):
        return algebra.join(a, b)
    if isinstance(f, StrictAnd):
        return algebra.strict_and(a, b)
    if isinstance(f, StrictOr):
        return algebra.strict_or(a, b)
    if isinstance(f, Implies):
        return algebra.implies(a, b)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Case splitting
# ---------------------------------------------------------------------------

# A piece is (expr, constraints): on the region cut out by the constraints
# (within the unit box) the formula's value equals the affine expr.


def linear_pieces(f: Formula, index: Mapping[str, int]) -> list:
    """All linear pieces of f, deduplicated; exponential in split nodes."""
    n = len(index)
    memo: dict = {}

    def pieces(node) -> list:
        got = memo.get(node)
        if got is not None:
            return got
        out: list = []
        seen = set()

        def emit(expr, constraints):
            key = (expr, frozenset(constraints))
            if key not in seen:
                seen.add(key)
                out.append((expr, constraints))

        if isinstance(node, Atom):
            emit(affine_var(n, index[node.relation]), ())
        elif isinstance(node, Truth):
            emit(affine_const(n, ONE), ())
        elif isinstance(node, Falsity):
            emit(affine_const(n, ZERO), ())
        elif isinstance(node, Not):
            for expr, cs in pieces(node.operand):
                emit(affine_sub(affine_const(n, ONE), expr), cs)
        else:
            for ea, ca in pieces(node.left):
                for eb, cb in pieces(node.right):
                    for expr, extra in _split(node, ea, eb, n):
                        emit(expr, ca + cb + extra)
        memo[node] = out
        return out

    return pieces(f)


def _split(node, ea, eb, n):
    """The linear regimes of one connective applied to affine arguments."""
    one = affine_const(n, ONE)
    if isinstance(node, And):
        return (
            (ea, (leq_constraint(ea, eb),)),
            (eb, (leq_constraint(eb, ea),)),
        )
    if isinstance(node, Or):
        return (
            (ea, (leq_constraint(eb, ea),)),
            (eb, (leq_constraint(ea, eb),)),
        )
    if isinstance(node, StrictOr):
        s = affine_add(ea, eb)
        return ((s, (leq_constraint(s, one),)), (one, (leq_constraint(one, s),)))
    if isinstance(node, StrictAnd):
        s = affine_sub(affine_add(ea, eb), one)
        zero = affine_const(n, ZERO)
        return ((s, (leq_constraint(zero, s),)), (zero, (leq_constraint(s, zero),)))
    if isinstance(node, Implies):
        # value min(1, 1 - a + b); the slack regime first helps refutation search
        v = affine_add(affine_sub(one, ea), eb)
        return ((v, (leq_constraint(eb, ea),)), (one, (leq_constraint(ea, eb),)))
    raise PropositionalError(f"cannot split {node!r}")


def _pieces_lazy(node, index, n) -> Iterator:
    """Pieces in greedy order without materializing the cross product."""
    if isinstance(node, Atom):
        yield (affine_var(n, index[node.relation]), ())
    elif isinstance(node, Truth):
        yield (affine_const(n, ONE), ())
    elif isinstance(node, Falsity):
        yield (affine_const(n, ZERO), ())
    elif isinstance(node, Not):
        for expr, cs in _pieces_lazy(node.operand, index, n):
            yield (affine_sub(affine_const(n, ONE), expr), cs)
    elif isinstance(node, (Forall, Exists)):
        raise PropositionalError("quantifier in propositional context")
    else:
        for ea, ca in _pieces_lazy(node.left, index, n):
            for eb, cb in _pieces_lazy(node.right, index, n):
                for expr, extra in _split(node, ea, eb, n):
                    yield (expr, ca + cb + extra)


@dataclass(frozen=True)
class InfimumResult:
    value: Fraction
    witness: dict  # an assignment attaining the value exactly


@dataclass(frozen=True)
class TautologyResult:
    is_tautology: bool
    witness: dict | None = None  # refuting assignment when not a tautology
    value: Fraction | None = None  # value at the witness, < 1

    def __bool__(self) -> bool:
        return self.is_tautology


def infimum(f: Formula) -> InfimumResult:
    """Exact infimum of the value over all assignments, with a witness.

    The witness is the lexicographically least optimal vertex under the
    sorted variable order, so results are deterministic.
    """
    f = unwrap(f)
    names = variables(f)
    index = {name: i for i, name in enumerate(names)}
    if not names:
        v = evaluate(f, {})
        return InfimumResult(v, {})
    best = None
    feasible_pieces = []
    for expr, constraints in linear_pieces(f, index):
        system = ConstraintSystem(len(names))
        for c in constraints:
            system.add(*c)
        system.objective = expr
        try:
            value, _ = system.minimize()
        except Infeasible:
            continue
        feasible_pieces.append((value, system))
        if best is None or value < best:
            best = value
    witness_point = None
    for value, system in feasible_pieces:
        if value == best:
            _, point = system.lexmin_optimal()
            if witness_point is None or point < witness_point:
                witness_point = point
    witness = {name: witness_point[i] for name, i in index.items()}
    return InfimumResult(best, witness)


def is_tautology(f: Formula) -> TautologyResult:
    """Decide value 1 under every assignment; early exit with a witness.

    Sound and complete: the lazy search exhausts every linear regime when no
    refutation exists. Each piece is screened with a cheap candidate vertex
    before falling back to the exact simplex.
    """
    f = unwrap(f)
    names = variables(f)
    index = {name: i for i, name in enumerate(names)}
    n = len(names)
    if n == 0:
        v = evaluate(f, {})
        if v == ONE:
            return TautologyResult(True)
        return TautologyResult(False, {}, v)
    for expr, constraints in _pieces_lazy(f, index, n):
        point = _greedy_point(expr, constraints, n)
        if point is None:
            system = ConstraintSystem(n)
            for c in constraints:
                system.add(*c)
            system.objective = expr
            try:
                value, raw = system.minimize()
            except Infeasible:
                continue
            point = raw if value < ONE else None
        if point is not None and affine_eval(expr, point) < ONE:
            witness = {name: point[i] for name, i in index.items()}
            return TautologyResult(False, witness, affine_eval(expr, point))
    return TautologyResult(True)


def _greedy_point(expr, constraints, n):
    """Sign-guided corner guess: feasible and value < 1, else None."""
    point = [ONE if c < 0 else ZERO for c in expr[0]]
    if affine_eval(expr, point) >= ONE:
        return None
    for coeffs, rhs in constraints:
        if sum(c * v for c, v in zip(coeffs, point)) > rhs:
            return None
    return point


# ---------------------------------------------------------------------------
# Predicate skeletons
# ---------------------------------------------------------------------------


def skeleton(f: Formula) -> tuple:
    """The maximal propositional skeleton of f.

    Every maximal subformula rooted at an atom or a quantifier is replaced
    by a fresh variable; structurally identical subformulas share one
    variable. Returns (skeleton formula, {replaced subformula: name}).
    """
    f = unwrap(f)
    mapping: dict = {}

    def walk(node) -> Formula:
        if isinstance(node, (Atom, Forall, Exists)):
            if node not in mapping:
                mapping[node] = f"s{len(mapping) + 1}"
            return Atom(mapping[node])
        if isinstance(node, (Truth, Falsity)):
            return node
        if isinstance(node, Not):
            return Not(walk(node.operand))
        return type(node)(walk(node.left), walk(node.right))

    return walk(f), mapping


def is_predicate_tautology(f: Formula) -> TautologyResult:
    """Tautology in the substitution sense: the skeleton is a tautology.

    Rejects formulas that are valid in every model without being
    substitution instances of propositional tautologies.
    """
    skel, _ = skeleton(f)
    return is_tautology(skel)
