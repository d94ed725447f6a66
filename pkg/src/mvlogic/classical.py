"""The not/and/or fragment: normal forms, classical tautology checking,
prenex form, Skolemization, bounded Herbrand refutation, and the checks
linking classical validity to fuzzy value 1/2.

Min, max and 1-x satisfy distributivity, De Morgan and involution, so the
usual classical transformations preserve the fuzzy value pointwise; the
routines here rely on exactly that and are cross-checked against truth
tables and random fuzzy models in the test suite.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from mvlogic.algebra import HALF, ONE, ZERO
from mvlogic.models import FuzzyModel, all_half_model, eval_closed
from mvlogic.propositional import InfimumResult, infimum
from mvlogic.syntax import (
    And,
    Atom,
    Const,
    Exists,
    Falsity,
    Forall,
    Formula,
    Func,
    Implies,
    Not,
    Or,
    Signature,
    StrictAnd,
    StrictOr,
    Truth,
    Var,
    free_vars,
    parse,
    print_formula,
    substitute,
    unwrap,
)


class FragmentError(ValueError):
    """A connective outside the not/and/or (plus quantifier) fragment."""


def _require_lattice(f: Formula, quantifiers: bool = False) -> None:
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, (And, Or)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Forall, Exists)):
            if not quantifiers:
                raise FragmentError("quantifier outside the classical predicate fragment")
            stack.append(node.body)
        elif isinstance(node, (Implies, StrictAnd, StrictOr, Truth, Falsity)):
            raise FragmentError(f"non-classical connective {type(node).__name__}")
        elif not isinstance(node, Atom):
            raise TypeError(f"not a formula: {node!r}")


# ---------------------------------------------------------------------------
# Normal form (conjunction of disjunctive clauses)
# ---------------------------------------------------------------------------

# Literal: (variable name, positive). Clause: frozenset of literals, read as
# a disjunction. NormalForm: tuple of clauses, read as a conjunction.


@dataclass(frozen=True)
class NormalForm:
    clauses: tuple

    def __post_init__(self):
        if not self.clauses or any(not c for c in self.clauses):
            raise ValueError("normal form needs nonempty clauses")


def to_normal_form(f: Formula) -> NormalForm:
    """Conjunctive normal form, equivalent classically and under every fuzzy
    assignment (De Morgan, distributivity and double negation hold for
    min / max / 1-x)."""
    _require_lattice(unwrap(f))
    nnf = _nnf(unwrap(f), positive=True)
    clauses = _cnf(nnf)
    # deterministic order: by clause size then sorted literal text
    ordered = sorted(
        {frozenset(c) for c in clauses},
        key=lambda c: (len(c), sorted(c)),
    )
    return NormalForm(tuple(ordered))


def _nnf(f: Formula, positive: bool) -> Formula:
    if isinstance(f, Atom):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return _nnf(f.operand, not positive)
    if isinstance(f, And):
        node = And if positive else Or
        return node(_nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Or):
        node = Or if positive else And
        return node(_nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Forall):
        node, var = (Forall, f.var) if positive else (Exists, f.var)
        return node(var, _nnf(f.body, positive))
    if isinstance(f, Exists):
        node = Exists if positive else Forall
        return node(f.var, _nnf(f.body, positive))
    raise FragmentError(f"non-classical connective {type(f).__name__}")


def _cnf(f: Formula) -> list:
    if isinstance(f, Atom):
        return [frozenset([(f.relation, True)])]
    if isinstance(f, Not):  # NNF guarantees the operand is an atom
        return [frozenset([(f.operand.relation, False)])]
    if isinstance(f, And):
        return _cnf(f.left) + _cnf(f.right)
    if isinstance(f, Or):
        left, right = _cnf(f.left), _cnf(f.right)
        return [a | b for a in left for b in right]
    raise FragmentError(f"unexpected node {type(f).__name__} in CNF")


def normal_form_formula(nf: NormalForm) -> Formula:
    """Back to a formula, for value-preservation checks."""
    def literal(lit):
        name, positive = lit
        return Atom(name) if positive else Not(Atom(name))

    clause_formulas = []
    for clause in nf.clauses:
        lits = [literal(l) for l in sorted(clause)]
        g = lits[0]
        for l in lits[1:]:
            g = Or(g, l)
        clause_formulas.append(g)
    out = clause_formulas[0]
    for g in clause_formulas[1:]:
        out = And(out, g)
    return out


def is_classical_tautology(f: Formula) -> bool:
    """True iff every clause of the normal form contains a complementary
    literal pair (then each clause is fuzzily >= 1/2 as well)."""
    nf = to_normal_form(f)
    for clause in nf.clauses:
        names_pos = {n for n, pos in clause if pos}
        names_neg = {n for n, pos in clause if not pos}
        if not names_pos & names_neg:
            return False
    return True


def truth_table_tautology(f: Formula) -> bool:
    """Independent brute-force oracle over crisp assignments."""
    f = unwrap(f)
    atoms = sorted({a.relation for a in _atoms(f) if not a.args})
    for bits in itertools.product((False, True), repeat=len(atoms)):
        if not _bool_eval(f, dict(zip(atoms, bits))):
            return False
    return True


def _atoms(f: Formula):
    stack, out = [f], []
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            out.append(node)
        elif isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, (And, Or, Implies, StrictAnd, StrictOr)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (Forall, Exists)):
            stack.append(node.body)
    return out


def _bool_eval(f: Formula, s: dict) -> bool:
    if isinstance(f, Atom):
        return s[f.relation]
    if isinstance(f, Not):
        return not _bool_eval(f.operand, s)
    if isinstance(f, And):
        return _bool_eval(f.left, s) and _bool_eval(f.right, s)
    if isinstance(f, Or):
        return _bool_eval(f.left, s) or _bool_eval(f.right, s)
    raise FragmentError(f"non-classical connective {type(f).__name__}")


# ---------------------------------------------------------------------------
# The value-1/2 facts for the propositional fragment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ObservationReport:
    formula: Formula
    inf: InfimumResult
    is_tautology: bool
    neg_implies_self: Fraction      # value of ~f -> f at its infimum
    contradiction_premise: Fraction  # value of p /\ ~p -> f, p fresh
    sampled_min: Fraction | None
    failures: tuple

    @property
    def ok(self) -> bool:
        return not self.failures


def check_observation(f: Formula, samples: int = 50, seed: int = 0) -> ObservationReport:
    """Verify the propositional lattice-fragment facts on one formula:
    the infimum is at most 1/2; it is exactly 1/2 for classical tautologies
    (and sampled assignments stay at or above 1/2) and exactly 0 otherwise;
    and the two derived-implication reformulations match the verdict.

    The derived values are computed exactly from the infimum: both
    min(1, 2v) and min(1, 1/2 + v) are continuous and nondecreasing in v,
    so they commute with taking the infimum over assignments.
    """
    from mvlogic.corpus import random_assignment
    from mvlogic.propositional import evaluate, variables

    f = unwrap(f)
    _require_lattice(f)
    inf = infimum(f)
    taut = is_classical_tautology(f)
    neg_val = min(ONE, 2 * inf.value)
    prem_val = min(ONE, HALF + inf.value)
    failures = []
    if inf.value > HALF:
        failures.append(f"infimum {inf.value} exceeds 1/2")
    if taut and inf.value != HALF:
        failures.append(f"tautology with infimum {inf.value} != 1/2")
    if not taut and inf.value != ZERO:
        failures.append(f"non-tautology with infimum {inf.value} != 0")
    if (neg_val == ONE) != taut:
        failures.append(f"negation-implies-self value {neg_val} disagrees with verdict")
    if (prem_val == ONE) != taut:
        failures.append(f"contradiction-premise value {prem_val} disagrees with verdict")
    sampled_min = None
    if taut:
        rng = random.Random(seed)
        names = variables(f)
        sampled_min = ONE
        for _ in range(samples):
            v = evaluate(f, random_assignment(rng, names))
            sampled_min = min(sampled_min, v)
        if sampled_min < HALF:
            failures.append(f"sampled assignment below 1/2: {sampled_min}")
    return ObservationReport(f, inf, taut, neg_val, prem_val, sampled_min, tuple(failures))


# ---------------------------------------------------------------------------
# Prenex form
# ---------------------------------------------------------------------------


def _fresh_names(avoid: set):
    i = 0
    while True:
        i += 1
        name = f"v{i}"
        if name not in avoid:
            avoid.add(name)
            yield name


def rename_apart(f: Formula) -> Formula:
    """Give every quantifier a fresh variable, distinct from all free names."""
    avoid = set(free_vars(f))
    stack = [f]
    while stack:  # collect every name in use
        node = stack.pop()
        if isinstance(node, (Forall, Exists)):
            avoid.add(node.var)
            stack.append(node.body)
        elif isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, (And, Or, Implies, StrictAnd, StrictOr)):
            stack.append(node.left)
            stack.append(node.right)
    fresh = _fresh_names(avoid)

    def walk(node, env):
        if isinstance(node, Atom):
            return substitute(node, env) if env else node
        if isinstance(node, Not):
            return Not(walk(node.operand, env))
        if isinstance(node, (And, Or)):
            return type(node)(walk(node.left, env), walk(node.right, env))
        if isinstance(node, (Forall, Exists)):
            new = next(fresh)
            env2 = dict(env)
            env2[node.var] = Var(new)
            return type(node)(new, walk(node.body, env2))
        raise FragmentError(f"non-classical connective {type(node).__name__}")

    return walk(f, {})


def to_prenex(f: Formula) -> Formula:
    """Prenex form with a quantifier-free matrix; equal value in every fuzzy
    model because min / max quantifier sweeps commute with the lattice
    connectives the same way they do classically. Bound variables are
    renamed apart first."""
    f = unwrap(f)
    _require_lattice(f, quantifiers=True)
    nnf = _nnf(rename_apart(f), positive=True)
    prefix, matrix = _pull(nnf)
    out = matrix
    for kind, var in reversed(prefix):
        out = kind(var, out)
    return out


def _pull(f: Formula) -> tuple:
    if isinstance(f, (Atom, Not)):
        return [], f
    if isinstance(f, (And, Or)):
        pa, ma = _pull(f.left)
        pb, mb = _pull(f.right)
        return pa + pb, type(f)(ma, mb)
    if isinstance(f, (Forall, Exists)):
        pb, mb = _pull(f.body)
        return [(type(f), f.var)] + pb, mb
    raise FragmentError(f"unexpected node {type(f).__name__}")


def prenex_prefix(f: Formula) -> tuple:
    """((kind, var), ...) prefix and the matrix of an already-prenex formula."""
    prefix = []
    node = f
    while isinstance(node, (Forall, Exists)):
        prefix.append((type(node), node.var))
        node = node.body
    return tuple(prefix), node


# ---------------------------------------------------------------------------
# Skolemization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SkolemForm:
    """Quantifier-free matrix over the original relations plus the
    introduced function symbols; the universal prefix is implicit in
    ``universals``. ``functions[i]`` pairs the i-th introduced symbol with
    its arity i+1 ... kept explicitly for certificate re-parsing."""

    universals: tuple
    matrix: Formula
    functions: tuple  # ((name, arity), ...) with arity == position + 1
    signature: Signature


def skolemize(f: Formula, signature: Signature | None = None) -> SkolemForm:
    """Replace each existential by a function of the universals before it.

    The input must be prenex; the prefix is padded with unused dummy
    quantifiers to the strict forall/exists alternation first, so the i-th
    introduced function has arity i.
    """
    f = unwrap(f)
    prefix, matrix = prenex_prefix(f)
    if prefix and _has_quantifier(matrix):
        raise FragmentError("input is not prenex")
    avoid = set(free_vars(matrix)) | {v for _, v in prefix}
    fresh = _fresh_names(avoid)
    padded = []  # (kind, var, is_dummy); dummies never occur in the matrix
    expect = Forall
    for kind, var in prefix:
        while kind is not expect:
            padded.append((expect, next(fresh), True))
            expect = Exists if expect is Forall else Forall
        padded.append((kind, var, False))
        expect = Exists if kind is Forall else Forall

    if signature is None:
        signature = formula_signature(matrix)
    base = "g"
    while any(f"{base}{i}" in signature.relations or f"{base}{i}" in signature.constants
              for i in range(1, len(padded) + 1)):
        base += "_"

    universals: list = []
    mapping: dict = {}
    functions: list = []
    for kind, var, dummy in padded:
        if kind is Forall:
            universals.append(var)
        elif not dummy:
            # the function index equals the universal count before it, so
            # the i-th introduced symbol has arity i
            name = f"{base}{len(universals)}"
            functions.append((name, len(universals)))
            mapping[var] = Func(name, tuple(Var(u) for u in universals))
    new_matrix = substitute(matrix, mapping) if mapping else matrix
    sig = signature.with_functions(dict(functions))
    return SkolemForm(tuple(universals), new_matrix, tuple(functions), sig)


def _has_quantifier(f: Formula) -> bool:
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, (Forall, Exists)):
            return True
        if isinstance(node, Not):
            stack.append(node.operand)
        elif isinstance(node, (And, Or, Implies, StrictAnd, StrictOr)):
            stack.append(node.left)
            stack.append(node.right)
    return False


def formula_signature(f: Formula) -> Signature:
    """Relations with observed arities and constants occurring in f."""
    relations: dict = {}
    constants: set = set()

    def term_walk(t):
        if isinstance(t, Const):
            constants.add(t.name)
        elif isinstance(t, Func):
            for a in t.args:
                term_walk(a)

    for atom in _atoms(unwrap(f)):
        relations[atom.relation] = len(atom.args)
        for t in atom.args:
            term_walk(t)
    return Signature(relations, frozenset(constants))


# ---------------------------------------------------------------------------
# Herbrand expansion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RefutationCertificate:
    instances: tuple  # closed instances whose conjunction is contradictory
    depth: int

    def lines(self) -> tuple:
        return tuple(print_formula(f) for f in self.instances)


@dataclass(frozen=True)
class HerbrandOutcome:
    certificate: RefutationCertificate | None
    reason: str  # "refuted", "unknown at depth", or a resource note

    @property
    def refuted(self) -> bool:
        return self.certificate is not None


def herbrand_universe(sk: SkolemForm, depth: int) -> tuple:
    """Closed terms up to the given nesting depth, constants first,
    then breadth-first by depth in function order."""
    constants = sorted(sk.signature.constants) or ["c"]
    levels = [tuple(Const(c) for c in constants)]
    for _ in range(depth):
        known = tuple(t for level in levels for t in level)
        batch = []
        seen = set(known)
        for name, arity in sk.functions:
            for args in itertools.product(known, repeat=arity):
                t = Func(name, args)
                if t not in seen:
                    seen.add(t)
                    batch.append(t)
        levels.append(tuple(batch))
    return tuple(t for level in levels for t in level)


def closed_instances(sk: SkolemForm, depth: int) -> list:
    universe = herbrand_universe(sk, depth)
    out = []
    for combo in itertools.product(universe, repeat=len(sk.universals)):
        out.append(substitute(sk.matrix, dict(zip(sk.universals, combo))))
    return out


def conjunction_unsat(formulas: Sequence[Formula], atom_budget: int = 18) -> bool | None:
    """Truth-table unsatisfiability of a conjunction, atoms as letters.

    Returns None when the distinct-atom count exceeds the budget (the
    caller reports an inconclusive outcome rather than guessing).
    """
    atoms: dict = {}
    for f in formulas:
        for a in _atoms(f):
            atoms.setdefault(a, None)
    keys = list(atoms)
    if len(keys) > atom_budget:
        return None
    for bits in itertools.product((False, True), repeat=len(keys)):
        s = dict(zip(keys, bits))
        if all(_bool_eval_atoms(f, s) for f in formulas):
            return False
    return True


def _bool_eval_atoms(f: Formula, s: dict) -> bool:
    if isinstance(f, Atom):
        return s[f]
    if isinstance(f, Not):
        return not _bool_eval_atoms(f.operand, s)
    if isinstance(f, And):
        return _bool_eval_atoms(f.left, s) and _bool_eval_atoms(f.right, s)
    if isinstance(f, Or):
        return _bool_eval_atoms(f.left, s) or _bool_eval_atoms(f.right, s)
    raise FragmentError(f"non-classical connective {type(f).__name__}")


def herbrand_refute(sk: SkolemForm, depth: int, max_instances: int = 2000) -> HerbrandOutcome:
    """Search for a finite set of closed instances whose conjunction is a
    classical propositional contradiction.

    Deterministic: instances are enumerated in the fixed universe order,
    growing prefixes are tested, and a found prefix is shrunk greedily in
    enumeration order. Incompleteness at fixed depth is an outcome, not an
    error.
    """
    instances = closed_instances(sk, depth)
    if len(instances) > max_instances:
        instances = instances[:max_instances]
    prefix_end = None
    for k in range(1, len(instances) + 1):
        verdict = conjunction_unsat(instances[:k])
        if verdict is None:
            return HerbrandOutcome(None, f"unknown at depth {depth}: atom budget exceeded")
        if verdict:
            prefix_end = k
            break
    if prefix_end is None:
        return HerbrandOutcome(None, f"unknown at depth {depth}")
    cert = list(instances[:prefix_end])
    i = 0
    while i < len(cert):
        trimmed = cert[:i] + cert[i + 1:]
        if trimmed and conjunction_unsat(trimmed):
            cert = trimmed
        else:
            i += 1
    return HerbrandOutcome(RefutationCertificate(tuple(cert), depth), "refuted")


def verify_certificate(lines: Iterable[str], signature: Signature) -> bool:
    """Re-parse certificate lines and confirm the conjunction is contradictory."""
    formulas = [parse(line, signature) for line in lines]
    return bool(conjunction_unsat(formulas))


# ---------------------------------------------------------------------------
# The predicate value-1/2 checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfTheoremReport:
    formula: Formula
    all_half_value: Fraction
    negation_refuted: bool
    certificate: RefutationCertificate | None
    depth: int
    models_checked: int
    countermodel: FuzzyModel | None
    failures: tuple

    @property
    def ok(self) -> bool:
        return not self.failures


def check_half_theorem(f, models: Sequence[FuzzyModel], depth: int = 2) -> HalfTheoremReport:
    """Check the classical-fragment value facts on one closed formula.

    Always: the all-1/2 model gives value exactly 1/2. When the bounded
    Herbrand search refutes the negation, f is classically valid and every
    supplied model must give f a value of at least 1/2, equivalently its
    negation at most 1/2 (results are labelled 'confirmed at depth d';
    the search is only a semi-decision). Otherwise any crisp model of value
    0 among the samples is reported as a countermodel.
    """
    f = unwrap(f)
    _require_lattice(f, quantifiers=True)
    sig = formula_signature(f)
    failures = []
    half = eval_closed(f, all_half_model(sig))
    if half != HALF:
        failures.append(f"all-1/2 model gives {half}")
    outcome = herbrand_refute(skolemize(to_prenex(Not(f)), sig), depth)
    countermodel = None
    checked = 0
    if outcome.refuted:
        for model in models:
            checked += 1
            v = eval_closed(f, model)
            if v < HALF:
                failures.append(f"valid formula got value {v} below 1/2")
    else:
        for model in models:
            checked += 1
            if all(x in (ZERO, ONE) for t in model.relations.values() for x in t):
                if eval_closed(f, model) == ZERO:
                    countermodel = model
                    break
    return HalfTheoremReport(
        f, half, outcome.refuted,
        outcome.certificate, depth, checked, countermodel, tuple(failures),
    )
