"""Finite fuzzy models and exact evaluation of closed predicate formulas.

A model is a finite domain {0, ..., size-1} plus a total rational-valued
table for every relation symbol. Tables are dense, stored flat in row-major
order; domains are small by design. Decimal numerals always denote the
matching domain element, so closed instances can be written directly.

Models are immutable after construction and evaluation is pure, so sharing
across threads is safe.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from mvlogic.algebra import HALF, ONE, ZERO, as_truth_value
from mvlogic.syntax import (
    And,
    Atom,
    ClosedFormula,
    Const,
    Exists,
    Falsity,
    Forall,
    Formula,
    Implies,
    Not,
    Or,
    Signature,
    StrictAnd,
    StrictOr,
    Truth,
    Var,
    free_vars,
    print_formula,
    subformulas,
    substitute,
    universal_closure,
    unwrap,
)


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class FuzzyModel:
    signature: Signature
    size: int
    constants: Mapping[str, int] = field(default_factory=dict)
    relations: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        if self.size < 1:
            raise ModelError("domain must be nonempty")
        for name, element in self.constants.items():
            if not 0 <= element < self.size:
                raise ModelError(f"constant {name} maps outside the domain")
            if name.isdigit() and int(name) != element:
                raise ModelError(f"numeral constant {name} must denote element {name}")
        for name, arity in self.signature.relations.items():
            table = self.relations.get(name)
            if table is None:
                raise ModelError(f"relation {name} has no interpretation")
            if len(table) != self.size**arity:
                raise ModelError(f"relation {name} table is not total")

    def constant_element(self, name: str) -> int:
        if name in self.constants:
            return self.constants[name]
        if name.isdigit() and int(name) < self.size:
            return int(name)
        raise ModelError(f"constant {name!r} is not interpreted")

    def value(self, relation: str, elements: Sequence[int]) -> Fraction:
        table = self.relations[relation]
        idx = 0
        for e in elements:
            idx = idx * self.size + e
        return table[idx]

    def tuples(self, arity: int) -> Iterable[tuple]:
        if arity == 0:
            yield ()
            return
        for idx in range(self.size**arity):
            out = []
            for _ in range(arity):
                idx, r = divmod(idx, self.size)
                out.append(r)
            yield tuple(reversed(out))

    def replace_relation(self, name: str, table: Sequence[Fraction]) -> "FuzzyModel":
        new = dict(self.relations)
        new[name] = tuple(table)
        return FuzzyModel(self.signature, self.size, self.constants, new)


def constant_table(size: int, arity: int, value: Fraction) -> tuple:
    return tuple([value] * (size**arity))


def table_from_predicate(size: int, arity: int, pred) -> tuple:
    """Crisp table from a boolean predicate on element tuples."""
    out = []
    for idx in range(size**arity):
        digits = []
        for _ in range(arity):
            idx2, r = divmod(idx, size)
            digits.append(r)
            idx = idx2
        out.append(ONE if pred(*reversed(digits)) else ZERO)
    return tuple(out)


def all_half_model(signature: Signature) -> FuzzyModel:
    """One-element model with every relation constantly 1/2."""
    rels = {name: constant_table(1, arity, HALF) for name, arity in signature.relations.items()}
    consts = {name: 0 for name in signature.constants}
    return FuzzyModel(signature, 1, consts, rels)


def random_model(signature: Signature, size: int, rng: random.Random,
                 max_denominator: int = 8, crisp: bool = False) -> FuzzyModel:
    rels = {}
    for name, arity in signature.relations.items():
        table = []
        for _ in range(size**arity):
            if crisp:
                table.append(ONE if rng.randint(0, 1) else ZERO)
            else:
                q = rng.randint(1, max_denominator)
                table.append(Fraction(rng.randint(0, q), q))
        rels[name] = tuple(table)
    consts = {name: rng.randrange(size) for name in signature.constants}
    return FuzzyModel(signature, size, consts, rels)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _term_element(t, model: FuzzyModel, env: dict) -> int:
    if isinstance(t, Var):
        try:
            return env[t.name]
        except KeyError:
            raise ModelError(f"free variable {t.name!r} in evaluation") from None
    if isinstance(t, Const):
        return model.constant_element(t.name)
    raise ModelError(f"cannot evaluate term {t!r} in a model")


def eval_closed(f, model: FuzzyModel, env: dict | None = None) -> Fraction:
    """Exact value of a closed formula; quantifiers sweep the finite domain.

    Short-circuits are exact: an antecedent equal to 0 forces an implication
    to 1, a conjunct equal to 0 forces lattice/strict conjunction to 0, and
    quantifier sweeps stop at 0 (forall) or 1 (exists).
    """
    return _eval(unwrap(f), model, env if env is not None else {})


def _eval(f: Formula, model: FuzzyModel, env: dict) -> Fraction:
    if isinstance(f, Atom):
        if f.relation not in model.relations:
            raise ModelError(f"relation {f.relation!r} missing from model")
        return model.value(f.relation, [_term_element(t, model, env) for t in f.args])
    if isinstance(f, Truth):
        return ONE
    if isinstance(f, Falsity):
        return ZERO
    if isinstance(f, Not):
        return ONE - _eval(f.operand, model, env)
    if isinstance(f, Implies):
        a = _eval(f.left, model, env)
        if a == ZERO:
            return ONE
        t = ONE - a + _eval(f.right, model, env)
        return t if t < ONE else ONE
    if isinstance(f, And):
        a = _eval(f.left, model, env)
        if a == ZERO:
            return ZERO
        b = _eval(f.right, model, env)
        return a if a <= b else b
    if isinstance(f, Or):
        a = _eval(f.left, model, env)
        if a == ONE:
            return ONE
        b = _eval(f.right, model, env)
        return a if a >= b else b
    if isinstance(f, StrictAnd):
        a = _eval(f.left, model, env)
        if a == ZERO:
            return ZERO
        t = a + _eval(f.right, model, env) - ONE
        return t if t > ZERO else ZERO
    if isinstance(f, StrictOr):
        a = _eval(f.left, model, env)
        if a == ONE:
            return ONE
        t = a + _eval(f.right, model, env)
        return t if t < ONE else ONE
    if isinstance(f, Forall):
        shadowed = env.get(f.var, _MISSING)
        best = ONE
        for a in range(model.size):
            env[f.var] = a
            v = _eval(f.body, model, env)
            if v < best:
                best = v
                if best == ZERO:
                    break
        if shadowed is _MISSING:
            del env[f.var]
        else:
            env[f.var] = shadowed
        return best
    if isinstance(f, Exists):
        shadowed = env.get(f.var, _MISSING)
        best = ZERO
        for a in range(model.size):
            env[f.var] = a
            v = _eval(f.body, model, env)
            if v > best:
                best = v
                if best == ONE:
                    break
        if shadowed is _MISSING:
            del env[f.var]
        else:
            env[f.var] = shadowed
        return best
    raise TypeError(f"not a formula: {f!r}")


_MISSING = object()


def extremal_instance(f, model: FuzzyModel) -> tuple:
    """Follow the argmin / argmax of each leading quantifier; returns the
    chosen environment and the matrix value there. Pinpoints an offending
    instance when a universally quantified formula falls short of 1."""
    f = unwrap(f)
    env: dict = {}
    node = f
    while isinstance(node, (Forall, Exists)):
        forall = isinstance(node, Forall)
        best_a, best_v = None, None
        for a in range(model.size):
            env[node.var] = a
            v = _eval(node.body, model, env)
            if best_v is None or (v < best_v if forall else v > best_v):
                best_a, best_v = a, v
        env[node.var] = best_a
        node = node.body
    return dict(env), _eval(node, model, env)


@dataclass(frozen=True)
class EvalReport:
    formula: Formula
    value: Fraction
    trace: tuple = ()  # rows (kind, var, env items, chosen element, value)


def eval_with_trace(f, model: FuzzyModel) -> EvalReport:
    """Like eval_closed but records each quantifier's argmin / argmax."""
    f = unwrap(f)
    rows: list = []

    def ev(node, env):
        if isinstance(node, (Forall, Exists)):
            forall = isinstance(node, Forall)
            best, best_a = None, None
            for a in range(model.size):
                env[node.var] = a
                v = ev(node.body, env)
                if best is None or (v < best if forall else v > best):
                    best, best_a = v, a
            del env[node.var]
            rows.append((
                "forall" if forall else "exists",
                node.var,
                tuple(sorted(env.items())),
                best_a,
                best,
            ))
            return best
        if isinstance(node, Not):
            return ONE - ev(node.operand, env)
        if isinstance(node, (Atom, Truth, Falsity)):
            return _eval(node, model, env)
        a = ev(node.left, env)
        b = ev(node.right, env)
        if isinstance(node, And):
            return min(a, b)
        if isinstance(node, Or):
            return max(a, b)
        if isinstance(node, StrictAnd):
            return max(ZERO, a + b - ONE)
        if isinstance(node, StrictOr):
            return min(ONE, a + b)
        return min(ONE, ONE - a + b)

    value = ev(f, {})
    return EvalReport(f, value, tuple(rows))


# ---------------------------------------------------------------------------
# Crisp rounding and the non-crispness measure
# ---------------------------------------------------------------------------


def crisp_round(model: FuzzyModel, keep: Iterable[str]) -> FuzzyModel:
    """Round every relation not in ``keep`` to 0/1; exact 1/2 is an error."""
    keep = set(keep)
    new = {}
    for name, table in model.relations.items():
        if name in keep:
            new[name] = table
            continue
        rounded = []
        for v in table:
            if v == HALF:
                raise ModelError(f"relation {name} has an ambiguous value 1/2")
            rounded.append(ZERO if v < HALF else ONE)
        new[name] = tuple(rounded)
    return FuzzyModel(model.signature, model.size, model.constants, new)


def noncrispness_closure(f: Formula) -> Formula:
    """Universal closure of f /\\ ~f; value 0 iff some instance is crisp."""
    return universal_closure(And(f, Not(f))).formula


class CachedEvaluator:
    """Exact evaluator with a cache for closed subformulas.

    Sweeps that revisit the same closed subtrees (axiom conjunctions, the
    non-crispness family) evaluate each one once. Caches key on object
    identity, so hold on to the formula objects while using this.
    """

    def __init__(self, model: FuzzyModel):
        self.model = model
        self._free: dict = {}    # id(node) -> tuple of free variable names
        self._closed: dict = {}  # id(node) -> (node, value)

    def free_of(self, node: Formula) -> tuple:
        got = self._free.get(id(node))
        if got is None:
            got = self._scan(node)
        return got[1]

    def _scan(self, node: Formula) -> tuple:
        cls = node.__class__
        if cls is Atom:
            names = []
            for t in node.args:
                if t.__class__ is Var and t.name not in names:
                    names.append(t.name)
            entry = (node, tuple(names))
        elif cls is Not:
            entry = (node, self._scan_child(node.operand))
        elif cls in (Truth, Falsity):
            entry = (node, ())
        elif cls in (Forall, Exists):
            inner = self._scan_child(node.body)
            entry = (node, tuple(n for n in inner if n != node.var))
        else:
            left = self._scan_child(node.left)
            right = self._scan_child(node.right)
            merged = list(left)
            for n in right:
                if n not in merged:
                    merged.append(n)
            entry = (node, tuple(merged))
        self._free[id(node)] = entry
        return entry

    def _scan_child(self, node: Formula) -> tuple:
        got = self._free.get(id(node))
        if got is None:
            got = self._scan(node)
        return got[1]

    def value(self, f, env: dict | None = None) -> Fraction:
        return self._ev(unwrap(f), env if env is not None else {})

    def _ev(self, node: Formula, env: dict) -> Fraction:
        if not self.free_of(node):
            got = self._closed.get(id(node))
            if got is None:
                got = (node, self._compute(node, env))
                self._closed[id(node)] = got
            return got[1]
        return self._compute(node, env)

    def _atom(self, node: Atom, env: dict) -> Fraction:
        model = self.model
        idx = 0
        size = model.size
        for t in node.args:
            if t.__class__ is Var:
                idx = idx * size + env[t.name]
            else:
                idx = idx * size + model.constant_element(t.name)
        return model.relations[node.relation][idx]

    def _compute(self, node: Formula, env: dict) -> Fraction:
        cls = node.__class__
        if cls is Atom:
            return self._atom(node, env)
        if cls is Implies:
            left = node.left
            a = self._atom(left, env) if left.__class__ is Atom else self._ev(left, env)
            if a.numerator == 0:
                return ONE
            right = node.right
            b = self._atom(right, env) if right.__class__ is Atom else self._ev(right, env)
            t = ONE - a + b
            return t if t < ONE else ONE
        if cls is Forall:
            shadowed = env.get(node.var, _MISSING)
            body = node.body
            inline_atom = body.__class__ is Atom
            best = ONE
            for a in range(self.model.size):
                env[node.var] = a
                v = self._atom(body, env) if inline_atom else self._ev(body, env)
                if v < best:
                    best = v
                    if best.numerator == 0:
                        break
            if shadowed is _MISSING:
                del env[node.var]
            else:
                env[node.var] = shadowed
            return best
        if cls is Exists:
            shadowed = env.get(node.var, _MISSING)
            body = node.body
            inline_atom = body.__class__ is Atom
            best = ZERO
            for a in range(self.model.size):
                env[node.var] = a
                v = self._atom(body, env) if inline_atom else self._ev(body, env)
                if v > best:
                    best = v
                    if best == ONE:
                        break
            if shadowed is _MISSING:
                del env[node.var]
            else:
                env[node.var] = shadowed
            return best
        if cls is Not:
            operand = node.operand
            a = self._atom(operand, env) if operand.__class__ is Atom else self._ev(operand, env)
            return ONE - a
        if cls is And:
            left = node.left
            a = self._atom(left, env) if left.__class__ is Atom else self._ev(left, env)
            if a.numerator == 0:
                return ZERO
            right = node.right
            b = self._atom(right, env) if right.__class__ is Atom else self._ev(right, env)
            return a if a <= b else b
        if cls is Or:
            a = self._ev(node.left, env)
            if a == ONE:
                return ONE
            b = self._ev(node.right, env)
            return a if a >= b else b
        if cls is StrictAnd:
            a = self._ev(node.left, env)
            if a.numerator == 0:
                return ZERO
            t = a + self._ev(node.right, env) - ONE
            return t if t > ZERO else ZERO
        if cls is StrictOr:
            a = self._ev(node.left, env)
            if a == ONE:
                return ONE
            t = a + self._ev(node.right, env)
            return t if t < ONE else ONE
        if cls is Truth:
            return ONE
        if cls is Falsity:
            return ZERO
        raise TypeError(f"not a formula: {node!r}")

    def closure_noncrispness(self, f: Formula) -> Fraction:
        """Min over instances of min(v, 1-v): the universal closure of
        f /\\ ~f without building the closure formula."""
        names = self.free_of(f)
        if not names:
            v = self._ev(f, {})
            return min(v, ONE - v)
        env: dict = {}
        best = ONE
        size = self.model.size
        total = size ** len(names)
        for flat in range(total):
            rest = flat
            for name in names:
                rest, e = divmod(rest, size)
                env[name] = e
            v = self._ev(f, env)
            o = min(v, ONE - v)
            if o < best:
                best = o
                if best.numerator == 0:
                    break
        return best


def epsilon_value(model: FuzzyModel, formulas: Sequence[Formula],
                  evaluator: CachedEvaluator | None = None) -> Fraction:
    """Max over the given subformulas of the closure of f /\\ ~f.

    This is the model's distance from crispness as seen through the given
    subformula family (the caller excludes the designated fuzzy relations).
    """
    ev = evaluator if evaluator is not None else CachedEvaluator(model)
    best = ZERO
    for f in formulas:
        v = ev.closure_noncrispness(unwrap(f))
        if v > best:
            best = v
            if best == ONE:
                break
    return best


def epsilon_subformulas(formulas: Sequence[Formula], exclude_heads: Iterable[str]) -> tuple:
    """Deduplicated subformulas of the given formulas, skipping atoms whose
    relation is excluded (the designated fuzzy relations)."""
    exclude = set(exclude_heads)
    out: dict = {}
    for f in formulas:
        for sub in subformulas(unwrap(f)):
            if isinstance(sub, Atom) and sub.relation in exclude:
                continue
            out.setdefault(sub, None)
    return tuple(out)


@dataclass(frozen=True)
class RoundingDifference:
    subformula: str
    instance: tuple
    before: Fraction
    after: Fraction

    @property
    def gap(self) -> Fraction:
        return abs(self.before - self.after)


@dataclass(frozen=True)
class RoundingReport:
    threshold: Fraction
    epsilon: Fraction
    checked: int
    worst: RoundingDifference | None
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def check_rounding_claim(model: FuzzyModel, f, keep: Iterable[str],
                         threshold: Fraction = Fraction(1, 10)) -> RoundingReport:
    """Verify that rounding the non-kept relations moves no tracked
    subformula instance by threshold or more.

    Tracked: every subformula of f not headed by a kept relation, under
    every substitution of domain elements for its free variables. Requires
    the non-crispness measure of the tracked family to be below the
    threshold (the setting where rounding is meaningful).
    """
    keep = set(keep)
    tracked = epsilon_subformulas([unwrap(f)], keep)
    eps = epsilon_value(model, tracked)
    if eps >= threshold:
        raise ModelError(f"non-crispness {eps} is not below {threshold}")
    if all(v in (ZERO, ONE) for name in model.relations if name not in keep
           for v in model.relations[name]):
        # already crisp: rounding is the identity
        return RoundingReport(threshold, eps, 0, None, ())

    rounded = crisp_round(model, keep)
    checked = 0
    worst: RoundingDifference | None = None
    violations: list = []
    for sub in tracked:
        names = free_vars(sub)
        text = print_formula(sub)
        env: dict = {}
        for combo in model.tuples(len(names)):
            env = dict(zip(names, combo))
            before = _eval(sub, model, env)
            after = _eval(sub, rounded, env)
            checked += 1
            diff = RoundingDifference(text, combo, before, after)
            if worst is None or diff.gap > worst.gap:
                worst = diff
            if diff.gap >= threshold:
                violations.append(diff)
    return RoundingReport(threshold, eps, checked, worst, tuple(violations))


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------


def parse_model(text: str) -> FuzzyModel:
    """Line format: ``domain N``, then ``const name = i`` and ``rel Name/k``
    followed by one ``i1 ... ik = p/q`` line per tuple. Exact rationals only."""
    size = None
    constants: dict = {}
    relations: dict = {}
    arities: dict = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "domain":
                size = int(parts[1])
                current = None
            elif parts[0] == "const":
                if parts[2] != "=":
                    raise ValueError("expected 'const name = element'")
                constants[parts[1]] = int(parts[3])
                current = None
            elif parts[0] == "rel":
                name, arity = parts[1].split("/")
                current = name
                arities[name] = int(arity)
                relations[name] = {}
            elif "=" in parts:
                if current is None or size is None:
                    raise ValueError("tuple line outside a rel block")
                at = parts.index("=")
                elements = tuple(int(p) for p in parts[:at])
                if len(elements) != arities[current]:
                    raise ValueError(f"expected {arities[current]} elements")
                value = parts[at + 1]
                if "." in value:
                    raise ValueError("decimal values are not accepted; use p/q")
                relations[current][elements] = as_truth_value(Fraction(value))
            else:
                raise ValueError(f"cannot parse line {line!r}")
        except (IndexError, ValueError) as exc:
            raise ModelError(f"model file line {lineno}: {exc}") from None
    if size is None:
        raise ModelError("model file has no 'domain N' header")
    tables = {}
    for name, entries in relations.items():
        arity = arities[name]
        table = []
        for idx in range(size**arity):
            digits = []
            for _ in range(arity):
                idx2, r = divmod(idx, size)
                digits.append(r)
                idx = idx2
            key = tuple(reversed(digits))
            if key not in entries:
                raise ModelError(f"relation {name} is missing tuple {key}")
            table.append(entries[key])
        tables[name] = tuple(table)
    sig = Signature(dict(arities), frozenset(constants))
    return FuzzyModel(sig, size, constants, tables)


def serialize_model(model: FuzzyModel) -> str:
    lines = [f"domain {model.size}"]
    for name in sorted(model.constants):
        lines.append(f"const {name} = {model.constants[name]}")
    for name in sorted(model.signature.relations):
        arity = model.signature.relations[name]
        lines.append(f"rel {name}/{arity}")
        for combo in model.tuples(arity):
            prefix = " ".join(str(e) for e in combo)
            value = model.value(name, combo)
            lines.append(f"{prefix} = {value}".strip())
    return "\n".join(lines) + "\n"
