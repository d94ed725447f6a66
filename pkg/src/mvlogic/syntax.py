"""Signatures, terms and formula ASTs, with a text grammar, parser and printer.

The grammar (pure ASCII; common UTF-8 glyphs are accepted as aliases):

    ~ f              negation
    f & g            strict conjunction
    f |+| g          strict disjunction
    f /\\ g           lattice conjunction (min)
    f \\/ g           lattice disjunction (max)
    f -> g           implication (right associative)
    f <-> g          biconditional, expanded at parse time to (f->g)/\\(g->f)
    forall x. f      universal quantifier, scope extends maximally right
    exists x. f      existential quantifier
    Name(t1,...,tk)  atom; bare Name for 0-ary atoms; true / false constants

Precedence, tightest first: ~  >  {&, |+|}  >  {/\\, \\/}  >  ->  >  <->.
Binary operators in the same group associate to the left, except -> which
is right associative.

Names bound by an enclosing quantifier are variables; otherwise declared
constants (and decimal numerals, which always denote model elements) are
constants, and any remaining name is a free variable. The innermost
quantifier wins when names are shadowed.

ASTs are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence


class SyntaxErrorAt(ValueError):
    """Parse failure with a character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"syntax error at position {position}: {message}")
        self.position = position


class SignatureError(ValueError):
    """Unknown symbol or arity mismatch against a signature."""


# ---------------------------------------------------------------------------
# Signatures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    """Relation symbols with arities, constant names, optional function symbols.

    Function symbols exist only to support Skolemized matrices and their
    certificates; the core language does not use them.
    """

    relations: Mapping[str, int] = field(default_factory=dict)
    constants: frozenset = field(default_factory=frozenset)
    functions: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "constants", frozenset(self.constants))
        names = list(self.relations) + list(self.constants) + list(self.functions)
        if len(names) != len(set(names)):
            raise SignatureError("names must be unique across relations, constants and functions")
        for name, arity in self.relations.items():
            if arity < 0:
                raise SignatureError(f"relation {name} has negative arity")
        for name, arity in self.functions.items():
            if arity < 1:
                raise SignatureError(f"function {name} must have arity >= 1")

    def with_functions(self, functions: Mapping[str, int]) -> "Signature":
        merged = dict(self.functions)
        merged.update(functions)
        return Signature(self.relations, self.constants, merged)

    def is_constant(self, name: str) -> bool:
        return name in self.constants or name.isdigit()


# ---------------------------------------------------------------------------
# Terms and formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    name: str


@dataclass(frozen=True)
class Func(Term):
    """Function application; only produced by the Skolemization pipeline."""

    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    relation: str
    args: tuple = ()


@dataclass(frozen=True)
class Truth(Formula):
    pass


@dataclass(frozen=True)
class Falsity(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class StrictAnd(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class StrictOr(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


BINARY_NODES = (Implies, And, Or, StrictAnd, StrictOr)
QUANTIFIER_NODES = (Forall, Exists)


def iff(left: Formula, right: Formula) -> Formula:
    """The derived biconditional (left->right) /\\ (right->left)."""
    return And(Implies(left, right), Implies(right, left))


def iterated_strict_or(f: Formula, n: int) -> Formula:
    """n-fold strict disjunction f |+| f |+| ... (left fold), n >= 1."""
    if n < 1:
        raise ValueError("need at least one disjunct")
    out = f
    for _ in range(n - 1):
        out = StrictOr(out, f)
    return out


def fold_and(formulas: Sequence[Formula]) -> Formula:
    """Balanced lattice conjunction; balanced to keep tree depth logarithmic."""
    return _fold(formulas, And)


def fold_or(formulas: Sequence[Formula]) -> Formula:
    """Balanced lattice disjunction."""
    return _fold(formulas, Or)


def _fold(formulas: Sequence[Formula], node) -> Formula:
    if not formulas:
        raise ValueError("cannot fold an empty list")
    if len(formulas) == 1:
        return formulas[0]
    mid = len(formulas) // 2
    return node(_fold(formulas[:mid], node), _fold(formulas[mid:], node))


# ---------------------------------------------------------------------------
# Structural queries
# ---------------------------------------------------------------------------


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, Func):
        for a in t.args:
            yield from term_vars(a)


def free_vars(f: Formula) -> tuple:
    """Free variable names in first-occurrence order."""
    seen: dict = {}
    _free_vars(f, frozenset(), seen)
    return tuple(seen)


def _free_vars(f: Formula, bound: frozenset, seen: dict) -> None:
    if isinstance(f, Atom):
        for t in f.args:
            for name in term_vars(t):
                if name not in bound and name not in seen:
                    seen[name] = None
    elif isinstance(f, Not):
        _free_vars(f.operand, bound, seen)
    elif isinstance(f, BINARY_NODES):
        _free_vars(f.left, bound, seen)
        _free_vars(f.right, bound, seen)
    elif isinstance(f, QUANTIFIER_NODES):
        _free_vars(f.body, bound | {f.var}, seen)


def is_closed(f: Formula) -> bool:
    return not free_vars(f)


def subformulas(f: Formula) -> tuple:
    """All subtrees of f, structurally deduplicated, post-order left-to-right."""
    out: dict = {}
    _subformulas(f, out)
    return tuple(out)


def _subformulas(f: Formula, out: dict) -> None:
    if f in out:
        return
    if isinstance(f, Not):
        _subformulas(f.operand, out)
    elif isinstance(f, BINARY_NODES):
        _subformulas(f.left, out)
        _subformulas(f.right, out)
    elif isinstance(f, QUANTIFIER_NODES):
        _subformulas(f.body, out)
    out[f] = None


def substitute(f: Formula, mapping: Mapping[str, Term]) -> Formula:
    """Replace free variables by terms; quantifiers shadow as expected."""
    if isinstance(f, Atom):
        return Atom(f.relation, tuple(_subst_term(t, mapping) for t in f.args))
    if isinstance(f, (Truth, Falsity)):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.operand, mapping))
    if isinstance(f, BINARY_NODES):
        return type(f)(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, QUANTIFIER_NODES):
        inner = {k: v for k, v in mapping.items() if k != f.var}
        if not inner:
            return f
        return type(f)(f.var, substitute(f.body, inner))
    raise TypeError(f"not a formula: {f!r}")


def _subst_term(t: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(t, Var) and t.name in mapping:
        return mapping[t.name]
    if isinstance(t, Func):
        return Func(t.name, tuple(_subst_term(a, mapping) for a in t.args))
    return t


@dataclass(frozen=True)
class ClosedFormula:
    """A formula with no free variables, optionally tagged with its signature."""

    formula: Formula
    signature: Signature | None = None

    def __post_init__(self):
        fv = free_vars(self.formula)
        if fv:
            raise ValueError(f"formula is not closed; free variables {fv}")


def unwrap(f) -> Formula:
    return f.formula if isinstance(f, ClosedFormula) else f


def universal_closure(f: Formula, signature: Signature | None = None) -> ClosedFormula:
    """Prefix a universal quantifier for each free variable, first occurrence first."""
    g = unwrap(f)
    for name in reversed(free_vars(g)):
        g = Forall(name, g)
    return ClosedFormula(g, signature)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_GLYPHS = [
    ("¬", " ~ "),      # negation sign
    ("→", " -> "),
    ("↔", " <-> "),
    ("∧", " /\\ "),
    ("∨", " \\/ "),
    ("⊕", " |+| "),
    ("∀", " forall "),
    ("∃", " exists "),
]

_PUNCT = ("<->", "->", "|+|", "/\\", "\\/", "~", "&", "(", ")", ",", ".")


def _tokenize(text: str) -> list:
    for glyph, ascii_form in _GLYPHS:
        text = text.replace(glyph, ascii_form)
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        for punct in _PUNCT:
            if text.startswith(punct, i):
                tokens.append((punct, i))
                i += len(punct)
                break
        else:
            if ch.isalnum() or ch == "_":
                j = i
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
                tokens.append((text[i:j], i))
                i = j
            else:
                raise SyntaxErrorAt(f"unexpected character {ch!r}", i)
    tokens.append(("<end>", n))
    return tokens


_KEYWORDS = {"forall", "exists", "true", "false"}


class _Parser:
    def __init__(self, text: str, signature: Signature, collect: bool = False):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.sig = signature
        self.collect = collect
        self.seen_relations: dict = dict(signature.relations)

    def peek(self):
        return self.tokens[self.pos][0]

    def here(self):
        return self.tokens[self.pos][1]

    def take(self, expected=None):
        tok, at = self.tokens[self.pos]
        if expected is not None and tok != expected:
            raise SyntaxErrorAt(f"expected {expected!r}, found {tok!r}", at)
        self.pos += 1
        return tok

    def parse(self) -> Formula:
        f = self.formula(frozenset())
        if self.peek() != "<end>":
            raise SyntaxErrorAt(f"unexpected trailing input {self.peek()!r}", self.here())
        return f

    def formula(self, bound):
        return self.iff_level(bound)

    def iff_level(self, bound):
        left = self.impl_level(bound)
        while self.peek() == "<->":
            self.take()
            right = self.impl_level(bound)
            left = iff(left, right)
        return left

    def impl_level(self, bound):
        left = self.lattice_level(bound)
        if self.peek() == "->":
            self.take()
            right = self.impl_level(bound)  # right associative
            return Implies(left, right)
        return left

    def lattice_level(self, bound):
        left = self.strict_level(bound)
        while self.peek() in ("/\\", "\\/"):
            op = self.take()
            right = self.strict_level(bound)
            left = And(left, right) if op == "/\\" else Or(left, right)
        return left

    def strict_level(self, bound):
        left = self.unary_level(bound)
        while self.peek() in ("&", "|+|"):
            op = self.take()
            right = self.unary_level(bound)
            left = StrictAnd(left, right) if op == "&" else StrictOr(left, right)
        return left

    def unary_level(self, bound):
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary_level(bound))
        if tok in ("forall", "exists"):
            at = self.here()
            self.take()
            var = self.take()
            if not _is_name(var) or var in _KEYWORDS:
                raise SyntaxErrorAt(f"bad quantified variable {var!r}", at)
            self.take(".")
            body = self.formula(bound | {var})  # scope extends maximally right
            return Forall(var, body) if tok == "forall" else Exists(var, body)
        return self.atom_level(bound)

    def atom_level(self, bound):
        tok, at = self.tokens[self.pos]
        if tok == "(":
            self.take()
            f = self.formula(bound)
            self.take(")")
            return f
        if tok == "true":
            self.take()
            return Truth()
        if tok == "false":
            self.take()
            return Falsity()
        if not _is_name(tok):
            raise SyntaxErrorAt(f"expected a formula, found {tok!r}", at)
        self.take()
        if self.peek() == "(":
            self.take()
            args = [self.term(bound)]
            while self.peek() == ",":
                self.take()
                args.append(self.term(bound))
            self.take(")")
            return self._atom(tok, tuple(args), at)
        return self._atom(tok, (), at)

    def term(self, bound) -> Term:
        tok, at = self.tokens[self.pos]
        if not _is_name(tok) or tok in _KEYWORDS:
            raise SyntaxErrorAt(f"expected a term, found {tok!r}", at)
        self.take()
        if self.peek() == "(" and tok in self.sig.functions:
            self.take()
            args = [self.term(bound)]
            while self.peek() == ",":
                self.take()
                args.append(self.term(bound))
            self.take(")")
            if len(args) != self.sig.functions[tok]:
                raise SignatureError(
                    f"function {tok} expects {self.sig.functions[tok]} arguments, got {len(args)}"
                )
            return Func(tok, tuple(args))
        if tok in bound:
            return Var(tok)  # innermost binding wins
        if self.sig.is_constant(tok):
            return Const(tok)
        if self.collect:
            return Const(tok)  # unbound argument names read as constants
        return Var(tok)

    def _atom(self, name, args, at):
        if name not in self.seen_relations:
            if not self.collect:
                raise SignatureError(f"unknown relation {name!r} (position {at})")
            self.seen_relations[name] = len(args)
        declared = self.seen_relations[name]
        if declared != len(args):
            raise SignatureError(
                f"relation {name} has arity {declared}, got {len(args)} arguments"
            )
        return Atom(name, args)


def _is_name(tok: str) -> bool:
    return tok[0].isalpha() or tok[0] == "_" if tok else False


def parse(text: str, signature: Signature) -> Formula:
    """Parse formula text against a signature; parse(print_formula(f)) == f."""
    return _Parser(text, signature).parse()


def parse_inferring(text: str) -> tuple:
    """Parse while inferring the signature from use.

    Names applied to k arguments become k-ary relations, bare names in
    formula position 0-ary relations, numerals constants. Convenience for
    the command line; library code should declare signatures. Returns
    (formula, signature).
    """
    parser = _Parser(text, Signature(), collect=True)
    f = parser.parse()
    return f, Signature(parser.seen_relations, frozenset())


def infer_signature(text: str) -> Signature:
    return parse_inferring(text)[1]


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_LEVEL_IMPL = 1
_LEVEL_LATTICE = 2
_LEVEL_STRICT = 3
_LEVEL_UNARY = 4


def print_term(t: Term) -> str:
    if isinstance(t, (Var, Const)):
        return t.name
    if isinstance(t, Func):
        return f"{t.name}({','.join(print_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


def print_formula(f: Formula) -> str:
    """Render with minimal parentheses; output re-parses to an equal AST."""
    return _print(unwrap(f), 0)


def _print(f: Formula, level: int) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.relation
        return f"{f.relation}({','.join(print_term(t) for t in f.args)})"
    if isinstance(f, Truth):
        return "true"
    if isinstance(f, Falsity):
        return "false"
    if isinstance(f, Not):
        return _wrap(f"~{_print(f.operand, _LEVEL_UNARY)}", _LEVEL_UNARY, level)
    if isinstance(f, Implies):
        s = f"{_print(f.left, _LEVEL_IMPL + 1)} -> {_print(f.right, _LEVEL_IMPL)}"
        return _wrap(s, _LEVEL_IMPL, level)
    if isinstance(f, (And, Or)):
        op = "/\\" if isinstance(f, And) else "\\/"
        s = f"{_print(f.left, _LEVEL_LATTICE)} {op} {_print(f.right, _LEVEL_LATTICE + 1)}"
        return _wrap(s, _LEVEL_LATTICE, level)
    if isinstance(f, (StrictAnd, StrictOr)):
        op = "&" if isinstance(f, StrictAnd) else "|+|"
        s = f"{_print(f.left, _LEVEL_STRICT)} {op} {_print(f.right, _LEVEL_STRICT + 1)}"
        return _wrap(s, _LEVEL_STRICT, level)
    if isinstance(f, QUANTIFIER_NODES):
        kw = "forall" if isinstance(f, Forall) else "exists"
        s = f"{kw} {f.var}. {_print(f.body, 0)}"
        return s if level == 0 else f"({s})"
    raise TypeError(f"not a formula: {f!r}")


def _wrap(s: str, produced: int, required: int) -> str:
    return s if produced >= required else f"({s})"
