"""The MV-algebra on [0,1] over exact rationals.

Truth values are ``fractions.Fraction`` instances in [0,1]. All operations
are exact; equality-with-1 tests make floating point unsound here.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)


class TruthValueError(ValueError):
    pass


def as_truth_value(x) -> Fraction:
    """Coerce to an exact rational in [0,1]; rejects floats."""
    if isinstance(x, float):
        raise TruthValueError("floating point truth values are not allowed")
    v = Fraction(x)
    if not ZERO <= v <= ONE:
        raise TruthValueError(f"truth value {v} outside [0,1]")
    return v


def neg(r: Fraction) -> Fraction:
    return ONE - r


def join(r: Fraction, s: Fraction) -> Fraction:
    """Lattice disjunction, max."""
    return r if r >= s else s


def meet(r: Fraction, s: Fraction) -> Fraction:
    """Lattice conjunction, min."""
    return r if r <= s else s


def strict_or(r: Fraction, s: Fraction) -> Fraction:
    """Truncated addition min(1, r+s)."""
    t = r + s
    return t if t < ONE else ONE


def strict_and(r: Fraction, s: Fraction) -> Fraction:
    """Dual of truncated addition: 1 - ((1-r) + (1-s)) truncated, i.e. max(0, r+s-1)."""
    t = r + s - ONE
    return t if t > ZERO else ZERO


def implies(r: Fraction, s: Fraction) -> Fraction:
    """r -> s = (1-r) + s truncated; equals 1 exactly when r <= s."""
    t = ONE - r + s
    return t if t < ONE else ONE


def iff_value(r: Fraction, s: Fraction) -> Fraction:
    """Derived biconditional min(r->s, s->r) = 1 - |r-s|."""
    return ONE - abs(r - s)


_CONNECTIVES = {
    "not": (1, neg),
    "and": (2, meet),
    "or": (2, join),
    "strict_and": (2, strict_and),
    "strict_or": (2, strict_or),
    "implies": (2, implies),
    "iff": (2, iff_value),
}


def apply_connective(conn: str, args: Sequence[Fraction]) -> Fraction:
    """Apply a connective by tag name; raises on arity mismatch."""
    try:
        arity, fn = _CONNECTIVES[conn]
    except KeyError:
        raise TruthValueError(f"unknown connective {conn!r}") from None
    if len(args) != arity:
        raise TruthValueError(f"{conn} expects {arity} arguments, got {len(args)}")
    return fn(*args)


def format_value(v: Fraction) -> str:
    """Lowest-terms p/q rendering; integers print without a denominator."""
    return str(v)


def parse_value(text: str) -> Fraction:
    """Parse 'p/q' or an integer into an exact truth value."""
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise TruthValueError(f"bad rational {text!r}: {exc}") from None
    if isinstance(v, Fraction) and text.strip().count(".") > 0:
        raise TruthValueError("decimal notation is not accepted; use p/q")
    return as_truth_value(v)
