"""Brute-force oracles and formula / assignment generators for checking.

The grid oracle evaluates a formula on every assignment whose coordinates
are rationals with bounded denominator. It can only refute (find a value
below 1); agreement checks therefore only compare refutations.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from math import gcd
from typing import Sequence

from mvlogic.algebra import ONE
from mvlogic.propositional import evaluate, variables
from mvlogic.syntax import And, Atom, Formula, Implies, Not, Or, StrictAnd, StrictOr

FULL_POOL = (Not, And, Or, StrictAnd, StrictOr, Implies)
CLASSICAL_POOL = (Not, And, Or)


def farey(max_denominator: int) -> tuple:
    """All rationals in [0,1] with denominator <= max_denominator, ascending."""
    vals = {Fraction(0), Fraction(1)}
    for q in range(1, max_denominator + 1):
        for p in range(1, q):
            if gcd(p, q) == 1:
                vals.add(Fraction(p, q))
    return tuple(sorted(vals))


def grid_min(f: Formula, max_denominator: int) -> tuple:
    """Minimum of f over the assignment grid, with an attaining assignment."""
    names = variables(f)
    values = farey(max_denominator)
    best, best_s = None, None
    for combo in itertools.product(values, repeat=len(names)):
        s = dict(zip(names, combo))
        v = evaluate(f, s)
        if best is None or v < best:
            best, best_s = v, s
    return best, best_s


def grid_refutes(f: Formula, max_denominator: int) -> dict | None:
    """First grid assignment with value < 1, or None; cheaper than grid_min."""
    names = variables(f)
    values = farey(max_denominator)
    for combo in itertools.product(values, repeat=len(names)):
        s = dict(zip(names, combo))
        if evaluate(f, s) < ONE:
            return s
    return None


def connective_count(f: Formula) -> int:
    if isinstance(f, Not):
        return 1 + connective_count(f.operand)
    if isinstance(f, (And, Or, StrictAnd, StrictOr, Implies)):
        return 1 + connective_count(f.left) + connective_count(f.right)
    return 0


def exhaustive_formulas(names: Sequence[str], max_connectives: int, pool=FULL_POOL) -> list:
    """Every formula over the given variables with at most the given number
    of connective nodes, enumerated deterministically."""
    atoms = [Atom(n) for n in names]
    by_size = {0: list(atoms)}
    unary = [c for c in pool if c is Not]
    binary = [c for c in pool if c is not Not]
    for size in range(1, max_connectives + 1):
        batch = []
        for c in unary:
            batch.extend(c(g) for g in by_size[size - 1])
        for c in binary:
            for left_size in range(size):
                for g in by_size[left_size]:
                    for h in by_size[size - 1 - left_size]:
                        batch.append(c(g, h))
        by_size[size] = batch
    out = []
    for size in range(max_connectives + 1):
        out.extend(by_size[size])
    return out


def random_formula(rng: random.Random, names: Sequence[str], connectives: int,
                   pool=FULL_POOL) -> Formula:
    """Uniform-ish random formula with exactly the given connective count."""
    if connectives == 0:
        return Atom(rng.choice(list(names)))
    c = rng.choice(list(pool))
    if c is Not:
        return Not(random_formula(rng, names, connectives - 1, pool))
    left = rng.randint(0, connectives - 1)
    return c(
        random_formula(rng, names, left, pool),
        random_formula(rng, names, connectives - 1 - left, pool),
    )


def random_assignment(rng: random.Random, names: Sequence[str],
                      max_denominator: int = 12) -> dict:
    out = {}
    for n in names:
        q = rng.randint(1, max_denominator)
        out[n] = Fraction(rng.randint(0, q), q)
    return out
