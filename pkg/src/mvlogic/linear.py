"""Exact linear programming over rationals.

A small two-phase dictionary simplex with Bland's rule, which guarantees
termination. Every number is a ``Fraction``; there is no rounding anywhere,
so optima and feasibility answers are exact. Problems here are tiny (a few
variables, tens of rows), which this implementation is sized for.

Conventions: variables satisfy x >= 0 implicitly; every other bound is an
explicit row ``a . x <= b``. ``ConstraintSystem`` bundles the rows produced
by case-splitting a formula's value function with the affine objective to
minimize, plus the 0 <= x <= 1 box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


# An affine expression over n variables: (coeffs tuple of length n, constant).
AffineExpr = tuple


def affine_const(n: int, c: Fraction) -> AffineExpr:
    return (tuple([ZERO] * n), Fraction(c))


def affine_var(n: int, i: int) -> AffineExpr:
    coeffs = [ZERO] * n
    coeffs[i] = ONE
    return (tuple(coeffs), ZERO)


def affine_add(a: AffineExpr, b: AffineExpr) -> AffineExpr:
    return (tuple(x + y for x, y in zip(a[0], b[0])), a[1] + b[1])


def affine_sub(a: AffineExpr, b: AffineExpr) -> AffineExpr:
    return (tuple(x - y for x, y in zip(a[0], b[0])), a[1] - b[1])


def affine_neg(a: AffineExpr) -> AffineExpr:
    return (tuple(-x for x in a[0]), -a[1])


def affine_eval(a: AffineExpr, point: Sequence[Fraction]) -> Fraction:
    return sum((c * v for c, v in zip(a[0], point)), a[1])


def leq_constraint(a: AffineExpr, b: AffineExpr) -> tuple:
    """The row for a <= b: (a-b).coeffs . x <= (b-a).const."""
    diff = affine_sub(a, b)
    return (diff[0], -diff[1])


@dataclass
class ConstraintSystem:
    """Conjunction of linear rows ``coeffs . x <= rhs`` over [0,1] variables,
    together with an affine objective to minimize."""

    nvars: int
    rows: list = field(default_factory=list)
    objective: AffineExpr | None = None

    def add(self, coeffs, rhs) -> None:
        self.rows.append((tuple(coeffs), Fraction(rhs)))

    def _rows_with_box(self) -> list:
        rows = list(self.rows)
        for i in range(self.nvars):
            coeffs = [ZERO] * self.nvars
            coeffs[i] = ONE
            rows.append((tuple(coeffs), ONE))  # x_i <= 1; x_i >= 0 is implicit
        return rows

    def is_feasible(self) -> bool:
        try:
            _simplex(self.nvars, self._rows_with_box(), tuple([ZERO] * self.nvars))
        except Infeasible:
            return False
        return True

    def minimize(self) -> tuple:
        """Exact minimum of the objective and one optimal point."""
        if self.objective is None:
            raise ValueError("no objective set")
        coeffs, const = self.objective
        value, point = _simplex(self.nvars, self._rows_with_box(), coeffs)
        return value + const, point

    def lexmin_optimal(self) -> tuple:
        """The lexicographically least optimal vertex (deterministic witness)."""
        value, _ = self.minimize()
        coeffs, const = self.objective
        rows = list(self.rows)
        rows.append((coeffs, value - const))  # pin objective at its minimum
        point = []
        for i in range(self.nvars):
            sub = ConstraintSystem(self.nvars, rows)
            unit = [ZERO] * self.nvars
            unit[i] = ONE
            sub.objective = (tuple(unit), ZERO)
            vi, _ = sub.minimize()
            point.append(vi)
            rows.append((tuple(unit), vi))  # x_i >= vi holds by minimality
        return value, point


def _simplex(n: int, rows: list, obj_coeffs: tuple) -> tuple:
    """Minimize obj_coeffs . x subject to rows and x >= 0.

    Returns (min value, point). Raises Infeasible or Unbounded.
    """
    m = len(rows)
    # Maximize c = -objective in dictionary form.
    basis = list(range(n, n + m))
    nonbasis = list(range(n))
    A = [list(row[0]) for row in rows]
    b = [row[1] for row in rows]
    c = [-x for x in obj_coeffs]
    z0 = ZERO

    def pivot(i: int, j: int) -> None:
        nonlocal z0
        a = A[i][j]
        entering, leaving = nonbasis[j], basis[i]
        row_i = A[i]
        inv = ONE / a
        b[i] = b[i] * inv
        new_row = [x * inv for x in row_i]
        new_row[j] = inv
        A[i] = new_row
        basis[i], nonbasis[j] = entering, leaving
        for r in range(m):
            if r == i:
                continue
            arj = A[r][j]
            if arj == 0:
                continue
            b[r] = b[r] - arj * b[i]
            row_r = A[r]
            for k in range(len(new_row)):
                row_r[k] = row_r[k] - arj * new_row[k]
            row_r[j] = -arj * inv
        cj = c[j]
        if cj != 0:
            z0 += cj * b[i]
            for k in range(len(c)):
                c[k] = c[k] - cj * new_row[k]
            c[j] = -cj * inv

    def bland_loop() -> None:
        while True:
            # entering: positive reduced cost, smallest variable index
            j_best, var_best = -1, None
            for j, var in enumerate(nonbasis):
                if c[j] > 0 and (var_best is None or var < var_best):
                    j_best, var_best = j, var
            if var_best is None:
                return
            # leaving: min ratio, ties by smallest basic variable index
            i_best, ratio_best = -1, None
            for i in range(m):
                aij = A[i][j_best]
                if aij > 0:
                    ratio = b[i] / aij
                    if (
                        ratio_best is None
                        or ratio < ratio_best
                        or (ratio == ratio_best and basis[i] < basis[i_best])
                    ):
                        i_best, ratio_best = i, ratio
            if i_best < 0:
                raise Unbounded("objective is unbounded")
            pivot(i_best, j_best)

    if any(x < 0 for x in b):
        # Phase 1: auxiliary variable with column -1 in every row.
        aux = n + m
        for row in A:
            row.append(-ONE)
        nonbasis.append(aux)
        saved_c, saved_z0 = c, z0
        c = [ZERO] * n + [-ONE]
        z0 = ZERO
        i0 = min(range(m), key=lambda i: (b[i], basis[i]))
        # special pivot to reach feasibility: enter aux at the most negative row
        a = A[i0][-1]
        entering, leaving = aux, basis[i0]
        inv = ONE / a
        b[i0] *= inv
        A[i0] = [x * inv for x in A[i0]]
        A[i0][-1] = inv
        basis[i0], nonbasis[-1] = entering, leaving
        for r in range(m):
            if r == i0:
                continue
            arj = A[r][-1]
            if arj == 0:
                continue
            b[r] -= arj * b[i0]
            for k in range(len(A[r])):
                A[r][k] -= arj * A[i0][k]
            A[r][-1] = -arj * inv
        cj = c[-1]
        z0 += cj * b[i0]
        for k in range(len(c)):
            c[k] -= cj * A[i0][k]
        c[-1] = -cj * inv

        bland_loop()
        if z0 != 0:
            raise Infeasible("constraint system has no solution")
        if aux in basis:
            i = basis.index(aux)
            j = next((k for k, x in enumerate(A[i]) if x != 0), None)
            if j is None:
                del basis[i], b[i], A[i]
                m -= 1
            else:
                pivot(i, j)
        j = nonbasis.index(aux)
        del nonbasis[j]
        for row in A:
            del row[j]
        # restore the real objective in terms of the current nonbasis
        c = [ZERO] * len(nonbasis)
        z0 = saved_z0
        for var, coeff in enumerate(saved_c):
            if coeff == 0:
                continue
            if var in nonbasis:
                c[nonbasis.index(var)] += coeff
            else:
                i = basis.index(var)
                z0 += coeff * b[i]
                for k in range(len(c)):
                    c[k] -= coeff * A[i][k]

    bland_loop()

    point = [ZERO] * n
    for i, var in enumerate(basis):
        if var < n:
            point[var] = b[i]
    return -z0, point
