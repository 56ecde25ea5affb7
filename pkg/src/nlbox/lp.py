"""Exact feasibility solver for equality systems with nonnegative variables.

Solves "does A w = b admit w >= 0?" over the rationals with a phase-1
simplex.  Bland's least-index rule is used for both the entering and the
leaving choice, so the solver terminates on every input and the answer is
deterministic.  At these sizes (tens of rows, around a hundred columns)
exactness and termination matter more than speed.

On success the basic feasible point is returned.  On failure the phase-1
duals give a Farkas certificate y with  y . A_j <= 0  for every column j
and  y . b > 0,  i.e. a linear functional separating b from the cone of
the columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rational import ONE, ZERO


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    # Nonnegative solution indexed like the columns (feasible case).
    solution: tuple | None
    # Farkas row functional indexed like the rows (infeasible case).
    certificate: tuple | None


def solve_nonneg_equalities(columns: list[list[Fraction]], rhs: list[Fraction]) -> FeasibilityResult:
    """Decide Aw = b, w >= 0 where ``columns[j]`` is the j-th column of A."""
    m = len(rhs)
    n = len(columns)
    for j, col in enumerate(columns):
        if len(col) != m:
            raise ValueError(f"column {j} has length {len(col)}, expected {m}")

    # Tableau rows: [A | I | b], with row signs flipped so b >= 0.
    rows: list[list[Fraction]] = []
    for i in range(m):
        sign = ONE if rhs[i] >= 0 else -ONE
        row = [sign * columns[j][i] for j in range(n)]
        row.extend(ONE if k == i else ZERO for k in range(m))
        row.append(sign * rhs[i])
        rows.append(row)

    total_cols = n + m
    basis = list(range(n, n + m))

    # Phase-1 objective: minimize the sum of artificials.  Reduced-cost row
    # starts as c - sum of basic rows, with c = (0...0, 1...1).
    reduced = [ZERO] * (total_cols + 1)
    for j in range(total_cols):
        colsum = ZERO
        for i in range(m):
            colsum += rows[i][j]
        reduced[j] = (ONE if j >= n else ZERO) - colsum

    while True:
        entering = -1
        for j in range(total_cols):
            if reduced[j] < 0:
                entering = j
                break
        if entering < 0:
            break

        leaving = -1
        best_ratio: Fraction | None = None
        for i in range(m):
            coeff = rows[i][entering]
            if coeff > 0:
                ratio = rows[i][-1] / coeff
                if best_ratio is None or ratio < best_ratio or (
                    ratio == best_ratio and basis[i] < basis[leaving]
                ):
                    best_ratio = ratio
                    leaving = i
        if leaving < 0:
            # The phase-1 objective is bounded below by 0, so an unbounded
            # direction cannot occur; guard against a broken tableau anyway.
            raise ArithmeticError("phase-1 simplex became unbounded; tableau is corrupt")

        pivot = rows[leaving][entering]
        rows[leaving] = [v / pivot for v in rows[leaving]]
        for i in range(m):
            if i != leaving and rows[i][entering] != 0:
                factor = rows[i][entering]
                rows[i] = [v - factor * w for v, w in zip(rows[i], rows[leaving])]
        if reduced[entering] != 0:
            factor = reduced[entering]
            pivot_row = rows[leaving]
            reduced = [v - factor * w for v, w in zip(reduced, pivot_row)]
        basis[leaving] = entering

    infeasibility = ZERO
    for i in range(m):
        if basis[i] >= n:
            infeasibility += rows[i][-1]

    if infeasibility == 0:
        solution = [ZERO] * n
        for i in range(m):
            if basis[i] < n:
                solution[basis[i]] = rows[i][-1]
        return FeasibilityResult(feasible=True, solution=tuple(solution), certificate=None)

    # Duals of the artificial columns: y_k = c_k - reduced_k = 1 - reduced_k,
    # then undo the row-sign flips applied when the tableau was built.
    certificate = []
    for k in range(m):
        y = ONE - reduced[n + k]
        if rhs[k] < 0:
            y = -y
        certificate.append(y)
    return FeasibilityResult(feasible=False, solution=None, certificate=tuple(certificate))
