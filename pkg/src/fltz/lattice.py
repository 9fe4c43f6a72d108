"""Integer lattices, Smith normal form, quotient maps and exact strict LPs.

Matrices are lists of rows of Python ints (or Fractions where noted).
Everything here is exact; floats never enter.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

Vector = tuple
Matrix = list


class LatticeError(ValueError):
    pass


class NotARay(LatticeError):
    """Raised for a zero vector where a ray generator is required."""


# ---------------------------------------------------------------------------
# small helpers


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(A: Matrix, ncols: int | None = None) -> Matrix:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def matmul(A: Matrix, B: Matrix) -> Matrix:
    Bt = transpose(B)
    return [[dot(row, col) for col in Bt] for row in A]


def matvec(A: Matrix, v: Sequence) -> tuple:
    return tuple(dot(row, v) for row in A)


def primitive(v: Sequence[int]) -> tuple[int, ...]:
    """Primitive lattice vector on the ray through ``v``."""
    v = tuple(int(x) for x in v)
    g = 0
    for x in v:
        g = gcd(g, x)
    if g == 0:
        raise NotARay(f"zero vector {v} does not span a ray")
    return tuple(x // g for x in v)


def content(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


# ---------------------------------------------------------------------------
# exact rational linear algebra


def row_reduce(A: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q and the pivot columns."""
    R = [[Fraction(x) for x in row] for row in A]
    pivots: list[int] = []
    if not R:
        return R, pivots
    m, n = len(R), len(R[0])
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if R[i][c] != 0), None)
        if p is None:
            continue
        R[r], R[p] = R[p], R[r]
        inv = 1 / R[r][c]
        R[r] = [x * inv for x in R[r]]
        for i in range(m):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [x - f * y for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return R, pivots


def rank(A: Matrix) -> int:
    return len(row_reduce(A)[1])


def solve_rational(A: Matrix, b: Sequence) -> Optional[tuple[Fraction, ...]]:
    """Some rational solution of ``A x = b`` (free variables set to 0), or None."""
    if not A:
        return None if any(b) else ()
    n = len(A[0])
    R, piv = row_reduce([list(row) + [bi] for row, bi in zip(A, b)])
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for i, c in enumerate(piv):
        x[c] = R[i][n]
    return tuple(x)


def rational_nullspace(A: Matrix, n: int) -> list[tuple[Fraction, ...]]:
    if not A:
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    R, piv = row_reduce(A)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(piv):
            v[c] = -R[i][f]
        basis.append(tuple(v))
    return basis


def inverse(A: Matrix) -> Matrix:
    n = len(A)
    R, piv = row_reduce([list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(A)])
    if piv[:n] != list(range(n)):
        raise LatticeError("singular matrix")
    return [row[n:] for row in R]


def det(A: Matrix) -> Fraction:
    n = len(A)
    if n == 0:
        return Fraction(1)
    M = [[Fraction(x) for x in row] for row in A]
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            d = -d
        d *= M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] / M[c][c]
            if f:
                M[i] = [x - f * y for x, y in zip(M[i], M[c])]
    return d


# ---------------------------------------------------------------------------
# Smith normal form


def smith_normal_form(A: Matrix) -> tuple[Matrix, Matrix, Matrix]:
    """Return ``(U, D, V)`` with ``U A V = D`` and U, V unimodular.

    D is diagonal with non-negative entries d_1 | d_2 | ... .
    """
    m = len(A)
    n = len(A[0]) if m else 0
    D = [[int(x) for x in row] for row in A]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (D, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):  # row dst += f * row src
        D[dst] = [x + f * y for x, y in zip(D[dst], D[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):  # col dst += f * col src
        for M in (D, V):
            for row in M:
                row[dst] += f * row[src]

    for t in range(min(m, n)):
        while True:
            nz = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            done = True
            for i in range(t + 1, m):
                q = D[i][t] // D[t][t]
                if q:
                    add_row(i, t, -q)
                if D[i][t]:
                    done = False
            for j in range(t + 1, n):
                q = D[t][j] // D[t][t]
                if q:
                    add_col(j, t, -q)
                if D[t][j]:
                    done = False
            if not done:
                continue
            # divisibility: push any offending entry into row t
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % D[t][t]), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if t < m and t < n and D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return U, D, V


def invariant_factors(A: Matrix) -> list[int]:
    _, D, _ = smith_normal_form(A)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0)) if D[i][i]]


def integer_kernel(A: Matrix, n: int) -> list[tuple[int, ...]]:
    """Saturated basis of ``{x in Z^n : A x = 0}``."""
    if not A:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    _, D, V = smith_normal_form(A)
    r = sum(1 for i in range(min(len(D), n)) if D[i][i])
    return [tuple(V[i][j] for i in range(n)) for j in range(r, n)]


def solve_integer(A: Matrix, b: Sequence[int], n: int) -> Optional[tuple[int, ...]]:
    """An integer solution of ``A x = b`` or None.  Free coordinates are zero."""
    if not A:
        return tuple([0] * n) if not any(b) else None
    U, D, V = smith_normal_form(A)
    c = matvec(U, b)
    y = [0] * n
    for i, ci in enumerate(c):
        d = D[i][i] if i < n else 0
        if d == 0:
            if ci != 0:
                return None
            continue
        if ci % d:
            return None
        y[i] = ci // d
    return matvec(V, y)


def is_unimodular_set(vectors: Sequence[Sequence[int]]) -> bool:
    """True when the vectors are part of a lattice basis."""
    if not vectors:
        return True
    f = invariant_factors([list(v) for v in vectors])
    return len(f) == len(vectors) and all(x == 1 for x in f)


# ---------------------------------------------------------------------------
# quotient lattices


@dataclass(frozen=True)
class QuotientMap:
    """Projection ``Z^n -> Z^n / L`` onto the free part.

    ``matrix`` is (n-r) x n, ``section`` is n x (n-r) with ``matrix @ section = I``.
    ``torsion`` lists invariant factors > 1 of L (empty when L is saturated).
    """

    ambient_rank: int
    matrix: tuple
    section: tuple
    torsion: tuple

    @property
    def rank(self) -> int:
        return len(self.matrix)

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        return matvec(self.matrix, v)

    def lift(self, w: Sequence[int]) -> tuple[int, ...]:
        return matvec(self.section, w)

    def dual(self, p: Sequence) -> tuple:
        """Dual coordinates of a covector vanishing on L: ``p_bar = S^T p``."""
        return tuple(dot(col, p) for col in zip(*self.section)) if self.section else ()


def quotient_lattice(n: int, sublattice_gens: Sequence[Sequence[int]]) -> QuotientMap:
    gens = [list(g) for g in sublattice_gens]
    if not gens:
        I = identity(n)
        return QuotientMap(n, tuple(map(tuple, I)), tuple(map(tuple, I)), ())
    U, D, _ = smith_normal_form(transpose(gens))
    diag = [D[i][i] for i in range(min(n, len(gens)))]
    r = sum(1 for d in diag if d)
    Uinv = inverse(U)
    P = tuple(tuple(U[i]) for i in range(r, n))
    S = tuple(tuple(int(Uinv[i][j]) for j in range(r, n)) for i in range(n))
    return QuotientMap(n, P, S, tuple(d for d in diag if d > 1))


# ---------------------------------------------------------------------------
# exact simplex


def _simplex(A: list[list[Fraction]], b: list[Fraction], c: list[Fraction]):
    """Maximise ``c x`` subject to ``A x = b, x >= 0`` with b >= 0.

    Two-phase tableau method with Bland's rule.  Returns ``(status, x, value)``
    where status is 'optimal', 'infeasible' or 'unbounded'.
    """
    m = len(A)
    n = len(c)
    # tableau columns: n originals, m artificials, rhs
    T = [list(A[i]) + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]

    def pivot(r, col):
        pv = T[r][col]
        T[r] = [x / pv if x else x for x in T[r]]
        nz = [j for j, y in enumerate(T[r]) if y]
        for i in range(len(T)):
            if i != r and T[i][col] != 0:
                f = T[i][col]
                row = T[i]
                for j in nz:
                    row[j] -= f * T[r][j]
        basis[r] = col

    def run(obj, allowed):
        # obj: reduced cost row (length n + m + 1), maximisation form  z - obj x = const
        while True:
            col = next((j for j in allowed if obj[j] < 0), None)
            if col is None:
                return 'optimal'
            best = None
            for i in range(m):
                if T[i][col] > 0:
                    ratio = T[i][-1] / T[i][col]
                    if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                        best = (ratio, i)
            if best is None:
                return 'unbounded'
            r = best[1]
            pivot(r, col)
            f = obj[col]
            for j, y in enumerate(T[r]):
                if y:
                    obj[j] -= f * y

    # phase 1: maximise -sum(artificials)
    # the objective row encodes z + sum(obj_j x_j) = obj[-1]
    obj = [Fraction(0)] * (n + m + 1)
    for i in range(m):
        obj = [x - y for x, y in zip(obj, T[i])]
    for i in range(m):
        obj[n + i] = Fraction(0)
    run(obj, range(n))
    if obj[-1] < 0:
        return 'infeasible', None, None
    # drive remaining artificials out of the basis
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if T[i][j] != 0), None)
            if col is not None:
                pivot(i, col)
    # phase 2
    obj = [-Fraction(x) for x in c] + [Fraction(0)] * (m + 1)
    for i in range(m):
        if basis[i] < n and obj[basis[i]] != 0:
            f = obj[basis[i]]
            obj = [x - f * y for x, y in zip(obj, T[i])]
    status = run(obj, range(n))
    if status == 'unbounded':
        return status, None, None
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][-1]
    return 'optimal', x, obj[-1]


def linprog_max(c: Sequence, A_ub: Sequence[Sequence], b_ub: Sequence,
                A_eq: Sequence[Sequence] = (), b_eq: Sequence = (), free: bool = True):
    """Maximise ``c x`` subject to ``A_ub x <= b_ub`` and ``A_eq x = b_eq``.

    Variables are free when ``free`` is set (split as x+ - x-), else x >= 0.
    Returns ``(status, x, value)`` with exact Fractions.
    """
    n = len(c)
    k = 2 * n if free else n

    def expand(row):
        row = [Fraction(v) for v in row]
        return row + [-v for v in row] if free else row

    rows, rhs = [], []
    n_ub = len(A_ub)
    for j, (row, bi) in enumerate(zip(A_ub, b_ub)):
        slack = [Fraction(int(i == j)) for i in range(n_ub)]
        rows.append(expand(row) + slack)
        rhs.append(Fraction(bi))
    for row, bi in zip(A_eq, b_eq):
        rows.append(expand(row) + [Fraction(0)] * n_ub)
        rhs.append(Fraction(bi))
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    cost = expand(c) + [Fraction(0)] * n_ub
    status, x, val = _simplex(rows, rhs, cost)
    if status != 'optimal':
        return status, None, None
    if free:
        x = [x[i] - x[n + i] for i in range(n)]
    else:
        x = x[:n]
    return status, tuple(x), val


@dataclass(frozen=True)
class LPResult:
    feasible: bool
    point: Optional[tuple[Fraction, ...]]
    slack: Fraction


def strict_lp_feasible(constraints: Sequence[tuple], dim: int,
                       slack_cap: Fraction = Fraction(1)) -> LPResult:
    """Decide whether ``lo < a.p < hi`` holds for all constraints at some p.

    Each constraint is ``(a, lo, hi)``; lo or hi may be None.  Solved exactly by
    maximising a common slack t (capped at ``slack_cap``) in
    ``lo + t <= a.p <= hi - t``.  Feasible iff the optimum is positive; the
    returned point attains the maximal slack.
    """
    A, b = [], []
    for a, lo, hi in constraints:
        a = [Fraction(x) for x in a]
        if len(a) != dim:
            raise LatticeError("constraint dimension mismatch")
        if lo is not None:
            A.append([-x for x in a] + [Fraction(1)])
            b.append(-Fraction(lo))
        if hi is not None:
            A.append(a + [Fraction(1)])
            b.append(Fraction(hi))
    # cap and lower-bound the slack: t <= cap, -t <= cap (keeps the LP bounded)
    A.append([Fraction(0)] * dim + [Fraction(1)])
    b.append(Fraction(slack_cap))
    A.append([Fraction(0)] * dim + [Fraction(-1)])
    b.append(Fraction(slack_cap))
    c = [Fraction(0)] * dim + [Fraction(1)]
    # the slack variable is free too, so all variables may be split
    status, x, val = linprog_max(c, A, b)
    if status != 'optimal':
        # only the slack is objective; unbounded cannot happen with the cap
        return LPResult(False, None, Fraction(0))
    t = x[-1]
    return LPResult(t > 0, tuple(x[:-1]), t)
