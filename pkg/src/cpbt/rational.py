"""Dense linear algebra over ``Fraction``.

Matrices are lists of lists of ``Fraction``. Sizes here never exceed a few
dozen, so plain Gaussian elimination is fine.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]
Vector = list[Fraction]


def _copy(M: Sequence[Sequence]) -> Matrix:
    return [[Fraction(v) for v in row] for row in M]


def rref(M: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot column indices."""
    R = _copy(M)
    nrows = len(R)
    ncols = len(R[0]) if nrows else 0
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row >= nrows:
            break
        piv = next((i for i in range(row, nrows) if R[i][col] != 0), None)
        if piv is None:
            continue
        R[row], R[piv] = R[piv], R[row]
        p = R[row][col]
        R[row] = [v / p for v in R[row]]
        for i in range(nrows):
            if i != row and R[i][col] != 0:
                f = R[i][col]
                R[i] = [vi - f * vr for vi, vr in zip(R[i], R[row])]
        pivots.append(col)
        row += 1
    return R, pivots


def rank(M: Sequence[Sequence]) -> int:
    if not M or not M[0]:
        return 0
    return len(rref(M)[1])


def solve(M: Sequence[Sequence], b: Sequence) -> Vector | None:
    """A solution of ``M x = b`` (free variables set to zero), or ``None``.

    Returns ``None`` when the system is inconsistent.
    """
    ncols = len(M[0])
    aug = [list(row) + [rhs] for row, rhs in zip(M, b)]
    R, pivots = rref(aug)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        x[col] = R[i][ncols]
    return x


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    Bt = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


def transpose(A: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*A)]


def pinv(M: Sequence[Sequence]) -> Matrix:
    """Moore-Penrose pseudo-inverse via a full-rank factorization ``M = F G``.

    ``M^+ = G^T (G G^T)^{-1} (F^T F)^{-1} F^T``.
    """
    R, pivots = rref(M)
    n_rows, n_cols = len(M), len(M[0])
    if not pivots:
        return [[Fraction(0)] * n_rows for _ in range(n_cols)]
    F = [[Fraction(M[i][j]) for j in pivots] for i in range(n_rows)]
    G = R[: len(pivots)]
    Ft, Gt = transpose(F), transpose(G)
    inv_ggt = inverse(matmul(G, Gt))
    inv_ftf = inverse(matmul(Ft, F))
    return matmul(matmul(Gt, inv_ggt), matmul(inv_ftf, Ft))


def inverse(M: Sequence[Sequence]) -> Matrix:
    n = len(M)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in R]


def quadratic_form(M: Sequence[Sequence], v: Sequence) -> Fraction:
    return sum(
        (Fraction(v[i]) * M[i][j] * v[j] for i in range(len(v)) for j in range(len(v))),
        Fraction(0),
    )


def pinv_form(M: Sequence[Sequence], z: Sequence) -> Fraction:
    """``z^T M^+ z`` for symmetric ``M``.

    When ``z`` lies in the range of ``M`` this equals ``z^T w`` for any
    solution of ``M w = z``; otherwise fall back to the explicit pseudo-inverse.
    """
    w = solve(M, z)
    if w is not None:
        return sum((Fraction(zi) * wi for zi, wi in zip(z, w)), Fraction(0))
    return quadratic_form(pinv(M), z)


def ldl_psd(M: Sequence[Sequence]) -> tuple[bool, Vector | None, Fraction]:
    """Decide positive semidefiniteness of a symmetric rational matrix.

    Symmetric elimination by congruence ``S = P M P^T``, pivoting in order.
    A negative pivot, or a zero pivot with a nonzero entry left in its row,
    proves ``M`` is not PSD. Returns ``(is_psd, v, vMv)`` where ``v`` is an
    exact certificate with ``v^T M v = vMv < 0`` when ``M`` is not PSD.
    """
    S = _copy(M)
    n = len(S)
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(n):
        pivot = S[k][k]
        if pivot < 0:
            return False, P[k], pivot
        if pivot == 0:
            j = next((j for j in range(k + 1, n) if S[k][j] != 0), None)
            if j is None:
                continue
            # (c e_k + e_j)^T S (c e_k + e_j) = 2 c S_kj + S_jj := -1
            c = -(1 + S[j][j]) / (2 * S[k][j])
            v = [c * pk + pj for pk, pj in zip(P[k], P[j])]
            return False, v, Fraction(-1)
        for j in range(k + 1, n):
            f = S[j][k] / pivot
            if f == 0:
                continue
            S[j] = [sj - f * sk for sj, sk in zip(S[j], S[k])]
            for i in range(n):
                S[i][j] -= f * S[i][k]
            P[j] = [pj - f * pk for pj, pk in zip(P[j], P[k])]
    return True, None, Fraction(0)
