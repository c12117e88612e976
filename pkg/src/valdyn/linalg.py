"""Small dense exact linear algebra over Fraction.

Matrices are tuples of tuples (immutable, hashable); sizes here are tiny
(one row per exceptional prime), so plain Gaussian elimination is fine.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = tuple[tuple[Fraction, ...], ...]
Vector = tuple[Fraction, ...]


def mat(rows) -> Matrix:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(
        tuple(Fraction(1 if i == j else 0) for j in range(n)) for i in range(n)
    )


def mat_vec(m: Matrix, v: Vector) -> Vector:
    return tuple(sum(m[i][j] * v[j] for j in range(len(v))) for i in range(len(m)))


def dot(u: Vector, v: Vector) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def bilinear(u: Vector, m: Matrix, v: Vector) -> Fraction:
    """u^T M v."""
    return dot(u, mat_vec(m, v))


def determinant(m: Matrix) -> Fraction:
    n = len(m)
    a = [list(row) for row in m]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            f = a[r][col] * inv
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    return det


def leading_principal_minors(m: Matrix) -> list[Fraction]:
    n = len(m)
    return [
        determinant(tuple(row[: k + 1] for row in m[: k + 1])) for k in range(n)
    ]


def solve(m: Matrix, rhs: Vector) -> Vector:
    """Solve M x = rhs; raises ValueError on a singular matrix."""
    n = len(m)
    a = [list(row) + [Fraction(rhs[i])] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(a[i][n] for i in range(n))


def inverse(m: Matrix) -> Matrix:
    n = len(m)
    cols = [
        solve(m, tuple(Fraction(1 if i == j else 0) for i in range(n)))
        for j in range(n)
    ]
    return tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))
