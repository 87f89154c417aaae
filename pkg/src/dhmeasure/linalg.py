"""Small exact linear algebra over the rationals.

Matrices are lists of rows of Fractions. Sizes here never exceed 5x5, so plain
Gaussian elimination is the right tool.
"""

from fractions import Fraction
from math import gcd, lcm


def dot(a, b):
    # integer accumulation with a single normalization; ints and Fractions both
    # expose numerator/denominator
    num, den = 0, 1
    for x, y in zip(a, b):
        pn, pd = x.numerator * y.numerator, x.denominator * y.denominator
        if pd == den:
            num += pn
        else:
            num, den = num * pd + pn * den, den * pd
    return Fraction(num, den)


def sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def scale(c, a):
    return tuple(c * x for x in a)


def rref(rows):
    """Reduced row echelon form. Returns (matrix, pivot columns)."""
    m = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def integer_row(row):
    """Positive multiple of a rational row with integer entries."""
    den = lcm(*(Fraction(x).denominator for x in row))
    return [int(x * den) for x in row]


def rank(rows) -> int:
    """Rank by fraction-free integer elimination."""
    m = [integer_row(row) for row in rows if any(x != 0 for x in row)]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        p = m[r][c]
        for i in range(r + 1, len(m)):
            f = m[i][c]
            if f:
                row = [p * x - f * y for x, y in zip(m[i], m[r])]
                g = gcd(*row)
                m[i] = [x // g for x in row] if g > 1 else row
        r += 1
        if r == len(m):
            break
    return r


def nullspace(rows, ncols=None):
    """Basis of {x : rows . x = 0}."""
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    ncols = len(rows[0])
    m, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for i, p in enumerate(pivots):
            x[p] = -m[i][f]
        basis.append(tuple(x))
    return basis


def solve(a_rows, b):
    """Solve ``A x = b``; returns (particular solution or None, nullspace basis)."""
    ncols = len(a_rows[0])
    aug = [list(row) + [bi] for row, bi in zip(a_rows, b)]
    m, pivots = rref(aug)
    if ncols in pivots:
        return None, []
    x = [Fraction(0)] * ncols
    for i, p in enumerate(pivots):
        x[p] = m[i][ncols]
    return tuple(x), nullspace([row for row in a_rows], ncols)


def integer_det(rows) -> int:
    """Determinant of a small integer matrix by cofactor expansion."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    return sum((-1) ** j * rows[0][j] * integer_det([r[:j] + r[j + 1:] for r in rows[1:]])
               for j in range(n) if rows[0][j])


def det(rows):
    m = [[Fraction(x) for x in row] for row in rows]
    n = len(m)
    result = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if m[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            result = -result
        p = m[c][c]
        result *= p
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / p
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return result


def inverse(rows):
    n = len(rows)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(rows)]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return [tuple(row[n:]) for row in m]


def transpose(rows):
    return [tuple(col) for col in zip(*rows)]
