"""Unimodular completion of primitive integer vectors."""


def unimodular_completion(v):
    """Integer basis ``[v, c_1, ..., c_{n-1}]`` of Z^n with determinant +-1.

    Runs the Euclidean algorithm on the coordinates of ``v`` while applying
    the inverse column operations to an identity basis, so ``v`` stays equal
    to ``basis . w`` throughout. When ``w`` collapses to a signed unit vector,
    the matching basis column is ``+-v``.
    """
    v = [int(x) for x in v]
    n = len(v)
    if n < 1 or all(x == 0 for x in v):
        raise ValueError("cannot complete the zero vector")
    cols = [[int(i == j) for i in range(n)] for j in range(n)]
    w = list(v)
    while sum(1 for x in w if x != 0) > 1:
        nz = [i for i in range(n) if w[i] != 0]
        j = min(nz, key=lambda i: abs(w[i]))
        for i in nz:
            if i == j:
                continue
            q = w[i] // w[j]
            # w_i -= q w_j  <=>  col_j += q col_i
            w[i] -= q * w[j]
            cols[j] = [a + q * b for a, b in zip(cols[j], cols[i])]
    j = next(i for i in range(n) if w[i] != 0)
    if abs(w[j]) != 1:
        raise ValueError(f"vector {tuple(v)} is not primitive")
    if w[j] == -1:
        cols[j] = [-a for a in cols[j]]
    assert cols[j] == v
    rest = [tuple(cols[i]) for i in range(n) if i != j]
    return tuple(v), rest
