"""Small exact linear algebra over the rationals.

Matrices are lists of row lists of Rat.  Vectors are rows and maps act on
the right (x -> x @ A), matching the module convention a(e_i) = sum_j
amat[i][j] e_j used everywhere else.
"""

from __future__ import annotations

from .rationals import ONE, ZERO, Rat, rat


def zeros(r: int, c: int):
    return [[ZERO] * c for _ in range(r)]


def identity(n: int):
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = ONE
    return out


def mat(rows):
    return [[rat(x) for x in row] for row in rows]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, s):
    s = rat(s)
    return [[s * x for x in row] for row in a]


def mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = zeros(rows, cols)
    for i in range(rows):
        ai = a[i]
        oi = out[i]
        for k in range(inner):
            aik = ai[k]
            if aik == 0:
                continue
            bk = b[k]
            for j in range(cols):
                if bk[j] != 0:
                    oi[j] += aik * bk[j]
    return out


def mat_pow(a, p: int):
    out = identity(len(a))
    base = [row[:] for row in a]
    while p:
        if p & 1:
            out = mat_mul(out, base)
        p >>= 1
        if p:
            base = mat_mul(base, base)
    return out


def transpose(a):
    return [list(col) for col in zip(*a)] if a else []


def row_mat_mul(x, a):
    """Row vector times matrix."""
    cols = len(a[0]) if a else 0
    out = [ZERO] * cols
    for i, xi in enumerate(x):
        if xi == 0:
            continue
        ai = a[i]
        for j in range(cols):
            if ai[j] != 0:
                out[j] += xi * ai[j]
    return out


def rref(m):
    """Reduced row echelon form; returns (R, pivot_columns)."""
    a = [row[:] for row in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    piv_cols = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if a[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = ONE / a[r][c]
        a[r] = [x * inv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv_cols.append(c)
        r += 1
        if r == rows:
            break
    return a, piv_cols


def rank(m) -> int:
    return len(rref(m)[1])


def left_nullspace(a):
    """Basis (rows) of {x : x @ a = 0}."""
    at = transpose(a)
    if not at:
        return identity(len(a))
    red, piv = rref(at)
    n = len(a)
    free = [j for j in range(n) if j not in piv]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for r, c in enumerate(piv):
            v[c] = -red[r][f]
        basis.append(v)
    return basis


def solve_left(a, b):
    """One x with x @ a = b, or None.  b is a row vector."""
    at = transpose(a)
    aug = [row[:] + [bv] for row, bv in zip(at, b)]
    red, piv = rref(aug)
    n = len(a)
    # inconsistent iff a pivot lands in the augmented column
    if n in piv:
        return None
    x = [ZERO] * n
    for r, c in enumerate(piv):
        x[c] = red[r][-1]
    return x


def inverse(a):
    n = len(a)
    aug = [row[:] + idr[:] for row, idr in zip(a, identity(n))]
    red, piv = rref(aug)
    if piv != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def charpoly(a):
    """Coefficients [c_0, ..., c_n] of det(xI - A), monic (c_n = 1).

    Faddeev-LeVerrier; fine for the small ranks used here.
    """
    n = len(a)
    coeffs = [ZERO] * (n + 1)
    coeffs[n] = ONE
    m = identity(n)
    for k in range(1, n + 1):
        am = mat_mul(a, m)
        tr = sum(am[i][i] for i in range(n))
        c = -tr / k
        coeffs[n - k] = c
        m = [row[:] for row in am]
        for i in range(n):
            m[i][i] += c
    return coeffs


def krylov_closure(vectors, a):
    """Row span of the smallest A-invariant subspace containing `vectors`."""
    basis, piv = rref([v[:] for v in vectors])
    basis = [row for row in basis if any(x != 0 for x in row)]
    queue = list(basis)
    while queue:
        v = queue.pop()
        w = row_mat_mul(v, a)
        cand, piv2 = rref(basis + [w])
        cand = [row for row in cand if any(x != 0 for x in row)]
        if len(cand) > len(basis):
            basis = cand
            queue.append(w)
    return basis
