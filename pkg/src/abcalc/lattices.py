"""Submodule (lattice) arithmetic over the truncated series ring.

Vectors are lists of TruncSeries sharing one order; a lattice is the module
they generate modulo b^N.  The ring is local, so Gaussian elimination with
valuation pivots gives deterministic reduced generating sets: pivot columns
strictly increase, each pivot entry is exactly b^v, entries above a pivot
are reduced mod b^v, entries below are zero.

All row operations multiply by units or subtract ring multiples, so they
are exact mod b^N and never change the generated module.
"""

from __future__ import annotations

from .errors import NonUnit
from .rationals import rat
from .series import TruncSeries, series_invert


def vec_zero(k: int, order: int):
    return [TruncSeries.zero(order) for _ in range(k)]


def vec_unit(k: int, i: int, order: int):
    v = vec_zero(k, order)
    v[i] = TruncSeries.one(order)
    return v


def vec_add(x, y):
    return [a + b for a, b in zip(x, y)]


def vec_sub(x, y):
    return [a - b for a, b in zip(x, y)]


def vec_scale(x, s: TruncSeries):
    return [s * a for a in x]


def vec_scale_rat(x, c):
    c = rat(c)
    return [a.scale(c) for a in x]


def vec_shift_up(x, m: int):
    return [a.shift_up(m) for a in x]


def vec_is_zero(x) -> bool:
    return all(a.is_zero() for a in x)


def vec_truncate(x, order: int):
    return [a.truncate(order) for a in x]


def vec_from_consts(row, order: int):
    return [TruncSeries.const(c, order) for c in row]


def _tail_down(s: TruncSeries, v: int) -> TruncSeries:
    """Coefficients of b^v and above, shifted down by v (low part ignored)."""
    return TruncSeries(s.order, s.coeffs[v:])


def smat_mul(a, b):
    """Product of series matrices (lists of rows)."""
    cols = len(b[0])
    out = []
    for row in a:
        acc = [TruncSeries.zero(row[0].order) for _ in range(cols)]
        for i, s in enumerate(row):
            if s.is_zero():
                continue
            bi = b[i]
            for j in range(cols):
                if not bi[j].is_zero():
                    acc[j] = acc[j] + s * bi[j]
        out.append(acc)
    return out


def smat_identity(k: int, order: int):
    return [vec_unit(k, i, order) for i in range(k)]


def smat_inverse(a):
    """Inverse of a series matrix whose constant-term matrix is invertible."""
    k = len(a)
    order = a[0][0].order
    work = [list(row) + list(vec_unit(k, i, order)) for i, row in enumerate(a)]
    for col in range(k):
        piv = None
        for r in range(col, k):
            if work[r][col].is_unit():
                piv = r
                break
        if piv is None:
            raise NonUnit("series matrix is not invertible at this order")
        work[col], work[piv] = work[piv], work[col]
        inv = series_invert(work[col][col])
        work[col] = [inv * x for x in work[col]]
        for r in range(k):
            if r != col and not work[r][col].is_zero():
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return [row[k:] for row in work]


class Lattice:
    """A reduced generating set for a submodule of (B/b^N)^k."""

    __slots__ = ("order", "width", "rows", "pivots")

    def __init__(self, generators, width: int, order: int):
        """Reduce `generators` (vectors of TruncSeries) to echelon form."""
        self.order = order
        self.width = width
        rows = [list(g) for g in generators if not vec_is_zero(g)]
        fixed: list[list[TruncSeries]] = []
        pivots: list[tuple[int, int]] = []
        for col in range(width):
            best = None
            for idx, r in enumerate(rows):
                v = r[col].valuation()
                if v < order and (best is None or v < best[1]):
                    best = (idx, v)
            if best is None:
                continue
            idx, v = best
            piv = rows.pop(idx)
            unit = piv[col].shift_down(v)  # valuation-0, tail padded
            inv = series_invert(unit)
            piv = [inv * x for x in piv]
            for r in rows:
                if r[col].valuation() >= order:
                    continue
                d = r[col].shift_down(v)
                for j in range(width):
                    r[j] = r[j] - d * piv[j]
            for f in fixed:
                d = _tail_down(f[col], v)
                if not d.is_zero():
                    for j in range(width):
                        f[j] = f[j] - d * piv[j]
            fixed.append(piv)
            pivots.append((col, v))
            rows = [r for r in rows if not vec_is_zero(r)]
        self.rows = [tuple(r) for r in fixed]
        self.pivots = tuple(pivots)

    # -- structure -----------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self.rows)

    def is_normal_form(self) -> bool:
        return all(v == 0 for _, v in self.pivots)

    def __eq__(self, other):
        return (
            isinstance(other, Lattice)
            and self.order == other.order
            and self.width == other.width
            and self.rows == other.rows
        )

    def __repr__(self):
        return f"Lattice(rank={self.rank}, pivots={self.pivots})"

    def truncate(self, order: int) -> "Lattice":
        return Lattice(
            [[s.truncate(order) for s in row] for row in self.rows],
            self.width,
            order,
        )

    # -- membership / reduction ------------------------------------------

    def reduce_vector(self, vec):
        """Reduce vec against the lattice.

        Returns (remainder, coeffs) where coeffs[i] is the series multiple of
        row i that was subtracted; vec is a member iff remainder is zero.
        """
        rem = list(vec)
        coeffs = [TruncSeries.zero(self.order) for _ in self.rows]
        for i, (col, v) in enumerate(self.pivots):
            d = _tail_down(rem[col], v)
            if d.is_zero():
                continue  # only the (irreducible) part below b^v remains
            coeffs[i] = coeffs[i] + d
            row = self.rows[i]
            for j in range(self.width):
                rem[j] = rem[j] - d * row[j]
        return rem, coeffs

    def contains(self, vec) -> bool:
        rem, _ = self.reduce_vector(vec)
        return vec_is_zero(rem)

    def contains_lattice(self, other: "Lattice") -> bool:
        return all(self.contains(row) for row in other.rows)

    # -- module operations -------------------------------------------------

    def sum(self, other: "Lattice") -> "Lattice":
        return Lattice(
            list(self.rows) + list(other.rows), self.width, self.order
        )

    def intersection(self, other: "Lattice") -> "Lattice":
        stacked = [list(r) for r in self.rows] + [list(r) for r in other.rows]
        kernel, _ = series_kernel(stacked, self.order)
        gens = []
        for t in kernel:
            v = vec_zero(self.width, self.order)
            for i in range(len(self.rows)):
                if not t[i].is_zero():
                    v = vec_add(v, vec_scale(self.rows[i], t[i]))
            gens.append(v)
        return Lattice(gens, self.width, self.order)

    def normalize(self) -> "Lattice":
        """Smallest lattice containing self with {x : b^m x in L} = L."""
        lat = self
        while True:
            changed = False
            gens = []
            for row in lat.rows:
                v = min(s.valuation() for s in row)
                if 0 < v < lat.order:
                    gens.append([s.shift_down(v) for s in row])
                    changed = True
                else:
                    gens.append(list(row))
            if not changed:
                return lat
            lat = Lattice(gens, lat.width, lat.order)

    def full_lattice_dim_quotient(self) -> int:
        """dim_C of (B/b^N)^k modulo self, for a full-rank lattice."""
        if self.rank != self.width:
            raise ValueError("lattice does not have full rank")
        return sum(v for _, v in self.pivots)

    def quotient_dim_over(self, sub: "Lattice") -> int:
        """dim_C(self / sub) for sub of the same rank contained in self."""
        coords = []
        for row in sub.rows:
            rem, cf = self.reduce_vector(row)
            if not vec_is_zero(rem):
                raise ValueError("sub is not contained in the lattice")
            coords.append(cf)
        inner = Lattice(coords, self.rank, self.order)
        if inner.rank != self.rank:
            raise ValueError("sub does not have the same rank")
        return inner.full_lattice_dim_quotient()


def series_kernel(rows, order: int):
    """Left kernel {t : t @ M = 0 mod b^N} of the series matrix `rows`.

    Returns (kernel_generators, pivot_count).  Only relations that are exact
    at the working order are reported; elements that vanish purely because of
    truncation (valuation >= order artifacts) are not invented, so the result
    is the "honest" kernel up to the precision the caller verifies elsewhere.
    """
    r = len(rows)
    if r == 0:
        return [], 0
    width = len(rows[0])
    work = [list(row) + list(vec_unit(r, i, order)) for i, row in enumerate(rows)]
    fixed = []
    for col in range(width):
        best = None
        for idx, w in enumerate(work):
            v = w[col].valuation()
            if v < order and (best is None or v < best[1]):
                best = (idx, v)
        if best is None:
            continue
        idx, v = best
        piv = work.pop(idx)
        inv = series_invert(piv[col].shift_down(v))
        piv = [inv * x for x in piv]
        for w in work:
            if w[col].valuation() < order:
                d = w[col].shift_down(v)
                for j in range(len(w)):
                    w[j] = w[j] - d * piv[j]
        fixed.append(piv)
    kernel = []
    for w in work:
        if all(w[j].valuation() >= order for j in range(width)):
            tag = w[width:]
            if not vec_is_zero(tag):
                kernel.append(tag)
    red = Lattice(kernel, r, order)
    return [list(row) for row in red.rows], len(fixed)


def honest_rows(gens, order: int):
    """Drop generators that live too deep in the b-adic filtration.

    Kernels computed modulo b^order are under-determined in their top
    levels: the solution set contains spurious b^{order-v}-multiples.  Rows
    whose every entry has valuation above order//2 are treated as truncation
    junk; honest generators at desk scale sit far below that line.
    """
    cut = order // 2
    return [
        g
        for g in gens
        if min(s.valuation() for s in g) <= cut
    ]


def complete_normal_basis(lat: Lattice):
    """Extend a normal lattice's rows to a basis of the ambient free module.

    Returns (basis_rows, n_lattice_rows): the first `rank` rows are the
    lattice generators, the rest are standard basis vectors chosen on the
    non-pivot columns of the constant-term matrix.
    """
    from .linalg import rref

    const = [[row[j].coeffs[0] for j in range(lat.width)] for row in lat.rows]
    if const:
        _, piv_cols = rref(const)
    else:
        piv_cols = []
    if len(piv_cols) != lat.rank:
        raise ValueError("lattice is not normal (constant terms drop rank)")
    basis = [list(row) for row in lat.rows]
    for j in range(lat.width):
        if j not in piv_cols:
            basis.append(vec_unit(lat.width, j, lat.order))
    return basis, lat.rank
