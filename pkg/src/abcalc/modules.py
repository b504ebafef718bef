"""Finite-rank (a,b)-modules presented by matrices over truncated series.

A ModulePresentation stores the a-action on a basis: a(e_i) = sum_j
amat[i][j] e_j.  Vectors are rows of TruncSeries, so the action on
x = sum x_i e_i is coords(ax) = x @ amat + b^2 x', which is exact at the
working order (the derivative term never consumes the top coefficient).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg
from .errors import (
    NonGeometric,
    NotRegular,
    NotSimplePole,
    NoSuchBlock,
    ObstructedSplit,
    PrecisionExhausted,
    Resonance,
)
from .lattices import (
    Lattice,
    complete_normal_basis,
    smat_identity,
    smat_inverse,
    smat_mul,
    vec_add,
    vec_is_zero,
    vec_scale,
    vec_shift_up,
    vec_sub,
    vec_unit,
    vec_zero,
)
from .operators import AbOperator
from .rationals import ONE, ZERO, Rat, as_int, frac_class, is_integer, rat, rising
from .series import TruncSeries, b2_derive

ModuleVector = list  # list of TruncSeries, one per basis element


class ModulePresentation:
    """Free rank-k module over B/b^N with a-action matrix amat."""

    __slots__ = ("rank", "b_order", "amat")

    def __init__(self, amat):
        self.rank = len(amat)
        if self.rank == 0:
            raise ValueError("rank must be positive")
        self.b_order = amat[0][0].order
        self.amat = tuple(tuple(row) for row in amat)
        for row in self.amat:
            if len(row) != self.rank:
                raise ValueError("amat must be square")

    def __eq__(self, other):
        return isinstance(other, ModulePresentation) and self.amat == other.amat

    def __repr__(self):
        return f"ModulePresentation(rank={self.rank}, b_order={self.b_order})"

    def zero_vector(self) -> ModuleVector:
        return vec_zero(self.rank, self.b_order)

    def basis_vector(self, i: int) -> ModuleVector:
        return vec_unit(self.rank, i, self.b_order)

    def full_lattice(self) -> Lattice:
        return Lattice(
            [self.basis_vector(i) for i in range(self.rank)],
            self.rank,
            self.b_order,
        )

    def truncate(self, order: int) -> "ModulePresentation":
        return ModulePresentation(
            [[s.truncate(order) for s in row] for row in self.amat]
        )


def apply_a(e: ModulePresentation, x: ModuleVector) -> ModuleVector:
    """a(sum x_i e_i) = sum x_i (a e_i) + b^2 x_i' e_i."""
    n = e.b_order
    out = vec_zero(e.rank, n)
    for i, xi in enumerate(x):
        if not xi.is_zero():
            row = e.amat[i]
            for j in range(e.rank):
                if not row[j].is_zero():
                    out[j] = out[j] + xi * row[j]
        out[i] = out[i] + b2_derive(xi)
    return out


def apply_b(x: ModuleVector) -> ModuleVector:
    return vec_shift_up(x, 1)


def apply_op(e: ModulePresentation, op: AbOperator, x: ModuleVector) -> ModuleVector:
    """Evaluate a left-normal-form operator term by term."""
    if op.b_order != e.b_order:
        raise PrecisionExhausted("operator and module orders differ")
    by_q: dict[int, dict[int, Rat]] = {}
    for (p, q), c in op.terms.items():
        by_q.setdefault(q, {})[p] = c
    out = e.zero_vector()
    for q, powers in by_q.items():
        w = vec_shift_up(x, q)
        max_p = max(powers)
        for p in range(max_p + 1):
            c = powers.get(p)
            if c is not None:
                out = vec_add(out, [s.scale(c) for s in w])
            if p < max_p:
                w = apply_a(e, w)
    return out


def is_simple_pole(e: ModulePresentation) -> bool:
    """a E subset of b E: every presentation entry has valuation >= 1."""
    return all(s.valuation() >= 1 for row in e.amat for s in row)


def pole_matrix(e: ModulePresentation):
    """F(b) with amat = b F, as a series matrix (top coefficient padded)."""
    if not is_simple_pole(e):
        raise NotSimplePole("presentation is not divisible by b")
    return [[s.shift_down(1) for s in row] for row in e.amat]


def residue_matrix(e: ModulePresentation):
    """F(0): the exact rational matrix of b^{-1}a acting on E/bE."""
    if not is_simple_pole(e):
        raise NotSimplePole("presentation is not divisible by b")
    return [[s.coeffs[1] for s in row] for row in e.amat]


def make_E_theta(theta, n: int) -> ModulePresentation:
    """Simple pole module with a e = Theta b e."""
    return ModulePresentation(
        [
            [TruncSeries.b_power(1, n, rat(c)) for c in row]
            for row in theta
        ]
    )


def jordan_matrix(eigenvalue, size: int):
    """Lower Jordan block: J[j][j] = lambda, J[j][j-1] = 1."""
    lam = rat(eigenvalue)
    out = [[ZERO] * size for _ in range(size)]
    for j in range(size):
        out[j][j] = lam
        if j:
            out[j][j - 1] = ONE
    return out


def xi_module(alpha, n_log: int, n: int) -> ModulePresentation:
    """The asymptotic-expansion module with basis e_0..e_{n_log}:

    a e_j = alpha b e_j + b e_{j-1} (e_{-1} = 0).
    """
    return make_E_theta(jordan_matrix(alpha, n_log + 1), n)


def rank_one_module(lam, n: int) -> ModulePresentation:
    return make_E_theta([[rat(lam)]], n)


def direct_sum(e: ModulePresentation, f: ModulePresentation) -> ModulePresentation:
    n = e.b_order
    k = e.rank + f.rank
    amat = [[TruncSeries.zero(n) for _ in range(k)] for _ in range(k)]
    for i in range(e.rank):
        for j in range(e.rank):
            amat[i][j] = e.amat[i][j]
    for i in range(f.rank):
        for j in range(f.rank):
            amat[e.rank + i][e.rank + j] = f.amat[i][j]
    return ModulePresentation(amat)


def tensor(e: ModulePresentation, f: ModulePresentation) -> ModulePresentation:
    """a(x (x) y) = ax (x) y + x (x) ay on the basis e_i (x) f_j."""
    if e.b_order != f.b_order:
        raise PrecisionExhausted("orders differ")
    n = e.b_order
    ke, kf = e.rank, f.rank
    size = ke * kf
    amat = [[TruncSeries.zero(n) for _ in range(size)] for _ in range(size)]
    for i in range(ke):
        for j in range(kf):
            row = i * kf + j
            for i2 in range(ke):
                if not e.amat[i][i2].is_zero():
                    amat[row][i2 * kf + j] = amat[row][i2 * kf + j] + e.amat[i][i2]
            for j2 in range(kf):
                if not f.amat[j][j2].is_zero():
                    amat[row][i * kf + j2] = amat[row][i * kf + j2] + f.amat[j][j2]
    return ModulePresentation(amat)


def b_power_module(e: ModulePresentation, m: int) -> ModulePresentation:
    """Presentation of b^m E on the basis b^m e_i: amat + m*b*I."""
    n = e.b_order
    amat = [list(row) for row in e.amat]
    for i in range(e.rank):
        amat[i][i] = amat[i][i] + TruncSeries.b_power(1, n, m)
    return ModulePresentation(amat)


def change_basis(e: ModulePresentation, c_rows) -> ModulePresentation:
    """Presentation in the new basis f = C e (rows of C over B).

    new_amat = (C amat + b^2 C') C^{-1}.
    """
    cinv = smat_inverse([list(r) for r in c_rows])
    work = smat_mul([list(r) for r in c_rows], [list(r) for r in e.amat])
    for i, row in enumerate(c_rows):
        for j in range(e.rank):
            work[i][j] = work[i][j] + b2_derive(row[j])
    return ModulePresentation(smat_mul(work, cinv))


# ---------------------------------------------------------------------------
# spectral data
# ---------------------------------------------------------------------------


def residue_eigenvalues(e: ModulePresentation) -> list[Rat]:
    """Multiset of eigenvalues of F(0); NonGeometric if not all rational."""
    from .rationals import rational_roots

    ev = rational_roots(linalg.charpoly(residue_matrix(e)))
    if ev is None:
        raise NonGeometric("residue matrix has irrational eigenvalues")
    return ev


def solve_shifted(
    e: ModulePresentation, lam, y: ModuleVector
) -> ModuleVector:
    """Unique x with (a - lam b)x = b y in a simple-pole module.

    Solves level by level: x_j (F0 + (j - lam)I) = y_j - sum_{p>=1} x_{j-p} F_p.
    Raises Resonance(j) when F0 + (j - lam)I is singular.
    """
    lam = rat(lam)
    n = e.b_order
    k = e.rank
    fmat = pole_matrix(e)
    f_levels = [
        [[fmat[i][j].coeffs[m] for j in range(k)] for i in range(k)]
        for m in range(n)
    ]
    y_levels = [[y[i].coeffs[m] for i in range(k)] for m in range(n)]
    x_levels = []
    for j in range(n):
        rhs = list(y_levels[j])
        for p in range(1, j + 1):
            fp = f_levels[p]
            xl = x_levels[j - p]
            for col in range(k):
                acc = rhs[col]
                for i in range(k):
                    if xl[i] != 0 and fp[i][col] != 0:
                        acc -= xl[i] * fp[i][col]
                rhs[col] = acc
        mat = [row[:] for row in f_levels[0]]
        for i in range(k):
            mat[i][i] = mat[i][i] + (j - lam)
        if linalg.rank(mat) < k:
            raise Resonance(j)
        sol = linalg.solve_left(mat, rhs)
        if sol is None:
            raise Resonance(j)
        x_levels.append(sol)
    return [
        TruncSeries(n, [x_levels[m][i] for m in range(n)]) for i in range(k)
    ]


def _sylvester_solve(a, b, shift, rhs):
    """Solve A X - X B - shift X = RHS for the (len(a) x len(b)) block X."""
    ra, rb = len(a), len(b) if b else 0
    size = ra * rb
    mat = [[ZERO] * size for _ in range(size)]
    vec = [ZERO] * size
    for i in range(ra):
        for j in range(rb):
            row = i * rb + j
            vec[row] = rhs[i][j]
            for i2 in range(ra):
                mat[row][i2 * rb + j] += a[i][i2]
            for j2 in range(rb):
                mat[row][i * rb + j2] -= b[j2][j]
            mat[row][row] -= shift
    # solve mat . x = vec (column convention): use transpose with solve_left
    sol = linalg.solve_left(linalg.transpose(mat), vec)
    if sol is None or linalg.rank(mat) < size:
        return None
    return [[sol[i * rb + j] for j in range(rb)] for i in range(ra)]


def split_extension(e: ModulePresentation, top_rank: int):
    """Block-diagonalize a block-lower-triangular simple-pole presentation.

    The first `top_rank` basis vectors must span a submodule (upper-right
    block of amat zero) and the coupling block must vanish at b = 0 after
    dividing by b.  Returns (z_rows, new_presentation, basis_rows) where the
    new basis is (e, eps + Z e).
    """
    n = e.b_order
    kf = top_rank
    kg = e.rank - kf
    for i in range(kf):
        for j in range(kf, e.rank):
            if not e.amat[i][j].is_zero():
                raise ValueError("upper-right block is not zero")
    fmat = pole_matrix(e)
    f_blk = [[fmat[i][j] for j in range(kf)] for i in range(kf)]
    g_blk = [[fmat[kf + i][kf + j] for j in range(kg)] for i in range(kg)]
    c_blk = [[fmat[kf + i][j] for j in range(kf)] for i in range(kg)]
    if any(s.coeffs[0] != 0 for row in c_blk for s in row):
        raise ValueError("coupling block must vanish at b = 0 (b^2 X form)")
    f0 = [[s.coeffs[0] for s in row] for row in f_blk]
    g0 = [[s.coeffs[0] for s in row] for row in g_blk]
    # levels of the blocks
    fl = [[[f_blk[i][j].coeffs[m] for j in range(kf)] for i in range(kf)] for m in range(n)]
    gl = [[[g_blk[i][j].coeffs[m] for j in range(kg)] for i in range(kg)] for m in range(n)]
    cl = [[[c_blk[i][j].coeffs[m] for j in range(kf)] for i in range(kg)] for m in range(n)]
    z_levels = [[[ZERO] * kf for _ in range(kg)]]
    for m in range(1, n):
        rhs = [[-cl[m][i][j] for j in range(kf)] for i in range(kg)]
        for p in range(1, m):
            zl = z_levels[m - p]
            gp = gl[p]
            fp = fl[p]
            upd = linalg.mat_sub(linalg.mat_mul(gp, zl), linalg.mat_mul(zl, fp))
            rhs = linalg.mat_add(rhs, upd)
        # Z_m F0 - G0 Z_m + m Z_m = rhs  <=>  G0 Z - Z F0 - m Z = -rhs
        sol = _sylvester_solve(g0, f0, m, [[-x for x in row] for row in rhs])
        if sol is None:
            raise ObstructedSplit(
                f"eigenvalue difference {m} obstructs the splitting"
            )
        z_levels.append(sol)
    z_rows = [
        [TruncSeries(n, [z_levels[m][i][j] for m in range(n)]) for j in range(kf)]
        for i in range(kg)
    ]
    basis = [e.basis_vector(i) for i in range(kf)]
    for i in range(kg):
        row = e.basis_vector(kf + i)
        for j in range(kf):
            row[j] = row[j] + z_rows[i][j]
        basis.append(row)
    new_pres = change_basis(e, basis)
    for i in range(kf):
        for j in range(kf, e.rank):
            if not new_pres.amat[i][j].is_zero() or not new_pres.amat[j][i].is_zero():
                raise ObstructedSplit("conjugation failed to block-diagonalize")
    return z_rows, new_pres, basis


@dataclass
class ClassPart:
    alpha: Rat
    presentation: ModulePresentation
    basis_rows: list  # rows in the original coordinates


def decompose_primitive(e: ModulePresentation) -> dict:
    """Split a simple-pole module into its primitive parts by class in (0,1].

    Returns {alpha: ClassPart}.  The base change first groups generalized
    eigenspaces of F(0) by the class of the eigenvalue mod 1, then kills the
    off-diagonal blocks level by level (always possible since eigenvalues in
    different classes never differ by an integer).
    """
    if not is_simple_pole(e):
        raise NotSimplePole("decomposition needs a simple-pole presentation")
    n = e.b_order
    k = e.rank
    f0 = residue_matrix(e)
    eigs = residue_eigenvalues(e)
    by_class: dict = {}
    for lam in eigs:
        by_class.setdefault(frac_class(lam), []).append(lam)
    classes = sorted(by_class)
    if len(classes) == 1:
        return {
            classes[0]: ClassPart(
                classes[0], e, [e.basis_vector(i) for i in range(k)]
            )
        }
    # constant base change grouping the generalized eigenspaces
    t_rows = []
    sizes = []
    for alpha in classes:
        block_rows = []
        for lam in sorted(set(by_class[alpha])):
            mult = by_class[alpha].count(lam)
            shifted = [row[:] for row in f0]
            for i in range(k):
                shifted[i][i] -= lam
            power = linalg.mat_pow(shifted, mult)
            for vecr in linalg.left_nullspace(power):
                cand, _ = linalg.rref(block_rows + [vecr])
                cand = [r for r in cand if any(x != 0 for x in r)]
                if len(cand) > len(block_rows):
                    block_rows = cand
        sizes.append(len(block_rows))
        t_rows.extend(block_rows)
    if len(t_rows) != k:
        raise NonGeometric("generalized eigenspaces do not fill the module")
    fmat = pole_matrix(e)
    tinv = linalg.inverse(t_rows)
    f_levels = []
    for m in range(n):
        fm = [[fmat[i][j].coeffs[m] for j in range(k)] for i in range(k)]
        f_levels.append(linalg.mat_mul(linalg.mat_mul(t_rows, fm), tinv))
    # block structure helpers
    bounds = []
    start = 0
    for s in sizes:
        bounds.append((start, start + s))
        start += s

    def offdiag_zeroed(mat_):
        out = [row[:] for row in mat_]
        for (r0, r1) in bounds:
            for i in range(r0, r1):
                for j in range(r0, r1):
                    out[i][j] = ZERO
        return out

    w_levels = [linalg.identity(k)]
    fhat_levels = [f_levels[0]]
    for m in range(1, n):
        # K_m = F'_m + sum_{0<i<m} (W_i F'_{m-i} - Fhat_{m-i} W_i)
        kmat = [row[:] for row in f_levels[m]]
        for i in range(1, m):
            kmat = linalg.mat_add(
                kmat, linalg.mat_mul(w_levels[i], f_levels[m - i])
            )
            kmat = linalg.mat_sub(
                kmat, linalg.mat_mul(fhat_levels[m - i], w_levels[i])
            )
        fhat_m = [row[:] for row in kmat]
        w_m = [[ZERO] * k for _ in range(k)]
        for bi, (r0, r1) in enumerate(bounds):
            for bj, (c0, c1) in enumerate(bounds):
                if bi == bj:
                    continue
                block = [[kmat[i][j] for j in range(c0, c1)] for i in range(r0, r1)]
                a_blk = [
                    [f_levels[0][i][j] for j in range(r0, r1)] for i in range(r0, r1)
                ]
                b_blk = [
                    [f_levels[0][i][j] for j in range(c0, c1)] for i in range(c0, c1)
                ]
                # off-diagonal part of the level-m equation:
                # F0 W_m - W_m F0 - m W_m = offdiag(K_m), blockwise
                sol = _sylvester_solve(a_blk, b_blk, m, block)
                if sol is None:
                    raise NonGeometric("class decomposition hit a resonance")
                for i in range(r0, r1):
                    for j in range(c0, c1):
                        w_m[i][j] = sol[i - r0][j - c0]
                        fhat_m[i][j] = ZERO
        w_levels.append(w_m)
        fhat_levels.append(fhat_m)
    u_rows = [
        [
            TruncSeries(n, [w_levels[m][i][j] for m in range(n)])
            for j in range(k)
        ]
        for i in range(k)
    ]
    u_rows = smat_mul(u_rows, [[TruncSeries.const(tc, n) for tc in row] for row in t_rows])
    out = {}
    for idx, alpha in enumerate(classes):
        r0, r1 = bounds[idx]
        amat = [
            [
                TruncSeries(
                    n, [ZERO] + [fhat_levels[m][i][j] for m in range(n - 1)]
                )
                for j in range(r0, r1)
            ]
            for i in range(r0, r1)
        ]
        out[alpha] = ClassPart(
            alpha, ModulePresentation(amat), [u_rows[i] for i in range(r0, r1)]
        )
    return out


# ---------------------------------------------------------------------------
# saturation
# ---------------------------------------------------------------------------


@dataclass
class ShiftedLattice:
    """A lattice of b^{-shift}-scaled elements: rows r stand for b^{-shift} r.

    This is how saturation iterates inside E (x) B[b^{-1}] without ever
    dividing a series by b.
    """

    shift: int
    lattice: Lattice

    def scale_up(self) -> "ShiftedLattice":
        """The same module presented at shift + 1 (rows multiplied by b)."""
        rows = [vec_shift_up(list(r), 1) for r in self.lattice.rows]
        return ShiftedLattice(
            self.shift + 1,
            Lattice(rows, self.lattice.width, self.lattice.order),
        )


@dataclass
class SaturationResult:
    module: ModulePresentation
    inclusion: list  # k rows: e_i of E in the saturated basis
    codim: int
    shift: int


def saturate(e: ModulePresentation) -> SaturationResult:
    """Smallest simple-pole module containing E, by iterating b^{-1} a.

    Elements are tracked as ShiftedLattices: each step re-expresses the
    lattice at shift q+1 and adjoins b^{-(q+1)} (x amat + b^2 x' - q b x).
    """
    n = e.b_order
    k = e.rank
    if is_simple_pole(e):
        return SaturationResult(
            e, smat_identity(k, n), 0, 0
        )
    cur = ShiftedLattice(
        0, Lattice([e.basis_vector(i) for i in range(k)], k, n)
    )
    while True:
        if cur.shift + 1 >= n:
            raise PrecisionExhausted(
                "saturation shift reached the truncation order"
            )
        if cur.shift > k * n:
            raise NotRegular("saturation did not become stationary")
        rows = [list(r) for r in cur.lattice.rows]
        scaled = cur.scale_up()
        cand = ShiftedLattice(
            scaled.shift,
            Lattice(
                [list(r) for r in scaled.lattice.rows]
                + [apply_a_coords_shifted(e, r, cur.shift) for r in rows],
                k,
                n,
            ),
        )
        if cand.lattice.rank == scaled.lattice.rank and all(
            scaled.lattice.contains(r) for r in cand.lattice.rows
        ):
            break  # stationary: keep the current shift
        cur = cand
    shift = cur.shift
    lat = cur.lattice
    basis = [list(r) for r in lat.rows]
    if lat.rank != k:
        raise NotRegular("saturation lost rank at this order")
    # a-action on the saturated basis b^{-q} g
    amat = []
    for g in basis:
        img = apply_a_coords_shifted(e, g, shift)
        rem, coeffs = lat.reduce_vector(img)
        if not vec_is_zero(rem):
            raise PrecisionExhausted("saturation is not a-stable at this order")
        amat.append(coeffs)
    sat = ModulePresentation(amat)
    if not is_simple_pole(sat):
        raise PrecisionExhausted("saturated presentation is not simple pole")
    incl = []
    e_rows = []
    for i in range(k):
        row = vec_shift_up(e.basis_vector(i), shift)
        e_rows.append(row)
        rem, coeffs = lat.reduce_vector(row)
        if not vec_is_zero(rem):
            raise PrecisionExhausted("inclusion failed to reduce")
        incl.append(coeffs)
    codim = lat.quotient_dim_over(Lattice(e_rows, k, n))
    return SaturationResult(sat, incl, codim, shift)


def apply_a_coords_shifted(e: ModulePresentation, row, q: int):
    """Coordinates of b^{q+1} * a(b^{-q} x) for x given by `row` = b^q x."""
    img = apply_a(e, row)
    if q:
        img = vec_sub(img, [s.shift_up(1).scale(q) for s in row])
    return img


# ---------------------------------------------------------------------------
# Bernstein polynomials
# ---------------------------------------------------------------------------


def _minpoly_multiplicity(mat_, lam) -> int:
    k = len(mat_)
    shifted = [row[:] for row in mat_]
    for i in range(k):
        shifted[i][i] -= lam
    prev = linalg.rank(shifted)
    power = shifted
    m = 1
    while True:
        power = linalg.mat_mul(power, shifted)
        r = linalg.rank(power)
        if r == prev:
            return m
        prev = r
        m += 1


def bernstein_min(e: ModulePresentation):
    """Roots (with minimal-polynomial multiplicities) of the Bernstein
    polynomial: the minimal polynomial of -b^{-1}a on Esat/b Esat."""
    sat = saturate(e)
    f0 = residue_matrix(sat.module)
    eigs = residue_eigenvalues(sat.module)
    roots = []
    for lam in sorted(set(eigs)):
        mult = _minpoly_multiplicity(f0, lam)
        roots.extend([-lam] * mult)
    return sorted(roots)


def bernstein_char(e: ModulePresentation):
    """Characteristic-polynomial variant (the fresco semantics)."""
    sat = saturate(e)
    return sorted(-lam for lam in residue_eigenvalues(sat.module))


# ---------------------------------------------------------------------------
# submodule normalization
# ---------------------------------------------------------------------------


def normalize_submodule(e: ModulePresentation, lat: Lattice) -> Lattice:
    """Smallest normal (a- and b-saturated) lattice containing `lat`.

    Checks a-stability of the input, then closes under division by b and
    re-checks a-stability of the closure.
    """
    for row in lat.rows:
        if not lat.contains(apply_a(e, list(row))):
            raise ValueError("lattice is not stable under a")
    out = lat.normalize()
    for row in out.rows:
        if not out.contains(apply_a(e, list(row))):
            # normalization of an a-stable lattice stays a-stable; failing
            # here means the truncation was too coarse
            raise PrecisionExhausted("normalization lost a-stability")
    return out


# ---------------------------------------------------------------------------
# eigenvectors and Jordan-Hoelder sequences
# ---------------------------------------------------------------------------


def solve_eigen(e: ModulePresentation, gamma) -> ModuleVector:
    """Some x not in bE with (a - gamma b)x = 0 in a simple-pole module.

    Requires gamma to be an eigenvalue of F(0) with no eigenvalue in
    gamma - N*; then every level j >= 1 solves uniquely.
    """
    gamma = rat(gamma)
    n = e.b_order
    k = e.rank
    fmat = pole_matrix(e)
    f_levels = [
        [[fmat[i][j].coeffs[m] for j in range(k)] for i in range(k)]
        for m in range(n)
    ]
    f0 = f_levels[0]
    shifted = [row[:] for row in f0]
    for i in range(k):
        shifted[i][i] -= gamma
    kernel = linalg.left_nullspace(shifted)
    if not kernel:
        raise NoSuchBlock(f"{gamma} is not an eigenvalue")
    x_levels = [kernel[0]]
    for j in range(1, n):
        rhs = [ZERO] * k
        for p in range(1, j + 1):
            fp = f_levels[p]
            xl = x_levels[j - p]
            for col in range(k):
                for i in range(k):
                    if xl[i] != 0 and fp[i][col] != 0:
                        rhs[col] -= xl[i] * fp[i][col]
        mat_ = [row[:] for row in f0]
        for i in range(k):
            mat_[i][i] += j - gamma
        sol = linalg.solve_left(mat_, rhs)
        if sol is None or linalg.rank(mat_) < k:
            raise Resonance(j)
        x_levels.append(sol)
    return [TruncSeries(n, [x_levels[m][i] for m in range(n)]) for i in range(k)]


def _minimal_class_eigenvalue(eigs) -> Rat:
    """A deterministic eigenvalue that is minimal within its class mod 1."""
    values = set(eigs)
    candidates = [
        lam
        for lam in values
        if not any(lam - m in values for m in range(1, 1 + _int_spread(values)))
    ]
    return min(candidates)


def _int_spread(values) -> int:
    span = max(values) - min(values)
    return max(1, int(span) + 1)


def jh_sequence(e: ModulePresentation, defer_class=None):
    """A Jordan-Hoelder flag of a simple-pole module.

    Returns (basis_rows, gammas): basis_rows[j] spans F_{j+1} together with
    the earlier rows, each F_j is normal, and the class of basis_rows[j] in
    F_{j+1}/F_j is a standard generator: (a - gamma_j b) g_j lies in b F_j.

    With defer_class set, eigenvalues of the other classes are consumed
    first, so the trailing flag quotients all lie in that class.
    """
    if not is_simple_pole(e):
        raise NotSimplePole("Jordan-Hoelder construction needs a simple pole")
    eigs = residue_eigenvalues(e)
    pool = eigs
    if defer_class is not None:
        others = [lam for lam in eigs if frac_class(lam) != defer_class]
        if others:
            pool = others
    gamma = _minimal_class_eigenvalue(pool)
    x = solve_eigen(e, gamma)
    if e.rank == 1:
        return [x], [gamma]
    lat = Lattice([x], e.rank, e.b_order)
    basis_rows, _ = complete_normal_basis(lat)
    full = change_basis(e, basis_rows)
    # quotient by B x: drop row/column 0
    quo = ModulePresentation(
        [row[1:] for row in full.amat[1:]]
    )
    sub_rows, sub_gammas = jh_sequence(quo, defer_class)
    lifted = []
    for row in sub_rows:
        acc = vec_zero(e.rank, e.b_order)
        for i, c in enumerate(row):
            if not c.is_zero():
                acc = vec_add(acc, vec_scale(basis_rows[1 + i], c))
        lifted.append(acc)
    return [x] + lifted, [gamma] + sub_gammas


def jordan_chain(e: ModulePresentation, lam, size: int):
    """Vectors eps_1..eps_size with a eps_j = lam b eps_j + b eps_{j+1}.

    Requires a Jordan block of size >= `size` for lam on E/bE and no
    eigenvalue in lam - N*.
    """
    lam = rat(lam)
    if not is_simple_pole(e):
        raise NotSimplePole("jordan_chain needs a simple-pole module")
    n = e.b_order
    k = e.rank
    f0 = residue_matrix(e)
    eigs = residue_eigenvalues(e)
    if lam not in eigs:
        raise NoSuchBlock(f"{lam} is not an eigenvalue")
    shifted = [row[:] for row in f0]
    for i in range(k):
        shifted[i][i] -= lam
    pk = linalg.mat_pow(shifted, size)
    pk1 = linalg.mat_pow(shifted, size - 1)
    start = None
    for cand in linalg.left_nullspace(pk):
        if any(c != 0 for c in linalg.row_mat_mul(cand, pk1)):
            start = cand
            break
    if start is None:
        raise NoSuchBlock(f"no Jordan block of size {size} at {lam}")
    chains = [start]
    for _ in range(size - 1):
        chains.append(linalg.row_mat_mul(chains[-1], shifted))
    # order so that the last one is the eigenvector: eps_j uses z_j with
    # z_{j+1} = z_j (F0 - lam)
    consts = [
        [TruncSeries.const(c, n) for c in z] for z in chains
    ]
    corrections = [None] * (size + 1)
    corrections[size] = vec_zero(k, n)
    result = [None] * size
    for j in range(size, 0, -1):
        ej = consts[j - 1]
        nxt = consts[j] if j < size else vec_zero(k, n)
        w = vec_sub(
            vec_sub(apply_a(e, ej), [s.scale(lam) for s in vec_shift_up(ej, 1)]),
            vec_shift_up(nxt, 1),
        )
        y = [s.shift_down(2) if s.valuation() >= 2 else None for s in w]
        if any(v is None for v in y):
            raise PrecisionExhausted("chain seed has valuation < 2 defect")
        rhs = vec_sub(y, corrections[j])
        xj = solve_shifted(e, lam - 1, rhs)
        corrections[j - 1] = xj
        result[j - 1] = vec_sub(ej, vec_shift_up(xj, 1))
    return result


# ---------------------------------------------------------------------------
# asymptotic-expansion targets and embedding
# ---------------------------------------------------------------------------


def submodule_presentation(e: ModulePresentation, lat: Lattice, y=None):
    """Presentation induced on an a-stable lattice, plus coords of y.

    Lattices produced by truncated kernels carry junk in their top levels,
    so reductions are allowed to leave remainders there: the presentation is
    then built at the surviving order (at least 4, else PrecisionExhausted).
    """
    order = min(e.b_order, lat.order)
    e_w = e.truncate(order) if e.b_order != order else e
    lat_w = lat.truncate(order) if lat.order != order else lat
    basis = [list(r) for r in lat_w.rows]
    survive = order
    images = []
    for g in basis:
        rem, coeffs = lat_w.reduce_vector(apply_a(e_w, g))
        images.append(coeffs)
        if not vec_is_zero(rem):
            survive = min(survive, min(s.valuation() for s in rem))
    y_coords = None
    if y is not None:
        rem, y_coords = lat_w.reduce_vector([s.truncate(order) for s in y])
        if not vec_is_zero(rem):
            survive = min(survive, min(s.valuation() for s in rem))
    if survive < 4:
        raise PrecisionExhausted("lattice is not a-stable at this order")
    amat = [[s.truncate(survive) for s in row] for row in images]
    y_out = (
        [s.truncate(survive) for s in y_coords] if y_coords is not None else None
    )
    basis_out = [[s.truncate(survive) for s in row] for row in basis]
    return ModulePresentation(amat), y_out, basis_out


def series_combination(rows, vec, order: int):
    """Coefficients c with sum c_i rows[i] = vec, or None when vec is not in
    the span.  The rows must be independent modulo b (constant-term matrix of
    full row rank), which makes the combination unique."""
    r = len(rows)
    k = len(vec)
    g_levels = [
        [[rows[i][j].coeffs[m] for j in range(k)] for i in range(r)]
        for m in range(order)
    ]
    v_levels = [[vec[j].coeffs[m] for j in range(k)] for m in range(order)]
    g0 = g_levels[0]
    _, piv = linalg.rref(g0)
    if len(piv) != r:
        raise ValueError("rows are dependent modulo b")
    g0r_inv = linalg.inverse([[g0[i][c] for c in piv] for i in range(r)])
    c_levels = []
    for m in range(order):
        rhs = v_levels[m][:]
        for p in range(1, m + 1):
            cl = c_levels[m - p]
            gp = g_levels[p]
            for col in range(k):
                for i in range(r):
                    if cl[i] != 0 and gp[i][col] != 0:
                        rhs[col] -= cl[i] * gp[i][col]
        cm = linalg.row_mat_mul([rhs[c] for c in piv], g0r_inv)
        if linalg.row_mat_mul(cm, g0) != rhs:
            return None
        c_levels.append(cm)
    return [
        TruncSeries(order, [c_levels[m][i] for m in range(order)])
        for i in range(r)
    ]


class XiTarget:
    """Xi_alpha^{(n_log)} (x) C^dirs for a single class alpha.

    Columns are indexed by (direction, log_degree): col = dir*(n_log+1)+log.
    """

    def __init__(self, alpha, n_log: int, dirs: int, order: int):
        self.alpha = rat(alpha)
        self.n_log = n_log
        self.dirs = dirs
        self.order = order

    @property
    def width(self) -> int:
        return self.dirs * (self.n_log + 1)

    def col(self, direction: int, log: int) -> int:
        return direction * (self.n_log + 1) + log

    def module(self) -> ModulePresentation:
        base = xi_module(self.alpha, self.n_log, self.order)
        out = base
        for _ in range(self.dirs - 1):
            out = direct_sum(out, xi_module(self.alpha, self.n_log, self.order))
        return out

    def power_vector(self, m: int, direction: int):
        """Coordinates of s^{alpha+m-1} in the given direction:
        s^m e_0 = alpha(alpha+1)...(alpha+m-1) b^m e_0."""
        v = vec_zero(self.width, self.order)
        v[self.col(direction, 0)] = TruncSeries.b_power(
            m, self.order, rising(self.alpha, m)
        )
        return v

    def solve_linear(self, gamma, rhs):
        """x with (Delta - gamma + N)x = rhs, level by level.

        Non-resonant levels (alpha + m != gamma) invert by a finite Neumann
        series; at the resonant level the shift N alone is solved with the
        minimal choice (free e_0 component set to zero), which requires the
        top log coefficient of rhs to vanish there.
        """
        gamma = rat(gamma)
        n = self.order
        nl = self.n_log
        out = [ [ZERO] * n for _ in range(self.width) ]
        for m in range(n):
            c = self.alpha + m - gamma
            for d in range(self.dirs):
                w = [rhs[self.col(d, j)].coeffs[m] for j in range(nl + 1)]
                if c != 0:
                    x = [ZERO] * (nl + 1)
                    for j in range(nl + 1):
                        acc = ZERO
                        power = ONE / c
                        for i in range(nl + 1 - j):
                            if w[j + i] != 0:
                                acc += (power if i % 2 == 0 else -power) * w[j + i]
                            power = power / c
                        x[j] = acc
                else:
                    if w[nl] != 0:
                        raise PrecisionExhausted(
                            "resonant level needs more log depth"
                        )
                    x = [ZERO] + w[:nl]
                for j in range(nl + 1):
                    out[self.col(d, j)][m] = x[j]
        return [TruncSeries(n, cs) for cs in out]


def embed_class(
    e: ModulePresentation, alpha, basis_rows, gammas, n_log: int
):
    """Embed an [alpha]-primitive simple-pole module along a J-H flag.

    Returns (target, phi_rows): phi_rows[i] is the image of e_i in the
    target coordinates.  Each flag step g_j maps to (solution of
    (a - gamma_j b)x = phi((a - gamma_j b) g_j)) + s^{gamma_j - 1} eps_j.
    """
    k = e.rank
    n = e.b_order
    target = XiTarget(alpha, n_log, k, n)
    images = []  # images of the flag vectors g_1..g_k
    for j, (g, gamma) in enumerate(zip(basis_rows, gammas)):
        m = gamma - target.alpha
        if not is_integer(m) or as_int(m) < 0:
            raise NonGeometric(
                f"characteristic value {gamma} is not in {alpha} + N"
            )
        z = vec_sub(
            apply_a(e, g), [s.scale(gamma) for s in vec_shift_up(g, 1)]
        )
        if j == 0:
            if not vec_is_zero(z):
                raise PrecisionExhausted("first flag vector is not an eigenvector")
            images.append(target.power_vector(as_int(m), 0))
            continue
        coeffs = series_combination(basis_rows[:j], z, n)
        if coeffs is None:
            raise PrecisionExhausted("flag step does not reduce")
        phi_z = vec_zero(target.width, n)
        for i, c in enumerate(coeffs):
            if not c.is_zero():
                phi_z = vec_add(phi_z, vec_scale(images[i], c))
        # (a - gamma b) x = phi_z with phi_z in b*target
        if any(s.valuation() < 1 for s in phi_z if not s.is_zero()):
            raise PrecisionExhausted("flag image is not divisible by b")
        rhs = [s.shift_down(1) if s.valuation() >= 1 else s for s in phi_z]
        x = target.solve_linear(gamma, rhs)
        images.append(vec_add(x, target.power_vector(as_int(m), j)))
    # express the standard basis through the flag images
    flag_inv = smat_inverse([list(r) for r in basis_rows])
    phi_rows = []
    for i in range(k):
        acc = vec_zero(target.width, n)
        for idx in range(k):
            c = flag_inv[i][idx]
            if not c.is_zero():
                acc = vec_add(acc, vec_scale(images[idx], c))
        phi_rows.append(acc)
    return target, phi_rows
