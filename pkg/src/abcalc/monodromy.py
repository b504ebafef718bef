"""Nilpotent part of the monodromy and the semi-simple filtration.

On a simple-pole module u = b^{-1}a acts on the b-adic truncation
E/b^N E with basis {b^m e_i}.  Its exact Jordan-Chevalley decomposition
splits off the B-linear nilpotent part; the semi-simple filtration is the
chain of kernels of its powers intersected with E.

The filtration itself is computed through an embedding into an
asymptotic-expansion module, where the filtration is the log-degree
filtration; this is the same object by the kernel theorem combined with
the filtration formula for expansion modules, and avoids large-matrix
arithmetic.  Results are recomputed at one lower truncation order and must
agree.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg
from .errors import NonGeometric, NotSimplePole, PrecisionExhausted
from .lattices import (
    Lattice,
    honest_rows,
    series_kernel,
    vec_add,
    vec_scale,
    vec_zero,
)
from .modules import (
    ModulePresentation,
    decompose_primitive,
    embed_class,
    is_simple_pole,
    jh_sequence,
    pole_matrix,
    residue_eigenvalues,
    saturate,
)
from .rationals import ONE, ZERO


@dataclass
class TruncatedUOperator:
    """Matrix of an operator on E/b^N E, basis b^m e_i, index m*k + i.

    Rows act: the image of basis vector (m, i) is row m*k+i.
    """

    rank: int
    levels: int
    matrix: list

    @property
    def dim(self) -> int:
        return self.rank * self.levels


def u_matrix(e: ModulePresentation, levels: int) -> TruncatedUOperator:
    """b^{-1}a on E/b^N E: u(b^m e_i) = b^m u(e_i) + m b^m e_i."""
    if not is_simple_pole(e):
        raise NotSimplePole("u = b^{-1}a needs a simple-pole module")
    if levels >= e.b_order:
        raise PrecisionExhausted("truncation level exceeds the series order")
    k = e.rank
    fmat = pole_matrix(e)
    dim = k * levels
    out = [[ZERO] * dim for _ in range(dim)]
    for m in range(levels):
        for i in range(k):
            row = out[m * k + i]
            row[m * k + i] += m
            for j in range(k):
                s = fmat[i][j]
                for l in range(levels - m):
                    if s.coeffs[l] != 0:
                        row[(m + l) * k + j] += s.coeffs[l]
    return TruncatedUOperator(k, levels, out)


def b_matrix(rank: int, levels: int) -> list:
    """Multiplication by b on the truncation (nilpotent level shift)."""
    dim = rank * levels
    out = [[ZERO] * dim for _ in range(dim)]
    for m in range(levels - 1):
        for i in range(rank):
            out[m * rank + i][(m + 1) * rank + i] = ONE
    return out


def _poly_eval_matrix(coeffs, m):
    n = len(m)
    out = [[ZERO] * n for _ in range(n)]
    for i in range(n):
        out[i][i] = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        out = linalg.mat_mul(out, m)
        for i in range(n):
            out[i][i] += c
    return out


def _poly_from_roots(roots):
    coeffs = [ONE]
    for r in roots:
        coeffs = [ZERO] + coeffs
        for i in range(len(coeffs) - 1):
            coeffs[i] -= r * coeffs[i + 1]
    return coeffs


def _poly_derivative(coeffs):
    return [i * coeffs[i] for i in range(1, len(coeffs))]


def _jc_nilpotent(matrix, eigenvalues) -> list:
    """Nilpotent part of the Jordan-Chevalley decomposition.

    `eigenvalues` is the exact multiset of eigenvalues.  Newton iteration on
    the squarefree part g: s -> s - g(s) g'(s)^{-1} converges to the
    semisimple part; the nilpotent part is the difference.
    """
    distinct = sorted(set(eigenvalues))
    g = _poly_from_roots(distinct)
    dg = _poly_derivative(g)
    s = [row[:] for row in matrix]
    max_mult = max(eigenvalues.count(x) for x in distinct)
    steps = 0
    while True:
        gs = _poly_eval_matrix(g, s)
        if all(x == 0 for row in gs for x in row):
            break
        steps += 1
        if steps > max_mult + 2:
            raise NonGeometric("Jordan-Chevalley iteration did not converge")
        dgs = _poly_eval_matrix(dg, s)
        s = linalg.mat_sub(s, linalg.mat_mul(gs, linalg.inverse(dgs)))
    return linalg.mat_sub(matrix, s)


def nilpotent_part(e: ModulePresentation, levels: int) -> TruncatedUOperator:
    """B-linear nilpotent part of the monodromy on E/b^N E.

    Classes are split first and the decomposition is assembled blockwise;
    within a class the Jordan-Chevalley nilpotent part of u is the object
    (on a primitive truncation the semisimple summand is the diagonal part
    of the expansion-module grading, so the algebraic and the monodromy
    nilpotent parts agree).
    """
    if not is_simple_pole(e):
        raise NotSimplePole("nilpotent part needs a simple-pole module")
    k = e.rank
    parts = decompose_primitive(e)
    dim = k * levels
    if len(parts) == 1:
        return TruncatedUOperator(k, levels, _class_nilpotent(e, levels))
    # assemble blockwise through the base change
    n_adapted = [[ZERO] * dim for _ in range(dim)]
    t_rows = []
    order = []
    for alpha in sorted(parts):
        part = parts[alpha]
        order.append((alpha, part))
        t_rows.extend(part.basis_rows)
    # transition on the truncation: b^m f_i expanded over b^{m'} e_j
    t_trunc = [[ZERO] * dim for _ in range(dim)]
    for m in range(levels):
        for i in range(k):
            row = t_trunc[m * k + i]
            frow = t_rows[i]
            for j in range(k):
                s = frow[j]
                for l in range(levels - m):
                    if s.coeffs[l] != 0:
                        row[(m + l) * k + j] += s.coeffs[l]
    offset = 0
    for alpha, part in order:
        kc = part.presentation.rank
        nil_c = _class_nilpotent(part.presentation, levels)
        for m in range(levels):
            for i in range(kc):
                src = m * k + offset + i
                for m2 in range(levels):
                    for j in range(kc):
                        v = nil_c[m * kc + i][m2 * kc + j]
                        if v != 0:
                            n_adapted[src][m2 * k + offset + j] = v
        offset += kc
    tinv = linalg.inverse(t_trunc)
    nil = linalg.mat_mul(linalg.mat_mul(tinv, n_adapted), t_trunc)
    return TruncatedUOperator(k, levels, nil)


def _class_nilpotent(e: ModulePresentation, levels: int) -> list:
    """Nilpotent part for a single-class simple-pole module (raw matrix)."""
    k = e.rank
    fmat = pole_matrix(e)
    constant = all(
        s.coeffs[l] == 0
        for row in fmat
        for s in row
        for l in range(1, e.b_order - 1)
    )
    u = u_matrix(e, levels)
    if constant:
        # u is block diagonal with blocks F0 + m; one small decomposition
        f0 = [[fmat[i][j].coeffs[0] for j in range(k)] for i in range(k)]
        eigs = residue_eigenvalues(e)
        n0 = _jc_nilpotent(f0, eigs)
        dim = k * levels
        out = [[ZERO] * dim for _ in range(dim)]
        for m in range(levels):
            for i in range(k):
                for j in range(k):
                    if n0[i][j] != 0:
                        out[m * k + i][m * k + j] = n0[i][j]
        return out
    base = residue_eigenvalues(e)
    eigs = []
    for m in range(levels):
        eigs.extend([lam + m for lam in base])
    return _jc_nilpotent(u.matrix, eigs)


# ---------------------------------------------------------------------------
# the semi-simple filtration
# ---------------------------------------------------------------------------


@dataclass
class FiltrationResult:
    steps: list  # Lattices S_1 subset ... subset S_d = E, in E coordinates
    quotient_ranks: list
    nilpotent_order: int


def _class_filtration(part_pres, target, phi, order: int):
    """Log-degree filtration lattices of a primitive class part (own coords)."""
    kc = part_pres.rank
    steps = []
    full = part_pres.full_lattice().truncate(order)
    for j in range(1, kc + 1):
        cols = [
            target.col(d, l)
            for d in range(target.dirs)
            for l in range(j, target.n_log + 1)
        ]
        if not cols:
            steps.append(full)
            break
        mat = [
            [phi[i][c].truncate(order) for c in cols] for i in range(kc)
        ]
        gens, _ = series_kernel(mat, order)
        lat = Lattice(honest_rows(gens, order), kc, order).normalize()
        steps.append(lat)
        if lat.rank == kc and lat.contains_lattice(full):
            break
    if not steps or steps[-1].rank != kc:
        raise PrecisionExhausted("filtration did not exhaust the module")
    return steps


def semisimple_filtration(e: ModulePresentation) -> FiltrationResult:
    """S_j(E) as normalized lattices, with quotient ranks and d(E).

    Saturates internally and intersects back.  The kernel extraction runs at
    two adjacent working orders; kernels modulo b^m carry junk in their top
    levels, so the two runs are compared (and the result reported) on the
    order range below both junk zones.  Disagreement there raises
    PrecisionExhausted instead of guessing.
    """
    n = e.b_order
    if n < 6:
        raise PrecisionExhausted("the filtration needs b_order >= 6")
    sat = saturate(e)
    parts = decompose_primitive(sat.module)
    embeds = {}
    for alpha, part in parts.items():
        basis, gammas = jh_sequence(part.presentation)
        embeds[alpha] = embed_class(
            part.presentation, alpha, basis, gammas, part.presentation.rank - 1
        )
    result = _filtration_at(e, sat, parts, embeds, n - 1)
    check = _filtration_at(e, sat, parts, embeds, n - 2)
    if len(check.steps) != len(result.steps) or any(
        a.rank != b.rank for a, b in zip(result.steps, check.steps)
    ):
        raise PrecisionExhausted("filtration depth unstable across orders")
    # certify on the deepest order range where both runs coincide (the junk
    # zone of a kernel mod b^m grows with the spectral integer spread, so the
    # window is found rather than fixed)
    for w in range(n - 2, 3, -1):
        if all(
            a.truncate(w) == b.truncate(w)
            for a, b in zip(result.steps, check.steps)
        ):
            steps = [a.truncate(w) for a in result.steps]
            return FiltrationResult(
                steps, result.quotient_ranks, result.nilpotent_order
            )
    raise PrecisionExhausted("filtration lattices unstable across orders")


def _filtration_at(e, sat, parts, embeds, order: int) -> FiltrationResult:
    k = e.rank
    per_class = {
        alpha: _class_filtration(
            parts[alpha].presentation, embeds[alpha][0], embeds[alpha][1], order
        )
        for alpha in parts
    }
    depth = max(len(s) for s in per_class.values())
    incl = [[s.truncate(order) for s in row] for row in sat.inclusion]
    steps = []
    ranks = []
    prev_rank = 0
    full = e.full_lattice().truncate(order)
    for j in range(depth):
        sat_rows = []
        for alpha, part in parts.items():
            flt = per_class[alpha]
            lat = flt[min(j, len(flt) - 1)]
            rows = [[s.truncate(order) for s in r] for r in part.basis_rows]
            for v in lat.rows:
                acc = vec_zero(k, order)
                for i, c in enumerate(v):
                    if not c.is_zero():
                        acc = vec_add(acc, vec_scale(rows[i], c))
                sat_rows.append(acc)
        if sat.shift == 0 and len(parts) == 1:
            # E is its own saturation in the original basis
            lat_e = Lattice(sat_rows, k, order).normalize()
        else:
            stacked = incl + sat_rows
            kernel, _ = series_kernel(stacked, order)
            gens = honest_rows([t[:k] for t in kernel], order)
            lat_e = Lattice(gens, k, order).normalize()
        steps.append(lat_e)
        ranks.append(lat_e.rank - prev_rank)
        prev_rank = lat_e.rank
        if lat_e.rank == k and lat_e.contains_lattice(full):
            break
    final = steps[-1]
    if final.rank != k or not final.contains_lattice(full):
        raise PrecisionExhausted("filtration did not reach the full module")
    return FiltrationResult(steps, ranks, len(steps))


def nilpotent_order(e: ModulePresentation) -> int:
    return semisimple_filtration(e).nilpotent_order
