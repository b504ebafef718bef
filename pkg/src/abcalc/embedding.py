"""Embedding of geometric modules into asymptotic-expansion modules.

The sharp form: an embedding of E into a sum over classes of
Xi_alpha^{(d_alpha - 1)} (x) C^k, where d_alpha is the nilpotent order of the
class part.  The Jordan-Hoelder flag used for the induction refines the
semi-simple filtration, which is what keeps the log depth at d - 1.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PrecisionExhausted
from .lattices import (
    Lattice,
    complete_normal_basis,
    smat_inverse,
    vec_add,
    vec_is_zero,
    vec_scale,
    vec_zero,
)
from .modules import (
    ModulePresentation,
    change_basis,
    decompose_primitive,
    direct_sum,
    embed_class,
    jh_sequence,
    saturate,
    xi_module,
)
from .monodromy import _class_filtration
from .rationals import Rat


@dataclass
class XiBlock:
    alpha: Rat
    n_log: int
    dirs: int


@dataclass
class EmbeddingResult:
    """phi_rows[i] = image of e_i in the concatenated Xi coordinates."""

    blocks: list
    phi_rows: list
    target_module: ModulePresentation
    log_depth: int

    @property
    def width(self) -> int:
        return sum((b.n_log + 1) * b.dirs for b in self.blocks)


def _refined_flag(pres: ModulePresentation, steps):
    """A J-H flag of `pres` refining the filtration lattices `steps`.

    Returns (rows, gammas, order) in pres coordinates; within each quotient
    S_j/S_{j-1} the flag comes from the greedy construction.  The working
    order may shrink when filtration lattices carry top-level truncation
    junk; the returned rows live at the final order.
    """
    from .modules import submodule_presentation

    k = pres.rank
    w = pres.b_order
    rows: list = []
    gammas: list = []
    for j, step in enumerate(steps):
        sub_pres, _, sub_basis = submodule_presentation(
            pres.truncate(w), step.truncate(min(w, step.order))
        )
        w = sub_pres.b_order
        if j == 0:
            flag_rows, flag_gammas = jh_sequence(sub_pres)
            lifts = [_combine(sub_basis, r, k, w) for r in flag_rows]
        else:
            prev = steps[j - 1].truncate(w)
            step_w = step.truncate(w)
            inner_rows = []
            for row in prev.rows:
                rem, coeffs = step_w.reduce_vector(list(row))
                if not vec_is_zero(rem):
                    raise PrecisionExhausted("filtration steps are not nested")
                inner_rows.append(coeffs)
            inner = Lattice(inner_rows, step_w.rank, w)
            basis_rows, n_sub = complete_normal_basis(inner)
            adapted = change_basis(sub_pres, basis_rows)
            quo = ModulePresentation(
                [row[n_sub:] for row in adapted.amat[n_sub:]]
            )
            flag_rows, flag_gammas = jh_sequence(quo)
            lifts = []
            for r in flag_rows:
                in_sub = _combine(basis_rows[n_sub:], r, step_w.rank, w)
                lifts.append(_combine(sub_basis, in_sub, k, w))
        rows = [[s.truncate(w) for s in row] for row in rows]
        rows.extend(lifts)
        gammas.extend(flag_gammas)
    return rows, gammas, w


def _combine(basis, coeffs, width: int, order: int):
    acc = vec_zero(width, order)
    for i, c in enumerate(coeffs):
        if not c.is_zero():
            acc = vec_add(acc, vec_scale(basis[i], c))
    return acc


def embed_in_xi(e: ModulePresentation) -> EmbeddingResult:
    """B[a]-linear injective map of a geometric module into expansion modules.

    The sharp stage runs at one order below the input (the filtration is
    only certified there); the image commutes with a at that order and the
    log depth of each class block is d(class part) - 1.
    """
    n = e.b_order
    m = n - 1
    k = e.rank
    sat = saturate(e)
    parts = decompose_primitive(sat.module)
    all_rows = []
    for alpha in sorted(parts):
        all_rows.extend(parts[alpha].basis_rows)
    adapt_inv = smat_inverse(
        [[s.truncate(m) for s in row] for row in all_rows]
    )
    blocks = []
    class_phi = {}
    offsets = {}
    offset = 0
    for alpha in sorted(parts):
        part = parts[alpha]
        kc = part.presentation.rank
        basis, gammas = jh_sequence(part.presentation)
        crude_target, crude_phi = embed_class(
            part.presentation, alpha, basis, gammas, kc - 1
        )
        steps = _class_filtration(part.presentation, crude_target, crude_phi, m)
        depth = len(steps)
        flag_rows, flag_gammas, w_class = _refined_flag(
            part.presentation.truncate(m), steps
        )
        target, phi = embed_class(
            part.presentation.truncate(w_class),
            alpha,
            flag_rows,
            flag_gammas,
            depth - 1,
        )
        m = min(m, w_class)
        blocks.append(XiBlock(alpha, depth - 1, target.dirs))
        class_phi[alpha] = phi
        offsets[alpha] = offset
        offset += target.width
    total = offset
    # assemble at the common surviving order:
    # e_i -> saturated coords -> class coords -> class images
    phi_rows = []
    for i in range(k):
        sat_coords = [s.truncate(m) for s in sat.inclusion[i]]
        adapted = [
            _dot(sat_coords, [adapt_inv[r][c].truncate(m) for r in range(k)])
            for c in range(k)
        ]
        acc = vec_zero(total, m)
        pos = 0
        for alpha in sorted(parts):
            kc = parts[alpha].presentation.rank
            base = offsets[alpha]
            for j in range(kc):
                c = adapted[pos + j]
                if not c.is_zero():
                    seg = vec_scale(
                        [s.truncate(m) for s in class_phi[alpha][j]], c
                    )
                    for t in range(len(seg)):
                        acc[base + t] = acc[base + t] + seg[t]
            pos += kc
        phi_rows.append(acc)
    tmod = None
    for blk in blocks:
        for _ in range(blk.dirs):
            piece = xi_module(blk.alpha, blk.n_log, m)
            tmod = piece if tmod is None else direct_sum(tmod, piece)
    log_depth = max(blk.n_log for blk in blocks)
    return EmbeddingResult(blocks, phi_rows, tmod, log_depth)


def _dot(x, col):
    acc = None
    for xi, ci in zip(x, col):
        term = xi * ci
        acc = term if acc is None else acc + term
    return acc
