"""Frescos: one-generator geometric modules given by factored annihilators.

A FactoredFresco stores P = (a - l_1 b) T_1 (a - l_2 b) T_2 ... (a - l_k b) T_k
with unit series T_j; the module is the quotient by the left ideal of P and
the distinguished generator is the class of 1.  Leftmost factors correspond
to the bottom of the Jordan-Hoelder flag, so prefixes of the factor list
present normal submodules and suffixes present quotients.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NonGeometric, NonUnit, PrecisionExhausted
from .lattices import (
    Lattice,
    complete_normal_basis,
    series_kernel,
    vec_add,
    vec_is_zero,
)
from .modules import (
    ModulePresentation,
    apply_a,
    bernstein_char,
    change_basis,
    decompose_primitive,
    jh_sequence,
    saturate,
    series_combination,
    vec_shift_up,
)
from .monodromy import semisimple_filtration
from .operators import AbOperator, factor_product
from .rationals import Rat, ZERO, frac_class, rat, rat_str
from .series import TruncSeries, b2_derive, series_invert


@dataclass(frozen=True)
class BernsteinPolynomial:
    """Monic polynomial stored as the multiset of its roots."""

    roots: tuple

    @staticmethod
    def from_roots(roots) -> "BernsteinPolynomial":
        return BernsteinPolynomial(tuple(sorted(rat(r) for r in roots)))

    @property
    def degree(self) -> int:
        return len(self.roots)

    def shifted(self, m) -> "BernsteinPolynomial":
        """B(x - m): every root moves up by m."""
        return BernsteinPolynomial.from_roots([r + rat(m) for r in self.roots])

    def __mul__(self, other: "BernsteinPolynomial") -> "BernsteinPolynomial":
        return BernsteinPolynomial.from_roots(self.roots + other.roots)

    def multiplicity(self, r) -> int:
        r = rat(r)
        return sum(1 for x in self.roots if x == r)

    def __str__(self):
        if not self.roots:
            return "1"
        parts = []
        seen = []
        for r in self.roots:
            if r in seen:
                continue
            seen.append(r)
            m = self.multiplicity(r)
            if r == 0:
                base = "x"
            elif r < 0:
                base = f"(x + {rat_str(-r)})"
            else:
                base = f"(x - {rat_str(r)})"
            parts.append(base if m == 1 else f"{base}^{m}")
        return "".join(parts)


@dataclass(frozen=True)
class CharSequence:
    values: tuple
    principal: bool

    def __iter__(self):
        return iter(self.values)


class FactoredFresco:
    """Ordered factors (lambda_j, T_j) with the admissibility invariant
    lambda_j + j > k for all j (equivalently, all Bernstein roots < 0)."""

    __slots__ = ("b_order", "factors")

    def __init__(self, factors, b_order: int | None = None, check: bool = True):
        facs = []
        for lam, t in factors:
            lam = rat(lam)
            if not isinstance(t, TruncSeries):
                raise TypeError("unit factors must be TruncSeries")
            if not t.is_unit():
                raise NonUnit("unit factor has zero constant term")
            facs.append((lam, t))
        if not facs:
            raise ValueError("a fresco needs at least one factor")
        self.b_order = b_order if b_order is not None else facs[0][1].order
        for _, t in facs:
            if t.order != self.b_order:
                raise PrecisionExhausted("factor orders differ")
        self.factors = tuple(facs)
        if check:
            k = len(facs)
            for j, (lam, _) in enumerate(facs, start=1):
                if not lam + j > k:
                    raise NonGeometric(
                        f"factor {rat_str(lam)} at position {j} violates "
                        f"admissibility (needs lambda + {j} > {k})"
                    )

    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def lambdas(self):
        return [lam for lam, _ in self.factors]

    def classes(self):
        out = []
        for lam in self.lambdas:
            c = frac_class(lam)
            if c not in out:
                out.append(c)
        return sorted(out)

    def operator(self) -> AbOperator:
        return factor_product(self.factors, self.b_order)

    def __eq__(self, other):
        return (
            isinstance(other, FactoredFresco) and self.factors == other.factors
        )

    def __repr__(self):
        lams = ", ".join(rat_str(l) for l in self.lambdas)
        return f"FactoredFresco(rank={self.rank}, lambdas=[{lams}])"


def fresco_to_module(f: FactoredFresco):
    """Presentation on the flag basis u_1..u_k with u_k the generator.

    u_{j-1} = (a - l_j b) T_j u_j unwinds to
    a u_j = (l_j b - b^2 T_j'/T_j) u_j + T_j^{-1} u_{j-1}.
    """
    n = f.b_order
    k = f.rank
    amat = [[TruncSeries.zero(n) for _ in range(k)] for _ in range(k)]
    for j, (lam, t) in enumerate(f.factors):
        tinv = series_invert(t)
        amat[j][j] = TruncSeries.b_power(1, n, lam) - (b2_derive(t) * tinv)
        if j >= 1:
            amat[j][j - 1] = tinv
    pres = ModulePresentation(amat)
    gen = pres.basis_vector(k - 1)
    return pres, gen


def bernstein_element(f: FactoredFresco) -> AbOperator:
    """Initial form (a - l_1 b)(a - l_2 b)...(a - l_k b), units dropped."""
    one = TruncSeries.one(f.b_order)
    return factor_product([(lam, one) for lam in f.lambdas], f.b_order)


def bernstein_fresco(f: FactoredFresco) -> BernsteinPolynomial:
    """Roots are -(lambda_j + j - k); the characteristic-polynomial semantics."""
    k = f.rank
    return BernsteinPolynomial.from_roots(
        [-(lam + j - k) for j, lam in enumerate(f.lambdas, start=1)]
    )


# ---------------------------------------------------------------------------
# annihilators
# ---------------------------------------------------------------------------


def generated_submodule(e: ModulePresentation, x):
    """The closure of B[a]x as a module: (presentation, coords of x, rows)."""
    n = e.b_order
    rows = [list(x)]
    cur = list(x)
    for _ in range(e.rank):
        cur = apply_a(e, cur)
        lat_old = Lattice(rows, e.rank, n)
        if lat_old.contains(cur):
            break
        rows.append(cur)
    lat = Lattice(rows, e.rank, n)
    basis = [list(r) for r in lat.rows]
    amat = []
    for g in basis:
        img = apply_a(e, g)
        rem, coeffs = lat.reduce_vector(img)
        if not vec_is_zero(rem):
            raise PrecisionExhausted("closure is not a-stable at this order")
        amat.append(coeffs)
    pres = ModulePresentation(amat)
    rem, xc = lat.reduce_vector(list(x))
    if not vec_is_zero(rem):
        raise PrecisionExhausted("generator does not reduce against its closure")
    return pres, xc, basis


def _rank_one_unit(c: TruncSeries):
    """For a x = c(b) x with val(c) >= 1: (mu, U) with a(Ux) = mu b Ux.

    mu is the b-coefficient of c and U solves U'/U = -(c - mu b)/b^2.
    """
    if c.valuation() < 1:
        raise NonGeometric("rank-one action is not divisible by b")
    n = c.order
    mu = c.coeffs[1]
    psi = (c - TruncSeries.b_power(1, n, mu)).shift_down(2)
    u = [rat(1)] + [ZERO] * (n - 1)
    for j in range(n - 1):
        acc = ZERO
        for i in range(j + 1):
            if psi.coeffs[j - i] != 0 and u[i] != 0:
                acc += psi.coeffs[j - i] * u[i]
        u[j + 1] = -acc / (j + 1)
    return mu, TruncSeries(n, u)


def _annihilator_rec(e: ModulePresentation, x, class_last=None):
    """Factors of the annihilator of the generator x of e (a fresco).

    Follows the structure theorem: peel the top quotient E_mu off a J-H flag
    of the saturation, pass to y = (a - mu b) S^{-1} x in the corank-one
    submodule, and recurse.  With `class_last` set, J-H flags place the other
    classes at the bottom so that the trailing factors all lie in that class.
    """
    n = e.b_order
    k = e.rank
    if k == 1:
        ax = apply_a(e, x)
        combo = series_combination([x], ax, n)
        if combo is None:
            raise PrecisionExhausted("rank-one action does not reduce")
        mu, unit = _rank_one_unit(combo[0])
        return [(mu, unit)]
    from .lattices import honest_rows

    sat = saturate(e)
    flag_rows, _ = jh_sequence(sat.module, defer_class=class_last)
    # corank-one normal submodule of e: intersect the flag with e
    incl = sat.inclusion
    top_flag = Lattice(flag_rows[: k - 1], k, n)
    stacked = [list(r) for r in incl] + [list(r) for r in top_flag.rows]
    kernel, _ = series_kernel(stacked, n)
    sub = Lattice(honest_rows([t[:k] for t in kernel], n), k, n).normalize()
    if sub.rank != k - 1:
        raise PrecisionExhausted("corank-one flag intersection failed")
    basis_rows, n_sub = complete_normal_basis(sub)
    adapted = change_basis(e, basis_rows)
    # quotient is the last coordinate
    c_q = adapted.amat[k - 1][k - 1]
    mu, unit_q = _rank_one_unit(c_q)
    from .lattices import smat_inverse

    binv = smat_inverse(basis_rows)
    x_new = [
        _dot_vec(x, [binv[i][j] for i in range(k)]) for j in range(k)
    ]
    s_top = x_new[k - 1] * series_invert(unit_q)
    if not s_top.is_unit():
        raise PrecisionExhausted("generator image in the top quotient is not a unit")
    s_inv = series_invert(s_top)
    v = [s_inv * c for c in x]
    y = [
        a - s.scale(mu)
        for a, s in zip(apply_a(e, v), vec_shift_up(v, 1))
    ]
    sub_pres, y_coords, sub_basis = _submodule_presentation(e, sub, y)
    rest = _annihilator_rec(sub_pres, y_coords, class_last)
    return rest + [(mu, s_inv)]


def _dot_vec(x, col):
    acc = None
    for xi, ci in zip(x, col):
        term = xi * ci
        acc = term if acc is None else acc + term
    return acc


def _submodule_presentation(e: ModulePresentation, lat: Lattice, y):
    from .modules import submodule_presentation

    return submodule_presentation(e, lat, y)


def annihilator_of(e: ModulePresentation, x, class_last=None) -> FactoredFresco:
    """Factored generator of the left annihilator of x, units normalized to
    constant term 1.  The rank is the rank of the closure B[a]x.

    Recursion through truncated submodules may consume precision: the
    returned fresco's b_order records the surviving order.
    """
    from .modules import apply_op

    pres, coords, _ = generated_submodule(e, x)
    factors = _annihilator_rec(pres, coords, class_last)
    common = min(t.order for _, t in factors)
    normalized = []
    for lam, t in factors:
        t = t.truncate(common)
        normalized.append((lam, t.scale(1 / t.coeffs[0])))
    fresco = FactoredFresco(normalized)
    e_c = e.truncate(common)
    x_c = [s.truncate(common) for s in x]
    if not vec_is_zero(apply_op(e_c, fresco.operator(), x_c)):
        raise PrecisionExhausted("annihilator does not kill the generator")
    return fresco


# ---------------------------------------------------------------------------
# primitive parts and the principal sequence
# ---------------------------------------------------------------------------


def _find_generator(pres: ModulePresentation):
    """A one-generator witness for a module known to be a fresco."""
    k = pres.rank
    n = pres.b_order
    candidates = [pres.basis_vector(i) for i in range(k)]
    acc = pres.zero_vector()
    for v in candidates[:]:
        acc = vec_add(acc, v)
        candidates.append(list(acc))
    for cand in candidates:
        rows = [list(cand)]
        cur = list(cand)
        for _ in range(k - 1):
            cur = apply_a(pres, cur)
            rows.append(cur)
        if Lattice(rows, k, n).rank == k:
            return cand
    raise PrecisionExhausted("no single generator found (module may not be a fresco)")


def primitive_parts(f: FactoredFresco) -> dict:
    """Per class alpha: (submodule part F_[alpha], quotient part F^[alpha]).

    Both are returned as FactoredFrescos: the quotient part is the
    annihilator of the image of the generator in F/F_[!=alpha]; the
    submodule part is computed from the [alpha]-primitive sublattice.
    """
    mod, gen = fresco_to_module(f)
    classes = f.classes()
    if len(classes) == 1:
        return {classes[0]: (f, f)}
    sat = saturate(mod)
    parts = decompose_primitive(sat.module)
    n = f.b_order
    k = f.rank
    # kernels are honest only below their junk zone; everything class-split
    # is computed at the certified working order
    w = n - 4
    if w < 4:
        raise PrecisionExhausted("class splitting needs b_order >= 8")
    mod_w = mod.truncate(w)
    gen_w = [s.truncate(w) for s in gen]
    out = {}
    for alpha in classes:
        # lattice of the [alpha]-part and of the [!=alpha]-part inside mod
        own_rows = []
        other_rows = []
        for beta, part in parts.items():
            rows = part.basis_rows
            if beta == alpha:
                own_rows.extend(rows)
            else:
                other_rows.extend(rows)
        sub_own = _pullback_lattice(sat.inclusion, own_rows, k, n).truncate(w)
        sub_other = _pullback_lattice(sat.inclusion, other_rows, k, n).truncate(w)
        # quotient fresco F / F_[!=alpha]
        if sub_other.rank == 0:
            quotient_fresco = f
        else:
            basis_rows, n_sub = complete_normal_basis(sub_other)
            adapted = change_basis(mod_w, basis_rows)
            quo = ModulePresentation(
                [row[n_sub:] for row in adapted.amat[n_sub:]]
            )
            from .lattices import smat_inverse

            binv = smat_inverse(basis_rows)
            gen_new = [
                _dot_vec(gen_w, [binv[i][j] for i in range(k)])
                for j in range(n_sub, k)
            ]
            quotient_fresco = annihilator_of(quo, gen_new, class_last=alpha)
        # submodule fresco F_[alpha]
        if sub_own.rank == k:
            sub_fresco = f
        else:
            sub_pres, _, _ = _submodule_presentation(
                mod_w, sub_own, mod_w.zero_vector()
            )
            sub_gen = _find_generator(sub_pres)
            sub_fresco = annihilator_of(sub_pres, sub_gen, class_last=alpha)
        out[alpha] = (sub_fresco, quotient_fresco)
    # consistency: the Bernstein polynomial multiplies over quotient parts
    product = BernsteinPolynomial.from_roots([])
    for alpha in classes:
        product = product * bernstein_fresco(out[alpha][1])
    if product != bernstein_fresco(f):
        raise PrecisionExhausted(
            "class decomposition failed the Bernstein product identity"
        )
    return out


def _pullback_lattice(inclusion, sat_rows, k: int, order: int) -> Lattice:
    """{x in E : x maps into the span of sat_rows} as a lattice in E."""
    from .lattices import honest_rows

    if not sat_rows:
        return Lattice([], k, order)
    stacked = [list(r) for r in inclusion] + [list(r) for r in sat_rows]
    kernel, _ = series_kernel(stacked, order)
    gens = honest_rows([t[:k] for t in kernel], order)
    return Lattice(gens, k, order).normalize()


def principal_jh(f: FactoredFresco) -> CharSequence:
    """The canonical characteristic sequence of an [alpha]-primitive fresco:
    sort the multiset {lambda_j + j} ascending and shift back."""
    if len(f.classes()) != 1:
        raise NonGeometric("principal sequences need a single class")
    values = sorted(lam + j for j, lam in enumerate(f.lambdas, start=1))
    return CharSequence(
        tuple(v - j for j, v in enumerate(values, start=1)), True
    )


def is_principal(f: FactoredFresco) -> bool:
    values = [lam + j for j, lam in enumerate(f.lambdas, start=1)]
    return all(x <= y for x, y in zip(values, values[1:]))


def is_semisimple_fresco(f: FactoredFresco) -> bool:
    """True iff the nilpotent order of the underlying module is 1.

    A repeated value of lambda_j + j within a class forces a rank-2 theme
    subquotient, so distinctness is checked first as a fast necessary
    condition; it is not sufficient.
    """
    by_class: dict = {}
    for j, lam in enumerate(f.lambdas, start=1):
        by_class.setdefault(frac_class(lam), []).append(lam + j)
    for values in by_class.values():
        if len(set(values)) != len(values):
            return False
    mod, _ = fresco_to_module(f)
    return semisimple_filtration(mod).nilpotent_order == 1


# ---------------------------------------------------------------------------
# higher Bernstein polynomials
# ---------------------------------------------------------------------------


def _quotient_module(pres: ModulePresentation, sub: Lattice):
    """Presentation of pres / sub for a normal a-stable lattice."""
    basis_rows, n_sub = complete_normal_basis(sub)
    adapted = change_basis(pres, basis_rows)
    return ModulePresentation([row[n_sub:] for row in adapted.amat[n_sub:]])


def higher_bernstein_primitive(f: FactoredFresco) -> list[BernsteinPolynomial]:
    """B_1..B_d for an [alpha]-primitive fresco.

    B_j is the Bernstein polynomial of S_j/S_{j-1} shifted by the rank of
    F/S_j; the product over j is checked against bernstein_fresco.
    """
    mod, _ = fresco_to_module(f)
    k = f.rank
    filt = semisimple_filtration(mod)
    order = filt.steps[0].order
    mod_t = mod.truncate(order)
    polys = []
    prev: Lattice | None = None
    for j, step in enumerate(filt.steps, start=1):
        sub_pres, _, _ = _submodule_presentation(
            mod_t, step, mod_t.zero_vector()
        )
        if prev is None or prev.rank == 0:
            quo = sub_pres
        else:
            inner_rows = []
            for row in prev.rows:
                rem, coeffs = step.reduce_vector(list(row))
                if not vec_is_zero(rem):
                    raise PrecisionExhausted("filtration steps are not nested")
                inner_rows.append(coeffs)
            inner = Lattice(inner_rows, step.rank, order)
            quo = _quotient_module(sub_pres, inner)
        roots = bernstein_char(quo)
        delta = k - step.rank  # rank of F/S_j
        polys.append(BernsteinPolynomial.from_roots(roots).shifted(delta))
        prev = step
    product = BernsteinPolynomial.from_roots([])
    for p in polys:
        product = product * p
    if product != bernstein_fresco(f):
        raise PrecisionExhausted(
            "higher Bernstein polynomials failed the product identity"
        )
    return polys


def higher_bernstein(f: FactoredFresco) -> list[BernsteinPolynomial]:
    """B_j(F) = prod over classes of B_j(F^[alpha]), j = 1..d(F)."""
    parts = primitive_parts(f)
    per_class = {
        alpha: higher_bernstein_primitive(quotient)
        for alpha, (_, quotient) in parts.items()
    }
    depth = max(len(v) for v in per_class.values())
    out = []
    for j in range(depth):
        poly = BernsteinPolynomial.from_roots([])
        for alpha in sorted(per_class):
            seq = per_class[alpha]
            if j < len(seq):
                poly = poly * seq[j]
        out.append(poly)
    product = BernsteinPolynomial.from_roots([])
    for p in out:
        product = product * p
    if product != bernstein_fresco(f):
        raise PrecisionExhausted("mixed-class Bernstein product failed")
    return out


# ---------------------------------------------------------------------------
# pole report
# ---------------------------------------------------------------------------


@dataclass
class ClassPoleReport:
    alpha: Rat
    depth: int
    polynomials: list  # BernsteinPolynomial for j = 1..depth
    top_pole: Rat  # biggest root of B_depth: predicted exact order-d pole
    first_pole: Rat  # biggest root of the class Bernstein polynomial


@dataclass
class PoleReport:
    """Symbolic pole-order predictions, one entry per class.

    Valid under the isolated-eigenvalue hypothesis for the corresponding
    monodromy eigenvalue; no integral is evaluated.
    """

    classes: list


def pole_report(f: FactoredFresco) -> PoleReport:
    parts = primitive_parts(f)
    out = []
    for alpha in sorted(parts):
        quotient = parts[alpha][1]
        polys = higher_bernstein_primitive(quotient)
        depth = len(polys)
        top = max(polys[-1].roots)
        first = max(bernstein_fresco(quotient).roots)
        out.append(
            ClassPoleReport(
                alpha=alpha,
                depth=depth,
                polynomials=polys,
                top_pole=top,
                first_pole=first,
            )
        )
    return PoleReport(out)
