import pytest
from gmpy2 import mpq

from abcalc.errors import NonGeometric
from abcalc.frescos import (
    BernsteinPolynomial,
    FactoredFresco,
    annihilator_of,
    bernstein_element,
    bernstein_fresco,
    fresco_to_module,
    generated_submodule,
    higher_bernstein,
    higher_bernstein_primitive,
    is_principal,
    is_semisimple_fresco,
    pole_report,
    primitive_parts,
    principal_jh,
)
from abcalc.lattices import vec_is_zero
from abcalc.modules import (
    ModulePresentation,
    apply_op,
    bernstein_char,
    bernstein_min,
    direct_sum,
    rank_one_module,
    xi_module,
)
from abcalc.operators import AbOperator
from abcalc.series import TruncSeries

from conftest import random_fresco

N = 12
HALF = mpq(1, 2)


def one(order=N):
    return TruncSeries.one(order)


@pytest.fixture
def theme():
    return FactoredFresco([(mpq(3, 2), one()), (HALF, one())])


def test_admissibility_enforced():
    with pytest.raises(NonGeometric):
        FactoredFresco([(HALF, one()), (HALF, one())])  # 1/2 + 1 < 2


def test_fresco_to_module_rank_one():
    f = FactoredFresco([(HALF, one())])
    mod, gen = fresco_to_module(f)
    assert mod == rank_one_module(HALF, N)
    assert gen == mod.basis_vector(0)


def test_fresco_to_module_theme(theme):
    mod, gen = fresco_to_module(theme)
    # a u2 = 1/2 b u2 + u1 ; a u1 = 3/2 b u1 (the theme inside Xi_{1/2}^{(1)})
    assert mod.amat[1][1] == TruncSeries.b_power(1, N, HALF)
    assert mod.amat[1][0] == one()
    assert mod.amat[0][0] == TruncSeries.b_power(1, N, mpq(3, 2))
    assert vec_is_zero(apply_op(mod, theme.operator(), gen))


def test_annihilator_kills_generator(rnd):
    for _ in range(10):
        f = random_fresco(rnd, N, max_rank=4)
        mod, gen = fresco_to_module(f)
        assert vec_is_zero(apply_op(mod, f.operator(), gen))


def test_bernstein_element(theme):
    # product of the linear factors only, independent of units
    twisted = FactoredFresco(
        [(mpq(3, 2), TruncSeries(N, [1, 5])), (HALF, TruncSeries(N, [1, 0, 7]))]
    )
    assert bernstein_element(twisted) == bernstein_element(theme)
    f1 = FactoredFresco([(HALF, one())])
    assert bernstein_element(f1) == AbOperator.linear(HALF, N)


def _u_power_times_bk(i, k, order):
    """(b^{-1}a)^i b^k as an operator; stays polynomial for i <= k.

    Built by repeatedly applying u to right-normal terms via
    u (b^q a^p) = b^{q-1} a^{p+1} + q b^q a^p.
    """
    from abcalc.operators import RightNormalForm, to_left

    terms = {(0, k): mpq(1)}
    for _ in range(i):
        new = {}
        for (p, q), c in terms.items():
            assert q >= 1
            new[(p + 1, q - 1)] = new.get((p + 1, q - 1), mpq(0)) + c
            new[(p, q)] = new.get((p, q), mpq(0)) + q * c
        terms = new
    return to_left(RightNormalForm(order, terms))


def test_bernstein_element_polynomial_identity(rnd):
    # P_F = (-b)^k B_F(-b^{-1}a): with u = b^{-1}a and b^k f(u) = f(u-k) b^k
    # this reads P_F = T(u) b^k where T(x) = (-1)^k B_F(k - x); the right
    # side expands exactly inside the polynomial algebra since deg T = k.
    for _ in range(10):
        f = random_fresco(rnd, N, max_rank=4)
        k = f.rank
        roots = bernstein_fresco(f).roots
        # T(x) = (-1)^k prod_j ((k - x) - r_j) = prod_j (x - (k - r_j))
        t_roots = [k - r for r in roots]
        coeffs = [mpq(1)]
        for r in t_roots:
            coeffs = [mpq(0)] + coeffs
            for idx in range(len(coeffs) - 1):
                coeffs[idx] -= r * coeffs[idx + 1]
        claim = AbOperator.zero(N)
        for i, c in enumerate(coeffs):
            if c != 0:
                claim = claim + _u_power_times_bk(i, k, N).scale(c)
        assert claim == bernstein_element(f)


def test_bernstein_fresco_examples(theme):
    assert bernstein_fresco(theme) == BernsteinPolynomial.from_roots(
        [-HALF, -HALF]
    )
    f = FactoredFresco([(mpq(7, 3), one()), (mpq(5, 3), one())])
    assert bernstein_fresco(f) == BernsteinPolynomial.from_roots(
        [mpq(-4, 3), mpq(-5, 3)]
    )


def test_bernstein_fresco_matches_saturation(rnd):
    for _ in range(15):
        f = random_fresco(rnd, N, max_rank=4)
        mod, _ = fresco_to_module(f)
        assert list(bernstein_fresco(f).roots) == bernstein_char(mod)


def test_exact_sequence_multiplicativity(rnd):
    for _ in range(15):
        f = random_fresco(rnd, N, max_rank=5)
        k = f.rank
        if k < 2:
            continue
        pos = rnd.randint(1, k - 1)
        sub = FactoredFresco(f.factors[:pos])
        quo = FactoredFresco(f.factors[pos:])
        assert bernstein_fresco(f) == bernstein_fresco(sub).shifted(
            k - pos
        ) * bernstein_fresco(quo)


def test_annihilator_rank_one():
    e = rank_one_module(HALF, N)
    f = annihilator_of(e, e.basis_vector(0))
    assert f.rank == 1 and f.lambdas == [HALF]
    assert f.factors[0][1] == one(f.b_order)


def test_annihilator_xi_generator():
    xi = xi_module(HALF, 1, N)
    f = annihilator_of(xi, xi.basis_vector(1))
    assert f.rank == 2
    assert bernstein_fresco(f) == BernsteinPolynomial.from_roots([-HALF, -HALF])


def test_annihilator_mixed_sum():
    e = direct_sum(rank_one_module(HALF, N), rank_one_module(mpq(1, 3), N))
    x = [one(), one()]
    f = annihilator_of(e, x)
    assert f.rank == 2
    # Bernstein element equality is the contract: against the closure module
    pres, coords, _ = generated_submodule(e, x)
    assert list(bernstein_fresco(f).roots) == bernstein_char(pres)


def test_annihilator_sum_rule(rnd):
    # sum of lambda_j agrees with the codimension-adjusted invariant across
    # the two factorizations produced for (module, generator) pairs
    e = direct_sum(rank_one_module(HALF, N), rank_one_module(mpq(5, 2), N))
    x = [one(), one()]
    f = annihilator_of(e, x)
    pres, coords, _ = generated_submodule(e, x)
    assert list(bernstein_fresco(f).roots) == bernstein_char(pres)


def test_primitive_parts_single_class(theme):
    parts = primitive_parts(theme)
    assert list(parts) == [HALF]
    assert parts[HALF] == (theme, theme)


def test_primitive_parts_mixed(rnd):
    f = FactoredFresco([(mpq(7, 3), one()), (mpq(3, 2), one())])
    parts = primitive_parts(f)
    assert sorted(parts) == [mpq(1, 3), HALF]
    product = BernsteinPolynomial.from_roots([])
    for _, quo in parts.values():
        product = product * bernstein_fresco(quo)
    assert product == bernstein_fresco(f)


def test_primitive_parts_rank_difference(rnd):
    # dim(F^[a] / F_[a]) = sum of root shifts between the Bernstein polynomials
    for _ in range(8):
        f = random_fresco(rnd, N, max_rank=4)
        if len(f.classes()) < 2:
            continue
        parts = primitive_parts(f)
        for alpha, (sub, quo) in parts.items():
            assert sub.rank == quo.rank
            shift = sum(bernstein_fresco(quo).roots) - sum(
                bernstein_fresco(sub).roots
            )
            assert shift >= 0 and shift == int(shift)


def test_principal_jh(theme):
    seq = principal_jh(theme)
    assert seq.values == (mpq(3, 2), HALF)
    assert seq.principal
    # already principal stays put
    f = FactoredFresco([(mpq(5, 2), one()), (mpq(7, 2), one())])
    assert is_principal(f)
    assert principal_jh(f).values == (mpq(5, 2), mpq(7, 2))
    # twisted permutations sort to the same canonical sequence
    g = FactoredFresco([(mpq(9, 2), one()), (mpq(3, 2), one())])
    h = FactoredFresco([(mpq(5, 2), one()), (mpq(7, 2), one())])
    assert principal_jh(g).values == principal_jh(h).values


def test_is_semisimple(theme):
    assert not is_semisimple_fresco(theme)
    f = FactoredFresco([(mpq(9, 2), one()), (mpq(5, 2), one())])
    assert is_semisimple_fresco(f)  # values 11/2 > 9/2 strictly decreasing


def test_distinctness_not_sufficient():
    # the remark-module fresco: annihilator of x has distinct values but d = 2
    alpha, p = mpq(3, 2), 1
    h = ModulePresentation(
        [
            [
                TruncSeries.b_power(1, N, alpha + p - 1),
                TruncSeries(N, [1] + [0] * (p - 1) + [1]),
            ],
            [TruncSeries.zero(N), TruncSeries.b_power(1, N, alpha)],
        ]
    )
    f = annihilator_of(h, h.basis_vector(0))
    values = [lam + j for j, lam in enumerate(f.lambdas, start=1)]
    assert len(set(values)) == len(values)
    assert not is_semisimple_fresco(f)


def test_higher_bernstein_theme(theme):
    polys = higher_bernstein_primitive(theme)
    assert len(polys) == 2
    assert polys[0] == BernsteinPolynomial.from_roots([-HALF])
    assert polys[1] == BernsteinPolynomial.from_roots([-HALF])


def test_higher_bernstein_semisimple():
    f = FactoredFresco([(mpq(9, 2), one()), (mpq(5, 2), one())])
    polys = higher_bernstein_primitive(f)
    assert len(polys) == 1
    assert polys[0] == bernstein_fresco(f)


def test_higher_bernstein_product(rnd):
    for _ in range(12):
        f = random_fresco(rnd, N, max_rank=4)
        polys = higher_bernstein(f)
        product = BernsteinPolynomial.from_roots([])
        for p in polys:
            product = product * p
        assert product == bernstein_fresco(f)
        # degrees non-increasing, roots of each B_j simple
        degs = [p.degree for p in polys]
        assert all(x >= y for x, y in zip(degs, degs[1:]))
        for p in polys:
            assert len(set(p.roots)) == len(p.roots)


def test_multiplicity_distributes_over_indices(rnd):
    # a multiplicity-p root of B_F is a root of exactly p of the B_j (each
    # B_j has simple roots and their product is B_F).  The stronger claim
    # "root of B_j for every j <= p" fails in computation: e.g. lambdas
    # (7/2, 9/2, 7/2) give d = 3 (confirmed by the exact Jordan-Chevalley
    # route) with the double root -7/2 sitting in B_2 and B_3 but not B_1.
    for _ in range(10):
        f = random_fresco(rnd, N, max_rank=4)
        bf = bernstein_fresco(f)
        polys = higher_bernstein(f)
        for r in set(bf.roots):
            total = sum(1 for q in polys if r in q.roots)
            assert total == bf.multiplicity(r)
    counter = FactoredFresco(
        [
            (mpq(7, 2), TruncSeries(N, [1, 1])),
            (mpq(9, 2), one()),
            (mpq(7, 2), one()),
        ]
    )
    polys = higher_bernstein_primitive(counter)
    assert [list(p.roots) for p in polys] == [
        [mpq(-3, 2)],
        [mpq(-7, 2)],
        [mpq(-7, 2)],
    ]


def test_pole_report(theme):
    rep = pole_report(theme)
    assert len(rep.classes) == 1
    c = rep.classes[0]
    assert c.alpha == HALF and c.depth == 2
    assert c.top_pole == -HALF and c.first_pole == -HALF
    # rank-one fresco: order-1 pole predicted at the single Bernstein root
    f = FactoredFresco([(HALF + 1, one())])
    rep2 = pole_report(f)
    assert rep2.classes[0].depth == 1
    assert rep2.classes[0].top_pole == -(HALF + 1)


def test_pole_report_mixed_classes(rnd):
    f = FactoredFresco([(mpq(7, 3), one()), (mpq(3, 2), one())])
    rep = pole_report(f)
    assert [c.alpha for c in rep.classes] == [mpq(1, 3), HALF]
    for c in rep.classes:
        assert c.top_pole in c.polynomials[-1].roots
