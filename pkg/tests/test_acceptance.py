"""Acceptance gate: one test per criterion, exact (zero-tolerance) equality.

Every criterion runs at truncation order 16 and re-runs at 20 through the
`order` parametrization; each test prints its own pass line (visible with
pytest -s; failures abort with the exact mismatch).
"""

import json
import random

import pytest
from gmpy2 import mpq

from abcalc.embedding import embed_in_xi
from abcalc.errors import ObstructedSplit, Resonance
from abcalc.frescos import (
    BernsteinPolynomial,
    FactoredFresco,
    annihilator_of,
    bernstein_fresco,
    fresco_to_module,
    generated_submodule,
    higher_bernstein,
    higher_bernstein_primitive,
    is_semisimple_fresco,
    pole_report,
    primitive_parts,
)
from abcalc.lattices import (
    Lattice,
    vec_add,
    vec_is_zero,
    vec_scale,
    vec_shift_up,
    vec_sub,
    vec_zero,
)
from abcalc.modules import (
    ModulePresentation,
    apply_a,
    apply_op,
    b_power_module,
    bernstein_char,
    bernstein_min,
    direct_sum,
    jordan_chain,
    make_E_theta,
    rank_one_module,
    solve_shifted,
    split_extension,
    xi_module,
)
from abcalc.monodromy import semisimple_filtration
from abcalc.operators import (
    AbOperator,
    ab_mul,
    act_on_disc,
    binomial_shift,
    divide_factored,
    divide_linear,
    factor_product,
    format_operator,
    gamma_coeff,
    to_left,
    to_right,
)
from abcalc.parsing import parse_element
from abcalc.series import TruncSeries

from conftest import (
    random_fresco,
    random_geometric_module,
    random_operator,
    random_unit,
)

pytestmark = pytest.mark.parametrize("order", [16, 20])

HALF = mpq(1, 2)
THIRD = mpq(1, 3)


def report(criterion, order, detail):
    print(f"ACCEPTANCE {criterion} [order {order}] PASS: {detail}")


def test_criterion_01_normal_forms(order):
    rnd = random.Random(101 + order)
    for _ in range(500):
        x = random_operator(rnd, order, max_a=6)
        assert to_left(to_right(x)) == x
    a, b = AbOperator.a(order), AbOperator.b(order)
    rel = ab_mul(a, b) - ab_mul(b, a) - AbOperator.monomial(1, 0, 2, order)
    assert rel.is_zero()
    for p in range(13):
        for q in range(13):
            for j in range(1, 13):
                assert gamma_coeff(p + 1, q, j) == gamma_coeff(
                    p, q, j
                ) + (q + j - 1) * gamma_coeff(p, q, j - 1)
                assert gamma_coeff(p + 1, q, j) == gamma_coeff(
                    p, q, j
                ) + q * gamma_coeff(p, q + 1, j - 1)
    report(
        "criterion-01 normal-form round trip + relation + recursions",
        order,
        "500 operators, indices <= 12",
    )


def test_criterion_02_action_faithfulness(order):
    rnd = random.Random(202 + order)
    for _ in range(200):
        x = random_operator(rnd, order, max_a=4, n_terms=5)
        y = random_operator(rnd, order, max_a=4, n_terms=5)
        xy = ab_mul(x, y)
        for r in range(13):
            zr = TruncSeries.b_power(r, order)
            assert act_on_disc(xy, zr) == act_on_disc(x, act_on_disc(y, zr))
    report(
        "criterion-02 disc-action homomorphism",
        order,
        "200 random pairs on all z^r, r <= 12",
    )


def test_criterion_03_division(order):
    a, b = AbOperator.a(order), AbOperator.b(order)
    lhs = ab_mul(a + b, a - b) + AbOperator.monomial(2, 0, 2, order)
    assert lhs == a.pow(2)
    rnd = random.Random(303 + order)
    for _ in range(200):
        x = random_operator(rnd, order, max_a=5)
        lam = mpq(rnd.randint(-6, 6), rnd.randint(1, 3))
        q, r = divide_linear(x, lam)
        assert ab_mul(q, AbOperator.linear(lam, order)) + AbOperator.from_series(
            r
        ) == x
        q2, r2 = divide_linear(
            ab_mul(q, AbOperator.linear(lam, order)) + AbOperator.from_series(r),
            lam,
        )
        assert q2 == q and r2 == r
    for _ in range(100):
        k = rnd.randint(1, 3)
        factors = [
            (mpq(rnd.randint(-4, 4), rnd.randint(1, 3)), random_unit(rnd, order))
            for _ in range(k)
        ]
        p = factor_product(factors, order)
        x = random_operator(rnd, order, max_a=5, n_terms=5)
        q, r = divide_factored(x, factors)
        assert r.a_degree() <= k - 1
        assert ab_mul(q, p) + r == x
    report(
        "criterion-03 division",
        order,
        "seed identity + 200 linear + 100 factored reconstructions",
    )


def test_criterion_04_closed_identities(order):
    a, b = AbOperator.a(order), AbOperator.b(order)
    for p in range(2, 9):
        assert to_right((a - b).pow(p)).terms == {(p, 0): 1, (p - 1, 1): -p}
    for p in range(1, 7):
        for q in range(1, 7):
            assert ab_mul(
                AbOperator.monomial(1, 0, q, order), binomial_shift(q, p, order)
            ) == AbOperator.monomial(1, p, q, order)
    for q in range(1, 7):
        assert (a + b).pow(q) == ab_mul(a.pow(q - 1), a + b.scale(q))
    report(
        "criterion-04 closed identities",
        order,
        "(a-b)^p, b^q(a+qb)^p, (a+b)^q families",
    )


def test_criterion_05_bernstein_basics(order):
    for lam in (HALF, THIRD, mpq(1), mpq(7, 3)):
        assert bernstein_min(rank_one_module(lam, order)) == [-lam]
    for nl in range(0, 5):
        for alpha in (HALF, THIRD, mpq(1)):
            assert bernstein_min(xi_module(alpha, nl, order)) == [-alpha] * (
                nl + 1
            )
    e = xi_module(HALF, 1, order)
    base = bernstein_min(e)
    for m in range(1, 4):
        assert bernstein_min(b_power_module(e, m)) == [r - m for r in base]
    report(
        "criterion-05 Bernstein basics",
        order,
        "rank-one, expansion modules N <= 4, b^m shift law m <= 3",
    )


def _corpus(order, count=100):
    rnd = random.Random(606 + order)
    return [random_fresco(rnd, order, max_rank=6) for _ in range(count)], rnd


def test_criterion_06_fresco_bernstein_law(order):
    corpus, rnd = _corpus(order)
    for f in corpus:
        k = f.rank
        expect = sorted(-(lam + j - k) for j, lam in enumerate(f.lambdas, 1))
        got = list(bernstein_fresco(f).roots)
        assert got == expect
        mod, _ = fresco_to_module(f)
        assert got == bernstein_char(mod)
        if k >= 2:
            pos = rnd.randint(1, k - 1)
            sub = FactoredFresco(f.factors[:pos])
            quo = FactoredFresco(f.factors[pos:])
            assert bernstein_fresco(f) == bernstein_fresco(sub).shifted(
                k - pos
            ) * bernstein_fresco(quo)
    report(
        "criterion-06 fresco Bernstein law",
        order,
        "100 frescos: root formula == saturation charpoly; splitting law",
    )


def test_criterion_07_higher_bernstein_product(order):
    corpus, _ = _corpus(order)
    for f in corpus:
        polys = higher_bernstein(f)
        product = BernsteinPolynomial.from_roots([])
        for p in polys:
            product = product * p
        assert product == bernstein_fresco(f)
        # deg B_j = rank(S_j/S_{j-1}): non-increasing degrees are the
        # quotient-rank monotonicity on the whole corpus
        degs = [p.degree for p in polys]
        assert all(x >= y for x, y in zip(degs, degs[1:]))
    one = TruncSeries.one(order)
    theme = FactoredFresco([(mpq(3, 2), one), (HALF, one)])
    polys = higher_bernstein_primitive(theme)
    assert len(polys) == 2
    assert polys[0] == BernsteinPolynomial.from_roots([-HALF])
    assert polys[1] == BernsteinPolynomial.from_roots([-HALF])
    assert bernstein_fresco(theme) == BernsteinPolynomial.from_roots(
        [-HALF, -HALF]
    )
    report(
        "criterion-07 higher Bernstein product",
        order,
        "prod B_j = B_F on the corpus; rank-2 theme d=2, B1=B2=x+1/2",
    )


def test_criterion_08_filtration_of_xi(order):
    for nl in range(0, 4):
        for dim_v in (1, 2):
            e = xi_module(HALF, nl, order)
            for _ in range(dim_v - 1):
                e = direct_sum(e, xi_module(HALF, nl, order))
            res = semisimple_filtration(e)
            assert res.nilpotent_order == nl + 1
            assert res.quotient_ranks == [dim_v] * (nl + 1)
            k = e.rank
            w = res.steps[0].order
            for j, step in enumerate(res.steps, start=1):
                expected = []
                for copy in range(dim_v):
                    for log in range(min(j, nl + 1)):
                        v = vec_zero(k, w)
                        v[copy * (nl + 1) + log] = TruncSeries.one(w)
                        expected.append(v)
                assert step == Lattice(expected, k, w)
    corpus, _ = _corpus(order, count=25)
    for f in corpus:
        mod, _ = fresco_to_module(f)
        ranks = semisimple_filtration(mod).quotient_ranks
        assert all(x >= y for x, y in zip(ranks, ranks[1:]))
    report(
        "criterion-08 expansion-module filtration",
        order,
        "S_j = Xi^{(j-1)} x V for N <= 3, dim V <= 2; ranks non-increasing",
    )


def test_criterion_09_themes(order):
    for m_log in range(0, 4):
        xi = xi_module(HALF, m_log, order)
        # phi of top log-degree with a lower-order tail
        phi = xi.basis_vector(m_log)
        if m_log:
            phi = vec_add(phi, vec_shift_up(xi.basis_vector(m_log - 1), 1))
        f = annihilator_of(xi, phi)
        assert f.rank == m_log + 1
        pres, coords, _ = generated_submodule(xi, phi)
        assert semisimple_filtration(pres).nilpotent_order == m_log + 1
    report(
        "criterion-09 themes",
        order,
        "log-degree M generators give rank M+1 frescos with d = M+1, M <= 3",
    )


def test_criterion_10_non_semisimple_witness(order):
    alpha = mpq(3, 2)
    for p in (1, 2):
        h = ModulePresentation(
            [
                [
                    TruncSeries.b_power(1, order, alpha + p - 1),
                    TruncSeries(order, [1] + [0] * (p - 1) + [1]),
                ],
                [TruncSeries.zero(order), TruncSeries.b_power(1, order, alpha)],
            ]
        )
        res = semisimple_filtration(h)
        assert res.nilpotent_order == 2
        assert res.steps[0].rank == 1
        f = annihilator_of(h, h.basis_vector(0))
        values = [lam + j for j, lam in enumerate(f.lambdas, 1)]
        assert len(set(values)) == len(values)
        assert not is_semisimple_fresco(f)
    report(
        "criterion-10 non-semisimple witness",
        order,
        "remark module p in {1,2}: d=2, rank S_1=1, distinct values, not ss",
    )


def test_criterion_11_solving_and_splitting(order):
    rnd = random.Random(1111 + order)
    e = xi_module(HALF, 1, order)
    lam = HALF - 1
    for _ in range(20):
        y = [
            TruncSeries(order, [mpq(rnd.randint(-3, 3)) for _ in range(order)])
            for _ in range(2)
        ]
        x = solve_shifted(e, lam, y)
        lhs = vec_sub(apply_a(e, x), [s.scale(lam) for s in vec_shift_up(x, 1)])
        assert lhs == vec_shift_up(y, 1)
        assert solve_shifted(e, lam, y) == x
    with pytest.raises(Resonance):
        solve_shifted(
            rank_one_module(HALF, order),
            HALF,
            [TruncSeries.one(order)],
        )
    for _ in range(50):
        kf = rnd.randint(1, 2)
        kg = rnd.randint(1, 2)
        evf = [rnd.choice((HALF, THIRD)) + rnd.randint(0, 2) for _ in range(kf)]
        evg = [ev + mpq(1, 5) for ev in evf[:kg]]  # never integer apart
        k = kf + kg
        amat = [[TruncSeries.zero(order) for _ in range(k)] for _ in range(k)]
        for i, ev in enumerate(evf):
            amat[i][i] = TruncSeries.b_power(1, order, ev)
        for i, ev in enumerate(evg):
            amat[kf + i][kf + i] = TruncSeries.b_power(1, order, ev)
        for i in range(kg):
            for j in range(kf):
                amat[kf + i][j] = TruncSeries.b_power(
                    2, order, rnd.randint(-2, 2)
                )
        pres = ModulePresentation(amat)
        _, new_pres, _ = split_extension(pres, kf)
        for i in range(kf):
            for j in range(kf, k):
                assert new_pres.amat[i][j].is_zero()
                assert new_pres.amat[j][i].is_zero()
    for gap in (1, 2, 3):
        bad = ModulePresentation(
            [
                [TruncSeries.b_power(1, order, HALF), TruncSeries.zero(order)],
                [
                    TruncSeries.b_power(2, order, 1),
                    TruncSeries.b_power(1, order, HALF + gap),
                ],
            ]
        )
        with pytest.raises(ObstructedSplit):
            split_extension(bad, 1)
    report(
        "criterion-11 solving and splitting",
        order,
        "unique solves + resonance; 50 splits; obstructions at gaps 1..3",
    )


def test_criterion_12_embedding(order):
    rnd = random.Random(1212 + order)
    for _ in range(30):
        e = random_geometric_module(rnd, order, max_rank=4)
        res = embed_in_xi(e)
        w = res.phi_rows[0][0].order
        target = res.target_module
        em = e.truncate(w)
        for i in range(e.rank):
            lhs = vec_zero(res.width, w)
            arow = apply_a(em, em.basis_vector(i))
            for j, c in enumerate(arow):
                if not c.is_zero():
                    lhs = vec_add(lhs, vec_scale(res.phi_rows[j], c))
            rhs = apply_a(target, res.phi_rows[i])
            diff = vec_sub(lhs, rhs)
            assert all(s.truncate(w - 1).is_zero() for s in diff)
        assert Lattice(res.phi_rows, res.width, w).rank == e.rank
        d = semisimple_filtration(e).nilpotent_order
        assert res.log_depth <= d - 1
    report(
        "criterion-12 embedding",
        order,
        "30 modules rank <= 4: a-commutation, full valuation rank, depth <= d-1",
    )


def test_criterion_13_jordan_machinery(order):
    for nl in (1, 2, 3):
        e = xi_module(HALF, nl, order)
        chain = jordan_chain(e, HALF, nl + 1)
        for j in range(nl + 1):
            nxt = chain[j + 1] if j + 1 < nl + 1 else e.zero_vector()
            lhs = apply_a(e, chain[j])
            rhs = vec_add(
                [s.scale(HALF) for s in vec_shift_up(chain[j], 1)],
                vec_shift_up(nxt, 1),
            )
            assert lhs == rhs
    for p in (1, 2, 3):
        for m in (0, 1, 2):
            jmat = [[mpq(0)] * p for _ in range(p)]
            for i in range(p):
                jmat[i][i] = HALF + m
                if i:
                    jmat[i][i - 1] = mpq(1)
            j_mod = make_E_theta(jmat, order)
            assert bernstein_min(j_mod) == [-(HALF + m)] * p
    report(
        "criterion-13 Jordan machinery",
        order,
        "canonical chains in expansion modules; Jordan block Bernstein (x+a+m)^p",
    )


def test_criterion_14_pole_report_coherence(order):
    corpus, _ = _corpus(order, count=30)
    one = TruncSeries.one(order)
    corpus.append(FactoredFresco([(mpq(3, 2), one), (HALF, one)]))
    for f in corpus:
        rep = pole_report(f)
        parts = primitive_parts(f)
        for c in rep.classes:
            assert c.depth == len(c.polynomials)
            assert c.top_pole == max(c.polynomials[-1].roots)
            quo = parts[c.alpha][1]
            assert c.first_pole == max(bernstein_fresco(quo).roots)
            # every predicted order-j point is a root of some B_{j+q}, q >= 0
            for j, poly in enumerate(c.polynomials):
                for r in poly.roots:
                    assert any(
                        r in later.roots for later in c.polynomials[j:]
                    )
            # a multiplicity-p root of the class polynomial appears in
            # exactly p of the B_j (product decomposition, simple factors)
            bq = bernstein_fresco(quo)
            for r in set(bq.roots):
                count = sum(1 for poly in c.polynomials if r in poly.roots)
                assert count == bq.multiplicity(r)
    report(
        "criterion-14 pole report coherence",
        order,
        "top pole = max root of B_d; jump points among B_{j+q}; root counts",
    )


def test_criterion_15_cli(order, tmp_path, capsys):
    from abcalc import serialize
    from abcalc.cli import main

    one = TruncSeries.one(order)
    theme = FactoredFresco([(mpq(3, 2), one), (HALF, one)])
    theme_path = tmp_path / "theme.json"
    theme_path.write_text(json.dumps(serialize.fresco_to_json(theme)))
    xi_path = tmp_path / "xi.json"
    xi_path.write_text(
        json.dumps(serialize.module_to_json(xi_module(HALF, 2, order)))
    )
    goldens = [
        (["divide", "--lambda", "1", "--expr", "a^2"], '{"Q":"a + b","R":"2b^2"}\n'),
        (
            ["bernstein", "--fresco", "@" + str(theme_path)],
            '{"roots":["-1/2","-1/2"]}\n',
        ),
        (
            ["filtration", "--module", "@" + str(xi_path)],
            '{"ranks":[1,1,1],"d":3}\n',
        ),
    ]
    for argv, expected in goldens:
        assert main(argv + ["--order", str(order)]) == 0
        assert capsys.readouterr().out == expected
    rnd = random.Random(1515 + order)
    for _ in range(200):
        x = random_operator(rnd, order, max_a=5)
        assert parse_element(format_operator(x), order) == x
    report(
        "criterion-15 CLI",
        order,
        "three byte-exact goldens; 200 parse/print round trips",
    )
