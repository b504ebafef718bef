"""Shared corpus generators and independent oracles for the test suite."""

from __future__ import annotations

import random

import pytest
from gmpy2 import mpq

from abcalc.frescos import FactoredFresco
from abcalc.modules import ModulePresentation
from abcalc.operators import AbOperator
from abcalc.series import TruncSeries

# ---------------------------------------------------------------------------
# term-rewriting oracle: words in {a, b} rewritten with ab - ba = b^2,
# entirely independent of the gamma-coefficient formulas under test
# ---------------------------------------------------------------------------


def _word_poly_add(poly, word, coeff):
    if coeff == 0:
        return
    poly[word] = poly.get(word, mpq(0)) + coeff
    if poly[word] == 0:
        del poly[word]


def rewrite_words(poly, target: str, b_order: int):
    """Rewrite to 'left' (a's first) or 'right' (b's first) normal form.

    left:  replace each "ba" by "ab" - "bb"
    right: replace each "ab" by "ba" + "bb"
    Words with b_order or more b's are dropped (truncation).
    """
    bad = "ba" if target == "left" else "ab"
    work = {w: c for w, c in poly.items() if w.count("b") < b_order}
    while True:
        pending = None
        for word in work:
            idx = "".join(word).find(bad)
            if idx >= 0:
                pending = (word, idx)
                break
        if pending is None:
            break
        word, idx = pending
        coeff = work.pop(word)
        swapped = word[:idx] + (word[idx + 1], word[idx]) + word[idx + 2 :]
        bb = word[:idx] + ("b", "b") + word[idx + 2 :]
        sign = mpq(-1) if target == "left" else mpq(1)
        if swapped.count("b") < b_order:
            _word_poly_add(work, swapped, coeff)
        if bb.count("b") < b_order:
            _word_poly_add(work, bb, sign * coeff)
    return work


def operator_to_words(x: AbOperator):
    poly = {}
    for (p, q), c in x.terms.items():
        _word_poly_add(poly, ("a",) * p + ("b",) * q, mpq(c))
    return poly


def words_to_left_operator(poly, b_order: int) -> AbOperator:
    terms = {}
    for word, coeff in poly.items():
        p = word.count("a")
        q = word.count("b")
        assert "".join(word) == "a" * p + "b" * q, "word is not left-normal"
        terms[(p, q)] = terms.get((p, q), mpq(0)) + coeff
    return AbOperator(b_order, terms)


# ---------------------------------------------------------------------------
# random corpora
# ---------------------------------------------------------------------------


def random_rational(rnd, num=6, den=3):
    return mpq(rnd.randint(-num, num), rnd.randint(1, den))


def random_operator(rnd, order: int, max_a=6, max_b=None, n_terms=8) -> AbOperator:
    max_b = max_b if max_b is not None else order - 1
    terms = {}
    for _ in range(rnd.randint(1, n_terms)):
        key = (rnd.randint(0, max_a), rnd.randint(0, min(max_b, order - 1)))
        terms[key] = random_rational(rnd)
    return AbOperator(order, terms)


def random_unit(rnd, order: int, depth=3) -> TruncSeries:
    coeffs = [mpq(1)] + [
        random_rational(rnd, 2, 3) if rnd.random() < 0.4 else mpq(0)
        for _ in range(depth)
    ]
    return TruncSeries(order, coeffs)


def random_series(rnd, order: int, depth=None) -> TruncSeries:
    depth = depth if depth is not None else order
    return TruncSeries(
        order, [random_rational(rnd, 4, 3) for _ in range(min(depth, order))]
    )


CLASSES = (mpq(1, 2), mpq(1, 3), mpq(1, 1))


def random_fresco(rnd, order: int, max_rank=6, max_shift=2) -> FactoredFresco:
    """Admissible factored fresco with a tame spectral spread."""
    k = rnd.randint(1, max_rank)
    factors = []
    for j in range(1, k + 1):
        alpha = rnd.choice(CLASSES)
        lam = alpha + (k - j) + rnd.randint(0, max_shift) + 1
        factors.append((lam, random_unit(rnd, order)))
    return FactoredFresco(factors)


def random_geometric_module(rnd, order: int, max_rank=4) -> ModulePresentation:
    """Random geometric simple-pole presentation.

    F(0) is triangular with positive rational eigenvalues conjugated by a
    small integer matrix; higher b-levels are sparse random.
    """
    from abcalc import linalg
    from abcalc.rationals import ZERO

    k = rnd.randint(1, max_rank)
    f0 = [[mpq(0)] * k for _ in range(k)]
    for i in range(k):
        alpha = rnd.choice(CLASSES)
        f0[i][i] = alpha + rnd.randint(0, 2)
        for j in range(i):
            if rnd.random() < 0.5:
                f0[i][j] = mpq(rnd.randint(-2, 2))
    # unimodular-ish conjugation
    t = linalg.identity(k)
    for _ in range(k):
        i, j = rnd.randrange(k), rnd.randrange(k)
        if i != j:
            c = rnd.randint(-1, 1)
            for col in range(k):
                t[i][col] += c * t[j][col]
    f0 = linalg.mat_mul(linalg.mat_mul(t, f0), linalg.inverse(t))
    amat = [[None] * k for _ in range(k)]
    for i in range(k):
        for j in range(k):
            coeffs = [ZERO, f0[i][j]]
            for _ in range(2):
                coeffs.append(
                    random_rational(rnd, 2, 2) if rnd.random() < 0.3 else ZERO
                )
            amat[i][j] = TruncSeries(order, coeffs)
    return ModulePresentation(amat)


@pytest.fixture
def rnd():
    return random.Random(987654321)
