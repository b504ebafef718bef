"""Exact rational scalars.

The scalar type `Rat` is gmpy2's mpq: always stored reduced, denominator
positive, and it parses/prints the text form "p/q" (or "p" for integers)
used by every JSON schema and by the CLI.
"""

from __future__ import annotations

from math import gcd

from gmpy2 import mpq

Rat = mpq

ZERO = mpq(0)
ONE = mpq(1)


def rat(value) -> Rat:
    """Coerce ints, strings like "3/4" or "-2", and rationals to Rat."""
    if isinstance(value, mpq):
        return value
    if isinstance(value, str):
        return mpq(value.strip())
    return mpq(value)


def rat_str(value) -> str:
    """Canonical text form: "p/q", or "p" when the denominator is 1."""
    return str(mpq(value))


def is_integer(value) -> bool:
    return mpq(value).denominator == 1


def as_int(value) -> int:
    q = mpq(value)
    if q.denominator != 1:
        raise ValueError(f"{q} is not an integer")
    return int(q.numerator)


def frac_class(value) -> Rat:
    """Representative in (0, 1] of the class of `value` modulo 1.

    Integers map to 1, matching the convention that the class of an integer
    eigenvalue is [1].
    """
    q = mpq(value)
    n, d = int(q.numerator), int(q.denominator)
    r = n % d  # python % keeps 0 <= r < d
    if r == 0:
        return mpq(1)
    return mpq(r, d)


def rising(x, m: int):
    """Rising factorial x(x+1)...(x+m-1); equals 1 for m = 0."""
    out = ONE
    q = mpq(x)
    for j in range(m):
        out *= q + j
    return out


def _divisors(n: int) -> list[int]:
    n = abs(n)
    if n == 0:
        return [1]
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def rational_roots(coeffs: list) -> list[Rat] | None:
    """All roots of the polynomial sum(coeffs[i] x^i), if they are rational.

    Returns the full multiset of roots (length = degree) or None when the
    polynomial does not split over the rationals.  coeffs are Rat, trailing
    (leading-term) coefficient nonzero.
    """
    cs = [mpq(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    if len(cs) <= 1:
        return []

    def clear_denoms(poly):
        mult = 1
        for c in poly:
            mult = mult * int(c.denominator) // gcd(mult, int(c.denominator))
        return [int(c * mult) for c in poly]

    ics = clear_denoms(cs)
    roots: list[Rat] = []
    while len(ics) > 1:
        ics = clear_denoms([mpq(c) for c in ics])
        # strip zero roots
        if ics[0] == 0:
            roots.append(ZERO)
            ics = ics[1:]
            continue
        lead, const = ics[-1], ics[0]
        found = None
        for p in _divisors(const):
            for q in _divisors(lead):
                if gcd(p, q) != 1:
                    continue
                for cand in (mpq(p, q), mpq(-p, q)):
                    # Horner evaluation
                    acc = mpq(0)
                    for c in reversed(ics):
                        acc = acc * cand + c
                    if acc == 0:
                        found = cand
                        break
                if found is not None:
                    break
            if found is not None:
                break
        if found is None:
            return None
        roots.append(found)
        # synthetic division by (x - found)
        new = [mpq(0)] * (len(ics) - 1)
        acc = mpq(0)
        for i in range(len(ics) - 1, 0, -1):
            acc = acc * found + ics[i]
            new[i - 1] = acc
        ics = new
    return sorted(roots)
