"""Operators in a and b with the commutation relation ab - ba = b^2.

An AbOperator is a finite sum of monomials x_{p,q} a^p b^q in left normal
form (all a's to the left).  The b-exponent is truncated at b_order; the
a-degree is exact and unbounded.  RightNormalForm is the twin normal form
sum d_{p,q} b^q a^p.  GradedOperator truncates by total (a,b)-degree instead
and is the only regime that supports inversion.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb, perm

from .errors import NonUnit, OrderMismatch
from .rationals import ONE, ZERO, rat, rat_str, rising
from .series import TruncSeries


@lru_cache(maxsize=None)
def gamma_coeff(p: int, q: int, j: int) -> int:
    """The integer with a^p b^q = sum_j gamma(p,q,j) b^{q+j} a^{p-j}.

    For q >= 1 this is C(q+j-1, j) * p!/(p-j)!; for q = 0 the only term is
    j = 0 with value 1.
    """
    if j < 0 or j > p:
        return 0
    if q == 0:
        return 1 if j == 0 else 0
    return comb(q + j - 1, j) * perm(p, j)


def _clean(terms: dict) -> dict:
    return {k: v for k, v in terms.items() if v != 0}


class AbOperator:
    """Finite sum x_{p,q} a^p b^q with q < b_order, zero coefficients dropped."""

    __slots__ = ("b_order", "terms")

    def __init__(self, b_order: int, terms=None):
        if b_order < 1:
            raise OrderMismatch("b_order must be >= 1")
        self.b_order = b_order
        tm = {}
        if terms:
            for (p, q), c in terms.items():
                c = rat(c)
                if c != 0 and q < b_order:
                    tm[(p, q)] = tm.get((p, q), ZERO) + c
        self.terms = _clean(tm)

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(n: int) -> "AbOperator":
        return AbOperator(n)

    @staticmethod
    def one(n: int) -> "AbOperator":
        return AbOperator(n, {(0, 0): ONE})

    @staticmethod
    def monomial(coeff, p: int, q: int, n: int) -> "AbOperator":
        return AbOperator(n, {(p, q): rat(coeff)})

    @staticmethod
    def a(n: int) -> "AbOperator":
        return AbOperator(n, {(1, 0): ONE})

    @staticmethod
    def b(n: int) -> "AbOperator":
        return AbOperator(n, {(0, 1): ONE})

    @staticmethod
    def linear(lam, n: int) -> "AbOperator":
        """a - lam*b."""
        return AbOperator(n, {(1, 0): ONE, (0, 1): -rat(lam)})

    @staticmethod
    def from_series(s: TruncSeries) -> "AbOperator":
        return AbOperator(s.order, {(0, j): c for j, c in enumerate(s.coeffs)})

    # -- structure --------------------------------------------------------

    def a_degree(self) -> int:
        """Max a-exponent (-1 for the zero operator)."""
        return max((p for p, _ in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def as_series(self) -> TruncSeries:
        """The operator as an element of B; requires a-degree <= 0."""
        if any(p for p, _ in self.terms):
            raise ValueError("operator has positive a-degree")
        cs = [ZERO] * self.b_order
        for (_, q), c in self.terms.items():
            cs[q] = c
        return TruncSeries(self.b_order, cs)

    def coefficient_series(self) -> dict[int, TruncSeries]:
        """Right-normal decomposition X = sum_p X_p(b) a^p as {p: X_p}."""
        right = to_right(self)
        out: dict[int, list] = {}
        for (p, q), c in right.terms.items():
            out.setdefault(p, [ZERO] * self.b_order)[q] = c
        return {p: TruncSeries(self.b_order, cs) for p, cs in out.items()}

    def __eq__(self, other):
        return (
            isinstance(other, AbOperator)
            and self.b_order == other.b_order
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.b_order, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return f"AbOperator(b_order={self.b_order}, {self})"

    def __str__(self):
        return format_operator(self)

    def _check(self, other):
        if self.b_order != other.b_order:
            raise OrderMismatch(
                f"b_orders {self.b_order} and {other.b_order} differ"
            )

    # -- linear arithmetic -------------------------------------------------

    def __add__(self, other: "AbOperator") -> "AbOperator":
        self._check(other)
        tm = dict(self.terms)
        for k, v in other.terms.items():
            tm[k] = tm.get(k, ZERO) + v
        return AbOperator(self.b_order, tm)

    def __sub__(self, other: "AbOperator") -> "AbOperator":
        self._check(other)
        tm = dict(self.terms)
        for k, v in other.terms.items():
            tm[k] = tm.get(k, ZERO) - v
        return AbOperator(self.b_order, tm)

    def __neg__(self) -> "AbOperator":
        return AbOperator(self.b_order, {k: -v for k, v in self.terms.items()})

    def scale(self, value) -> "AbOperator":
        v = rat(value)
        return AbOperator(self.b_order, {k: v * c for k, c in self.terms.items()})

    def __mul__(self, other: "AbOperator") -> "AbOperator":
        return ab_mul(self, other)

    def pow(self, n: int) -> "AbOperator":
        out = AbOperator.one(self.b_order)
        for _ in range(n):
            out = ab_mul(out, self)
        return out


class RightNormalForm:
    """Finite sum d_{p,q} b^q a^p with q < b_order."""

    __slots__ = ("b_order", "terms")

    def __init__(self, b_order: int, terms=None):
        self.b_order = b_order
        tm = {}
        if terms:
            for (p, q), c in terms.items():
                c = rat(c)
                if c != 0 and q < b_order:
                    tm[(p, q)] = tm.get((p, q), ZERO) + c
        self.terms = _clean(tm)

    def __eq__(self, other):
        return (
            isinstance(other, RightNormalForm)
            and self.b_order == other.b_order
            and self.terms == other.terms
        )

    def __repr__(self):
        body = " + ".join(
            f"{rat_str(c)}*b^{q}a^{p}" for (p, q), c in sorted(self.terms.items())
        )
        return f"RightNormalForm({body or '0'})"


def to_right(x: AbOperator) -> RightNormalForm:
    """Rewrite via a^p b^q = sum_j gamma(p,q,j) b^{q+j} a^{p-j}."""
    n = x.b_order
    tm: dict = {}
    for (p, q), c in x.terms.items():
        for j in range(p + 1):
            if q + j >= n:
                break
            g = gamma_coeff(p, q, j)
            if g:
                k = (p - j, q + j)
                tm[k] = tm.get(k, ZERO) + c * g
    return RightNormalForm(n, tm)


def to_left(x: RightNormalForm) -> AbOperator:
    """Rewrite via b^q a^p = sum_j (-1)^j gamma(p,q,j) a^{p-j} b^{q+j}."""
    n = x.b_order
    tm: dict = {}
    for (p, q), c in x.terms.items():
        for j in range(p + 1):
            if q + j >= n:
                break
            g = gamma_coeff(p, q, j)
            if g:
                k = (p - j, q + j)
                v = c * g
                tm[k] = tm.get(k, ZERO) + (-v if j & 1 else v)
    return AbOperator(n, tm)


def ab_mul(x: AbOperator, y: AbOperator) -> AbOperator:
    """Product in left normal form mod b^b_order.

    Each cross term a^p b^q * a^{p'} b^{q'} is rewritten with
    b^q a^{p'} = sum_j (-1)^j gamma(p',q,j) a^{p'-j} b^{q+j}.
    """
    x._check(y)
    n = x.b_order
    tm: dict = {}
    for (p, q), c in x.terms.items():
        for (p2, q2), d in y.terms.items():
            cd = c * d
            for j in range(p2 + 1):
                qq = q + q2 + j
                if qq >= n:
                    break
                g = gamma_coeff(p2, q, j)
                if g:
                    k = (p + p2 - j, qq)
                    v = cd * g
                    tm[k] = tm.get(k, ZERO) + (-v if j & 1 else v)
    return AbOperator(n, tm)


def antipode(x: AbOperator) -> AbOperator:
    """The anti-automorphism with a -> a, b -> -b (reverses products)."""
    tm = {
        (p, q): (-c if q & 1 else c) for (p, q), c in x.terms.items()
    }
    return to_left(RightNormalForm(x.b_order, tm))


def binomial_shift(x, p: int, n: int) -> AbOperator:
    """(a + x*b)^p = a^p + sum_j gamma_j(x) C(p,j) b^j a^{p-j}, left-normalized,

    where gamma_j(x) = x(x+1)...(x+j-1).
    """
    xv = rat(x)
    tm = {(p, 0): ONE}
    for j in range(1, p + 1):
        if j >= n:
            break
        coeff = rising(xv, j) * comb(p, j)
        if coeff != 0:
            tm[(p - j, j)] = coeff
    return to_left(RightNormalForm(n, tm))


def act_on_disc(x: AbOperator, f: TruncSeries) -> TruncSeries:
    """Faithful action on disc series: a = multiply by z, b = primitive at 0.

    For X = sum x_{p,q} a^p b^q and f = sum t_r z^r the image has
    coefficients u_m = sum_{p+q+r=m} (r!/(q+r)!) x_{p,q} t_r.
    """
    n = min(x.b_order, f.order)
    out = [ZERO] * n
    for (p, q), c in x.terms.items():
        base = p + q
        if base >= n:
            continue
        for r in range(n - base):
            t = f.coeffs[r]
            if t == 0:
                continue
            # r!/(q+r)! = 1/((r+1)...(r+q))
            out[base + r] += c * t / rising(r + 1, q)
    return TruncSeries(n, out)


def divide_linear(x: AbOperator, lam) -> tuple[AbOperator, TruncSeries]:
    """Right division X = Q (a - lam*b) + R with R in B.

    Uses a^m = Q_{m-1}(lam)(a - lam b) + R_m(lam) where
    Q_{m-1}(lam) = sum_i lam(lam+1)...(lam+i-1) a^{m-1-i} b^i and
    R_m(lam) = lam(lam+1)...(lam+m-1) b^m.
    """
    lam = rat(lam)
    n = x.b_order
    parts = x.coefficient_series()
    q_op = AbOperator.zero(n)
    r_ser = TruncSeries.zero(n)
    for p, xp in parts.items():
        r_ser = r_ser + xp.scale(rising(lam, p)).shift_up(p)
        if p == 0:
            continue
        qp = AbOperator(
            n,
            {(p - 1 - i, i): rising(lam, i) for i in range(min(p, n))},
        )
        q_op = q_op + ab_mul(AbOperator.from_series(xp), qp)
    return q_op, r_ser


def factor_product(factors, n: int) -> AbOperator:
    """The operator (a - l_1 b) T_1 (a - l_2 b) T_2 ... (a - l_k b) T_k."""
    out = AbOperator.one(n)
    for lam, t in factors:
        out = ab_mul(out, AbOperator.linear(lam, n))
        out = ab_mul(out, AbOperator.from_series(t))
    return out


def divide_factored(x: AbOperator, factors) -> tuple[AbOperator, AbOperator]:
    """Right division X = Q P + R for P given by (lambda_j, unit T_j) factors.

    R has a-degree <= k-1.  Each unit factor must be invertible at the
    working order.
    """
    n = x.b_order
    if not factors:
        raise ValueError("empty factor list")
    from .series import series_invert

    lam, t = factors[0]
    if not t.is_unit():
        raise NonUnit("factor unit has zero constant term")
    tinv = AbOperator.from_series(series_invert(t))
    if len(factors) == 1:
        q1, r1 = divide_linear(ab_mul(x, tinv), lam)
        r_op = AbOperator.from_series(r1 * t)
        return q1, r_op
    tail = factors[1:]
    q0, r0 = divide_factored(x, tail)
    q1, r1 = divide_linear(ab_mul(q0, tinv), lam)
    tail_prod = factor_product(tail, n)
    r = r0 + ab_mul(AbOperator.from_series(r1 * t), tail_prod)
    return q1, r


class GradedOperator:
    """Operator truncated by total (a,b)-degree: terms with p+q < total_order.

    The relation ab - ba = b^2 is homogeneous, so this quotient is a ring; it
    is the only truncation in which units are invertible.
    """

    __slots__ = ("total_order", "terms")

    def __init__(self, total_order: int, terms=None):
        self.total_order = total_order
        tm = {}
        if terms:
            for (p, q), c in terms.items():
                c = rat(c)
                if c != 0 and p + q < total_order:
                    tm[(p, q)] = tm.get((p, q), ZERO) + c
        self.terms = _clean(tm)

    @staticmethod
    def one(m: int) -> "GradedOperator":
        return GradedOperator(m, {(0, 0): ONE})

    @staticmethod
    def from_ab(x: AbOperator, m: int) -> "GradedOperator":
        return GradedOperator(m, dict(x.terms))

    def to_ab(self, b_order: int) -> AbOperator:
        return AbOperator(b_order, dict(self.terms))

    def __eq__(self, other):
        return (
            isinstance(other, GradedOperator)
            and self.total_order == other.total_order
            and self.terms == other.terms
        )

    def __repr__(self):
        return f"GradedOperator(total_order={self.total_order}, {self.terms})"

    def __mul__(self, other: "GradedOperator") -> "GradedOperator":
        if self.total_order != other.total_order:
            raise OrderMismatch("total orders differ")
        m = self.total_order
        tm: dict = {}
        for (p, q), c in self.terms.items():
            for (p2, q2), d in other.terms.items():
                if p + q + p2 + q2 >= m:
                    continue
                cd = c * d
                for j in range(p2 + 1):
                    g = gamma_coeff(p2, q, j)
                    if g:
                        k = (p + p2 - j, q + q2 + j)
                        v = cd * g
                        tm[k] = tm.get(k, ZERO) + (-v if j & 1 else v)
        return GradedOperator(m, tm)


def invert_graded(x: GradedOperator) -> GradedOperator:
    """Two-sided inverse mod total degree, for x with nonzero constant term.

    Solves X*Y = 1 degree by degree:
    y_{m,n} = -(1/x_00) sum (-1)^j gamma(p',q,j) x_{p,q} y_{p',q'} over
    (p,q) != (0,0) with p+p'-j = m, q+q'+j = n.
    """
    x00 = x.terms.get((0, 0), ZERO)
    if x00 == 0:
        raise NonUnit("constant term is zero")
    m_ord = x.total_order
    inv0 = ONE / x00
    y = {(0, 0): inv0}
    for d in range(1, m_ord):
        for mm in range(d + 1):
            nn = d - mm
            acc = ZERO
            for (p, q), c in x.terms.items():
                if (p, q) == (0, 0):
                    continue
                for j in range(nn - q + 1):
                    p2 = mm + j - p
                    q2 = nn - q - j
                    if p2 < 0 or q2 < 0:
                        continue
                    yv = y.get((p2, q2))
                    if yv is None:
                        continue
                    g = gamma_coeff(p2, q, j)
                    if g:
                        v = c * yv * g
                        acc += -v if j & 1 else v
            if acc != 0:
                y[(mm, nn)] = -inv0 * acc
    return GradedOperator(m_ord, y)


def format_operator(x: AbOperator) -> str:
    """Left-normal-form pretty printer, e.g. "a^2 - 2ab + 2b^2"."""
    if not x.terms:
        return "0"
    keys = sorted(x.terms.keys(), key=lambda pq: (-pq[0], pq[1]))
    parts = []
    for p, q in keys:
        c = x.terms[(p, q)]
        mag = c if c > 0 else -c
        body = ""
        if mag != 1 or (p == 0 and q == 0):
            body += rat_str(mag)
        if p == 1:
            body += "a"
        elif p > 1:
            body += f"a^{p}"
        if q == 1:
            body += "b"
        elif q > 1:
            body += f"b^{q}"
        if not parts:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append((" + " if c > 0 else " - ") + body)
    return "".join(parts)
