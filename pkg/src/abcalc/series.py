"""Truncated power series in b with exact rational coefficients.

A TruncSeries holds exactly `order` coefficients; every arithmetic operation
is exact modulo b^order.  Operations that consume precision (derivative,
division by b) return a series of strictly smaller order, so the caller can
see how much precision survives.
"""

from __future__ import annotations

from .errors import NonUnit, OrderMismatch, PrecisionExhausted
from .rationals import ONE, ZERO, rat, rat_str

DEFAULT_ORDER = 16


class TruncSeries:
    """sum(coeffs[j] * b^j for j < order), exact mod b^order."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs=()):
        if order < 1:
            raise PrecisionExhausted("series order must be >= 1")
        cs = [rat(c) for c in coeffs]
        if len(cs) > order:
            raise ValueError("more coefficients than the order allows")
        cs.extend([ZERO] * (order - len(cs)))
        self.order = order
        self.coeffs = tuple(cs)

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(order: int) -> "TruncSeries":
        return TruncSeries(order)

    @staticmethod
    def one(order: int) -> "TruncSeries":
        return TruncSeries(order, (ONE,))

    @staticmethod
    def const(value, order: int) -> "TruncSeries":
        return TruncSeries(order, (rat(value),))

    @staticmethod
    def b_power(power: int, order: int, scale=ONE) -> "TruncSeries":
        cs = [ZERO] * order
        if power < order:
            cs[power] = rat(scale)
        return TruncSeries(order, cs)

    # -- structure ----------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_unit(self) -> bool:
        return self.coeffs[0] != 0

    def valuation(self) -> int:
        """Least j with a nonzero coefficient; equals order for the zero series."""
        for j, c in enumerate(self.coeffs):
            if c != 0:
                return j
        return self.order

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TruncSeries)
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        return f"TruncSeries(order={self.order}, {self})"

    def __str__(self):
        return format_series(self)

    def _check(self, other: "TruncSeries"):
        if self.order != other.order:
            raise OrderMismatch(f"orders {self.order} and {other.order} differ")

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        return TruncSeries(
            self.order, [x + y for x, y in zip(self.coeffs, other.coeffs)]
        )

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        self._check(other)
        return TruncSeries(
            self.order, [x - y for x, y in zip(self.coeffs, other.coeffs)]
        )

    def __neg__(self) -> "TruncSeries":
        return TruncSeries(self.order, [-x for x in self.coeffs])

    def scale(self, value) -> "TruncSeries":
        v = rat(value)
        return TruncSeries(self.order, [v * x for x in self.coeffs])

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        return series_mul(self, other)

    def shift_up(self, m: int) -> "TruncSeries":
        """Multiply by b^m (same order; top coefficients fall off)."""
        if m == 0:
            return self
        n = self.order
        return TruncSeries(n, (ZERO,) * min(m, n) + self.coeffs[: max(n - m, 0)])

    def shift_down(self, m: int, pad: bool = True) -> "TruncSeries":
        """Divide by b^m.  The input must have valuation >= m.

        With pad=True the result keeps the same order with unknown top
        coefficients set to 0 (the usual choice when the result is only used
        as a multiplier of something b-divisible); with pad=False the order
        honestly drops to order - m.
        """
        if m == 0:
            return self
        if self.valuation() < m:
            raise ValueError("series is not divisible by b^%d" % m)
        tail = self.coeffs[m:]
        if pad:
            return TruncSeries(self.order, tail + (ZERO,) * m)
        if self.order - m < 1:
            raise PrecisionExhausted("no precision left after dividing by b^%d" % m)
        return TruncSeries(self.order - m, tail)

    def truncate(self, order: int) -> "TruncSeries":
        """Restrict to a smaller (or equal) order."""
        if order > self.order:
            raise PrecisionExhausted(
                f"cannot extend order {self.order} to {order}"
            )
        return TruncSeries(order, self.coeffs[:order])

    def pad(self, order: int) -> "TruncSeries":
        """Extend with zero coefficients (declares the tail to be zero)."""
        if order < self.order:
            return self.truncate(order)
        return TruncSeries(order, self.coeffs)


def series_mul(s: TruncSeries, t: TruncSeries) -> TruncSeries:
    """Cauchy product truncated at the common order: u_j = sum s_{j-p} t_p."""
    s._check(t)
    n = s.order
    a, b = s.coeffs, t.coeffs
    out = [ZERO] * n
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j in range(n - i):
            bj = b[j]
            if bj != 0:
                out[i + j] += ai * bj
    return TruncSeries(n, out)


def series_invert(s: TruncSeries) -> TruncSeries:
    """Inverse of a unit: t_0 = 1/s_0 and t_q = -(1/s_0) sum_{j>=1} s_j t_{q-j}."""
    if not s.is_unit():
        raise NonUnit("cannot invert a series with zero constant term")
    n = s.order
    inv0 = ONE / s.coeffs[0]
    out = [ZERO] * n
    out[0] = inv0
    for q in range(1, n):
        acc = ZERO
        for j in range(1, q + 1):
            if s.coeffs[j] != 0:
                acc += s.coeffs[j] * out[q - j]
        out[q] = -inv0 * acc
    return TruncSeries(n, out)


def series_derive(s: TruncSeries) -> TruncSeries:
    """d/db; one order of precision is consumed."""
    if s.order == 1:
        raise PrecisionExhausted("cannot differentiate a series of order 1")
    return TruncSeries(
        s.order - 1, [(j + 1) * s.coeffs[j + 1] for j in range(s.order - 1)]
    )


def b2_derive(s: TruncSeries) -> TruncSeries:
    """b^2 * S'(b) at full order: coefficient of b^m is (m-1) s_{m-1}.

    Only coefficients up to s_{order-2} are consumed, so no precision is lost;
    this is the combination that appears in a(S(b)x) = S(b)ax + b^2 S'(b)x.
    """
    n = s.order
    out = [ZERO, ZERO] + [(m - 1) * s.coeffs[m - 1] for m in range(2, n)]
    return TruncSeries(n, out[:n])


def format_series(s: TruncSeries) -> str:
    """Pretty form like "1 - b + 3/2b^2"; "0" for the zero series."""
    parts = []
    for j, c in enumerate(s.coeffs):
        if c == 0:
            continue
        mag = c if c > 0 else -c
        if j == 0:
            body = rat_str(mag)
        elif j == 1:
            body = "b" if mag == 1 else rat_str(mag) + "b"
        else:
            body = f"b^{j}" if mag == 1 else f"{rat_str(mag)}b^{j}"
        if not parts:
            parts.append(body if c > 0 else "-" + body)
        else:
            parts.append((" + " if c > 0 else " - ") + body)
    return "".join(parts) if parts else "0"


def series_from_strings(items, order: int) -> TruncSeries:
    """JSON form: array of rational strings, index = b-power."""
    return TruncSeries(order, [rat(x) for x in items])


def series_to_strings(s: TruncSeries) -> list[str]:
    return [rat_str(c) for c in s.coeffs]
