"""Expression grammar for operators in a and b.

    expr   := '-'? term (('+'|'-') term)*
    term   := factor ('*'? factor)*
    factor := primary ('^' nat)*
    primary:= rational | 'a' | 'b' | '(' expr ')'

Juxtaposition is the noncommutative product, applied left to right.  The
leading unary minus is an extension of the bare grammar so that the pretty
printer's output (which may start with a negative coefficient) always parses
back.
"""

from __future__ import annotations

from .errors import SyntaxErrorAt
from .operators import AbOperator, ab_mul
from .rationals import rat


class _Parser:
    def __init__(self, text: str, order: int):
        self.text = text
        self.pos = 0
        self.order = order

    def error(self, message) -> SyntaxErrorAt:
        return SyntaxErrorAt(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def parse(self) -> AbOperator:
        value = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            raise self.error(f"unexpected character {self.text[self.pos]!r}")
        return value

    def expr(self) -> AbOperator:
        negate = self.take("-")
        value = self.term()
        if negate:
            value = -value
        while True:
            if self.take("+"):
                value = value + self.term()
            elif self.take("-"):
                value = value - self.term()
            else:
                return value

    def term(self) -> AbOperator:
        value = self.factor()
        while True:
            starred = self.take("*")
            ch = self.peek()
            if ch and (ch.isdigit() or ch in "ab("):
                value = ab_mul(value, self.factor())
            elif starred:
                raise self.error("expected a factor after '*'")
            else:
                return value

    def factor(self) -> AbOperator:
        value = self.primary()
        while self.take("^"):
            self.skip_ws()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if self.pos == start:
                raise self.error("expected an exponent")
            value = value.pow(int(self.text[start : self.pos]))
        return value

    def primary(self) -> AbOperator:
        ch = self.peek()
        if ch == "a":
            self.pos += 1
            return AbOperator.a(self.order)
        if ch == "b":
            self.pos += 1
            return AbOperator.b(self.order)
        if ch == "(":
            self.pos += 1
            value = self.expr()
            if not self.take(")"):
                raise self.error("expected ')'")
            return value
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            num = self.text[start : self.pos]
            if self.pos < len(self.text) and self.text[self.pos] == "/":
                save = self.pos
                self.pos += 1
                dstart = self.pos
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
                if self.pos == dstart:
                    self.pos = save  # a '/' not followed by digits is not ours
                    return AbOperator.monomial(rat(num), 0, 0, self.order)
                return AbOperator.monomial(
                    rat(num) / rat(self.text[dstart : self.pos]), 0, 0, self.order
                )
            return AbOperator.monomial(rat(num), 0, 0, self.order)
        raise self.error("expected expression")


def parse_element(text: str, order: int) -> AbOperator:
    """Parse an expression into a left-normal-form operator mod b^order."""
    return _Parser(text, order).parse()
