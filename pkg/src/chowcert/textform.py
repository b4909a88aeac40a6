"""Text form of cycles: ``coeff * [f1, ..., fn] params (x,y)``."""

from __future__ import annotations

from fractions import Fraction

from .algebra import ExprSyntaxError, _Parser, format_expr
from .cycles import CycleSum, CycleTerm

__all__ = ["format_cycle", "format_sum", "parse_cycle", "format_rational", "parse_rational"]


def format_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def format_cycle(t: CycleTerm | None) -> str:
    if t is None or t.coeff == 0:
        return "0"
    body = "[" + ", ".join(format_expr(f) for f in t.coords) + "] params (" + ",".join(t.params) + ")"
    if t.coeff == 1:
        return body
    if t.coeff == -1:
        return "-" + body
    return f"{format_rational(t.coeff)} * {body}"


def format_sum(s: CycleSum) -> str:
    ts = s.terms()
    if not ts:
        return "0"
    out = format_cycle(ts[0])
    for t in ts[1:]:
        if t.coeff < 0:
            out += " - " + format_cycle(t.scaled(-1))
        else:
            out += " + " + format_cycle(t)
    return out


class CycleParser(_Parser):
    """Extends the expression parser with bracket tuples."""

    def cycle(self) -> CycleTerm:
        self.skip()
        coeff = Fraction(1)
        if self.peek() == "0" and not self._bracket_ahead():
            self.pos += 1
            return None
        if self.peek() == "-":
            self.pos += 1
            coeff = -coeff
        if self.peek() != "[":
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "/"):
                self.pos += 1
            if start == self.pos:
                raise ExprSyntaxError("expected a coefficient or '['", self.text, self.pos)
            coeff *= Fraction(self.text[start:self.pos])
            self.eat("*")
        self.eat("[")
        coords = [self.expr()]
        while self.peek() == ",":
            comma = self.pos
            self.pos += 1
            if self.peek() == "]":
                raise ExprSyntaxError("dangling comma", self.text, comma)
            coords.append(self.expr())
        self.eat("]")
        params = self.params()
        return CycleTerm(coeff, params, tuple(coords))

    def _bracket_ahead(self):
        rest = self.text[self.pos + 1:].lstrip()
        return rest.startswith("*") or rest.startswith("/")

    def params(self):
        self.skip()
        if not self.text.startswith("params", self.pos):
            raise ExprSyntaxError("expected 'params'", self.text, self.pos)
        self.pos += len("params")
        self.eat("(")
        names = []
        if self.peek() != ")":
            names.append(self.name())
            while self.peek() == ",":
                self.pos += 1
                names.append(self.name())
        self.eat(")")
        return tuple(names)

    def name(self):
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        if start == self.pos:
            raise ExprSyntaxError("expected a variable name", self.text, self.pos)
        return self.text[start:self.pos]


def parse_cycle(text: str) -> CycleTerm | None:
    p = CycleParser(text)
    t = p.cycle()
    p.skip()
    if p.pos != len(text):
        raise ExprSyntaxError(f"unexpected {text[p.pos]!r}", text, p.pos)
    return t
