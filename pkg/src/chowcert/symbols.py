"""Formal sums of symbols {t}_c over the parameter field, plus eta.

Insertion applies {0}_c = {oo}_c = 0 and {1/t}_c = {t}_c, so each
argument is stored as the canonical representative of {t, 1/t}.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .algebra import INF, RatFunc, const, format_expr, parse_expr, specialize, substitute

__all__ = ["ETA", "SymbolSum", "tcal_orbit", "symbol_term"]


class _Eta:
    __slots__ = ()

    def __repr__(self):
        return "eta"

    def __reduce__(self):
        return (_eta, ())


def _eta():
    return ETA


ETA = _Eta()


def _fold(t: RatFunc):
    """Representative of {t, 1/t}; None for 0 and oo."""
    if t is INF or t.is_zero():
        return None
    inv = t.inverse()
    k1, k2 = t.key(), inv.key()
    return t if (k1[1], k1[0]) <= (k2[1], k2[0]) else inv


def _sort_key(arg):
    return (1, ()) if arg is ETA else (0, arg.key())


class SymbolSum:
    """Map from folded argument (or ETA) to a nonzero rational coefficient."""

    __slots__ = ("_d",)

    def __init__(self, items: Iterable = ()):
        self._d = {}
        for arg, c in items:
            self._add(arg, Fraction(c))

    @classmethod
    def symbol(cls, arg, coeff=1) -> "SymbolSum":
        return cls([(arg, coeff)])

    @classmethod
    def eta(cls, coeff=1) -> "SymbolSum":
        return cls([(ETA, coeff)])

    def _add(self, arg, c: Fraction):
        if c == 0:
            return
        if arg is not ETA:
            if isinstance(arg, str):
                arg = parse_expr(arg)
            elif not isinstance(arg, RatFunc) and arg is not INF:
                arg = const(arg)
            arg = _fold(arg)
            if arg is None:
                return
        v = self._d.get(arg, 0) + c
        if v:
            self._d[arg] = v
        else:
            self._d.pop(arg, None)

    def items(self):
        return sorted(self._d.items(), key=lambda kv: _sort_key(kv[0]))

    def __iter__(self):
        return iter(self.items())

    def __len__(self):
        return len(self._d)

    def __bool__(self):
        return bool(self._d)

    def coefficient(self, arg) -> Fraction:
        if arg is ETA:
            return self._d.get(ETA, Fraction(0))
        f = _fold(arg if isinstance(arg, RatFunc) else parse_expr(str(arg)))
        return self._d.get(f, Fraction(0)) if f is not None else Fraction(0)

    def brace_terms(self):
        return [(a, c) for a, c in self.items() if a is not ETA]

    def __add__(self, other: "SymbolSum") -> "SymbolSum":
        out = SymbolSum(self._d.items())
        for a, c in other._d.items():
            out._add(a, c)
        return out

    def __neg__(self):
        return SymbolSum((a, -c) for a, c in self._d.items())

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, k) -> "SymbolSum":
        k = Fraction(k)
        return SymbolSum((a, c * k) for a, c in self._d.items())

    def __rmul__(self, k):
        return self.scaled(k)

    def __eq__(self, other):
        return isinstance(other, SymbolSum) and self._d == other._d

    def __hash__(self):
        return hash(frozenset(self._d.items()))

    def map_args(self, fn) -> "SymbolSum":
        """Apply ``fn`` to every brace argument (eta is kept)."""
        out = SymbolSum()
        for a, c in self._d.items():
            out._add(a if a is ETA else fn(a), c)
        return out

    def substitute(self, mapping: Mapping) -> "SymbolSum":
        return self.map_args(lambda a: substitute(a, mapping))

    def specialize(self, assignment: Mapping) -> "SymbolSum":
        """Evaluate every argument at ``assignment`` (poles become {oo} = 0)."""
        return self.map_args(_specializer(assignment))

    def replace_tcal(self):
        """Replace every complete T-pattern {a}+{1-a}+{1-1/a} by eta.

        Returns the new sum and a log of (representative, multiplicity).
        A pattern is complete when the three folded classes of an orbit all
        carry the same coefficient.
        """
        out = SymbolSum(self._d.items())
        log = []
        for a, _ in self.brace_terms():
            if a not in out._d:
                continue
            classes = tcal_orbit(a)
            if len(classes) != 3:
                continue
            cs = [out._d.get(x) for x in classes]
            if any(c is None for c in cs) or len(set(cs)) != 1:
                continue
            for x in classes:
                out._d.pop(x)
            out._add(ETA, cs[0])
            log.append((classes[0], cs[0]))
        return out, log

    def to_json(self):
        return [{"arg": "eta" if a is ETA else format_expr(a), "coeff": _fmt_q(c)} for a, c in self.items()]

    def __str__(self):
        if not self._d:
            return "0"
        parts = []
        for a, c in self.items():
            body = "eta" if a is ETA else "{" + format_expr(a) + "}"
            if c == 1:
                parts.append(("+", body))
            elif c == -1:
                parts.append(("-", body))
            elif c > 0:
                parts.append(("+", f"{_fmt_q(c)}{body}"))
            else:
                parts.append(("-", f"{_fmt_q(-c)}{body}"))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, b in parts[1:]:
            out += f" {s} {b}"
        return out

    __repr__ = __str__


def _fmt_q(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _specializer(assignment):
    from .algebra import PoleAtPoint

    from .algebra import ZeroDenominator, specialize_partial

    def sp(a):
        try:
            if a.free_symbols() <= set(assignment):
                return const(specialize(a, assignment))
            return specialize_partial(a, assignment)
        except (PoleAtPoint, ZeroDenominator):
            return INF
    return sp


def tcal_orbit(a: RatFunc) -> list:
    """Folded classes of {a}, {1-a}, {1-1/a} (sorted, distinct)."""
    if a.is_constant() and a.constant_value() in (0, 1):
        return []
    one = const(1)
    classes = []
    for t in (a, one - a, one - a.inverse()):
        f = _fold(t)
        if f is not None and f not in classes:
            classes.append(f)
    classes.sort(key=lambda r: r.key())
    return classes


def symbol_term(arg) -> "SymbolSum":
    return SymbolSum.symbol(arg)
