"""Exact arithmetic kernel.

Polynomials live in one global sparse ring over QQ (graded lexicographic
order over ``SYMBOLS``); :class:`RatFunc` is a reduced fraction of two such
polynomials with a monic denominator, so structural equality decides
equality of values.

Field parameters (``a b c s t u v``) are treated as independent
transcendentals: a polynomial in them alone is a nonzero constant unless it
is identically zero.
"""

from __future__ import annotations

import itertools
from math import gcd as _gcd_int
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import flint
from sympy import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import ring

__all__ = [
    "SYMBOLS", "PARAMETERS", "VARIABLES", "RING", "INF",
    "AlgebraError", "ZeroDenominator", "PoleAtPoint", "UnboundSymbol",
    "UnsupportedLocus", "ExprSyntaxError",
    "RatFunc", "MobiusBranch", "normalize_ratfunc", "poly_gcd", "poly_sqrt",
    "solve_branches", "substitute", "specialize", "restrict", "parse_expr",
    "format_expr", "sym", "const", "is_inf",
]

PARAMETERS = ("a", "b", "c", "s", "t", "u", "v")
VARIABLES = ("x", "y", "z")
SYMBOLS = PARAMETERS + VARIABLES

RING, *_GENS = ring(",".join(SYMBOLS), QQ, grlex)
_GEN = dict(zip(SYMBOLS, _GENS))
_INDEX = {s: i for i, s in enumerate(SYMBOLS)}
_FCTX = flint.fmpz_mpoly_ctx.get(SYMBOLS, "deglex")


def _to_flint(p):
    """Integer-coefficient copy of ``p`` (content cleared) for fast gcds."""
    den = 1
    for c in p.values():
        den = den * int(c.denominator) // _gcd_int(den, int(c.denominator))
    return _FCTX.from_dict({m: int(c.numerator) * (den // int(c.denominator)) for m, c in p.items()})


def _from_flint(f):
    return RING.from_dict({tuple(map(int, m)): QQ(int(c)) for m, c in zip(f.monoms(), f.coeffs())})


def _flint_gcd(p, q):
    return _from_flint(_to_flint(p).gcd(_to_flint(q)))


class AlgebraError(Exception):
    pass


class ZeroDenominator(AlgebraError, ZeroDivisionError):
    pass


class PoleAtPoint(AlgebraError):
    pass


class UnboundSymbol(AlgebraError):
    pass


class UnsupportedLocus(AlgebraError):
    """A locus does not split into rational branches."""


class ExprSyntaxError(AlgebraError, SyntaxError):
    def __init__(self, msg, text="", pos=0):
        super().__init__(f"{msg} at column {pos + 1}")
        self.text = text
        self.pos = pos


class _Infinity:
    __slots__ = ()

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_inf, ())


def _inf():
    return INF


INF = _Infinity()


def is_inf(value) -> bool:
    return value is INF


# ---------------------------------------------------------------------------
# polynomial helpers

def _poly_key(p):
    return tuple((sum(m), m, (int(c.numerator), int(c.denominator)))
                 for m, c in p.terms())


def poly_vars(p) -> frozenset:
    """Symbols occurring in ``p``."""
    seen = [False] * len(SYMBOLS)
    for m in p.itermonoms():
        for i, e in enumerate(m):
            if e:
                seen[i] = True
    return frozenset(s for s, f in zip(SYMBOLS, seen) if f)


def poly_degree(p, var: str) -> int:
    if not p:
        return -1
    return p.degree(_GEN[var])


def poly_coeffs(p, var: str) -> dict:
    """Coefficients of ``p`` as a polynomial in ``var``: {power: poly}."""
    i = _INDEX[var]
    out = {}
    for m, c in p.terms():
        k = m[i]
        mm = m[:i] + (0,) + m[i + 1:]
        out.setdefault(k, {})[mm] = c
    return {k: RING.from_dict(d) for k, d in out.items()}


def poly_gcd(p, q):
    """Monic greatest common divisor (``gcd(0, 0) = 0``)."""
    if not p and not q:
        return RING.zero
    if not p or not q:
        g = p or q
        return g.monic()
    return _flint_gcd(p, q).monic()


def poly_sqrt(p):
    """Return ``q`` with ``q**2 == p`` (monic up to the constant), or ``None``."""
    if not p:
        return RING.zero
    lc, factors = p.sqf_list()
    lc = Fraction(int(lc.numerator), int(lc.denominator))
    root = _rational_sqrt(lc)
    if root is None:
        return None
    q = RING(QQ(root.numerator, root.denominator))
    for f, e in factors:
        if e % 2:
            return None
        q *= f ** (e // 2)
    return q


def _rational_sqrt(r: Fraction):
    if r < 0:
        return None
    from math import isqrt
    n, d = r.numerator, r.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def factor_poly(p):
    """Irreducible factors of ``p`` over QQ: (constant, [(factor, exp)])."""
    lc, facs = p.factor_list()
    return lc, facs


# ---------------------------------------------------------------------------

class RatFunc:
    """Normalized rational function ``num/den`` over QQ.

    Built through :func:`normalize_ratfunc`; instances are immutable.
    """

    __slots__ = ("num", "den", "_hash", "_key")

    def __init__(self, num, den=None, *, _normalized=False):
        if den is None:
            den = RING.one
        if not _normalized:
            num, den = _normalize(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_key", None)

    def __setattr__(self, name, value):
        raise AttributeError("RatFunc is immutable")

    # -- identity
    def key(self) -> tuple:
        if self._key is None:
            object.__setattr__(self, "_key", (_poly_key(self.num), _poly_key(self.den)))
        return self._key

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.key()))
        return self._hash

    def __eq__(self, other):
        if not isinstance(other, RatFunc):
            if isinstance(other, (int, Fraction)):
                other = const(other)
            else:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __lt__(self, other):
        return self.key() < other.key()

    def __reduce__(self):
        return (parse_expr, (format_expr(self),))

    # -- arithmetic
    @staticmethod
    def _coerce(other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, (int, Fraction)):
            return const(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _normalized=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if not self.num:
            raise ZeroDenominator("inverse of zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RatFunc(self.num ** n, self.den ** n, _normalized=True)

    # -- queries
    def is_zero(self) -> bool:
        return not self.num

    def is_one(self) -> bool:
        return self.num == self.den

    def free_symbols(self) -> frozenset:
        return poly_vars(self.num) | poly_vars(self.den)

    def depends_on(self, names) -> bool:
        names = set(names)
        return bool(self.free_symbols() & names)

    def is_constant(self) -> bool:
        return self.num.is_ground and self.den.is_ground

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("not a constant")
        c = self.num.LC if self.num else 0
        return Fraction(int(QQ(c).numerator), int(QQ(c).denominator)) if self.num else Fraction(0)

    def degree(self, var: str) -> int:
        """Degree of the map in ``var``: max of numerator/denominator degrees."""
        return max(poly_degree(self.num, var), poly_degree(self.den, var))

    def __repr__(self):
        return f"RatFunc({format_expr(self)!r})"

    def __str__(self):
        return format_expr(self)


def _normalize(num, den):
    if not den:
        raise ZeroDenominator("zero denominator")
    if not num:
        return RING.zero, RING.one
    if not den.is_ground:
        g = _flint_gcd(num, den)
        if not g.is_ground:
            num = num.exquo(g)
            den = den.exquo(g)
    lc = den.LC
    if lc != 1:
        num = num.quo_ground(lc)
        den = den.quo_ground(lc)
    return num, den


def normalize_ratfunc(num, den=None) -> RatFunc:
    """Reduced representative of ``num/den`` with monic denominator.

    Raises :class:`ZeroDenominator` when ``den`` is zero.
    """
    if isinstance(num, RatFunc) or isinstance(den, RatFunc):
        num = num if isinstance(num, RatFunc) else RatFunc(num)
        den = RatFunc(RING.one) if den is None else (den if isinstance(den, RatFunc) else RatFunc(den))
        if den.is_zero():
            raise ZeroDenominator("zero denominator")
        return num / den
    return RatFunc(num, den)


@lru_cache(maxsize=None)
def sym(name: str) -> RatFunc:
    if name not in _GEN:
        raise UnboundSymbol(name)
    return RatFunc(_GEN[name], RING.one, _normalized=True)


def const(value) -> RatFunc:
    if not isinstance(value, (int, Fraction, str)) and hasattr(value, "denominator"):
        value = Fraction(int(value.numerator), int(value.denominator))
    value = Fraction(value)
    return RatFunc(RING(QQ(value.numerator, value.denominator)), RING.one, _normalized=True)


ZERO = None  # filled below
ONE = None


# ---------------------------------------------------------------------------
# substitution

def _subs_poly(p, images: dict):
    """Evaluate polynomial ``p`` at rational images.

    ``images`` maps symbol -> RatFunc. Returns (num, den) polynomials with
    den a product of image-denominator powers (not reduced).
    """
    idx = [(_INDEX[s], s) for s in images]
    degs = {s: poly_degree(p, s) for _, s in idx}
    pw_num = {}
    pw_den = {}

    def pnum(s, k):
        key = (s, k)
        if key not in pw_num:
            pw_num[key] = images[s].num ** k
        return pw_num[key]

    def pden(s, k):
        key = (s, k)
        if key not in pw_den:
            pw_den[key] = images[s].den ** k
        return pw_den[key]

    total = RING.zero
    for m, c in p.terms():
        mm = list(m)
        term = RING.one
        for i, s in idx:
            k = m[i]
            mm[i] = 0
            d = max(degs[s], 0)
            if k:
                term = term * pnum(s, k)
            if d - k:
                term = term * pden(s, d - k)
        total += term * RING({tuple(mm): c})
    den = RING.one
    for _, s in idx:
        d = max(degs[s], 0)
        if d:
            den = den * pden(s, d)
    return total, den


def substitute(f: RatFunc, mapping: dict) -> RatFunc:
    """Simultaneously substitute symbols by rational functions.

    Raises :class:`ZeroDenominator` if the result has an identically
    vanishing denominator.
    """
    mapping = {k: (v if isinstance(v, RatFunc) else const(v) if not isinstance(v, str) else parse_expr(v))
               for k, v in mapping.items()}
    mapping = {k: v for k, v in mapping.items() if v != sym(k)}
    names = f.free_symbols()
    mapping = {k: v for k, v in mapping.items() if k in names}
    if not mapping:
        return f
    nn, nd = _subs_poly(f.num, mapping)
    dn, dd = _subs_poly(f.den, mapping)
    # f = (nn/nd) / (dn/dd)
    if not dn:
        raise ZeroDenominator("denominator vanishes identically after substitution")
    return RatFunc(nn * dd, nd * dn)


def restrict(f: RatFunc, var: str, value):
    """Value of ``f`` on the hyperplane ``var = value``.

    ``value`` is a RatFunc free of ``var`` or ``INF``. Returns a RatFunc or
    ``INF`` (the generic value along the hyperplane).
    """
    if var not in f.free_symbols():
        return f
    if value is not INF and not isinstance(value, RatFunc):
        value = const(value)
    if value is INF:
        dn, dd = poly_degree(f.num, var), poly_degree(f.den, var)
        if dn > dd:
            return INF
        if dn < dd:
            return RatFunc(RING.zero)
        cn = poly_coeffs(f.num, var)[dn]
        cd = poly_coeffs(f.den, var)[dd]
        return RatFunc(cn, cd)
    nn, nd = _subs_poly(f.num, {var: value})
    dn, dd = _subs_poly(f.den, {var: value})
    if not dn:
        if not nn:
            raise AlgebraError("indeterminate restriction")
        return INF
    return RatFunc(nn * dd, nd * dn)


def specialize(f: RatFunc, assignment: dict) -> Fraction:
    """Exact value of ``f`` at a rational point covering its symbols."""
    missing = f.free_symbols() - set(assignment)
    if missing:
        raise UnboundSymbol(", ".join(sorted(missing)))
    vals = [QQ(0)] * len(SYMBOLS)
    for s, q in assignment.items():
        if s in _INDEX:
            q = Fraction(q)
            vals[_INDEX[s]] = QQ(q.numerator, q.denominator)
    d = _eval_poly(f.den, vals)
    if d == 0:
        raise PoleAtPoint(f"{format_expr(f)} has a pole at {assignment}")
    n = _eval_poly(f.num, vals)
    r = QQ(n) / QQ(d)
    return Fraction(int(r.numerator), int(r.denominator))


def _eval_poly(p, vals):
    total = QQ(0)
    for m, c in p.terms():
        t = c
        for e, v in zip(m, vals):
            if e:
                t *= v ** e
        total += t
    return total


def specialize_partial(f: RatFunc, assignment: dict) -> RatFunc:
    """Substitute rational numbers for some symbols."""
    return substitute(f, {k: const(v) for k, v in assignment.items()})


# ---------------------------------------------------------------------------
# branches

@dataclass(frozen=True)
class MobiusBranch:
    """A solution ``var = expression`` of a polynomial equation."""

    var: str
    expression: RatFunc
    multiplicity: int = 1

    def is_constant_in(self, variables) -> bool:
        return not self.expression.depends_on(variables)


def solve_linear(p, var: str) -> RatFunc:
    cs = poly_coeffs(p, var)
    return RatFunc(-cs.get(0, RING.zero), cs[1])


def solve_branches(p, var: str) -> list:
    """All branches ``var = r`` of ``p = 0``.

    Factors free of ``var`` are ignored (they describe no branch in ``var``).
    Degree-2 factors are split by an exact square root of the discriminant.
    Raises :class:`UnsupportedLocus` when a factor has no rational branches.
    """
    if not p:
        raise UnsupportedLocus("zero polynomial")
    out = []
    _, sqf = p.sqf_list()
    for f, e in sqf:
        d = poly_degree(f, var)
        if d <= 0:
            continue
        for g in _split_var(f, var):
            dg = poly_degree(g, var)
            if dg == 1:
                out.append(MobiusBranch(var, solve_linear(g, var), e))
            elif dg == 2:
                cs = poly_coeffs(g, var)
                a2, a1, a0 = cs[2], cs.get(1, RING.zero), cs.get(0, RING.zero)
                disc = a1 * a1 - 4 * a2 * a0
                r = poly_sqrt(disc)
                if r is None:
                    raise UnsupportedLocus(f"irreducible quadratic in {var}: {format_poly(g)}")
                for sgn in (1, -1):
                    out.append(MobiusBranch(var, RatFunc(-a1 + sgn * r, 2 * a2), e))
            else:
                raise UnsupportedLocus(f"degree {dg} factor in {var}: {format_poly(g)}")
    out.sort(key=lambda br: br.expression.key())
    return out


def _split_var(f, var):
    d = poly_degree(f, var)
    if d <= 2:
        return [f]
    # cubic and higher: fall back to full factorization
    _, facs = f.factor_list()
    res = []
    for g, e in facs:
        if poly_degree(g, var) > 0:
            res.extend([g] * e)
    return res


# ---------------------------------------------------------------------------
# text form

_TOKEN_SYMBOLS = set(SYMBOLS)


def parse_expr(text: str) -> RatFunc:
    """Parse ``+ - * / ^`` expressions over integers and the symbol set."""
    p = _Parser(text)
    value = p.expr()
    p.skip()
    if p.pos != len(text):
        raise ExprSyntaxError(f"unexpected {text[p.pos]!r}", text, p.pos)
    return value


class _Parser:
    def __init__(self, text, pos=0):
        self.text = text
        self.pos = pos

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def eat(self, ch):
        if self.peek() != ch:
            raise ExprSyntaxError(f"expected {ch!r}", self.text, self.pos)
        self.pos += 1

    def expr(self):
        value = self.term()
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                if rhs.is_zero():
                    raise ZeroDenominator("division by zero")
                value = value / rhs
        return value

    def unary(self):
        if self.peek() == "-":
            self.pos += 1
            return -self.unary()
        if self.peek() == "+":
            self.pos += 1
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            neg = False
            if self.peek() == "-":
                self.pos += 1
                neg = True
            self.skip()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                raise ExprSyntaxError("expected integer exponent", self.text, self.pos)
            n = int(self.text[start:self.pos])
            if neg:
                if base.is_zero():
                    raise ZeroDenominator("zero to a negative power")
                n = -n
            base = base ** n
        return base

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            value = self.expr()
            self.eat(")")
            return value
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return const(int(self.text[start:self.pos]))
        if ch.isalpha():
            start = self.pos
            while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
                self.pos += 1
            name = self.text[start:self.pos]
            if name not in _TOKEN_SYMBOLS:
                raise ExprSyntaxError(f"unknown symbol {name!r}", self.text, start)
            return sym(name)
        raise ExprSyntaxError("expected an operand" if ch else "unexpected end of input", self.text, self.pos)


def _fmt_coeff(c) -> str:
    c = QQ(c)
    n, d = int(c.numerator), int(c.denominator)
    return str(n) if d == 1 else f"{n}/{d}"


def format_poly(p) -> str:
    if not p:
        return "0"
    parts = []
    for m, c in p.terms():
        mon = "*".join(s if e == 1 else f"{s}^{e}" for s, e in zip(SYMBOLS, m) if e)
        c = QQ(c)
        neg = c < 0
        a = -c if neg else c
        if mon:
            body = mon if a == 1 else f"{_fmt_coeff(a)}*{mon}"
        else:
            body = _fmt_coeff(a)
        parts.append((neg, body))
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        out += (" - " if neg else " + ") + body
    return out


def _is_monomial(p) -> bool:
    return len(p) == 1


def _fmt_plain(f: RatFunc) -> str:
    num = format_poly(f.num)
    if f.den == RING.one:
        return num
    if not _is_monomial(f.num) or (f.num.LC < 0 and not f.num.is_ground):
        num = f"({num})"
    elif f.num.is_ground and QQ(f.num.LC).denominator != 1:
        num = f"({num})"
    den = format_poly(f.den)
    if not _is_monomial(f.den) or "*" in den:
        den = f"({den})"
    return f"{num}/{den}"


def format_expr(f: RatFunc) -> str:
    """Readable text with ``parse_expr(format_expr(f)) == f``."""
    plain = _fmt_plain(f)
    if not f.is_constant():
        g = 1 - f
        if _is_monomial(g.num) and len(g.num) + len(g.den) < len(f.num) + len(f.den):
            body = _fmt_plain(g)
            if QQ(g.num.LC) < 0:
                return "1 + " + _fmt_plain(-g)
            return "1 - " + body
    return plain


ZERO = RatFunc(RING.zero)
ONE = RatFunc(RING.one)
