"""Parametrized cycle terms, formal sums and reparametrization.

A :class:`CycleTerm` ``coeff * [f1, ..., fn] params (x, y)`` stands for the
push-forward of the parameter space under ``(x, y) -> (f1, ..., fn)``.
Sums are kept in the alternating normal form: each coordinate is oriented
(``f`` or ``1/f``), coordinates are sorted, cycle variables are renamed to
the lexicographically least labelling, and the resulting signs are folded
into the coefficient.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .algebra import (VARIABLES, RatFunc, ZeroDenominator, const, format_expr,
                      parse_expr, substitute, sym)

__all__ = [
    "CycleError", "DimensionMismatch", "NotInvertible",
    "CycleTerm", "CycleSum", "Substitution", "normalize_term", "reparametrize",
    "eq_mod_alternation", "term", "as_sum",
]


class CycleError(Exception):
    pass


class DimensionMismatch(CycleError):
    pass


class NotInvertible(CycleError):
    pass


def _as_ratfunc(f) -> RatFunc:
    if isinstance(f, RatFunc):
        return f
    if isinstance(f, str):
        return parse_expr(f)
    return const(f)


@dataclass(frozen=True)
class CycleTerm:
    coeff: Fraction
    params: tuple
    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeff", Fraction(self.coeff))
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "coords", tuple(_as_ratfunc(f) for f in self.coords))
        if len(self.params) > len(self.coords):
            raise DimensionMismatch("more cycle variables than coordinates")
        for p in self.params:
            if p not in VARIABLES:
                raise CycleError(f"{p!r} is not a cycle variable")

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def d(self) -> int:
        return len(self.params)

    def scaled(self, k) -> "CycleTerm":
        return CycleTerm(self.coeff * Fraction(k), self.params, self.coords)

    def __neg__(self):
        return self.scaled(-1)

    def with_coords(self, coords) -> "CycleTerm":
        return CycleTerm(self.coeff, self.params, tuple(coords))

    def __str__(self):
        from .textform import format_cycle
        return format_cycle(self)


def term(coords: Sequence, params: Sequence = ("x", "y"), coeff=1) -> CycleTerm:
    return CycleTerm(Fraction(coeff), tuple(params), tuple(coords))


# ---------------------------------------------------------------------------
# alternation normal form

def _orient(f: RatFunc):
    """Canonical representative of {f, 1/f} and the sign of the choice."""
    inv = f.inverse()
    if inv.key() < f.key():
        return inv, -1
    return f, 1


def _perm_sign(order) -> int:
    sign = 1
    seen = [False] * len(order)
    for i in range(len(order)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _canonical_coords(coords):
    """(sign, sorted oriented coords) or None for a vanishing term."""
    sign = 1
    out = []
    for f in coords:
        if f.is_zero():
            raise ZeroDenominator("coordinate identically zero")
        if f.is_one():
            return None
        g, s = _orient(f)
        if g == g.inverse():  # f = -1: the term equals its own negative
            return None
        sign *= s
        out.append(g)
    keys = [g.key() for g in out]
    order = sorted(range(len(out)), key=lambda i: keys[i])
    for i, j in zip(order, order[1:]):
        if keys[i] == keys[j]:
            return None
    sign *= _perm_sign(order)
    return sign, tuple(out[i] for i in order)


_STD = VARIABLES


def _relabel(coords, mapping):
    return tuple(substitute(f, mapping) for f in coords)


def normalize_term(t: CycleTerm):
    """Canonical term equal to ``t`` under alternation, or ``None`` if zero.

    The returned term uses the cycle variables ``x, y, z`` (in that order)
    and absorbs all signs into its coefficient.
    """
    if t.coeff == 0:
        return None
    best = None
    std = _STD[: t.d]
    for perm in itertools.permutations(std):
        mapping = {p: sym(q) for p, q in zip(t.params, perm)}
        coords = _relabel(t.coords, mapping)
        res = _canonical_coords(coords)
        if res is None:
            return None
        sign, cs = res
        key = tuple(f.key() for f in cs)
        if best is None or key < best[0]:
            best = (key, sign, cs)
        elif key == best[0] and sign != best[1]:
            return None
    _, sign, cs = best
    return CycleTerm(t.coeff * sign, std, cs)


def canonical_key(t: CycleTerm):
    """(key, signed coefficient) of the normal form, or None."""
    nt = normalize_term(t)
    if nt is None:
        return None
    return (nt.params, nt.coords), nt.coeff


# ---------------------------------------------------------------------------

class CycleSum:
    """Formal rational combination of canonical terms."""

    __slots__ = ("_terms", "_shape")

    def __init__(self, terms: Iterable = ()):
        self._terms: dict = {}
        self._shape = None
        for t in terms:
            self._add_term(t)

    @classmethod
    def _from_dict(cls, d, shape):
        s = cls.__new__(cls)
        s._terms = d
        s._shape = shape if d else None
        return s

    def _add_term(self, t: CycleTerm):
        ck = canonical_key(t)
        if ck is None:
            return
        key, c = ck
        shape = (t.n, t.d)
        if self._shape is None:
            self._shape = shape
        elif self._shape != shape:
            raise DimensionMismatch(f"cannot add a {shape} term to a {self._shape} sum")
        v = self._terms.get(key, 0) + c
        if v:
            self._terms[key] = v
        else:
            del self._terms[key]
        if not self._terms:
            self._shape = None

    @property
    def shape(self):
        return self._shape

    def __bool__(self):
        return bool(self._terms)

    def __len__(self):
        return len(self._terms)

    def items(self):
        return sorted(self._terms.items(), key=lambda kv: tuple(f.key() for f in kv[0][1]))

    def terms(self):
        return [CycleTerm(c, p, cs) for (p, cs), c in self.items()]

    def coefficient(self, t: CycleTerm) -> Fraction:
        ck = canonical_key(t)
        if ck is None:
            return Fraction(0)
        key, c = ck
        return self._terms.get(key, Fraction(0)) / c * t.coeff

    def __add__(self, other):
        other = as_sum(other)
        if self._shape and other._shape and self._shape != other._shape:
            raise DimensionMismatch(f"{self._shape} vs {other._shape}")
        d = dict(self._terms)
        for k, c in other._terms.items():
            v = d.get(k, 0) + c
            if v:
                d[k] = v
            else:
                d.pop(k, None)
        return CycleSum._from_dict(d, self._shape or other._shape)

    __radd__ = __add__

    def scaled(self, k):
        k = Fraction(k)
        if k == 0:
            return CycleSum()
        return CycleSum._from_dict({key: c * k for key, c in self._terms.items()}, self._shape)

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-as_sum(other))

    def __rsub__(self, other):
        return as_sum(other) - self

    def __rmul__(self, k):
        return self.scaled(k)

    __mul__ = __rmul__

    def __eq__(self, other):
        if isinstance(other, (CycleSum, CycleTerm)):
            return not (self - as_sum(other))
        if other == 0:
            return not self
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def map_terms(self, fn):
        """Apply ``fn: CycleTerm -> CycleTerm | CycleSum`` termwise."""
        out = CycleSum()
        for t in self.terms():
            out = out + as_sum(fn(t))
        return out

    def __repr__(self):
        from .textform import format_sum
        return f"CycleSum({format_sum(self)!r})"


def as_sum(x) -> CycleSum:
    if isinstance(x, CycleSum):
        return x
    if isinstance(x, CycleTerm):
        return CycleSum([x])
    if isinstance(x, (list, tuple)):
        out = CycleSum()
        for t in x:
            out = out + as_sum(t)
        return out
    if x == 0:
        return CycleSum()
    raise TypeError(f"cannot interpret {x!r} as a cycle sum")


def add(s1, s2) -> CycleSum:
    return as_sum(s1) + as_sum(s2)


def eq_mod_alternation(s1, s2) -> bool:
    return not (as_sum(s1) - as_sum(s2))


# ---------------------------------------------------------------------------

class Substitution:
    """A simultaneous substitution of symbols by rational functions.

    ``inverse``, when given, is checked to compose to the identity on every
    mapped symbol. ``degree`` records the generic degree of a finite
    (non-invertible) map of the cycle variables.
    """

    def __init__(self, mapping: Mapping, inverse: Mapping | None = None, *, name: str = "",
                 degree: int | None = None):
        self.mapping = {k: _as_ratfunc(v) for k, v in mapping.items()}
        self.name = name
        self.inverse_mapping = None
        if inverse is not None:
            inv = {k: _as_ratfunc(v) for k, v in inverse.items()}
            for s in self.mapping:
                if substitute(substitute(sym(s), self.mapping), inv) != sym(s):
                    raise NotInvertible(f"{name or 'substitution'} does not invert on {s}")
                if substitute(substitute(sym(s), inv), self.mapping) != sym(s):
                    raise NotInvertible(f"{name or 'substitution'} does not invert on {s}")
            self.inverse_mapping = inv
        self.degree = 1 if inverse is not None else degree

    @classmethod
    def involution(cls, mapping, name=""):
        return cls(mapping, mapping, name=name)

    @classmethod
    def mobius(cls, mapping, name=""):
        """Per-variable fractional linear maps; inverses computed exactly."""
        inv = {}
        for v, f in mapping.items():
            f = _as_ratfunc(f)
            inv[v] = _mobius_inverse(f, v)
        return cls(mapping, inv, name=name)

    @classmethod
    def per_variable(cls, mapping, name=""):
        """Product of one-variable maps ``v -> f_v(v)`` of finite degree."""
        deg = 1
        for v, f in mapping.items():
            f = _as_ratfunc(f)
            if f.free_symbols() & set(VARIABLES) - {v}:
                raise NotInvertible(f"image of {v} involves other cycle variables")
            deg *= f.degree(v)
        if deg == 1:
            return cls.mobius(mapping, name=name)
        return cls(mapping, name=name, degree=deg)

    @property
    def invertible(self) -> bool:
        return self.inverse_mapping is not None

    def inverse(self) -> "Substitution":
        if self.inverse_mapping is None:
            raise NotInvertible(self.name or "substitution")
        return Substitution(self.inverse_mapping, self.mapping, name=f"{self.name}^-1")

    def __call__(self, f: RatFunc) -> RatFunc:
        return substitute(f, self.mapping)

    def apply_term(self, t: CycleTerm) -> CycleTerm:
        return t.with_coords(self(f) for f in t.coords)

    def then(self, other: "Substitution") -> "Substitution":
        """``other`` after ``self`` (first self, then other)."""
        comp = {}
        keys = set(self.mapping) | set(other.mapping)
        for k in keys:
            comp[k] = other(self(sym(k)))
        inv = None
        if self.invertible and other.invertible:
            inv = {}
            for k in keys:
                inv[k] = self.inverse()(other.inverse()(sym(k)))
        return Substitution(comp, inv, name=f"{other.name}*{self.name}")

    def __repr__(self):
        body = ", ".join(f"{k} -> {format_expr(v)}" for k, v in sorted(self.mapping.items()))
        return f"Substitution({self.name or ''}: {body})"


def _mobius_inverse(f: RatFunc, v: str) -> RatFunc:
    from .algebra import poly_coeffs, RING
    if f.degree(v) != 1:
        raise NotInvertible(f"{format_expr(f)} is not fractional linear in {v}")
    n, d = poly_coeffs(f.num, v), poly_coeffs(f.den, v)
    a1, a0 = n.get(1, RING.zero), n.get(0, RING.zero)
    c1, c0 = d.get(1, RING.zero), d.get(0, RING.zero)
    # w = (a1 v + a0)/(c1 v + c0)  =>  v = (c0 w - a0)/(a1 - c1 w)
    w = sym(v)
    A1, A0, C1, C0 = (RatFunc(p) for p in (a1, a0, c1, c0))
    if (A1 * C0 - A0 * C1).is_zero():
        raise NotInvertible("degenerate fractional linear map")
    return (C0 * w - A0) / (A1 - C1 * w)


def reparametrize(t: CycleTerm, sigma: Substitution) -> CycleTerm:
    """The same cycle written in new cycle variables.

    For an invertible ``sigma`` the coefficient is unchanged; for a finite
    map of degree ``k`` the coordinates are pulled back and the coefficient
    divided by ``k``.
    """
    if sigma.degree is None:
        raise NotInvertible(f"{sigma.name or 'substitution'} has no certified degree")
    if set(sigma.mapping) - set(t.params):
        raise NotInvertible("substitution touches symbols that are not cycle variables of the term")
    new = sigma.apply_term(t)
    if sigma.degree != 1:
        new = new.scaled(Fraction(1, sigma.degree))
    return new
