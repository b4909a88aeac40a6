"""Face restriction, boundary and the admissibility classifiers.

A term ``[f1..fn] params P`` is the push-forward of ``(P^1)^d``.  Its
intersection with a face ``t_i = 0`` (or ``oo``) is the push-forward of the
divisor of ``f_i`` on a resolution of the coordinate map, so the prime
divisors we enumerate are

* components of the zero/pole sets of the coordinates (branches),
* the hyperplanes ``v = oo``,
* exceptional curves over base points (two cycle variables), found by
  iterated point blow-ups in affine charts.

Components on which some other coordinate is identically 1 lie outside the
cube and contribute nothing; components whose image has lower dimension
push forward to zero.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .algebra import (INF, RING, VARIABLES, AlgebraError, PoleAtPoint, RatFunc,
                      UnsupportedLocus, const, format_expr, poly_coeffs, poly_gcd,
                      poly_degree, poly_vars, restrict, solve_linear,
                      specialize, substitute, sym, SYMBOLS)
from .cycles import CycleSum, CycleTerm, as_sum

__all__ = [
    "Face", "ImproperFace", "AdmissibilityReport", "Finding", "Divisor",
    "prime_divisors", "face_restrict", "boundary", "is_admissible",
    "is_negligible", "NEGLIGIBLE_PATTERNS", "face_components", "is_degenerate", "generic_rank",
]

MAX_BLOWUP_DEPTH = 6


class ImproperFace(AlgebraError):
    """A face meets the cycle in excess dimension."""


@dataclass(frozen=True)
class Face:
    index: int  # 1-based
    value: str  # "0" or "inf"

    def __post_init__(self):
        if self.value not in ("0", "inf"):
            raise ValueError("face value must be '0' or 'inf'")
        if self.index < 1:
            raise ValueError("face index is 1-based")

    def __str__(self):
        return f"t{self.index}={'0' if self.value == '0' else 'oo'}"


@dataclass(frozen=True)
class Divisor:
    """A prime divisor of a (resolved) parameter space.

    ``values`` are the coordinates restricted to the divisor (RatFunc or
    INF); ``orders`` the order of each coordinate along it.
    """

    params: tuple
    values: tuple
    orders: tuple
    origin: str


# ---------------------------------------------------------------------------
# factor bookkeeping

@lru_cache(maxsize=200_000)
def _factors(p) -> tuple:
    """Monic irreducible factors of ``p`` involving cycle variables."""
    if p.is_ground:
        return ()
    _, facs = p.factor_list()
    out = []
    for f, e in facs:
        if poly_vars(f) & set(VARIABLES):
            out.append((f.monic(), e))
    return tuple(out)


def _order_of(f: RatFunc, q) -> int:
    o = 0
    for g, e in _factors(f.num):
        if g == q:
            o += e
    for g, e in _factors(f.den):
        if g == q:
            o -= e
    return o


def _order_at_infinity(f: RatFunc, v: str) -> int:
    return poly_degree(f.den, v) - poly_degree(f.num, v)


def _valuation(p, v: str) -> int:
    i = SYMBOLS.index(v)
    return min(m[i] for m in p.itermonoms()) if p else 0


def _order_along_zero(f: RatFunc, v: str) -> int:
    return _valuation(f.num, v) - _valuation(f.den, v)


def _solve_var(q, params):
    """Variable to solve the factor ``q`` for (last linear one)."""
    cands = [v for v in reversed(params) if poly_degree(q, v) == 1]
    if not cands:
        raise UnsupportedLocus(f"component {_fmt_poly(q)} is not linear in any cycle variable")
    # prefer a solution without a denominator in the other variables
    for v in cands:
        c1 = poly_coeffs(q, v)[1]
        if not (poly_vars(c1) & set(params)):
            return v
    return cands[0]


def _fmt_poly(p):
    from .algebra import format_poly
    return format_poly(p)


def _restrict_all(values, v, value):
    out = []
    for f in values:
        if f is INF:
            out.append(INF)
        elif isinstance(f, RatFunc):
            out.append(restrict(f, v, value))
        else:
            out.append(f)
    return tuple(out)


def _finite(values):
    return [f for f in values if isinstance(f, RatFunc)]


# ---------------------------------------------------------------------------
# prime divisors

def prime_divisors(coords, params) -> list:
    """All prime divisors along which some coordinate has nonzero order."""
    return list(_prime_divisors(tuple(coords), tuple(params)))


@lru_cache(maxsize=50_000)
def _prime_divisors(coords, params):
    out = []
    if not params:
        return ()
    pset = set(params)
    facs = []
    seen = set()
    for f in coords:
        for p in (f.num, f.den):
            for q, _ in _factors(p):
                if q not in seen and poly_vars(q) & pset:
                    seen.add(q)
                    facs.append(q)
    facs.sort(key=lambda q: (len(q), q.degree(), str(q)))
    for q in facs:
        v = _solve_var(q, params)
        r = solve_linear(q, v)
        orders = tuple(_order_of(f, q) for f in coords)
        values = _restrict_all(coords, v, r)
        rest = tuple(p for p in params if p != v)
        out.append(Divisor(rest, values, orders, f"{v}={format_expr(r)}"))
    for v in params:
        orders = tuple(_order_at_infinity(f, v) for f in coords)
        if any(orders):
            values = _restrict_all(coords, v, INF)
            rest = tuple(p for p in params if p != v)
            out.append(Divisor(rest, values, orders, f"{v}=oo"))
    if len(params) == 2:
        out.extend(_exceptional_2d(coords, params))
    elif len(params) > 2:
        out.extend(_exceptional_3d(coords, params))
    return tuple(out)


# -- two variables: base points and blow-ups

def _chart_maps(params):
    for flags in itertools.product((False, True), repeat=len(params)):
        mapping = {v: sym(v).inverse() for v, f in zip(params, flags) if f}
        yield tuple(v for v, f in zip(params, flags) if f), mapping


def _apply(coords, mapping):
    if not mapping:
        return coords
    return tuple(substitute(f, mapping) for f in coords)


def _root_values(g: RatFunc, w: str):
    """Finite roots in ``w`` of a one-variable (over the field) function."""
    roots = []
    for q, _ in _factors(g.num):
        if w not in poly_vars(q):
            continue
        if poly_degree(q, w) != 1:
            raise UnsupportedLocus(f"non-rational base point on {_fmt_poly(q)}")
        roots.append(solve_linear(q, w))
    return roots


def _base_points(coords, params):
    """Affine points where some coordinate is 0/0."""
    v, w = params
    pts = []
    seen = set()
    for f in coords:
        if not (poly_vars(f.num) & set(params)) or not (poly_vars(f.den) & set(params)):
            continue
        for q, _ in _factors(f.num):
            if not poly_vars(q) & set(params):
                continue
            sv = _solve_var(q, params)
            ow = w if sv == v else v
            r = solve_linear(q, sv)
            dres = restrict(RatFunc(f.den), sv, r)
            if dres is INF:
                continue
            for w0 in _root_values(dres, ow):
                r0 = restrict(r, ow, w0)
                if r0 is INF:
                    continue
                pt = {sv: r0, ow: w0}
                key = (pt[v], pt[w])
                if key not in seen:
                    seen.add(key)
                    pts.append(key)
    pts.sort(key=lambda p: (p[0].key(), p[1].key()))
    return pts


def _exceptional_2d(coords, params):
    out = []
    v, w = params
    for at_inf, mapping in _chart_maps(params):
        chart = _apply(coords, mapping)
        for p in _base_points(chart, params):
            pv, pw = p
            if any(not (pv if u == v else pw).is_zero() for u in at_inf):
                continue
            label = f"({'1/' if v in at_inf else ''}{v},{'1/' if w in at_inf else ''}{w})=({format_expr(pv)},{format_expr(pw)})"
            out.extend(_blowup_point(chart, params, pv, pw, label, 0))
    return out


def _blowup_point(chart, params, pv, pw, label, depth):
    if depth > MAX_BLOWUP_DEPTH:
        raise UnsupportedLocus(f"base point {label} not resolved after {MAX_BLOWUP_DEPTH} blow-ups")
    v, w = params
    out = []
    # chart 1: v = pv + w*v, w = pw + w ; exceptional curve w = 0 with slope v
    m1 = {v: const(0) + pv + sym(w) * sym(v), w: pw + sym(w)}
    c1 = _apply(chart, m1)
    orders = tuple(_order_along_zero(f, w) for f in c1)
    values = _restrict_all(c1, w, RatFunc(RING.zero))
    if any(orders):
        out.append(Divisor((v,), values, orders, f"E[{label}]"))
    for qv in _points_on_exceptional(c1, w, v):
        out.extend(_blowup_point(c1, params, qv, RatFunc(RING.zero),
                                 f"{label}/{v}={format_expr(qv)}", depth + 1))
    # chart 2 covers the remaining point (slope oo) of the exceptional curve
    m2 = {v: pv + sym(v), w: pw + sym(v) * sym(w)}
    c2 = _apply(chart, m2)
    if any(q.is_zero() for q in _points_on_exceptional(c2, v, w)):
        out.extend(_blowup_point(c2, params, RatFunc(RING.zero), RatFunc(RING.zero),
                                 f"{label}/{v}=oo", depth + 1))
    return out


def _strip(p, e: str):
    """``p`` divided by the largest power of ``e`` and restricted to ``e = 0``."""
    k = _valuation(p, e)
    i = SYMBOLS.index(e)
    terms = {m[:i] + (0,) + m[i + 1:]: c for m, c in p.terms() if m[i] == k}
    return RING.from_dict(terms)


def _points_on_exceptional(chart, e: str, s: str):
    """Points ``s = q`` of the curve ``e = 0`` where some coordinate is 0/0."""
    pts = []
    for f in chart:
        n0, d0 = _strip(f.num, e), _strip(f.den, e)
        gcd = poly_gcd(n0, d0)
        for q, _ in _factors(gcd):
            if s not in poly_vars(q):
                continue
            if poly_degree(q, s) != 1 or poly_vars(q) & (set(VARIABLES) - {s}):
                raise UnsupportedLocus(f"non-rational base point on {_fmt_poly(q)}")
            r = solve_linear(q, s)
            if r not in pts:
                pts.append(r)
    pts.sort(key=lambda r: r.key())
    return pts


# -- three variables: base curves

def _exceptional_3d(coords, params):
    """Check the base curves of a three-parameter family.

    Exceptional components over a base curve are not resolved.  Instead
    each base curve must carry a coordinate that is regular, constant and
    not 0 or oo along it, so that every component over it has a constant
    coordinate (negligible) or lies in some {t_j=1}.
    """
    for at_inf, mapping in _chart_maps(params):
        chart = _apply(coords, mapping)
        for curve in _base_curves(chart, params):
            if any(not curve.fixes(u) or not curve.value_of(u).is_zero() for u in at_inf):
                continue
            if _guard_value(chart, curve) is None:
                raise UnsupportedLocus(f"base curve {curve.label} carries no constant coordinate")
    return []


def _guard_value(chart, c):
    for f in chart:
        r = restrict(f, c.w1, c.s) if c.w1 in poly_vars(f.num) | poly_vars(f.den) else f
        if r is INF:
            continue
        try:
            val = restrict(r, c.v, c.value_of(c.v))
        except AlgebraError:
            continue
        if val is INF or val.is_zero() or val.depends_on((c.w2,)):
            continue
        if _order_along_curve(f, c) == 0:
            return val
    return None


def _order_along_curve(f, c):
    """Zero when ``f`` is regular and invertible at the generic point of ``c``."""
    for p in (f.num, f.den):
        r = restrict(RatFunc(p), c.w1, c.s)
        if r is INF:
            return 1
        r = restrict(r, c.v, c.value_of(c.v))
        if r is INF or r.is_zero():
            return 1
    return 0


@dataclass(frozen=True)
class _Curve:
    """``v = r(w1, w2)`` and ``w1 = s(w2)`` (free parameter ``w2``)."""

    v: str
    r: RatFunc
    w1: str
    s: RatFunc
    w2: str

    def fixes(self, u):
        return u in (self.v, self.w1)

    def value_of(self, u):
        if u == self.w1:
            return self.s
        if u == self.v:
            return restrict(self.r, self.w1, self.s)
        raise KeyError(u)

    @property
    def label(self):
        return f"{self.v}={format_expr(self.r)},{self.w1}={format_expr(self.s)}"


def _base_curves(chart, params):
    """Curves along which some coordinate is 0/0."""
    pset = set(params)
    curves = []
    seen = set()
    for f in chart:
        if not (poly_vars(f.num) & pset) or not (poly_vars(f.den) & pset):
            continue
        for q, _ in _factors(f.num):
            if not poly_vars(q) & pset:
                continue
            sv = _solve_var(q, params)
            r = solve_linear(q, sv)
            rest = tuple(p for p in params if p != sv)
            dres = restrict(RatFunc(f.den), sv, r)
            if dres is INF:
                continue
            for q2, _ in _factors(dres.num):
                if not poly_vars(q2) & set(rest):
                    continue
                w1 = _solve_var(q2, rest)
                s = solve_linear(q2, w1)
                w2 = [p for p in rest if p != w1][0]
                c = _Curve(sv, r, w1, s, w2)
                if c.value_of(c.v) is INF:
                    continue
                key = (c.v, c.value_of(c.v), c.w1, c.s)
                if key not in seen:
                    seen.add(key)
                    curves.append(c)
    return curves


# ---------------------------------------------------------------------------
# rank

def _diff(f: RatFunc, v: str) -> RatFunc:
    g = RING.gens[SYMBOLS.index(v)]
    return RatFunc(f.num.diff(g) * f.den - f.num * f.den.diff(g), f.den * f.den)


_RNG_SEED = 20240611


def _random_points(count, seed=_RNG_SEED):
    rng = random.Random(seed)
    for _ in range(count):
        yield {s: Fraction(rng.randint(-97, 97) or 1, rng.randint(1, 89)) for s in SYMBOLS}


def _rank(rows):
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                fac = rows[i][col] / rows[rank][col]
                rows[i] = [a - fac * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


@lru_cache(maxsize=100_000)
def _generic_rank(coords, params):
    if not params:
        return 0
    jac = [[_diff(f, v) for v in params] for f in coords if f.depends_on(params)]
    if not jac:
        return 0
    best = 0
    tried = 0
    for pt in _random_points(12):
        try:
            rows = [[specialize(g, pt) for g in row] for row in jac]
        except PoleAtPoint:
            continue
        best = max(best, _rank(rows))
        tried += 1
        if best == len(params) or tried >= 3:
            break
    return best


def generic_rank(coords, params) -> int:
    """Generic rank of the Jacobian of the coordinate map."""
    return _generic_rank(tuple(c for c in coords if isinstance(c, RatFunc)), tuple(params))


def is_degenerate(t: CycleTerm) -> bool:
    """True iff the coordinate map has deficient generic rank."""
    return generic_rank(t.coords, t.params) < t.d


# ---------------------------------------------------------------------------
# faces and boundary

def _is_one(f):
    return isinstance(f, RatFunc) and f.is_one()


def _is_face_value(f):
    return f is INF or (isinstance(f, RatFunc) and f.is_zero())


@dataclass
class FaceComponent:
    origin: str
    multiplicity: int
    term: CycleTerm | None
    contained_in: tuple = ()
    degenerate: bool = False


def face_components(t: CycleTerm, f: Face) -> list:
    i = f.index - 1
    if i >= t.n:
        raise ValueError(f"face {f} outside a {t.n}-cube")
    comps = []
    for D in prime_divisors(t.coords, t.params):
        o = D.orders[i]
        mult = o if f.value == "0" else -o
        if mult <= 0:
            continue
        rest = [D.values[j] for j in range(t.n) if j != i]
        ones = tuple(j + 1 for j in range(t.n) if j != i and _is_one(D.values[j]))
        if ones:
            comps.append(FaceComponent(D.origin, mult, None, ones))
            continue
        bad = [j + 1 for j in range(t.n) if j != i and _is_face_value(D.values[j])]
        if bad:
            raise ImproperFace(f"{f} component {D.origin} lies in faces {bad} of {t}")
        tt = CycleTerm(t.coeff * mult, D.params, tuple(rest))
        comps.append(FaceComponent(D.origin, mult, tt, (), is_degenerate(tt)))
    return comps


def face_restrict(t: CycleTerm, f: Face) -> CycleSum:
    """Restriction of ``t`` to the face ``f`` (coordinate ``f.index`` deleted)."""
    out = CycleSum()
    for comp in face_components(t, f):
        if comp.term is not None and not comp.degenerate:
            out = out + comp.term
    return out


def boundary(x) -> CycleSum:
    """Alternating sum of the 0- and oo-faces, for a term or a sum."""
    if isinstance(x, CycleSum):
        out = CycleSum()
        for t in x.terms():
            out = out + boundary(t)
        return out
    t = x
    out = CycleSum()
    if t.d == 0:
        return out
    for i in range(1, t.n + 1):
        sgn = 1 if i % 2 == 1 else -1
        out = out + face_restrict(t, Face(i, "0")).scaled(sgn)
        out = out - face_restrict(t, Face(i, "inf")).scaled(sgn)
    return out


# ---------------------------------------------------------------------------
# admissibility

@dataclass
class Finding:
    faces: tuple  # ((index, "0"|"inf"), ...)
    components: tuple  # origin labels along the path
    dim: int
    bound: int
    contained_in: tuple = ()

    @property
    def ok(self) -> bool:
        return bool(self.contained_in) or self.dim <= self.bound

    def to_json(self):
        return {
            "faces": [[i, v] for i, v in self.faces],
            "components": list(self.components),
            "dim": self.dim,
            "bound": self.bound,
            "contained_in": [f"t{j}=1" for j in self.contained_in],
        }


@dataclass
class AdmissibilityReport:
    verdict: str
    findings: list = field(default_factory=list)
    message: str = ""

    @property
    def admissible(self) -> bool:
        return self.verdict == "admissible"

    def face_findings(self, index, value):
        return [f for f in self.findings if f.faces == ((index, value),)]

    def to_json(self):
        out = {"verdict": self.verdict, "findings": [f.to_json() for f in self.findings]}
        if self.message:
            out["message"] = self.message
        return out


def is_admissible(t: CycleTerm) -> AdmissibilityReport:
    """Check that every face meets ``t`` in the expected dimension."""
    findings = []
    try:
        coords = {j + 1: f for j, f in enumerate(t.coords)}
        fixed = tuple((j, "0" if f.is_zero() else "inf") for j, f in coords.items() if _is_face_value(f))
        _explore(t.d, t.params, coords, fixed, (), findings)
    except UnsupportedLocus as exc:
        return AdmissibilityReport("unsupported", findings, str(exc))
    ok = all(f.ok for f in findings)
    return AdmissibilityReport("admissible" if ok else "inadmissible", findings)


def _explore(d0, params, coords, fixed, path, findings):
    ones = tuple(j for j, f in coords.items() if _is_one(f))
    if fixed:
        live = [f for f in coords.values() if isinstance(f, RatFunc)]
        dim = generic_rank(tuple(live), params) if params else 0
        findings.append(Finding(fixed, path, dim, d0 - len(fixed), ones))
    if ones or not params:
        return
    idx = sorted(coords)
    values = tuple(coords[j] for j in idx)
    try:
        divisors = prime_divisors(values, params)
    except UnsupportedLocus as exc:
        where = " on " + " / ".join(path) if path else ""
        raise UnsupportedLocus(f"{exc}{where}") from None
    for D in divisors:
        new = {}
        newly = []
        for j, val, o in zip(idx, D.values, D.orders):
            if _is_face_value(val):
                newly.append((j, "0" if o > 0 else "inf"))
            else:
                new[j] = val
        if not newly:
            continue
        _explore(d0, D.params, new, fixed + tuple(newly), path + (D.origin,), findings)


# ---------------------------------------------------------------------------

NEGLIGIBLE_PATTERNS = ("constant", "weight-one-product")


def is_negligible(t: CycleTerm, patterns=("constant",)):
    """Pattern tag when ``t`` is negligible by one of ``patterns``, else None.

    ``constant``: some coordinate is constant in the cycle variables.
    ``weight-one-product``: for a proper subset V of the cycle variables,
    exactly |V|+1 coordinates depend on V only and the others not on V, so
    the term is a product with a cycle of codimension one.
    """
    for j, f in enumerate(t.coords):
        if not f.depends_on(t.params):
            return f"constant-coordinate t{j + 1}={format_expr(f)}"
    if "weight-one-product" in patterns and t.d >= 2:
        deps = [f.free_symbols() & set(t.params) for f in t.coords]
        for m in range(1, t.d):
            for vs in itertools.combinations(t.params, m):
                vs = set(vs)
                block = [j for j, dep in enumerate(deps) if dep <= vs]
                if len(block) != m + 1:
                    continue
                if all(not (dep & vs) for j, dep in enumerate(deps) if j not in block):
                    idx = ",".join(f"t{j + 1}" for j in block)
                    return f"weight-one-product {{{idx}}} in {','.join(sorted(vs))}"
    return None
