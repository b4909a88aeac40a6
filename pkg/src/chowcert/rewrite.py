"""Certified rewriting of cycle sums.

Every rule returns a :class:`VerifiedIdentity` ``lhs = rhs`` together with
the hypotheses it checked.  Rules:

* ``split_f4``: multiplicativity in the fourth coordinate.
* ``split_single``: multiplicativity in the third or fifth coordinate of a
  symmetric term ``[f(x), f(y), f3(x), f4(x,y), f5(y)]``, under the branch
  invariance hypothesis.
* ``split_first_pair``: the two splitting formulas for ``f1 = f2 = g h``.
* ``pair_split``: the paired splitting of two terms whose fourth coordinates
  only meet the faces along ``y = x`` off constant loci.  It is checked by an
  explicit witness ``W``: ``boundary(W)`` must equal the claimed difference
  up to negligible terms.
* ``move_constant``: ``pair_split`` followed by discarding the constant part.
* ``reparam``: a term equals its pull-back along a certified substitution.
* ``derive``: a target identity is an exact rational combination of proved
  identities plus discarded negligible terms.

Hypotheses are tested symbolically over the field of the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .algebra import (RING, AlgebraError, RatFunc, UnsupportedLocus, const, format_expr,
                      poly_degree, poly_vars, solve_branches, substitute, sym)
from .boundary import NEGLIGIBLE_PATTERNS, boundary, is_admissible, is_negligible
from .cycles import CycleSum, CycleTerm, Substitution, as_sum, normalize_term, reparametrize, term
from .symbols import SymbolSum
from .textform import format_cycle, format_rational, format_sum

__all__ = [
    "RewriteError", "FactorMismatch", "InadmissibleResult", "HypothesisFailed",
    "WitnessBoundaryMismatch", "TemplateMismatch", "DerivationFailed",
    "Justification", "VerifiedIdentity",
    "split_f4", "split_single", "split_first_pair", "pair_split", "move_constant",
    "reparam", "discard", "derive", "eval_stuv", "brace", "admissible", "resubstitute", "substitute_identity",
]


class RewriteError(Exception):
    pass


class FactorMismatch(RewriteError):
    pass


class InadmissibleResult(RewriteError):
    pass


class HypothesisFailed(RewriteError):
    pass


class WitnessBoundaryMismatch(RewriteError):
    pass


class TemplateMismatch(RewriteError):
    pass


class DerivationFailed(RewriteError):
    def __init__(self, msg, residue=None):
        super().__init__(msg)
        self.residue = residue


X, Y, Z = sym("x"), sym("y"), sym("z")
ONE = const(1)


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class Justification:
    kind: str  # lemma | witness | discard | reparametrization | combination | substitution
    rule: str
    inputs: tuple = ()
    checks: tuple = ()
    data: tuple = ()

    def to_json(self):
        return {
            "kind": self.kind,
            "rule": self.rule,
            "inputs": list(self.inputs),
            "checks": [{"check": c, "status": "verified"} for c in self.checks],
            **({"data": {k: v for k, v in self.data}} if self.data else {}),
            "status": "verified",
        }


@dataclass(frozen=True)
class VerifiedIdentity:
    """``lhs = rhs`` with the certificate that justifies it."""

    name: str
    lhs: CycleSum
    rhs: CycleSum
    certificate: tuple
    parts: tuple = ()  # ((coeff, VerifiedIdentity), ...) for derived identities
    discards: tuple = ()  # ((CycleTerm, pattern), ...)
    replay_args: tuple = field(default=(), compare=False, repr=False)

    @property
    def relation(self) -> CycleSum:
        return self.lhs - self.rhs

    def leaves(self):
        if not self.parts:
            yield self
        for _, p in self.parts:
            yield from p.leaves()

    def replay(self) -> bool:
        """Recompute the identity from its certificate."""
        if self.parts:
            acc = CycleSum()
            for c, p in self.parts:
                if not p.replay():
                    return False
                acc = acc + p.relation.scaled(c)
            for t, _ in self.discards:
                if is_negligible(t, NEGLIGIBLE_PATTERNS) is None:
                    return False
                acc = acc + t
            return not (self.relation - acc)
        if self.replay_args:
            fn, args = self.replay_args
            again = fn(*args)
            return not (again.relation - self.relation)
        return True

    def to_json(self):
        out = {
            "name": self.name,
            "lhs": format_sum(self.lhs),
            "rhs": format_sum(self.rhs),
            "certificate": [j.to_json() for j in self.certificate],
        }
        if self.parts:
            out["parts"] = [{"coeff": format_rational(c), "identity": p.to_json()} for c, p in self.parts]
        if self.discards:
            out["discards"] = [{"term": format_cycle(t), "pattern": pat} for t, pat in self.discards]
        return out


# ---------------------------------------------------------------------------
# shared checks

@lru_cache(maxsize=20_000)
def _admissible_key(t: CycleTerm):
    return is_admissible(t)


def admissible(t: CycleTerm):
    """Cached admissibility report of the normal form of ``t``."""
    nt = normalize_term(t)
    if nt is None:
        return None
    return _admissible_key(CycleTerm(1, nt.params, nt.coords))


def _require_admissible(terms, rule):
    for t in terms:
        rep = admissible(t)
        if rep is not None and not rep.admissible:
            raise InadmissibleResult(f"{rule}: {format_cycle(t)} is {rep.verdict} {rep.message}".rstrip())


def _only(f: RatFunc, var: str) -> bool:
    return not (f.free_symbols() & ({"x", "y", "z"} - {var}))


def _to(f: RatFunc, src: str, dst: str) -> RatFunc:
    return f if src == dst else substitute(f, {src: sym(dst)})


def _check_shape(t: CycleTerm, rule: str):
    if t.n != 5 or tuple(t.params) != ("x", "y"):
        raise HypothesisFailed(f"{rule}: expected a 5-cube term in (x,y), got {format_cycle(t)}")
    f1, f2, f3, _, f5 = t.coords
    for f, v, i in ((f1, "x", 1), (f2, "y", 2), (f3, "x", 3), (f5, "y", 5)):
        if not _only(f, v):
            raise HypothesisFailed(f"{rule}: coordinate {i} must depend on {v} only")


def nonconstant_branches(f4: RatFunc):
    """Non-constant solutions y = r(x) of f4 = 0 and 1/f4 = 0."""
    out = []
    for p in (f4.num, f4.den):
        if "y" not in poly_vars(p):
            continue
        for br in solve_branches(p, "y"):
            if br.expression.depends_on(("x",)):
                if br.expression not in out:
                    out.append(br.expression)
    out.sort(key=lambda r: r.key())
    return out


def _branch_invariance(t: CycleTerm, rule: str):
    """f1 = f2 and f2(r(x)) = f2(x) along every non-constant branch."""
    f1, f2 = t.coords[0], t.coords[1]
    if _to(f2, "y", "x") != f1:
        raise HypothesisFailed(f"{rule}: first two coordinates differ")
    try:
        branches = nonconstant_branches(t.coords[3])
    except UnsupportedLocus as exc:
        raise HypothesisFailed(f"{rule}: {exc}") from None
    checks = []
    for r in branches:
        if substitute(f2, {"y": r}) != f1:
            raise HypothesisFailed(f"{rule}: f2(r(x)) != f2(x) on the branch y = {format_expr(r)}")
        checks.append(f"f2(r(x)) = f2(x) for y = {format_expr(r)}")
    return branches, checks


def _bilinear(f: RatFunc) -> bool:
    """Every factor has degree at most one in x and in y."""
    for p in (f.num, f.den):
        for q, _ in p.factor_list()[1]:
            if poly_degree(q, "x") > 1 or poly_degree(q, "y") > 1:
                return False
    return True


def _texts(terms):
    return tuple(format_cycle(t) for t in terms)


def _leaf(name, lhs_terms, rhs_terms, kind, rule, checks, data=(), replay=None, lhs_scale=1):
    lhs = as_sum(list(lhs_terms)).scaled(lhs_scale)
    rhs = as_sum(list(rhs_terms))
    j = Justification(kind, rule, _texts(lhs_terms), tuple(checks), tuple(data))
    return VerifiedIdentity(name, lhs, rhs, (j,), replay_args=replay or ())


def _split_coord(t: CycleTerm, i: int, g: RatFunc, h: RatFunc, rule: str):
    f = t.coords[i]
    if g * h != f:
        raise FactorMismatch(f"{rule}: {format_expr(g)} * {format_expr(h)} != {format_expr(f)}")
    cs = list(t.coords)
    cs[i] = g
    tg = t.with_coords(cs)
    cs[i] = h
    th = t.with_coords(cs)
    return tg, th


def _rf(f) -> RatFunc:
    from .cycles import _as_ratfunc
    return _as_ratfunc(f)


# ---------------------------------------------------------------------------
# lemma applications

def split_f4(t: CycleTerm, factors, name="") -> VerifiedIdentity:
    """[f1,f2,f3,gh,f5] = [f1,f2,f3,g,f5] + [f1,f2,f3,h,f5]."""
    g, h = map(_rf, factors)
    rule = "split-f4"
    tg, th = _split_coord(t, 3, g, h, rule)
    for u in (g, h):
        if not _bilinear(u):
            raise HypothesisFailed(f"{rule}: {format_expr(u)} is not a product of factors linear in x and in y")
    _require_admissible((t, tg, th), rule)
    checks = ["f4 = g*h", "g, h products of bilinear factors", "all terms admissible"]
    return _leaf(name or rule, [t], [tg, th], "lemma", rule, checks,
                 (("g", format_expr(g)), ("h", format_expr(h))), (split_f4, (t, (g, h), name)))


def split_single(t: CycleTerm, position: int, factors, name="") -> VerifiedIdentity:
    """Split the third or fifth coordinate of a symmetric term."""
    g, h = map(_rf, factors)
    rule = f"split-single-{position}"
    if position not in (3, 5):
        raise HypothesisFailed(f"{rule}: only the third and fifth coordinates split this way")
    _check_shape(t, rule)
    var = "x" if position == 3 else "y"
    if not (_only(g, var) and _only(h, var)):
        raise FactorMismatch(f"{rule}: factors must depend on {var} only")
    tg, th = _split_coord(t, position - 1, g, h, rule)
    _, checks = _branch_invariance(t, rule)
    _require_admissible((t, tg, th), rule)
    checks = ["f1 = f2", *checks, "all terms admissible"]
    return _leaf(name or rule, [t], [tg, th], "lemma", rule, checks,
                 (("g", format_expr(g)), ("h", format_expr(h))), (split_single, (t, position, (g, h), name)))


def _Zpair(t: CycleTerm, u: RatFunc, w: RatFunc) -> CycleTerm:
    cs = list(t.coords)
    cs[0] = u
    cs[1] = _to(w, "x", "y")
    return t.with_coords(cs)


def split_first_pair(t: CycleTerm, factors, form: str = "eq32", name="") -> VerifiedIdentity:
    """Split f1 = f2 = g h by the first (eq31) or second (eq32) formula."""
    g, h = map(_rf, factors)
    rule = f"split-first-pair-{form}"
    _check_shape(t, rule)
    if not (_only(g, "x") and _only(h, "x")):
        raise FactorMismatch(f"{rule}: factors must be functions of x")
    f1 = t.coords[0]
    if g * h != f1:
        raise FactorMismatch(f"{rule}: g*h != f1")
    branches, checks = _branch_invariance(t, rule)
    for r in branches:
        gr = substitute(g, {"x": r})
        if gr != g and gr != h:
            raise HypothesisFailed(f"{rule}: g(r(x)) is neither g(x) nor h(x) on y = {format_expr(r)}")
        checks.append(f"g(r(x)) = {'g' if gr == g else 'h'}(x) for y = {format_expr(r)}")
    if form == "eq31":
        rhs = [_Zpair(t, g, f1), _Zpair(t, h, f1), _Zpair(t, f1, g), _Zpair(t, f1, h)]
        scale = 2
    elif form == "eq32":
        rhs = [_Zpair(t, g, g), _Zpair(t, h, h), _Zpair(t, h, g), _Zpair(t, g, h)]
        scale = 1
    else:
        raise ValueError(f"unknown form {form!r}")
    _require_admissible([t, *rhs], rule)
    checks.append("all terms admissible")
    return _leaf(name or rule, [t], rhs, "lemma", rule, ["f1 = f2 = g*h", *checks],
                 (("g", format_expr(g)), ("h", format_expr(h))),
                 (split_first_pair, (t, (g, h), form, name)), lhs_scale=scale)


def _check_pair(t1: CycleTerm, t2: CycleTerm, rule: str):
    for t in (t1, t2):
        if t.n != 5 or tuple(t.params) != ("x", "y"):
            raise HypothesisFailed(f"{rule}: expected 5-cube terms in (x,y)")
    f1, f2, f3, p4, f5 = t1.coords
    g1, g2, g3, q4, g5 = t2.coords
    if _to(g1, "x", "y") != f2 or _to(g2, "y", "x") != f1 or g3 != f3 or g5 != f5:
        raise HypothesisFailed(f"{rule}: second term is not [f2, f1, f3, q4, f5]")
    for f, v, i in ((f1, "x", 1), (f2, "y", 2), (f3, "x", 3), (f5, "y", 5)):
        if not _only(f, v):
            raise HypothesisFailed(f"{rule}: coordinate {i} must depend on {v} only")
    checks = []
    for nm, q in (("p4", p4), ("q4", q4)):
        try:
            br = nonconstant_branches(q)
        except UnsupportedLocus as exc:
            raise HypothesisFailed(f"{rule}: {exc}") from None
        if br != [X]:
            shown = ", ".join(format_expr(r) for r in br) or "none"
            raise HypothesisFailed(f"{rule}: non-constant branches of {nm} are {shown}, not only y = x")
        checks.append(f"{nm}: only non-constant branch y = x")
    return checks


def _witness(t1, t2, position, g, h):
    f1, f2, f3, p4, f5 = t1.coords
    q4 = t2.coords[3]
    f2x = _to(f2, "y", "x")
    params = ("x", "y", "z")
    if position in (3, 5):
        var = "x" if position == 3 else "y"
        C = (Z - _to(g * h, var, var)) / (Z - g)
        if position == 3:
            w1 = [f1, f2, C, Z, p4, f5]
            w2 = [f2x, _to(f1, "x", "y"), C, Z, q4, f5]
        else:
            w1 = [f1, f2, f3, p4, C, Z]
            w2 = [f2x, _to(f1, "x", "y"), f3, q4, C, Z]
        return [term(w1, params), term(w2, params)]
    # position 2: f2 = g h, written in y
    gy, hy = _to(g, "x", "y"), _to(h, "x", "y")
    Cy = (Z - gy * hy) / (Z - gy)
    Cx = _to(Cy, "y", "x")
    w1 = [f1, Cy, Z, f3, p4, f5]
    w2 = [Cx, Z, _to(f1, "x", "y"), f3, q4, f5]
    return [term(w1, params), term(w2, params, -1)]


def pair_split(t1: CycleTerm, t2: CycleTerm, position: int, factors, name="") -> VerifiedIdentity:
    """Paired split certified by the boundary of an explicit witness."""
    g, h = map(_rf, factors)
    rule = f"pair-split-{position}"
    checks = _check_pair(t1, t2, rule)
    if position in (3, 5):
        var = "x" if position == 3 else "y"
        if not (_only(g, var) and _only(h, var)):
            raise FactorMismatch(f"{rule}: factors must depend on {var} only")
        a1, b1 = _split_coord(t1, position - 1, g, h, rule)
        a2, b2 = _split_coord(t2, position - 1, g, h, rule)
    elif position == 2:
        if not (_only(g, "x") and _only(h, "x")):
            raise FactorMismatch(f"{rule}: factors must be functions of x")
        gy, hy = _to(g, "x", "y"), _to(h, "x", "y")
        a1, b1 = _split_coord(t1, 1, gy, hy, rule)
        a2, b2 = _split_coord(t2, 0, g, h, rule)
    else:
        raise HypothesisFailed(f"{rule}: position must be 2, 3 or 5")
    lhs = [t1, t2]
    rhs = [a1, a2, b1, b2]
    _require_admissible(lhs + rhs, rule)
    W = _witness(t1, t2, position, g, h)
    _require_admissible(W, rule + " witness")
    # raw terms keep the witness variable order, so C = 0 is solved for z
    bW = as_sum([])
    for w in W:
        bW = bW + boundary(w)
    diff = as_sum(lhs) - as_sum(rhs)
    residue = None
    for sgn in (1, -1):
        res = bW - diff.scaled(sgn)
        tags = [(t, is_negligible(t, NEGLIGIBLE_PATTERNS)) for t in res.terms()]
        if all(tag for _, tag in tags):
            residue = (sgn, tags)
            break
    if residue is None:
        bad = [format_cycle(t) for t in (bW - diff).terms() if not is_negligible(t, NEGLIGIBLE_PATTERNS)]
        raise WitnessBoundaryMismatch(f"{rule}: boundary of the witness leaves {len(bad)} non-negligible terms")
    sgn, tags = residue
    wj = Justification(
        "witness", rule, _texts(W),
        ("boundary(W) computed", f"boundary(W) = {'+' if sgn > 0 else '-'}(lhs - rhs) + negligible",
         "witness admissible"),
        tuple((f"residue[{i}]", f"{format_cycle(t)} :: {tag}") for i, (t, tag) in enumerate(tags)),
    )
    lj = Justification("lemma", rule, _texts(lhs), tuple(checks) + ("all terms admissible",),
                       (("g", format_expr(g)), ("h", format_expr(h))))
    return VerifiedIdentity(name or rule, as_sum(lhs), as_sum(rhs), (lj, wj),
                            replay_args=(pair_split, (t1, t2, position, (g, h), name)))


def move_constant(t1: CycleTerm, t2: CycleTerm, position: int, alpha, name="") -> VerifiedIdentity:
    """Drop the constant ``alpha`` from coordinate 3 or 5 of a pair."""
    alpha = _rf(alpha)
    rule = f"move-constant-{position}"
    if alpha.depends_on(("x", "y")):
        raise HypothesisFailed(f"{rule}: alpha must be constant")
    if position not in (3, 5):
        raise HypothesisFailed(f"{rule}: position must be 3 or 5")
    rest = t1.coords[position - 1] / alpha
    ps = pair_split(t1, t2, position, (alpha, rest), name=f"{rule}/pair-split")
    s1, _ = _split_coord(t1, position - 1, alpha, rest, rule)
    s2, _ = _split_coord(t2, position - 1, alpha, rest, rule)
    u1, u2 = (t.with_coords([*t.coords[:position - 1], rest, *t.coords[position:]]) for t in (t1, t2))
    return derive(name or rule, as_sum([t1, t2]), as_sum([u1, u2]), [(1, ps)])


def reparam(t: CycleTerm, sigma: Substitution, name="") -> VerifiedIdentity:
    """``t`` equals its pull-back along ``sigma`` (coefficient divided by the degree)."""
    rule = "reparametrize"
    new = reparametrize(t, sigma)
    _require_admissible((new,), rule)
    data = tuple((k, format_expr(v)) for k, v in sorted(sigma.mapping.items()))
    data += (("degree", str(sigma.degree)),)
    return _leaf(name or f"{rule} {sigma.name}".strip(), [t], [new], "reparametrization", rule,
                 ["substitution certified", "image admissible"], data, (reparam, (t, sigma, name)))


def discard(t: CycleTerm, name=""):
    tag = is_negligible(t)
    if tag is None:
        raise HypothesisFailed(f"{format_cycle(t)} is not negligible")
    _require_admissible((t,), "discard")
    return tag


# ---------------------------------------------------------------------------
# combination

def _solve(columns, target, keys):
    """Exact solution of sum_i c_i columns[i] = target on ``keys`` or None."""
    from sympy import Matrix, Rational

    if not columns:
        return [] if all(target.get(k, 0) == 0 for k in keys) else None
    M = Matrix([[Rational(col.get(k, 0)) for col in columns] for k in keys])
    b = Matrix([Rational(target.get(k, 0)) for k in keys])
    try:
        sol, params = M.gauss_jordan_solve(b)
    except ValueError:
        return None
    if params.shape[0]:
        sol = sol.subs({p: 0 for p in params})
    return [Fraction(int(v.p), int(v.q)) for v in sol]


def _vector(s: CycleSum):
    return {k: c for k, c in s._terms.items()}


def derive(name: str, lhs, rhs, parts: Sequence, patterns=("constant",)) -> VerifiedIdentity:
    """Certify ``lhs = rhs`` from ``parts`` and negligible discards.

    ``parts`` holds identities or ``(coeff, identity)`` pairs; a ``None``
    coefficient is solved for exactly.
    """
    lhs, rhs = as_sum(lhs), as_sum(rhs)
    target = lhs - rhs
    fixed = []
    free = []
    for p in parts:
        c, vi = p if isinstance(p, tuple) else (None, p)
        (free if c is None else fixed).append((c, vi))
    rem = target
    for c, vi in fixed:
        rem = rem - vi.relation.scaled(c)
    vectors = [_vector(vi.relation) for _, vi in free]
    keys = set(_vector(rem))
    for v in vectors:
        keys |= set(v)
    key_terms = {k: CycleTerm(1, k[0], k[1]) for k in keys}
    negl = {k for k, t in key_terms.items() if is_negligible(t, patterns)}
    live = sorted(keys - negl, key=lambda k: tuple(f.key() for f in k[1]))
    sol = _solve(vectors, _vector(rem), live)
    if sol is None:
        residue = rem
        for v in vectors:
            pass
        raise DerivationFailed(f"{name}: no combination of the supplied identities accounts for the target",
                               _unexplained(rem, [vi for _, vi in free], patterns))
    coeffs = fixed + [(c, vi) for c, (_, vi) in zip(sol, free)]
    coeffs = [(c, vi) for c, vi in coeffs if c != 0]
    acc = CycleSum()
    for c, vi in coeffs:
        acc = acc + vi.relation.scaled(c)
    leftover = target - acc
    discards = []
    for t in leftover.terms():
        tag = is_negligible(t, patterns)
        if tag is None:
            raise DerivationFailed(f"{name}: leftover term {format_cycle(t)} is not negligible", leftover)
        _require_admissible((t,), f"{name} discard")
        discards.append((t, tag))
    cert = [Justification("combination", "linear-combination",
                          tuple(f"{format_rational(c)} * {vi.name}" for c, vi in coeffs),
                          ("lhs - rhs = sum of coefficients times proved relations + discards",))]
    for t, tag in discards:
        cert.append(Justification("discard", "negligible", (format_cycle(t),), ("admissible", "negligible"),
                                  (("pattern", tag),)))
    return VerifiedIdentity(name, lhs, rhs, tuple(cert), tuple(coeffs), tuple(discards))


def _unexplained(rem: CycleSum, parts, patterns):
    """Terms of the target that occur in no supplied relation (diagnostic)."""
    seen = set()
    for vi in parts:
        seen |= set(vi.relation._terms)
    out = CycleSum()
    for t in rem.terms():
        nt = normalize_term(t)
        key = (nt.params, nt.coords)
        if key not in seen and not is_negligible(t, patterns):
            out = out + t
    return out


# ---------------------------------------------------------------------------
# {a}_c and the evaluation lemma

def brace(arg) -> CycleTerm:
    """{arg}_c = [x, y, 1 - x, 1 - y/x, 1 - arg/y]."""
    arg = _rf(arg)
    return term([X, Y, ONE - X, ONE - Y / X, ONE - arg / Y])


def _linear_factors(f: RatFunc, var: str, rule: str):
    """f = lam * prod (1 - r*var)^e for template 1 in x, or (1 - r/var)^e in y.

    Returns (lam, [(r, e)]).  A zero or pole at var = 0 is rejected.
    """
    v = sym(var)
    lam = const(1)
    out = []
    for p, sgn in ((f.num, 1), (f.den, -1)):
        c, facs = p.factor_list()
        lam = lam * (const(c) if sgn > 0 else const(c).inverse())
        for q, e in facs:
            if var not in poly_vars(q):
                qq = RatFunc(q)
                lam = lam * (qq ** e if sgn > 0 else qq.inverse() ** e)
                continue
            if poly_degree(q, var) != 1 or poly_vars(q) & ({"x", "y"} - {var}):
                raise TemplateMismatch(f"{rule}: factor {format_expr(RatFunc(q))} is not linear in {var}")
            from .algebra import poly_coeffs
            cs = poly_coeffs(q, var)
            c1, c0 = RatFunc(cs[1]), RatFunc(cs.get(0, RING.zero))
            if c0.is_zero() and var == "y" and q == RING(sym("y").num):
                lam = lam * (v ** e if sgn > 0 else v.inverse() ** e)
                continue
            if c0.is_zero():
                raise TemplateMismatch(f"{rule}: coordinate has a zero or pole at {var} = 0")
            # q = c0 (1 + (c1/c0) var)  or  q = c1 var (1 + (c0/c1)/var)
            if var == "x":
                r = -(c1 / c0)
                unit = c0
            else:
                r = -(c0 / c1)
                unit = c1 * v
            lam = lam * (unit ** e if sgn > 0 else unit.inverse() ** e)
            out.append((r, sgn * e))
    if var == "y":
        # collect the var powers produced by the units
        k = _order_zero(lam, var)
        if k:
            raise TemplateMismatch(f"{rule}: coordinate is not a product of factors 1 - u/y")
    return lam, out


def _order_zero(f: RatFunc, var: str) -> int:
    from .boundary import _order_along_zero
    return _order_along_zero(f, var)


SWAP = Substitution.involution({"x": Y, "y": X}, name="swap")


def eval_stuv(t: CycleTerm, sigma: Substitution | None = None, name="stuv"):
    """Evaluate ``[x, y, f3(x), 1 - y/x, f5(y)]`` (or the ``1 - x/y`` form) as symbols.

    Returns ``(SymbolSum, VerifiedIdentity)``; the identity writes ``t`` as a
    combination of {arg}_c terms.
    """
    rule = "stuv"
    parts = []
    cur = t
    if sigma is not None:
        parts.append(reparam(cur, sigma, name=f"{name}: reparametrize {sigma.name}".rstrip()))
        cur = reparametrize(t, sigma)
    if cur.n != 5 or tuple(cur.params) != ("x", "y"):
        raise TemplateMismatch(f"{rule}: expected a 5-cube term in (x,y)")
    if cur.coords[3] == ONE - X / Y:
        parts.append(reparam(cur, SWAP, name=f"{name}: swap"))
        f1, f2, f3, _, f5 = reparametrize(cur, SWAP).coords
        # [y, x, f3(y), 1 - y/x, f5(x)] reordered to [x, y, f5(x), 1 - y/x, f3(y)]: even permutation
        cur = CycleTerm(cur.coeff, ("x", "y"), (f2, f1, f5, ONE - Y / X, f3))
    elif cur.coords[3] != ONE - Y / X:
        raise TemplateMismatch(f"{rule}: fourth coordinate is neither 1 - y/x nor 1 - x/y")
    f1, f2, f3, f4, f5 = cur.coords
    k1, k2 = f1 / X, f2 / Y
    if k1.depends_on(("x", "y")) or k1 != k2:
        raise TemplateMismatch(f"{rule}: first coordinates must be k*x, k*y")
    if not (_only(f3, "x") and _only(f5, "y")):
        raise TemplateMismatch(f"{rule}: third coordinate must depend on x, fifth on y")
    base = cur.with_coords([X, Y, f3, f4, f5])
    if not k1.is_one():
        parts.append(split_first_pair(cur, (k1, X), "eq32", name=f"{name}: remove {format_expr(k1)}"))
    lam3, fac3 = _linear_factors(f3, "x", rule)
    lam5, fac5 = _linear_factors(f5, "y", rule)
    pieces3 = [lam3] + [(ONE - r * X) ** e for r, e in fac3]
    pieces5 = [lam5] + [(ONE - r / Y) ** e for r, e in fac5]
    parts += _split_chain(base, 3, pieces3, name)
    total = SymbolSum()
    target = CycleSum()
    for (s, e3), piece3 in zip(fac3, pieces3[1:]):
        mid = base.with_coords([X, Y, piece3, f4, f5])
        parts += _split_chain(mid, 5, pieces5, name)
        for (u, e5), piece5 in zip(fac5, pieces5[1:]):
            if abs(e3) != 1 or abs(e5) != 1:
                raise TemplateMismatch(f"{rule}: repeated linear factor")
            g3, g5 = ONE - s * X, ONE - u / Y
            leaf = base.with_coords([X, Y, g3, f4, g5])
            if e3 < 0:
                parts.append(_invert(base.with_coords([X, Y, piece3, f4, piece5]), 3, name))
            if e5 < 0:
                parts.append(_invert(base.with_coords([X, Y, g3, f4, piece5]), 5, name))
            parts += _us(leaf, s, u, name)
            total = total + SymbolSum.symbol(s * u, e3 * e5)
            # the cycle is {us}; {1/t} = {t} is applied only in the SymbolSum
            target = target + as_sum([brace(s * u)]).scaled(e3 * e5)
    vi = derive(name, as_sum(t), target, parts)
    return total, vi


def _invert(t: CycleTerm, position: int, name):
    """[.., 1/g, ..] = -[.., g, ..] via the split of the unit coordinate."""
    g = t.coords[position - 1]
    unit = t.with_coords([*t.coords[:position - 1], ONE, *t.coords[position:]])
    return split_single(unit, position, (g, g.inverse()), name=f"{name}: invert t{position}")


def _split_chain(t: CycleTerm, position: int, pieces, name):
    """Split coordinate ``position`` of ``t`` into ``pieces`` one at a time."""
    out = []
    cur = t
    rest_pieces = list(pieces)
    while len(rest_pieces) > 1:
        g = rest_pieces.pop(0)
        h = const(1)
        for p in rest_pieces:
            h = h * p
        if g.is_one():
            continue
        if h.is_one():
            break
        out.append(split_single(cur, position, (g, h), name=f"{name}: split t{position}"))
        cur = cur.with_coords([*cur.coords[:position - 1], h, *cur.coords[position:]])
    return out


def _us(leaf: CycleTerm, s: RatFunc, u: RatFunc, name):
    """[x, y, 1 - s x, 1 - y/x, 1 - u/y] = {us}_c."""
    out = []
    sigma = Substitution.mobius({"x": X / s, "y": Y / s}, name=f"(x,y)->(x/s,y/s) s={format_expr(s)}")
    rp = reparam(leaf, sigma, name=f"{name}: scale by {format_expr(s)}")
    out.append(rp)
    scaled = reparametrize(leaf, sigma)
    if not s.is_one():
        out.append(split_first_pair(scaled, (s.inverse(), X), "eq32", name=f"{name}: remove {format_expr(s.inverse())}"))
    return out


# ---------------------------------------------------------------------------
# re-verification under a parameter substitution

def _subst_obj(obj, mapping):
    if isinstance(obj, RatFunc):
        return substitute(obj, mapping)
    if isinstance(obj, CycleTerm):
        return obj.with_coords([substitute(f, mapping) for f in obj.coords])
    if isinstance(obj, CycleSum):
        return obj.map_terms(lambda t: _subst_obj(t, mapping))
    if isinstance(obj, Substitution):
        inv = obj.inverse_mapping
        return Substitution({k: substitute(v, mapping) for k, v in obj.mapping.items()},
                            None if inv is None else {k: substitute(v, mapping) for k, v in inv.items()},
                            name=obj.name, degree=obj.degree)
    if isinstance(obj, tuple):
        return tuple(_subst_obj(o, mapping) for o in obj)
    if isinstance(obj, list):
        return [_subst_obj(o, mapping) for o in obj]
    return obj


def resubstitute(vi: VerifiedIdentity, mapping, suffix="", memo=None) -> VerifiedIdentity:
    """Re-run the certificate of ``vi`` with the parameters substituted.

    Every lemma application is re-executed (hypotheses and admissibility are
    checked again); derived identities keep their coefficients and must
    close exactly with negligible discards.  Pass one ``memo`` dict to share
    re-runs between identities with common parts.
    """
    mapping = {k: _rf(v) for k, v in mapping.items()}
    return _resub(vi, mapping, suffix, {} if memo is None else memo)


def substitute_identity(vi: VerifiedIdentity, mapping, name="", label="") -> VerifiedIdentity:
    """Image of ``vi`` under a field embedding given on the parameters.

    Over the function field of the parameters the image of a proved
    identity is proved; when the substitution is a specialization the
    certificate is re-run at the point instead.
    """
    mapping = {k: _rf(v) for k, v in mapping.items()}
    if all(not v.free_symbols() for v in mapping.values()) and _params(vi) <= set(mapping):
        inner = resubstitute(vi, mapping)
        kind = "specialization"
    else:
        inner = vi
        kind = "field-embedding"
    j = Justification("substitution", label or "parameter substitution", (vi.name,),
                      (f"{kind}: {', '.join(f'{k} -> {format_expr(v)}' for k, v in sorted(mapping.items()))}",))
    return VerifiedIdentity(name or f"{label}({vi.name})", _subst_obj(vi.lhs, mapping), _subst_obj(vi.rhs, mapping),
                            (j,), replay_args=(_Sub, (vi, mapping, name, label)))


class _Sub:
    """Marker for substitution nodes in :func:`resubstitute`."""

    def __new__(cls, vi, mapping, name, label):
        return substitute_identity(vi, mapping, name, label)


def _params(vi) -> set:
    out = set()
    for t in (vi.lhs - vi.rhs).terms():
        for f in t.coords:
            out |= f.free_symbols() - set(t.params)
    return out


def _resub(vi, mapping, suffix, memo):
    key = id(vi)
    if key in memo:
        return memo[key]
    name = vi.name + suffix
    if vi.replay_args and vi.replay_args[0] is _Sub:
        inner, m, nm, label = vi.replay_args[1]
        comp = {k: substitute(v, mapping) for k, v in m.items()}
        for k, v in mapping.items():
            comp.setdefault(k, v)
        out = substitute_identity(inner, comp, nm + suffix, label)
        memo[key] = out
        return out
    if vi.parts:
        parts = [(c, _resub(p, mapping, suffix, memo)) for c, p in vi.parts]
        pats = tuple(sorted({_pattern_family(tag) for _, tag in vi.discards})) or ("constant",)
        out = derive(name, _subst_obj(vi.lhs, mapping), _subst_obj(vi.rhs, mapping), parts, patterns=pats)
    elif vi.replay_args:
        fn, args = vi.replay_args
        args = _subst_obj(args, mapping)
        if args and isinstance(args[-1], str):
            args = (*args[:-1], name)
        out = fn(*args)
    else:
        raise RewriteError(f"{vi.name}: no certificate to replay")
    memo[key] = out
    return out


def _pattern_family(tag: str) -> str:
    return "weight-one-product" if tag.startswith("weight-one-product") else "constant"
