"""The ten steps of the proof, each replayed as certified identities."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from ..algebra import RatFunc, const, format_expr, parse_expr, sym
from ..boundary import AdmissibilityReport, is_admissible
from ..cycles import CycleSum, CycleTerm, Substitution, as_sum, reparametrize, term
from ..rewrite import (RewriteError, VerifiedIdentity, admissible, brace, derive, eval_stuv, move_constant,
                       pair_split, reparam, split_f4, split_first_pair, split_single,
                       substitute_identity)
from ..symbols import SymbolSum
from . import catalog as cat
from . import functions as fn
from .functions import A, B, k, kappa, kc, l, l1, l2, mu, v

__all__ = ["StepFailed", "StepResult", "replay_step", "STEP_TITLES", "face_summary"]

X, Y = sym("x"), sym("y")
ONE = const(1)
_a, _b, _c = sym("a"), sym("b"), sym("c")

STEP_TITLES = {
    1: "Construction of {k(c)}",
    2: "The key reparametrization and a simple expression of {k(c)}",
    3: "Some admissible cycles for decomposition of {k(c)}",
    4: "Decomposition of rho_x Z2(A,A) + rho_y Z4(A,A) = X1 - X2",
    5: "Computation of X1",
    6: "Decomposition of X2 = Y1 + Y2 + Y3 + Y4",
    7: "Computation of Y1 + Y2",
    8: "Computation of Y3 + Y4",
    9: "Final decomposition of {k(c)} into T_i(F)",
    10: "Final computation of {k(c)}",
}


class StepFailed(RewriteError):
    def __init__(self, step, msg):
        super().__init__(f"step {step}: {msg}")
        self.step = step


@dataclass
class StepResult:
    step: int
    identity: VerifiedIdentity  # the displayed equation of the step
    identities: list = field(default_factory=list)  # all sub-identities, in order
    reports: dict = field(default_factory=dict)  # name -> AdmissibilityReport
    checks: list = field(default_factory=list)  # verified field identities (text)
    symbols: dict = field(default_factory=dict)  # name -> SymbolSum (step 10)
    extra: dict = field(default_factory=dict)  # auxiliary identities used by later steps
    status: str = "VERIFIED"

    @property
    def title(self):
        return STEP_TITLES[self.step]


def _check(step, res: StepResult, label: str, lhs: RatFunc, rhs: RatFunc):
    if lhs != rhs:
        raise StepFailed(step, f"{label}: {format_expr(lhs)} != {format_expr(rhs)}")
    res.checks.append(f"{label}: {format_expr(lhs)} = {format_expr(rhs)}")


def _nonzero(step, res: StepResult, label: str, f: RatFunc):
    if f.is_zero():
        raise StepFailed(step, f"{label} vanishes")
    res.checks.append(f"{label} = {format_expr(f)} != 0")


def _report(step, res: StepResult, name: str, t: CycleTerm):
    rep = is_admissible(t)
    if not rep.admissible:
        raise StepFailed(step, f"{name} is not admissible")
    res.reports[name] = rep
    return rep


def _derive(step, res, name, lhs, rhs, parts, patterns=("constant",)):
    try:
        vi = derive(name, lhs, rhs, parts, patterns=patterns)
    except RewriteError as exc:
        raise StepFailed(step, str(exc)) from None
    res.identities.append(vi)
    return vi


def _leaf(step, res, fn_, *args, **kw):
    try:
        vi = fn_(*args, **kw)
    except RewriteError as exc:
        raise StepFailed(step, str(exc)) from None
    res.identities.append(vi)
    return vi


def _fx(F):
    return cat.one_var(F, "x")


# ---------------------------------------------------------------------------
# step 1

def _step1():
    res = StepResult(1, None)
    _check(1, res, "1 - k(c)", ONE - kc, (_c - 1) * (1 + _a * _b * _c) / (_a * _b * _c * A("c")))
    _nonzero(1, res, "1 - k(c)", ONE - kc)
    lam = _a * _b / mu
    t1 = term([lam * X, lam * Y, ONE - X, ONE - Y / X, ONE - kc / Y])
    sp = _leaf(1, res, split_first_pair, t1, (lam, X), "eq32", name="rmab: remove ab/mu")
    rmab = _derive(1, res, "rmab", brace(kc), t1, [sp])
    kk = Substitution.per_variable({"x": k("x"), "y": k("y")}, name="(x,y)->(k(x),k(y))")
    rp = _leaf(1, res, reparam, t1, kk, name="reparametrize (k(x),k(y))")
    target = cat.Zf(fn.B("x") / (mu * X * A("x")), fn.B("x") / (mu * X * A("x")))
    res.identity = _derive(1, res, "4{k(c)} = Z(B/muFA, B/muFA)", brace(kc).scaled(4), target, [rmab, rp])
    return res


# ---------------------------------------------------------------------------
# step 2

def _step2():
    s1 = replay_step(1)
    res = StepResult(2, None)
    muF = mu * X / B("x")
    ZA = cat.Zf("A", "A")
    t = cat.Zf(mu * X * A("x") / B("x"), mu * X * A("x") / B("x"))
    sp = _leaf(2, res, split_first_pair, t, (A("x"), muF), "eq32", name="AA: split muFA/B = A * muF/B")
    rx = _leaf(2, res, reparam, ZA, cat.RHO_X, name="Z(A,A) = rho_x Z(A,A)")
    ry = _leaf(2, res, reparam, ZA, cat.RHO_Y, name="Z(A,A) = rho_y Z(A,A)")
    rxy = _leaf(2, res, reparam, ZA, cat.RHO_XY, name="Z(A,A) = rho_xy Z(A,A)")
    res.identity = _derive(2, res, "AA", brace(kc).scaled(4), ZA.scaled(4), [s1.identity, sp, rx, ry, rxy])
    for name in ("rho_x", "rho_y", "rho_xy", "sigma_xy"):
        s = cat.INVOLUTIONS[name]
        for var in s.mapping:
            _check(2, res, f"{name} twice on {var}", s(s(sym(var))), sym(var))
    _check(2, res, "y2", fn.y2, -(_a * _c - _a + 1) / (_a * (_b * _c - _c + 1)))
    _check(2, res, "A(y2)", _sub(A("x"), fn.y2), _c * mu / B("c"))
    _check(2, res, "B(y2)", _sub(B("x"), fn.y2), -mu / B("c"))
    _check(2, res, "ab*y2 + 1", _a * _b * fn.y2 + 1, (1 - _c) * (_a * _b - _b + 1) / (_b * _c - _c + 1))
    _check(2, res, "1 - k(x)", ONE - k("x"), (X - 1) * (1 + _a * _b * X) / (_a * _b * X * A("x")))
    r = (Y - X) * (Y * B("x") + A("x")) / (Y * A("y") * B("x"))
    _check(2, res, "1 - k(y)/k(x)", ONE - k("y") / k("x"), r)
    _check(2, res, "1 - k(y)/k(x) (second form)", r, (Y - X) * (X * B("y") + A("y")) / (Y * A("y") * B("x")))
    for name, tt in (("Z_A", ZA), ("L", cat.make_cycle("L", check=False)),
                     ("L'", cat.make_cycle("Lp", check=False)), ("L''", cat.make_cycle("Lpp", check=False))):
        _report(2, res, name, tt)
    return res


_F4PP = (A("y") / Y) * (ONE - mu * X / (A("y") * B("x")))
_KX, _KY = kappa * A("x"), kappa * A("y")
_KMX, _KMY = kappa * mu * X / B("x"), kappa * mu * Y / B("y")
_VB = (_a * _b * X + 1) / (_a * _b * A("x"))


def _remove_kappa_rho(step, res, t, name):
    """[k f1, k f1, ...] = [f1, f1, ...] when the fourth coordinate has a rho branch.

    Both sides are written as rho_y + rho_x images whose fourth coordinates
    only meet y = x; the constant is moved by two paired splits.
    """
    f1 = t.coords[0] / kappa
    base = t.with_coords([f1, t.coords[1] / kappa, *t.coords[2:]])
    out = []
    for tt in (t, base):
        out.append(_leaf(step, res, reparam, tt, cat.RHO_Y, name=f"{name}: rho_y"))
        out.append(_leaf(step, res, reparam, tt, cat.RHO_X, name=f"{name}: rho_x"))
    p1 = reparametrize(t, cat.RHO_Y)
    p2 = reparametrize(t, cat.RHO_X)
    g2 = p1.coords[1] / kappa
    out.append(_leaf(step, res, pair_split, p1, p2, 2, (kappa, _sub(g2, X, "y")), name=f"{name}: move kappa (2)"))
    q1 = p1.with_coords([p1.coords[0], g2, *p1.coords[2:]])
    q2 = p2.with_coords([_sub(g2, X, "y"), *p2.coords[1:]])
    out.append(_leaf(step, res, pair_split, q2, q1, 2, (kappa, f1), name=f"{name}: move kappa (1)"))
    return _derive(step, res, name, t, base, out)


def _step3():
    res = StepResult(3, None)
    ZA = cat.Zf("A", "A")
    Zk = cat.Zf(kappa * A("x"), kappa * A("x"))
    q4 = fn.q4
    Zp = term([_KX, _KY, ONE - k("x"), q4, l("y")])
    Zpp = term([_KX, _KY, ONE - k("x"), _F4PP, l("y")])
    Zp1 = term([A("x"), A("y"), ONE - k("x"), q4, l("y")])
    Zpp1 = term([A("x"), A("y"), ONE - k("x"), _F4PP, l("y")])
    sZA = _leaf(3, res, split_f4, ZA, (q4, _F4PP), name="Z(A,A) = Z'_1 + Z''_1")
    sZk = _leaf(3, res, split_f4, Zk, (q4, _F4PP), name="Z(A,A) = Z' + Z''")
    kp = _leaf(3, res, split_first_pair, Zp, (kappa, A("x")), "eq32", name="Z': remove kappa")
    kpp = _remove_kappa_rho(3, res, Zpp, "Z'': remove kappa")
    zsplit = _derive(3, res, "Z(A,A) = Z'(A,A) + Z''(A,A)", ZA, as_sum([Zp, Zpp]), [sZA, kp, kpp])
    Z1, Z2, Z3, Z4 = (cat._Z(i, False) for i in (1, 2, 3, 4))
    Z1r, Z2r, Z3r, Z4r = (cat._Z(i, True) for i in (1, 2, 3, 4))
    s13 = _leaf(3, res, split_single, Zp, 3, ((X - 1) / X, _VB), name="Z' = Z1 + Z3")
    r1 = _leaf(3, res, split_first_pair, Z1, (kappa, A("x")), "eq32", name="Z1: remove kappa")
    r3 = _leaf(3, res, split_first_pair, Z3, (kappa, A("x")), "eq32", name="Z3: remove kappa")
    r2 = _leaf(3, res, split_f4, Z2, (A("y") / Y, Z2r.coords[3]), name="Z2: remove A(y)/y")
    # Z'' = Z2 + Z4 via rho_y Z'' + rho_x Z'' and the paired split of 1 - k(x)
    P1 = reparametrize(Zpp, cat.RHO_Y)
    P2 = reparametrize(Zpp, cat.RHO_X)
    e1 = _leaf(3, res, reparam, Zpp, cat.RHO_Y, name="Z'' = rho_y Z''")
    e2 = _leaf(3, res, reparam, Zpp, cat.RHO_X, name="Z'' = rho_x Z''")
    ps = _leaf(3, res, pair_split, P1, P2, 3, ((X - 1) / X, _VB), name="rho_y Z'' + rho_x Z'': split 1 - k(x)")
    R3 = P1.with_coords([P1.coords[0], P1.coords[1], _VB, *P1.coords[3:]])
    R4 = P2.with_coords([P2.coords[0], P2.coords[1], _VB, *P2.coords[3:]])
    mc = _leaf(3, res, move_constant, R3, R4, 3, ONE / _b, name="move 1/b in the pair (rho_y Z4, rho_x Z4)")
    im = [_leaf(3, res, reparam, Z2, cat.RHO_Y, name="Z2 = rho_y Z2"),
          _leaf(3, res, reparam, Z2, cat.RHO_X, name="Z2 = rho_x Z2"),
          _leaf(3, res, reparam, Z4r, cat.RHO_Y, name="Z4 = rho_y Z4"),
          _leaf(3, res, reparam, Z4r, cat.RHO_X, name="Z4 = rho_x Z4")]
    zpp = _derive(3, res, "Z''(A,A) = Z2(A,A) + Z4(A,A)", Zpp, as_sum([Z2, Z4r]), [e1, e2, ps, mc, *im])
    red = [r1, r3, r2]
    zsum = _derive(3, res, "Z(A,A) = Z1 + Z2 + Z3 + Z4", ZA, as_sum([Z1r, Z2r, Z3r, Z4r]),
                   [zsplit, s13, zpp, *red], patterns=("constant", "weight-one-product"))
    rxy = _leaf(3, res, reparam, Z1, cat.RHO_XY, name="Z3fB = rho_xy Z1")
    rx2 = _leaf(3, res, reparam, Z2r, cat.RHO_X, name="Z2 = rho_x Z2")
    ry4 = _leaf(3, res, reparam, Z4r, cat.RHO_Y, name="Z4 = rho_y Z4")
    s2 = replay_step(2)
    rhs = as_sum([Z3r, cat.make_cycle("Z3fB", check=False), cat.make_cycle("rhoxZ2", check=False),
                  cat.make_cycle("rhoyZ4", check=False)])
    res.identity = _derive(3, res, "kc", brace(kc), rhs, [s2.identity, zsum, r1, rxy, rx2, ry4])
    for name, tt in (("Z1", Z1), ("Z2", Z2), ("Z3", Z3), ("Z4", Z4), ("Z1 reduced", Z1r), ("Z2 reduced", Z2r),
                     ("Z3 reduced", Z3r), ("Z4 reduced", Z4r), ("Z'", Zp), ("Z''", Zpp)):
        _report(3, res, name, tt)
    return res


_F1X = (_b - 1) * X / B("x")
_F1Y = (_b - 1) * Y / B("y")
_F1Y = (_b - 1) * Y / B("y")
_G4 = -A("x") / (mu * X)  # A/(-mu f)
_W1 = ("constant", "weight-one-product")


def _step4():
    res = StepResult(4, None)
    t1 = cat.make_cycle("rhoxZ2", check=False)
    t2 = cat.make_cycle("rhoyZ4", check=False)
    ps = _leaf(4, res, pair_split, t1, t2, 2, (_G4, (1 - _b) * X), name="rho24: split (b-1)A/mu = g h")
    X1 = cat.make_cycle("X1", check=False)
    X2 = cat.make_cycle("X2", check=False)
    res.identity = _derive(4, res, "rho24", as_sum([t1, t2]), X1 - X2, [ps])
    u1 = term([1 / _F1X, (1 - _b) * Y, v("x"), fn.q4, l("y")])
    u2 = term([(1 - _b) * X, 1 / _F1Y, v("x"), fn.p4, l("y")])
    ps2 = _leaf(4, res, pair_split, u1, u2, 2, (-ONE, (_b - 1) * X), name="X2: remove -1")
    res.extra = {"X2": _derive(4, res, "X2 reduced", X2, _x2_reduced(), [ps2])}
    return res


def _x2_pair():
    return (term([fn.g("x"), fn.h("y"), v("x"), fn.q4, l("y")]),
            term([fn.h("x"), fn.g("y"), v("x"), fn.p4, l("y")]))


def _x2_reduced():
    return as_sum(list(_x2_pair()))


def _t(*coords):
    return term(list(coords))


def _step5():
    res = StepResult(5, None)
    p4, q4, vx, ly = fn.p4, fn.q4, v("x"), l("y")
    X1 = cat.make_cycle("X1", check=False)
    g4y = _sub(_G4, Y)
    parts = [_leaf(5, res, split_f4, cat.tildeZ(_F1X, _G4), (q4, -mu / B("x")), name="X1: p4 = q4 * (-mu/B(x))")]
    tz = _derive(5, res, "X1 = tildeZ((b-1)f/B, A/(-mu f)) + tildeZ(A/(-mu f), (b-1)f/B)", X1,
                 as_sum([cat.tildeZ(_F1X, _G4), cat.tildeZ(_G4, _F1X)]), parts, patterns=_W1)
    Af = A("x") / X
    AB = A("x") / B("x")
    fB = X / B("x")
    z3 = []
    z3.append(_leaf(5, res, split_f4, cat.tildeZ(_G4, _G4), (q4, -mu / B("x")), name="Z3(A/f) = tildeZ(A/f)"))
    z3.append(_leaf(5, res, split_f4, cat.tildeZ(_F1X, _F1X), ((Y - X) / (Y * B("x")), -mu * Y / A("y")),
                    name="Z3(f/B) = tildeZ(f/B)"))
    # move -1/mu from A/(-mu f) in the pair, then split (b-1)A/B = (A/f)((b-1)f/B)
    a1, a2 = cat.tildeZ(_F1X, _G4), cat.tildeZ(_G4, _F1X)
    mv = _leaf(5, res, pair_split, a1, a2, 2, (-ONE / mu, Af), name="X1: move -1/mu")
    fg = _leaf(5, res, split_first_pair, cat.tildeZ((_b - 1) * AB, (_b - 1) * AB), (Af, _F1X), "eq32",
               name="tildeZ((b-1)A/B): g = A/f, h = (b-1)f/B")
    c1 = _leaf(5, res, split_first_pair, cat.tildeZ((_b - 1) * AB, (_b - 1) * AB), (_b - 1, AB), "eq32",
               name="remove b-1 from (b-1)A/B")
    c2 = _leaf(5, res, split_first_pair, cat.tildeZ(_G4, _G4), (-ONE / mu, Af), "eq32", name="remove -1/mu from A/(-mu f)")
    rhs = as_sum([cat.make_cycle("Z3AB", check=False)]) - as_sum([cat.make_cycle(n, check=False) for n in ("Z3Af", "Z3fB")])
    res.identity = _derive(5, res, "X1", X1, rhs, [tz, *z3, mv, fg, c1, c2], patterns=_W1)
    for name in ("Z3AB", "Z3Af", "Z3fB"):
        _report(5, res, name, cat.make_cycle(name, check=False))
    for F in (_F1X, _G4):
        for G in (_F1X, _G4):
            _report(5, res, f"tildeZ({format_expr(F)}, {format_expr(G)})", cat.tildeZ(F, G))
    return res


def _step6():
    res = StepResult(6, None)
    _check(6, res, "l1 * l2", l1("y") * l2("y"), l("y"))
    _check(6, res, "l1(0)", _sub(l1("y"), const(0), "y"), ONE)
    _check(6, res, "l2(0)", _sub(l2("y"), const(0), "y"), ONE)
    u1, u2 = _x2_pair()
    ps = _leaf(6, res, pair_split, u1, u2, 5, (l1("y"), l2("y")), name="X2: split l = l1 l2")
    Ys = [cat.make_cycle(f"Y{i}", check=False) for i in (1, 2, 3, 4)]
    res.identity = _derive(6, res, "X2", cat.make_cycle("X2", check=False), as_sum(Ys),
                           [replay_step(4).extra["X2"], ps])
    for i, tt in enumerate(Ys, 1):
        _report(6, res, f"Y{i}", tt)
    return res


def _y12_rhs():
    G, gx, gy, hx, hy = B, fn.g("x"), fn.g("y"), fn.h("x"), fn.h("y")
    dv, al1 = fn.delta * v("x"), fn.alpha * l1("y")
    return as_sum([_t(G("x"), G("y"), dv, fn.q4, al1)]) - as_sum([
        _t(gx, gy, v("x"), fn.p4, l1("y")), _t(hx, hy, dv, fn.q4, l1("y"))])


def _step7():
    res = StepResult(7, None)
    gx, gy, hx, hy = fn.g("x"), fn.g("y"), fn.h("x"), fn.h("y")
    Gx, Gy = B("x"), B("y")
    vx, dv, al1, ly = v("x"), fn.delta * v("x"), fn.alpha * l1("y"), l1("y")
    q4, p4, r4, s4, w4 = fn.q4, fn.p4, fn.r4, fn.s4, fn.w4
    _check(7, res, "g h = B", gx * hx, Gx)
    _check(7, res, "alpha l1(1/(1-b))", _sub(al1, 1 / (1 - _b), "y"), ONE)
    _check(7, res, "delta v(oo)", _sub(_sub(dv, 1 / X), const(0)), ONE)
    L = lambda *a, **k: _leaf(7, res, *a, **k)
    tq, ts = _t(Gx, Gy, dv, q4, al1), _t(Gx, Gy, dv, s4, al1)
    parts = [
        L(split_f4, ts, (q4, s4 / q4), name="s4 = q4 (b-1)A(y)/B(y)"),
        L(split_first_pair, tq, (gx, hx), "eq31", name="eq31, q4 realization"),
        L(split_first_pair, ts, (gx, hx), "eq31", name="eq31, s4 realization"),
        L(pair_split, ts, tq, 2, (gx, hx), name="mixed realizations"),
        # chain through [g, gh, .] + [gh, g, .]
        L(split_f4, _t(Gx, gy, dv, s4, al1), (r4, X), name="s4 = r4 x"),
        L(move_constant, _t(gx, Gy, dv, q4, al1), _t(Gx, gy, dv, r4, al1), 3, fn.delta, name="drop delta"),
        L(split_f4, _t(Gx, gy, vx, r4, al1), (w4, r4 / w4), name="r4 = w4 (r4/w4)"),
        L(split_f4, _t(Gx, gy, vx, r4 / w4, al1), ((_b - 1) * Gx / X, (Y - 1) / Gy), name="r4/w4 split"),
        L(move_constant, _t(gx, Gy, vx, q4, al1), _t(Gx, gy, vx, w4, al1), 5, fn.alpha, name="drop alpha"),
        L(split_f4, _t(Gx, gy, vx, p4, ly), (w4, p4 / w4), name="p4 = w4 (-mu(y-1)/A(y))"),
        L(pair_split, _t(gx, Gy, vx, q4, ly), _t(Gx, gy, vx, p4, ly), 2, (gx, hx), name="split gh, first chain"),
        L(split_f4, _t(gx, gy, vx, p4, ly), (q4, p4 / q4), name="p4 = q4 (-mu/B(x))"),
        # chain through [h, gh, .] + [gh, h, .]
        L(move_constant, _t(hx, Gy, dv, q4, al1), _t(Gx, hy, dv, s4, al1), 5, fn.alpha, name="drop alpha"),
        L(split_f4, _t(Gx, hy, dv, s4, ly), (q4, s4 / q4), name="s4 = q4 (b-1)A(y)/B(y)"),
        L(pair_split, _t(hx, Gy, dv, q4, ly), _t(Gx, hy, dv, q4, ly), 2, (gx, hx), name="split gh, second chain"),
        L(split_f4, _t(hx, gy, dv, p4, ly), (q4, p4 / q4), name="p4 = q4 (-mu/B(x))"),
        L(move_constant, _t(hx, gy, dv, p4, ly), _t(gx, hy, dv, q4, ly), 3, fn.delta, name="drop delta"),
    ]
    Y12 = as_sum([cat.make_cycle("Y1", check=False), cat.make_cycle("Y2", check=False)])
    res.identity = _derive(7, res, "Y12", Y12, _y12_rhs(), parts, patterns=_W1)
    return res


def _tau_id(vi, name):
    return substitute_identity(vi, cat._TAU_MAP, name=name, label="tau_ac")


def _step8():
    res = StepResult(8, None)
    L = lambda *a, **k: _leaf(8, res, *a, **k)
    Ys = {i: cat.make_cycle(f"Y{i}", check=False) for i in (1, 2, 3, 4)}
    _check(8, res, "tau_ac sigma_xy l1 = l2", cat.apply_tau(cat.SIGMA_XY(l1("y"))), l2("y"))
    parts = []
    for i, f4 in ((1, fn.p4), (2, fn.q4)):
        r = L(reparam, Ys[i], cat.SIGMA_XY, name=f"Y{i} = sigma_xy Y{i}")
        tr = _tau_id(r, f"tau_ac(Y{i}) = tau_ac sigma_xy Y{i}")
        res.identities.append(tr)
        t = cat.apply_tau(reparametrize(Ys[i], cat.SIGMA_XY))
        parts += [tr, L(split_f4, t, (f4, t.coords[3] / f4), name=f"tau_ac sigma_xy Y{i}: f4 -> {'p4' if i == 1 else 'q4'}")]
    y3p, y4p = cat.make_cycle("Y3p", check=False), cat.make_cycle("Y4p", check=False)
    h, f1 = fn.h("x"), _F1X
    hy, l2y, vx = fn.h("y"), l2("y"), v("x")
    parts += [
        L(pair_split, y4p, y3p, 2, (-ONE, f1), name="Y4', Y3': split off -1 from (1-b)y/B(y)"),
        L(move_constant, _t(f1, -hy, _VB, fn.q4, l2y), _t(-h, _F1Y, _VB, fn.p4, l2y), 3, fn.delta,
          name="drop delta"),
        L(pair_split, _t(f1, -hy, vx, fn.q4, l2y), _t(-h, _F1Y, vx, fn.p4, l2y), 2, (-ONE, h),
          name="split off -1 from (1-b)x"),
    ]
    _check(8, res, "(abx+1)/(abA(x)) = delta v", _VB, fn.delta * v("x"))
    lhs = as_sum([Ys[3], Ys[4]])
    rhs = -as_sum([cat.apply_tau(Ys[1]), cat.apply_tau(Ys[2])])
    res.identity = _derive(8, res, "Y34", lhs, rhs, parts, patterns=_W1)
    for nm, tt in (("Y3'", y3p), ("Y4'", y4p)):
        _report(8, res, nm, tt)
    return res


def _claim_rhs():
    T = cat.Tcycle
    pos = as_sum([T(1, "f"), T(2, "f"), T(3, "f"), T(2, "A"), T(3, "A"), T(4, "A"),
                  cat.apply_tau(T(1, "B"))])
    neg = as_sum([T(1, "A/f"), T(2, "A/f"), T(1, "B"), cat.apply_tau(T(3, "f")), cat.apply_tau(T(2, "A"))])
    return pos - neg


def _step9():
    res = StepResult(9, None)
    L = lambda *a, **k: _leaf(9, res, *a, **k)
    T = cat.Tcycle
    vx, dv, q4 = v("x"), fn.delta * v("x"), fn.q4
    _check(9, res, "eps1(A) eps2(A)", fn.eps(1, "A") * fn.eps(2, "A"), ONE)
    _check(9, res, "rho_xy l1 = eps2(A) l2", cat.RHO_XY(l1("y")), fn.eps(2, "A") * l2("y"))
    _check(9, res, "rho_xy l = l", cat.RHO_XY(l("y")), l("y"))
    # needsim
    ty12 = _tau_id(replay_step(7).identity, "tau_ac(Y12)")
    res.identities.append(ty12)
    gg = _t(fn.g("x"), fn.g("y"), vx, fn.p4, l1("y"))
    hh = _t(fn.h("x"), fn.h("y"), dv, q4, l1("y"))
    GG = _t(B("x"), B("y"), dv, q4, fn.alpha * l1("y"))
    core = as_sum([gg, hh]) - as_sum([GG])
    z3 = as_sum([cat.make_cycle(n, check=False) for n in ("Z3AB",)] + [_Z3r()]) - as_sum(
        [cat.make_cycle("Z3Af", check=False)])
    needsim = _derive(9, res, "needsim", brace(kc), z3 + core - as_sum([cat.apply_tau(t) for t in (gg, hh)])
                      + as_sum([cat.apply_tau(GG)]),
                      [replay_step(k).identity for k in (3, 4, 5, 6, 7, 8)] + [replay_step(4).extra["X2"], ty12],
                      patterns=_W1)
    # pieces
    ident = {}
    z3r = _Z3r()
    ident["Z3r"] = L(split_single, z3r, 5, (fn.eps(1, "A") * l1("y"), fn.eps(2, "A") * l2("y")),
                     name="Z3(A,A) = T3(A) + T4(A)")
    ab = cat.make_cycle("Z3AB", check=False)
    r_ab = L(reparam, ab, cat.RHO_XY, name="rho_xy Z3(A/B)")
    u = reparametrize(ab, cat.RHO_XY)
    xy = u.with_coords([X, Y, *u.coords[2:]])
    ident["Z3AB"] = _derive(9, res, "Z3(A/B) = T1(f) + T2(f)", as_sum([ab]), as_sum([T(1, "f"), T(2, "f")]), [
        r_ab, L(split_first_pair, u, (-ONE, X), "eq32", name="remove -1"),
        L(split_single, xy, 5, (l1("y"), l2("y")), name="split l = l1 l2")], patterns=_W1)
    af = cat.make_cycle("Z3Af", check=False)
    af1 = _t(A("x") / X, A("y") / Y, vx, q4, l("y"))
    u = reparametrize(af1, cat.RHO_XY)
    w = u.with_coords([X / A("x"), Y / A("y"), *u.coords[2:]])
    w1 = w.with_coords([A("x") / X, A("y") / Y, *w.coords[2:]])
    w2 = w1.with_coords([*w1.coords[:3], ONE - X / Y, w1.coords[4]])
    w3 = w2.with_coords([*w2.coords[:2], (1 - _a) * (X - 1) / X, *w2.coords[3:]])
    ident["Z3Af"] = _derive(9, res, "Z3(A/f) = T1(A/f) + T2(A/f)", as_sum([af]),
                            as_sum([T(1, "A/f"), T(2, "A/f")]), [
        L(split_first_pair, af, (-ONE / mu, A("x") / X), "eq32", name="remove -1/mu"),
        L(reparam, af1, cat.RHO_XY, name="rho_xy"),
        L(split_first_pair, u, (-mu, X / A("x")), "eq32", name="remove -mu"),
        L(split_f4, w2, (w1.coords[3], w2.coords[3] / w1.coords[3]), name="f4 -> 1 - x/y"),
        L(split_single, w3, 3, (1 - _a, (X - 1) / X), name="add (1-a)"),
        L(split_single, w3, 5, (l1("y"), l2("y")), name="split l = l1 l2")], patterns=_W1)
    u = reparametrize(gg, cat.RHO_XY)
    ka = u.with_coords([kappa * A("x"), kappa * A("y"), *u.coords[2:]])
    aa = ka.with_coords([A("x"), A("y"), *ka.coords[2:]])
    ident["gg"] = _derive(9, res, "[g, g, v, p4, l1] = T2(A)", as_sum([gg]), as_sum([T(2, "A")]), [
        L(reparam, gg, cat.RHO_XY, name="rho_xy"),
        L(split_first_pair, ka, (kappa, A("x")), "eq32", name="remove kappa"),
        L(split_f4, aa, (T(2, "A").coords[3], aa.coords[3] / T(2, "A").coords[3]), name="f4 -> (y-x)/A(y)")],
        patterns=_W1)
    u = hh.with_coords([X, Y, *hh.coords[2:]])
    ident["hh"] = _derive(9, res, "[h, h, delta v, q4, l1] = T3(f)", as_sum([hh]), as_sum([T(3, "f")]), [
        L(split_first_pair, hh, (_b - 1, X), "eq32", name="remove b-1"),
        L(split_f4, u, ((Y - X) / Y, Y / A("y")), name="q4 = (y-x)/y * y/A(y)")], patterns=_W1)
    if as_sum([GG]) != as_sum([T(1, "B")]):
        raise StepFailed(9, "[B, B, delta v, q4, alpha l1] != T1(B)")
    res.checks.append("[B, B, delta v, q4, alpha l1] = T1(B)")
    taus = [_tau_id(ident[k], f"tau_ac({ident[k].name})") for k in ("gg", "hh")]
    res.identities.extend(taus)
    res.identity = _derive(9, res, "Claim", brace(kc), _claim_rhs(), [needsim, *ident.values(), *taus],
                           patterns=_W1)
    for n, (i, F) in {"T1(f)": (1, "f"), "T2(f)": (2, "f"), "T3(f)": (3, "f"), "T2(A)": (2, "A"),
                      "T3(A)": (3, "A"), "T4(A)": (4, "A"), "T1(A/f)": (1, "A/f"), "T2(A/f)": (2, "A/f"),
                      "T1(B)": (1, "B")}.items():
        _report(9, res, n, T(i, F))
    return res


def _Z3r():
    return cat.make_cycle("Z3", ("AA", "reduced"), check=False)


def _per_var(text, name):
    fx = parse_expr(text)
    return Substitution.per_variable({"x": fx, "y": parse_expr(text.replace("x", "y"))}, name=name)


STEP10_SUBSTITUTIONS = {
    "A": _per_var("x + (a - 1)/a", "x -> x + (a-1)/a"),
    "A/f": _per_var("(1 - a)/(a*x - a)", "x -> (1-a)/(ax-a)"),
    "B": _per_var("(x - 1)/(b - 1)", "x -> (x-1)/(b-1)"),
}
STEP10_TABLE = (("f", (1, 2, 3)), ("A", (2, 3, 4)), ("A/f", (1, 2)), ("B", (1,)))
STEP10_TAU = ("T3(f)", "T2(A)", "T1(B)")


def _eval_T(step, res, i, F):
    """T_i(F) as a SymbolSum, certified by reparametrization, an f4 fix and stuv."""
    name = f"T{i}({F})"
    t = cat.Tcycle(i, F)
    parts, cur = [], t
    sigma = STEP10_SUBSTITUTIONS.get(F)
    if sigma is not None:
        parts.append(_leaf(step, res, reparam, t, sigma, name=f"{name}: {sigma.name}"))
        cur = reparametrize(t, sigma)
    f4 = cur.coords[3]
    if f4 not in (ONE - X / Y, ONE - Y / X):
        for target in (ONE - X / Y, ONE - Y / X):
            ratio = f4 / target
            if not (ratio.depends_on(("x",)) and ratio.depends_on(("y",))):
                break
        parts.append(_leaf(step, res, split_f4, cur, (target, ratio), name=f"{name}: f4 -> {format_expr(target)}"))
        cur = cur.with_coords([*cur.coords[:3], target, cur.coords[4]])
    try:
        symbols, vi = eval_stuv(cur, name=f"{name}: stuv")
    except RewriteError as exc:
        raise StepFailed(step, str(exc)) from None
    res.identities.append(vi)
    ident = _derive(step, res, name, as_sum([t]), vi.rhs, [*parts, vi], patterns=_W1)
    return symbols, ident


def _step10():
    res = StepResult(10, None)
    idents = {}
    for F, idx in STEP10_TABLE:
        for i in idx:
            sym_, vi = _eval_T(10, res, i, F)
            res.symbols[f"T{i}({F})"] = sym_
            idents[f"T{i}({F})"] = vi
    for n in STEP10_TAU:
        vi = _tau_id(idents[n], f"tau_ac({n})")
        res.identities.append(vi)
        res.symbols[f"tau_ac({n})"] = res.symbols[n].substitute(cat._TAU_MAP)
        idents[f"tau_ac({n})"] = vi
    if res.symbols["T1(f)"] != SymbolSum.symbol(_c):
        raise StepFailed(10, f"T1(f) = {res.symbols['T1(f)']}, expected {{c}}")
    res.checks.append("T1(f) = {c}")
    res.extra = idents
    res.identity = idents["T1(f)"]
    return res


def _sub(f, value, var="x"):
    from ..algebra import substitute
    return substitute(f, {var: value})


_STEPS = {1: _step1, 2: _step2, 3: _step3, 4: _step4, 5: _step5, 6: _step6, 7: _step7, 8: _step8, 9: _step9, 10: _step10}


@lru_cache(maxsize=None)
def replay_step(k: int) -> StepResult:
    """Replay step ``k`` (earlier steps are replayed first)."""
    if k not in STEP_TITLES:
        raise ValueError(f"no step {k}")
    if k not in _STEPS:
        raise StepFailed(k, "not implemented")
    return _STEPS[k]()


def face_summary(rep: AdmissibilityReport, exceptional: bool = False):
    """Faces all of whose components lie in some {t_j = 1}: face -> (j, ...).

    Strict components only unless ``exceptional``; each component counts
    towards every face it lies on.
    """
    out = {}
    for f in rep.findings:
        if len(f.components) != 1 or f.components[0].startswith("E[") != exceptional:
            continue
        for face in f.faces:
            out.setdefault(face, []).append(f)
    summary = {}
    for face, fs in sorted(out.items()):
        if all(f.contained_in for f in fs):
            summary[face] = tuple(sorted({f.contained_in[0] for f in fs}))
    return summary
