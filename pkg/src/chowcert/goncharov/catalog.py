"""Named cycles, involutions and the parameter substitution tau."""

from __future__ import annotations

from typing import Sequence

from ..algebra import RatFunc, const, parse_expr, substitute, sym
from ..cycles import CycleSum, CycleTerm, Substitution, as_sum, term
from ..rewrite import InadmissibleResult, admissible, brace
from ..symbols import ETA, SymbolSum, tcal_orbit
from . import functions as fn
from .functions import A, B, k, kappa, l, l1, l2, mu, v

__all__ = [
    "UnknownName", "ArityMismatch", "NAMES", "make_cycle", "one_var",
    "RHO_X", "RHO_Y", "RHO_XY", "SIGMA_XY", "TAU", "INVOLUTIONS",
    "apply_involution", "apply_tau", "Zf", "tildeZ", "Tcycle", "tcal",
]


class UnknownName(KeyError):
    pass


class ArityMismatch(TypeError):
    pass


X, Y = sym("x"), sym("y")
ONE = const(1)

RHO_X = Substitution.involution({"x": fn.rho("x")}, name="rho_x")
RHO_Y = Substitution.involution({"y": fn.rho("y")}, name="rho_y")
RHO_XY = Substitution.involution({"x": fn.rho("x"), "y": fn.rho("y")}, name="rho_xy")
SIGMA_XY = Substitution.involution({"x": -X / B("x"), "y": -Y / B("y")}, name="sigma_xy")
INVOLUTIONS = {"rho_x": RHO_X, "rho_y": RHO_Y, "rho_xy": RHO_XY, "sigma_xy": SIGMA_XY}

_TAU_MAP = {"a": parse_expr("(a*b - b + 1)/(b*(a - 1))"), "c": parse_expr("(c*a - a + 1)/(a*b - b + 1)")}
TAU = Substitution(_TAU_MAP, name="tau_ac", degree=1)


def apply_involution(t, which: str):
    """Coordinate-wise substitution by one of the named involutions."""
    try:
        s = INVOLUTIONS[which]
    except KeyError:
        raise UnknownName(which) from None
    if isinstance(t, CycleSum):
        return t.map_terms(s.apply_term)
    if isinstance(t, RatFunc):
        return s(t)
    missing = set(s.mapping) - set(t.params)
    if missing:
        raise ValueError(f"{which} acts on {','.join(sorted(missing))}, not a parameter of the term")
    return s.apply_term(t)


def apply_tau(t):
    """Parameter substitution tau_{a,c}; b is fixed."""
    if isinstance(t, SymbolSum):
        return t.substitute(_TAU_MAP)
    if isinstance(t, CycleSum):
        return t.map_terms(TAU.apply_term)
    if isinstance(t, RatFunc):
        return TAU(t)
    return TAU.apply_term(t)


def one_var(F, var: str) -> RatFunc:
    """A one-variable function given in x (or by name), evaluated at ``var``."""
    if isinstance(F, str):
        try:
            F = fn.F(F, "x")
        except KeyError:
            F = parse_expr(F)
    return F if var == "x" else substitute(F, {"x": sym(var)})


def Zf(f1, f2) -> CycleTerm:
    """Z(f1, f2) = [f1(x), f2(y), 1 - k(x), 1 - k(y)/k(x), l(y)]."""
    return term([one_var(f1, "x"), one_var(f2, "y"), ONE - k("x"), ONE - k("y") / k("x"), l("y")])


def tildeZ(f1, f2) -> CycleTerm:
    return term([one_var(f1, "x"), one_var(f2, "y"), v("x"), fn.p4, l("y")])


_F4PP = (A("y") / Y) * (ONE - mu * X / (A("y") * B("x")))
_KA_X, _KA_Y = kappa * A("x"), kappa * A("y")
_V_B = (fn._p("a*b*x + 1")) / (fn._p("a*b") * A("x"))


def _Z(i: int, reduced: bool) -> CycleTerm:
    third = {1: (X - 1) / X, 2: (X - 1) / X, 3: _V_B, 4: _V_B}[i]
    fourth = fn.q4 if i in (1, 3) else _F4PP
    first = (_KA_X, _KA_Y)
    if reduced:
        if i in (1, 3):
            first = (A("x"), A("y"))
        if i == 2:
            fourth = ONE - mu * X / (A("y") * B("x"))
        if i == 4:
            third = v("x")
    return term([*first, third, fourth, l("y")])


def _T(i: int, F: str) -> CycleTerm:
    if F == "A/f" and i in (1, 2):
        return term([A("x") / X, A("y") / Y, (1 - sym("a")) * (X - 1) / X, ONE - X / Y, (l1, l2)[i - 1]("y")])
    if F in ("f", "A") and i in (1, 2):
        Fx, Fy = one_var(F, "x"), one_var(F, "y")
        return term([Fx, Fy, (X - 1) / X, (Y - X) / Fy, fn.eps(i, F) * (l1, l2)[i - 1]("y")])
    if (F == "A" and i in (3, 4)) or (F == "f" and i == 3):
        Fx, Fy = one_var(F, "x"), one_var(F, "y")
        return term([Fx, Fy, _V_B, (Y - X) / Fy, fn.eps(i - 2, F) * (l1, l2)[i - 3]("y")])
    if F == "B" and i == 1:
        return term([B("x"), B("y"), _V_B, fn.q4, fn.alpha * l1("y")])
    raise ArityMismatch(f"T({i},{F}) is not defined")


def Tcycle(i: int, F: str) -> CycleTerm:
    return _T(int(i), F)


def tcal(a) -> SymbolSum:
    """The formal pattern {a} + {1-a} + {1-1/a}."""
    a = a if isinstance(a, RatFunc) else parse_expr(str(a))
    return SymbolSum([(a, 1), (ONE - a, 1), (ONE - a.inverse(), 1)])


def _named():
    g, h, q4, p4 = fn.g, fn.h, fn.q4, fn.p4
    f1 = (sym("b") - 1) * X / B("x")
    f1y = (sym("b") - 1) * Y / B("y")
    gh_x, gh_y = -A("x") / (mu * X), -A("y") / (mu * Y)
    vx = v("x")
    KMY = kappa * mu * Y / B("y")
    table = {
        "ZA": lambda: Zf("A", "A"),
        "Zprime": lambda: term([_KA_X, _KA_Y, ONE - k("x"), q4, l("y")]),
        "Zdoubleprime": lambda: term([_KA_X, _KA_Y, ONE - k("x"), _F4PP, l("y")]),
        # rho_xy Z1(A,A); the sign of the second coordinate follows from rho_xy
        "Z3fB": lambda: term([f1, f1y, vx, (Y - X) / (Y * B("x")), l("y")]),
        "Z3Af": lambda: term([gh_x, gh_y, vx, q4, l("y")]),
        "Z3AB": lambda: term([A("x") / B("x"), A("y") / B("y"), vx, -mu * Y / (A("y") * B("x")) * (ONE - X / Y), l("y")]),
        "rhoxZ2": lambda: term([f1, _KA_Y, vx, q4, l("y")]),
        "rhoyZ4": lambda: term([_KA_X, KMY, vx, p4, l("y")]),
        "X1": lambda: as_sum([term([f1, gh_y, vx, q4, l("y")]), term([gh_x, f1y, vx, p4, l("y")])]),
        "X2": lambda: as_sum([term([1 / f1, (1 - sym("b")) * Y, vx, q4, l("y")]),
                              term([(1 - sym("b")) * X, 1 / f1y, vx, p4, l("y")])]),
        "Y1": lambda: term([g("x"), h("y"), vx, q4, l1("y")]),
        "Y2": lambda: term([h("x"), g("y"), vx, p4, l1("y")]),
        "Y3": lambda: term([g("x"), h("y"), vx, q4, l2("y")]),
        "Y4": lambda: term([h("x"), g("y"), vx, p4, l2("y")]),
        "Y3p": lambda: term([-f1, -h("y"), _V_B, q4, l2("y")]),
        "Y4p": lambda: term([-h("x"), -f1y, _V_B, p4, l2("y")]),
        "L": lambda: term([A("y"), ONE - k("y"), l("y")], ("y",)),
        "Lp": lambda: term([A("y"), A("y"), ONE - k("y"), l("y")], ("y",)),
        "Lpp": lambda: term([mu * Y / B("y"), A("y"), ONE - k("y"), l("y")], ("y",)),
    }
    return table


_CYCLES = _named()
_FUNCTIONS = {"A": A, "B": B, "k": k, "l": l, "l1": l1, "l2": l2, "v": v, "g": fn.g, "h": fn.h}
_CONSTANTS = {"mu": fn.mu, "alpha": fn.alpha, "delta": fn.delta, "y2": fn.y2, "kappa": fn.kappa,
              "p4": fn.p4, "q4": fn.q4, "r4": fn.r4, "s4": fn.s4, "w4": fn.w4}


def _arity(name, args, n):
    if len(args) not in (n if isinstance(n, tuple) else (n,)):
        raise ArityMismatch(f"{name} takes {n} argument(s), got {len(args)}")


def _expr(a):
    return a if isinstance(a, RatFunc) else parse_expr(str(a))


def _build(name: str, args: Sequence):
    if name == "braceC":
        _arity(name, args, 1)
        return brace(_expr(args[0]))
    if name in ("C2", "C3"):
        _arity(name, args, 1)
        a = _expr(args[0])
        if name == "C2":
            return term([X, ONE - X, ONE - a / X], ("x",))
        return term([X, Y, ONE - X, ONE - Y / X, ONE - a / Y])
    if name == "Z":
        _arity(name, args, 2)
        return Zf(args[0], args[1])
    if name == "tildeZ":
        _arity(name, args, 2)
        return tildeZ(args[0], args[1])
    if name in ("Z1", "Z2", "Z3", "Z4"):
        _arity(name, args, (0, 1, 2))
        if args and args[0] != "AA":
            raise ArityMismatch(f"{name} is only defined at (A,A)")
        return _Z(int(name[1]), len(args) == 2 and args[1] == "reduced")
    if name == "T":
        _arity(name, args, 2)
        return _T(int(args[0]), str(args[1]))
    if name in ("epsilon", "eps"):
        _arity(name, args, 2)
        return fn.eps(int(args[0]), str(args[1]))
    if name == "Tcal":
        _arity(name, args, 1)
        return tcal(args[0])
    if name == "eta":
        _arity(name, args, 0)
        return SymbolSum.eta()
    if name in _CYCLES:
        _arity(name, args, 0)
        return _CYCLES[name]()
    if name in _FUNCTIONS:
        _arity(name, args, (0, 1))
        return _FUNCTIONS[name](str(args[0]) if args else ("y" if name.startswith("l") else "x"))
    if name in _CONSTANTS:
        _arity(name, args, 0)
        return _CONSTANTS[name]
    raise UnknownName(name)


NAMES = ("braceC", "C2", "C3", "Z", "tildeZ", "Z1", "Z2", "Z3", "Z4", "T", "epsilon", "Tcal", "eta",
         *_CYCLES, *_FUNCTIONS, *_CONSTANTS)


def make_cycle(name: str, args: Sequence = (), check: bool = True):
    """Build a named object; cycles are checked for admissibility."""
    if isinstance(args, (str, RatFunc)):
        args = (args,)
    out = _build(name, tuple(args))
    if check and isinstance(out, (CycleTerm, CycleSum)):
        for t in as_sum(out).terms() if isinstance(out, CycleSum) else [out]:
            rep = admissible(t)
            if rep is not None and not rep.admissible:
                raise InadmissibleResult(f"{name}: {rep.verdict}")
    return out
