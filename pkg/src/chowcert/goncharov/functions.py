"""The rational functions and constants used in the proof of the 22-term relation.

Every function is built from its displayed formula; one-variable functions
take the variable name as argument (``A("x")`` is ``A(x)``).
"""

from __future__ import annotations

from functools import lru_cache

from ..algebra import RatFunc, parse_expr, substitute, sym

__all__ = [
    "A", "B", "F", "k", "l", "l1", "l2", "v", "g", "h", "mu", "alpha", "delta", "y2",
    "kc", "p4", "q4", "r4", "s4", "w4", "eps", "rho", "kappa", "f",
]


@lru_cache(maxsize=None)
def _p(text: str) -> RatFunc:
    return parse_expr(text)


def _fn(text):
    @lru_cache(maxsize=None)
    def fn(var: str = "x") -> RatFunc:
        return substitute(_p(text), {"x": _p(var)})
    return fn


A = _fn("(a*x - a + 1)/a")
B = _fn("b*x - x + 1")
f = _fn("x")
k = _fn("(b*x - x + 1)/(a*b*x*(a*x - a + 1)/a)")
v = _fn("(a*b*x + 1)/(a*x - a + 1)")
g = _fn("(b*x - x + 1)/((b - 1)*x)")
h = _fn("(b - 1)*x")

mu = _p("-(a*b - b + 1)/a")
alpha = _p("(b*c - c)/(b*c - c + 1)")
delta = _p("1/b")
kappa = _p("b - 1") / mu
kc = k("c")
y2 = -A("c") / B("c")


def F(name: str, var: str = "x") -> RatFunc:
    """The one-variable functions written f, A, B, A/f, f/B, A/B in the proof."""
    x = sym(var)
    table = {
        "f": lambda: x,
        "A": lambda: A(var),
        "B": lambda: B(var),
        "A/f": lambda: A(var) / x,
        "f/B": lambda: x / B(var),
        "A/B": lambda: A(var) / B(var),
    }
    return table[name]()


@lru_cache(maxsize=None)
def l(var: str = "y") -> RatFunc:
    return 1 - kc / k(var)


@lru_cache(maxsize=None)
def l1(var: str = "y") -> RatFunc:
    return 1 - sym(var) / sym("c")


@lru_cache(maxsize=None)
def l2(var: str = "y") -> RatFunc:
    return (y2 - sym(var)) / (y2 * B(var))


def eps(i: int, name: str) -> RatFunc:
    """The constants epsilon_i(F) of the final decomposition."""
    if name == "f":
        return RatFunc(1)
    if name == "A":
        e1 = _p("c*a/(c*a - a + 1)")
        return e1 if i == 1 else 1 / e1
    raise KeyError(name)


_X, _Y = sym("x"), sym("y")
p4 = mu * (_X - _Y) / (A("y") * B("x"))
q4 = (_Y - _X) / A("y")
r4 = (_p("b") - 1) * (_Y - _X) / (_X * B("y"))
s4 = (_p("b") - 1) * (_Y - _X) / B("y")
w4 = (_Y - _X) / (B("x") * (_Y - 1))


def rho(var: str) -> RatFunc:
    """Image of ``var`` under the involution var -> -A(var)/B(var)."""
    return -A(var) / B(var)

