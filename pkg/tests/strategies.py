"""Hypothesis strategies for rational functions and cycle terms."""

from fractions import Fraction

from hypothesis import strategies as st

from chowcert.algebra import const, sym
from chowcert.cycles import term

small = st.fractions(min_value=-6, max_value=6, max_denominator=5)
nonzero = small.filter(lambda q: q != 0)


@st.composite
def linear(draw, names=("a", "b", "x", "y")):
    f = const(draw(nonzero))
    for n in names:
        c = draw(small)
        if c:
            f = f + const(c) * sym(n)
    return f


@st.composite
def ratfuncs(draw, names=("a", "b", "x", "y"), depth=2):
    num = const(1)
    den = const(1)
    for _ in range(draw(st.integers(1, depth))):
        num = num * draw(linear(names))
    for _ in range(draw(st.integers(0, depth))):
        den = den * draw(linear(names))
    return num / den


@st.composite
def nonconstant(draw, names=("x", "y")):
    f = draw(ratfuncs(names=names + ("a",)))
    if not f.depends_on(names) or f.is_one():
        f = f * sym(draw(st.sampled_from(names)))
    return f


@st.composite
def cycle_terms(draw, n=5, params=("x", "y")):
    coords = [draw(ratfuncs(names=params + ("a",), depth=1)) for _ in range(n)]
    coords = [f if not f.is_zero() else sym(params[0]) for f in coords]
    return term(coords, params, draw(st.fractions(min_value=-3, max_value=3, max_denominator=3).filter(bool)))


points = st.fixed_dictionaries({k: nonzero for k in ("a", "b", "c")})


def frac(x):
    return Fraction(x)
