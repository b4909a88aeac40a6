"""Seeded generators for property checks (boundary squared, alternation).

All randomness flows through an explicit :class:`random.Random`, so a seed
fixes every generated term.
"""

from __future__ import annotations

import random
from fractions import Fraction

from .algebra import INF, PoleAtPoint, RatFunc, const, specialize, sym
from .boundary import boundary
from .cycles import CycleSum, CycleTerm, Substitution, as_sum, reparametrize, term

__all__ = [
    "random_rational", "random_mobius", "template_term", "random_term", "random_triple",
    "ddzero_holds", "alternation_holds",
]

X, Y = sym("x"), sym("y")
ONE = const(1)


def random_rational(rng: random.Random, height: int = 9, exclude=(0, 1)) -> Fraction:
    while True:
        q = Fraction(rng.randint(-height, height), rng.randint(1, height))
        if q not in exclude:
            return q


def random_mobius(rng: random.Random, var: str, height: int = 5) -> RatFunc:
    """(p v + q)/(r v + s) with ps - qr != 0."""
    v = sym(var)
    while True:
        p, q, r, s = (rng.randint(-height, height) for _ in range(4))
        if p * s - q * r:
            return (const(p) * v + const(q)) / (const(r) * v + const(s))


def template_term(rng: random.Random, mobius: bool = True) -> CycleTerm:
    """[x, y, 1 - alpha x, 1 - y/x, 1 - beta/y], optionally pulled back by Mobius maps."""
    while True:
        alpha, beta = random_rational(rng, exclude=(0,)), random_rational(rng)
        if alpha * beta != 1:  # else the face t3 = 0 meets t4 = t5 = 0
            break
    t = term([X, Y, ONE - const(alpha) * X, ONE - Y / X, ONE - const(beta) / Y])
    if mobius:
        sigma = Substitution.mobius({"x": random_mobius(rng, "x"), "y": random_mobius(rng, "y")})
        t = reparametrize(t, sigma)
    return t


def _linear(rng, params):
    f = const(random_rational(rng, exclude=(0,)))
    for p in params:
        if rng.random() < 0.7:
            f = f + const(random_rational(rng, exclude=(0,))) * sym(p)
    return f


def random_term(rng: random.Random, n: int = 5, params=("x", "y")) -> CycleTerm:
    """A term whose coordinates are ratios of products of random linear forms."""
    coords = []
    while len(coords) < n:
        f = _linear(rng, params)
        if rng.random() < 0.5:
            f = f * _linear(rng, params)
        if rng.random() < 0.5:
            g = _linear(rng, params)
            f = f / g
        if f.depends_on(params) and not f.is_one():
            coords.append(f)
    return term(coords, params, Fraction(rng.randint(1, 5), rng.randint(1, 3)))


def random_triple(rng: random.Random, height: int = 9) -> dict:
    """A rational (a, b, c) at which all 22 terms of R avoid 0, 1 and oo."""
    from .goncharov.theorem import r_terms
    while True:
        point = {k: random_rational(rng, height) for k in "abc"}
        ok = True
        for arg, _ in r_terms():
            try:
                val = specialize(arg, point)
            except PoleAtPoint:
                ok = False
                break
            if val in (0, 1):
                ok = False
                break
        if ok:
            return point


def ddzero_holds(t) -> bool:
    return not boundary(boundary(t))


def alternation_holds(t: CycleTerm, rng: random.Random) -> bool:
    """A random permutation scales by its sign; inverting a coordinate negates."""
    perm = list(range(t.n))
    rng.shuffle(perm)
    sign = 1
    seen = [False] * t.n
    for i in range(t.n):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    permuted = t.with_coords([t.coords[i] for i in perm])
    if as_sum(permuted) != as_sum(t).scaled(sign):
        return False
    i = rng.randrange(t.n)
    inverted = t.with_coords([f.inverse() if j == i else f for j, f in enumerate(t.coords)])
    return as_sum(inverted) == as_sum(t).scaled(-1)
