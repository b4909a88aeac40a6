import json

import pytest

from chowcert.algebra import const, format_expr, parse_expr, sym
from chowcert.cycles import CycleSum, as_sum, term
from chowcert.goncharov import SIGMA_XY, apply_involution, apply_tau, make_cycle
from chowcert.goncharov import functions as fn
from chowcert.rewrite import (DerivationFailed, HypothesisFailed, RewriteError, TemplateMismatch, derive,
                              eval_stuv, reparam, split_f4)
from chowcert.symbols import SymbolSum

x, y, a, s, t, u, v = (sym(n) for n in "xyastuv")
ONE = const(1)


def _sym(*pairs):
    out = SymbolSum()
    for arg, c in pairs:
        out = out + SymbolSum.symbol(parse_expr(arg), c)
    return out


def test_eval_brace():
    total, vi = eval_stuv(make_cycle("braceC", ["a"]))
    assert total == _sym(("a", 1))
    assert vi.replay()


def test_eval_stuv_four_symbols():
    cyc = term([x, y, (ONE - s * x) / (ONE - t * x), ONE - y / x, (ONE - u / y) / (ONE - v / y)])
    total, vi = eval_stuv(cyc)
    assert total == _sym(("s*u", 1), ("s*v", -1), ("t*u", -1), ("t*v", 1))
    assert vi.replay()
    # the chain ends in brace terms only
    assert {len(tt.coords) for tt in vi.rhs.terms()} == {5}
    json.dumps(vi.to_json())


def test_eval_scaled_first_pair_and_swapped_form():
    k = ONE * 2
    cyc = term([k * x, k * y, ONE - a * x, ONE - y / x, ONE - ONE / y])
    total, _ = eval_stuv(cyc)
    assert total == _sym(("a", 1))
    swapped = term([x, y, ONE - ONE / x, ONE - x / y, ONE - a * y])
    assert eval_stuv(swapped)[0] == _sym(("a", 1))


def test_eval_template_mismatch():
    with pytest.raises(TemplateMismatch):
        eval_stuv(make_cycle("ZA"))
    with pytest.raises(TemplateMismatch):
        eval_stuv(term([x, y, ONE - y, ONE - y / x, ONE - a / y]))


def test_split_f4_certified():
    t4 = apply_tau(apply_involution(make_cycle("Y1"), "sigma_xy"))
    (tt,) = as_sum(t4).terms() if not hasattr(t4, "coords") else (t4,)
    vi = split_f4(tt, (fn.p4, tt.coords[3] / fn.p4))
    assert vi.replay()
    g = [r.coords[3] for r in vi.rhs.terms()]
    assert len(g) == 2
    cert = vi.to_json()["certificate"][0]
    assert cert["rule"] == "split-f4" and cert["status"] == "verified"


def test_split_f4_rejects_bad_factors():
    tt = make_cycle("ZA")
    with pytest.raises(RewriteError):
        split_f4(tt, (x * x + 1, tt.coords[3] / (x * x + 1)))
    with pytest.raises(RewriteError):
        split_f4(tt, (ONE - x, ONE - y))


def test_reparam_by_involution():
    vi = reparam(make_cycle("Y1"), SIGMA_XY)
    assert vi.replay()
    assert as_sum(vi.rhs) == as_sum(apply_involution(make_cycle("Y1"), "sigma_xy"))


def test_derive_solves_coefficients_and_reports_failure():
    cyc = term([x, y, (ONE - s * x) / (ONE - t * x), ONE - y / x, ONE - u / y])
    _, vi = eval_stuv(cyc)
    again = derive("again", vi.lhs, vi.rhs, [vi.parts[0][1], *[(None, p) for _, p in vi.parts[1:]]])
    assert again.replay()
    with pytest.raises(DerivationFailed):
        derive("nothing", make_cycle("Y1"), CycleSum(), [])


def test_hypothesis_failures_are_rewrite_errors():
    assert issubclass(HypothesisFailed, RewriteError)
    assert issubclass(DerivationFailed, RewriteError)
