import random

import pytest

from chowcert.algebra import const, format_expr, sym
from chowcert.boundary import (Face, ImproperFace, boundary, face_components, face_restrict, is_admissible,
                               is_degenerate, is_negligible)
from chowcert.cycles import as_sum, term
from chowcert.generators import ddzero_holds, template_term
from chowcert.goncharov import functions as fn
from chowcert.goncharov import make_cycle
from chowcert.goncharov.steps import face_summary

x, y, a, c = sym("x"), sym("y"), sym("a"), sym("c")
ONE = const(1)


def test_boundary_of_brace_is_negligible():
    t = term([x, y, ONE - x, ONE - y / x, ONE - a / y])
    assert all(is_negligible(u) for u in boundary(t).terms())


def test_boundary_of_C2():
    # d [x, 1 - x, 1 - a/x] = -[1 - a, ...] restricted at x = a, signs per face index
    t = term([x, ONE - x, ONE - a / x], ("x",))
    b = boundary(t)
    assert len(b) == 1
    (u,) = b.terms()
    assert u.d == 0


def test_dd_zero_on_template_family():
    rng = random.Random(11)
    for _ in range(25):
        t = template_term(rng)
        assert is_admissible(t).admissible
        assert ddzero_holds(t)


def test_ZA_seven_containments():
    rep = is_admissible(make_cycle("ZA"))
    assert rep.admissible
    assert face_summary(rep) == {
        (1, "0"): (4,), (1, "inf"): (3,), (2, "0"): (5,), (2, "inf"): (4,),
        (3, "inf"): (4,), (4, "inf"): (3, 5), (5, "inf"): (4,),
    }


def test_ZA_d10_vanishes():
    assert not face_restrict(make_cycle("ZA"), Face(1, "0"))


def test_ZA_d50_two_branches():
    comps = face_components(make_cycle("ZA"), Face(5, "0"))
    assert sorted(cm.origin for cm in comps) == sorted([f"y={format_expr(c)}", f"y={format_expr(fn.y2)}"])
    for cm in comps:
        val = c if cm.origin == f"y={format_expr(c)}" else fn.y2
        want = term([fn.A("x"), _at(fn.A("y"), val), ONE - fn.k("x"), fn.l("x")], ("x",))
        assert as_sum(cm.term) == as_sum(want)


def _at(f, val):
    from chowcert.algebra import substitute
    return substitute(f, {"y": val})


def test_inadmissible_example():
    t = term([x, y, x, ONE - y / x, ONE - c / y])
    rep = is_admissible(t)
    assert rep.verdict == "inadmissible"
    assert any(not f.ok for f in rep.findings)


def test_improper_face_raises():
    t = term([x, 2 * x, x + 2], ("x",))
    # the divisor x = 0 lies on t1 = 0 and t2 = 0 and on no t_j = 1
    with pytest.raises(ImproperFace):
        face_restrict(t, Face(1, "0"))


def test_negligible_patterns():
    assert is_negligible(term([x, y, a, ONE - y / x, ONE - a / y])).startswith("constant")
    w1 = term([x, ONE - x, y, ONE - y, ONE - a / y])
    assert is_negligible(w1) is None
    assert is_negligible(w1, ("constant", "weight-one-product")).startswith("weight-one-product")


def test_degenerate():
    assert is_degenerate(term([x * y, ONE - x * y, 2 + x * y, x, ONE - a / x]).with_coords(
        [x * y, ONE - x * y, 2 + x * y, x * y + 3, ONE - a * x * y]))
    assert not is_degenerate(term([x, y, ONE - x, ONE - y / x, ONE - a / y]))


def test_admissibility_report_json():
    rep = is_admissible(make_cycle("L"))
    js = rep.to_json()
    assert js["verdict"] == "admissible"
    assert all(set(f) == {"faces", "components", "dim", "bound", "contained_in"} for f in js["findings"])
