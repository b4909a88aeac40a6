"""The 22-term relation R(a,b,c) and its end-to-end verification."""

from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from ..algebra import AlgebraError, INF, PoleAtPoint, RatFunc, const, format_expr, parse_expr, specialize, sym
from ..rewrite import RewriteError, resubstitute
from ..symbols import ETA, SymbolSum
from . import catalog as cat
from . import functions as fn
from .steps import STEP_TITLES, STEP10_TABLE, STEP10_TAU, StepFailed, replay_step

__all__ = [
    "DegenerateInput", "RELABELINGS", "CLAIM", "r_terms", "assemble_R", "check_nondegenerate",
    "claim_relation", "RunResult", "Report", "verify_theorem", "rerun_step",
]


class DegenerateInput(ValueError):
    """A specialization makes one of the terms of R equal to {0}, {1} or {oo}."""


# the Claim of Step 9 as (cycle name, coefficient)
CLAIM = (
    ("T1(f)", 1), ("T2(f)", 1), ("T3(f)", 1), ("T2(A)", 1), ("T3(A)", 1), ("T4(A)", 1),
    ("T1(A/f)", -1), ("T2(A/f)", -1), ("T1(B)", -1),
    ("tau_ac(T3(f))", -1), ("tau_ac(T2(A))", -1), ("tau_ac(T1(B))", 1),
)

RELABELINGS = (
    ("(a,b,c)", {}),
    ("(b,c,a)", {"a": "b", "b": "c", "c": "a"}),
    ("(c,a,b)", {"a": "c", "b": "a", "c": "b"}),
)


def _rf(v) -> RatFunc:
    if isinstance(v, RatFunc):
        return v
    if isinstance(v, (int, Fraction)):
        return const(v)
    return parse_expr(str(v))


def r_terms(a="a", b="b", c="c") -> list:
    """The 22 brace terms of R(a,b,c) as (argument, coefficient), before folding."""
    a, b, c = _rf(a), _rf(b), _rf(c)
    out = [(-a * b * c, 1)]
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        q = z * x - x + 1
        w = y * z - z + 1
        out += [(q, 1), (q / (z * x), 1), (q / z, -1), (-x * w / q, 1), (w / (y * q), 1), (z, 1),
                (w / (y * z * q), -1)]
    return out


def assemble_R(a="a", b="b", c="c") -> SymbolSum:
    """R(a,b,c) = {-abc} + sum over cyclic permutations of seven braces minus eta."""
    s = SymbolSum(r_terms(a, b, c))
    return s + SymbolSum.eta(-3)


def check_nondegenerate(assignment: Mapping):
    """Raise DegenerateInput unless every term of R is a value other than 0, 1, oo."""
    point = {k: Fraction(v) for k, v in assignment.items()}
    missing = {"a", "b", "c"} - set(point)
    if missing:
        raise ValueError(f"assignment lacks {', '.join(sorted(missing))}")
    for i, (arg, _) in enumerate(r_terms(), 1):
        try:
            val = specialize(arg, point)
        except PoleAtPoint:
            raise DegenerateInput(f"term {i} {{{format_expr(arg)}}} is {{oo}} at {_fmt_point(point)}") from None
        if val in (0, 1):
            raise DegenerateInput(f"term {i} {{{format_expr(arg)}}} is {{{val}}} at {_fmt_point(point)}")


def _fmt_point(point):
    return "(" + ", ".join(f"{k}={_q(point[k])}" for k in sorted(point)) + ")"


def _q(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def claim_relation(symbols: Mapping) -> SymbolSum:
    """Claim right-hand side minus {k(c)}; vanishes in the Chow group."""
    out = SymbolSum()
    for name, c in CLAIM:
        out = out + symbols[name].scaled(c)
    return out - SymbolSum.symbol(fn.kc)


@dataclass
class RunResult:
    label: str
    mapping: dict
    relation: SymbolSum
    residual: SymbolSum
    identities: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.residual

    def to_json(self, certificates=False):
        out = {
            "label": self.label,
            "mapping": {k: format_expr(v) for k, v in sorted(self.mapping.items())},
            "relation": self.relation.to_json(),
            "residual": self.residual.to_json(),
            "status": "VERIFIED" if self.ok else "FAILED",
        }
        if certificates:
            out["certificates"] = [vi.to_json() for vi in self.identities]
        else:
            out["identities"] = [vi.name for vi in self.identities]
        return out


@dataclass
class Report:
    mode: str
    assignment: dict | None
    R: SymbolSum
    runs: list
    total: SymbolSum
    residual: SymbolSum
    eta_log: list
    table: list  # (name, SymbolSum) for the base run
    steps: list  # (k, title, status)

    @property
    def status(self) -> str:
        if all(r.ok for r in self.runs) and not self.residual:
            return "VERIFIED"
        return "FAILED"

    def to_json(self, certificates=True):
        return {
            "mode": self.mode,
            "assignment": None if self.assignment is None else {k: _q(v) for k, v in sorted(self.assignment.items())},
            "status": self.status,
            "steps": [{"step": k, "title": t, "status": s} for k, t, s in self.steps],
            "table": [{"cycle": n, "value": s.to_json()} for n, s in self.table],
            "R": self.R.to_json(),
            "eta_patterns": [{"arg": format_expr(a), "multiplicity": _q(Fraction(n))} for a, n in self.eta_log],
            "runs": [r.to_json(certificates) for r in self.runs],
            "total": self.total.to_json(),
            "residual": self.residual.to_json(),
        }

    def summary(self) -> str:
        lines = [f"22-term relation, mode {self.mode}"]
        if self.assignment is not None:
            lines[0] += " at " + _fmt_point(self.assignment)
        for k, t, s in self.steps:
            lines.append(f"  step {k:>2}  {s:<8}  {t}")
        lines.append("Step 10 evaluations")
        width = max(len(n) for n, _ in self.table)
        for n, s in self.table:
            lines.append(f"  {n:<{width}} = {s}")
        lines.append("Relabelings")
        for r in self.runs:
            lines.append(f"  {r.label}  relation - R reduces to {r.residual if r.residual else 0}")
        lines.append(f"R has {len(self.R.brace_terms())} brace terms and eta coefficient {_q(self.R.coefficient(ETA))}")
        lines.append(f"total of the three runs - 3R, eta patterns replaced: {self.residual if self.residual else 0}")
        lines.append(f"status: {self.status}")
        return "\n".join(lines)


_MEMOS: OrderedDict = OrderedDict()
_MEMO_LIMIT = 6


def _memo(sub: dict) -> dict:
    """Re-run cache for one parameter substitution (a few kept, LRU)."""
    key = tuple(sorted((k, format_expr(v)) for k, v in sub.items()))
    if key in _MEMOS:
        _MEMOS.move_to_end(key)
    else:
        _MEMOS[key] = {}
        while len(_MEMOS) > _MEMO_LIMIT:
            _MEMOS.popitem(last=False)
    return _MEMOS[key]


def rerun_step(k: int, assignment: Mapping) -> list:
    """Re-run the certificates of step ``k`` at a rational point."""
    point = {p: Fraction(v) for p, v in assignment.items()}
    check_nondegenerate(point)
    res = replay_step(k)
    base = [res.identity, *(vi for vi in res.extra.values() if vi is not res.identity)]
    sub = {p: const(v) for p, v in point.items()}
    memo = _memo(sub)
    label = _fmt_point(point)
    try:
        return [resubstitute(vi, sub, suffix=f" at {label}", memo=memo) for vi in base]
    except (RewriteError, AlgebraError, ZeroDivisionError) as exc:
        raise StepFailed(k, f"re-run at {label}: {exc}") from None


def _base_identities():
    claim = replay_step(9).identity
    ten = replay_step(10)
    names = [n for n, _ in CLAIM]
    return claim, ten, [claim, *(ten.extra[n] for n in names)]


def _evaluator(mapping: dict, point: dict | None):
    """SymbolSum map: relabel the parameters, then specialize if a point is given."""
    def ev(s: SymbolSum) -> SymbolSum:
        if mapping:
            s = s.substitute(mapping)
        if point is not None:
            s = s.specialize(point)
        return s
    return ev


def _eta_terms(log) -> SymbolSum:
    out = SymbolSum()
    for a, n in log:
        out = out + cat.tcal(a).scaled(n) - SymbolSum.eta(n)
    return out


def verify_theorem(mode: str = "symbolic", assignment: Mapping | None = None) -> Report:
    """Replay Steps 1-10, re-run the chain for the cyclic relabelings, and account for R.

    ``mode`` is ``"symbolic"`` or ``"specialized"`` (with ``assignment`` giving
    rational values for a, b, c).
    """
    if mode not in ("symbolic", "specialized"):
        raise ValueError(f"unknown mode {mode!r}")
    point = None
    if mode == "specialized":
        if assignment is None:
            raise ValueError("specialized mode needs an assignment")
        point = {k: Fraction(v) for k, v in assignment.items()}
        check_nondegenerate(point)
    steps = []
    for k in range(1, 11):
        steps.append((k, STEP_TITLES[k], replay_step(k).status))
    claim, ten, base = _base_identities()
    rel = claim_relation(ten.symbols)
    R = assemble_R()
    # rel - R is a combination of T-patterns minus eta; the log records them
    reduced, log = (rel - R).replace_tcal()
    if reduced:
        raise StepFailed(10, f"Claim minus R is not a combination of T-patterns: {reduced}")
    decomposition = _eta_terms(log)
    runs = []
    total = SymbolSum()
    for label, relabel in RELABELINGS:
        t0 = time.perf_counter()
        mapping = {k: sym(v) for k, v in relabel.items()}
        if point is not None:
            sub = {k: const(point[relabel.get(k, k)]) for k in ("a", "b", "c")}
        else:
            sub = mapping
        if sub and not (point is None and not relabel):
            try:
                memo = _memo(sub)  # per mapping: shared parts are re-run once
                ids = [resubstitute(vi, sub, suffix=f" {label}", memo=memo) for vi in base]
            except (RewriteError, AlgebraError, ZeroDivisionError) as exc:
                raise StepFailed(0, f"re-run for {label}: {exc}") from None
        else:
            ids = list(base)
        ev = _evaluator(mapping, point)
        rel_run = ev(rel)
        residual = rel_run - ev(R) - ev(decomposition)
        total = total + rel_run
        runs.append(RunResult(label, mapping, rel_run, residual, ids, time.perf_counter() - t0))
    ev_total = SymbolSum()
    for label, relabel in RELABELINGS:
        ev_total = ev_total + _evaluator({k: sym(v) for k, v in relabel.items()}, point)(R + decomposition)
    residual = total - ev_total
    R_out = assemble_R() if point is None else R.specialize(point)
    table = [(n, _evaluator({}, point)(ten.symbols[n])) for n in _table_names()]
    return Report(mode, point, R_out, runs, total, residual, log, table, steps)


def _table_names():
    out = [f"T{i}({F})" for F, idx in STEP10_TABLE for i in idx]
    return out + [f"tau_ac({n})" for n in STEP10_TAU]
