"""The ``.gcs`` proof-script language: parser, runner and run report.

A script is a sequence of statements; whitespace (newlines included) and
``#`` comments separate tokens, and every statement starts on a new line::

    let Ca = cycle [x, y, 1 - x, 1 - y/x, 1 - a/y] params (x,y)
    let S  = subst(x -> 1/x, y -> 1/y)
    assert admissible Ca
    assert equal Ca == braceC(a)
    assert boundary Ca = 0 mod discards
    eval Ca
    replay steps 1-10
    replay theorem

Objects are linear combinations ``2 * A - 1/2 * [..] params (x)`` of
cycles or of symbols ``{expr}`` and ``eta``.  Identifiers resolve to
let-bound names first, then builtins (``boundary``, ``apply``, ``eval``,
``subst``, the involutions and ``tau``), then the named-cycle catalog.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .algebra import AlgebraError, ExprSyntaxError, RatFunc, const, format_expr
from .boundary import NEGLIGIBLE_PATTERNS, boundary, is_admissible, is_negligible
from .cycles import CycleError, CycleSum, CycleTerm, Substitution, as_sum, reparametrize
from .generators import alternation_holds, ddzero_holds, random_term, template_term
from .rewrite import RewriteError, _subst_obj, eval_stuv, reparam, split_f4
from .symbols import SymbolSum
from .textform import CycleParser, format_cycle, format_rational, format_sum
from .goncharov import catalog as cat

__all__ = [
    "ScriptSyntaxError", "Script", "Options", "StatementResult", "RunReport",
    "parse_script", "parse_object", "evaluate", "run", "format_value", "parse_steps", "parse_assignment",
]

KEYWORDS = ("let", "assert", "eval", "replay", "check", "print")
SUBSTITUTIONS = {"rho_x": cat.RHO_X, "rho_y": cat.RHO_Y, "rho_xy": cat.RHO_XY, "sigma_xy": cat.SIGMA_XY,
                 "tau": cat.TAU}
FUNCTIONS = ("boundary", "apply", "eval", "split4", "subst", "expr")
RESERVED = set(KEYWORDS) | set(SUBSTITUTIONS) | set(FUNCTIONS) | {"eta", "cycle", "symbols", "via", "mod",
                                                                   "discards", "witness", "equal"}


class ScriptSyntaxError(SyntaxError):
    """Parse error with a 1-based line and column."""

    def __init__(self, msg, line, column, source_line="", filename="<script>"):
        super().__init__(msg, (filename, line, column, source_line))
        self.line = line
        self.column = column

    def __str__(self):
        return f"{self.filename}:{self.line}:{self.column}: {self.msg}"


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Lit:
    value: Any
    pos: int


@dataclass(frozen=True)
class Ref:
    name: str
    pos: int


@dataclass(frozen=True)
class Named:
    """A catalog object, arguments kept as text."""
    name: str
    args: tuple
    pos: int


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple  # nodes
    pos: int


@dataclass(frozen=True)
class Subst:
    mapping: tuple  # ((var, RatFunc), ...)
    pos: int


@dataclass(frozen=True)
class Lin:
    terms: tuple  # ((Fraction, node | None), ...); None is the zero object
    pos: int


@dataclass
class Statement:
    kind: str  # let | assert | eval | replay | check | print
    line: int
    column: int
    source: str
    name: str = ""  # let
    expr: Any = None
    rhs: Any = None
    mode: str = ""  # assertion kind, replay target or property
    via: Any = None
    witness: Any = None
    mod_discards: bool = False
    lo: int = 0
    hi: int = 0


@dataclass
class Script:
    statements: list
    filename: str = "<script>"

    @property
    def names(self):
        return [s.name for s in self.statements if s.kind == "let"]


# ---------------------------------------------------------------------------
# parser


def _word_char(ch, first=False):
    return ch.isalpha() or ch == "_" or (not first and ch.isdigit())


class _ScriptParser(CycleParser):
    def __init__(self, text, filename="<script>"):
        super().__init__(text)
        self.filename = filename
        self.bound = set()
        self.gap = (0, 0)  # last run of whitespace and comments

    # whitespace between tokens may hold comments
    def skip(self):
        start = self.pos
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "#":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self.pos += 1
            else:
                break
        if self.pos != start:
            self.gap = (start, self.pos)

    def where(self, pos):
        line = self.text.count("\n", 0, pos) + 1
        start = self.text.rfind("\n", 0, pos) + 1
        end = self.text.find("\n", pos)
        return line, pos - start + 1, self.text[start:end if end >= 0 else len(self.text)]

    def error(self, msg, pos=None):
        line, col, src = self.where(self.pos if pos is None else pos)
        return ScriptSyntaxError(msg, line, col, src, self.filename)

    def peek_word(self):
        self.skip()
        j = self.pos
        if j < len(self.text) and _word_char(self.text[j], True):
            while j < len(self.text) and _word_char(self.text[j]):
                j += 1
        return self.text[self.pos:j]

    def word(self, expected="a name"):
        w = self.peek_word()
        if not w:
            raise self.error(f"expected {expected}")
        self.pos += len(w)
        return w

    def keyword(self, kw):
        if self.peek_word() != kw:
            raise self.error(f"expected '{kw}'")
        self.pos += len(kw)

    def accept(self, kw):
        if self.peek_word() == kw:
            self.pos += len(kw)
            return True
        return False

    def integer(self):
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise self.error("expected an integer")
        return int(self.text[start:self.pos])

    def rational(self):
        n = self.integer()
        if self.peek() == "/":
            save = self.pos
            self.pos += 1
            if self.peek().isdigit():
                d = self.integer()
                if d == 0:
                    raise self.error("zero denominator", save)
                return Fraction(n, d)
            self.pos = save
        return Fraction(n)

    # --- objects ---

    def obj(self):
        start = self._pos()
        terms = [self.signed_term()]
        while self.peek() in ("+", "-"):
            sign = 1 if self.text[self.pos] == "+" else -1
            self.pos += 1
            c, node = self.signed_term()
            terms.append((c * sign, node))
        if len(terms) == 1 and terms[0][0] == 1 and terms[0][1] is not None:
            return terms[0][1]
        return Lin(tuple(terms), start)

    def _pos(self):
        self.skip()
        return self.pos

    def signed_term(self):
        c = Fraction(1)
        while self.peek() in ("+", "-"):
            if self.text[self.pos] == "-":
                c = -c
            self.pos += 1
        if self.peek().isdigit():
            start = self.pos
            q = self.rational()
            if self.peek() == "*":
                self.pos += 1
            elif not (self.peek() in ("[", "{", "(") or self.peek_word()) or self._at_statement_end():
                if q != 0:
                    raise self.error("a rational coefficient needs an object", start)
                return Fraction(0), None
            return c * q, self.atom_obj()
        return c, self.atom_obj()

    def _at_statement_end(self):
        w = self.peek_word()
        return w in KEYWORDS or w in ("via", "mod", "witness")

    def atom_obj(self):
        ch = self.peek()
        pos = self.pos
        if ch == "[":
            try:
                return Lit(self.cycle(), pos)
            except ExprSyntaxError as exc:
                raise self.error(str(exc).rsplit(" at column", 1)[0], exc.pos) from None
        if ch == "{":
            self.pos += 1
            try:
                arg = self.expr()
            except ExprSyntaxError as exc:
                raise self.error(str(exc).rsplit(" at column", 1)[0], exc.pos) from None
            self.eat_("}")
            return Lit(SymbolSum([(arg, 1)]), pos)
        if ch == "(":
            self.pos += 1
            node = self.obj()
            self.eat_(")")
            return node
        w = self.peek_word()
        if not w:
            raise self.error("expected an object" if ch else "unexpected end of input")
        self.pos += len(w)
        if w in self.bound:
            return Ref(w, pos)
        if w == "eta":
            return Lit(SymbolSum.eta(), pos)
        if w in ("cycle", "symbols"):
            return self.atom_obj()
        if w == "subst":
            return self.subst(pos)
        if w in SUBSTITUTIONS:
            if self.peek() == "(":
                self.pos += 1
                arg = self.obj()
                self.eat_(")")
                return Call("apply", (Lit(SUBSTITUTIONS[w], pos), arg), pos)
            return Lit(SUBSTITUTIONS[w], pos)
        if w == "expr":
            self.eat_("(")
            try:
                f = self.expr()
            except ExprSyntaxError as exc:
                raise self.error(str(exc).rsplit(" at column", 1)[0], exc.pos) from None
            self.eat_(")")
            return Lit(f, pos)
        if w in FUNCTIONS:
            self.eat_("(")
            args = [self.obj()]
            while self.peek() == ",":
                self.pos += 1
                args.append(self.obj())
            self.eat_(")")
            want = 2 if w in ("apply", "split4") else 1
            if len(args) != want:
                raise self.error(f"{w} takes {want} argument(s)", pos)
            return Call(w, tuple(args), pos)
        if w in cat.NAMES:
            return Named(w, self.raw_args(), pos)
        if w in KEYWORDS:
            raise self.error(f"unexpected keyword '{w}'", pos)
        raise self.error(f"unbound name '{w}'", pos)

    def eat_(self, ch):
        if self.peek() != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def raw_args(self):
        if self.peek() != "(":
            return ()
        self.pos += 1
        args, depth, start = [], 0, self.pos
        while True:
            if self.pos >= len(self.text):
                raise self.error("unclosed '('")
            ch = self.text[self.pos]
            if ch == "(":
                depth += 1
            elif ch == ")" and depth:
                depth -= 1
            elif ch in ",)" and not depth:
                piece = self.text[start:self.pos].strip()
                if not piece:
                    if ch == "," or args:
                        raise self.error("dangling comma" if ch == ")" else "empty argument",
                                         self.pos - 1 if ch == ")" else self.pos)
                else:
                    args.append(piece)
                self.pos += 1
                if ch == ")":
                    return tuple(args)
                start = self.pos
                continue
            self.pos += 1

    def subst(self, pos):
        self.eat_("(")
        mapping = []
        while True:
            vpos = self._pos()
            var = self.word("a variable")
            if var not in ("x", "y", "z", "a", "b", "c"):
                raise self.error(f"cannot substitute for '{var}'", vpos)
            self.skip()
            if not self.text.startswith("->", self.pos):
                raise self.error("expected '->'")
            self.pos += 2
            try:
                mapping.append((var, self.expr()))
            except ExprSyntaxError as exc:
                raise self.error(str(exc).rsplit(" at column", 1)[0], exc.pos) from None
            if self.peek() == ",":
                self.pos += 1
                continue
            self.eat_(")")
            return Subst(tuple(mapping), pos)

    # --- statements ---

    def script(self) -> Script:
        out = []
        while True:
            self.skip()
            if self.pos >= len(self.text):
                return Script(out, self.filename)
            if out and (self.gap[1] != self.pos or "\n" not in self.text[self.gap[0]:self.gap[1]]):
                raise self.error("expected end of statement")
            out.append(self.statement())

    def statement(self) -> Statement:
        start = self.pos
        line, col, _ = self.where(start)
        kw = self.peek_word()
        if kw not in KEYWORDS:
            raise self.error(f"expected a statement ({', '.join(KEYWORDS)})")
        self.pos += len(kw)
        st = Statement(kw, line, col, "")
        if kw == "let":
            npos = self._pos()
            name = self.word()
            if name in self.bound:
                raise self.error(f"'{name}' is already bound", npos)
            if name in RESERVED or name in cat.NAMES:
                raise self.error(f"'{name}' is reserved", npos)
            self.eat_("=")
            st.name = name
            if self.peek_word() in ("cycle", "symbols"):
                st.mode = self.word()
            st.expr = self.obj()
            self.bound.add(name)
        elif kw == "assert":
            mpos = self._pos()
            mode = self.word("an assertion")
            if mode not in ("admissible", "inadmissible", "negligible", "equal", "boundary"):
                raise self.error(f"unknown assertion '{mode}'", mpos)
            st.mode = mode
            st.expr = self.obj()
            if mode in ("equal", "boundary"):
                self.eat_("=")
                if self.peek() == "=":
                    self.pos += 1
                st.rhs = self.obj()
                if mode == "equal" and self.accept("via"):
                    st.via = self.obj()
                if self.accept("mod"):
                    self.keyword("discards")
                    st.mod_discards = True
                if mode == "equal" and self.accept("witness"):
                    st.witness = self.obj()
        elif kw in ("eval", "print"):
            st.expr = self.obj()
            if kw == "eval" and self.accept("via"):
                st.via = self.obj()
        elif kw == "replay":
            tpos = self._pos()
            target = self.word("step, steps or theorem")
            if target == "theorem":
                st.mode = "theorem"
            elif target in ("step", "steps"):
                st.mode = "steps"
                st.lo = self.integer()
                st.hi = st.lo
                self.skip()
                if self.text.startswith("..", self.pos):
                    self.pos += 2
                    st.hi = self.integer()
                elif self.peek() == "-":
                    self.pos += 1
                    st.hi = self.integer()
                if not 1 <= st.lo <= st.hi <= 10:
                    raise self.error("steps are numbered 1..10", tpos)
            else:
                raise self.error(f"cannot replay '{target}'", tpos)
        elif kw == "check":
            ppos = self._pos()
            prop = self.word("a property")
            if prop not in ("ddzero", "alternation"):
                raise self.error(f"unknown property '{prop}'", ppos)
            st.mode = prop
            st.lo = self.integer()
        end = self.gap[0] if self.gap[1] == self.pos else self.pos
        st.source = " ".join(self.text[start:end].split())
        return st


def parse_script(text: str, filename: str = "<script>") -> Script:
    """Parse script text; errors carry line and column."""
    return _ScriptParser(text, filename).script()


def parse_object(text: str, bound=()):
    """Parse one object expression (as used on the command line)."""
    p = _ScriptParser(text, "<argument>")
    p.bound = set(bound)
    node = p.obj()
    p.skip()
    if p.pos != len(text):
        raise p.error(f"unexpected {text[p.pos]!r}")
    return node


# ---------------------------------------------------------------------------
# evaluation


class ScriptError(Exception):
    pass


def _specializer(point):
    if not point:
        return lambda v: v
    sub = {k: const(v) for k, v in point.items()}

    def sp(v):
        if isinstance(v, SymbolSum):
            return v.specialize(point)
        if isinstance(v, (RatFunc, CycleTerm, CycleSum, Substitution)):
            return _subst_obj(v, sub)
        return v
    return sp


def evaluate(node, env=None, point=None):
    """Value of an object node; ``point`` specializes a, b, c in the result."""
    env = env or {}
    return _specializer(point)(_eval(node, env, lambda v: v))


def _eval(node, env, sp):
    if isinstance(node, Lit):
        return sp(node.value)
    if isinstance(node, Ref):
        return env[node.name]
    if isinstance(node, Named):
        try:
            return sp(cat.make_cycle(node.name, node.args, check=False))
        except (cat.UnknownName, cat.ArityMismatch, ValueError, AlgebraError) as exc:
            raise ScriptError(f"{node.name}: {exc}") from None
    if isinstance(node, Subst):
        return _substitution(dict(node.mapping), sp)
    if isinstance(node, Lin):
        acc = None
        for c, sub in node.terms:
            if sub is None:
                continue
            v = _scaled(_eval(sub, env, sp), c)
            acc = v if acc is None else _add(acc, v)
        return acc if acc is not None else CycleSum()
    if isinstance(node, Call):
        args = [_eval(a, env, sp) for a in node.args]
        if node.func == "boundary":
            return boundary(_cycle(args[0], "boundary"))
        if node.func == "apply":
            return _apply(args[0], args[1])
        if node.func == "eval":
            return _symbols(args[0])[0]
        if node.func == "split4":
            return _split4(args[0], args[1])
    raise ScriptError(f"cannot evaluate {node!r}")


def _substitution(mapping, sp=lambda v: v):
    mapping = {k: sp(v) for k, v in mapping.items()}
    cyc = {k: v for k, v in mapping.items() if k in ("x", "y", "z")}
    if cyc and len(cyc) == len(mapping):
        try:
            return Substitution.per_variable(cyc, name="subst")
        except CycleError:
            return Substitution(cyc, name="subst")
    return Substitution(mapping, name="subst", degree=1)


def _scaled(v, c):
    if c == 1:
        return v
    if isinstance(v, (CycleTerm, CycleSum, SymbolSum)):
        return v.scaled(c)
    if isinstance(v, RatFunc):
        return v * const(c)
    raise ScriptError(f"cannot scale {type(v).__name__}")


def _add(u, v):
    if isinstance(u, SymbolSum) and isinstance(v, SymbolSum):
        return u + v
    if isinstance(u, (CycleTerm, CycleSum)) and isinstance(v, (CycleTerm, CycleSum)):
        try:
            return as_sum(u) + as_sum(v)
        except CycleError as exc:
            raise ScriptError(str(exc)) from None
    if isinstance(u, RatFunc) and isinstance(v, RatFunc):
        return u + v
    raise ScriptError(f"cannot add {_kind(u)} and {_kind(v)}")


def _kind(v):
    return {CycleTerm: "cycle", CycleSum: "cycle", SymbolSum: "symbols", RatFunc: "function",
            Substitution: "substitution"}.get(type(v), type(v).__name__)


def _cycle(v, what):
    if isinstance(v, (CycleTerm, CycleSum)):
        return v
    raise ScriptError(f"{what} needs a cycle, got {_kind(v)}")


def _terms(v):
    v = _cycle(v, "this statement")
    return [v] if isinstance(v, CycleTerm) else v.terms()


def _split4(v, g):
    """[.., f4, ..] = [.., g, ..] + [.., f4/g, ..], certified termwise."""
    if not isinstance(g, RatFunc):
        raise ScriptError(f"split4 needs a function, got {_kind(g)}")
    out = CycleSum()
    for t in _terms(v):
        out = out + split_f4(t, (g, t.coords[3] / g)).rhs
    return out


def _raw_terms(v):
    return [v] if isinstance(v, CycleTerm) else v.terms()


def _apply(s, v):
    if not isinstance(s, Substitution):
        raise ScriptError(f"apply needs a substitution, got {_kind(s)}")
    if s is cat.TAU or set(s.mapping) <= {"a", "b", "c"}:
        if isinstance(v, SymbolSum):
            return v.substitute(s.mapping)
        return _subst_obj(v, s.mapping)
    if isinstance(v, CycleTerm):
        return reparametrize(v, s)
    if isinstance(v, CycleSum):
        return v.map_terms(lambda t: reparametrize(t, s))
    if isinstance(v, RatFunc):
        return s(v)
    raise ScriptError(f"cannot apply a substitution to {_kind(v)}")


def _symbols(v, via=None):
    """SymbolSum of a value by the evaluation lemma; certificates alongside."""
    if isinstance(v, SymbolSum):
        return v, []
    total, certs = SymbolSum(), []
    for t in _terms(v):
        s, vi = eval_stuv(t, via)
        total = total + s
        certs.append(vi)
    return total, certs


def format_value(v) -> str:
    if isinstance(v, CycleTerm):
        return format_cycle(v)
    if isinstance(v, CycleSum):
        return format_sum(v)
    if isinstance(v, SymbolSum):
        return str(v)
    if isinstance(v, RatFunc):
        return format_expr(v)
    if isinstance(v, Substitution):
        return "subst(" + ", ".join(f"{k} -> {format_expr(f)}" for k, f in sorted(v.mapping.items())) + ")"
    if isinstance(v, Fraction):
        return format_rational(v)
    return str(v)


def _canonical(v):
    if isinstance(v, CycleTerm):
        return as_sum(v)
    return v


# ---------------------------------------------------------------------------
# running


@dataclass
class Options:
    specialize: dict | None = None  # symbol -> Fraction
    steps: frozenset | None = None
    seed: int = 0
    certificates: bool = False


@dataclass
class StatementResult:
    statement: Statement
    status: str  # verified | failed | error | done | skipped
    detail: dict = field(default_factory=dict)
    message: str = ""
    seconds: float = 0.0

    def to_json(self):
        st = self.statement
        out = {"line": st.line, "column": st.column, "kind": st.kind, "source": st.source,
               "status": self.status}
        if self.message:
            out["message"] = self.message
        out.update(self.detail)
        return out


@dataclass
class RunReport:
    filename: str
    options: Options
    results: list

    def count(self, status):
        return sum(1 for r in self.results if r.status == status)

    @property
    def verdict(self) -> str:
        return "fail" if self.count("failed") or self.count("error") else "pass"

    @property
    def exit_code(self) -> int:
        return 0 if self.verdict == "pass" else 1

    def to_json(self):
        o = self.options
        return {
            "schema": 1,
            "script": self.filename,
            "options": {
                "specialize": None if o.specialize is None else
                {k: format_rational(v) for k, v in sorted(o.specialize.items())},
                "steps": None if o.steps is None else sorted(o.steps),
                "seed": o.seed,
            },
            "statements": [r.to_json() for r in self.results],
            "summary": {s: self.count(s) for s in ("verified", "failed", "error", "done", "skipped")},
            "verdict": self.verdict,
        }

    def text(self) -> str:
        lines = []
        for r in self.results:
            st = r.statement
            tag = {"verified": "ok", "done": "ok", "failed": "FAILED", "error": "ERROR",
                   "skipped": "skipped"}[r.status]
            lines.append(f"{st.line}:{st.column}  {st.source}  [{tag}]")
            if r.message:
                lines.append(f"    {r.message}")
            for key in ("value", "symbols", "residue"):
                if key in r.detail and isinstance(r.detail[key], str):
                    lines.append(f"    {key}: {r.detail[key]}")
            if "summary" in r.detail:
                lines.extend("    " + ln for ln in r.detail["summary"].splitlines())
        lines.append(f"verdict: {self.verdict} ({self.count('verified')} verified, "
                     f"{self.count('failed')} failed, {self.count('error')} errors)")
        return "\n".join(lines)


def run(script: Script, options: Options | None = None) -> RunReport:
    """Execute statements in order; failures are recorded and execution continues."""
    options = options or Options()
    env: dict = {}
    results = []
    for st in script.statements:
        t0 = time.perf_counter()
        try:
            status, detail, msg = _execute(st, env, options)
        except (ScriptError, RewriteError, AlgebraError, CycleError, ZeroDivisionError, ValueError,
                TypeError, KeyError) as exc:
            status, detail, msg = "error", {}, f"{type(exc).__name__}: {exc}"
            if st.kind == "let":
                env[st.name] = None
        results.append(StatementResult(st, status, detail, msg, time.perf_counter() - t0))
    return RunReport(script.filename, options, results)


def _value(node, env, options, symbolic=False):
    # bindings stay symbolic; the point is applied to statement values only,
    # after tau and other parameter maps have acted
    v = _eval(node, env, lambda v: v)
    if v is None:
        raise ScriptError("depends on a binding that failed")
    return v if symbolic else _specializer(options.specialize)(v)


def _display_terms(residue: CycleSum, originals):
    """Residue terms written like the input terms they came from."""
    out = []
    for t in residue.terms():
        shown = t
        for o in originals:
            unit = o.scaled(1 / o.coeff) if o.coeff else o
            k = residue.coefficient(unit)
            if k and as_sum(unit).scaled(k) == as_sum(t):
                shown = unit.scaled(k)
                break
        out.append(shown)
    return out


def _residue_detail(residue, originals=()):
    if isinstance(residue, SymbolSum):
        return {"residue": str(residue), "residue_terms": residue.to_json()}
    terms = _display_terms(residue, originals)
    text = format_cycle(terms[0]) if terms else "0"
    for t in terms[1:]:
        text += " - " + format_cycle(t.scaled(-1)) if t.coeff < 0 else " + " + format_cycle(t)
    return {"residue": text, "residue_terms": [format_cycle(t) for t in terms]}


def _nonnegligible(s: CycleSum):
    return CycleSum(t for t in s.terms() if is_negligible(t, NEGLIGIBLE_PATTERNS) is None)


def _execute(st: Statement, env, options):
    if st.kind == "let":
        v = _value(st.expr, env, options, symbolic=True)
        if st.mode == "cycle" and not isinstance(v, (CycleTerm, CycleSum)):
            raise ScriptError(f"'{st.name}' is declared a cycle but is {_kind(v)}")
        if st.mode == "symbols" and not isinstance(v, SymbolSum):
            raise ScriptError(f"'{st.name}' is declared symbols but is {_kind(v)}")
        env[st.name] = v
        return "done", {"value": format_value(v)}, ""
    if st.kind == "print":
        v = _canonical(_value(st.expr, env, options))
        return "done", {"value": format_value(v)}, ""
    if st.kind == "assert":
        return _assert(st, env, options)
    if st.kind == "eval":
        v = _value(st.expr, env, options)
        via = _value(st.via, env, options) if st.via is not None else None
        if via is not None and not isinstance(via, Substitution):
            raise ScriptError(f"via needs a substitution, got {_kind(via)}")
        total, certs = _symbols(v, via)
        detail = {"symbols": str(total), "terms": total.to_json()}
        if options.certificates:
            detail["certificates"] = [vi.to_json() for vi in certs]
        return "done", detail, ""
    if st.kind == "replay":
        return _replay(st, options)
    if st.kind == "check":
        return _check(st, options)
    raise ScriptError(f"unknown statement {st.kind}")


def _assert(st, env, options):
    v = _value(st.expr, env, options)
    if st.mode in ("admissible", "inadmissible"):
        reports = [(t, is_admissible(t)) for t in _terms(v)]
        want = st.mode == "admissible"
        ok = all(r.admissible == want for _, r in reports)
        detail = {"reports": [{"term": format_cycle(t), **r.to_json()} for t, r in reports]}
        bad = [format_cycle(t) for t, r in reports if r.admissible != want]
        return ("verified" if ok else "failed"), detail, "" if ok else f"not {st.mode}: {'; '.join(bad)}"
    if st.mode == "negligible":
        tags = [(t, is_negligible(t, NEGLIGIBLE_PATTERNS)) for t in _terms(v)]
        ok = all(tag is not None for _, tag in tags)
        detail = {"patterns": [{"term": format_cycle(t), "pattern": tag} for t, tag in tags]}
        bad = [format_cycle(t) for t, tag in tags if tag is None]
        return ("verified" if ok else "failed"), detail, "" if ok else f"not negligible: {'; '.join(bad)}"
    rhs = _value(st.rhs, env, options)
    detail = {}
    if st.mode == "boundary":
        lhs = boundary(_cycle(v, "boundary"))
        detail["boundary"] = format_sum(lhs)
    else:
        lhs = v
    if st.via is not None:
        sigma = _value(st.via, env, options)
        if not isinstance(sigma, Substitution):
            raise ScriptError(f"via needs a substitution, got {_kind(sigma)}")
        ids = [reparam(t, sigma, name=f"line {st.line}") for t in _terms(rhs)]
        rhs = CycleSum()
        for vi in ids:
            rhs = rhs + vi.rhs
        if options.certificates:
            detail["certificates"] = [vi.to_json() for vi in ids]
    if st.witness is not None:
        w = _cycle(_value(st.witness, env, options), "witness")
        wb = CycleSum()
        for t in _terms(w):
            wb = wb + boundary(t)
        detail["witness_boundary"] = format_sum(wb)
        rhs = _add(rhs, wb)
    if isinstance(lhs, SymbolSum) and isinstance(rhs, CycleSum) and not rhs:
        rhs = SymbolSum()
    if isinstance(lhs, SymbolSum) or isinstance(rhs, SymbolSum):
        if not (isinstance(lhs, SymbolSum) and isinstance(rhs, SymbolSum)):
            raise ScriptError(f"cannot compare {_kind(lhs)} with {_kind(rhs)}")
        residue = lhs - rhs
    else:
        residue = as_sum(_cycle(lhs, "equal")) - as_sum(_cycle(rhs, "equal"))
        if st.mod_discards:
            kept = _nonnegligible(residue)
            detail["discards"] = [{"term": format_cycle(t), "pattern": is_negligible(t, NEGLIGIBLE_PATTERNS)}
                                  for t in residue.terms() if t not in kept.terms()]
            residue = kept
    if residue:
        originals = []
        for side in (lhs, rhs):
            if isinstance(side, (CycleTerm, CycleSum)):
                originals += _raw_terms(side)
        detail.update(_residue_detail(residue, originals))
        return "failed", detail, "sides differ"
    return "verified", detail, ""


def _replay(st, options):
    from .goncharov import STEP_TITLES, DegenerateInput, StepFailed, replay_step, rerun_step, verify_theorem
    point = options.specialize
    if st.mode == "theorem":
        try:
            if point:
                rep = verify_theorem("specialized", point)
            else:
                rep = verify_theorem()
        except DegenerateInput as exc:
            raise ScriptError(f"DegenerateInput: {exc}") from None
        except StepFailed as exc:
            return "failed", {}, str(exc)
        ok = rep.status == "VERIFIED"
        detail = {"report": rep.to_json(certificates=options.certificates), "summary": rep.summary()}
        return ("verified" if ok else "failed"), detail, ""
    ks = [k for k in range(st.lo, st.hi + 1) if options.steps is None or k in options.steps]
    if not ks:
        return "skipped", {}, "outside --steps"
    rows, failed = [], []
    for k in ks:
        try:
            res = replay_step(k)
            row = {"step": k, "title": STEP_TITLES[k], "status": res.status,
                   "identity": res.identity.name}
            if point:
                ids = rerun_step(k, point)
                row["specialized"] = [vi.name for vi in ids]
            if options.certificates:
                row["certificate"] = res.identity.to_json()
        except (StepFailed, DegenerateInput) as exc:
            row = {"step": k, "status": "FAILED", "message": str(exc)}
            failed.append(k)
        rows.append(row)
    msg = f"step(s) {', '.join(map(str, failed))} failed" if failed else ""
    return ("failed" if failed else "verified"), {"steps": rows}, msg


def _check(st, options):
    rng = random.Random(options.seed)
    bad = []
    for i in range(st.lo):
        if st.mode == "ddzero":
            t = template_term(rng)
            if not ddzero_holds(t):
                bad.append(format_cycle(t))
        else:
            t = random_term(rng)
            if not alternation_holds(t, rng):
                bad.append(format_cycle(t))
    detail = {"count": st.lo, "seed": options.seed, "counterexamples": bad[:5]}
    return ("failed" if bad else "verified"), detail, f"{len(bad)} counterexample(s)" if bad else ""


# ---------------------------------------------------------------------------
# option parsing shared with the command line


def parse_assignment(text: str) -> dict:
    """``a=2,b=3,c=5`` -> {symbol: Fraction}."""
    out = {}
    for piece in text.split(","):
        if not piece.strip():
            continue
        k, sep, v = piece.partition("=")
        k = k.strip()
        if not sep or k not in ("a", "b", "c"):
            raise ValueError(f"bad assignment {piece.strip()!r} (expected a=p/q)")
        try:
            out[k] = Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"bad rational {v.strip()!r}") from None
    return out


def parse_steps(text: str) -> frozenset:
    """``1-3,7`` -> {1, 2, 3, 7}."""
    out = set()
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        lo, sep, hi = piece.replace("..", "-").partition("-")
        try:
            lo = int(lo)
            hi = int(hi) if sep else lo
        except ValueError:
            raise ValueError(f"bad step range {piece!r}") from None
        if not 1 <= lo <= hi <= 10:
            raise ValueError(f"steps are numbered 1..10, got {piece!r}")
        out.update(range(lo, hi + 1))
    return frozenset(out)
