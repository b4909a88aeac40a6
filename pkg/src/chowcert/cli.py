"""Command-line driver: ``chowcert <command> ...``.

Exit status: 0 when everything verified, 1 when an assertion failed,
2 on input or usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .algebra import AlgebraError
from .boundary import boundary, is_admissible
from .cycles import CycleError, CycleSum, CycleTerm, as_sum
from .rewrite import RewriteError
from .script import (Options, ScriptError, ScriptSyntaxError, _canonical, _symbols, evaluate, format_value,
                     parse_assignment, parse_object, parse_script, parse_steps, run)
from .symbols import SymbolSum
from .textform import format_cycle, format_sum

__all__ = ["main", "main_entry", "dumps", "bundled_script"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def dumps(obj) -> str:
    """Deterministic JSON text (insertion order, two-space indent, trailing newline)."""
    return json.dumps(obj, indent=2, ensure_ascii=True) + "\n"


def bundled_script(name: str = "theorem41.gcs") -> Path:
    return Path(__file__).with_name("scripts") / name


def _options(args) -> Options:
    return Options(
        specialize=parse_assignment(args.specialize) if args.specialize else None,
        steps=parse_steps(args.steps) if args.steps else None,
        seed=args.seed,
        certificates=args.certificates,
    )


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="machine-readable report (schema 1)")
    p.add_argument("--specialize", metavar="SYM=RAT,...", help="evaluate at a rational point, e.g. a=2,b=3,c=5")
    p.add_argument("--steps", metavar="RANGE", help="restrict step replays, e.g. 1-5,8")
    p.add_argument("--seed", type=int, default=0, help="seed of the property-check generator")
    p.add_argument("--certificates", action="store_true", help="include full certificate chains in JSON")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="chowcert", description="Certified cycle computations and proof scripts.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("normalize", "canonical form of a cycle or symbol sum"),
                        ("boundary", "boundary of a cycle"),
                        ("admissible", "admissibility report of every term"),
                        ("eval", "evaluate a cycle as symbols {t}_c")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("object", help="object text, e.g. '[x, y, 1 - x, 1 - y/x, 1 - a/y] params (x,y)' or ZA")
        if name == "eval":
            sp.add_argument("--via", help="reparametrization applied first, e.g. 'subst(x -> 1/x)'")
    sp = sub.add_parser("replay", parents=[common], help="run a .gcs proof script")
    sp.add_argument("script", help="script path, or 'theorem41' for the bundled script")
    sub.add_parser("theorem", parents=[common], help="verify the 22-term relation end to end")
    return p


def _emit(args, payload: dict, text: str):
    if args.json:
        sys.stdout.write(dumps({"schema": 1, "command": args.command, **payload}))
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _error(args, kind: str, message: str, **extra) -> int:
    if getattr(args, "json", False):
        sys.stdout.write(dumps({"schema": 1, "command": getattr(args, "command", None),
                                "error": {"kind": kind, "message": message, **extra}}))
    sys.stderr.write(f"chowcert: {message}\n")
    return EXIT_USAGE


def _object(args, opts):
    node = parse_object(args.object)
    return evaluate(node, point=opts.specialize)


def _terms_json(v):
    if isinstance(v, SymbolSum):
        return v.to_json()
    if isinstance(v, (CycleTerm, CycleSum)):
        return [format_cycle(t) for t in as_sum(v).terms()]
    return None


def _cmd_object(args, opts) -> int:
    v = _object(args, opts)
    if args.command == "normalize":
        v = _canonical(v)
        _emit(args, {"input": args.object, "value": format_value(v), "terms": _terms_json(v)}, format_value(v))
        return EXIT_OK
    if args.command == "boundary":
        if not isinstance(v, (CycleTerm, CycleSum)):
            raise ScriptError("boundary needs a cycle")
        b = boundary(v)
        _emit(args, {"input": args.object, "boundary": format_sum(b), "terms": _terms_json(b)}, format_sum(b))
        return EXIT_OK
    if args.command == "admissible":
        if not isinstance(v, (CycleTerm, CycleSum)):
            raise ScriptError("admissible needs a cycle")
        terms = [v] if isinstance(v, CycleTerm) else v.terms()
        reports = [(t, is_admissible(t)) for t in terms]
        ok = all(r.admissible for _, r in reports)
        lines = []
        for t, r in reports:
            lines.append(f"{format_cycle(t)}: {r.verdict.upper()}")
            for f in r.findings:
                faces = ", ".join(f"t{i}={v}" for i, v in f.faces)
                where = " / ".join(f.components) or "-"
                if f.contained_in:
                    lines.append(f"  {faces} on {where}: contained in {', '.join(f't{j}=1' for j in f.contained_in)}")
                else:
                    lines.append(f"  {faces} on {where}: dimension {f.dim} (bound {f.bound})")
            if r.message:
                lines.append(f"  {r.message}")
        payload = {"input": args.object, "verdict": "admissible" if ok else "inadmissible",
                   "reports": [{"term": format_cycle(t), **r.to_json()} for t, r in reports]}
        _emit(args, payload, "\n".join(lines))
        return EXIT_OK if ok else EXIT_FAIL
    # eval
    via = None
    if args.via:
        via = evaluate(parse_object(args.via), point=opts.specialize)
    total, certs = _symbols(v, via)
    payload = {"input": args.object, "symbols": str(total), "terms": total.to_json()}
    if opts.certificates:
        payload["certificates"] = [vi.to_json() for vi in certs]
    _emit(args, payload, str(total))
    return EXIT_OK


def _cmd_replay(args, opts) -> int:
    path = bundled_script() if args.script in ("theorem41", "theorem41.gcs") and not Path(args.script).exists() \
        else Path(args.script)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        return _error(args, "io", f"cannot read {args.script}: {exc.strerror}")
    try:
        script = parse_script(text, filename=path.name)
    except ScriptSyntaxError as exc:
        return _error(args, "syntax", str(exc), line=exc.line, column=exc.column)
    report = run(script, opts)
    _emit(args, report.to_json(), report.text())
    return report.exit_code


def _cmd_theorem(args, opts) -> int:
    from .goncharov import STEP_TITLES, DegenerateInput, StepFailed, replay_step, verify_theorem
    if opts.steps is not None:
        rows, lines, ok = [], [], True
        for k in sorted(opts.steps):
            try:
                status = replay_step(k).status
            except StepFailed as exc:
                status = f"FAILED: {exc}"
            ok = ok and status == "VERIFIED"
            rows.append({"step": k, "title": STEP_TITLES[k], "status": status})
            lines.append(f"step {k:>2}  {status}  {STEP_TITLES[k]}")
        _emit(args, {"steps": rows, "status": "VERIFIED" if ok else "FAILED"}, "\n".join(lines))
        return EXIT_OK if ok else EXIT_FAIL
    try:
        if opts.specialize is not None:
            rep = verify_theorem("specialized", opts.specialize)
        else:
            rep = verify_theorem()
    except DegenerateInput as exc:
        return _error(args, "degenerate-input", str(exc))
    except StepFailed as exc:
        _emit(args, {"status": "FAILED", "message": str(exc)}, f"status: FAILED\n{exc}")
        return EXIT_FAIL
    _emit(args, rep.to_json(certificates=opts.certificates), rep.summary())
    return EXIT_OK if rep.status == "VERIFIED" else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        opts = _options(args)
    except ValueError as exc:
        return _error(args, "usage", str(exc))
    try:
        if args.command == "replay":
            return _cmd_replay(args, opts)
        if args.command == "theorem":
            return _cmd_theorem(args, opts)
        return _cmd_object(args, opts)
    except ScriptSyntaxError as exc:
        return _error(args, "syntax", str(exc), line=exc.line, column=exc.column)
    except (ScriptError, RewriteError, AlgebraError, CycleError, ValueError, ZeroDivisionError) as exc:
        return _error(args, "input", f"{type(exc).__name__}: {exc}")


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
