"""Command line driver.

    prodcheck FILE [--mode decide|gates|oracle-check] [--root NAME]
                   [--report text|json] [--max-columns N] [--finitize-cap N]
                   [--oracle-prod-cap N] [--oracle-steps N]
                   [--dump-equations] [--verbose]

Exit codes: 0 every analyzed constant is productive, 1 some constant is
(data-obliviously) non-productive, 2 some verdict is unknown; 10 parse
error, 11 validation error, 12 translation error, 13 a search cap was hit.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys

from . import dogame
from .equations import FinitizeCapError, TranslationError
from .ioalg import conat_str, is_top, render
from .prodterm import pretty
from . import equations as eqmod
from .solver import SolverCapError, SolverError, dump_diagram
from .streamspec import ParseError, classify, parse, validate
from .translate import Caps, TranslateError, decide, translate_symbols

_CLASS_WORDS = {
    "pure": "pure",
    "flat": "flat",
    "friendly": "friendly nesting",
    "unfriendly": "unfriendly nesting",
}


def _build_parser():
    p = argparse.ArgumentParser(prog="prodcheck", description="stream specification productivity analyzer")
    p.add_argument("file", help="specification file")
    p.add_argument("--mode", choices=["decide", "gates", "oracle-check"], default="decide")
    p.add_argument("--root", help="analyze only this stream constant")
    p.add_argument("--report", choices=["text", "json"], default="text")
    p.add_argument("--max-columns", type=int, default=10000)
    p.add_argument("--finitize-cap", type=int, default=100000)
    p.add_argument("--oracle-prod-cap", type=int, default=32)
    p.add_argument("--oracle-steps", type=int, default=100000)
    p.add_argument("--dump-equations", action="store_true", help="print the finitized equation system")
    p.add_argument("--dump-diagram", action="store_true", help="print solver columns and repetition witnesses")
    p.add_argument("--verbose", action="store_true")
    return p


def _debug_dumps(spec, iospec, args, out):
    if args.dump_equations:
        out.write(iospec.dump() + "\n")
        for root in iospec.roots:
            out.write("%s = %s\n" % (eqmod.var_str(root), iospec.dump_mu(root)))
        out.write("\n")
    if args.dump_diagram:
        for root in iospec.roots:
            out.write(dump_diagram(iospec, root, max_columns=args.max_columns) + "\n")
        out.write("\n")


def _classification_lines(spec, cls):
    lines = ["-- classification --"]
    for name in spec.signature.stream_functions():
        klass = _CLASS_WORDS[cls.symbol_class[name]]
        guard = "weakly guarded" if cls.guarded[name] else "unguarded"
        lines.append("%s : %s (%s)" % (name, klass, guard))
    return lines


def _gate_lines(spec, gates):
    lines = ["-- gates --"]
    for name in spec.signature.stream_functions():
        lines.append("%s : %s" % (name, gates[name]))
    return lines


def _trace_lines(verdict):
    lines = ["-- analysis of %s --" % verdict.constant]
    first = verdict.trace[0][1]
    lines.append("[%s] = %s" % (verdict.constant, pretty(first)))
    for rule, term in verdict.trace[1:]:
        lines.append("  ~> %s    [%s]" % (pretty(term), rule))
    lines.append(verdict.sentence())
    return lines


def _exit_code(verdicts) -> int:
    answers = {v.answer for v in verdicts.values()}
    if answers & {"not-productive", "not-do-productive"}:
        return 1
    if "unknown" in answers:
        return 2
    return 0


def _report_text(spec, cls, gates, verdicts, out):
    lines = []
    lines.extend(_classification_lines(spec, cls))
    lines.append("")
    lines.extend(_gate_lines(spec, gates))
    for name in verdicts:
        lines.append("")
        lines.extend(_trace_lines(verdicts[name]))
    lines.append("")
    lines.append("-- summary --")
    for name, v in verdicts.items():
        lines.append("%s : production = %s : %s" % (name, conat_str(v.production), v.answer))
    out.write("\n".join(lines) + "\n")


def _report_json(spec, gates, verdicts, out):
    payload = {
        "constants": [
            {
                "name": name,
                "production": "inf" if is_top(v.production) else int(v.production),
                "verdict": v.answer,
            }
            for name, v in verdicts.items()
        ],
        "gates": {
            name: {
                "cap": "inf" if is_top(g.cap) else int(g.cap),
                "args": [render(a) for a in g.args],
            }
            for name, g in gates.items()
        },
    }
    out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _oracle_check(spec, cls, gates, verdicts, caps, out):
    """Cross-check gates and verdicts against the game oracle."""
    from .ioalg import interpret

    failures = 0
    for name in spec.signature.stream_functions():
        if cls.symbol_class[name] not in ("flat", "pure"):
            out.write("%s : skipped (nesting)\n" % name)
            continue
        g = gates[name]
        arity = g.arity
        agree = True
        for supplies in itertools.product(range(5), repeat=arity):
            gate_value = min([g.cap] + [interpret(a, n) for a, n in zip(g.args, supplies)])
            game = dogame.do_low_function(spec, cls, name, supplies, prod_cap=caps.oracle_prod_cap)
            if isinstance(game, dogame.AtLeast):
                ok = is_top(gate_value) or gate_value >= game.bound
            else:
                ok = gate_value == game
            if not ok:
                agree = False
                out.write(
                    "%s%s : gate %s vs game %s\n"
                    % (name, supplies, conat_str(gate_value), game)
                )
        out.write("%s : %s\n" % (name, "gate agrees with game" if agree else "MISMATCH"))
        failures += 0 if agree else 1
    for name, v in verdicts.items():
        try:
            game = dogame.do_low_constant(
                spec, cls, name, prod_cap=caps.oracle_prod_cap, step_cap=caps.oracle_steps
            )
        except ValueError as exc:
            out.write("%s : skipped (%s)\n" % (name, exc))
            continue
        # the game's adversary commits one rule per symbol, so its value can
        # only exceed the translated lower bound, never undercut it
        if isinstance(game, dogame.AtLeast):
            ok = True
            word = "consistent"
        elif v.production == game:
            ok = True
            word = "agree"
        else:
            ok = not is_top(v.production) and v.production < game
            word = "consistent (restricted adversary)" if ok else "MISMATCH"
        out.write(
            "%s : production %s vs game %s : %s\n"
            % (name, conat_str(v.production), game, word)
        )
        failures += 0 if ok else 1
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    caps = Caps(
        max_columns=args.max_columns,
        finitize_cap=args.finitize_cap,
        oracle_prod_cap=args.oracle_prod_cap,
        oracle_steps=args.oracle_steps,
    )
    out = sys.stdout
    try:
        with open(args.file, "rb") as handle:
            text = handle.read().decode("utf-8")
    except OSError as exc:
        print("prodcheck: %s" % exc, file=sys.stderr)
        return 10
    try:
        spec = parse(text, args.file)
    except ParseError as exc:
        print(str(exc.diagnostic), file=sys.stderr)
        return 10
    diagnostics = validate(spec)
    errors = [d for d in diagnostics if d.severity == "error"]
    for d in diagnostics:
        if d.severity == "error" or args.verbose:
            print(str(d), file=sys.stderr)
    if errors:
        return 11
    cls = classify(spec)
    try:
        gates, iospec = translate_symbols(spec, cls, caps)
        if args.mode == "gates":
            _debug_dumps(spec, iospec, args, out)
            out.write("\n".join(_classification_lines(spec, cls)) + "\n\n")
            out.write("\n".join(_gate_lines(spec, gates)) + "\n")
            return 0
        verdicts, gates, cls = decide(spec, caps, root=args.root, gates=gates)
    except (TranslationError, TranslateError) as exc:
        print("prodcheck: %s" % exc, file=sys.stderr)
        return 12
    except (FinitizeCapError, SolverCapError) as exc:
        print("prodcheck: %s" % exc, file=sys.stderr)
        return 13
    except SolverError as exc:
        print("prodcheck: %s" % exc, file=sys.stderr)
        return 12
    _debug_dumps(spec, iospec, args, out)
    if args.mode == "oracle-check":
        return _oracle_check(spec, cls, gates, verdicts, caps, out)
    if args.report == "json":
        _report_json(spec, gates, verdicts, out)
    else:
        _report_text(spec, cls, gates, verdicts, out)
    return _exit_code(verdicts)


if __name__ == "__main__":
    sys.exit(main())
