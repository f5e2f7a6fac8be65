"""End-to-end decision pipeline.

Stream functions are translated into gates by solving their argument and
star equations; stream constants are unfolded into closed production terms
over those gates; collapsing the term yields the constant's production, and
the verdict follows from that number and how much of the specification the
constant touches (pure, flat, or friendly nesting).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import equations as eq
from .ioalg import TOP, CoNat, interpret, is_top
from .prodterm import Gate, Mu, Peb, ProdTerm, Var, collapse_trace, gate_apply, meet_all
from .solver import solve
from .streamspec import (
    App,
    Classification,
    Cons,
    StreamSpec,
    SVar,
    classify,
    reachable_symbols,
)


class TranslateError(Exception):
    pass


@dataclass
class Caps:
    max_columns: int = 10000
    finitize_cap: int = 100000
    oracle_prod_cap: int = 32
    oracle_steps: int = 100000


def translate_symbols(spec: StreamSpec, cls: Classification | None = None, caps: Caps | None = None):
    """Gate table for every stream function of the specification."""
    cls = cls or classify(spec)
    caps = caps or Caps()
    functions = spec.signature.stream_functions()
    for name in functions:
        if cls.symbol_class[name] == "unfriendly":
            bad = next(sh for sh in cls.shapes[name] if sh.nesting)
            raise TranslateError(
                "cannot translate %r: unfriendly nesting rule %r" % (name, str(bad.rule))
            )
    builder = eq.build_equations(spec, cls)
    roots = []
    for name in functions:
        info = spec.signature.symbols[name]
        roots.append(eq.star(name))
        roots.extend(eq.arg(name, i, 0) for i in range(1, info.stream_arity + 1))
    iospec = eq.finitize(builder, roots, cap=caps.finitize_cap)
    gates = {}
    for name in functions:
        info = spec.signature.symbols[name]
        star_seq = solve(iospec, eq.star(name), max_columns=caps.max_columns)
        args = tuple(
            solve(iospec, eq.arg(name, i, 0), max_columns=caps.max_columns)
            for i in range(1, info.stream_arity + 1)
        )
        gates[name] = Gate(cap=interpret(star_seq, TOP), args=args, star=star_seq)
    return gates, iospec


def translate_constant(spec: StreamSpec, gates: dict, name: str) -> ProdTerm:
    """Closed production term for a stream constant.

    Constants unfold under a mu binder, with already-unfolded constants
    turning into back references; cons becomes a pebble and stream function
    applications become their gate applied to the translated arguments.
    """
    sig = spec.signature
    if name not in sig.symbols or sig.symbols[name].kind != "const":
        raise TranslateError("%r is not a stream constant" % name)

    def tr(term, visited):
        if isinstance(term, Cons):
            return Peb(tr(term.tail, visited))
        if isinstance(term, SVar):
            raise TranslateError("stream variable %r reachable from constant %r" % (term.name, name))
        assert isinstance(term, App)
        info = sig.symbols[term.sym]
        if info.kind == "const":
            if term.sym in visited:
                return Var(term.sym)
            rules = spec.rules_of(term.sym)
            if not rules:
                raise TranslateError("stream constant %r has no defining rule" % term.sym)
            inner = visited | {term.sym}
            return Mu(term.sym, meet_all([tr(r.rhs, inner) for r in rules]))
        children = [tr(a, visited) for a in term.args[: info.stream_arity]]
        return gate_apply(gates[term.sym], children)

    return tr(App(name, ()), frozenset())


@dataclass
class Verdict:
    constant: str
    production: CoNat
    context: str  # "pure" | "flat" | "friendly-nesting"
    answer: str  # "productive" | "not-productive" | "not-do-productive" | "unknown"
    trace: list = field(default_factory=list)

    def sentence(self) -> str:
        if self.answer == "productive":
            return "The specification of %s is productive." % self.constant
        if self.answer == "unknown":
            return "Failed to prove productivity of %s." % self.constant
        k = int(self.production)
        if self.answer == "not-do-productive":
            return "%s is not data-obliviously productive (production = %d)." % (self.constant, k)
        return "%s is not productive (production = %d)." % (self.constant, k)


def _context_for(spec: StreamSpec, cls: Classification, constant: str) -> str:
    reach = reachable_symbols(spec, cls, constant)
    classes = {cls.symbol_class[s] for s in reach if s in cls.symbol_class}
    if "friendly" in classes:
        return "friendly-nesting"
    if "flat" in classes:
        return "flat"
    return "pure"


def decide(spec: StreamSpec, caps: Caps | None = None, root: str | None = None, gates: dict | None = None):
    """Analyze every declared stream constant (or just `root`)."""
    caps = caps or Caps()
    cls = classify(spec)
    if gates is None:
        gates, _ = translate_symbols(spec, cls, caps)
    constants = spec.signature.stream_constants()
    if root is not None:
        if root not in constants:
            raise TranslateError("unknown stream constant %r" % root)
        constants = [root]
    verdicts = {}
    for name in constants:
        term = translate_constant(spec, gates, name)
        trace = collapse_trace(term)
        k = (trace[-1][1] if trace else term).value
        context = _context_for(spec, cls, name)
        if is_top(k):
            answer = "productive"
        elif context == "pure":
            answer = "not-productive"
        elif context == "flat":
            answer = "not-do-productive"
        else:
            answer = "unknown"
        verdicts[name] = Verdict(name, k, context, answer, [(None, term)] + trace)
    return verdicts, gates, cls
