import pytest

from prodcheck import equations as eq
from prodcheck.equations import (
    EInf,
    EStep,
    EVar,
    IOSpec,
    TranslationError,
    XID,
    XM,
    XP,
    arg,
    build_equations,
    finitize,
    is_weakly_guarded,
    star,
    steps,
)
from prodcheck.ioalg import interpret, parse_ioterm
from prodcheck.solver import Diagram, build_graph, solve
from prodcheck.streamspec import classify, parse

from conftest import load


def builder_for(spec):
    return build_equations(spec, classify(spec))


def test_pascal_arg_equation(corpus):
    b = builder_for(corpus["pascal"])
    got = b.rhs(arg("f", 1, 0))
    want = EInf(
        steps("--+", EVar(arg("f", 1, 1))),
        steps("-++", EVar(arg("f", 1, 0))),
    )
    assert got == want


def test_pascal_star_equation(corpus):
    b = builder_for(corpus["pascal"])
    assert b.rhs(star("f")) == EInf(steps("+", EVar(star("f"))), steps("++", EVar(star("f"))))


def test_base_equations(corpus):
    b = builder_for(corpus["pascal"])
    assert b.rhs(XM) == eq.EEmpty()
    assert b.rhs(XP) == EStep("+", EVar(XP))
    assert b.rhs(XID) == EStep("-", EStep("+", EVar(XID)))


def test_nested_feedback_equations(corpus):
    b = builder_for(corpus["nested_fb"])
    for q in range(4):
        assert b.rhs(arg("b", 3, q)) == EStep("+", EVar(arg("b", 2, q + 1)))
    assert b.rhs(arg("b", 1, 0)) == steps("--+", EVar(arg("b", 3, 1)))
    assert b.rhs(arg("b", 1, 1)) == steps("-+", EVar(arg("b", 3, 1)))
    assert b.rhs(arg("b", 1, 3)) == steps("+", EVar(arg("b", 3, 2)))


def test_unguarded_symbol_maps_to_empty(corpus):
    b = builder_for(corpus["intro_b"])
    assert b.rhs(arg("g", 1, 0)) == EVar(XM)
    assert b.rhs(star("g")) == EVar(XM)


def test_nesting_rule_maps_to_identity(corpus):
    b = builder_for(corpus["convolution"])
    assert b.rhs(arg("conv", 1, 0)) == EVar(XID)
    assert b.rhs(star("conv")) == EVar(XID)


def test_unfriendly_not_translatable():
    text = """Signature(
      f : stream(bit) -> stream(bit),
      g : stream(bit) -> stream(bit),
      0, 1 : bit
    )
    f(x:y:s) = x:g(f(s))
    g(x:s) = x:g(s)
    """
    spec = parse(text)
    b = builder_for(spec)
    with pytest.raises(TranslationError):
        b.rhs(arg("f", 1, 0))


def test_finitize_pascal_reachable_set(corpus):
    b = builder_for(corpus["pascal"])
    iospec = finitize(b, [arg("f", 1, 0)])
    argvars = {v for v in iospec.equations if v[0] == "arg"}
    assert argvars == {arg("f", 1, 0), arg("f", 1, 1)}
    assert is_weakly_guarded(iospec)


def test_finitize_pascal_star(corpus):
    b = builder_for(corpus["pascal"])
    iospec = finitize(b, [star("f")])
    assert solve(iospec, star("f")) == parse_ioterm("(+)")


def test_finitize_rpc_fires_on_nested_example(corpus):
    b = builder_for(corpus["nested_fb"])
    iospec = finitize(b, [arg("f", 1, 0)])
    assert iospec.equations[arg("b", 3, 0)] == EVar(XP)
    assert iospec.equations[arg("b", 3, 1)] == EVar(XP)
    assert solve(iospec, arg("f", 1, 0)) == parse_ioterm("-+--(+)")
    assert is_weakly_guarded(iospec)


def test_finitize_cap():
    spec = load("nested_fb")
    b = builder_for(spec)
    with pytest.raises(eq.FinitizeCapError):
        finitize(b, [arg("f", 1, 0)], cap=2)


def test_corpus_systems_weakly_guarded(corpus):
    for name, spec in corpus.items():
        b = builder_for(spec)
        cls = classify(spec)
        roots = []
        for f in spec.signature.stream_functions():
            info = spec.signature.symbols[f]
            roots.append(star(f))
            roots.extend(arg(f, i, 0) for i in range(1, info.stream_arity + 1))
        iospec = finitize(b, roots)
        assert is_weakly_guarded(iospec), name


def test_rpc_soundness_against_deep_truncation(corpus):
    """Solutions after pseudo-cycle removal match a direct diagram over the
    system materialized far deeper than any value we inspect."""
    for name in ("nested_fb", "pascal", "traces", "convolution"):
        spec = load(name)
        b = builder_for(spec)
        for f in spec.signature.stream_functions():
            info = spec.signature.symbols[f]
            for i in range(1, info.stream_arity + 1):
                root = arg(f, i, 0)
                solved = solve(finitize(b, [root]), root)
                deep = _truncate_without_rpc(b, root, qmax=100)
                g = build_graph(deep, root)
                diagram = Diagram(g)
                for n in range(40):
                    assert interpret(solved, n) == diagram.bound(n), (name, f, i, n)


def _truncate_without_rpc(builder, root, qmax):
    """Materialize the raw system breadth-first; references above the q
    ceiling are stubbed with the all-output variable, which only all-'+'
    chains can reach within the inspected range."""
    eqs = {v: builder.rhs(v) for v in (XM, XP, XID)}
    todo = [root]
    while todo:
        v = todo.pop()
        if v in eqs:
            continue
        if v[0] == "arg" and v[3] > qmax:
            eqs[v] = EVar(XP)
            continue
        eqs[v] = builder.rhs(v)
        for w, _ in eq.expr_vars(eqs[v]):
            if w not in eqs:
                todo.append(w)
    return IOSpec(eqs, (root,))


def test_dump_format(corpus):
    b = builder_for(corpus["pascal"])
    iospec = finitize(b, [arg("f", 1, 0)])
    dump = iospec.dump()
    assert "X_{f,1,0} = /\\ { --+X_{f,1,1}, -++X_{f,1,0} }" in dump
