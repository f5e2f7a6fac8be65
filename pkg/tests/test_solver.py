import random

import pytest

from prodcheck.equations import (
    EEmpty,
    EInf,
    EStep,
    EVar,
    IOSpec,
    is_weakly_guarded,
    steps,
)
from prodcheck.ioalg import TOP, interpret, parse_ioterm, render
from prodcheck.solver import (
    Diagram,
    SolverCapError,
    SolverError,
    _step_right,
    _vclose,
    build_graph,
    column_at,
    lower_bound_at,
    solve,
)

X = ("v", "X")
Y = ("v", "Y")


def sys1(**eqs):
    table = {("v", k): v for k, v in eqs.items()}
    return IOSpec(table, tuple(table))


# --- graph construction -----------------------------------------------------


def test_graph_single_plus_loop():
    iospec = sys1(X=EStep("+", EVar(X)))
    g = build_graph(iospec, X)
    assert g.size == 2
    assert g.out_plus[g.root] and not g.out_minus[g.root]
    (target,) = g.out_plus[g.root]
    assert g.eps[target] == [g.root]


def test_graph_translation_example():
    iospec = sys1(
        X=EInf(steps("-++", EVar(X)), steps("--+", EVar(Y))),
        Y=EInf(steps("++", EVar(X)), steps("-+", EVar(Y))),
    )
    g = build_graph(iospec, X)
    # one node per position of each right-hand side, variables included
    assert g.size == 16
    forks = [n for n in range(g.size) if len(g.eps[n]) == 2]
    assert len(forks) == 2
    assert solve(iospec, X) == parse_ioterm("-(-+)")


def test_graph_rejects_silent_cycle():
    iospec = sys1(X=EVar(Y), Y=EVar(X))
    with pytest.raises(SolverError):
        build_graph(iospec, X)


def test_graph_missing_root():
    with pytest.raises(SolverError):
        build_graph(sys1(X=EEmpty()), Y)


# --- columns and bounds ------------------------------------------------------


def test_columns_all_output():
    iospec = sys1(X=EStep("+", EVar(X)))
    g = build_graph(iospec, X)
    col = column_at(g, 0)
    assert col[g.root] == 0 and len(col) == 2
    assert lower_bound_at(g, 0) == TOP
    assert lower_bound_at(g, 5) == TOP


def test_columns_identity():
    iospec = sys1(X=EStep("-", EStep("+", EVar(X))))
    g = build_graph(iospec, X)
    assert [lower_bound_at(g, x) for x in range(4)] == [0, 1, 2, 3]
    assert lower_bound_at(g, 7) == 7


def test_columns_pascal(corpus):
    from prodcheck.equations import arg, build_equations, finitize
    from prodcheck.streamspec import classify

    spec = corpus["pascal"]
    b = build_equations(spec, classify(spec))
    iospec = finitize(b, [arg("f", 1, 0)])
    g = build_graph(iospec, arg("f", 1, 0))
    assert [lower_bound_at(g, x) for x in range(5)] == [0, 0, 1, 2, 3]


def test_bound_matches_nested_solution(corpus):
    from prodcheck.equations import arg, build_equations, finitize
    from prodcheck.streamspec import classify

    spec = corpus["nested_fb"]
    b = build_equations(spec, classify(spec))
    iospec = finitize(b, [arg("f", 1, 0)])
    g = build_graph(iospec, arg("f", 1, 0))
    expect = parse_ioterm("-+--(+)")
    for n in range(6):
        assert lower_bound_at(g, n) == interpret(expect, n)


# --- solving -----------------------------------------------------------------


def test_solve_simple_shapes():
    assert solve(sys1(X=EStep("+", EVar(X))), X) == parse_ioterm("(+)")
    assert solve(sys1(X=EStep("-", EVar(X))), X) == parse_ioterm("eps")
    assert solve(sys1(X=EEmpty()), X) == parse_ioterm("eps")


def test_solve_guarded_words():
    rng = random.Random(41)
    for _ in range(60):
        n = rng.randrange(1, 7)
        word = "".join(rng.choice("-+") for _ in range(n))
        if "+" not in word:
            continue
        iospec = sys1(X=steps(word, EVar(X)))
        got = solve(iospec, X)
        want = parse_ioterm("(%s)" % word)
        for k in range(40):
            assert interpret(got, k) == interpret(want, k)


def test_solve_cap():
    iospec = sys1(X=EStep("-", EStep("+", EVar(X))))
    with pytest.raises(SolverCapError):
        solve(iospec, X, max_columns=2)


def test_repetition_witness_and_shift_stability():
    iospec = sys1(
        X=EInf(steps("-++", EVar(X)), steps("--+", EVar(Y))),
        Y=EInf(steps("++", EVar(X)), steps("-+", EVar(Y))),
    )
    witness: list = []
    solve(iospec, X, trace=witness)
    assert witness
    x1, x2 = witness[0]
    g = build_graph(iospec, X)
    diagram = Diagram(g)

    def pseudo(x1, x2):
        c1, c2 = diagram.column(x1), diagram.column(x2)
        if set(c1) != set(c2):
            return False
        d = min(c2.values()) - min(c1.values())
        return all(c2[v] - c1[v] >= d for v in c1)

    assert pseudo(x1, x2)
    for m in range(1, 4):
        assert pseudo(x1 + m, x2 + m)


def test_vclose_is_a_closure():
    iospec = sys1(
        X=EInf(steps("-++", EVar(X)), steps("--+", EVar(Y))),
        Y=EInf(steps("++", EVar(X)), steps("-+", EVar(Y))),
    )
    g = build_graph(iospec, X)
    col = _vclose(g, {g.root: 0})
    assert _vclose(g, dict(col)) == col
    nxt = _vclose(g, _step_right(g, col))
    assert _vclose(g, dict(nxt)) == nxt


# --- random systems against a no-omit enumeration --------------------------


def random_system(rng, max_eqs=5, max_size=8):
    names = [("v", "X%d" % i) for i in range(rng.randrange(1, max_eqs + 1))]

    def expr(budget):
        kind = rng.choice(["step", "step", "var", "inf", "empty"])
        if budget <= 1:
            kind = rng.choice(["var", "empty"])
        if kind == "empty":
            return EEmpty()
        if kind == "var":
            return EVar(rng.choice(names))
        if kind == "step":
            return EStep(rng.choice("-+"), expr(budget - 1))
        left = budget // 2
        return EInf(expr(left), expr(budget - 1 - left))

    table = {n: expr(rng.randrange(2, max_size + 1)) for n in names}
    return IOSpec(table, tuple(names))


def no_omit_entries(g, xmax, ymax):
    """All diagram entries with bounded height, by saturation (no omit)."""
    entries = {(g.root, 0, 0)}
    frontier = [(g.root, 0, 0)]
    while frontier:
        v, x, y = frontier.pop()
        moves = [(w, x, y) for w in g.eps[v]]
        moves += [(w, x, y + 1) for w in g.out_plus[v]]
        moves += [(w, x + 1, y) for w in g.out_minus[v]]
        for e in moves:
            if e[1] <= xmax and e[2] <= ymax and e not in entries:
                entries.add(e)
                frontier.append(e)
    return entries


def test_omit_safety_random_systems():
    rng = random.Random(42)
    checked = 0
    while checked < 60:
        iospec = random_system(rng)
        if not is_weakly_guarded(iospec):
            continue
        root = iospec.roots[0]
        try:
            g = build_graph(iospec, root)
        except SolverError:
            continue
        if g.size > 20:
            continue
        checked += 1
        ymax = 25
        entries = no_omit_entries(g, xmax=12, ymax=ymax)
        diagram = Diagram(g)
        for x in range(12):
            ys = [y for (v, xx, y) in entries if xx == x and g.out_minus[v]]
            brute = min(ys) if ys else TOP
            ours = diagram.bound(x)
            if brute == TOP or brute >= ymax:
                assert ours == TOP or ours >= min(brute, ymax)
            else:
                assert ours == brute


def test_solve_random_systems_match_diagram():
    rng = random.Random(43)
    checked = 0
    while checked < 60:
        iospec = random_system(rng)
        if not is_weakly_guarded(iospec):
            continue
        root = iospec.roots[0]
        try:
            got = solve(iospec, root)
        except SolverError:
            continue
        checked += 1
        g = build_graph(iospec, root)
        diagram = Diagram(g)
        for n in range(40):
            assert interpret(got, n) == diagram.bound(n), (iospec.dump(), render(got), n)
