"""Solver for finite, weakly guarded IO-expression systems.

The unique solution for a root variable is recovered from a trace graph: a
node per position of every right-hand side, with silent edges for variable
references and infimum forks and labelled edges for '-'/'+'.  Sweeping a
two-dimensional diagram over the graph column by column (one column per
input consumed, heights counting outputs) gives the solution's value at
every supply as the lowest '-'-capable entry of the column.  A repetition
search over columns finds two strips with the same node constellation whose
low entries reproduce themselves shifted, at which point the value sequence
is quasi-periodic and the rational IO-term can be read off.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .equations import EEmpty, EInf, EStep, EVar, IOSpec
from .ioalg import TOP, CoNat, IOTerm, is_top, normalize


class SolverError(Exception):
    pass


class SolverCapError(Exception):
    pass


@dataclass
class TraceGraph:
    nodes: list  # (var, position) labels, index = node id
    eps: list  # silent successors per node
    out_plus: list
    out_minus: list
    root: int

    @property
    def size(self) -> int:
        return len(self.nodes)


def _positions(expr):
    """Enumerate (position, subexpression) in prefix order."""
    out = [((), expr)]
    if isinstance(expr, EStep):
        out.extend(((1,) + p, e) for p, e in _positions(expr.body))
    elif isinstance(expr, EInf):
        out.extend(((1,) + p, e) for p, e in _positions(expr.left))
        out.extend(((2,) + p, e) for p, e in _positions(expr.right))
    return out


def build_graph(iospec: IOSpec, root) -> TraceGraph:
    if root not in iospec.equations:
        raise SolverError("root %r has no equation" % (root,))
    index: dict = {}
    nodes: list = []

    def node_id(var, pos):
        key = (var, pos)
        if key not in index:
            index[key] = len(nodes)
            nodes.append(key)
        return index[key]

    subexpr: dict = {}
    for var, expr in iospec.equations.items():
        for pos, e in _positions(expr):
            subexpr[node_id(var, pos)] = e

    eps = [[] for _ in nodes]
    out_plus = [[] for _ in nodes]
    out_minus = [[] for _ in nodes]
    for nid, (var, pos) in enumerate(nodes):
        e = subexpr[nid]
        if isinstance(e, EVar):
            if e.var not in iospec.equations:
                raise SolverError("undefined variable %s" % (e.var,))
            eps[nid].append(node_id(e.var, ()))
        elif isinstance(e, EStep):
            target = node_id(var, pos + (1,))
            (out_minus if e.sym == "-" else out_plus)[nid].append(target)
        elif isinstance(e, EInf):
            eps[nid].append(node_id(var, pos + (1,)))
            eps[nid].append(node_id(var, pos + (2,)))
        else:  # the end of the sequence: production freezes, inputs are ignored
            out_minus[nid].append(nid)

    # weak guardedness: the silent relation must terminate
    color = [0] * len(nodes)

    def dfs(v):
        color[v] = 1
        for w in eps[v]:
            if color[w] == 1:
                raise SolverError("silent cycle: system is not weakly guarded")
            if color[w] == 0:
                dfs(w)
        color[v] = 2

    for v in range(len(nodes)):
        if color[v] == 0:
            dfs(v)

    return TraceGraph(nodes, eps, out_plus, out_minus, node_id(root, ()))


# ---------------------------------------------------------------------------
# the diagram


def _vclose(g: TraceGraph, seed: dict) -> dict:
    """Least heights reachable from `seed` by silent (0) and '+' (1) moves."""
    best = dict(seed)
    heap = [(y, v) for v, y in seed.items()]
    heapq.heapify(heap)
    while heap:
        y, v = heapq.heappop(heap)
        if best.get(v, TOP) < y:
            continue
        for w in g.eps[v]:
            if y < best.get(w, TOP):
                best[w] = y
                heapq.heappush(heap, (y, w))
        for w in g.out_plus[v]:
            if y + 1 < best.get(w, TOP):
                best[w] = y + 1
                heapq.heappush(heap, (y + 1, w))
    return best


def _step_right(g: TraceGraph, column: dict) -> dict:
    seed: dict = {}
    for v, y in column.items():
        for w in g.out_minus[v]:
            if y < seed.get(w, TOP):
                seed[w] = y
    return seed


def _bound(g: TraceGraph, column: dict) -> CoNat:
    ys = [y for v, y in column.items() if g.out_minus[v]]
    return min(ys) if ys else TOP


class Diagram:
    """Columns of the omit-reduced diagram, built left to right."""

    def __init__(self, g: TraceGraph):
        self.g = g
        self.columns = [_vclose(g, {g.root: 0})]

    def column(self, x: int) -> dict:
        while len(self.columns) <= x:
            self.columns.append(_vclose(self.g, _step_right(self.g, self.columns[-1])))
        return self.columns[x]

    def bound(self, x: int) -> CoNat:
        return _bound(self.g, self.column(x))


def column_at(g: TraceGraph, x: int) -> dict:
    return dict(Diagram(g).column(x))


def lower_bound_at(g: TraceGraph, x: int) -> CoNat:
    return Diagram(g).bound(x)


# ---------------------------------------------------------------------------
# repetition search and extraction


def _stair(values) -> str:
    word = "+" * int(values[0])
    for prev, cur in zip(values, values[1:]):
        word += "-" + "+" * int(cur - prev)
    return word


def _check_repetition(g: TraceGraph, diagram: Diagram, x1: int, x2: int) -> bool:
    """Only the nodes that kept their relative height may contribute to the
    bound on [x1, x2], and they must rebuild themselves shifted at x2."""
    col1, col2 = diagram.column(x1), diagram.column(x2)
    h1, h2 = min(col1.values()), min(col2.values())
    d = h2 - h1
    core = {v: y for v, y in col1.items() if col2[v] - y == d}
    if not core:
        return False
    restricted = _vclose(g, dict(core))
    for x in range(x1, x2 + 1):
        if _bound(g, restricted) != diagram.bound(x):
            return False
        if x < x2:
            restricted = _vclose(g, _step_right(g, restricted))
    for v, y in core.items():
        if restricted.get(v) != y + d:
            return False
    return True


def dump_diagram(iospec: IOSpec, root, max_columns: int = 10000) -> str:
    """Per-column node/height table plus the repetition that closed the
    search (debug rendering for the CLI)."""
    from .equations import var_str

    g = build_graph(iospec, root)
    witness: list = []
    solve(iospec, root, max_columns=max_columns, trace=witness)
    last = witness[0][1] if witness else 0
    diagram = Diagram(g)
    lines = ["diagram for %s" % var_str(root)]
    for x in range(last + 1):
        col = diagram.column(x)
        beta = diagram.bound(x)
        cells = []
        for v, y in sorted(col.items(), key=lambda kv: (kv[1], kv[0])):
            var, pos = g.nodes[v]
            cells.append("%s@%s=%d" % (var_str(var), "".join(map(str, pos)) or "e", y))
        lines.append("  x=%d beta=%s | %s" % (x, "inf" if is_top(beta) else int(beta), " ".join(cells)))
        if is_top(beta):
            break
    if witness:
        lines.append("  repetition: strips %d and %d" % witness[0])
    else:
        lines.append("  all-output tail: no repetition needed")
    return "\n".join(lines)


def solve(iospec: IOSpec, root, max_columns: int = 10000, trace=None) -> IOTerm:
    """Canonical IO-term denoting the unique solution for `root`."""
    g = build_graph(iospec, root)
    diagram = Diagram(g)
    bounds: list = []
    strips: dict = {}  # frozenset of nodes -> [(x, relative heights)]
    for x in range(max_columns):
        col = diagram.column(x)
        beta = diagram.bound(x)
        if is_top(beta):
            # no consuming node is left: all output from here on
            word = (_stair(bounds) + "-") if x else ""
            return normalize(IOTerm(word, "+"))
        bounds.append(beta)
        if not col:
            raise AssertionError("empty column with a finite bound")
        h = min(col.values())
        rel = {v: y - h for v, y in col.items()}
        key = frozenset(col)
        for x1, rel1 in strips.get(key, ()):
            if all(rel[v] >= rel1[v] for v in rel1):
                if _check_repetition(g, diagram, x1, x):
                    if trace is not None:
                        trace.append((x1, x))
                    if bounds[x] == bounds[x1]:
                        # the bound stopped growing: a finite word suffices
                        return normalize(IOTerm(_stair(bounds[: x1 + 1]), ""))
                    loop = "".join(
                        "-" + "+" * int(bounds[k] - bounds[k - 1])
                        for k in range(x1 + 1, x + 1)
                    )
                    return normalize(IOTerm(_stair(bounds[: x1 + 1]), loop))
        strips.setdefault(key, []).append((x, rel))
    raise SolverCapError("repetition search cap exceeded (%d columns)" % max_columns)
