"""Recursion equations over IO-expressions for a stream specification.

Every stream symbol f gets one variable per argument place and supply level
q (how many elements are already queued in front of that argument) plus a
star variable for its production with unlimited supplies.  The family is
conceptually infinite in q; `finitize` materializes the part reachable from
the requested roots and removes non-consuming pseudo-cycles: whenever some
X_{f,i,q} reaches X_{f,i,q'} with q < q' along a path that only ever emits
'+', the lower variable is replaced by the all-output variable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .streamspec import Classification, StreamSpec

# ---------------------------------------------------------------------------
# variables and expressions

XM = ("m",)  # the empty sequence
XP = ("p",)  # all output
XID = ("id",)  # one in, one out, forever


def star(symbol: str):
    return ("star", symbol)


def arg(symbol: str, i: int, q: int):
    return ("arg", symbol, i, q)


def var_str(v) -> str:
    if v == XM:
        return "X_-"
    if v == XP:
        return "X_+"
    if v == XID:
        return "X_id"
    if v[0] == "star":
        return "X_{%s,*}" % v[1]
    return "X_{%s,%d,%d}" % (v[1], v[2], v[3])


@dataclass(frozen=True)
class EEmpty:
    pass


@dataclass(frozen=True)
class EVar:
    var: tuple


@dataclass(frozen=True)
class EStep:
    sym: str  # '-' or '+'
    body: "IOExpr"


@dataclass(frozen=True)
class EInf:
    left: "IOExpr"
    right: "IOExpr"


IOExpr = EEmpty | EVar | EStep | EInf


def steps(word: str, tail: IOExpr) -> IOExpr:
    for ch in reversed(word):
        tail = EStep(ch, tail)
    return tail


def inf_all(parts: list) -> IOExpr:
    if not parts:
        return EVar(XP)  # the infimum of nothing constrains nothing
    expr = parts[-1]
    for part in reversed(parts[:-1]):
        expr = EInf(part, expr)
    return expr


def expr_str(e: IOExpr) -> str:
    if isinstance(e, EEmpty):
        return "eps"
    if isinstance(e, EVar):
        return var_str(e.var)
    if isinstance(e, EStep):
        return e.sym + expr_str(e.body)
    parts = []
    while isinstance(e, EInf):
        parts.append(e.left)
        e = e.right
    parts.append(e)
    return "/\\ { %s }" % ", ".join(expr_str(p) for p in parts)


def expr_vars(e: IOExpr, consumed: bool = False):
    """Yield (variable, clean) for each occurrence; clean = no '-' above it."""
    if isinstance(e, EVar):
        yield e.var, not consumed
    elif isinstance(e, EStep):
        yield from expr_vars(e.body, consumed or e.sym == "-")
    elif isinstance(e, EInf):
        yield from expr_vars(e.left, consumed)
        yield from expr_vars(e.right, consumed)


class TranslationError(Exception):
    pass


class FinitizeCapError(Exception):
    pass


# ---------------------------------------------------------------------------
# the equation generator


class EquationBuilder:
    """On-demand right-hand sides of the infinite system for one spec."""

    def __init__(self, spec: StreamSpec, cls: Classification):
        self.spec = spec
        self.cls = cls

    def _check_translatable(self, symbol: str):
        klass = self.cls.symbol_class.get(symbol)
        if klass == "unfriendly":
            bad = next(sh for sh in self.cls.shapes[symbol] if sh.nesting)
            raise TranslationError(
                "symbol %r is not translatable: unfriendly nesting rule %r"
                % (symbol, str(bad.rule))
            )

    def rhs(self, v) -> IOExpr:
        if v == XM:
            return EEmpty()
        if v == XP:
            return EStep("+", EVar(XP))
        if v == XID:
            return EStep("-", EStep("+", EVar(XID)))
        if v[0] == "star":
            return self._star_rhs(v[1])
        return self._arg_rhs(v[1], v[2], v[3])

    def _star_rhs(self, f: str) -> IOExpr:
        self._check_translatable(f)
        if not self.cls.guarded[f]:
            return EVar(XM)
        parts = []
        for sh in self.cls.shapes[f]:
            if sh.nesting:
                # a nesting rule keeps producing whatever it is fed
                parts.append(EVar(XID))
            elif sh.tail_var is not None:
                parts.append(EVar(XP))
            else:
                parts.append(steps("+" * sh.produce, EVar(star(sh.callee))))
        return inf_all(parts)

    def _arg_rhs(self, f: str, i: int, q: int) -> IOExpr:
        self._check_translatable(f)
        if not self.cls.guarded[f]:
            return EVar(XM)
        parts = []
        for sh in self.cls.shapes[f]:
            if sh.nesting:
                parts.append(EVar(XID))
                continue
            c = sh.consume[i - 1]
            p = max(c - q, 0)
            q2 = max(q - c, 0)
            word = "-" * p + "+" * sh.produce
            if sh.tail_var is not None:
                if sh.tail_var == i:
                    body = steps("+" * q2, EVar(XID))
                else:
                    body = EVar(XP)
            else:
                members = [
                    EVar(arg(sh.callee, j + 1, q2 + sh.feedback[j]))
                    for j in range(len(sh.perm))
                    if sh.perm[j] == i
                ]
                body = inf_all(members)
            parts.append(steps(word, body))
        return inf_all(parts)


def build_equations(spec: StreamSpec, cls: Classification) -> EquationBuilder:
    return EquationBuilder(spec, cls)


# ---------------------------------------------------------------------------
# finite systems


@dataclass
class IOSpec:
    equations: dict  # var -> IOExpr
    roots: tuple

    def dump(self) -> str:
        lines = []
        for v, e in self.equations.items():
            lines.append("%s = %s" % (var_str(v), expr_str(e)))
        return "\n".join(lines)

    def dump_mu(self, root) -> str:
        """Single-expression rendering with mu binding each variable at its
        first occurrence, e.g. ``mu X_{f,1,0}. /\\ { --+X_{f,1,1}, ... }``."""
        visited: set = set()

        def var(v):
            if v == XM:
                return "eps"
            if v == XP:
                return "mu x. +x"
            if v == XID:
                return "mu x. -+x"
            if v in visited:
                return var_str(v)
            visited.add(v)
            return "mu %s. %s" % (var_str(v), expr(self.equations[v]))

        def expr(e):
            if isinstance(e, EEmpty):
                return "eps"
            if isinstance(e, EVar):
                return var(e.var)
            if isinstance(e, EStep):
                return e.sym + expr(e.body)
            parts = []
            while isinstance(e, EInf):
                parts.append(e.left)
                e = e.right
            parts.append(e)
            return "/\\ { %s }" % ", ".join(expr(p) for p in parts)

        return var(root)


def _var_order_key(v):
    if v[0] == "arg":
        return (v[3], 1, v[1], v[2])
    if v[0] == "star":
        return (0, 0, v[1], 0)
    return (0, -1, v[0], 0)


def finitize(builder: EquationBuilder, roots, cap: int = 100000) -> IOSpec:
    """Materialize the system reachable from `roots`, applying pseudo-cycle
    removal eagerly, lowest supply level first."""
    roots = tuple(roots)
    eqs: dict = {}

    def reachable_undefined():
        seen = set()
        todo = list(roots)
        missing = []
        while todo:
            v = todo.pop()
            if v in seen:
                continue
            seen.add(v)
            if v not in eqs:
                missing.append(v)
                continue
            for w, _ in expr_vars(eqs[v]):
                todo.append(w)
        return missing, seen

    def rpc_sweep():
        """Replace every X_{f,i,q} that reaches X_{f,i,q'} (q < q') through
        a '-'-free path by the all-output variable; repeat to fixpoint."""
        while True:
            clean_edges: dict = {}
            for v, e in eqs.items():
                outs = set()
                for w, clean in expr_vars(e):
                    if clean:
                        outs.add(w)
                clean_edges[v] = outs
            hit = None
            for v in sorted(eqs, key=_var_order_key):
                if v[0] != "arg" or eqs[v] == EVar(XP):
                    continue
                stack = [v]
                seen = set()
                while stack:
                    w = stack.pop()
                    if w in seen:
                        continue
                    seen.add(w)
                    if (
                        w != v
                        and w[0] == "arg"
                        and w[1] == v[1]
                        and w[2] == v[2]
                        and w[3] > v[3]
                    ):
                        hit = v
                        break
                    stack.extend(clean_edges.get(w, ()))
                if hit:
                    break
            if hit is None:
                return
            eqs[hit] = EVar(XP)

    while True:
        missing, _ = reachable_undefined()
        if not missing:
            break
        v = min(missing, key=_var_order_key)
        eqs[v] = builder.rhs(v)
        if len(eqs) > cap:
            raise FinitizeCapError("finitization cap exceeded (%d equations)" % cap)
        rpc_sweep()

    _, seen = reachable_undefined()
    kept = {v: e for v, e in eqs.items() if v in seen}
    ordered = dict(sorted(kept.items(), key=lambda kv: _var_order_key(kv[0])))
    return IOSpec(ordered, roots)


def is_weakly_guarded(iospec: IOSpec) -> bool:
    """Every equation unfolds to a guarded form: the at-surface dependency
    relation (variable occurrences with no '-'/'+' above them) is acyclic."""
    surface: dict = {}

    def collect(e, out):
        if isinstance(e, EVar):
            out.add(e.var)
        elif isinstance(e, EInf):
            collect(e.left, out)
            collect(e.right, out)

    for v, e in iospec.equations.items():
        out: set = set()
        collect(e, out)
        surface[v] = out

    color: dict = {}

    def dfs(v):
        color[v] = 1
        for w in surface.get(v, ()):
            if color.get(w) == 1:
                return False
            if color.get(w) is None and not dfs(w):
                return False
        color[v] = 2
        return True

    return all(dfs(v) for v in surface if v not in color)
