"""Production terms and the collapse rewrite system.

A production term is built from numeric sources, recursion variables,
pebbles (unary +1 buffers), boxes (IO-sequence transducers), mu-recursion
and binary meets.  Every closed term collapses, by a terminating and
confluent rewrite system, to a unique numeral src(k); that k is the term's
production.  A small denotational evaluator is kept alongside as a test
oracle, and gates package the per-argument transducers of a translated
stream function.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ioalg import (
    TOP,
    CoNat,
    IOTerm,
    conat_str,
    compose,
    interpret,
    is_top,
    least_fixed_point,
    render,
)


@dataclass(frozen=True)
class Src:
    value: CoNat


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Peb:
    body: "ProdTerm"


@dataclass(frozen=True)
class Box:
    seq: IOTerm
    body: "ProdTerm"


@dataclass(frozen=True)
class Mu:
    name: str
    body: "ProdTerm"


@dataclass(frozen=True)
class Meet:
    left: "ProdTerm"
    right: "ProdTerm"


ProdTerm = Src | Var | Peb | Box | Mu | Meet

#: The successor transducer a pebble abbreviates.
PEB_SEQ = IOTerm("+", "-+")


def meet_all(parts: list) -> ProdTerm:
    """Right-nested meet of a non-empty list."""
    if not parts:
        raise ValueError("meet of nothing")
    term = parts[-1]
    for part in reversed(parts[:-1]):
        term = Meet(part, term)
    return term


def free_vars(t: ProdTerm) -> frozenset:
    if isinstance(t, Var):
        return frozenset((t.name,))
    if isinstance(t, (Src,)):
        return frozenset()
    if isinstance(t, Peb):
        return free_vars(t.body)
    if isinstance(t, Box):
        return free_vars(t.body)
    if isinstance(t, Mu):
        return free_vars(t.body) - {t.name}
    return free_vars(t.left) | free_vars(t.right)


def pretty(t: ProdTerm) -> str:
    """mu P. peb(box<-(-+)>(P)) style rendering."""
    if isinstance(t, Src):
        return "src(%s)" % conat_str(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Peb):
        return "peb(%s)" % pretty(t.body)
    if isinstance(t, Box):
        return "box<%s>(%s)" % (render(t.seq), pretty(t.body))
    if isinstance(t, Mu):
        return "mu %s. %s" % (t.name, pretty(t.body))
    return "meet(%s, %s)" % (pretty(t.left), pretty(t.right))


# ---------------------------------------------------------------------------
# collapse


def _rule_at(t: ProdTerm):
    if isinstance(t, Peb):
        return "peb"
    if isinstance(t, Box):
        b = t.body
        if isinstance(b, Box):
            return "box-box"
        if isinstance(b, Meet):
            return "box-meet"
        if isinstance(b, Src):
            return "box-src"
        return None
    if isinstance(t, Mu):
        b = t.body
        if isinstance(b, Var) and b.name == t.name:
            return "mu-var"
        if isinstance(b, Box) and isinstance(b.body, Var) and b.body.name == t.name:
            return "mu-box"
        if isinstance(b, Meet):
            return "mu-meet"
        if t.name not in free_vars(b):
            return "mu-drop"
        return None
    if isinstance(t, Meet) and isinstance(t.left, Src) and isinstance(t.right, Src):
        return "meet-src"
    return None


def _contract(t: ProdTerm, rule: str) -> ProdTerm:
    if rule == "peb":
        return Box(PEB_SEQ, t.body)
    if rule == "box-box":
        return Box(compose(t.seq, t.body.seq), t.body.body)
    if rule == "box-meet":
        return Meet(Box(t.seq, t.body.left), Box(t.seq, t.body.right))
    if rule == "box-src":
        return Src(interpret(t.seq, t.body.value))
    if rule == "mu-var":
        return Src(0)
    if rule == "mu-box":
        return Src(least_fixed_point(t.body.seq))
    if rule == "mu-meet":
        return Meet(Mu(t.name, t.body.left), Mu(t.name, t.body.right))
    if rule == "mu-drop":
        return t.body
    if rule == "meet-src":
        return Src(min(t.left.value, t.right.value))
    raise AssertionError(rule)


def _children(t: ProdTerm):
    if isinstance(t, (Peb, Box)):
        return (t.body,)
    if isinstance(t, Mu):
        return (t.body,)
    if isinstance(t, Meet):
        return (t.left, t.right)
    return ()


def _replace_child(t: ProdTerm, i: int, sub: ProdTerm) -> ProdTerm:
    if isinstance(t, Peb):
        return Peb(sub)
    if isinstance(t, Box):
        return Box(t.seq, sub)
    if isinstance(t, Mu):
        return Mu(t.name, sub)
    if isinstance(t, Meet):
        return Meet(sub, t.right) if i == 0 else Meet(t.left, sub)
    raise AssertionError


def find_redexes(t: ProdTerm, path=()):
    """All redex positions, in preorder, as (path, rule) pairs."""
    found = []
    rule = _rule_at(t)
    if rule is not None:
        found.append((path, rule))
    for i, c in enumerate(_children(t)):
        found.extend(find_redexes(c, path + (i,)))
    return found


def _rewrite_at(t: ProdTerm, path, rule: str) -> ProdTerm:
    if not path:
        return _contract(t, rule)
    i = path[0]
    return _replace_child(t, i, _rewrite_at(_children(t)[i], path[1:], rule))


def _first_redex(t: ProdTerm, path=()):
    rule = _rule_at(t)
    if rule is not None:
        return (path, rule)
    for i, c in enumerate(_children(t)):
        hit = _first_redex(c, path + (i,))
        if hit is not None:
            return hit
    return None


def collapse_trace(t: ProdTerm):
    """Leftmost-outermost rewrite steps down to a numeral.

    Returns the list of (rule name, term after the step); empty when the
    term already is a numeral.
    """
    if free_vars(t):
        raise ValueError("open term: %s" % ", ".join(sorted(free_vars(t))))
    steps = []
    while True:
        hit = _first_redex(t)
        if hit is None:
            if not isinstance(t, Src):
                raise AssertionError("stuck non-numeral: %s" % pretty(t))
            return steps
        path, rule = hit
        t = _rewrite_at(t, path, rule)
        steps.append((rule, t))


def collapse(t: ProdTerm) -> CoNat:
    """The unique k with t ->* src(k)."""
    steps = collapse_trace(t)
    final = steps[-1][1] if steps else t
    return final.value


def collapse_random(t: ProdTerm, rng) -> CoNat:
    """Collapse contracting a uniformly random redex each step (test aid)."""
    if free_vars(t):
        raise ValueError("open term")
    while True:
        redexes = find_redexes(t)
        if not redexes:
            return t.value
        path, rule = rng.choice(redexes)
        t = _rewrite_at(t, path, rule)


def weight(t: ProdTerm) -> int:
    """Termination measure; strictly decreases along every collapse step."""
    if isinstance(t, (Src, Var)):
        return 1
    if isinstance(t, Peb):
        return 2 * weight(t.body) + 1
    if isinstance(t, (Box, Mu)):
        return 2 * weight(t.body)
    return weight(t.left) + weight(t.right) + 1


# ---------------------------------------------------------------------------
# denotational reference semantics (test oracle)


def denot_production(t: ProdTerm, env=None, iter_cap: int = 200):
    """Evaluate the production denotationally; mu by Kleene iteration.

    Returns (value, exact).  When a recursion neither stabilizes nor is
    forced to TOP within `iter_cap` rounds the result is a lower bound with
    exact=False; the oracle never asserts TOP on its own.
    """
    env = {} if env is None else dict(env)

    def ev(t, env):
        if isinstance(t, Src):
            return t.value, True
        if isinstance(t, Var):
            return env.get(t.name, 0), True
        if isinstance(t, Peb):
            v, ex = ev(t.body, env)
            return v + 1, ex
        if isinstance(t, Box):
            v, ex = ev(t.body, env)
            out = interpret(t.seq, v)
            # a lower bound that already saturates the box is exact
            return out, ex or out == interpret(t.seq, TOP)
        if isinstance(t, Meet):
            v1, ex1 = ev(t.left, env)
            v2, ex2 = ev(t.right, env)
            if v1 < v2:
                return v1, ex1
            if v2 < v1:
                return v2, ex2
            return v1, ex1 or ex2
        n: CoNat = 0
        for _ in range(iter_cap):
            v, ex = ev(t.body, {**env, t.name: n})
            if is_top(v):
                return TOP, ex
            if v == n:
                return n, ex
            assert v > n, "production semantics must be monotone"
            n = v
        return n, False

    return ev(t, env)


# ---------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class Gate:
    """Production cap plus one transducer per stream argument.

    `star` is the IO-sequence the cap was read off (production with all
    supplies infinite); `cap` is its total output count.  Gates built
    directly from a numeric cap get the matching all-plus or plus-word star.
    """

    cap: CoNat
    args: tuple
    star: IOTerm | None = None

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        return "[%s](%s)" % (conat_str(self.cap), ", ".join(render(a) for a in self.args))


def gate_apply(g: Gate, children) -> ProdTerm:
    """Meet of the cap port with one box per stream argument.

    The cap port is src(k) for plain numeric caps and box(star)(src(0)) when
    the star sequence consumes; an all-plus star contributes nothing and is
    omitted (unless the gate is nullary).
    """
    children = list(children)
    if len(children) != g.arity:
        raise ValueError(
            "gate arity mismatch: expected %d children, got %d" % (g.arity, len(children))
        )
    if g.star is None:
        port_value = g.cap
        port_term = Src(g.cap)
    else:
        port_value = interpret(g.star, 0)
        port_term = Src(port_value) if g.star.finite else Box(g.star, Src(0))
    parts = []
    if not is_top(port_value):
        parts.append(port_term)
    parts.extend(Box(seq, child) for seq, child in zip(g.args, children))
    if not parts:  # nullary gate with an all-plus star
        return Src(port_value)
    return meet_all(parts)
