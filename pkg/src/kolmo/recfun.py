"""A small calculus of partial recursive functions over the naturals.

Terms are finite trees built from six constructors: constants, the
successor, projections, composition, primitive recursion, and unbounded
root search (the mu operator).  Every term denotes a partial function
from tuples of naturals to a single natural.  Two evaluators are
provided: a budgeted evaluator whose step accounting is part of the
contract (used everywhere complexity is measured), and a plain
structural-recursion reference interpreter used as an oracle in tests.

Step accounting for the budgeted evaluator: one step per node
application (primitive recursion charges one per unfolding), one extra
step per successor increment, and one step per mu probe.  The budget is
a hard ceiling; exceeding it aborts evaluation deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ParseError(ValueError):
    """Syntax error in term source, with 1-based line and column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


class ArityError(ValueError):
    """Structural arity violation, naming the offending node."""


@dataclass(frozen=True)
class Term:
    """Base class for term nodes.  arity is filled in by subclasses."""

    def size(self) -> int:
        """Number of nodes in the tree."""
        return 1 + sum(c.size() for c in self.children())

    def children(self) -> tuple["Term", ...]:
        return ()


@dataclass(frozen=True)
class Const(Term):
    k: int
    arity: int = field(init=False, default=0)

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 0:
            raise ArityError(f"Const requires a natural constant, got {self.k!r}")

    def __str__(self):
        return f"Z({self.k})"


@dataclass(frozen=True)
class Succ(Term):
    arity: int = field(init=False, default=1)

    def __str__(self):
        return "S"


@dataclass(frozen=True)
class Proj(Term):
    i: int
    a: int
    arity: int = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.i, int) and isinstance(self.a, int)):
            raise ArityError(f"Proj fields must be integers, got P({self.i!r},{self.a!r})")
        if self.a < 1 or not (1 <= self.i <= self.a):
            raise ArityError(f"projection index out of range in P({self.i},{self.a})")
        object.__setattr__(self, "arity", self.a)

    def __str__(self):
        return f"P({self.i},{self.a})"


@dataclass(frozen=True)
class Compose(Term):
    outer: Term
    inners: tuple[Term, ...]
    arity: int = field(init=False)

    def __post_init__(self):
        inners = tuple(self.inners)
        object.__setattr__(self, "inners", inners)
        if not inners:
            raise ArityError("composition requires at least one inner term")
        a = inners[0].arity
        for g in inners:
            if g.arity != a:
                raise ArityError(
                    f"inner terms of composition disagree on arity: {g} has arity "
                    f"{g.arity}, expected {a}"
                )
        if self.outer.arity != len(inners):
            raise ArityError(
                f"outer term {self.outer} has arity {self.outer.arity} but composition "
                f"supplies {len(inners)} inner terms"
            )
        object.__setattr__(self, "arity", a)

    def children(self):
        return (self.outer,) + self.inners

    def __str__(self):
        return f"C[{self.outer}; {', '.join(str(g) for g in self.inners)}]"


@dataclass(frozen=True)
class PrimRec(Term):
    base: Term
    step: Term
    arity: int = field(init=False)

    def __post_init__(self):
        if self.step.arity != self.base.arity + 2:
            raise ArityError(
                f"recursion step {self.step} has arity {self.step.arity}, "
                f"expected {self.base.arity + 2} for base of arity {self.base.arity}"
            )
        object.__setattr__(self, "arity", self.base.arity + 1)

    def children(self):
        return (self.base, self.step)

    def __str__(self):
        return f"R[{self.base}; {self.step}]"


@dataclass(frozen=True)
class Mu(Term):
    body: Term
    arity: int = field(init=False)

    def __post_init__(self):
        if self.body.arity < 1:
            raise ArityError(f"mu body {self.body} must have arity at least 1")
        object.__setattr__(self, "arity", self.body.arity - 1)

    def children(self):
        return (self.body,)

    def __str__(self):
        return f"M[{self.body}]"


# --------------------------------------------------------------------------
# Evaluation outcomes


@dataclass(frozen=True)
class EvalOutcome:
    """Result of a budgeted evaluation.

    kind is one of "value", "budget", "undefined".  values holds the
    output vector (length one for every term in this calculus), steps
    the number of accounting steps consumed, reason a human-readable
    note for undefined outcomes.
    """

    kind: str
    values: tuple[int, ...] = ()
    steps: int = 0
    reason: str = ""

    @property
    def is_value(self) -> bool:
        return self.kind == "value"

    @property
    def value(self) -> int:
        if self.kind != "value":
            raise ValueError(f"no value on outcome of kind {self.kind!r}")
        return self.values[0]

    @staticmethod
    def of_value(v: int, steps: int) -> "EvalOutcome":
        return EvalOutcome("value", (v,), steps)

    @staticmethod
    def budget_exhausted(steps: int) -> "EvalOutcome":
        return EvalOutcome("budget", (), steps)

    @staticmethod
    def undefined(reason: str, steps: int = 0) -> "EvalOutcome":
        return EvalOutcome("undefined", (), steps, reason)


class _Exhausted(Exception):
    pass


def eval_term(term: Term, args, budget: int) -> EvalOutcome:
    """Evaluate term on a tuple of naturals under a hard step budget.

    Args:
        term: the term to apply.
        args: sequence of naturals, length equal to term.arity.
        budget: maximum number of accounting steps (> 0).

    Returns:
        EvalOutcome: value on success, budget-exhausted when the step
        ceiling is hit.  The reported step count of an exhausted
        outcome is never below the budget.
    """
    args = tuple(args)
    if len(args) != term.arity:
        raise ValueError(
            f"term {term} has arity {term.arity}, got {len(args)} arguments"
        )
    if any((not isinstance(v, int)) or v < 0 for v in args):
        raise ValueError(f"arguments must be naturals, got {args!r}")
    if budget < 1:
        raise ValueError("budget must be a positive number of steps")

    cell = [0]

    def compile_node(t: Term):
        # Each compiled closure charges its own accounting steps against
        # the shared cell; exceeding the budget aborts via _Exhausted.
        if isinstance(t, Const):
            k = t.k

            def f_const(xs):
                s = cell[0] + 1
                if s > budget:
                    cell[0] = s
                    raise _Exhausted
                cell[0] = s
                return k

            return f_const
        if isinstance(t, Succ):
            # one step for the node, one for the increment
            def f_succ(xs):
                s = cell[0] + 2
                if s > budget:
                    cell[0] = s
                    raise _Exhausted
                cell[0] = s
                return xs[0] + 1

            return f_succ
        if isinstance(t, Proj):
            idx = t.i - 1

            def f_proj(xs):
                s = cell[0] + 1
                if s > budget:
                    cell[0] = s
                    raise _Exhausted
                cell[0] = s
                return xs[idx]

            return f_proj
        if isinstance(t, Compose):
            fo = compile_node(t.outer)
            fgs = tuple(compile_node(g) for g in t.inners)

            def f_comp(xs):
                s = cell[0] + 1
                if s > budget:
                    cell[0] = s
                    raise _Exhausted
                cell[0] = s
                return fo(tuple(g(xs) for g in fgs))

            return f_comp
        if isinstance(t, PrimRec):
            fb = compile_node(t.base)
            fs = compile_node(t.step)

            def f_rec(xs):
                s = cell[0] + 1
                if s > budget:
                    cell[0] = s
                    raise _Exhausted
                cell[0] = s
                head = xs[:-1]
                r = fb(head)
                for t_ in range(xs[-1]):
                    # one step per unfolding of the recursion equation
                    s = cell[0] + 1
                    if s > budget:
                        cell[0] = s
                        raise _Exhausted
                    cell[0] = s
                    r = fs(head + (t_, r))
                return r

            return f_rec
        if isinstance(t, Mu):
            fb = compile_node(t.body)

            def f_mu(xs):
                s = cell[0] + 1
                if s > budget:
                    cell[0] = s
                    raise _Exhausted
                cell[0] = s
                x = 1
                while True:
                    # one step per probe of the candidate root
                    s = cell[0] + 1
                    if s > budget:
                        cell[0] = s
                        raise _Exhausted
                    cell[0] = s
                    if fb(xs + (x,)) == 0:
                        return x
                    x += 1

            return f_mu
        raise TypeError(f"unknown term node {t!r}")

    try:
        v = compile_node(term)(args)
    except _Exhausted:
        return EvalOutcome.budget_exhausted(cell[0])
    return EvalOutcome.of_value(v, cell[0])


class ReferenceLimit(RuntimeError):
    """Raised when the reference interpreter trips its safety cap."""


def eval_reference(term: Term, args, max_ops: int | None = None) -> int:
    """Direct structural-recursion interpreter, no step accounting.

    Used as an oracle against eval_term.  Mu-free terms always
    terminate; max_ops is an optional safety valve for test harnesses
    (it is not part of the semantics and trips ReferenceLimit).
    """
    args = tuple(args)
    if len(args) != term.arity:
        raise ValueError(
            f"term {term} has arity {term.arity}, got {len(args)} arguments"
        )
    ops = [0]

    def guard():
        if max_ops is not None:
            ops[0] += 1
            if ops[0] > max_ops:
                raise ReferenceLimit(f"reference interpreter exceeded {max_ops} operations")

    def go(t: Term, xs):
        guard()
        if isinstance(t, Const):
            return t.k
        if isinstance(t, Succ):
            return xs[0] + 1
        if isinstance(t, Proj):
            return xs[t.i - 1]
        if isinstance(t, Compose):
            return go(t.outer, tuple(go(g, xs) for g in t.inners))
        if isinstance(t, PrimRec):
            head = xs[:-1]
            r = go(t.base, head)
            for i in range(xs[-1]):
                r = go(t.step, head + (i, r))
            return r
        if isinstance(t, Mu):
            x = 1
            while True:
                guard()
                if go(t.body, xs + (x,)) == 0:
                    return x
                x += 1
        raise TypeError(f"unknown term node {t!r}")

    return go(term, args)


# --------------------------------------------------------------------------
# Surface syntax
#
#   Z(k)  S  P(i,a)  C[outer; t1, ..., tn]  R[base; step]  M[body]
#
# Whitespace (including newlines) separates nothing and is ignored.


def parse_term(src: str) -> Term:
    """Parse surface syntax into a Term.

    Raises ParseError with line/column on malformed input and
    ArityError if the tree violates an arity rule.
    """
    pos = [0]
    n = len(src)

    def line_col(p: int) -> tuple[int, int]:
        line = src.count("\n", 0, p) + 1
        last_nl = src.rfind("\n", 0, p)
        col = p - last_nl
        return line, col

    def err(msg: str, p: int | None = None):
        line, col = line_col(pos[0] if p is None else p)
        raise ParseError(msg, line, col)

    def skip_ws():
        while pos[0] < n and src[pos[0]].isspace():
            pos[0] += 1

    def expect(ch: str):
        skip_ws()
        if pos[0] >= n or src[pos[0]] != ch:
            got = src[pos[0]] if pos[0] < n else "end of input"
            err(f"expected {ch!r}, found {got!r}")
        pos[0] += 1

    def parse_nat() -> int:
        skip_ws()
        start = pos[0]
        while pos[0] < n and src[pos[0]].isdigit():
            pos[0] += 1
        if pos[0] == start:
            got = src[start] if start < n else "end of input"
            err(f"expected a decimal natural, found {got!r}", start)
        return int(src[start:pos[0]])

    def parse_node() -> Term:
        skip_ws()
        if pos[0] >= n:
            err("expected a term, found end of input")
        ch = src[pos[0]]
        start = pos[0]
        pos[0] += 1
        if ch == "Z":
            expect("(")
            k = parse_nat()
            expect(")")
            return Const(k)
        if ch == "S":
            return Succ()
        if ch == "P":
            expect("(")
            i = parse_nat()
            expect(",")
            a = parse_nat()
            expect(")")
            return Proj(i, a)
        if ch == "C":
            expect("[")
            outer = parse_node()
            expect(";")
            inners = [parse_node()]
            skip_ws()
            while pos[0] < n and src[pos[0]] == ",":
                pos[0] += 1
                inners.append(parse_node())
                skip_ws()
            expect("]")
            return Compose(outer, tuple(inners))
        if ch == "R":
            expect("[")
            base = parse_node()
            expect(";")
            step = parse_node()
            expect("]")
            return PrimRec(base, step)
        if ch == "M":
            expect("[")
            body = parse_node()
            expect("]")
            return Mu(body)
        err(f"expected one of Z S P C R M, found {ch!r}", start)

    t = parse_node()
    skip_ws()
    if pos[0] != n:
        err(f"trailing input starting with {src[pos[0]]!r}")
    return t


def to_source(term: Term) -> str:
    """Render a term in the surface syntax (inverse of parse_term)."""
    return str(term)
