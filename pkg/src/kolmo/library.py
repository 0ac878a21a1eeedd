"""Stock combinators built from the six constructors.

These are ordinary terms, nothing privileged: addition, multiplication
and power by primitive recursion, truncated subtraction, absolute
difference, and constant functions of any arity.  Tests pin their
behaviour against the budgeted evaluator on small grids; the tower
builder in the complexity module composes them.

Argument order inside the recursion steps is chosen so the budgeted
step cost stays near the minimum the calculus allows (values can only
grow by successor, so any run computing v spends at least v steps).
"""

from __future__ import annotations

from .recfun import Compose, Const, Mu, PrimRec, Proj, Succ, Term

IDENTITY = Proj(1, 1)

# pred(0) = 0, pred(y+1) = y
PRED = PrimRec(Const(0), Proj(1, 2))


def const_fn(k: int, arity: int) -> Term:
    """Constant-k function of the given arity."""
    if arity == 0:
        return Const(k)
    one_arg = PrimRec(Const(k), Proj(2, 2))  # f(0)=k, f(y+1)=f(y)
    if arity == 1:
        return one_arg
    return Compose(one_arg, (Proj(1, arity),))


# add(x, 0) = x, add(x, y+1) = S(add(x, y))
ADD = PrimRec(Proj(1, 1), Compose(Succ(), (Proj(3, 3),)))

# mult(x, 0) = 0, mult(x, y+1) = add(x, mult(x, y))
MULT = PrimRec(const_fn(0, 1), Compose(ADD, (Proj(1, 3), Proj(3, 3))))

# power(x, 0) = 1, power(x, y+1) = mult(power(x, y), x)
POWER = PrimRec(const_fn(1, 1), Compose(MULT, (Proj(3, 3), Proj(1, 3))))

# monus(x, 0) = x, monus(x, y+1) = pred(monus(x, y))    (truncated subtraction)
MONUS = PrimRec(Proj(1, 1), Compose(PRED, (Proj(3, 3),)))

# |x - y| = (x monus y) + (y monus x)
ABSDIFF = Compose(
    ADD,
    (MONUS, Compose(MONUS, (Proj(2, 2), Proj(1, 2)))),
)

SQUARE = Compose(MULT, (Proj(1, 1), Proj(1, 1)))


def mu_root_of_square(target_arity: int = 1) -> Term:
    """Least x >= 1 with x*x equal to the argument: M over |x*x - y|."""
    # body arity 2: argument vector (y, x) with x the probe variable
    body = Compose(ABSDIFF, (Compose(SQUARE, (Proj(2, 2),)), Proj(1, 2)))
    return Mu(body)
