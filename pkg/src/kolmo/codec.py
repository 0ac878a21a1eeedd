"""Self-delimiting binary code for terms, and the induced numbering.

Layout (normative, pinned by golden tests):

    node tag, 3 bits:  Z=000  S=001  P=010  C=011  R=100  M=101
                       (110 and 111 are invalid)
    Z(k)          000 gamma(k+1)
    S             001
    P(i,a)        010 gamma(i) gamma(a)
    C[f; g1..gn]  011 gamma(n) code(f) code(g1) ... code(gn)
    R[base;step]  100 code(base) code(step)
    M[body]       101 code(body)

Naturals use Elias gamma codes; fields that may be zero (the constant
k) are encoded as value+1.  The composition fan-in precedes the
children so decoding is single-pass.  A bit string is a valid program
when it decodes to a complete term of arity 0 with no bits left over;
because decoding is a complete parse, no valid program is a proper
prefix of another.

The numbering maps every positive integer m to the bit string obtained
by writing m in binary and dropping the leading 1 (m=1 is the empty
string), a bijection between positive integers and finite bit strings.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

from .recfun import (
    ArityError,
    Compose,
    Const,
    EvalOutcome,
    Mu,
    PrimRec,
    Proj,
    Succ,
    Term,
    eval_term,
)

TAG_BITS = {"Z": "000", "S": "001", "P": "010", "C": "011", "R": "100", "M": "101"}


class InvalidEncoding(ValueError):
    pass


@dataclass(frozen=True)
class Program:
    """A finite bit string, stored as a str of '0' and '1'."""

    bits: str

    def __post_init__(self):
        if self.bits.strip("01"):
            raise ValueError("program bits must contain only '0' and '1'")

    @property
    def bit_len(self) -> int:
        return len(self.bits)

    def to_json(self) -> dict:
        # bits packed MSB-first, final partial byte padded with zeros
        padded = self.bits + "0" * (-len(self.bits) % 8)
        data = bytes(int(padded[j : j + 8], 2) for j in range(0, len(padded), 8))
        return {"bits_hex": data.hex(), "bit_len": len(self.bits)}

    @staticmethod
    def from_json(obj: dict) -> "Program":
        data = bytes.fromhex(obj["bits_hex"])
        n = int(obj["bit_len"])
        if n < 0 or n > 8 * len(data) or 8 * len(data) - n >= 8:
            raise ValueError("bit_len inconsistent with bits_hex")
        bits = "".join(f"{b:08b}" for b in data)[:n]
        if any(c != "0" for c in "".join(f"{b:08b}" for b in data)[n:]):
            raise ValueError("padding bits must be zero")
        return Program(bits)


def gamma_len(v: int) -> int:
    """Length in bits of the Elias gamma code of v >= 1."""
    return 2 * (v.bit_length() - 1) + 1


def encode_gamma(v: int) -> str:
    if v < 1:
        raise ValueError("gamma codes cover integers >= 1")
    body = bin(v)[2:]
    return "0" * (len(body) - 1) + body


class _Reader:
    __slots__ = ("bits", "pos")

    def __init__(self, bits: str):
        self.bits = bits
        self.pos = 0

    def take(self, k: int) -> str:
        if self.pos + k > len(self.bits):
            raise InvalidEncoding("truncated stream")
        out = self.bits[self.pos : self.pos + k]
        self.pos += k
        return out

    def gamma(self) -> int:
        bits, pos, n = self.bits, self.pos, len(self.bits)
        zeros = 0
        while pos + zeros < n and bits[pos + zeros] == "0":
            zeros += 1
        end = pos + 2 * zeros + 1
        if end > n:
            raise InvalidEncoding("truncated gamma code")
        self.pos = end
        return int(bits[pos + zeros : end], 2)


def encode_term(term: Term) -> Program:
    """Encode any well-formed term (any arity) as a bit string."""
    out: list[str] = []

    def go(t: Term):
        if isinstance(t, Const):
            out.append(TAG_BITS["Z"])
            out.append(encode_gamma(t.k + 1))
        elif isinstance(t, Succ):
            out.append(TAG_BITS["S"])
        elif isinstance(t, Proj):
            out.append(TAG_BITS["P"])
            out.append(encode_gamma(t.i))
            out.append(encode_gamma(t.a))
        elif isinstance(t, Compose):
            out.append(TAG_BITS["C"])
            out.append(encode_gamma(len(t.inners)))
            go(t.outer)
            for g in t.inners:
                go(g)
        elif isinstance(t, PrimRec):
            out.append(TAG_BITS["R"])
            go(t.base)
            go(t.step)
        elif isinstance(t, Mu):
            out.append(TAG_BITS["M"])
            go(t.body)
        else:
            raise TypeError(f"unknown term node {t!r}")

    go(term)
    return Program("".join(out))


def decode_term(bits: str) -> tuple[Term, int]:
    """Decode one term from the front of a bit string.

    Returns (term, bits consumed).  Raises InvalidEncoding on a
    malformed stream, including arity-rule violations.
    """
    r = _Reader(bits)

    def go() -> Term:
        tag = r.take(3)
        try:
            if tag == "000":
                v = r.gamma()
                return Const(v - 1)
            if tag == "001":
                return Succ()
            if tag == "010":
                i = r.gamma()
                a = r.gamma()
                return Proj(i, a)
            if tag == "011":
                n = r.gamma()
                outer = go()
                inners = tuple(go() for _ in range(n))
                return Compose(outer, inners)
            if tag == "100":
                base = go()
                step = go()
                return PrimRec(base, step)
            if tag == "101":
                body = go()
                return Mu(body)
        except ArityError as e:
            raise InvalidEncoding(str(e)) from None
        raise InvalidEncoding(f"invalid node tag {tag}")

    term = go()
    return term, r.pos


def decode_program(p: Program) -> Term | None:
    """Decode a complete arity-0 program; None if the string is invalid.

    Rejects trailing bits, nonzero arity, and every structural defect.
    """
    try:
        term, used = decode_term(p.bits)
    except InvalidEncoding:
        return None
    if used != len(p.bits) or term.arity != 0:
        return None
    return term


# --------------------------------------------------------------------------
# Numbering


def index_to_bits(m: int) -> str:
    """Bit string of index m >= 1: binary expansion with the leading 1 removed."""
    if m < 1:
        raise ValueError("indices start at 1")
    return bin(m)[3:]


def bits_to_index(bits: str) -> int:
    return int("1" + bits, 2)


def run_index(m: int, budget: int) -> EvalOutcome:
    """Decode index m and evaluate the program under the step budget.

    Invalid programs yield an undefined outcome (expected and counted
    by callers, never raised).
    """
    term = decode_program(Program(index_to_bits(m)))
    if term is None:
        return EvalOutcome.undefined("invalid program")
    return eval_term(term, (), budget)


def layout_hash() -> str:
    """Short hash pinning the codec layout; printed by the CLI version string."""
    desc = (
        "tags Z=000 S=001 P=010 C=011 R=100 M=101;"
        "gamma naturals;Z k+1;P i a;C n outer inners;R base step;M body;"
        "index=binary sans leading 1"
    )
    return hashlib.sha256(desc.encode()).hexdigest()[:12]


# --------------------------------------------------------------------------
# Structural enumeration of the program space.
#
# Iterating every bit string of length <= L is wasteful: almost all of
# them fail to decode.  Instead the generators below walk exactly the
# well-formed terms whose encoding fits the bit budget, in a fixed
# deterministic order.  Completeness against the brute-force scan is
# pinned by tests at small L.


@lru_cache(maxsize=None)
def min_len(arity: int) -> int:
    """Minimal encoded length of any term with the given arity."""
    if arity == 0:
        return 4  # Z(0)
    if arity == 1:
        return 3  # S
    return 4 + gamma_len(arity)  # P(1, arity)


def enumerate_terms(arity: int, max_bits: int) -> Iterator[tuple[Term, int]]:
    """Yield every (term, encoded length) with this arity and length <= max_bits.

    Deterministic order: constants, successor, projections, then
    composition by rising fan-in, then primitive recursion, then mu;
    subterm slots iterate in enumeration order, leftmost slot slowest.
    """
    b = max_bits
    if b < min_len(arity):
        return
    if arity == 0:
        # Z(k) with gamma(k+1) fitting in b-3 bits
        v = 1
        while gamma_len(v) <= b - 3:
            yield Const(v - 1), 3 + gamma_len(v)
            v += 1
    if arity == 1 and b >= 3:
        yield Succ(), 3
    if arity >= 1:
        ga = gamma_len(arity)
        for i in range(1, arity + 1):
            length = 3 + gamma_len(i) + ga
            if length <= b:
                yield Proj(i, arity), length
    # composition: fan-in n, outer of arity n, n inners of this arity
    n = 1
    while 3 + gamma_len(n) + min_len(n) + n * min_len(arity) <= b:
        head = 3 + gamma_len(n)
        for outer, lo in enumerate_terms(n, b - head - n * min_len(arity)):
            for inners, li in _enumerate_seq(n, arity, b - head - lo):
                yield Compose(outer, inners), head + lo + li
        n += 1
    if arity >= 1:
        # primitive recursion: base of arity-1, step of arity+1
        for base, lb in enumerate_terms(arity - 1, b - 3 - min_len(arity + 1)):
            for step, ls in enumerate_terms(arity + 1, b - 3 - lb):
                yield PrimRec(base, step), 3 + lb + ls
    for body, lb in enumerate_terms(arity + 1, b - 3):
        yield Mu(body), 3 + lb


def _enumerate_seq(count: int, arity: int, max_bits: int) -> Iterator[tuple[tuple[Term, ...], int]]:
    if count == 0:
        yield (), 0
        return
    rest_min = (count - 1) * min_len(arity)
    for t, l in enumerate_terms(arity, max_bits - rest_min):
        for rest, lr in _enumerate_seq(count - 1, arity, max_bits - l):
            yield (t,) + rest, l + lr


def enumerate_programs(max_bits: int) -> Iterator[tuple[str, Term]]:
    """Yield (bits, term) for every valid program of length <= max_bits."""
    for term, _length in enumerate_terms(0, max_bits):
        yield encode_term(term).bits, term


def count_programs(max_bits: int) -> int:
    """Number of valid programs of length <= max_bits (no materialization)."""
    return sum(1 for _ in enumerate_terms(0, max_bits))
