"""Time-bounded program-length complexity over the program numbering.

The exact complexity of an integer x is the least index m such that the
m-th program halts on empty input with value x inside the step budget.
Scanning indices in order is the definition; the fast path here walks
only the well-formed programs (the rest decode to nothing) and is
pinned against the naive full scan by tests.

Also in this module: the budgeted complexity order over integers, a
census with the pigeonhole bound, the power-tower witness for
log-versus-value compression, and an LZ78 parse giving a concrete
upper bound on the description length of raw byte strings.
"""

from __future__ import annotations

import bisect
import functools
from dataclasses import dataclass

from .codec import (
    bits_to_index,
    encode_term,
    enumerate_terms,
    gamma_len,
    run_index,
)
from .recfun import Term, Const, Compose, eval_term
from .library import POWER
from .util import merge_min, run_chunked


def const_program_len(x: int) -> int:
    """Bit length of the literal program Z(x), the positional-notation witness."""
    if x < 0:
        raise ValueError("x must be a natural")
    return 3 + gamma_len(x + 1)


def indexed_programs(m_max: int) -> list[tuple[int, Term]]:
    """All valid programs with index <= m_max, sorted by index."""
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    max_bits = m_max.bit_length() - 1
    out = []
    for term, _blen in enumerate_terms(0, max_bits):
        m = bits_to_index(encode_term(term).bits)
        if m <= m_max:
            out.append((m, term))
    out.sort(key=lambda pair: pair[0])
    return out


def _hits_chunk(budget: int, chunk: list[tuple[int, Term]]) -> dict[int, int]:
    hits: dict[int, int] = {}
    for m, term in chunk:
        out = eval_term(term, (), budget)
        if out.kind == "value" and out.value not in hits:
            hits[out.value] = m
    return hits


def first_hits(
    m_max: int,
    budget: int,
    workers: int = 1,
    chunk_size: int = 2048,
    checkpoint_path: str | None = None,
) -> dict[int, int]:
    """Map each reachable integer to its least witness index.

    Evaluates every valid program with index <= m_max under the step
    budget; the first program (in index order) producing x defines
    k(x).  Work over index ranges is independent and merges by taking
    the minimum witness per integer, so any worker count gives the
    same table; a checkpoint path makes the scan resumable.
    """
    return run_chunked(
        indexed_programs(m_max),
        chunk_size,
        functools.partial(_hits_chunk, budget),
        merge_min,
        workers=workers,
        checkpoint_path=checkpoint_path,
        meta={"kind": "kolmo.order", "m_max": m_max, "budget": budget},
    )


def first_hits_naive(m_max: int, budget: int) -> dict[int, int]:
    """Oracle: scan every index m = 1..m_max through run_index."""
    hits: dict[int, int] = {}
    for m in range(1, m_max + 1):
        out = run_index(m, budget)
        if out.kind == "value":
            x = out.value
            if x not in hits:
                hits[x] = m
    return hits


@dataclass(frozen=True)
class ComplexityRecord:
    """Exact time-bounded complexity of one integer.

    k_value is None when no witness exists below m_max (reported as
    "exceeds m_max"); length_complexity is floor(log2 k_value), the
    bit-length flavour of the same quantity.
    """

    x: int
    k_value: int | None
    witness: int | None
    step_budget: int
    m_max: int

    @property
    def found(self) -> bool:
        return self.k_value is not None

    @property
    def length_complexity(self) -> int | None:
        if self.k_value is None:
            return None
        return self.k_value.bit_length() - 1

    def to_json(self) -> dict:
        return {
            "schema": "kolmo.k/1",
            "x": self.x,
            "k_value": self.k_value if self.found else "exceeds m_max",
            "length_complexity": self.length_complexity,
            "witness": self.witness,
            "step_budget": self.step_budget,
            "m_max": self.m_max,
        }


DEFAULT_BUDGET = 10**4
DEFAULT_M_MAX = 2**22


def k_exp(x: int, budget: int = DEFAULT_BUDGET, m_max: int = DEFAULT_M_MAX) -> ComplexityRecord:
    """Least index whose program outputs x within the budget.

    Scans indices 1..m_max in order and stops at the first hit; returns
    a record flagged "exceeds m_max" when the scan is exhausted.
    """
    if x < 0:
        raise ValueError("x must be a natural")
    for m, term in indexed_programs(m_max):
        out = eval_term(term, (), budget)
        if out.kind == "value" and out.value == x:
            return ComplexityRecord(x, m, m, budget, m_max)
    return ComplexityRecord(x, None, None, budget, m_max)


@dataclass(frozen=True)
class OrderSegment:
    """Integers reachable below the index ceiling, sorted by (k_value, x)."""

    m_max: int
    step_budget: int
    entries: tuple[tuple[int, int], ...]  # (x, k_value), sorted by (k_value, x)

    def xs(self) -> list[int]:
        return [x for x, _ in self.entries]

    def to_json(self) -> dict:
        return {
            "schema": "kolmo.order/1",
            "m_max": self.m_max,
            "step_budget": self.step_budget,
            "entries": [
                {"rank": r, "x": x, "k_value": k, "length_complexity": k.bit_length() - 1}
                for r, (x, k) in enumerate(self.entries)
            ],
        }

    def to_csv(self) -> str:
        lines = ["rank,x,k_value,length_complexity"]
        for r, (x, k) in enumerate(self.entries):
            lines.append(f"{r},{x},{k},{k.bit_length() - 1}")
        return "\n".join(lines) + "\n"


def kolmogorov_order(m_max: int = DEFAULT_M_MAX, budget: int = DEFAULT_BUDGET,
                     hits: dict[int, int] | None = None) -> OrderSegment:
    """Order the reachable integers by exact complexity, ties by value.

    The result is a permutation of its integers: each appears once,
    witnessed by a distinct index.
    """
    if hits is None:
        hits = first_hits(m_max, budget)
    entries = sorted(((x, k) for x, k in hits.items()), key=lambda e: (e[1], e[0]))
    return OrderSegment(m_max, budget, tuple(entries))


@dataclass(frozen=True)
class CensusReport:
    """Counts of integers below 2**n_bits at each complexity threshold."""

    n_bits: int
    step_budget: int
    max_threshold_log2: int
    thresholds: tuple[tuple[int, int], ...]  # (T, count), T = 2**j
    witness_buckets: tuple[dict, ...]        # literal-program lengths per magnitude

    def pigeonhole_ok(self) -> bool:
        return all(count <= t for t, count in self.thresholds)

    def to_json(self) -> dict:
        return {
            "schema": "kolmo.census/1",
            "n_bits": self.n_bits,
            "step_budget": self.step_budget,
            "max_threshold_log2": self.max_threshold_log2,
            "thresholds": [{"T": t, "count": c} for t, c in self.thresholds],
            "pigeonhole_ok": self.pigeonhole_ok(),
            "const_witness_buckets": list(self.witness_buckets),
        }


def census(n_bits: int, budget: int = DEFAULT_BUDGET, max_threshold_log2: int = 20,
           hits: dict[int, int] | None = None) -> CensusReport:
    """Census of complexities below 2**n_bits.

    For each threshold T = 2**j the count of integers with k(x) <= T
    can never exceed T: distinct integers need distinct witnesses.
    Also reports the literal-program (positional notation) bit lengths
    bucketed by magnitude, the always-available logarithmic witness.
    """
    if not (1 <= n_bits <= 24):
        raise ValueError("n_bits must be between 1 and 24 at desk scale")
    if hits is None:
        hits = first_hits(2**max_threshold_log2, budget)
    limit = 2**n_bits
    ks = sorted(k for x, k in hits.items() if x < limit)
    thresholds = []
    for j in range(max_threshold_log2 + 1):
        t = 2**j
        thresholds.append((t, bisect.bisect_right(ks, t)))
    buckets = []
    for j in range(n_bits):
        lo, hi = 2**j, min(2 ** (j + 1), limit)
        lens = [const_program_len(x) for x in (lo, hi - 1)]
        buckets.append(
            {
                "magnitude_log2": j,
                "const_len_min": min(lens),
                "const_len_max": max(lens),
            }
        )
    return CensusReport(n_bits, budget, max_threshold_log2, tuple(thresholds), tuple(buckets))


# --------------------------------------------------------------------------
# Power towers: very large values from very short programs


def tower_program(n: int) -> Term:
    """Arity-0 term for the n-fold power tower n^n^...^n (right associated).

    The tree repeats one fixed power combinator n-1 times, so its size
    and encoded length grow linearly in n while its value grows beyond
    astronomically.
    """
    if n < 1:
        raise ValueError("tower height starts at 1")
    acc: Term = Const(n)
    for _ in range(n - 1):
        acc = Compose(POWER, (Const(n), acc))
    return acc


def tower_value(n: int) -> int:
    """Independent big-integer value of the n-fold tower.

    Guarded at n <= 3: already the 4-fold tower is 4^(4^256), far past
    anything a machine can hold.
    """
    if n < 1:
        raise ValueError("tower height starts at 1")
    if n > 3:
        raise OverflowError(f"refusing to materialize the {n}-fold tower")
    v = n
    for _ in range(n - 1):
        v = n**v
    return v


def tower_eval(n: int) -> int:
    """Evaluate tower_program(n) for n <= 3.

    Values can only grow by successor steps, so any step-faithful run
    producing a_n performs at least a_n of them; for n = 3 that is
    3^27 ~ 7.6e12 steps, out of reach.  Instead the returned term is
    folded denotationally: Const nodes to their constants, applications
    of the power combinator to big-integer power.  The combinator's
    meaning is pinned separately by budgeted-evaluator tests on small
    grids, and for n <= 2 the whole fold is cross-checked against the
    budgeted evaluator.
    """
    if n > 3:
        raise OverflowError(f"refusing to evaluate the {n}-fold tower")
    term = tower_program(n)

    def fold(t: Term) -> int:
        if isinstance(t, Const):
            return t.k
        if isinstance(t, Compose) and t.outer == POWER and len(t.inners) == 2:
            return fold(t.inners[0]) ** fold(t.inners[1])
        raise ValueError(f"not a power-tower shape: {t}")

    value = fold(term)
    if n <= 2:
        out = eval_term(term, (), 10**5)
        assert out.is_value and out.value == value
    return value


# --------------------------------------------------------------------------
# LZ78: a concrete compressed-length upper bound with exact round trip


def lz_compress(data: bytes) -> list[tuple[int, int | None]]:
    """LZ78 parse: phrases of (dictionary index, literal byte).

    The final phrase may lack a literal when the input ends inside a
    known phrase.
    """
    phrases: list[tuple[int, int | None]] = []
    table: dict[bytes, int] = {b"": 0}
    current = b""
    for byte in data:
        nxt = current + bytes([byte])
        if nxt in table:
            current = nxt
        else:
            phrases.append((table[current], byte))
            table[nxt] = len(table)
            current = b""
    if current:
        phrases.append((table[current], None))
    return phrases


def lz_decompress(phrases: list[tuple[int, int | None]]) -> bytes:
    """Exact inverse of lz_compress."""
    table: list[bytes] = [b""]
    out = []
    for index, literal in phrases:
        if not (0 <= index < len(table)):
            raise ValueError(f"phrase index {index} out of range")
        chunk = table[index] + (bytes([literal]) if literal is not None else b"")
        out.append(chunk)
        if literal is not None:
            table.append(chunk)
    return b"".join(out)


def lz_upper_bound(data: bytes) -> int:
    """Payload bit length of the self-contained LZ78 parse.

    Phrase t (1-based) spends ceil(log2 t) bits on its index, which
    ranges over the t dictionary entries known so far, plus 8 bits for
    a literal when present.  Empty input costs 0 bits.
    """
    bits = 0
    for t, (_index, literal) in enumerate(lz_compress(data), start=1):
        width = (t - 1).bit_length()  # ceil(log2 t): index ranges over [0, t-1]
        bits += width + (8 if literal is not None else 0)
    return bits
