"""Truncated a priori distribution over the naturals.

Every valid program of length at most L bits that halts on empty input
within T steps contributes 2^(-|p|) to the mass of its output.  All
accumulation is exact dyadic arithmetic: integer numerators at the
fixed scale 2^-L, so the Kraft bound (total mass <= 1, i.e. total
units <= 2^L) is checked exactly, with zero tolerance, at every
checkpoint.

Iterating raw bit strings would touch 2^(L+1) candidates; the walk
here enumerates exactly the well-formed programs instead, which is the
same sum (everything else contributes nothing) and is pinned against
the brute-force scan at small L by tests.
"""

from __future__ import annotations

import functools
import json
import math
import statistics
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .codec import enumerate_terms
from .recfun import Term, eval_term
from .util import atomic_write_text, merge_add, run_chunked

DEFAULT_MAX_BITS = 34
DEFAULT_BUDGET = 10**4

# Round-number candidates probed for mass peaks, plus the 3-fold tower.
DEFAULT_CANDIDATES = (10**3, 2**10, 10**6, 2**20, 7625597484987)


@dataclass(frozen=True)
class SemimeasureTable:
    """Exact dyadic mass per integer at scale 2^-max_bits."""

    max_bits: int
    budget: int
    units: dict[int, int]  # x -> integer numerator of mass at scale 2^-max_bits

    @property
    def kraft_units(self) -> int:
        return sum(self.units.values())

    def kraft_total(self) -> Fraction:
        return Fraction(self.kraft_units, 2**self.max_bits)

    def kraft_ok(self) -> bool:
        return self.kraft_units <= 2**self.max_bits

    def mass(self, x: int) -> Fraction:
        return Fraction(self.units.get(x, 0), 2**self.max_bits)

    def support(self) -> list[int]:
        return sorted(self.units)

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {
                    "schema": "kolmo.apriori/1",
                    "max_bits": self.max_bits,
                    "budget": self.budget,
                    "kraft_num": self.kraft_units,
                    "kraft_log2_den": self.max_bits,
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        ]
        for x in sorted(self.units):
            num, e = _reduce_dyadic(self.units[x], self.max_bits)
            lines.append(
                json.dumps(
                    {"x": x, "mass_num": num, "mass_log2_den": e},
                    sort_keys=True,
                    separators=(",", ":"),
                )
            )
        return "\n".join(lines) + "\n"

    def write_jsonl(self, path: str) -> None:
        atomic_write_text(path, self.to_jsonl())

    @staticmethod
    def from_jsonl(text: str) -> "SemimeasureTable":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = json.loads(lines[0])
        if head.get("schema") != "kolmo.apriori/1":
            raise ValueError("not an a priori table (missing schema header)")
        L = head["max_bits"]
        units = {}
        for ln in lines[1:]:
            row = json.loads(ln)
            units[row["x"]] = row["mass_num"] << (L - row["mass_log2_den"])
        return SemimeasureTable(L, head["budget"], units)


def _reduce_dyadic(num: int, e: int) -> tuple[int, int]:
    while num % 2 == 0 and e > 0:
        num //= 2
        e -= 1
    return num, e


def _eval_chunk(budget: int, max_bits: int, chunk: list[tuple[Term, int]]) -> dict[int, int]:
    """Mass contributions of one chunk of (term, encoded length) pairs."""
    part: dict[int, int] = {}
    for term, blen in chunk:
        out = eval_term(term, (), budget)
        if out.kind == "value":
            u = 1 << (max_bits - blen)
            x = out.value
            part[x] = part.get(x, 0) + u
    return part


def enumerate_semimeasure(
    max_bits: int = DEFAULT_MAX_BITS,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    chunk_size: int = 4096,
    checkpoint_path: str | None = None,
) -> SemimeasureTable:
    """Accumulate the truncated a priori distribution.

    Deterministic for any worker count: the chunk partition is fixed by
    chunk_size and the merge is exact integer addition.  The Kraft
    invariant is asserted at every checkpoint.
    """
    if max_bits < 4:
        raise ValueError("max_bits below the shortest program (4 bits)")
    if budget < 1:
        raise ValueError("budget must be positive")
    items = list(enumerate_terms(0, max_bits))
    ceiling = 2**max_bits

    def check(acc: dict[int, int]) -> None:
        total = sum(acc.values())
        if total > ceiling:
            raise RuntimeError(
                f"Kraft violation: {total} units > 2^{max_bits}; encoding is broken"
            )

    units = run_chunked(
        items,
        chunk_size,
        functools.partial(_eval_chunk, budget, max_bits),
        merge_add,
        workers=workers,
        checkpoint_path=checkpoint_path,
        meta={"kind": "apriori", "max_bits": max_bits, "budget": budget},
        on_checkpoint=check,
    )
    return SemimeasureTable(max_bits, budget, units)


def apriori_prob(table: SemimeasureTable, x: int) -> Fraction:
    """Mass of x in the table, zero when absent."""
    return table.mass(x)


def peak_report(
    table: SemimeasureTable,
    candidates=DEFAULT_CANDIDATES,
    window: float = 0.05,
) -> list[dict]:
    """Compare each candidate's mass against its same-magnitude window.

    The window is every integer within +/-window of the candidate's
    magnitude, candidate excluded, absent integers counting as zero
    mass.  Reported ratio is candidate mass over window median; a zero
    median with positive candidate mass reports an infinity sentinel,
    and an all-empty window is flagged rather than scored.
    """
    out = []
    for c in candidates:
        lo = math.ceil(c * (1 - window))
        hi = math.floor(c * (1 + window))
        xs = [x for x in range(lo, hi + 1) if x != c]
        masses = sorted(table.mass(x) for x in xs)
        cmass = table.mass(c)
        med = statistics.median(masses) if masses else Fraction(0)
        p90 = masses[min(len(masses) - 1, math.ceil(0.9 * len(masses)) - 1)] if masses else Fraction(0)
        rec = {
            "candidate": c,
            "mass_float": float(cmass),
            "window_lo": lo,
            "window_hi": hi,
            "window_points": len(masses),
            "window_median_float": float(med),
            "window_p90_float": float(p90),
        }
        if not masses or (med == 0 and cmass == 0):
            rec["ratio"] = None
            rec["note"] = "window carries no mass"
        elif med == 0:
            rec["ratio"] = "inf"
            rec["note"] = "positive mass over an empty window"
        else:
            rec["ratio"] = float(cmass / med)
            rec["note"] = ""
        out.append(rec)
    return out


@dataclass(frozen=True)
class BackgroundFit:
    """Least-squares fit of log mass ~ -log n - (1+eps) log log n."""

    eps_hat: float
    intercept: float
    n_points: int
    residual_rms: float
    lo: int
    hi: int

    def to_json(self) -> dict:
        return {
            "schema": "kolmo.backgroundfit/1",
            "eps_hat": self.eps_hat,
            "intercept": self.intercept,
            "n_points": self.n_points,
            "residual_rms": self.residual_rms,
            "lo": self.lo,
            "hi": self.hi,
        }


def background_fit(
    table: SemimeasureTable,
    lo: int,
    hi: int,
    exclude=DEFAULT_CANDIDATES,
) -> BackgroundFit:
    """Fit the smooth background of the mass profile over [lo, hi].

    Model: log mass = const - log n - (1+eps) log log n, fitted by
    least squares on y = log mass + log n against log log n over the
    non-peak support.  Diagnostic only; requires hi/lo >= 100 and at
    least 30 usable points.
    """
    if lo < 2:
        raise ValueError("lo must be at least 2 (log log n must exist)")
    if hi / lo < 100:
        raise ValueError("range too narrow: need hi/lo >= 100")
    excluded = set(exclude)
    xs, ys = [], []
    scale = table.max_bits * math.log(2.0)
    for x, num in table.units.items():
        if lo <= x <= hi and x not in excluded and num > 0:
            xs.append(math.log(math.log(x)))
            ys.append(math.log(num) - scale + math.log(x))
    if len(xs) < 30:
        raise ValueError(f"insufficient data: {len(xs)} usable points, need 30")
    slope, intercept = np.polyfit(np.array(xs), np.array(ys), 1)
    resid = np.array(ys) - (slope * np.array(xs) + intercept)
    return BackgroundFit(
        eps_hat=float(-slope - 1.0),
        intercept=float(intercept),
        n_points=len(xs),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        lo=lo,
        hi=hi,
    )
