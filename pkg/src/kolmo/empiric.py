"""Numerals in text, rank agreement with the a priori table, and the
multiple-comparisons trap on synthetic cohorts.

extract_numbers counts every cardinal mention in a text: digit strings
(with optional comma grouping) and English number words up to the
trillions, compounds included ("twenty-one", "three hundred and five",
"two hundred thousand", "a million").  Ordinals, decimals, and plural
scale words ("millions") are not cardinal mentions and are skipped.

spurious_scan builds a population with uniformly random group labels
and fully independent binary outcomes, then runs one significance test
per (group, outcome) pair.  Every discovery is spurious by
construction; the scan reports nominal and Bonferroni-corrected
counts.  All randomness flows from one explicit 64-bit seed through
the PCG64 generator, so results are reproducible across platforms.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special, stats

from .apriori import SemimeasureTable

UNITS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4,
    "five": 5, "six": 6, "seven": 7, "eight": 8, "nine": 9,
}
TEENS = {
    "ten": 10, "eleven": 11, "twelve": 12, "thirteen": 13, "fourteen": 14,
    "fifteen": 15, "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
}
TENS = {
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50,
    "sixty": 60, "seventy": 70, "eighty": 80, "ninety": 90,
}
SCALES = {"thousand": 10**3, "million": 10**6, "billion": 10**9, "trillion": 10**12}

_TOKEN_RE = re.compile(r"[A-Za-z]+(?:-[A-Za-z]+)*|\d[\d,]*\.?\d*|\S")


@dataclass(frozen=True)
class FrequencyTable:
    """Occurrence counts per natural, plus the scanned token total."""

    counts: dict[int, int]
    token_total: int

    def to_json(self) -> dict:
        return {
            "schema": "kolmo.numerals/1",
            "token_total": self.token_total,
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
        }

    @staticmethod
    def from_json(obj: dict) -> "FrequencyTable":
        return FrequencyTable(
            {int(k): v for k, v in obj["counts"].items()}, obj["token_total"]
        )

    def render_mentions(self) -> str:
        """Digits-only rendering whose re-extraction reproduces the counts."""
        parts = []
        for x in sorted(self.counts):
            parts.extend([str(x)] * self.counts[x])
        return " ".join(parts)


def _digit_value(tok: str) -> int | None:
    if "." in tok:
        return None  # decimals are not naturals
    digits = tok.replace(",", "")
    if not digits.isdigit():
        return None
    if "," in tok:
        # accept only proper 3-digit grouping
        parts = tok.split(",")
        if len(parts[0]) > 3 or any(len(p) != 3 for p in parts[1:]):
            return None
    return int(digits)


def extract_numbers(text: str) -> FrequencyTable:
    """Count every cardinal mention in the text.

    Number-word runs are munched maximally: "two hundred thousand" is
    one mention of 200000, not three words.  The article "a" acts as
    one only directly before hundred or a scale word.
    """
    tokens = _TOKEN_RE.findall(text)
    counts: dict[int, int] = {}

    def emit(value: int):
        counts[value] = counts.get(value, 0) + 1

    i = 0
    n = len(tokens)
    while i < n:
        tok = tokens[i]
        if tok[0].isdigit():
            v = _digit_value(tok)
            if v is not None:
                emit(v)
            i += 1
            continue
        v, consumed = _parse_word_number(tokens, i)
        if consumed:
            emit(v)
            i += consumed
        else:
            i += 1
    return FrequencyTable(counts, n)


def _small_number(words: list[str]) -> tuple[int, int]:
    """Parse a value below 1000 from lowered word tokens; returns (value, used)."""
    v = 0
    used = 0
    w = words[used] if used < len(words) else ""
    if w in TENS:
        v = TENS[w]
        used = 1
        nxt = words[1] if len(words) > 1 else ""
        if nxt in UNITS and UNITS[nxt] != 0:
            v += UNITS[nxt]
            used = 2
        return v, used
    if w in TEENS:
        return TEENS[w], 1
    if w in UNITS:
        return UNITS[w], 1
    return 0, 0


def _parse_word_number(tokens: list[str], start: int) -> tuple[int, int]:
    """Parse one spelled-out number beginning at tokens[start].

    Returns (value, tokens consumed); consumed == 0 when no number
    starts here.  Hyphenated compounds arrive as single tokens and are
    split first.
    """
    # expand hyphenated compounds in a lookahead window
    words: list[str] = []
    spans: list[int] = []  # tokens consumed per expanded word
    j = start
    while j < len(tokens) and len(words) < 24:
        t = tokens[j].lower()
        if re.fullmatch(r"[a-z]+(?:-[a-z]+)+", t):
            parts = t.split("-")
            if all(p in UNITS or p in TEENS or p in TENS or p in SCALES or p == "hundred" for p in parts):
                words.extend(parts)
                spans.extend([1] + [0] * (len(parts) - 1))
            else:
                words.append(t)
                spans.append(1)
        else:
            words.append(t)
            spans.append(1)
        j += 1

    total = 0
    current = 0  # value of the group below the last closed scale
    last_scale = None  # strictly decreasing across one number
    w_used = 0  # words consumed
    started = False
    article = False

    def tokens_for(wu: int) -> int:
        return sum(spans[:wu])

    while w_used < len(words):
        w = words[w_used]
        if not started and w in ("a", "an"):
            nxt = words[w_used + 1] if w_used + 1 < len(words) else ""
            if nxt == "hundred" or nxt in SCALES:
                article = True
                w_used += 1
                continue
            return 0, 0
        if w == "hundred":
            if current == 0 and not article:
                break
            current = max(current, 1) * 100
            article = False
            started = True
            w_used += 1
            # optional "and" inside the hundred group
            if (
                w_used + 1 < len(words)
                and words[w_used] == "and"
                and _small_number(words[w_used + 1 :])[1] > 0
            ):
                w_used += 1
            small, su = _small_number(words[w_used:])
            if su and small < 100:
                current += small
                w_used += su
            continue
        if w in SCALES:
            if current == 0 and not article:
                break
            if last_scale is not None and SCALES[w] >= last_scale:
                break
            total += max(current, 1) * SCALES[w]
            last_scale = SCALES[w]
            current = 0
            article = False
            started = True
            w_used += 1
            continue
        small, su = _small_number(words[w_used:])
        if su and current == 0 and not article:
            current = small
            started = True
            w_used += su
            # a small value may only continue into hundred/scale
            nxt = words[w_used] if w_used < len(words) else ""
            if nxt != "hundred" and nxt not in SCALES:
                break
            continue
        break

    if not started:
        return 0, 0
    return total + current, tokens_for(w_used)


# --------------------------------------------------------------------------
# Rank agreement between a frequency table and the a priori table


@dataclass(frozen=True)
class CompareReport:
    spearman_rho: float
    spearman_p: float
    shared_points: int
    peak_alignment: tuple[dict, ...]

    def to_json(self) -> dict:
        return {
            "schema": "kolmo.compare/1",
            "spearman_rho": self.spearman_rho,
            "spearman_p": self.spearman_p,
            "shared_points": self.shared_points,
            "peak_alignment": list(self.peak_alignment),
        }


def _window_ratio(value_of, candidate: int, window: float = 0.05):
    lo = math.ceil(candidate * (1 - window))
    hi = math.floor(candidate * (1 + window))
    vals = sorted(value_of(x) for x in range(lo, hi + 1) if x != candidate)
    if not vals:
        return None
    med = vals[len(vals) // 2]
    c = value_of(candidate)
    if med == 0:
        return math.inf if c > 0 else None
    return float(c / med)


def compare_apriori(
    freq: FrequencyTable,
    table: SemimeasureTable,
    candidates=(10**3, 10**6),
    min_shared: int = 30,
) -> CompareReport:
    """Spearman rank correlation over the shared support, plus a
    qualitative peak-alignment report for round-number candidates.

    Requires at least min_shared integers carrying both a count and
    positive mass.
    """
    shared = [x for x, c in freq.counts.items() if c > 0 and table.units.get(x, 0) > 0]
    if len(shared) < min_shared:
        raise ValueError(
            f"insufficient shared support: {len(shared)} points, need {min_shared}"
        )
    shared.sort()
    f = [freq.counts[x] for x in shared]
    m = [table.units[x] for x in shared]
    rho, pval = stats.spearmanr(f, m)
    peaks = []
    for c in candidates:
        fr = _window_ratio(lambda x: freq.counts.get(x, 0), c)
        mr = _window_ratio(lambda x: table.units.get(x, 0), c)
        peaks.append(
            {
                "candidate": c,
                "freq_ratio": None if fr is None else (fr if fr != math.inf else "inf"),
                "mass_ratio": None if mr is None else (mr if mr != math.inf else "inf"),
                "freq_peaked": fr is not None and fr != math.inf and fr >= 10 or fr == math.inf,
                "mass_peaked": mr is not None and mr != math.inf and mr >= 10 or mr == math.inf,
            }
        )
    return CompareReport(float(rho), float(pval), len(shared), tuple(peaks))


# --------------------------------------------------------------------------
# The data-mining trap: independent outcomes, many tests


@dataclass(frozen=True)
class ScanResult:
    """All test results for one synthetic cohort."""

    population: int
    groups: int
    outcomes: int
    alpha: float
    seed: int
    test: str
    base_rates: tuple[float, ...]
    p_values: np.ndarray  # (groups, outcomes); NaN where skipped
    directions: np.ndarray  # sign of group rate minus rest rate
    nominal_count: int
    bonferroni_count: int
    group_sizes: tuple[int, ...]
    skipped_groups: tuple[int, ...] = ()

    @property
    def n_tests(self) -> int:
        return (self.groups - len(self.skipped_groups)) * self.outcomes

    @property
    def bonferroni_alpha(self) -> float:
        return self.alpha / max(self.n_tests, 1)

    def significant(self, corrected: bool = False) -> list[dict]:
        cut = self.bonferroni_alpha if corrected else self.alpha
        out = []
        gs, os_ = np.nonzero(self.p_values < cut)
        for g, o in zip(gs.tolist(), os_.tolist()):
            out.append(
                {
                    "group": g,
                    "outcome": o,
                    "p": float(self.p_values[g, o]),
                    "direction": int(self.directions[g, o]),
                }
            )
        out.sort(key=lambda r: r["p"])
        return out

    def to_json(self) -> dict:
        return {
            "schema": "kolmo.spurious/1",
            "population": self.population,
            "groups": self.groups,
            "outcomes": self.outcomes,
            "alpha": self.alpha,
            "seed": self.seed,
            "test": self.test,
            "n_tests": self.n_tests,
            "nominal_count": self.nominal_count,
            "bonferroni_count": self.bonferroni_count,
            "bonferroni_alpha": self.bonferroni_alpha,
            "group_sizes": list(self.group_sizes),
            "skipped_groups": list(self.skipped_groups),
            "base_rates": list(self.base_rates),
            "nominal_significant": self.significant(False),
            "bonferroni_significant": self.significant(True),
        }


def two_proportion_pvalues(
    x1: np.ndarray, n1: np.ndarray, x2: np.ndarray, n2: np.ndarray,
    continuity: bool = True,
):
    """Two-sided two-proportion z-test, vectorized.

    Pooled standard error; optional Yates continuity correction.  A
    degenerate cell (pooled rate 0 or 1) carries no evidence and gets
    p = 1.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    p1 = x1 / n1
    p2 = x2 / n2
    pooled = (x1 + x2) / (n1 + n2)
    var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)
    diff = np.abs(p1 - p2)
    if continuity:
        diff = np.maximum(diff - 0.5 * (1.0 / n1 + 1.0 / n2), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(var > 0, diff / np.sqrt(var), 0.0)
    pvals = special.erfc(z / math.sqrt(2.0))
    return np.minimum(pvals, 1.0), np.sign(p1 - p2).astype(int)


def exact_conditional_pvalues(
    x1: np.ndarray, n1: np.ndarray, x2: np.ndarray, n2: np.ndarray,
    mid_p: bool = False,
):
    """Exact conditional (hypergeometric) group-vs-rest test, vectorized.

    Conditions on the outcome's success total T = x1 + x2: under the
    null the group's count is Hypergeometric(N, n1, T), and the
    two-sided p-value sums every table whose probability does not
    exceed the observed one — the classical exact treatment of a 2x2
    comparison.  mid_p halves the weight of the attained table, trading
    the exact test's guaranteed-conservative discreteness for tighter
    calibration near moderate alpha while staying close to exact in
    the far tail.
    """
    x1 = np.asarray(x1, dtype=np.int64)
    n1 = np.asarray(n1, dtype=np.int64)
    x2 = np.asarray(x2, dtype=np.int64)
    n2 = np.asarray(n2, dtype=np.int64)
    x1, n1, x2, n2 = np.broadcast_arrays(x1, n1, x2, n2)
    shape = x1.shape
    x1f = x1.reshape(-1)[:, None].astype(float)
    n1f = n1.reshape(-1)[:, None].astype(float)
    total = (x1 + x2).reshape(-1)[:, None].astype(float)
    pop = (n1 + n2).reshape(-1)[:, None].astype(float)
    kmax = int(total.max(initial=0))
    k = np.arange(kmax + 1, dtype=float)[None, :]
    # log C(n1,k) + log C(pop-n1, T-k) - log C(pop, T) on the support
    # [max(0, T-n2), min(T, n1)]; -inf elsewhere
    gl = special.gammaln
    with np.errstate(invalid="ignore"):
        logpmf = (
            gl(n1f + 1.0) - gl(k + 1.0) - gl(n1f - k + 1.0)
            + gl(pop - n1f + 1.0) - gl(total - k + 1.0)
            - gl(pop - n1f - total + k + 1.0)
            - (gl(pop + 1.0) - gl(total + 1.0) - gl(pop - total + 1.0))
        )
    support = (k <= np.minimum(total, n1f)) & (k >= np.maximum(total - (pop - n1f), 0.0))
    pmf = np.where(support, np.exp(logpmf), 0.0)
    obs = np.take_along_axis(pmf, x1f.astype(np.int64), axis=1)
    keep = pmf <= obs * (1.0 + 1e-7)
    pvals = np.sum(pmf, axis=1, where=keep)
    if mid_p:
        tied = np.abs(pmf - obs) <= obs * 1e-7
        pvals = pvals - 0.5 * np.sum(pmf, axis=1, where=tied)
    pvals = np.clip(pvals, 0.0, 1.0).reshape(shape)
    with np.errstate(invalid="ignore"):
        direction = np.sign(x1 / n1 - x2 / np.maximum(n2, 1))
    return pvals, direction.astype(int)


TESTS = ("midp", "exact", "z", "z_cc")


def spurious_scan(
    population: int,
    groups: int,
    outcomes: int,
    alpha: float,
    seed: int,
    base_rates=None,
    test: str = "midp",
) -> ScanResult:
    """Test every (group, outcome) pair on a cohort with no real effects.

    Group labels are uniform; each outcome is an independent Bernoulli
    draw at its base rate.  Base rates default to a log-uniform draw
    over [1e-4, 1e-2] from the same seed.  test selects the
    significance test: "midp" (mid-p exact conditional, the default —
    calibrated near alpha yet nearly exact in the far tail), "exact"
    (conditional hypergeometric, guaranteed conservative), "z"
    (two-proportion z, whose normal tail misbehaves at the sparse end
    of the rate range — exactly where a Bonferroni threshold of
    alpha/2400 lives), or "z_cc" (z with continuity correction).

    A group with no members — or a rest side with no members, as when
    groups == 1 — makes its tests degenerate: they are flagged in
    skipped_groups, carry p = NaN, and never count as significant.
    """
    if population < groups:
        raise ValueError("population smaller than the number of groups")
    if not (0 < alpha < 1):
        raise ValueError("alpha must be in (0, 1)")
    if test not in TESTS:
        raise ValueError(f"unknown test {test!r}")
    rng = np.random.Generator(np.random.PCG64(seed))
    if base_rates is None:
        base_rates = np.exp(
            rng.uniform(math.log(1e-4), math.log(1e-2), size=outcomes)
        )
    else:
        base_rates = np.asarray(base_rates, dtype=float)
        if base_rates.shape != (outcomes,):
            raise ValueError("base_rates must give one rate per outcome")
        if np.any((base_rates <= 0) | (base_rates >= 1)):
            raise ValueError("base rates must be in (0, 1)")
    assign = rng.integers(0, groups, size=population)
    sizes = np.bincount(assign, minlength=groups)
    succ = np.empty((groups, outcomes), dtype=np.int64)
    totals = np.empty(outcomes, dtype=np.int64)
    for o in range(outcomes):
        hits = rng.random(population) < base_rates[o]
        totals[o] = int(hits.sum())
        succ[:, o] = np.bincount(assign[hits], minlength=groups)
    degenerate = (sizes == 0) | (sizes == population)
    ok = ~degenerate
    n1 = sizes[ok][:, None]
    n2 = population - n1
    x1 = succ[ok]
    x2 = totals[None, :] - x1
    if test in ("z", "z_cc"):
        p_ok, d_ok = two_proportion_pvalues(
            x1, n1, x2, n2, continuity=(test == "z_cc")
        )
    else:
        p_ok, d_ok = exact_conditional_pvalues(
            x1, n1, x2, n2, mid_p=(test == "midp")
        )
    pvals = np.full((groups, outcomes), np.nan)
    direction = np.zeros((groups, outcomes), dtype=int)
    pvals[ok] = p_ok
    direction[ok] = d_ok
    valid_tests = int(np.count_nonzero(ok)) * outcomes
    nominal = int(np.count_nonzero(pvals < alpha))
    bon = int(np.count_nonzero(pvals < alpha / max(valid_tests, 1)))
    return ScanResult(
        population=population,
        groups=groups,
        outcomes=outcomes,
        alpha=alpha,
        seed=seed,
        test=test,
        base_rates=tuple(float(r) for r in base_rates),
        p_values=pvals,
        directions=direction,
        nominal_count=nominal,
        bonferroni_count=bon,
        group_sizes=tuple(int(s) for s in sizes),
        skipped_groups=tuple(int(g) for g in np.nonzero(degenerate)[0]),
    )
