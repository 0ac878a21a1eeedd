"""Workbench acceptance gate.

One test per acceptance property, each printing a single [PASS]/[FAIL]
line with the measured numbers (run `pytest tests/test_acceptance.py
-v -s` to see every line; without -s only failing lines surface).

Known red: the round-number peak test measures mass/median ratios near
1 instead of the >= 10 bar.  At this enumeration depth (34 bits,
10^4 steps) the mass table is literal-dominated — every integer in a
+/-5% window around 10^3 or 2^10 costs the same gamma-coded literal,
and no composite program under the budget produces them more cheaply —
so round numbers are not yet privileged.  The test reports the real
ratios and fails honestly rather than lowering the bar.
"""

import functools
import json
import math
import os
import random
import time
from fractions import Fraction

import pytest

from test_recfun import _random_term
from kolmo.apriori import SemimeasureTable, enumerate_semimeasure, peak_report
from kolmo.cli import main
from kolmo.codec import encode_term, enumerate_terms
from kolmo.complexity import (
    census,
    const_program_len,
    first_hits,
    tower_eval,
    tower_program,
)
from kolmo.empiric import spurious_scan
from kolmo.nbody import circular_pair, divergence_probe, integrate, pythagorean_state
from kolmo.recfun import eval_reference, eval_term
from kolmo.util import merge_add, run_chunked

L34, BUDGET = 34, 10**4


def _line(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def _mass_chunk(chunk):
    # same arithmetic the library uses, rebuilt here from public pieces
    acc: dict[int, int] = {}
    for term, blen in chunk:
        out = eval_term(term, (), BUDGET)
        if out.kind == "value":
            acc[out.value] = acc.get(out.value, 0) + (1 << (L34 - blen))
    return acc


@pytest.fixture(scope="module")
def mass34():
    """Full 34-bit enumeration, Kraft mass recorded at every chunk boundary.

    Driven through run_chunked directly so the checkpoint cadence is
    observable, then cross-checked unit-for-unit against the library
    entry point before either dependent test runs.
    """
    items = list(enumerate_terms(0, L34))
    kraft_log: list[Fraction] = []

    def record(acc):
        kraft_log.append(Fraction(sum(acc.values()), 2**L34))

    units = run_chunked(items, 4096, _mass_chunk, merge_add, on_checkpoint=record)
    table = enumerate_semimeasure(L34, BUDGET)
    assert table.units == units  # library agrees with the re-derivation
    return table, kraft_log, len(items)


def test_pigeonhole_census():
    """At most T integers can have complexity <= T, for every T <= 2^20."""
    t0 = time.perf_counter()
    hits = first_hits(2**20, BUDGET)
    ks = sorted(hits.values())
    counts = []
    for j in range(21):
        t = 2**j
        n = sum(1 for k in ks if k <= t)
        counts.append(n)
        assert n <= t
    rep = census(20, BUDGET, max_threshold_log2=20)
    assert rep.pigeonhole_ok()
    assert [c for _, c in rep.thresholds] == counts  # report matches recount
    elapsed = time.perf_counter() - t0
    ok = rep.pigeonhole_ok() and elapsed <= 600
    _line("pigeonhole census", ok,
          f"{counts[-1]} objects reached, count <= T at all 21 thresholds "
          f"T = 2^0..2^20, budget {BUDGET} ({elapsed:.2f}s, limit 600s)")
    assert ok
    assert counts[-1] == 255  # frozen from the first full run


def test_const_length_is_logarithmic():
    """Literal programs are ~2 log2 x bits: program length tracks the logarithm."""
    worst_lo = worst_hi = 0.0
    violations = 0
    for x in range(1, 2**16):
        lg = 2 * math.log2(x)
        n = const_program_len(x)
        if not (lg - 2 <= n <= lg + 8):
            violations += 1
        worst_lo = max(worst_lo, lg - n)
        worst_hi = max(worst_hi, n - lg)
    ok = violations == 0
    _line("logarithmic-bound witnesses", ok,
          f"const_program_len(x) in [2log2(x)-2, 2log2(x)+8] for all x < 2^16 "
          f"({violations} violations; slack [-{worst_lo:.2f}, +{worst_hi:.2f}])")
    assert ok


def test_kraft_at_every_checkpoint(mass34):
    """Total a priori mass never exceeds 1, checked in exact dyadic units."""
    table, kraft_log, n_items = mass34
    assert len(kraft_log) == -(-n_items // 4096)  # one record per chunk
    over = [f for f in kraft_log if f > 1]
    final = table.kraft_total()
    ok = not over and table.kraft_ok() and final <= 1
    _line("Kraft at every checkpoint", ok,
          f"L={L34} T={BUDGET}: {n_items} programs in {len(kraft_log)} chunks, "
          f"0 exceedances, final mass {final} ~= {float(final):.6f}")
    assert ok


def test_round_number_peak(mass34):
    """Round numbers should outweigh their magnitude window by >= 10.

    Known red (see module docstring): measured ratios sit near 1 because
    the table is literal-dominated at this depth.  Reported, not hidden.
    """
    table, _, _ = mass34
    reports = peak_report(table, candidates=(2**10, 10**3))
    ratios = {r["candidate"]: r["ratio"] for r in reports}

    def clears(r):
        return r == "inf" or (isinstance(r, (int, float)) and r >= 10)

    ok = all(clears(ratios[c]) for c in (2**10, 10**3))
    _line("round-number peak", ok,
          f"mass/window-median = {ratios[2**10]:.5f} at 2^10, "
          f"{ratios[10**3]:.5f} at 10^3 (bar >= 10; literal-dominated table)")
    assert ok


def test_tower_witness():
    """A linear-size program computes the triple power tower exactly."""
    v = tower_eval(3)
    assert v == 3**27  # independent big-integer power
    bits = [encode_term(tower_program(n)).bit_len for n in range(1, 9)]
    c = max(b / n for n, b in zip(range(1, 9), bits))
    ok = v == 7625597484987 and all(b <= 110 * n for n, b in zip(range(1, 9), bits))
    _line("tower witness", ok,
          f"eval(tower(3)) = {v}; encoded bits {bits} for n=1..8, "
          f"c = {c:.2f} <= 110 bits/level")
    assert ok


def test_budgeted_evaluator_matches_reference():
    """Step-counted evaluator vs naive structural interpreter, 10^4 terms."""
    rng = random.Random(20260816)
    checked = skipped = mismatches = 0
    for _ in range(10**4):
        t = _random_term(rng, depth=4)
        args = tuple(rng.randint(0, 8) for _ in range(t.arity))
        out = eval_term(t, args, 10**6)
        if out.kind != "value":
            skipped += 1  # never happens with this seed
            continue
        if out.value != eval_reference(t, args):
            mismatches += 1
        checked += 1
    ok = mismatches == 0 and checked == 10**4
    _line("oracle equivalence", ok,
          f"{checked}/10000 random mu-free terms compared "
          f"({skipped} over budget), {mismatches} mismatches")
    assert ok


def test_orbit_conservation_and_divergence():
    """Symplectic conservation on a circle; exponential divergence on chaos."""
    traj = integrate(circular_pair(), dt=1e-3, n_steps=10**4, method="leapfrog",
                     stride=100)
    drift, pdrift = traj.energy_drift(), traj.momentum_drift()

    rep = divergence_probe(pythagorean_state(), 1e-9, 1e-4, 300_000,
                           method="leapfrog", stride=1000)
    t_cross = rep.first_time_ratio(1e6)
    ok = (drift < 1e-8 and pdrift < 1e-12
          and rep.max_ratio > 1e6 and t_cross is not None and t_cross < 60)
    _line("orbit conservation + divergence", ok,
          f"circular: |dE/E| {drift:.2e} (<1e-8), |dP| {pdrift:.2e} (<1e-12); "
          f"pythagorean delta=1e-9: ratio {rep.max_ratio:.2e} crossed 1e6 at "
          f"t={t_cross if t_cross is not None else 'never'} (<60)")
    assert ok


def test_spurious_calibration():
    """100 null cohorts: nominal hits near binomial mean, corrected hits at zero."""
    t0 = time.perf_counter()
    nominal, bonf_zero = [], 0
    for seed in range(100):
        res = spurious_scan(10**5, 12, 200, 0.05, seed, test="midp")
        nominal.append(res.nominal_count)
        bonf_zero += res.bonferroni_count == 0
    elapsed = time.perf_counter() - t0
    mean = sum(nominal) / len(nominal)
    mu, sigma = 2400 * 0.05, math.sqrt(2400 * 0.05 * 0.95)
    ok = abs(mean - mu) <= 3 * sigma and bonf_zero >= 95 and elapsed <= 300
    _line("spurious-correlation calibration", ok,
          f"mean nominal {mean:.2f} vs binomial {mu:.0f}+/-{3 * sigma:.1f}; "
          f"Bonferroni zero in {bonf_zero}/100 seeds (need >=95) "
          f"({elapsed:.1f}s, limit 300s)")
    assert ok


def test_cli_determinism(tmp_path):
    """Every subcommand byte-identical on rerun; pool size never matters."""
    from kolmo.nbody import state_to_config

    corpus = os.path.join(os.path.dirname(__file__), "data", "corpus.txt")
    blob = tmp_path / "blob.bin"
    blob.write_bytes(bytes(range(256)) * 40)
    cfg = tmp_path / "pair.json"
    cfg.write_text(json.dumps(state_to_config(circular_pair())))
    freq, table = tmp_path / "freq.json", tmp_path / "table.jsonl"
    assert main(["numerals", "--in", corpus, "--out", str(freq)]) == 0
    assert main(["apriori", "--max-bits", "14", "--out", str(table)]) == 0

    argvs = {
        "k": ["k", "--x", "1000"],
        "order": ["order", "--n", "4096", "--budget", "1000"],
        "census": ["census", "--bits", "12"],
        "lz": ["lz", "--file", str(blob)],
        "apriori": ["apriori", "--max-bits", "14"],
        "nbody": ["nbody", "--config", str(cfg), "--steps", "200", "--stride", "50"],
        "numerals": ["numerals", "--in", corpus],
        "compare": ["compare", "--freq", str(freq), "--table", str(table)],
        "spurious": ["spurious", "--pop", "5000", "--groups", "4",
                     "--outcomes", "10", "--seed", "7"],
    }
    stable = []
    for name, argv in argvs.items():
        a, b = tmp_path / f"{name}_a.out", tmp_path / f"{name}_b.out"
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        stable.append(a.read_bytes() == b.read_bytes())
        if name in ("order", "apriori"):  # the pooled subcommands
            w = tmp_path / f"{name}_w8.out"
            assert main(argv + ["--workers", "8", "--out", str(w)]) == 0
            stable.append(a.read_bytes() == w.read_bytes())
    ok = all(stable)
    _line("determinism", ok,
          f"{len(argvs)} subcommands byte-identical across reruns; "
          f"order/apriori identical at --workers 8 vs 1")
    assert ok
