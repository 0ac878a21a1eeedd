"""Command-line surface: exit-code discipline, file outputs, figures,
worker determinism, and checkpoint kill/resume."""

import json
import os
import signal
import subprocess
import sys
import time

import pytest

from kolmo.cli import main
from kolmo.codec import layout_hash

CORPUS = os.path.join(os.path.dirname(__file__), "data", "corpus.txt")
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"

# boots the CLI in a child interpreter for signal tests
BOOT = "import sys; from kolmo.cli import main; sys.exit(main(sys.argv[1:]))"


def _circular_config(tmp_path):
    from kolmo.nbody import circular_pair, state_to_config

    path = tmp_path / "pair.json"
    path.write_text(json.dumps(state_to_config(circular_pair())))
    return str(path)


def test_version_reports_codec_layout(capsys):
    with pytest.raises(SystemExit) as e:
        main(["--version"])
    assert e.value.code == 0
    out = capsys.readouterr().out
    assert out.startswith("kolmo ")
    assert f"codec-layout {layout_hash()}" in out


def test_k_to_stdout(capsys):
    assert main(["k", "--x", "0"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["schema"] == "kolmo.k/1"
    assert obj["k_value"] == 17


def test_k_to_file(tmp_path):
    out = tmp_path / "k5.json"
    assert main(["k", "--x", "5", "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["x"] == 5 and obj["k_value"] == 262
    assert obj["witness"] == 262 and obj["length_complexity"] == 8


def test_argparse_validation_is_exit_2():
    for argv in (
        ["k", "--x", "-5"],
        ["k", "--x", "five"],
        ["order", "--n", "0"],
        ["nbody", "--config", "x.json", "--steps", "10", "--dt", "-1"],
        ["spurious", "--pop", "100", "--groups", "2", "--outcomes", "3",
         "--seed", "1", "--alpha", "1.5"],
    ):
        with pytest.raises(SystemExit) as e:
            main(argv)
        assert e.value.code == 2


def test_census_bits_cap_is_exit_2(capsys):
    assert main(["census", "--bits", "25"]) == 2


def test_plot_requires_out():
    assert main(["census", "--bits", "8", "--plot"]) == 2


def test_missing_input_is_exit_2(tmp_path):
    assert main(["numerals", "--in", str(tmp_path / "nope.txt")]) == 2
    assert main(["nbody", "--config", str(tmp_path / "nope.json"), "--steps", "5"]) == 2
    assert main(["lz", "--file", str(tmp_path / "nope.bin")]) == 2


def test_unwritable_out_is_exit_1(tmp_path):
    dead = tmp_path / "no-such-dir" / "k.json"
    assert main(["k", "--x", "1", "--out", str(dead)]) == 1


def test_census_report_and_figure(tmp_path):
    out = tmp_path / "census.json"
    assert main(["census", "--bits", "12", "--out", str(out), "--plot"]) == 0
    obj = json.loads(out.read_text())
    assert obj["schema"] == "kolmo.census/1"
    assert obj["n_bits"] == 12 and obj["pigeonhole_ok"] is True
    assert [t["T"] for t in obj["thresholds"]] == [2**i for i in range(21)]
    png = tmp_path / "census.png"
    assert png.read_bytes()[:8] == PNG_MAGIC
    assert not list(tmp_path.glob("*.tmp.png"))  # figure write is atomic too


def test_order_formats_and_figure(tmp_path):
    js = tmp_path / "order.json"
    cs = tmp_path / "order.csv"
    assert main(["order", "--n", "4096", "--budget", "1000", "--out", str(js), "--plot"]) == 0
    assert main(["order", "--n", "4096", "--budget", "1000", "--format", "csv",
                 "--out", str(cs)]) == 0
    obj = json.loads(js.read_text())
    ks = [e["k_value"] for e in obj["entries"]]
    assert all(a <= b for a, b in zip(ks, ks[1:]))  # sorted by k
    lines = cs.read_text().strip().split("\n")
    assert lines[0] == "rank,x,k_value,length_complexity"
    assert len(lines) == len(obj["entries"]) + 1
    assert (tmp_path / "order.png").read_bytes()[:8] == PNG_MAGIC


def test_order_workers_byte_identical(tmp_path):
    a = tmp_path / "w1.json"
    b = tmp_path / "w2.json"
    assert main(["order", "--n", "4096", "--budget", "1000", "--out", str(a)]) == 0
    assert main(["order", "--n", "4096", "--budget", "1000", "--workers", "2",
                 "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_order_checkpoint_refuses_changed_budget(tmp_path):
    ck = tmp_path / "order.ck"
    out = tmp_path / "order.json"
    args = ["order", "--n", "2048", "--budget", "1000", "--checkpoint", str(ck)]
    assert main(args + ["--out", str(out)]) == 0
    assert main(["order", "--n", "2048", "--budget", "2000",
                 "--checkpoint", str(ck), "--out", str(out)]) == 2


def test_apriori_stdout(capsys):
    assert main(["apriori", "--max-bits", "12", "--budget", "1000"]) == 0
    head = json.loads(capsys.readouterr().out.splitlines()[0])
    assert head["schema"] == "kolmo.apriori/1"
    assert head["kraft_num"] == 498 and head["kraft_log2_den"] == 12


def test_apriori_survives_sigkill_and_resumes(tmp_path):
    """Kill the enumeration mid-run; a rerun with the same checkpoint
    finishes the job and writes byte-identical output."""
    straight = tmp_path / "straight.jsonl"
    assert main(["apriori", "--max-bits", "26", "--budget", "100000",
                 "--out", str(straight)]) == 0

    ck = tmp_path / "apriori.ck"
    out = tmp_path / "resumed.jsonl"
    argv = ["apriori", "--max-bits", "26", "--budget", "100000",
            "--chunk-size", "64", "--checkpoint", str(ck), "--out", str(out)]
    proc = subprocess.Popen(
        [sys.executable, "-c", BOOT] + argv,
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
    )
    deadline = time.time() + 60
    state = None
    while time.time() < deadline:
        if ck.exists():
            state = json.loads(ck.read_text())  # atomic write: never partial
            if state["next_chunk"] >= 5:
                break
        time.sleep(0.01)
    proc.send_signal(signal.SIGKILL)
    proc.wait()
    assert proc.returncode == -signal.SIGKILL  # died mid-run, not completed
    assert state is not None and state["next_chunk"] >= 5
    assert not out.exists()  # output appears only on completion

    assert main(argv) == 0
    assert out.read_bytes() == straight.read_bytes()


def test_nbody_trajectory_csv(tmp_path):
    out = tmp_path / "traj.csv"
    assert main(["nbody", "--config", _circular_config(tmp_path), "--steps", "10",
                 "--stride", "5", "--out", str(out), "--plot"]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("t,q0x,q0y,q0z,v0x")
    assert len(lines) == 4  # header + samples at steps 0, 5, 10
    assert (tmp_path / "traj.png").read_bytes()[:8] == PNG_MAGIC


def test_nbody_abort_still_reports(tmp_path):
    from kolmo.nbody import PhaseState, state_to_config
    import numpy as np

    cfg = tmp_path / "headon.json"
    state = PhaseState(
        np.array([1.0, 1.0]),
        np.array([[-0.5, 0.0, 0.0], [0.5, 0.0, 0.0]]),
        np.zeros((2, 3)),
    )
    cfg.write_text(json.dumps(state_to_config(state)))
    out = tmp_path / "crash.csv"
    # collision abort is a reported outcome, not a failure: exit 0
    assert main(["nbody", "--config", str(cfg), "--steps", "100000",
                 "--dt", "1e-4", "--stride", "1000",
                 "--collision-threshold", "1e-3", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    last_t = float(lines[-1].split(",")[0])
    assert last_t < 1.0  # truncated well before the requested 10 time units


def test_nbody_divergence_report(tmp_path):
    out = tmp_path / "div.json"
    assert main(["nbody", "--config", _circular_config(tmp_path), "--steps", "200",
                 "--stride", "50", "--divergence", "1e-9", "--out", str(out),
                 "--plot"]) == 0
    obj = json.loads(out.read_text())
    assert obj["schema"] == "kolmo.divergence/1"
    assert obj["delta"] == 1e-9 and len(obj["samples"]) == 5
    assert (tmp_path / "div.png").read_bytes()[:8] == PNG_MAGIC


def test_numerals_counts_corpus(tmp_path):
    out = tmp_path / "freq.json"
    assert main(["numerals", "--in", CORPUS, "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["schema"] == "kolmo.numerals/1"
    assert obj["token_total"] == 773
    assert obj["counts"]["1000"] == 8 and obj["counts"]["1000000"] == 4


def test_compare_pipeline(tmp_path):
    freq = tmp_path / "freq.json"
    table = tmp_path / "table.jsonl"
    cmp_out = tmp_path / "cmp.json"
    assert main(["numerals", "--in", CORPUS, "--out", str(freq)]) == 0
    assert main(["apriori", "--max-bits", "14", "--out", str(table)]) == 0
    assert main(["compare", "--freq", str(freq), "--table", str(table),
                 "--out", str(cmp_out), "--plot"]) == 0
    obj = json.loads(cmp_out.read_text())
    assert obj["schema"] == "kolmo.compare/1"
    assert obj["shared_points"] >= 39 and obj["spearman_rho"] > 0.4
    assert (tmp_path / "cmp.png").read_bytes()[:8] == PNG_MAGIC


def test_compare_insufficient_support_is_exit_2(tmp_path):
    freq = tmp_path / "freq.json"
    table = tmp_path / "table.jsonl"
    text = tmp_path / "tiny.txt"
    text.write_text("three three three")
    assert main(["numerals", "--in", str(text), "--out", str(freq)]) == 0
    assert main(["apriori", "--max-bits", "12", "--budget", "1000",
                 "--out", str(table)]) == 0
    assert main(["compare", "--freq", str(freq), "--table", str(table)]) == 2


def test_spurious_report_and_figure(tmp_path):
    out = tmp_path / "scan.json"
    assert main(["spurious", "--pop", "5000", "--groups", "4", "--outcomes", "10",
                 "--seed", "7", "--out", str(out), "--plot"]) == 0
    obj = json.loads(out.read_text())
    assert obj["schema"] == "kolmo.spurious/1"
    assert obj["n_tests"] == 40 and obj["skipped_groups"] == []
    assert obj["bonferroni_count"] <= obj["nominal_count"]
    assert (tmp_path / "scan.png").read_bytes()[:8] == PNG_MAGIC


def test_spurious_bad_rates_is_exit_2(tmp_path):
    rates = tmp_path / "rates.json"
    rates.write_text("[0.5]")  # wrong arity for 3 outcomes
    assert main(["spurious", "--pop", "100", "--groups", "2", "--outcomes", "3",
                 "--seed", "1", "--rates", str(rates)]) == 2
    rates.write_text('{"a": 1}')  # not an array at all
    assert main(["spurious", "--pop", "100", "--groups", "2", "--outcomes", "3",
                 "--seed", "1", "--rates", str(rates)]) == 2
    assert main(["spurious", "--pop", "3", "--groups", "5", "--outcomes", "2",
                 "--seed", "1"]) == 2


def test_lz_report(tmp_path):
    f = tmp_path / "structured.bin"
    f.write_bytes(b"abc" * 2000)
    out = tmp_path / "lz.json"
    assert main(["lz", "--file", str(f), "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert obj["schema"] == "kolmo.lz/1"
    assert obj["bytes_in"] == 6000
    assert obj["ratio"] < 0.2  # highly repetitive input compresses well
