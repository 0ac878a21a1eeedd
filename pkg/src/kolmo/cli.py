"""Single entry point for the workbench.

Every subcommand validates its parameters before doing any work,
writes output files atomically, and keeps a fixed exit-code
discipline: 0 success, 2 parameter/input validation failure, 1
runtime failure.  Structured progress lines go to stderr.  With
--plot a matplotlib rendering of the report lands next to the output
file.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from . import apriori as apriori_mod
from . import complexity as cx
from . import empiric
from . import nbody as nb
from .codec import layout_hash
from .util import CheckpointMismatch, atomic_write_text, stable_json

log = logging.getLogger("kolmo")


class Validation(ValueError):
    """Unusable parameters or input files; maps to exit status 2."""


def _int_at_least(floor: int):
    def parse(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{s!r} is not an integer")
        if v < floor:
            raise argparse.ArgumentTypeError(f"must be >= {floor}")
        return v

    return parse


def _positive_float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s!r} is not a number")
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _unit_float(s: str) -> float:
    v = _positive_float(s)
    if not v < 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return v


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise Validation(f"cannot read {path}: {e}")


def _read_bytes(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise Validation(f"cannot read {path}: {e}")


def _read_json(path: str) -> dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise Validation(f"{path} is not valid JSON: {e}")


def _emit(args, text: str) -> None:
    out = getattr(args, "out", None)
    if out:
        atomic_write_text(out, text)
        log.info("wrote %s (%d bytes)", out, len(text))
    else:
        sys.stdout.write(text)


def _figure_path(args) -> str:
    if not getattr(args, "out", None):
        raise Validation("--plot needs --out to place the figure next to")
    base, _ = os.path.splitext(args.out)
    return base + ".png"


def _render(draw, path: str) -> None:
    tmp = path + ".tmp.png"  # keep the suffix so the renderer picks the format
    draw(tmp)
    os.replace(tmp, path)
    log.info("rendered %s", path)


# --------------------------------------------------------------------------
# subcommands


def cmd_k(args) -> None:
    rec = cx.k_exp(args.x, args.budget, args.mmax)
    _emit(args, stable_json(rec.to_json()))


def cmd_order(args) -> None:
    hits = cx.first_hits(
        args.n,
        args.budget,
        workers=args.workers,
        chunk_size=args.chunk_size,
        checkpoint_path=args.checkpoint,
    )
    seg = cx.kolmogorov_order(args.n, args.budget, hits=hits)
    if args.format == "csv":
        _emit(args, seg.to_csv())
    else:
        _emit(args, stable_json(seg.to_json()))
    if args.plot:
        from .figures import order_figure

        _render(lambda p: order_figure(seg, p), _figure_path(args))


def cmd_census(args) -> None:
    if args.bits > 24:
        raise Validation("--bits is capped at 24: the census enumerates the full space")
    rep = cx.census(args.bits, args.budget)
    _emit(args, stable_json(rep.to_json()))
    if args.plot:
        from .figures import census_figure

        _render(lambda p: census_figure(rep, p), _figure_path(args))


def cmd_lz(args) -> None:
    data = _read_bytes(args.file)
    phrases = cx.lz_compress(data)
    bound = cx.lz_upper_bound(data)
    raw_bits = 8 * len(data)
    _emit(
        args,
        stable_json(
            {
                "schema": "kolmo.lz/1",
                "file": os.path.basename(args.file),
                "bytes_in": len(data),
                "phrases": len(phrases),
                "upper_bound_bits": bound,
                "raw_bits": raw_bits,
                "ratio": (bound / raw_bits) if raw_bits else None,
            }
        ),
    )


def cmd_apriori(args) -> None:
    table = apriori_mod.enumerate_semimeasure(
        args.max_bits,
        args.budget,
        workers=args.workers,
        chunk_size=args.chunk_size,
        checkpoint_path=args.checkpoint,
    )
    text = table.to_jsonl()
    _emit(args, text)
    if args.plot:
        from .figures import apriori_figure

        _render(
            lambda p: apriori_figure(table, p, candidates=apriori_mod.DEFAULT_CANDIDATES),
            _figure_path(args),
        )


def cmd_nbody(args) -> None:
    try:
        state = nb.load_config(args.config)
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as e:
        raise Validation(f"bad nbody config {args.config}: {e}")
    if args.divergence is not None:
        rep = nb.divergence_probe(
            state, args.divergence, args.dt, args.steps,
            method=args.method, stride=args.stride,
        )
        _emit(args, stable_json(rep.to_json()))
        if args.plot:
            from .figures import divergence_figure

            _render(lambda p: divergence_figure(rep, p), _figure_path(args))
        return
    traj = nb.integrate(
        state, args.dt, args.steps, method=args.method, stride=args.stride,
        collision_threshold=args.collision_threshold,
    )
    if traj.aborted:
        log.warning("integration aborted: %s", traj.abort_reason)
    _emit(args, traj.to_csv())
    if args.plot:
        from .figures import nbody_figure

        _render(lambda p: nbody_figure(traj, p), _figure_path(args))


def cmd_numerals(args) -> None:
    freq = empiric.extract_numbers(_read_text(args.infile))
    _emit(args, stable_json(freq.to_json()))


def cmd_compare(args) -> None:
    freq_obj = _read_json(args.freq)
    try:
        freq = empiric.FrequencyTable.from_json(freq_obj)
    except (KeyError, ValueError) as e:
        raise Validation(f"bad frequency table {args.freq}: {e}")
    try:
        table = apriori_mod.SemimeasureTable.from_jsonl(_read_text(args.table))
    except ValueError as e:
        raise Validation(f"bad semimeasure table {args.table}: {e}")
    try:
        rep = empiric.compare_apriori(freq, table)
    except ValueError as e:
        raise Validation(str(e))
    _emit(args, stable_json(rep.to_json()))
    if args.plot:
        from .figures import compare_figure

        _render(lambda p: compare_figure(freq, table, p), _figure_path(args))


def cmd_spurious(args) -> None:
    rates = None
    if args.rates:
        obj = _read_json(args.rates)
        if not isinstance(obj, list):
            raise Validation(f"{args.rates} must hold a JSON array of rates")
        rates = obj
    if args.pop < args.groups:
        raise Validation("--pop must be at least --groups")
    try:
        result = empiric.spurious_scan(
            args.pop, args.groups, args.outcomes, args.alpha, args.seed,
            base_rates=rates, test=args.test,
        )
    except ValueError as e:
        raise Validation(str(e))
    _emit(args, stable_json(result.to_json()))
    if args.plot:
        from .figures import spurious_figure

        _render(lambda p: spurious_figure(result, p), _figure_path(args))


# --------------------------------------------------------------------------
# parser


def _add_common(sp, plot: bool = True, workers: bool = False) -> None:
    sp.add_argument("--out", help="output file (stdout when omitted); written atomically")
    if plot:
        sp.add_argument(
            "--plot", action="store_true",
            help="render a PNG figure next to --out",
        )
    if workers:
        sp.add_argument("--workers", type=_int_at_least(1), default=1,
                        help="process pool size; any value gives identical output")
        sp.add_argument("--chunk-size", type=_int_at_least(1), default=None,
                        help="items per work chunk (fixed partition, default per subcommand)")
        sp.add_argument("--checkpoint", help="checkpoint file for resumable runs")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kolmo",
        description="Desk-scale workbench: short programs, a priori mass, "
        "orbit sensitivity, and spurious-correlation statistics.",
    )
    p.add_argument(
        "--version",
        action="version",
        version=f"kolmo {__version__} codec-layout {layout_hash()}",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")

    sp = sub.add_parser("k", help="time-bounded complexity of one integer")
    sp.add_argument("--x", type=_int_at_least(0), required=True, help="the integer")
    sp.add_argument("--budget", type=_int_at_least(1), default=cx.DEFAULT_BUDGET)
    sp.add_argument("--mmax", type=_int_at_least(1), default=cx.DEFAULT_M_MAX)
    _add_common(sp, plot=False)
    sp.set_defaults(func=cmd_k)

    sp = sub.add_parser("order", help="complexity order over every reachable integer")
    sp.add_argument("--n", type=_int_at_least(1), required=True,
                    help="program-index bound m_max")
    sp.add_argument("--budget", type=_int_at_least(1), default=cx.DEFAULT_BUDGET)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    _add_common(sp, workers=True)
    sp.set_defaults(func=cmd_order, default_chunk=2048)

    sp = sub.add_parser("census", help="pigeonhole census of a program space")
    sp.add_argument("--bits", type=_int_at_least(1), required=True,
                    help="program length in bits (1..24)")
    sp.add_argument("--budget", type=_int_at_least(1), default=cx.DEFAULT_BUDGET)
    _add_common(sp)
    sp.set_defaults(func=cmd_census)

    sp = sub.add_parser("lz", help="dictionary-parse upper bound for a file")
    sp.add_argument("--file", required=True)
    _add_common(sp, plot=False)
    sp.set_defaults(func=cmd_lz)

    sp = sub.add_parser("apriori", help="a priori mass table by program enumeration")
    sp.add_argument("--max-bits", type=_int_at_least(4), default=apriori_mod.DEFAULT_MAX_BITS)
    sp.add_argument("--budget", type=_int_at_least(1), default=apriori_mod.DEFAULT_BUDGET)
    _add_common(sp, workers=True)
    sp.set_defaults(func=cmd_apriori, default_chunk=4096)

    sp = sub.add_parser("nbody", help="integrate a gravitational system")
    sp.add_argument("--config", required=True, help="JSON bodies file")
    sp.add_argument("--method", choices=("leapfrog", "rk4"), default="leapfrog")
    sp.add_argument("--dt", type=_positive_float, default=1e-3)
    sp.add_argument("--steps", type=_int_at_least(1), required=True)
    sp.add_argument("--stride", type=_int_at_least(1), default=1,
                    help="sample every this many steps")
    sp.add_argument("--divergence", type=_positive_float, default=None, metavar="DELTA",
                    help="run a twin-divergence probe instead; JSON report")
    sp.add_argument("--collision-threshold", type=_positive_float,
                    default=nb.DEFAULT_COLLISION_THRESHOLD,
                    help="abort a trajectory run when unsoftened bodies pass this close")
    _add_common(sp)
    sp.set_defaults(func=cmd_nbody)

    sp = sub.add_parser("numerals", help="count cardinal mentions in a text")
    sp.add_argument("--in", dest="infile", required=True, metavar="FILE")
    _add_common(sp, plot=False)
    sp.set_defaults(func=cmd_numerals)

    sp = sub.add_parser("compare", help="rank agreement: corpus counts vs a priori mass")
    sp.add_argument("--freq", required=True, help="frequency JSON from `kolmo numerals`")
    sp.add_argument("--table", required=True, help="JSONL table from `kolmo apriori`")
    _add_common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("spurious", help="null cohort scan: every finding is spurious")
    sp.add_argument("--pop", type=_int_at_least(1), required=True)
    sp.add_argument("--groups", type=_int_at_least(1), required=True)
    sp.add_argument("--outcomes", type=_int_at_least(1), required=True)
    sp.add_argument("--alpha", type=_unit_float, default=0.05)
    sp.add_argument("--seed", type=_int_at_least(0), required=True)
    sp.add_argument("--test", choices=empiric.TESTS, default="midp")
    sp.add_argument("--rates", help="JSON array file: one base rate per outcome")
    _add_common(sp)
    sp.set_defaults(func=cmd_spurious)

    return p


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, format="kolmo %(levelname)s %(message)s", level=logging.INFO
    )
    args = build_parser().parse_args(argv)
    if getattr(args, "chunk_size", None) is None and hasattr(args, "default_chunk"):
        args.chunk_size = args.default_chunk
    try:
        args.func(args)
    except Validation as e:
        log.error("%s", e)
        return 2
    except CheckpointMismatch as e:
        log.error("%s", e)
        return 2
    except Exception as e:  # runtime failure: report, exit 1
        log.error("%s: %s", type(e).__name__, e)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
