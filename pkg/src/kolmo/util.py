"""Small shared helpers: atomic file writes, canonical JSON, chunked
work with deterministic merging, optional process-pool fan-out, and
checkpoint/resume."""

from __future__ import annotations

import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from typing import Callable


def stable_json(obj) -> str:
    """Canonical JSON: sorted keys, fixed separators, newline-terminated."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    """Write text to path via a temp file in the same directory + rename."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class CheckpointMismatch(ValueError):
    """Checkpoint on disk does not match the requested computation."""


def run_chunked(
    items: list,
    chunk_size: int,
    process: Callable[[list], dict[int, int]],
    merge: Callable[[dict[int, int], dict[int, int]], None],
    workers: int = 1,
    checkpoint_path: str | None = None,
    meta: dict | None = None,
    on_checkpoint: Callable[[dict[int, int]], None] | None = None,
) -> dict[int, int]:
    """Process items in fixed-size chunks, merging results in chunk order.

    The chunk partition depends only on chunk_size, never on the worker
    count, and every merge below is order-free, so the result is
    identical for any workers value.  With a checkpoint path, progress
    is persisted after each chunk and a matching run resumes where it
    left off; a checkpoint written for different parameters is refused.
    on_checkpoint, when given, is called with the accumulator at every
    checkpoint (including resume), letting callers assert invariants
    mid-run.
    """
    meta = dict(meta or {})
    meta["chunk_size"] = chunk_size
    meta["total_items"] = len(items)
    chunks = [items[i : i + chunk_size] for i in range(0, len(items), chunk_size)]
    acc: dict[int, int] = {}
    start = 0
    if checkpoint_path and os.path.exists(checkpoint_path):
        with open(checkpoint_path) as fh:
            state = json.load(fh)
        if state.get("meta") != meta:
            raise CheckpointMismatch(
                f"checkpoint at {checkpoint_path} was written for {state.get('meta')}, "
                f"current run is {meta}"
            )
        acc = {int(k): v for k, v in state["acc"].items()}
        start = state["next_chunk"]
        if on_checkpoint:
            on_checkpoint(acc)

    def save(next_chunk: int):
        if checkpoint_path:
            state = {
                "schema": "kolmo.checkpoint/1",
                "meta": meta,
                "next_chunk": next_chunk,
                "acc": {str(k): v for k, v in acc.items()},
            }
            atomic_write_text(checkpoint_path, stable_json(state))
        if on_checkpoint:
            on_checkpoint(acc)

    todo = chunks[start:]
    if workers > 1 and todo:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, result in enumerate(pool.map(process, todo)):
                merge(acc, result)
                save(start + i + 1)
    else:
        for i, chunk in enumerate(todo):
            merge(acc, process(chunk))
            save(start + i + 1)
    return acc


def merge_add(acc: dict[int, int], part: dict[int, int]) -> None:
    for k, v in part.items():
        acc[k] = acc.get(k, 0) + v


def merge_min(acc: dict[int, int], part: dict[int, int]) -> None:
    for k, v in part.items():
        if k not in acc or v < acc[k]:
            acc[k] = v
