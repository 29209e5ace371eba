"""Parallel, resumable campaign runs.

Chunks are scored in worker processes and folded into the aggregate strictly
in chunk order, so the report is byte-identical for any worker count.  After
every fold the driver writes a sidecar holding the partial aggregate, then
atomically replaces the checkpoint line ``campaign-id, chunk-cursor, digest``
that points at it.  A crash between the two writes leaves the old checkpoint
and its sidecar intact, so no chunk can be counted twice.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .verify import (
    CAMPAIGNS,
    CampaignResult,
    campaign_plan,
    chunk_count,
    empty_result,
    evaluate_chunk,
)

__all__ = ["CheckpointError", "Checkpoint", "RunOutcome", "campaign_id", "read_checkpoint", "run"]


class CheckpointError(Exception):
    """The checkpoint cannot be used for this run."""


@dataclass(frozen=True)
class Checkpoint:
    campaign_id: str
    cursor: int
    digest: str

    def line(self) -> str:
        return f"{self.campaign_id}, {self.cursor}, {self.digest}\n"

    @classmethod
    def parse(cls, text: str) -> "Checkpoint":
        parts = [p.strip() for p in text.strip().split(",")]
        if len(parts) != 3 or not parts[1].isdigit():
            raise CheckpointError(f"malformed checkpoint: {text.strip()!r}")
        return cls(parts[0], int(parts[1]), parts[2])


@dataclass
class RunOutcome:
    result: CampaignResult
    complete: bool
    cursor: int
    total: int


def campaign_id(name: str, n: int, k: int, chunk_size: int = 1) -> str:
    plan = campaign_plan(n, k, chunk_size)
    h = hashlib.sha256(f"{name}|{plan.key()}".encode()).hexdigest()[:12]
    return f"{name}/n{n}/k{k}/{h}"


def read_checkpoint(path) -> Checkpoint | None:
    path = Path(path)
    if not path.exists():
        return None
    return Checkpoint.parse(path.read_text())


def _state_path(path: Path, cursor: int) -> Path:
    return path.with_name(f"{path.name}.state.{cursor}.json")


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _save(path: Path, cid: str, cursor: int, result: CampaignResult, stream_offset: int, previous: int | None):
    state = json.dumps(
        {"campaign_id": cid, "cursor": cursor, "stream_offset": stream_offset, "result": result.to_dict()},
        sort_keys=True,
    ).encode()
    _write_atomic(_state_path(path, cursor), state)
    digest = hashlib.sha256(state).hexdigest()
    _write_atomic(path, Checkpoint(cid, cursor, digest).line().encode())
    if previous is not None and previous != cursor:
        _state_path(path, previous).unlink(missing_ok=True)


def _load(path: Path, cid: str) -> tuple[int, CampaignResult, int]:
    ck = read_checkpoint(path)
    if ck.campaign_id != cid:
        raise CheckpointError(f"checkpoint belongs to {ck.campaign_id}, not {cid}; refusing to resume")
    spath = _state_path(path, ck.cursor)
    try:
        state = spath.read_bytes()
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint state {spath} is missing") from None
    if hashlib.sha256(state).hexdigest() != ck.digest:
        raise CheckpointError(f"checkpoint state {spath} does not match its digest")
    d = json.loads(state)
    return ck.cursor, CampaignResult.from_dict(d["result"]), d["stream_offset"]


def _format(rec: dict, fmt: str, header: bool) -> str:
    if fmt == "jsonl":
        return json.dumps(rec, sort_keys=True) + "\n"
    keys = sorted(rec["props"])
    out = ""
    if header:
        out = "\t".join(["a"] + keys) + "\n"
    return out + "\t".join([rec["a"]] + [str(rec["props"][k]) for k in keys]) + "\n"


def _pool(workers: int) -> ProcessPoolExecutor:
    methods = multiprocessing.get_all_start_methods()
    ctx = multiprocessing.get_context("fork" if "fork" in methods else None)
    return ProcessPoolExecutor(max_workers=workers, mp_context=ctx)


def run(
    name: str,
    n: int,
    k: int,
    workers: int = 1,
    chunk_size: int = 1,
    checkpoint=None,
    stream=None,
    stream_format: str = "jsonl",
    stop_after: int | None = None,
    progress=None,
) -> RunOutcome:
    """Run (or resume) a campaign.

    ``stream`` receives one record per automaton, in generation order.
    ``stop_after`` folds at most that many new chunks and then returns an
    incomplete outcome, which is how interruptions are simulated.
    """
    if name not in CAMPAIGNS:
        raise ValueError(f"unknown campaign {name!r}; choose from {', '.join(CAMPAIGNS)}")
    if workers < 1:
        raise ValueError("workers must be positive")
    if stream_format not in ("jsonl", "tsv"):
        raise ValueError("stream format must be jsonl or tsv")
    plan = campaign_plan(n, k, chunk_size)
    total = chunk_count(plan)
    cid = campaign_id(name, n, k, chunk_size)

    cursor, result, offset = 0, empty_result(name, n, k), 0
    ck_path = Path(checkpoint) if checkpoint is not None else None
    if ck_path is not None and ck_path.exists():
        cursor, result, offset = _load(ck_path, cid)

    out = None
    if stream is not None:
        spath = Path(stream)
        if cursor > 0:
            if not spath.exists() or spath.stat().st_size < offset:
                raise CheckpointError(f"stream {spath} is shorter than the checkpoint expects")
            out = open(spath, "r+b")
            out.truncate(offset)
            out.seek(offset)
        else:
            out = open(spath, "wb")

    want_records = out is not None
    budget = total - cursor if stop_after is None else min(total - cursor, stop_after)
    end = cursor + budget
    previous = cursor if cursor > 0 else None

    def fold(index, payload):
        nonlocal result, offset, previous
        if want_records:
            part, recs = payload
            text = "".join(_format(r, stream_format, offset == 0 and i == 0) for i, r in enumerate(recs))
            data = text.encode()
            out.write(data)
            out.flush()
            offset += len(data)
        else:
            part = payload
        result = result.merge(part)
        if ck_path is not None:
            _save(ck_path, cid, index + 1, result, offset, previous)
            previous = index + 1
        if progress is not None:
            progress(index + 1, total)

    try:
        if workers == 1:
            for i in range(cursor, end):
                fold(i, evaluate_chunk(name, plan, i, want_records))
        else:
            window = 4 * workers
            with _pool(workers) as pool:
                pending = {}
                nxt = cursor
                for i in range(cursor, end):
                    while nxt < end and nxt - i < window:
                        pending[nxt] = pool.submit(evaluate_chunk, name, plan, nxt, want_records)
                        nxt += 1
                    fold(i, pending.pop(i).result())
    finally:
        if out is not None:
            out.close()
    return RunOutcome(result, end == total, end, total)
