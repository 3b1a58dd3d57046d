"""Checkpointed, rate-limited, bounded-concurrency batch execution.

The runner owns everything the corpus-scale operations share: retry
classification, a sliding-window request limiter, bounded in-flight workers,
and an append-only checkpoint so reruns skip completed items.

Determinism contract: results and checkpoint lines are emitted in input
order regardless of completion order, so a batch over a deterministic backend
produces byte-identical artifacts at any ``max_in_flight``.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Generic, Sequence, TypeVar

from .errors import (
    BackendError,
    CheckpointCorrupt,
    LengthMismatch,
    MalformedArguments,
    NotAFunctionCall,
    RetriesExhausted,
    ScoreNotFound,
    XlinstructError,
)
from .jsonl import append_jsonl_line, read_jsonl

logger = logging.getLogger(__name__)

ItemT = TypeVar("ItemT")
ResultT = TypeVar("ResultT")

# Model nondeterminism: retry immediately with a fresh call.
RETRY_IMMEDIATE = (LengthMismatch, NotAFunctionCall, ScoreNotFound)
# Transient transport or formatting trouble: retry with exponential backoff.
RETRY_BACKOFF = (MalformedArguments, BackendError)


class RateLimiter:
    """Sliding-window limiter on requests per minute; acquire() blocks.

    ``window_seconds`` exists so tests can shrink the window; production use
    keeps the default 60s.
    """

    def __init__(self, requests_per_minute: int | None, window_seconds: float = 60.0):
        if requests_per_minute is not None and requests_per_minute <= 0:
            raise ValueError("requests_per_minute must be positive or None")
        self.requests_per_minute = requests_per_minute
        self.window_seconds = window_seconds
        self._lock = threading.Lock()
        self._stamps: deque[float] = deque()

    def acquire(self) -> None:
        if self.requests_per_minute is None:
            return
        while True:
            with self._lock:
                now = time.monotonic()
                while self._stamps and now - self._stamps[0] >= self.window_seconds:
                    self._stamps.popleft()
                if len(self._stamps) < self.requests_per_minute:
                    self._stamps.append(now)
                    return
                wait = self.window_seconds - (now - self._stamps[0])
            time.sleep(max(min(wait, 0.05), 0.001))


def call_with_retries(
    call: Callable[[], ResultT],
    *,
    max_retries: int,
    backoff_base: float = 0.5,
    backoff_cap: float = 8.0,
) -> tuple[ResultT, int]:
    """Run ``call`` up to 1 + max_retries times; return (result, attempts).

    Errors in RETRY_IMMEDIATE get a fresh call straight away; errors in
    RETRY_BACKOFF sleep exponentially first; anything else propagates at once.
    Raises :class:`RetriesExhausted` carrying the last error.
    """
    last_error: Exception | None = None
    for attempt in range(1, max_retries + 2):
        try:
            return call(), attempt
        except RETRY_IMMEDIATE as exc:
            last_error = exc
        except RETRY_BACKOFF as exc:
            last_error = exc
            if attempt <= max_retries and backoff_base > 0:
                time.sleep(min(backoff_base * 2 ** (attempt - 1), backoff_cap))
    assert last_error is not None
    raise RetriesExhausted(last_error, max_retries + 1)


@dataclass(frozen=True)
class BatchFailure:
    """One item that exhausted its retries or failed fatally."""

    item_id: str
    error: str
    detail: str
    attempts: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "item_id": self.item_id,
            "error": self.error,
            "detail": self.detail,
            "attempts": self.attempts,
        }


@dataclass
class BatchReport(Generic[ResultT]):
    """Completed results in input order plus failures and resume stats."""

    results: list[ResultT]
    failures: list[BatchFailure]
    reused: int
    computed: int


def _load_checkpoint(path: Path, id_field: str) -> dict[str, dict[str, Any]]:
    records: dict[str, dict[str, Any]] = {}
    if not path.exists():
        return records
    for line_no, raw in read_jsonl(path):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise CheckpointCorrupt(line_no, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict) or id_field not in obj:
            raise CheckpointCorrupt(line_no, f"record lacks {id_field!r}")
        obj["_line_no"] = line_no
        records[str(obj[id_field])] = obj
    return records


def run_checkpointed(
    items: Sequence[ItemT],
    *,
    item_id: Callable[[ItemT], str],
    worker: Callable[[ItemT], ResultT],
    encode: Callable[[ItemT, ResultT], dict[str, Any]],
    decode: Callable[[ItemT, dict[str, Any]], ResultT],
    checkpoint_path: str | Path | None = None,
    id_field: str = "source_id",
    max_in_flight: int = 1,
) -> BatchReport[ResultT]:
    """Run ``worker`` over ``items`` with checkpoint/resume semantics.

    Items whose id already appears in the checkpoint are rehydrated through
    ``decode`` without calling the worker. Newly computed results are appended
    to the checkpoint one line at a time, in input order, each line flushed
    before the next is started, so an interrupted run leaves a clean replayable
    file. Worker failures are collected, never raised; the batch continues.
    """
    if max_in_flight < 1:
        raise ValueError("max_in_flight must be >= 1")

    completed: dict[str, dict[str, Any]] = {}
    if checkpoint_path is not None:
        checkpoint_path = Path(checkpoint_path)
        checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
        completed = _load_checkpoint(checkpoint_path, id_field)

    results: list[ResultT] = []
    failures: list[BatchFailure] = []
    reused = 0
    computed = 0

    pending_indices = []
    rehydrated: dict[int, ResultT] = {}
    for index, item in enumerate(items):
        record = completed.get(item_id(item))
        if record is not None:
            line_no = record.get("_line_no", 0)
            try:
                rehydrated[index] = decode(item, record)
            except CheckpointCorrupt:
                raise
            except XlinstructError as exc:
                raise CheckpointCorrupt(line_no, str(exc)) from exc
            reused += 1
        else:
            pending_indices.append(index)

    futures: dict[int, Future[ResultT]] = {}
    executor = ThreadPoolExecutor(max_workers=max_in_flight)
    try:
        for index in pending_indices:
            futures[index] = executor.submit(worker, items[index])

        # Collect strictly in input order: this restores output order and
        # makes checkpoint lines land in corpus order at any concurrency.
        for index, item in enumerate(items):
            if index in rehydrated:
                results.append(rehydrated[index])
                continue
            try:
                result = futures[index].result()
            except Exception as exc:
                attempts = exc.attempts if isinstance(exc, RetriesExhausted) else 1
                failures.append(
                    BatchFailure(
                        item_id=item_id(item),
                        error=type(exc).__name__,
                        detail=str(exc),
                        attempts=attempts,
                    )
                )
                logger.warning("item %s failed: %s", item_id(item), exc)
                continue
            computed += 1
            results.append(result)
            if checkpoint_path is not None:
                append_jsonl_line(checkpoint_path, encode(item, result))
    except BaseException:
        # Interrupted (or crashed) mid-batch: stop handing out work so the
        # checkpoint stays a clean record of what finished.
        executor.shutdown(wait=False, cancel_futures=True)
        raise
    executor.shutdown(wait=True)

    return BatchReport(results=results, failures=failures, reused=reused, computed=computed)
