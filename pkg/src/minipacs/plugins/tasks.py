"""Asynchronous task engine for indexing work.

A fixed pool of worker threads consumes a FIFO queue. Submitting returns
immediately with a handle whose snapshot() gives a consistent
(state, progress, report) triple at any time. Completed tasks are
retained until the process exits.
"""

from __future__ import annotations

import queue
import threading
import time
import uuid
from dataclasses import dataclass
from enum import Enum
from typing import Callable


class TaskState(Enum):
    QUEUED = "queued"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclass(frozen=True)
class Report:
    """Outcome of an indexing run.

    An item counts as indexed when at least one indexer processed it;
    otherwise it contributes one error entry, so
    files_indexed + len(errors) == files_seen always holds.
    """

    files_seen: int = 0
    files_indexed: int = 0
    errors: tuple[tuple[str, str], ...] = ()
    elapsed_ms: float = 0.0

    def __post_init__(self):
        if self.files_indexed + len(self.errors) != self.files_seen:
            raise ValueError("report arithmetic violated: indexed + errors != seen")

    def as_json(self) -> dict:
        return {
            "files_seen": self.files_seen,
            "files_indexed": self.files_indexed,
            "errors": [{"uri": u, "message": m} for u, m in self.errors],
            "elapsed_ms": self.elapsed_ms,
        }

    @staticmethod
    def merge(parts: "list[Report]", elapsed_ms: float) -> "Report":
        return Report(
            files_seen=sum(p.files_seen for p in parts),
            files_indexed=sum(p.files_indexed for p in parts),
            errors=tuple(e for p in parts for e in p.errors),
            elapsed_ms=elapsed_ms,
        )


@dataclass(frozen=True)
class TaskSnapshot:
    id: str
    state: TaskState
    progress: float
    report: Report | None

    def as_json(self) -> dict:
        return {
            "id": self.id,
            "state": self.state.value,
            "progress": self.progress,
            "report": self.report.as_json() if self.report else None,
        }


class _TaskRecord:
    def __init__(self, task_id: str):
        self.id = task_id
        self.lock = threading.Lock()
        self.state = TaskState.QUEUED
        self.progress = 0.0
        self.report: Report | None = None
        self.done = threading.Event()

    def snapshot(self) -> TaskSnapshot:
        with self.lock:
            return TaskSnapshot(self.id, self.state, self.progress, self.report)


class TaskHandle:
    """Caller-facing view of a submitted task."""

    def __init__(self, record: _TaskRecord):
        self._record = record

    @property
    def id(self) -> str:
        return self._record.id

    def snapshot(self) -> TaskSnapshot:
        return self._record.snapshot()

    def wait(self, timeout: float | None = None) -> Report | None:
        """Block until the task finishes; its report, or None on timeout."""
        if not self._record.done.wait(timeout):
            return None
        return self._record.snapshot().report


# Work functions receive a progress callback taking a fraction in [0, 1].
TaskFn = Callable[[Callable[[float], None]], Report]


class TaskEngine:
    def __init__(self, workers: int = 2):
        if workers < 1:
            raise ValueError("need at least one worker")
        self._queue: queue.Queue = queue.Queue()
        self._records: dict[str, _TaskRecord] = {}
        self._lock = threading.Lock()
        self._threads = [
            threading.Thread(target=self._run, name=f"minipacs-task-{i}", daemon=True)
            for i in range(workers)
        ]
        for t in self._threads:
            t.start()

    def submit(self, fn: TaskFn) -> TaskHandle:
        record = _TaskRecord(uuid.uuid4().hex)
        with self._lock:
            self._records[record.id] = record
        self._queue.put((record, fn))
        return TaskHandle(record)

    def status(self, task_id: str) -> TaskSnapshot | None:
        with self._lock:
            record = self._records.get(task_id)
        return record.snapshot() if record else None

    def all_tasks(self) -> list[TaskSnapshot]:
        with self._lock:
            records = list(self._records.values())
        return [r.snapshot() for r in records]

    def drain(self, timeout: float | None = None) -> bool:
        """Wait for every already-submitted task to finish."""
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._lock:
            records = list(self._records.values())
        for record in records:
            remaining = None if deadline is None else max(0.0, deadline - time.monotonic())
            if not record.done.wait(remaining):
                return False
        return True

    def _run(self) -> None:
        while True:
            record, fn = self._queue.get()
            with record.lock:
                record.state = TaskState.RUNNING

            def set_progress(fraction: float, record=record) -> None:
                # clamp below 1.0: full progress is reserved for the DONE
                # state so that progress == 1 holds iff the task finished
                with record.lock:
                    record.progress = min(max(fraction, 0.0), 0.999)

            try:
                report = fn(set_progress)
                with record.lock:
                    record.state = TaskState.DONE
                    record.progress = 1.0
                    record.report = report
            except Exception as exc:  # noqa: BLE001 - a task failure must not kill the worker
                with record.lock:
                    record.state = TaskState.FAILED
                    record.report = Report(
                        files_seen=1, files_indexed=0,
                        errors=(("task", f"{type(exc).__name__}: {exc}"),))
            finally:
                record.done.set()
                self._queue.task_done()
