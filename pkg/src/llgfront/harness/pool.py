"""Process pool whose results never depend on the number of workers.

Each task is a pure function of an immutable descriptor; results are
re-ordered by task index before anything is written.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def run_tasks(fn, tasks: list, workers: int = 1) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as ex:
        return list(ex.map(fn, tasks))
