"""Worker-thread driver for the nogil kernels."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

__all__ = ["WorkerPool"]


class WorkerPool:
    """A fixed set of worker threads that run one kernel call each.

    The kernels release the GIL, so plain Python threads give real
    parallelism.  With a single thread the call runs inline on the caller,
    which keeps single-threaded execution strictly deterministic.
    """

    def __init__(self, threads: int):
        if threads < 1:
            raise ValueError("threads must be >= 1")
        self.threads = threads
        self._pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def run(self, fn) -> list:
        """Invoke ``fn(t)`` for every worker id ``t``; results in id order."""
        if self._pool is None:
            return [fn(0)]
        return list(self._pool.map(fn, range(self.threads)))

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
