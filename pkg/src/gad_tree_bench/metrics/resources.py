"""Wall-clock and peak-memory bookkeeping."""

import logging
import threading
import time
from types import TracebackType

import psutil

logger = logging.getLogger(__name__)

SAMPLE_INTERVAL_SECONDS = 0.01


def current_rss() -> int:
    """Resident set size of this process in bytes, or 0 when unavailable."""
    try:
        return int(psutil.Process().memory_info().rss)
    except (psutil.Error, OSError):
        return 0


class ResourceMonitor:
    """Context manager timing a block and sampling its peak resident memory.

    Memory is polled on a background thread, so very short allocation spikes
    can be missed. A disabled monitor records nothing and reports zeros.

    Example:
        with ResourceMonitor() as monitor:
            fit()
        monitor.seconds, monitor.peak_memory_bytes
    """

    def __init__(self, enabled: bool = True, interval: float = SAMPLE_INTERVAL_SECONDS):
        self.enabled = enabled
        self.interval = interval
        self.seconds = 0.0
        self.peak_memory_bytes = 0
        self._start = 0.0
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def _sample(self) -> None:
        while not self._stop.wait(self.interval):
            self.peak_memory_bytes = max(self.peak_memory_bytes, current_rss())

    def __enter__(self) -> "ResourceMonitor":
        if not self.enabled:
            return self
        self.peak_memory_bytes = current_rss()
        self._stop.clear()
        self._thread = threading.Thread(target=self._sample, name="resource-monitor", daemon=True)
        self._thread.start()
        self._start = time.perf_counter()
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        traceback: TracebackType | None,
    ) -> None:
        if not self.enabled:
            return
        self.seconds = time.perf_counter() - self._start
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
        self.peak_memory_bytes = max(self.peak_memory_bytes, current_rss())
        logger.debug("Block took %.3fs, peak RSS %d bytes", self.seconds, self.peak_memory_bytes)
