import time
from contextlib import contextmanager
from typing import Dict, Iterator


class Stopwatch:
    """
    A monotonic stopwatch measuring elapsed time, with optional named laps.

    Attributes:
        elapsed (float): The elapsed time in seconds.
        is_running (bool): A flag indicating whether the stopwatch is running
        laps (dict): Seconds spent in each named lap.
    """

    def __init__(self):
        """
        Create a stopped stopwatch with no laps recorded.
        """
        self.elapsed = 0.0
        self.is_running = False
        self.start_time = 0.0
        self.laps: Dict[str, float] = {}

    def __enter__(self) -> "Stopwatch":
        """
        Starts the stopwatch for the duration of a with-block.

        Returns:
            Stopwatch: The running stopwatch.
        """
        self.start()
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        """
        Stops the stopwatch when the with-block ends, also on an exception.
        """
        self.stop()

    def reset(self):
        """
        Stops the stopwatch and clears the elapsed time and every lap.
        """
        self.elapsed = 0.0
        self.is_running = False
        self.laps.clear()

    def start(self):
        """
        Records the start time; calling it on a running stopwatch does nothing.
        """
        if self.is_running:
            return
        self.is_running = True
        self.start_time = time.perf_counter()

    def stop(self):
        """
        Freezes the elapsed time; calling it on a stopped stopwatch does nothing.
        """
        if not self.is_running:
            return
        self.is_running = False
        self.elapsed = time.perf_counter() - self.start_time

    def elapsed_ms(self) -> float:
        """
        Gets the elapsed time in milliseconds without stopping the stopwatch.

        Returns:
            float: The elapsed time in milliseconds.
        """
        if self.is_running:
            return (time.perf_counter() - self.start_time) * 1000
        return self.elapsed * 1000

    @contextmanager
    def lap(self, name: str) -> Iterator[None]:
        """
        Times the enclosed block and adds it to the lap ``name``.

        Laps are independent of start/stop, so they can be taken on a stopped
        stopwatch and the same name can be timed repeatedly.
        """
        started = time.perf_counter()
        try:
            yield
        finally:
            self.laps[name] = self.laps.get(name, 0.0) + time.perf_counter() - started

    def lap_ms(self, name: str) -> float:
        """
        Gets the accumulated time of a lap in milliseconds.

        Returns:
            float: The lap's total, or 0.0 if it was never timed.
        """
        return self.laps.get(name, 0.0) * 1000
