# Expose the stopwatch used for phase timings
from .stopwatch import Stopwatch
