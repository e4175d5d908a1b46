# --- Python Standard Library Imports ---
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import wraps
from threading import Lock
from typing import Callable, Iterable, List, Sequence

# --- Third-Party Library Imports ---
import numpy as np

# --- Local Application Imports ---
from .conf import spectral_setting
from .exceptions import SpectralError

# Get a logger instance for this file.
logger = logging.getLogger(__name__)


class WorkerPool:
    """
    A thread-safe, lazily created pool of worker threads shared by every service.
    numpy releases the GIL inside its vectorised kernels, so threads are enough
    for the chunked Monte Carlo and grid evaluations.
    """

    def __init__(self):
        self._executor = None
        self._workers = None
        # Set by --workers; None falls back to SPECTRAL["WORKERS"].
        self.override = None
        # Guards creation and resizing of the executor.
        self.lock = Lock()

    def _get_executor(self, workers: int) -> ThreadPoolExecutor:
        with self.lock:
            if self._executor is None or self._workers != workers:
                if self._executor is not None:
                    self._executor.shutdown(wait=True)
                self._executor = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="ifs-worker")
                self._workers = workers
                logger.info(f"Worker pool started with {workers} threads.")
            return self._executor

    def configure(self, workers: int = None):
        with self.lock:
            self.override = workers

    def map(self, func: Callable, items: Sequence, workers: int = None) -> List:
        """Apply `func` to every item; results come back in item order."""
        workers = workers or self.override or spectral_setting("WORKERS")
        if workers <= 1 or len(items) <= 1:
            return [func(item) for item in items]
        return list(self._get_executor(workers).map(func, items))


# A single pool for the whole process.
worker_pool = WorkerPool()


def chunk_seeds(seed: int, n_chunks: int, *stream: int) -> List[np.random.SeedSequence]:
    """
    Derive one independent SeedSequence per chunk.
    The chunk index is part of the spawn key, so chunk i always gets the same
    stream no matter how many workers process the chunks.
    """
    return [np.random.SeedSequence(entropy=seed, spawn_key=(*stream, i)) for i in range(n_chunks)]


def split_count(total: int, chunk_size: int = None) -> List[int]:
    """Split `total` items into fixed-size chunks (the last one may be shorter)."""
    chunk_size = chunk_size or spectral_setting("CHUNK_SIZE")
    sizes = [chunk_size] * (total // chunk_size)
    if total % chunk_size:
        sizes.append(total % chunk_size)
    return sizes


def with_stage_timing(stage: str):
    """
    Decorator for service entry points: logs start, elapsed time and failures.
    Domain errors are logged and re-raised unchanged.
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            started = time.perf_counter()
            logger.info(f"Stage '{stage}' started.")
            try:
                result = func(*args, **kwargs)
            except SpectralError as e:
                logger.error(f"Stage '{stage}' failed: {e}", exc_info=True)
                raise
            logger.info(f"Stage '{stage}' finished in {time.perf_counter() - started:.3f}s.")
            return result

        return wrapper

    return decorator


# --- Exact number formatting ---

def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions, sympy Rationals and 'p/q' strings to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    if hasattr(value, "p") and hasattr(value, "q"):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, float) and value.is_integer():
        return Fraction(int(value))
    raise TypeError(f"cannot use {value!r} as an exact rational")


def format_fraction(value) -> str:
    """Render a rational as 'p/q' (or 'p' when integral)."""
    q = as_fraction(value)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_vector(vector: Iterable) -> List[str]:
    return [format_fraction(c) for c in vector]


def fraction_to_decimal(value, precision: int = None) -> str:
    """Fixed-precision decimal rendering used for CSV files."""
    precision = precision or spectral_setting("CSV_PRECISION")
    if isinstance(value, float):
        return f"{value:.{precision}g}"
    q = as_fraction(value)
    with localcontext() as ctx:
        ctx.prec = precision
        return str(Decimal(q.numerator) / Decimal(q.denominator))
