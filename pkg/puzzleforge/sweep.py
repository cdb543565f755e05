"""
Process-pool harness shared by every sweep: classification grids, selection sampling,
Ulam seeds and parapuzzle windows. Results come back in input order.
"""
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

from puzzleforge.utils.logging import contextual_log

T = TypeVar("T")
R = TypeVar("R")


def chunk_size(n_items: int, workers: int) -> int:
    """Deterministic chunking: about four chunks per worker."""
    return max(1, n_items // (4 * max(workers, 1)))


def run_pool(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    Map func over items with a ProcessPoolExecutor, preserving order.

    workers == 1 runs in-process, which keeps tests and small sweeps free of pickling.
    func must be a module-level callable when workers > 1.
    """
    batch: Sequence[T] = list(items)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(batch) <= 1:
        return [func(item) for item in batch]
    size = chunk_size(len(batch), workers)
    contextual_log('debug', f"🧩 [Sweep] {len(batch)} items on {workers} workers (chunksize {size})", operation="run_pool", params={"workers": workers, "items": len(batch)})
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, batch, chunksize=size))
