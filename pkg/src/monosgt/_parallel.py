import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    """``MONO_SGT_THREADS`` caps parallelism; 0 or unset means one per CPU."""
    raw = os.environ.get("MONO_SGT_THREADS", "").strip()
    try:
        n = int(raw) if raw else 0
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def pmap(fn, items):
    """Order-preserving map; results come back in input order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
