"""Bookkeeping for the acceptance suite: one PASS/FAIL line per criterion."""
import functools
import time

RESULTS = {}


def criterion(number, title):
    """Record the outcome of the wrapped test under ``number``."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
                RESULTS[number] = (False, title, msg, time.perf_counter() - start)
                raise
            RESULTS[number] = (True, title, detail or "", time.perf_counter() - start)

        return run

    return wrap


def lines():
    out = []
    for n in sorted(RESULTS):
        ok, title, detail, secs = RESULTS[n]
        tail = f" [{detail}]" if detail else ""
        out.append(f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {title} ({secs:.1f}s){tail}")
    return out
