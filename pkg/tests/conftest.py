from fractions import Fraction

import numpy as np
import pytest

from mcllc.model import HI, LO, Allocation, CacheConfig, LockdownCurve, Platform, Task, TaskSet


def hi_task(tid=0, T=10, D=None, CL=2, CHL=4, CHH=3):
    """H-task over a one-page cache: zero pages gives CHL, one page gives CHH."""
    D = T if D is None else D
    return Task(tid, T, D, HI, LockdownCurve((CL, CL)), LockdownCurve((CHL, CHH)))


def lo_task(tid=0, T=10, D=None, C=2, pages=1):
    D = T if D is None else D
    return Task(tid, T, D, LO, LockdownCurve((C,) * (pages + 1)))


def hi_alloc(tasks, deadlines=None):
    """sigma^L = 0 and sigma^H = 1 for H-tasks, sigma^L = 0 for L-tasks."""
    pages_L = {t.id: 0 for t in tasks}
    pages_H = {t.id: 1 for t in tasks if t.is_hi}
    return Allocation(pages_L, pages_H, dict(deadlines or {}))


def make_set(tasks, pages=1, cores=1):
    return TaskSet(tuple(tasks), CacheConfig(pages), Platform(cores))


def L(tid, T, curve):
    return Task(tid, T, T, LO, LockdownCurve(tuple(int(c) for c in curve)))


def H(tid, T, curve_L, curve_H):
    return Task(tid, T, T, HI, LockdownCurve(tuple(int(c) for c in curve_L)),
                LockdownCurve(tuple(int(c) for c in curve_H)))


def tset(tasks, pages, cores=1):
    return TaskSet(tuple(tasks), CacheConfig(pages), Platform(cores))


def util_rows(tasks, mode):
    return [[Fraction(t.wcet(mode, j), t.period) for j in range(t.curve_L.total_pages + 1)]
            for t in tasks]


def random_set(rng, n, width, cores=1):
    tasks = []
    n_hi = int(rng.integers(1, n + 1))
    for i in range(n):
        T = int(rng.integers(5, 21))
        start = int(rng.integers(1, T + 4))
        curve = np.sort(rng.integers(1, start + 1, size=width + 1))[::-1]
        curve[0] = start
        curve = np.minimum.accumulate(curve)
        if i < n_hi:
            ratio = int(rng.integers(1, 4))
            tasks.append(H(i, T, curve, curve * ratio))
        else:
            tasks.append(L(i, T, curve))
    return tset(tasks, width, cores)


@pytest.fixture
def tau_r():
    # T = D = 10, D^L = 6, C^L(sigma^L) = 2, C^H(sigma^L) = 4, C^H(sigma^H) = 3
    task = hi_task()
    return task, hi_alloc([task], {0: 6})


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
