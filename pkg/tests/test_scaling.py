import itertools

import numpy as np
import pytest

from mcllc.dbf import core_schedulable
from mcllc.scaling import scale_arrays, scale_deadlines

from conftest import hi_alloc, hi_task, lo_task


def exhaustive_deadlines(tasks, alloc):
    """Every integer D^L vector for the H-tasks; first feasible one or None."""
    hi = [t for t in tasks if t.is_hi]
    ranges = [range(t.wcet("L", alloc.pages_L[t.id]), t.deadline + 1) for t in hi]
    for vec in itertools.product(*ranges):
        trial = alloc.with_deadlines({t.id: d for t, d in zip(hi, vec)})
        if core_schedulable(tasks, trial, exhaustive=True).schedulable:
            return vec
    return None


def test_schedulable_core_is_left_alone():
    easy = hi_task(0, CHL=2, CHH=2)
    alloc = hi_alloc([easy])
    out = scale_deadlines([easy], alloc)
    assert out is not None
    assert out.deadline_L(easy) == easy.deadline


def test_zero_carry_over_window_is_fixed_by_scaling():
    h, l = hi_task(0, T=10, CL=2, CHL=5, CHH=5), lo_task(1, T=20, C=3)
    alloc = hi_alloc([h, l])
    assert not core_schedulable([h, l], alloc, exhaustive=True).schedulable
    assert exhaustive_deadlines([h, l], alloc) is not None
    out = scale_deadlines([h, l], alloc)
    assert out is not None
    assert out.deadline_L(h) < h.deadline
    assert core_schedulable([h, l], out, exhaustive=True).schedulable


def test_no_slack_fails():
    h = hi_task(0, T=10, D=4, CL=4, CHL=6, CHH=6)
    assert scale_deadlines([h], hi_alloc([h])) is None


def test_empty_core_and_bad_notch(tau_r):
    task, alloc = tau_r
    assert scale_deadlines([], alloc) is alloc
    from mcllc.dbf import CoreArrays
    with pytest.raises(ValueError):
        scale_arrays(CoreArrays.build([task], alloc), notch=0)


def _random_instance(rng, n_hi):
    tasks = []
    for i in range(n_hi):
        T = int(rng.integers(4, 13))
        D = int(rng.integers(3, T + 1))
        CL = int(rng.integers(1, max(2, D // 3) + 1))
        CHL = int(rng.integers(CL, 3 * CL + 2))
        tasks.append(hi_task(i, T=T, D=D, CL=CL, CHL=CHL, CHH=int(rng.integers(1, CHL + 1))))
    if rng.random() < 0.5:
        T = int(rng.integers(4, 13))
        tasks.append(lo_task(n_hi, T=T, C=int(rng.integers(1, 3))))
    return tasks, hi_alloc(tasks)


def test_greedy_against_exhaustive_search():
    rng = np.random.default_rng(21)
    greedy_ok = exhaustive_ok = 0
    for _ in range(250):
        tasks, alloc = _random_instance(rng, int(rng.integers(1, 3)))
        out = scale_deadlines(tasks, alloc)
        found = exhaustive_deadlines(tasks, alloc)
        if out is not None:
            greedy_ok += 1
            # output is feasible and within bounds
            assert core_schedulable(tasks, out, exhaustive=True).schedulable
            for t in tasks:
                if t.is_hi:
                    assert t.wcet("L", 0) <= out.deadline_L(t) <= t.deadline
            assert found is not None
        exhaustive_ok += found is not None
    assert greedy_ok <= exhaustive_ok
    assert greedy_ok > 50
    print(f"greedy {greedy_ok} / exhaustive {exhaustive_ok} feasible")


@pytest.mark.parametrize("notch", [1, 2, 5])
def test_coarser_notch_still_certifies(notch):
    rng = np.random.default_rng(4)
    for _ in range(100):
        tasks, alloc = _random_instance(rng, 2)
        out = scale_deadlines(tasks, alloc, notch=notch)
        if out is not None:
            assert core_schedulable(tasks, out, exhaustive=True).schedulable


def test_deterministic():
    rng = np.random.default_rng(9)
    for _ in range(30):
        tasks, alloc = _random_instance(rng, 2)
        a, b = scale_deadlines(tasks, alloc), scale_deadlines(tasks, alloc)
        assert (a is None) == (b is None)
        if a is not None:
            assert a.deadlines_L == b.deadlines_L
