"""Demand-bound functions and the per-core EDF test in both modes.

In L-mode every task on the core contributes the standard sporadic dbf with
its (possibly scaled) deadline. In H-mode only H-tasks run; each one's demand
is the larger of two execution patterns after the switch: as many full jobs
as fit behind a partially executed carry-over job, or a maximal carry-over
job at its earliest deadline followed by full jobs. The carry-over job keeps
the L-mode page count; jobs released after the switch use the H-mode count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .model import HI, LO, Allocation, Task, clamp

UTILISATION_BOUND = 0
# interval lengths past this are refused, which keeps every demand sum in int64
HORIZON_CAP = 1 << 40
"""``violating_length`` reported when a mode's utilisation is >= 1."""


@dataclass(frozen=True)
class DemandQuery:
    interval_length: int
    mode: str

    def __post_init__(self):
        if self.interval_length < 0:
            raise ValueError("interval length must be >= 0")
        if self.mode not in (LO, HI):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class CoreVerdict:
    schedulable: bool
    violating_length: Optional[int] = None
    violating_mode: Optional[str] = None

    def __post_init__(self):
        if self.schedulable != (self.violating_length is None):
            raise ValueError("violating_length must be set iff unschedulable")

    def __bool__(self) -> bool:
        return self.schedulable


# -- per-task demand ----------------------------------------------------------

def _hi_params(task: Task, alloc: Allocation):
    if not task.is_hi:
        raise ValueError(f"task {task.id} is not an H-task")
    sl = alloc.pages(task, LO)
    sh = alloc.pages(task, HI)
    return (task.period, task.deadline, alloc.deadline_L(task),
            task.wcet(LO, sl), task.wcet(HI, sl), task.wcet(HI, sh))


def dbf_lo(task: Task, pages_L: int, deadline_L: int, length: int) -> int:
    """Standard sporadic dbf with the L-mode WCET at ``pages_L`` pages."""
    c = task.wcet(LO, pages_L)
    return clamp(((length - deadline_L) // task.period + 1) * c, 0)


def full_hi(task: Task, alloc: Allocation, length: int) -> int:
    T, D, DL, _, CHL, CHH = _hi_params(task, alloc)
    k = (length - (D - DL)) // T
    return clamp(k + 1, 0, 1) * CHL + clamp(k, 0) * CHH


def done_hi(task: Task, alloc: Allocation, length: int) -> int:
    """Least work a carry-over job must have completed before the switch."""
    T, D, DL, CL, _, _ = _hi_params(task, alloc)
    r = length % T
    if D - DL <= r < D:
        return clamp(CL - r + D - DL, 0)
    return 0


def step_hi(task: Task, alloc: Allocation, length: int) -> int:
    T, D, DL, CL, CHL, CHH = _hi_params(task, alloc)
    k = (length - (D - DL + CL)) // T
    return clamp(k + 1, 0, 1) * CHL + clamp(k, 0) * CHH


def dbf_hi(task: Task, alloc: Allocation, length: int) -> int:
    # full - done can go negative when C^H(sigma^L) < C^L(sigma^L)
    carry = clamp(full_hi(task, alloc, length) - done_hi(task, alloc, length), 0)
    return max(step_hi(task, alloc, length), carry)


def dbf_std(period: int, deadline: int, wcet: int, length: int) -> int:
    return clamp(((length - deadline) // period + 1) * wcet, 0)


def demand(tasks: Sequence[Task], alloc: Allocation, query: DemandQuery) -> int:
    """Total demand of ``tasks`` over an interval in the given mode."""
    ell = query.interval_length
    if query.mode == LO:
        return sum(dbf_lo(t, alloc.pages(t, LO), alloc.deadline_L(t), ell) for t in tasks)
    return sum(dbf_hi(t, alloc, ell) for t in tasks if t.is_hi)


# -- per-core test ------------------------------------------------------------

@dataclass
class CoreArrays:
    """Kernel-ready parameters of the tasks on one core.

    ``DL`` is mutable so deadline scaling can adjust it in place.
    """

    ids: list
    hi: np.ndarray
    T: np.ndarray
    D: np.ndarray
    DL: np.ndarray
    CL: np.ndarray
    CHL: np.ndarray
    CHH: np.ndarray

    @classmethod
    def build(cls, tasks: Sequence[Task], alloc: Allocation) -> "CoreArrays":
        rows = []
        for t in tasks:
            sl = alloc.pages(t, LO)
            cl = t.wcet(LO, sl)
            if t.is_hi:
                chl, chh = t.wcet(HI, sl), t.wcet(HI, alloc.pages(t, HI))
            else:
                chl = chh = 0
            rows.append((t.is_hi, t.period, t.deadline, alloc.deadline_L(t), cl, chl, chh))
        arr = np.array(rows, dtype=np.int64).reshape(len(rows), 7)
        return cls([t.id for t in tasks], arr[:, 0].astype(bool),
                   *(np.ascontiguousarray(arr[:, k]) for k in range(1, 7)))

    def hi_view(self):
        m = self.hi
        return self.T[m], self.D[m], self.DL[m], self.CL[m], self.CHL[m], self.CHH[m]


def _lcm(values) -> int:
    out = 1
    for v in values:
        out = out * int(v) // math.gcd(out, int(v))
    return out


def horizon(periods, wcets, slack, offsets) -> Optional[int]:
    """Longest interval worth checking, or None when utilisation >= 1.

    Demand of each task is bounded by ``U_i * l + slack_i``, so no violation
    can occur at or beyond ``sum(slack) / (1 - U)``; demand is also periodic
    modulo the hyperperiod beyond the largest offset. A horizon above
    ``HORIZON_CAP`` is also reported as None, which can only make the test
    more pessimistic.
    """
    u = sum((Fraction(int(c), int(t)) for c, t in zip(wcets, periods)), Fraction(0))
    if u >= 1:
        return None
    if len(periods) == 0:
        return 0
    b = sum(int(s) for s in slack)
    by_util = math.floor(b / (1 - u))
    by_period = _lcm(periods) + int(max(offsets))
    h = min(by_util, by_period)
    return None if h > HORIZON_CAP else h


def lo_horizon(arrs: CoreArrays) -> Optional[int]:
    return horizon(arrs.T, arrs.CL, arrs.CL, arrs.DL)


def hi_horizon(arrs: CoreArrays) -> Optional[int]:
    T, D, _, _, CHL, CHH = arrs.hi_view()
    return horizon(T, CHH, CHL + CHH, D)


def check_lo(arrs: CoreArrays, exhaustive: bool = False) -> Optional[int]:
    """Smallest violating length in L-mode, UTILISATION_BOUND, or None."""
    h = lo_horizon(arrs)
    if h is None:
        return UTILISATION_BOUND
    scan = _kernels.scan_lo_full if exhaustive else _kernels.scan_lo_points
    hit = int(scan(arrs.T, arrs.DL, arrs.CL, h))
    return hit or None


def check_hi(arrs: CoreArrays, exhaustive: bool = False) -> Optional[int]:
    h = hi_horizon(arrs)
    if h is None:
        return UTILISATION_BOUND
    scan = _kernels.scan_hi_full if exhaustive else _kernels.scan_hi_points
    hit = int(scan(*arrs.hi_view(), h))
    return hit or None


def check_arrays(arrs: CoreArrays, exhaustive: bool = False) -> CoreVerdict:
    bad = check_lo(arrs, exhaustive)
    if bad is not None:
        return CoreVerdict(False, bad, LO)
    bad = check_hi(arrs, exhaustive)
    if bad is not None:
        return CoreVerdict(False, bad, HI)
    return CoreVerdict(True)


def core_schedulable(tasks: Sequence[Task], alloc: Allocation,
                     exhaustive: bool = False) -> CoreVerdict:
    """EDF test for one core in L-mode (scaled deadlines) then H-mode.

    The demand sum is compared with the interval length at every integer
    length up to the horizon (``exhaustive=True``) or at the breakpoints of
    the summed demand, which gives the same verdict and violating length.
    A mode whose utilisation on the core is >= 1 fails without a search and
    reports ``violating_length == UTILISATION_BOUND``.
    """
    if not tasks:
        return CoreVerdict(True)
    return check_arrays(CoreArrays.build(tasks, alloc), exhaustive)
