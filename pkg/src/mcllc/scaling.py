"""Greedy L-mode deadline scaling for the H-tasks on one core.

Starting from unscaled deadlines, the H-mode test is run; while it fails at
some smallest interval length ``l*``, one H-task's L-mode deadline is cut by
one notch (default one time unit, less when that would pass ``C^L``). The
task picked is the one whose cut lowers the H-mode demand at ``l*`` the most
(ties: larger current deadline, then lower id) among those whose cut keeps
``D^L >= C^L(sigma^L)`` and the L-mode test passing.
"""

from __future__ import annotations

from typing import Optional, Sequence

from . import _kernels
from .dbf import UTILISATION_BOUND, CoreArrays, check_hi, check_lo
from .model import Allocation, Task


def _id_key(task_id):
    return (0, task_id, "") if isinstance(task_id, int) else (1, 0, str(task_id))


def scale_arrays(arrs: CoreArrays, notch: int = 1) -> bool:
    """Scale ``arrs.DL`` in place; True iff both modes end up schedulable."""
    if notch < 1:
        raise ValueError("notch must be >= 1")
    hi_idx = [i for i in range(len(arrs.ids)) if arrs.hi[i]]
    arrs.DL[hi_idx] = arrs.D[hi_idx]
    if check_lo(arrs) is not None:
        return False
    dbf = _kernels._dbf_hi_one
    while True:
        bad = check_hi(arrs)
        if bad is None:
            return True
        if bad == UTILISATION_BOUND:
            # H-mode utilisation does not depend on the L-mode deadlines
            return False
        ranked = []
        for i in hi_idx:
            dl = int(arrs.DL[i])
            step = min(notch, dl - int(arrs.CL[i]))
            if step < 1:
                continue
            params = (arrs.T[i], arrs.D[i])
            rest = (arrs.CL[i], arrs.CHL[i], arrs.CHH[i], bad)
            gain = dbf(*params, dl, *rest) - dbf(*params, dl - step, *rest)
            ranked.append((-int(gain), -dl, _id_key(arrs.ids[i]), i, step))
        ranked.sort()
        for *_, i, step in ranked:
            arrs.DL[i] -= step
            if check_lo(arrs) is None:
                break
            arrs.DL[i] += step
        else:
            return False


def scale_deadlines(tasks: Sequence[Task], alloc: Allocation,
                    notch: int = 1) -> Optional[Allocation]:
    """Return ``alloc`` with scaled L-mode deadlines for ``tasks``, or None.

    None means the greedy cuts never made the core schedulable.
    Invalid inputs (missing page counts, bad curves) raise instead.
    """
    if not tasks:
        return alloc
    arrs = CoreArrays.build(tasks, alloc.reset_deadlines())
    if not scale_arrays(arrs, notch):
        return None
    scaled = {arrs.ids[i]: int(arrs.DL[i]) for i in range(len(arrs.ids)) if arrs.hi[i]}
    return alloc.with_deadlines(scaled)
