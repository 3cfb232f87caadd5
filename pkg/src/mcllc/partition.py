"""First-fit task-to-core assignment certified by deadline scaling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .dbf import CoreArrays, CoreVerdict, core_schedulable
from .model import Allocation, Platform, Task, TaskId, TaskSet
from .scaling import _id_key, scale_arrays


@dataclass(frozen=True)
class Partition:
    cores: Tuple[Tuple[TaskId, ...], ...]
    allocation: Allocation
    failed_task: Optional[TaskId] = None

    @property
    def success(self) -> bool:
        return self.failed_task is None

    def __bool__(self) -> bool:
        return self.success

    def to_dict(self) -> Dict:
        return {
            "schedulable": self.success,
            "failed_task": self.failed_task,
            "cores": [
                {"core": k, "tasks": list(ids),
                 "scaled_deadlines": {str(i): self.allocation.deadlines_L[i]
                                      for i in ids if i in self.allocation.deadlines_L}}
                for k, ids in enumerate(self.cores)
            ],
        }


def time_resolution(taskset: TaskSet) -> int:
    """Time units per millisecond recorded by the generator (1 if absent)."""
    return int(taskset.metadata.get("ticks_per_ms", 1))


def placement_order(tasks: Sequence[Task]) -> List[Task]:
    """H-tasks first, then by decreasing deadline, then by id."""
    return sorted(tasks, key=lambda t: (not t.is_hi, -t.deadline, _id_key(t.id)))


def partition(taskset: TaskSet, alloc: Allocation, platform: Platform = None,
              notch: int = None) -> Partition:
    """Place each task on the first core that stays schedulable with it.

    Deadline scaling is rerun from unscaled deadlines for the whole core on
    every tentative placement. On failure, ``failed_task`` names the first
    task that fits nowhere. ``notch`` defaults to one millisecond when the
    task set records its time resolution, else to one time unit.
    """
    if notch is None:
        notch = time_resolution(taskset)
    cores = (platform or taskset.platform).cores
    alloc = alloc.reset_deadlines()
    bins: List[List[Task]] = [[] for _ in range(cores)]
    deadlines: Dict[TaskId, int] = {}
    for task in placement_order(taskset.tasks):
        for members in bins:
            trial = members + [task]
            arrs = CoreArrays.build(trial, alloc)
            if scale_arrays(arrs, notch):
                members.append(task)
                for i, tid in enumerate(arrs.ids):
                    if arrs.hi[i]:
                        deadlines[tid] = int(arrs.DL[i])
                break
        else:
            return Partition(tuple(tuple(t.id for t in b) for b in bins),
                             alloc.with_deadlines(deadlines), task.id)
    return Partition(tuple(tuple(t.id for t in b) for b in bins), alloc.with_deadlines(deadlines))


def verify(taskset: TaskSet, part: Partition, exhaustive: bool = False) -> List[CoreVerdict]:
    """Re-run the core test on every core of a partition with its final deadlines."""
    return [core_schedulable([taskset.by_id(i) for i in ids], part.allocation, exhaustive)
            for ids in part.cores]
