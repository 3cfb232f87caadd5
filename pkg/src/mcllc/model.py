"""Task model for dual-criticality tasks whose WCETs depend on locked LLC pages.

Time is kept in integer units (1 unit = 1 ms). Utilisations are exact
``Fraction`` values; floats only appear when results are reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union

LO = "L"
HI = "H"

TaskId = Union[int, str]


class ModelError(ValueError):
    """Raised when a model object violates its invariants."""


def clamp(z, lo=None, hi=None):
    """Saturate ``z`` to ``[lo, hi]``; a bound given as None is unbounded."""
    if lo is not None and hi is not None and lo > hi:
        raise ValueError(f"empty clamp range [{lo}, {hi}]")
    if lo is not None and z < lo:
        return lo
    if hi is not None and z > hi:
        return hi
    return z


@dataclass(frozen=True)
class LockdownCurve:
    """WCET as a function of locked pages, dense over ``0..total_pages``."""

    wcet_by_pages: Tuple[int, ...]

    def __post_init__(self):
        values = tuple(int(v) for v in self.wcet_by_pages)
        if any(int(v) != v for v in self.wcet_by_pages):
            raise ModelError("curve values must be integer time units")
        object.__setattr__(self, "wcet_by_pages", values)
        if not values:
            raise ModelError("curve needs at least the zero-page point")
        if any(v <= 0 for v in values):
            raise ModelError("curve values must be positive")
        if any(b > a for a, b in zip(values, values[1:])):
            raise ModelError("curve must be non-increasing in locked pages")

    @property
    def total_pages(self) -> int:
        return len(self.wcet_by_pages) - 1

    def __call__(self, pages: int) -> int:
        if not 0 <= pages <= self.total_pages:
            raise ModelError(f"page count {pages} outside 0..{self.total_pages}")
        return self.wcet_by_pages[pages]

    def __len__(self) -> int:
        return len(self.wcet_by_pages)

    def __iter__(self) -> Iterator[int]:
        return iter(self.wcet_by_pages)

    def scaled(self, factor) -> "LockdownCurve":
        """Pointwise multiply, rounding down and keeping values >= 1."""
        f = Fraction(factor)
        return LockdownCurve(tuple(max(1, int(v * f)) for v in self.wcet_by_pages))


@dataclass(frozen=True)
class Task:
    id: TaskId
    period: int
    deadline: int
    criticality: str
    curve_L: LockdownCurve
    curve_H: Optional[LockdownCurve] = None

    def __post_init__(self):
        if self.criticality not in (LO, HI):
            raise ModelError(f"task {self.id}: criticality must be 'L' or 'H'")
        if self.period <= 0 or self.deadline <= 0:
            raise ModelError(f"task {self.id}: period and deadline must be positive")
        if self.deadline > self.period:
            raise ModelError(f"task {self.id}: constrained deadline required (D <= T)")
        if (self.curve_H is not None) != (self.criticality == HI):
            raise ModelError(f"task {self.id}: curve_H present iff criticality is H")
        if self.curve_H is not None and len(self.curve_H) != len(self.curve_L):
            raise ModelError(f"task {self.id}: L and H curves differ in length")

    @property
    def is_hi(self) -> bool:
        return self.criticality == HI

    def wcet(self, mode: str, pages: int) -> int:
        if mode == LO:
            return self.curve_L(pages)
        if mode == HI:
            if self.curve_H is None:
                raise ModelError(f"task {self.id}: no H-mode WCET for an L-task")
            return self.curve_H(pages)
        raise ModelError(f"unknown mode {mode!r}")


def utilisation(task: Task, mode: str, pages: int) -> Fraction:
    """Exact utilisation of ``task`` in ``mode`` with ``pages`` locked."""
    return Fraction(task.wcet(mode, pages), task.period)


@dataclass(frozen=True)
class CacheConfig:
    total_pages: int
    page_size: int = 4096

    def __post_init__(self):
        if self.total_pages < 0:
            raise ModelError("total_pages must be >= 0")

    @classmethod
    def from_size(cls, cache_bytes: int, page_size: int = 4096) -> "CacheConfig":
        return cls(cache_bytes // page_size, page_size)


@dataclass(frozen=True)
class Platform:
    cores: int = 1

    def __post_init__(self):
        if self.cores < 1:
            raise ModelError("platform needs at least one core")


@dataclass(frozen=True)
class TaskSet:
    tasks: Tuple[Task, ...]
    cache: CacheConfig
    platform: Platform = Platform()
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate task ids")
        for t in self.tasks:
            if t.curve_L.total_pages != self.cache.total_pages:
                raise ModelError(
                    f"task {t.id}: curve covers {t.curve_L.total_pages} pages, "
                    f"cache has {self.cache.total_pages}")

    def __len__(self) -> int:
        return len(self.tasks)

    def __iter__(self) -> Iterator[Task]:
        return iter(self.tasks)

    @property
    def hi_tasks(self) -> Tuple[Task, ...]:
        return tuple(t for t in self.tasks if t.is_hi)

    @property
    def lo_tasks(self) -> Tuple[Task, ...]:
        return tuple(t for t in self.tasks if not t.is_hi)

    def by_id(self, task_id: TaskId) -> Task:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def nominal_utilisation(self) -> Fraction:
        """Zero-page L-mode utilisation, summed over all tasks."""
        return sum((utilisation(t, LO, 0) for t in self.tasks), Fraction(0))


@dataclass(frozen=True)
class Allocation:
    """Locked pages per mode and scaled L-mode deadlines, keyed by task id.

    ``pages_H`` and ``deadlines_L`` only carry H-tasks. A missing deadline
    means the unscaled deadline is used.
    """

    pages_L: Mapping[TaskId, int]
    pages_H: Mapping[TaskId, int] = field(default_factory=dict)
    deadlines_L: Mapping[TaskId, int] = field(default_factory=dict)

    def pages(self, task: Task, mode: str) -> int:
        if mode == HI:
            return self.pages_H.get(task.id, self.pages_L[task.id])
        return self.pages_L[task.id]

    def deadline_L(self, task: Task) -> int:
        if not task.is_hi:
            return task.deadline
        return self.deadlines_L.get(task.id, task.deadline)

    def with_deadlines(self, deadlines: Mapping[TaskId, int]) -> "Allocation":
        merged = dict(self.deadlines_L)
        merged.update(deadlines)
        return replace(self, deadlines_L=merged)

    def reset_deadlines(self) -> "Allocation":
        return replace(self, deadlines_L={})

    def validate(self, taskset: TaskSet) -> None:
        total = taskset.cache.total_pages
        for t in taskset:
            if t.id not in self.pages_L:
                raise ModelError(f"task {t.id}: no L-mode page count")
            if not 0 <= self.pages_L[t.id] <= total:
                raise ModelError(f"task {t.id}: L-mode pages out of range")
        if sum(self.pages_L[t.id] for t in taskset) > total:
            raise ModelError("L-mode allocation exceeds cache capacity")
        for t in taskset.hi_tasks:
            sl, sh = self.pages_L[t.id], self.pages(t, HI)
            if not sl <= sh <= total:
                raise ModelError(f"task {t.id}: need pages_L <= pages_H <= total")
            dl = self.deadline_L(t)
            if not t.wcet(LO, sl) <= dl <= t.deadline:
                raise ModelError(f"task {t.id}: scaled deadline {dl} out of range")
        if sum(self.pages(t, HI) for t in taskset.hi_tasks) > total:
            raise ModelError("H-mode allocation exceeds cache capacity")


# -- JSON ---------------------------------------------------------------------

def task_to_dict(t: Task) -> Dict[str, Any]:
    return {
        "id": t.id,
        "period": t.period,
        "deadline": t.deadline,
        "criticality": t.criticality,
        "curve_L": list(t.curve_L),
        "curve_H": list(t.curve_H) if t.curve_H is not None else None,
    }


def task_from_dict(d: Mapping[str, Any]) -> Task:
    curve_H = d.get("curve_H")
    return Task(
        id=d["id"],
        period=int(d["period"]),
        deadline=int(d.get("deadline", d["period"])),
        criticality=d["criticality"],
        curve_L=LockdownCurve(tuple(d["curve_L"])),
        curve_H=LockdownCurve(tuple(curve_H)) if curve_H else None,
    )


def taskset_to_dict(ts: TaskSet) -> Dict[str, Any]:
    doc = {
        "cache": {"total_pages": ts.cache.total_pages, "page_size": ts.cache.page_size},
        "platform": {"cores": ts.platform.cores},
        "tasks": [task_to_dict(t) for t in ts],
    }
    if ts.metadata:
        doc["metadata"] = dict(ts.metadata)
    return doc


def taskset_from_dict(doc: Mapping[str, Any]) -> TaskSet:
    cache = doc["cache"]
    return TaskSet(
        tasks=tuple(task_from_dict(d) for d in doc["tasks"]),
        cache=CacheConfig(int(cache["total_pages"]), int(cache.get("page_size", 4096))),
        platform=Platform(int(doc.get("platform", {}).get("cores", 1))),
        metadata=dict(doc.get("metadata", {})),
    )


def allocation_to_dict(alloc: Allocation, taskset: TaskSet) -> Dict[str, Any]:
    rows = []
    for t in taskset:
        row = {"id": t.id, "pages_L": alloc.pages_L[t.id]}
        if t.is_hi:
            row["pages_H"] = alloc.pages(t, HI)
            row["scaled_deadline"] = alloc.deadline_L(t)
        rows.append(row)
    return {"tasks": rows}


def allocation_from_dict(doc: Mapping[str, Any]) -> Allocation:
    pages_L, pages_H, deadlines = {}, {}, {}
    for row in doc["tasks"]:
        pages_L[row["id"]] = int(row["pages_L"])
        if row.get("pages_H") is not None:
            pages_H[row["id"]] = int(row["pages_H"])
        if row.get("scaled_deadline") is not None:
            deadlines[row["id"]] = int(row["scaled_deadline"])
    return Allocation(pages_L, pages_H, deadlines)


def load_taskset(path) -> TaskSet:
    with open(path) as fh:
        return taskset_from_dict(json.load(fh))


def dump_json(doc: Mapping[str, Any], path=None) -> str:
    text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def tasks_by_id(tasks: Iterable[Task]) -> Dict[TaskId, Task]:
    return {t.id: t for t in tasks}


def as_taskset(tasks: Sequence[Task], cache: CacheConfig, platform: Platform = Platform()) -> TaskSet:
    return TaskSet(tuple(tasks), cache, platform)
