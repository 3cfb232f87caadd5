"""Cache-aware mixed-criticality EDF analysis, allocation and experiments."""

from ._kernels import BACKEND
from .alloc import (allocate_H, allocate_L, ilp_feasibility_test, strategy_allocate,
                    vekb_exact, vekb_test, vt_test)
from .dbf import CoreVerdict, core_schedulable, dbf_hi, dbf_lo, demand
from .experiment import ExperimentConfig, run_experiment, weighted_schedulability
from .model import (HI, LO, Allocation, CacheConfig, LockdownCurve, Platform, Task, TaskSet,
                    load_taskset)
from .partition import Partition, partition
from .scaling import scale_deadlines
from .workload import GenParams, gen_taskset

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "HI", "LO", "Allocation", "CacheConfig", "CoreVerdict", "ExperimentConfig",
    "GenParams", "LockdownCurve", "Partition", "Platform", "Task", "TaskSet",
    "allocate_H", "allocate_L", "core_schedulable", "dbf_hi", "dbf_lo", "demand",
    "gen_taskset", "ilp_feasibility_test", "load_taskset", "partition", "run_experiment",
    "scale_deadlines", "strategy_allocate", "vekb_exact", "vekb_test", "vt_test",
    "weighted_schedulability",
]
