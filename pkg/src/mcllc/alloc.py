"""Cache-page allocation for both modes, and the necessary-condition tests.

Choosing one page count per task under a page budget while minimising the
summed utilisation is a multiple-choice knapsack. It is solved exactly by a
table over (task, pages used) on integer-scaled utilisations: every
``C_i(j) / T_i`` is multiplied by the lcm of the periods involved, so sums and
comparisons are exact. Options with per-task utilisation above 1 are removed
up front; the total-utilisation cap is checked on the optimum.

Ties between equal-utilisation solutions go to fewer total pages, then to the
lexicographically smallest page vector in task order.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import _kernels
from .model import HI, LO, Allocation, CacheConfig, Platform, Task, TaskId, TaskSet

STRATEGIES = ("Z", "E", "N", "Manberg")
_ALIASES = {"Z-Ekb": "Z", "E-Ekb": "E", "N-Ekb": "N", "M": "Manberg", "manberg": "Manberg"}

# keep the int64 table clear of overflow; larger problems use python ints
_INT64_LIMIT = 1 << 58


@dataclass(frozen=True)
class StageResult:
    pages: Dict[TaskId, int]
    utilisation: Fraction


def _lcm(values) -> int:
    out = 1
    for v in values:
        out = out * v // math.gcd(out, v)
    return out


def _context(taskset, cache, platform):
    return (cache or taskset.cache).total_pages, (platform or taskset.platform).cores


def solve_mckp(costs: Sequence[Sequence[Optional[int]]], width: int):
    """Minimise the summed cost choosing one column per row, within ``width``.

    ``costs[i][j]`` is the cost of giving row ``i`` exactly ``j`` pages, or
    None if that choice is not allowed. Returns ``(choices, total)`` or None
    when no choice vector fits.
    """
    n = len(costs)
    if n == 0:
        return [], 0
    top = max((c for row in costs for c in row if c is not None), default=0)
    small = top * (n + 1) < _INT64_LIMIT
    inf = _kernels.INF if small else (top + 1) * (n + 1) + _kernels.INF
    table = np.full((n, width + 1), inf, dtype=np.int64 if small else object)
    for i, row in enumerate(costs):
        for j, c in enumerate(row[: width + 1]):
            if c is not None:
                table[i, j] = c
    g = _kernels.mckp_suffix(table, width, inf)
    first = g[0]
    best_w = min(range(width + 1), key=lambda w: (first[w], w))
    total = first[best_w]
    if total >= inf:
        return None
    choices = []
    w = best_w
    for i in range(n):
        target = g[i, w]
        for j in range(w + 1):
            c = table[i, j]
            rest = g[i + 1, w - j]
            if c < inf and rest < inf and c + rest == target:
                choices.append(j)
                w -= j
                break
        else:  # pragma: no cover - table is self-consistent
            raise AssertionError("knapsack reconstruction failed")
    return choices, int(total)


def _stage(tasks: Sequence[Task], mode: str, width: int, cores: int,
           lower: Optional[Dict[TaskId, int]] = None) -> Optional[StageResult]:
    if not tasks:
        return StageResult({}, Fraction(0))
    scale = _lcm([t.period for t in tasks])
    costs = []
    for t in tasks:
        lo = lower.get(t.id, 0) if lower else 0
        mult = scale // t.period
        row = []
        for j in range(width + 1):
            c = t.wcet(mode, j)
            row.append(c * mult if j >= lo and c <= t.period else None)
        costs.append(row)
    solved = solve_mckp(costs, width)
    if solved is None:
        return None
    choices, total = solved
    util = Fraction(total, scale)
    if util > cores:
        return None
    return StageResult({t.id: j for t, j in zip(tasks, choices)}, util)


def allocate_L(taskset: TaskSet, cache: CacheConfig = None,
               platform: Platform = None) -> Optional[StageResult]:
    """Stage 1: L-mode page counts minimising total L-mode utilisation."""
    width, cores = _context(taskset, cache, platform)
    return _stage(taskset.tasks, LO, width, cores)


def allocate_H(taskset: TaskSet, pages_L: Dict[TaskId, int], cache: CacheConfig = None,
               platform: Platform = None) -> Optional[StageResult]:
    """Stage 2: H-mode page counts for H-tasks, never below their L-mode count.

    Pages of the idled L-tasks are free again, so the budget is the whole cache.
    """
    width, cores = _context(taskset, cache, platform)
    return _stage(taskset.hi_tasks, HI, width, cores, lower=pages_L)


def vt_test(taskset: TaskSet, cache: CacheConfig = None, platform: Platform = None) -> bool:
    """Necessary condition: each mode fits with every task owning the whole cache."""
    width, cores = _context(taskset, cache, platform)
    u_lo = [Fraction(t.wcet(LO, width), t.period) for t in taskset]
    u_hi = [Fraction(t.wcet(HI, width), t.period) for t in taskset.hi_tasks]
    return (all(u <= 1 for u in u_lo) and all(u <= 1 for u in u_hi)
            and sum(u_lo) <= cores and sum(u_hi) <= cores)


def ilp_feasibility_test(taskset: TaskSet, cache: CacheConfig = None,
                         platform: Platform = None) -> bool:
    """True iff both allocation stages succeed, the second on the first's output."""
    first = allocate_L(taskset, cache, platform)
    if first is None:
        return False
    return allocate_H(taskset, first.pages, cache, platform) is not None


def _fits(taskset: TaskSet, width: int, cores: int, pages_L, pages_H) -> bool:
    if sum(pages_L[t.id] for t in taskset) > width:
        return False
    if sum(pages_H[t.id] for t in taskset.hi_tasks) > width:
        return False
    u_lo = Fraction(0)
    for t in taskset:
        c = t.wcet(LO, pages_L[t.id])
        if c > t.period:
            return False
        u_lo += Fraction(c, t.period)
    u_hi = Fraction(0)
    for t in taskset.hi_tasks:
        if pages_H[t.id] < pages_L[t.id]:
            return False
        c = t.wcet(HI, pages_H[t.id])
        if c > t.period:
            return False
        u_hi += Fraction(c, t.period)
    return u_lo <= cores and u_hi <= cores


def ilp_existential(taskset: TaskSet, cache: CacheConfig = None, platform: Platform = None,
                    same_pages: bool = False, limit: int = 2_000_000) -> bool:
    """Brute-force form of the allocation-existence condition, for tiny inputs.

    With ``same_pages`` the H-mode page count is pinned to the L-mode one.
    """
    width, cores = _context(taskset, cache, platform)
    hi = taskset.hi_tasks
    space = (width + 1) ** (len(taskset) + (0 if same_pages else len(hi)))
    if space > limit:
        raise ValueError(f"search space {space} exceeds limit {limit}")
    for vec_L in itertools.product(range(width + 1), repeat=len(taskset)):
        if sum(vec_L) > width:
            continue
        pages_L = {t.id: j for t, j in zip(taskset, vec_L)}
        if same_pages:
            if _fits(taskset, width, cores, pages_L, pages_L):
                return True
            continue
        for vec_H in itertools.product(range(width + 1), repeat=len(hi)):
            pages_H = {t.id: j for t, j in zip(hi, vec_H)}
            if _fits(taskset, width, cores, pages_L, pages_H):
                return True
    return False


# -- V-Ekb: allocation existence without redistribution -----------------------

def _pareto_insert(stair: List[tuple], a: int, b: int) -> bool:
    # stair: (a, b) sorted by a ascending with b strictly descending
    k = bisect_right(stair, (a, math.inf))
    if k and stair[k - 1][1] <= b:
        return False
    start = end = bisect_left(stair, (a, -math.inf))
    while end < len(stair) and stair[end][1] >= b:
        end += 1
    stair[start:end] = [(a, b)]
    return True


def _prune(states):
    states.sort()
    kept, stair = [], []
    for w, a, b in states:
        if _pareto_insert(stair, a, b):
            kept.append((w, a, b))
    return kept


def combined_allocate(taskset: TaskSet, cache: CacheConfig = None,
                      platform: Platform = None) -> Optional[StageResult]:
    """L-mode optimum over options whose L and (for H-tasks) H utilisation are both <= 1."""
    width, _ = _context(taskset, cache, platform)
    tasks = taskset.tasks
    if not tasks:
        return StageResult({}, Fraction(0))
    scale = _lcm([t.period for t in tasks])
    costs = []
    for t in tasks:
        row = []
        for j in range(width + 1):
            c = t.wcet(LO, j)
            ok = c <= t.period and (not t.is_hi or t.wcet(HI, j) <= t.period)
            row.append(c * (scale // t.period) if ok else None)
        costs.append(row)
    solved = solve_mckp(costs, width)
    if solved is None:
        return None
    choices, total = solved
    return StageResult({t.id: j for t, j in zip(tasks, choices)}, Fraction(total, scale))


def vekb_test(taskset: TaskSet, cache: CacheConfig = None, platform: Platform = None) -> bool:
    """Necessary-style test for schemes that keep their pages at mode switch.

    The L-mode optimum under per-task limits in both modes is checked against
    both mode caps with ``sigma^H == sigma^L``. The zero and equal-split
    vectors are accepted too, so that a pass of any fixed-page strategy
    implies a pass here.
    """
    width, cores = _context(taskset, cache, platform)
    if not vt_test(taskset, cache, platform):
        return False
    n = len(taskset)
    best = combined_allocate(taskset, cache, platform)
    candidates = [best.pages if best else None,
                  {t.id: 0 for t in taskset},
                  {t.id: width // n if n else 0 for t in taskset}]
    return any(pages is not None and _fits(taskset, width, cores, pages, pages)
               for pages in candidates)


def vekb_exact(taskset: TaskSet, cache: CacheConfig = None, platform: Platform = None) -> bool:
    """Is there one page vector, used in both modes, meeting every constraint?

    This is the allocation-existence condition with ``sigma^H == sigma^L``.
    Decided exactly: cheap witness vectors are tried first, then a Pareto
    search over (pages, L-utilisation, H-utilisation).
    """
    width, cores = _context(taskset, cache, platform)
    if not vt_test(taskset, cache, platform):
        return False
    tasks = taskset.tasks
    if not tasks:
        return True
    scale_lo = _lcm([t.period for t in tasks])
    scale_hi = _lcm([t.period for t in taskset.hi_tasks]) if taskset.hi_tasks else 1
    cap_lo, cap_hi = cores * scale_lo, cores * scale_hi

    options = []
    for t in tasks:
        row = []
        for j in range(width + 1):
            cl = t.wcet(LO, j)
            ch = t.wcet(HI, j) if t.is_hi else 0
            if cl <= t.period and ch <= t.period:
                row.append((j, cl * (scale_lo // t.period), ch * (scale_hi // t.period)))
        if not row:
            return False
        options.append(row)

    def table(index):
        rows = []
        for row in options:
            line = [None] * (width + 1)
            for opt in row:
                line[opt[0]] = opt[index]
            rows.append(line)
        return rows

    def check(vec) -> bool:
        if vec is None or sum(vec) > width:
            return False
        a = b = 0
        for row, j in zip(options, vec):
            hit = next((o for o in row if o[0] == j), None)
            if hit is None:
                return False
            a += hit[1]
            b += hit[2]
        return a <= cap_lo and b <= cap_hi

    best_lo = solve_mckp(table(1), width)
    best_hi = solve_mckp(table(2), width)
    if best_lo is None or best_lo[1] > cap_lo or best_hi is None or best_hi[1] > cap_hi:
        return False
    stage1 = allocate_L(taskset, cache, platform)
    witnesses = [best_lo[0], best_hi[0], [0] * len(tasks), [width // len(tasks)] * len(tasks),
                 [stage1.pages[t.id] for t in tasks] if stage1 else None]
    if any(check(v) for v in witnesses):
        return True

    # exact search; an option is useful only where either curve drops
    states = [(0, 0, 0)]
    for row in options:
        useful, last = [], None
        for j, a, b in row:
            if last is None or a < last[0] or b < last[1]:
                useful.append((j, a, b))
                last = (a, b)
        grown = [(w + j, a + da, b + db)
                 for w, a, b in states for j, da, db in useful
                 if w + j <= width and a + da <= cap_lo and b + db <= cap_hi]
        if not grown:
            return False
        states = _prune(grown)
    return True


# -- strategies ---------------------------------------------------------------

def normalise_strategy(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in STRATEGIES:
        raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGIES}")
    return name


def strategy_allocate(taskset: TaskSet, strategy: str, cache: CacheConfig = None,
                      platform: Platform = None) -> Optional[Allocation]:
    """Page counts for one comparison strategy, or None if its allocator fails.

    Z: no cache. E: equal split, kept at mode switch. N: stage-1 optimum, kept
    at mode switch. Manberg: stage-1 optimum, then stage-2 redistribution.
    """
    strategy = normalise_strategy(strategy)
    width, _ = _context(taskset, cache, platform)
    if strategy == "Z":
        pages = {t.id: 0 for t in taskset}
        return Allocation(pages, {t.id: 0 for t in taskset.hi_tasks})
    if strategy == "E":
        share = width // len(taskset) if len(taskset) else 0
        return Allocation({t.id: share for t in taskset}, {t.id: share for t in taskset.hi_tasks})
    first = allocate_L(taskset, cache, platform)
    if first is None:
        return None
    if strategy == "N":
        return Allocation(dict(first.pages), {t.id: first.pages[t.id] for t in taskset.hi_tasks})
    second = allocate_H(taskset, first.pages, cache, platform)
    if second is None:
        return None
    return Allocation(dict(first.pages), dict(second.pages))
