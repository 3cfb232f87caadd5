"""Synthetic dual-criticality task sets with progressive lockdown curves.

Four independent random streams are used (utilisations, periods, Poisson
bend abscissae, curve ordinates) so that changing one parameter leaves the
draws of the others untouched. Every stream is a numpy ``PCG64`` generator
seeded with one 32-bit integer; ``derive_seeds`` maps an experiment's base
seed and task-set index to the four seeds.

Periods are whole milliseconds, but the time unit is ``1 / ticks_per_ms`` ms
(a microsecond by default) so that short WCETs are not rounded up to a whole
millisecond.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import List, Tuple

import numpy as np

from .model import HI, LO, CacheConfig, LockdownCurve, Platform, Task, TaskSet

GENERATOR_ID = f"numpy-{np.__version__}/PCG64"
STREAMS = ("utilisation", "period", "poisson", "curve")

PERIOD_MIN = 10
PERIOD_MAX = 100
MAX_REDRAWS = 10_000


def derive_seeds(base_seed: int, *keys: int) -> Tuple[int, ...]:
    """Four stream seeds for the task set identified by ``keys``."""
    state = np.random.SeedSequence([int(base_seed), *map(int, keys)]).generate_state(len(STREAMS))
    return tuple(int(s) for s in state)


def _rng(seed_or_rng) -> np.random.Generator:
    # anything generator-like passes through, so tests can pin draws
    if hasattr(seed_or_rng, "uniform"):
        return seed_or_rng
    return np.random.Generator(np.random.PCG64(seed_or_rng))


@dataclass(frozen=True)
class GenParams:
    n: int = 10
    utilisation: float = 0.5
    fraction_hi: float = 0.4
    wcet_ratio: float = 8
    alpha: float = 0.1
    lam: float = 30
    cache_kb: int = 512
    page_kb: int = 4
    cores: int = 1
    ticks_per_ms: int = 1000
    seeds: Tuple[int, ...] = field(default=(1, 2, 3, 4))

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 < self.fraction_hi <= 1:
            raise ValueError("fraction_hi must lie in (0, 1]")
        if self.wcet_ratio < 1:
            raise ValueError("wcet_ratio must be >= 1")
        if self.utilisation <= 0:
            raise ValueError("utilisation must be > 0")
        if self.lam <= 0:
            raise ValueError("lam must be > 0")
        if self.cores < 1:
            raise ValueError("cores must be >= 1")
        if self.ticks_per_ms < 1:
            raise ValueError("ticks_per_ms must be >= 1")
        if len(self.seeds) != len(STREAMS):
            raise ValueError(f"need one seed per stream {STREAMS}")

    @property
    def cache(self) -> CacheConfig:
        return CacheConfig.from_size(self.cache_kb * 1024, self.page_kb * 1024)

    @property
    def platform(self) -> Platform:
        return Platform(self.cores)

    @property
    def n_hi(self) -> int:
        return math.ceil(Fraction(str(self.fraction_hi)) * self.n)


def uunifast_discard(n: int, total: float, rng, max_redraws: int = MAX_REDRAWS) -> List[float]:
    """``n`` utilisations summing to ``total``, none above 1.

    Draws containing a value above 1 are thrown away whole and redrawn.
    """
    if total <= 0:
        raise ValueError("total utilisation must be > 0")
    if total > n:
        raise ValueError(f"cannot split {total} over {n} tasks with each <= 1")
    if total == n:
        return [1.0] * n
    rng = _rng(rng)
    for _ in range(max_redraws):
        utils = []
        rest = total
        for i in range(1, n):
            nxt = rest * rng.random() ** (1.0 / (n - i))
            utils.append(rest - nxt)
            rest = nxt
        utils.append(rest)
        if max(utils) <= 1:
            return utils
    raise RuntimeError(f"UUniFast-discard gave up after {max_redraws} draws")


def gen_periods(n: int, rng) -> List[int]:
    """Log-uniform integer periods in [10, 100] ms."""
    rng = _rng(rng)
    logs = rng.uniform(math.log(PERIOD_MIN), math.log(PERIOD_MAX), size=n)
    return [min(PERIOD_MAX, max(PERIOD_MIN, int(math.floor(math.exp(v) + 0.5)))) for v in logs]


def _bend_abscissa(lam: float, total_pages: int, rng) -> int:
    for _ in range(1000):
        x = int(rng.poisson(lam))
        if 1 <= x <= total_pages - 1:
            return x
    # lam far outside the page range: fall back to the nearest valid bend
    return min(max(int(round(lam)), 1), total_pages - 1)


def gen_lockdown_curve_L(u0: float, period: int, alpha: float, lam: float, total_pages: int,
                         curve_rng, poisson_rng) -> LockdownCurve:
    """Two-segment L-mode curve from ``C(0) = u0*T`` down to a random ``C(total)``.

    The bend sits at a Poisson abscissa with an ordinate drawn between the
    end value and the straight chord. Values are floored to whole time
    units (at least 1) and forced non-increasing.
    """
    curve_rng, poisson_rng = _rng(curve_rng), _rng(poisson_rng)
    c0 = max(1, int(math.floor(u0 * period + 0.5)))
    c_end = float(curve_rng.uniform(alpha * c0, c0))
    if total_pages < 2:
        points = [float(c0), c_end][: total_pages + 1]
    else:
        x = _bend_abscissa(lam, total_pages, poisson_rng)
        chord = c0 + (c_end - c0) * x / total_pages
        y = float(curve_rng.uniform(c_end, chord))
        points = []
        for j in range(total_pages + 1):
            if j <= x:
                points.append(c0 + (y - c0) * j / x)
            else:
                points.append(y + (c_end - y) * (j - x) / (total_pages - x))
    values = []
    for p in points:
        v = max(1, int(math.floor(p)))
        values.append(min(v, values[-1]) if values else v)
    return LockdownCurve(tuple(values))


def gen_taskset(params: GenParams) -> TaskSet:
    """Assemble a task set; the first ``ceil(fraction_hi * n)`` tasks are H-tasks."""
    seeds = dict(zip(STREAMS, params.seeds))
    cores = params.cores
    total = params.utilisation * cores
    if total > cores:
        utils = [u * total / cores for u in uunifast_discard(params.n, cores, seeds["utilisation"])]
    else:
        utils = uunifast_discard(params.n, total, seeds["utilisation"])
    periods = gen_periods(params.n, seeds["period"])
    curve_rng, poisson_rng = _rng(seeds["curve"]), _rng(seeds["poisson"])
    width = params.cache.total_pages
    ratio = Fraction(str(params.wcet_ratio))
    tasks = []
    for i, (u0, period_ms) in enumerate(zip(utils, periods)):
        period = period_ms * params.ticks_per_ms
        curve_L = gen_lockdown_curve_L(u0, period, params.alpha, params.lam, width,
                                       curve_rng, poisson_rng)
        hi = i < params.n_hi
        tasks.append(Task(i, period, period, HI if hi else LO, curve_L,
                          curve_L.scaled(ratio) if hi else None))
    meta = {
        "params": asdict(params),
        "seeds": dict(seeds),
        "generator": GENERATOR_ID,
        "ticks_per_ms": params.ticks_per_ms,
        "nominal_utilisations": [float(u) for u in utils],
    }
    return TaskSet(tuple(tasks), params.cache, params.platform, meta)


def nominal_sum(taskset: TaskSet) -> float:
    """Sum of the generated zero-page utilisations, before integer rounding."""
    return float(sum(taskset.metadata["nominal_utilisations"]))

