import math

import numpy as np
import pytest

from mcllc.workload import (GENERATOR_ID, GenParams, derive_seeds, gen_lockdown_curve_L,
                            gen_periods, gen_taskset, nominal_sum, uunifast_discard)


def test_uunifast_single_task():
    assert uunifast_discard(1, 0.5, 1) == [0.5]


def test_uunifast_sums_and_bounds():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        u = uunifast_discard(5, 2.0, rng)
        assert len(u) == 5
        assert abs(sum(u) - 2.0) < 1e-9
        assert all(0 < x <= 1 for x in u)


@pytest.mark.parametrize("n, total", [(2, 2.5), (3, 0), (1, -1)])
def test_uunifast_rejects(n, total):
    with pytest.raises(ValueError):
        uunifast_discard(n, total, 1)


def test_periods_range_and_determinism():
    p = gen_periods(500, 42)
    assert all(isinstance(x, int) and 10 <= x <= 100 for x in p)
    assert p == gen_periods(500, 42)


def test_periods_are_log_uniform():
    logs = np.log(gen_periods(10_000, 7))
    target = (math.log(10) + math.log(100)) / 2
    assert abs(logs.mean() - target) / target < 0.02


def test_curve_properties():
    curve_rng, poisson_rng = np.random.default_rng(1), np.random.default_rng(2)
    util_rng = np.random.default_rng(3)
    for _ in range(10_000):
        alpha = float(util_rng.uniform(0.05, 0.95))
        period = int(util_rng.integers(10, 101)) * 1000
        c = gen_lockdown_curve_L(float(util_rng.uniform(0.001, 1)), period, alpha, 30, 128,
                                 curve_rng, poisson_rng)
        vals = list(c)
        assert len(vals) == 129
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] >= alpha * vals[0] - 1


def test_curve_flat_as_alpha_tends_to_one():
    c = gen_lockdown_curve_L(0.3, 50_000, 1 - 1e-12, 30, 128, 1, 2)
    assert max(c) - min(c) <= 1
    assert c(0) == 15_000


class _TopDraws:
    """Stands in for a generator: every uniform draw hits its upper bound."""

    def __init__(self, first):
        self.first = first
        self.calls = 0

    def uniform(self, lo, hi):
        self.calls += 1
        return self.first if self.calls == 1 else hi


def test_collinear_bend_gives_straight_line():
    c = gen_lockdown_curve_L(0.5, 100, 0.1, 4, 10, _TopDraws(10.0), np.random.default_rng(0))
    # straight line from 50 down to 10 over ten pages
    assert list(c) == [50 - 4 * j for j in range(11)]


def test_taskset_defaults():
    ts = gen_taskset(GenParams(seeds=derive_seeds(1, 0)))
    assert len(ts) == 10
    assert len(ts.hi_tasks) == 4
    assert all(t.is_hi == (t.id < 4) for t in ts)
    assert ts.cache.total_pages == 128
    for t in ts.hi_tasks:
        assert all(h == 8 * l for h, l in zip(t.curve_H, t.curve_L))
    for t in ts:
        assert t.deadline == t.period
        assert t.period % 1000 == 0 and 10 <= t.period // 1000 <= 100
    meta = ts.metadata
    assert meta["generator"] == GENERATOR_ID
    assert meta["params"]["n"] == 10 and len(meta["seeds"]) == 4


@pytest.mark.parametrize("util, cores", [(0.3, 1), (1.5, 1), (0.8, 4), (1.2, 2)])
def test_nominal_sum_matches_target(util, cores):
    ts = gen_taskset(GenParams(utilisation=util, cores=cores, seeds=derive_seeds(3, 1)))
    assert abs(nominal_sum(ts) - util * cores) < 1e-9 * len(ts)


def test_scaled_above_capacity_keeps_shape():
    base = gen_taskset(GenParams(utilisation=1.0, seeds=derive_seeds(5, 0)))
    high = gen_taskset(GenParams(utilisation=1.5, seeds=derive_seeds(5, 0)))
    lo_u = base.metadata["nominal_utilisations"]
    hi_u = high.metadata["nominal_utilisations"]
    assert all(abs(b - 1.5 * a) < 1e-12 for a, b in zip(lo_u, hi_u))


def test_same_seeds_same_taskset():
    p = GenParams(seeds=derive_seeds(11, 2, 3))
    assert gen_taskset(p).tasks == gen_taskset(p).tasks


def test_streams_are_independent():
    s = derive_seeds(1, 0)
    a = gen_taskset(GenParams(seeds=s))
    b = gen_taskset(GenParams(seeds=(s[0], s[1] + 1, s[2], s[3])))
    assert a.metadata["nominal_utilisations"] == b.metadata["nominal_utilisations"]
    assert [t.period for t in a] != [t.period for t in b]


@pytest.mark.parametrize("frac, n, expected", [(0.4, 10, 4), (0.2, 13, 3), (0.6, 15, 9), (0.8, 20, 16)])
def test_hi_count_rounds_up(frac, n, expected):
    assert GenParams(n=n, fraction_hi=frac).n_hi == expected


@pytest.mark.parametrize("kw", [dict(alpha=1), dict(alpha=0), dict(fraction_hi=0),
                                dict(wcet_ratio=0.5), dict(n=0), dict(seeds=(1, 2))])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        GenParams(**kw)
