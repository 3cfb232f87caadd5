"""Parameter sweeps over synthetic task sets and weighted schedulability.

Each sweep varies one generator parameter; every other parameter keeps its
default. For each value of the varied parameter, task sets are generated at
every nominal utilisation of the utilisation grid (unless utilisation itself
is the varied parameter). Task set ``k`` at grid index ``u`` is seeded from
``(base_seed, u, k)`` for every parameter value, so all points see the same
random draws.

Seven curves are evaluated per task set:

    VT       full-cache utilisation check (necessary)
    ILP      both allocation stages succeed (necessary)
    V-Ekb    pages kept at mode switch pass both utilisation caps
    Z-Ekb    no cache, first-fit + deadline scaling
    E-Ekb    equal cache split, no redistribution
    N-Ekb    stage-1 allocation, no redistribution
    Manberg  stage-1 and stage-2 allocation, redistribution at mode switch
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .alloc import ilp_feasibility_test, strategy_allocate, vekb_test, vt_test
from .model import TaskSet
from .partition import partition
from .workload import GenParams, derive_seeds, gen_taskset

log = logging.getLogger(__name__)

CURVES = ("VT", "ILP", "V-Ekb", "Z-Ekb", "E-Ekb", "N-Ekb", "Manberg")
UTIL_GRID = tuple(round(0.1 * k, 1) for k in range(1, 16))
PARAM_DOMAINS = {
    "n": (10, 13, 15, 20),
    "fraction_hi": (0.2, 0.4, 0.6, 0.8),
    "wcet_ratio": (4, 6, 8, 10, 12),
    "alpha": (0.1, 0.2, 0.4, 0.8),
    "lam": (5, 10, 15, 20, 25, 30),
    "cache_kb": (512, 1024, 2048, 4096),
    "cores": (1, 2, 4, 8),
    "utilisation": UTIL_GRID,
}
WORKERS_ENV = "MCLLC_WORKERS"

RECORD_FIELDS = ("experiment_id", "varied_param", "param_value", "taskset_id", "seed",
                 "strategy", "verdict", "nominal_util", "weighted_verdict")
SUMMARY_FIELDS = ("experiment_id", "varied_param", "param_value", "strategy", "tasksets",
                  "schedulable", "success_ratio", "weighted_schedulability")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    varied_param: str
    values: Tuple = ()
    tasksets_per_point: int = 100
    base_seed: int = 1
    defaults: Mapping = field(default_factory=dict)
    utilisations: Tuple[float, ...] = UTIL_GRID

    def __post_init__(self):
        if self.varied_param not in PARAM_DOMAINS:
            raise ConfigError(f"varied_param must be one of {sorted(PARAM_DOMAINS)}")
        if not self.values:
            object.__setattr__(self, "values", PARAM_DOMAINS[self.varied_param])
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "utilisations", tuple(self.utilisations))
        if self.tasksets_per_point < 1:
            raise ConfigError("tasksets_per_point must be >= 1")
        allowed = set(GenParams.__dataclass_fields__) - {"seeds"}
        unknown = set(self.defaults) - allowed
        if unknown:
            raise ConfigError(f"unknown default parameters: {sorted(unknown)}")
        for v in self.values:  # fail early on out-of-domain values
            self.params_for(v, self.grid[0], (1, 2, 3, 4))

    @property
    def grid(self) -> Tuple[float, ...]:
        return self.values if self.varied_param == "utilisation" else self.utilisations

    def params_for(self, value, util: float, seeds) -> GenParams:
        kw = dict(self.defaults)
        kw["utilisation"] = util
        kw[self.varied_param] = value
        return GenParams(seeds=tuple(seeds), **kw)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment_id" not in doc or "varied_param" not in doc:
            raise ConfigError("config needs experiment_id and varied_param")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class ExperimentRecord:
    experiment_id: str
    varied_param: str
    param_value: object
    taskset_id: int
    seed: str
    strategy: str
    verdict: int
    nominal_util: float

    def row(self) -> Dict:
        out = asdict(self)
        out["weighted_verdict"] = _fmt(self.nominal_util * self.verdict)
        out["nominal_util"] = _fmt(self.nominal_util)
        return out


def _fmt(x) -> str:
    return f"{float(x):.6g}"


def evaluate_taskset(ts: TaskSet) -> Dict[str, int]:
    """Binary verdict of every comparison curve for one task set."""
    out = {
        "VT": int(vt_test(ts)),
        "ILP": int(ilp_feasibility_test(ts)),
        "V-Ekb": int(vekb_test(ts)),
    }
    for curve, strategy in (("Z-Ekb", "Z"), ("E-Ekb", "E"), ("N-Ekb", "N"), ("Manberg", "Manberg")):
        alloc = strategy_allocate(ts, strategy)
        out[curve] = int(alloc is not None and partition(ts, alloc).success)
    return out


def weighted_schedulability(records: Iterable[ExperimentRecord]) -> float:
    """Utilisation-weighted share of schedulable task sets."""
    records = list(records)
    if not records:
        raise ValueError("no records to weigh")
    den = sum(r.nominal_util for r in records)
    if den <= 0:
        raise ValueError("total weight must be positive")
    return sum(r.nominal_util * r.verdict for r in records) / den


def _jobs(config: ExperimentConfig):
    k_max = config.tasksets_per_point
    for value in config.values:
        for u_idx, util in enumerate(config.grid):
            if config.varied_param == "utilisation":
                util = value
                u_idx = config.values.index(value)
            for k in range(k_max):
                yield value, util, u_idx * k_max + k, derive_seeds(config.base_seed, u_idx, k)
            if config.varied_param == "utilisation":
                break


def _run_job(args):
    config, value, util, ts_id, seeds = args
    ts = gen_taskset(config.params_for(value, util, seeds))
    verdicts = evaluate_taskset(ts)
    seed = ":".join(str(s) for s in seeds)
    return [ExperimentRecord(config.experiment_id, config.varied_param, value, ts_id, seed,
                             curve, verdicts[curve], float(util))
            for curve in CURVES]


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _sort_key(config: ExperimentConfig, rec: ExperimentRecord):
    return (config.values.index(rec.param_value), rec.taskset_id, CURVES.index(rec.strategy))


def run_records(config: ExperimentConfig, workers: Optional[int] = None) -> List[ExperimentRecord]:
    workers = worker_count() if workers is None else workers
    jobs = [(config, *job) for job in _jobs(config)]
    log.info("experiment %s: %d task sets, %d worker(s)", config.experiment_id, len(jobs), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    else:
        batches = [_run_job(job) for job in jobs]
    records = [r for batch in batches for r in batch]
    records.sort(key=lambda r: _sort_key(config, r))
    return records


def summarise(config: ExperimentConfig, records: Sequence[ExperimentRecord]) -> List[Dict]:
    groups: Dict[Tuple, List[ExperimentRecord]] = {}
    for r in records:
        groups.setdefault((r.param_value, r.strategy), []).append(r)
    rows = []
    for value in config.values:
        for curve in CURVES:
            group = groups.get((value, curve))
            if not group:
                continue
            hits = sum(r.verdict for r in group)
            rows.append({
                "experiment_id": config.experiment_id,
                "varied_param": config.varied_param,
                "param_value": value,
                "strategy": curve,
                "tasksets": len(group),
                "schedulable": hits,
                "success_ratio": _fmt(hits / len(group)),
                "weighted_schedulability": _fmt(weighted_schedulability(group)),
            })
    return rows


def records_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=RECORD_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


def summary_csv(rows: Sequence[Mapping]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: List[ExperimentRecord]
    summary: List[Dict]

    def weighted(self, curve: str, value) -> float:
        for row in self.summary:
            if row["strategy"] == curve and row["param_value"] == value:
                return float(row["weighted_schedulability"])
        raise KeyError((curve, value))

    def verdicts(self) -> Dict[Tuple, Dict[str, int]]:
        out: Dict[Tuple, Dict[str, int]] = {}
        for r in self.records:
            out.setdefault((r.param_value, r.taskset_id), {})[r.strategy] = r.verdict
        return out


def run_experiment(config: ExperimentConfig, out_dir=None,
                   workers: Optional[int] = None) -> ExperimentResult:
    """Run a sweep; with ``out_dir``, write ``<id>_records.csv`` and ``<id>_summary.csv``."""
    records = run_records(config, workers)
    summary = summarise(config, records)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{config.experiment_id}_records.csv").write_text(records_csv(records))
        (out / f"{config.experiment_id}_summary.csv").write_text(summary_csv(summary))
    return ExperimentResult(config, records, summary)


def write_plot_data(summary_path, out_dir) -> List[Path]:
    """Split a summary CSV into one whitespace-separated data file per curve."""
    with open(summary_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    by_curve: Dict[str, List[Mapping]] = {}
    for row in rows:
        by_curve.setdefault(row["strategy"], []).append(row)
    for curve, group in by_curve.items():
        exp_id = group[0]["experiment_id"]
        path = out / f"{exp_id}_{curve}.dat"
        lines = [f"# {group[0]['varied_param']} weighted_schedulability success_ratio"]
        lines += [f"{r['param_value']} {r['weighted_schedulability']} {r['success_ratio']}"
                  for r in group]
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def default_config(experiment_id: str = "utilisation", varied_param: str = "utilisation",
                   **kw) -> ExperimentConfig:
    return ExperimentConfig(experiment_id=experiment_id, varied_param=varied_param, **kw)


def with_values(config: ExperimentConfig, values) -> ExperimentConfig:
    return replace(config, values=tuple(values))
