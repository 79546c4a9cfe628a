"""Competitive-ratio sweeps over fluctuation targets."""
from __future__ import annotations

import csv
import io
import itertools
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .audit import audit_trace, step_ratio_bounds
from .basic import run
from .batch import run_lb
from .errors import ConfigError
from .generators import GeneratorConfig, adversarial_density_ramp, generate
from .instance import pricing_stats
from .multidim import run_md
from .oracle import empirical_cr, exact_optimum, theoretical_cr_bound

RUNNERS = {"basic": run, "lb": run_lb, "md": run_md}
AXES = {"theta": "density_bar", "rho": "density_bar", "d": "d_bar", "xi": "xi"}

BENCH_COLUMNS = (
    "point", "variant", "family", "density_bar", "d_bar", "xi", "reps",
    "mean_cr", "max_cr", "bound", "max_step_ratio", "violations",
)


@dataclass(frozen=True)
class SweepConfig:
    variant: str
    points: tuple[dict, ...]
    reps: int
    seed: int
    generator: GeneratorConfig
    family: str = "random"
    workers: int = 1

    @classmethod
    def from_dict(cls, data: Mapping) -> "SweepConfig":
        variant = data.get("variant", "basic")
        gen = dict(data.get("generator", {}))
        gen["variant"] = variant
        generator = GeneratorConfig.from_dict(gen)
        if "points" in data:
            points = [dict(p) for p in data["points"]]
        elif "grid" in data:
            axes = dict(data["grid"])
            names = list(axes)
            points = [dict(zip(names, combo)) for combo in itertools.product(*(axes[n] for n in names))]
        else:
            raise ConfigError("sweep config needs 'grid' or 'points'")
        for p in points:
            bad = set(p) - set(AXES)
            if bad:
                raise ConfigError(f"unknown grid axes {sorted(bad)}; use {sorted(AXES)}")
        family = data.get("family", "random")
        if family not in ("random", "ramp"):
            raise ConfigError(f"unknown family {family!r}")
        if family == "ramp" and variant != "basic":
            raise ConfigError("the ramp family is basic-only")
        reps = int(data.get("reps", 1))
        if reps < 1:
            raise ConfigError("reps must be >= 1")
        return cls(variant, tuple(points), reps, int(data.get("seed", 0)), generator, family,
                   int(data.get("workers", 1)))


def _seed(base: int, point: int, rep: int) -> int:
    return int(np.random.SeedSequence([base, point, rep]).generate_state(1)[0])


def _one(task):
    cfg, family = task
    instance = adversarial_density_ramp(cfg) if family == "ramp" else generate(cfg)
    trace = RUNNERS[instance.variant](instance)
    offline = exact_optimum(instance, max_requests=max(20, instance.n_requests))
    audit = audit_trace(instance, trace, offline)
    ratios = [r for r, _ in step_ratio_bounds(trace)]
    return (
        empirical_cr(trace.P, offline.value),
        theoretical_cr_bound(pricing_stats(instance)),
        max(ratios, default=0.0),
        audit.count,
    )


def run_sweep(sweep: SweepConfig) -> list[dict]:
    tasks, index = [], []
    for p_idx, point in enumerate(sweep.points):
        changes = {AXES[name]: val for name, val in point.items()}
        base = sweep.generator.replace(**changes)
        for rep in range(sweep.reps):
            tasks.append((base.replace(seed=_seed(sweep.seed, p_idx, rep)), sweep.family))
            index.append(p_idx)
    if sweep.workers > 1:
        with ProcessPoolExecutor(max_workers=sweep.workers) as pool:
            results = list(pool.map(_one, tasks))
    else:
        results = [_one(t) for t in tasks]

    rows = []
    for p_idx, point in enumerate(sweep.points):
        mine = [res for i, res in zip(index, results) if i == p_idx]
        crs = [m[0] for m in mine]
        cfg = sweep.generator.replace(**{AXES[n]: v for n, v in point.items()})
        rows.append({
            "point": p_idx,
            "variant": sweep.variant,
            "family": sweep.family,
            "density_bar": cfg.density_bar,
            "d_bar": cfg.d_bar,
            "xi": cfg.xi,
            "reps": len(mine),
            "mean_cr": statistics.fmean(crs) if all(math.isfinite(c) for c in crs) else math.inf,
            "max_cr": max(crs),
            "bound": max(m[1] for m in mine),
            "max_step_ratio": max(m[2] for m in mine),
            "violations": sum(m[3] for m in mine),
        })
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
