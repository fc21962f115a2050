"""Scaling suites: run a generator over a parameter grid under one controller,
write one CSV row per run and fit log T against log n.
"""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .controllers import default_m, make_controller
from .engine import DEFAULT_MAX_STEPS, NOT_CONVERGED, run
from .errors import HKError, InvalidParamError
from .instances import generate
from .numeric import Mode

CSV_HEADER = ["n", "m", "generator", "controller", "convergence_time", "steps", "wall_ms"]


@dataclass
class SuiteConfig:
    generator: str
    grid: list
    controller: str = "passive"
    controller_params: dict = field(default_factory=dict)
    mode: str = "float64"
    m: int | None = None
    seeds: list = field(default_factory=lambda: [None])
    max_steps: int = DEFAULT_MAX_STEPS
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.grid:
            raise InvalidParamError("suite grid is empty")
        Mode.parse(self.mode)
        if not self.seeds:
            self.seeds = [None]

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteConfig":
        data = dict(data)
        if "sizes" in data:
            key = data.pop("size_param", "n")
            data.setdefault("grid", [{key: s} for s in data.pop("sizes")])
        if "params" in data and "controller_params" not in data:
            data["controller_params"] = data.pop("params")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidParamError(f"unknown suite config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "SuiteConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def jobs(self) -> list[tuple]:
        return [(self, dict(point), seed) for point in self.grid for seed in self.seeds]


@dataclass
class ScalingResult:
    rows: list
    exponent: float | None = None
    residual: float | None = None

    def summary(self) -> dict:
        return {"exponent": self.exponent, "residual": self.residual, "rows": len(self.rows)}


def _run_job(job) -> dict:
    config, point, seed = job
    params = dict(point)
    if seed is not None and config.generator == "random":
        params.setdefault("seed", seed)
    ctrl_params = dict(config.controller_params)
    if seed is not None and config.controller == "random":
        ctrl_params.setdefault("seed", seed)
    row = {"n": None, "m": None, "generator": config.generator, "controller": config.controller}
    start = time.perf_counter()
    try:
        inst = generate(config.generator, mode=config.mode, **params)
        m = config.m if config.m is not None else default_m(config.controller, inst.n, ctrl_params)
        inst = inst.with_m(m)
        row.update(n=inst.n, m=m)
        rec = run(
            inst,
            make_controller(config.controller, ctrl_params),
            config.max_steps,
            False,
            monitors=False,
            track_influence=False,
        )
        row["convergence_time"] = rec.convergence_time if rec.converged else NOT_CONVERGED
        row["steps"] = rec.steps_executed
    except HKError as exc:
        row["convergence_time"] = f"ERROR:{exc.code}"
        row["steps"] = 0
    row["wall_ms"] = round((time.perf_counter() - start) * 1000, 3)
    return row


def fit_exponent(rows) -> tuple[float | None, float | None]:
    """Least-squares slope of log T on log n and the RMS residual.

    Rows that did not converge, or converged at T=0, are skipped; fewer than
    three distinct n values gives ``(None, None)``.
    """
    pts = []
    for row in rows:
        t = row["convergence_time"]
        if isinstance(t, str):
            if not t.lstrip("-").isdigit():
                continue
            t = int(t)
        if t is None or t <= 0:
            continue
        pts.append((math.log(int(row["n"])), math.log(t)))
    if len({x for x, _ in pts}) < 3:
        return None, None
    mx = sum(x for x, _ in pts) / len(pts)
    my = sum(y for _, y in pts) / len(pts)
    sxx = sum((x - mx) ** 2 for x, _ in pts)
    sxy = sum((x - mx) * (y - my) for x, y in pts)
    slope = sxy / sxx
    icpt = my - slope * mx
    resid = math.sqrt(sum((y - icpt - slope * x) ** 2 for x, y in pts) / len(pts))
    return slope, resid


def run_suite(config: SuiteConfig, workers: int | None = None) -> ScalingResult:
    workers = workers if workers is not None else config.workers
    jobs = config.jobs()
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_job, jobs))
    else:
        rows = [_run_job(job) for job in jobs]
    exponent, residual = fit_exponent(rows)
    result = ScalingResult(rows, exponent, residual)
    if config.out:
        write_results(result, config.out, config)
    return result


def write_results(result: ScalingResult, path, config: SuiteConfig | None = None) -> Path:
    """Write the rows CSV and a JSON summary next to it; returns the JSON path."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        for row in result.rows:
            writer.writerow({k: row[k] for k in CSV_HEADER})
    summary = result.summary()
    if config is not None:
        cfg = asdict(config)
        summary["config"] = json.loads(json.dumps(cfg, default=str))
    json_path = path.with_suffix(".json")
    json_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return json_path


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
