"""Experiment harness: builds, sweeps, CSV tables and regression slopes.

CSV schema is fixed and versioned; the determinism hash covers every cell
except the timing column. Slopes are least squares of log(complexity)
against both log(1/eps) and log(1/eps_hat), emitted as labelled summary
rows (eps_hat = eps/ln(1/eps), natural log, recorded per row).
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import bronshteyn_ivanov, dudley, grid_hull
from .bodies import make_body, named_body
from .canonical import canonicalize
from .errors import ValidationError
from .lattice import face_lattice
from .macbeath import Constants
from .metrics import hausdorff_inner
from .stratified import approx_polytope, build_stratified, collector_overlaps

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "method", "body", "d", "eps", "eps_hat", "log_base", "preset",
    "k_cover", "t_layers", "n_samples", "f_vector", "total_complexity",
    "hausdorff", "max_collector_overlap", "build_ms", "seed",
]
METHODS = ("stratified", "dudley", "bronshteyn-ivanov", "grid")


@dataclass
class ExperimentRow:
    method: str
    body: str
    d: int
    eps: float
    preset: str
    k_cover: int
    t_layers: int
    n_samples: int
    f_vector: tuple
    total_complexity: int
    hausdorff: float
    max_collector_overlap: int
    build_ms: float
    seed: int

    @property
    def eps_hat(self) -> float:
        return self.eps / math.log(1.0 / self.eps)

    def as_list(self) -> list:
        return [self.method, self.body, self.d, repr(self.eps),
                repr(self.eps_hat), "e", self.preset, self.k_cover,
                self.t_layers, self.n_samples,
                ";".join(str(f) for f in self.f_vector),
                self.total_complexity, repr(self.hausdorff),
                self.max_collector_overlap, f"{self.build_ms:.3f}", self.seed]


def make_constants(preset: str, d: int) -> Constants:
    if preset == "paper":
        return Constants.paper(d)
    if preset == "practical":
        return Constants.practical(d)
    raise ValidationError(f"unknown preset '{preset}'")


def run_build(body_name: str, d: int, eps: float, method: str,
              preset: str = "practical", seed: int = 0,
              body_spec: dict | None = None, want_artifacts: bool = False):
    """One (body, eps, method) build; returns (row, result_dict, artifacts)."""
    if not 0.0 < eps < 1.0:
        raise ValidationError("eps must lie in (0, 1)")
    if method not in METHODS:
        raise ValidationError(f"unknown method '{method}'")
    if method == "grid":
        from .baselines import grid_cell_gate

        grid_cell_gate(d, eps)
    t0 = time.perf_counter()
    raw = (make_body(body_spec, eps) if body_spec is not None
           else named_body(body_name, d, eps, seed=seed))
    cb = canonicalize(raw, label=body_name)
    artifacts = {"canonical": cb}
    if method == "stratified":
        consts = make_constants(preset, d)
        sc = build_stratified(cb, eps, consts)
        p, lattice = approx_polytope(sc)
        err = hausdorff_inner(cb.body, p)
        overlaps = collector_overlaps(sc)
        row = ExperimentRow(
            method=method, body=body_name, d=d, eps=eps, preset=preset,
            k_cover=len(sc.cover), t_layers=sc.t, n_samples=len(sc.samples),
            f_vector=lattice.f_vector, total_complexity=lattice.total,
            hausdorff=err, max_collector_overlap=int(overlaps.max()),
            build_ms=(time.perf_counter() - t0) * 1e3, seed=seed)
        result = sc.to_json()
        result.update({"f_vector": list(lattice.f_vector),
                       "total_complexity": lattice.total, "hausdorff": err,
                       "max_collector_overlap": int(overlaps.max()),
                       "transform": {
                           "matrix": cb.to_canonical.matrix.tolist(),
                           "translation": cb.to_canonical.translation.tolist()},
                       "eps_scale": cb.eps_scale})
        if want_artifacts:
            artifacts.update({"stratified": sc, "hull": p, "lattice": lattice})
        return row, result, artifacts
    fn = {"dudley": dudley, "bronshteyn-ivanov": bronshteyn_ivanov,
          "grid": grid_hull}[method]
    res = fn(cb, eps)
    row = ExperimentRow(
        method=method, body=body_name, d=d, eps=eps, preset=preset,
        k_cover=0, t_layers=0, n_samples=len(res.vertices),
        f_vector=res.lattice.f_vector, total_complexity=res.lattice.total,
        hausdorff=res.hausdorff, max_collector_overlap=0,
        build_ms=(time.perf_counter() - t0) * 1e3, seed=seed)
    result = {"method": method, "hausdorff": res.hausdorff,
              "f_vector": list(res.lattice.f_vector),
              "total_complexity": res.lattice.total, "params": res.params}
    if want_artifacts:
        artifacts.update({"baseline": res})
    return row, result, artifacts


def slope(xs, ys) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    x = x - x.mean()
    denom = float(x @ x)
    if denom <= 0.0:
        return float("nan")
    return float(x @ (y - y.mean()) / denom)


def regression_summary(rows: list[ExperimentRow]) -> list[dict]:
    """Per-method log-log slopes on both abscissas."""
    out = []
    for method in sorted({r.method for r in rows}):
        rs = [r for r in rows if r.method == method]
        if len(rs) < 3:
            continue
        logc = [math.log(max(1, r.total_complexity)) for r in rs]
        s_eps = slope([math.log(1.0 / r.eps) for r in rs], logc)
        s_hat = slope([math.log(1.0 / r.eps_hat) for r in rs], logc)
        out.append({"method": method, "n": len(rs),
                    "slope_vs_inv_eps": s_eps, "slope_vs_inv_eps_hat": s_hat})
    return out


def _run_one(args):
    body, d, eps, method, preset, seed = args
    row, _, _ = run_build(body, d, eps, method, preset=preset, seed=seed)
    return row


def run_experiment(body: str, d: int, eps_list, methods, preset="practical",
                   seed: int = 0):
    """Build every (method, eps) pair; per-row failures are recorded and
    the sweep continues."""
    if len(eps_list) < 3:
        raise ValidationError("need at least 3 eps values for regressions")
    if not methods:
        raise ValidationError("empty method list")
    for m in methods:
        if m not in METHODS:
            raise ValidationError(f"unknown method '{m}'")
    jobs = [(body, d, float(e), m, preset, seed) for m in methods
            for e in eps_list]
    threads = int(os.environ.get("APPROX_THREADS", "1"))
    rows = []
    failures = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for job, res in zip(jobs, pool.map(_run_one_safe, jobs)):
                if isinstance(res, ExperimentRow):
                    rows.append(res)
                else:
                    failures.append({"job": job[:4], "error": res})
    else:
        for job in jobs:
            try:
                rows.append(_run_one(job))
            except Exception as e:  # row failures recorded, run continues
                failures.append({"job": job[:4], "error": f"{type(e).__name__}: {e}"})
    rows.sort(key=lambda r: (r.method, -r.eps))
    return rows, regression_summary(rows), failures


def _run_one_safe(args):
    try:
        return _run_one(args)
    except Exception as e:
        return f"{type(e).__name__}: {e}"


def write_csv(path: str, rows: list[ExperimentRow], regressions: list[dict],
              failures: list[dict] | None = None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# polyapprox schema-version={CSV_SCHEMA_VERSION}\n")
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(r.as_list())
        for reg in regressions:
            w.writerow(["slope", reg["method"], "", "", "", "", "",
                        "", "", reg["n"], "",
                        repr(reg["slope_vs_inv_eps"]),
                        repr(reg["slope_vs_inv_eps_hat"]), "", "", ""])
        for f in failures or []:
            w.writerow(["failure", str(f["job"]), "", "", "", "", "",
                        "", "", "", "", "", "", "", "", f["error"]])


def csv_hash(path: str) -> str:
    """Content hash of a results CSV with the timing column masked."""
    col = CSV_COLUMNS.index("build_ms")
    h = hashlib.sha256()
    with open(path, "r", newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                h.update(line.encode())
                continue
            cells = next(csv.reader(io.StringIO(line)))
            if len(cells) == len(CSV_COLUMNS) and cells[0] != "method":
                cells[col] = ""
            h.update(("\x1f".join(cells) + "\n").encode())
    return h.hexdigest()