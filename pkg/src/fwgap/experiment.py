"""Run configured experiments and write their traces and bound reports."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .checks import FAIL, BoundReport, check_trace
from .config import ExperimentConfig, load_config
from .domains import Box
from .errors import EXIT_OK, EXIT_VIOLATION, ConfigError, FWError, UnsupportedOperation, UsageError
from .objectives import (
    CurvatureEstimate,
    DiagonalQuadratic,
    curvature_lipschitz_bound,
    curvature_sampled,
    global_min_separable_box,
    grid_min,
)
from .solver import RunTrace, SolverConfig, solve

CSV_HEADER = "t,f,gap,min_gap,gamma,decrease_bound,theorem_rhs,refined_rhs"
CSV_COLUMNS = tuple(CSV_HEADER.split(","))
_RECORD_ATTRS = ("t", "f_value", "gap", "min_gap", "gamma", "decrease_bound", "theorem_rhs", "refined_rhs")

GRID_RESOLUTION = 201


@dataclass
class CurvatureChoice:
    C: float
    estimate: CurvatureEstimate
    certified: bool
    analytic_bound: float | None


def resolve_curvature(cfg: ExperimentConfig) -> CurvatureChoice:
    """Pick ``C`` per ``cfg.C_mode`` and decide whether it provably dominates ``C_f``.

    Only the analytic bound is certified; an explicit value is certified
    when it is at least the analytic bound; sampled values never are.
    """
    obj, dom = cfg.objective, cfg.domain
    bound = curvature_lipschitz_bound(obj, dom, cfg.norm)
    if cfg.C_mode == "analytic":
        est = bound
        certified = True
    elif cfg.C_mode == "sampled":
        est = curvature_sampled(obj, dom, cfg.samples, cfg.seed)
        certified = False
    else:
        est = CurvatureEstimate(float(cfg.C), "explicit")
        certified = est.value >= bound.value
    if not est.value > 0:
        raise UsageError(
            f"resolved curvature C={est.value!r} is not positive (method {est.method}); "
            "set solver.C_mode = explicit with a positive solver.C"
        )
    return CurvatureChoice(est.value, est, certified, bound.value)


def resolve_h0(obj, domain, x0) -> tuple[float | None, str]:
    """Initial suboptimality and where its minimum came from."""
    if isinstance(obj, DiagonalQuadratic) and isinstance(domain, Box):
        fmin, _ = global_min_separable_box(obj, domain)
        return max(obj.value(x0) - fmin, 0.0), "exact_oracle"
    try:
        fmin, _ = grid_min(obj, domain, GRID_RESOLUTION)
    except UnsupportedOperation:
        return None, "unknown"
    return max(obj.value(x0) - fmin, 0.0), "grid_estimate"


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trace: RunTrace
    report: BoundReport
    curvature: CurvatureChoice
    trace_path: Path | None = None
    report_path: Path | None = None

    def exit_code(self, strict: bool = True) -> int:
        if strict and not self.report.ok:
            return EXIT_VIOLATION
        return EXIT_OK


def run_experiment(cfg: ExperimentConfig, out_dir=None, write: bool = True) -> ExperimentResult:
    """Resolve C and h0, solve, check, and (optionally) write both artifacts."""
    choice = resolve_curvature(cfg)
    obj, dom = cfg.objective, cfg.domain
    x0 = cfg.x0_vector()
    h0, prov = resolve_h0(obj, dom, x0)
    solver_cfg = SolverConfig(cfg.step_rule, choice.C, cfg.epsilon, cfg.max_iters, cfg.seed)
    trace = solve(obj, dom, solver_cfg, x0, h0, prov)
    report = check_trace(trace, obj, dom, certified=choice.certified)
    report.meta.update(
        {
            "name": cfg.name,
            "C_method": choice.estimate.method,
            "C_heuristic": choice.estimate.heuristic,
            "C_analytic_bound": choice.analytic_bound,
            "norm": cfg.norm,
            "seed": cfg.seed,
        }
    )
    result = ExperimentResult(cfg, trace, report, choice)
    if write:
        out = Path(out_dir) if out_dir is not None else Path.cwd()
        result.trace_path = out / (cfg.trace_path or f"{cfg.name}.trace.csv")
        result.report_path = out / (cfg.report_path or f"{cfg.name}.report.json")
        emit_trace_csv(trace, result.trace_path, cfg.digits)
        _atomic_write(result.report_path, format_report(report))
    return result


def _fmt(v, digits: int) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.{digits}g}"


def trace_to_csv(trace: RunTrace, digits: int = 17) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in trace.records:
        buf.write(",".join(_fmt(getattr(r, a), digits) for a in _RECORD_ATTRS) + "\n")
    return buf.getvalue()


def emit_trace_csv(trace: RunTrace, path, digits: int = 17) -> None:
    """Write the trace as CSV. Reals use ``digits`` significant digits."""
    _atomic_write(Path(path), trace_to_csv(trace, digits))


def read_trace_csv(path) -> dict[str, np.ndarray]:
    """Columns of a trace CSV as float arrays; empty cells become NaN."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read trace {path}: {exc.strerror}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or ",".join(rows[0]) != CSV_HEADER:
        raise UsageError(f"{path}: header does not match {CSV_HEADER!r}")
    cols = {name: [] for name in CSV_COLUMNS}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(CSV_COLUMNS):
            raise UsageError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        for name, cell in zip(CSV_COLUMNS, row):
            cols[name].append(float(cell) if cell else math.nan)
    return {k: np.array(v, dtype=np.float64) for k, v in cols.items()}


def format_report(report: BoundReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple[int, int]
    n_points: int


def fit_rate(trace, window: tuple[int, int] | None = None, column: str = "min_gap") -> RateFit | None:
    """Least-squares fit of ``log(value)`` against ``log(t + 1)``.

    ``trace`` is a :class:`RunTrace` or the column dict from
    :func:`read_trace_csv`. Rows with nonpositive values are dropped; if
    every value in the window is zero, returns ``None`` (no fit).
    """
    if isinstance(trace, RunTrace):
        t = trace.column("t")
        y = trace.column(column)
    else:
        if column not in trace:
            raise UsageError(f"unknown column {column!r}")
        t, y = np.asarray(trace["t"]), np.asarray(trace[column])
    lo, hi = window if window is not None else (int(t.min()), int(t.max()))
    sel = (t >= lo) & (t <= hi) & np.isfinite(y)
    if sel.any() and np.all(y[sel] == 0):
        return None
    sel &= y > 0
    n = int(sel.sum())
    if n < 10:
        raise UsageError(f"window [{lo}, {hi}] has {n} positive values of {column}; need at least 10")
    lx, ly = np.log(t[sel] + 1.0), np.log(y[sel])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return RateFit(float(slope), float(intercept), r2, (lo, hi), n)


@dataclass
class SuiteRow:
    name: str
    status: str  # ok | violation | error
    failed_checks: list[str]
    detail: str = ""


@dataclass
class SuiteSummary:
    rows: list[SuiteRow]

    @property
    def n_failed(self) -> int:
        return sum(r.status != "ok" for r in self.rows)

    @property
    def exit_code(self) -> int:
        return EXIT_VIOLATION if self.n_failed else EXIT_OK

    def format_table(self) -> str:
        width = max([len(r.name) for r in self.rows] + [10])
        lines = [f"{'config':<{width}}  {'result':<10} failed checks"]
        for r in self.rows:
            failed = ", ".join(r.failed_checks) or r.detail
            lines.append(f"{r.name:<{width}}  {r.status:<10} {failed}")
        lines.append(f"{len(self.rows) - self.n_failed}/{len(self.rows)} configs passed")
        return "\n".join(lines)


def run_suite(directory, out_dir=None, strict: bool = True, seed: int | None = None, write: bool = True) -> SuiteSummary:
    """Run every ``*.cfg`` in ``directory`` and tabulate the strict checks."""
    directory = Path(directory)
    if not directory.is_dir():
        raise UsageError(f"{directory} is not a readable directory")
    paths = sorted(directory.glob("*.cfg"))
    if not paths:
        raise UsageError(f"{directory} contains no .cfg files")
    rows = []
    for path in paths:
        try:
            cfg = load_config(path)
            if seed is not None:
                cfg = cfg.with_seed(seed)
            res = run_experiment(cfg, out_dir, write=write)
        except ConfigError as exc:
            rows.append(SuiteRow(path.stem, "error", [], f"config error: {exc}"))
            continue
        except FWError as exc:
            rows.append(SuiteRow(path.stem, "error", [], f"{type(exc).__name__}: {exc}"))
            continue
        failed = [c.name for c in res.report.checks if c.status == FAIL]
        status = "violation" if failed and strict else "ok"
        rows.append(SuiteRow(path.stem, status, failed))
    return SuiteSummary(rows)
