"""Error norms against a nested fine-mesh reference, observed-order
computation, and the refinement-study harness.

Coarse and reference runs share Lagrangian labels when the reference cell
count is an integer multiple of the coarse one, so errors are formed by
striding the reference arrays; no spatial interpolation ever enters.
"""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigurationError
from .functional import SolverParams
from .grid import Grid
from .problem import initial_data_from_key, make_problem, recover_density
from .stepper import RunConfig, RunResult, run

NORM_KEYS = ("f_l2", "f_inf", "x_l2", "x_inf")


@dataclass
class ErrorRecord:
    h: float
    tau: float
    err_f_l2: float
    err_f_inf: float
    err_x_l2: float
    err_x_inf: float

    def norm(self, key: str) -> float:
        return getattr(self, f"err_{key}")


@dataclass
class ConvergenceReport:
    m: float
    t_eval: float
    records: list = field(default_factory=list)
    orders: dict = field(default_factory=dict)  # norm key -> list of log2 ratios


@dataclass
class StudyResult:
    report: ConvergenceReport
    runs: dict = field(default_factory=dict)  # "reference" and each coarse M -> RunResult


def _check_nested(coarse_len: int, reference_len: int, stride: int):
    if stride < 1 or reference_len - 1 != stride * (coarse_len - 1):
        raise ConfigurationError(
            f"reference grid ({reference_len - 1} cells) is not a stride-{stride} "
            f"refinement of the coarse grid ({coarse_len - 1} cells)"
        )


def density_error_norms(coarse_x, coarse_f, reference_x, reference_f, stride: int):
    """L2/inf density error at shared labels, weighted by the coarse
    trajectory's deformed spacings h_{x_i} = x_{i+1} - x_{i-1} (half cells at
    the ends)."""
    coarse_x = np.asarray(coarse_x, dtype=float)
    coarse_f = np.asarray(coarse_f, dtype=float)
    _check_nested(coarse_x.shape[0], np.asarray(reference_x).shape[0], stride)
    e = np.asarray(reference_f, dtype=float)[::stride] - coarse_f
    w = np.empty_like(coarse_x)
    w[1:-1] = coarse_x[2:] - coarse_x[:-2]
    w[0] = coarse_x[1] - coarse_x[0]
    w[-1] = coarse_x[-1] - coarse_x[-2]
    l2 = math.sqrt(0.5 * float(np.sum(e * e * w)))
    return l2, float(np.max(np.abs(e)))


def trajectory_error_norms(coarse_x, reference_x, stride: int, grid: Grid):
    """L2/inf trajectory error at shared labels with fixed weights
    (2h interior, h at both ends)."""
    coarse_x = np.asarray(coarse_x, dtype=float)
    reference_x = np.asarray(reference_x, dtype=float)
    _check_nested(coarse_x.shape[0], reference_x.shape[0], stride)
    e = reference_x[::stride] - coarse_x
    w = np.full_like(coarse_x, 2.0 * grid.h)
    w[0] = w[-1] = grid.h
    l2 = math.sqrt(0.5 * float(np.sum(e * e * w)))
    return l2, float(np.max(np.abs(e)))


def observed_orders(records: list) -> dict:
    """log2(err_coarse/err_fine) between successive records for each norm;
    NaN marks an undefined order (zero fine error)."""
    orders = {key: [] for key in NORM_KEYS}
    for prev, nxt in zip(records[:-1], records[1:]):
        for key in NORM_KEYS:
            e0, e1 = prev.norm(key), nxt.norm(key)
            orders[key].append(math.log2(e0 / e1) if e1 > 0.0 else math.nan)
    return orders


def _run_case(m: float, M: int, t_eval: float, initial_data, domain,
              params_base: SolverParams) -> RunResult:
    """One solve at resolution M with tau = h (linear refinement)."""
    grid = Grid(domain[0], domain[1], M)
    f0 = initial_data_from_key(initial_data) if isinstance(initial_data, str) else initial_data
    spec = make_problem(m, grid, f0)
    params = dataclasses.replace(params_base, tau=grid.h)
    return run(RunConfig(spec=spec, params=params, t_final=t_eval))


def _run_case_args(args) -> RunResult:
    return _run_case(*args)


def convergence_study(m: float,
                      h_list: list,
                      reference_M: int,
                      t_eval: float,
                      initial_data: Union[str, Callable],
                      domain=(0.0, 1.0),
                      params_base: Optional[SolverParams] = None,
                      jobs: int = 1) -> StudyResult:
    """Run the reference once and every coarse resolution with tau = h, then
    assemble per-resolution error records and observed orders.

    `initial_data` is a catalog key (or a sampling callable when jobs == 1).
    Every coarse cell count must divide reference_M.
    """
    if params_base is None:
        params_base = SolverParams(tau=1.0)
    length = domain[1] - domain[0]
    m_list = []
    for h in sorted(h_list, reverse=True):
        M = round(length / h)
        if abs(M * h - length) > 1e-12 * length:
            raise ConfigurationError(f"h={h} does not tile the domain of length {length}")
        if reference_M % M != 0:
            raise ConfigurationError(
                f"coarse cell count {M} does not divide the reference count {reference_M}"
            )
        m_list.append(M)
    if t_eval <= 0.0:
        raise ConfigurationError("t_eval must be positive")
    for M in m_list + [reference_M]:
        steps = t_eval * M / length
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigurationError(
                f"t_eval={t_eval} is not a whole number of steps at M={M} (tau = h)"
            )

    cases = [(m, M, t_eval, initial_data, domain, params_base)
             for M in [reference_M] + m_list]
    if jobs > 1:
        if not isinstance(initial_data, str):
            raise ConfigurationError("parallel studies need a catalog key for initial data")
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_case_args, cases))
    else:
        results = [_run_case_args(args) for args in cases]

    runs = {"reference": results[0]}
    ref_state = results[0].final_state
    grid_ref = Grid(domain[0], domain[1], reference_M)
    spec_ref = make_problem(
        m, grid_ref,
        initial_data_from_key(initial_data) if isinstance(initial_data, str) else initial_data,
    )
    f_ref = recover_density(ref_state.x_curr, spec_ref)

    records = []
    for M, res in zip(m_list, results[1:]):
        runs[M] = res
        grid = Grid(domain[0], domain[1], M)
        spec = make_problem(
            m, grid,
            initial_data_from_key(initial_data) if isinstance(initial_data, str) else initial_data,
        )
        x = res.final_state.x_curr
        f = recover_density(x, spec)
        stride = reference_M // M
        f_l2, f_inf = density_error_norms(x, f, ref_state.x_curr, f_ref, stride)
        x_l2, x_inf = trajectory_error_norms(x, ref_state.x_curr, stride, grid)
        records.append(ErrorRecord(h=grid.h, tau=grid.h,
                                   err_f_l2=f_l2, err_f_inf=f_inf,
                                   err_x_l2=x_l2, err_x_inf=x_inf))

    report = ConvergenceReport(m=m, t_eval=t_eval, records=records,
                               orders=observed_orders(records))
    return StudyResult(report=report, runs=runs)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------

CSV_HEADER = ["h", "tau", "err_f_L2", "order", "err_f_inf", "order",
              "err_x_L2", "order", "err_x_inf", "order"]


def report_rows(report: ConvergenceReport) -> list:
    rows = []
    for k, rec in enumerate(report.records):
        row = [rec.h, rec.tau]
        for key in NORM_KEYS:
            row.append(rec.norm(key))
            if k == 0:
                row.append("")
            else:
                o = report.orders[key][k - 1]
                row.append("" if math.isnan(o) else o)
        rows.append(row)
    return rows


def format_table(report: ConvergenceReport) -> str:
    """Aligned plain-text table (errors to 4 significant digits, orders to 3
    decimals)."""
    header = (f"{'h':>12} {'tau':>12} {'err_f_L2':>10} {'ord':>6} {'err_f_inf':>10}"
              f" {'ord':>6} {'err_x_L2':>10} {'ord':>6} {'err_x_inf':>10} {'ord':>6}")
    lines = [f"m = {report.m:g}, t = {report.t_eval:g}", header]
    for k, rec in enumerate(report.records):
        cells = [f"{rec.h:>12.6g}", f"{rec.tau:>12.6g}"]
        for key in NORM_KEYS:
            cells.append(f"{rec.norm(key):>10.4g}")
            if k == 0:
                cells.append(f"{'-':>6}")
            else:
                o = report.orders[key][k - 1]
                cells.append(f"{'-':>6}" if math.isnan(o) else f"{o:>6.3f}")
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"
