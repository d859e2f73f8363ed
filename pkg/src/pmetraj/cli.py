"""Command-line entry point: `pmetraj solve|convergence|check`."""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analysis, stepper
from .config import Config, parse_number
from .csvio import write_csv_atomic, write_text_atomic
from .errors import ConfigurationError, SolverError
from .functional import LAMBDA_STAR, SolverParams
from .grid import Grid
from .problem import initial_data_from_key, make_problem

_SCHEMA = {
    "problem": {"m", "domain", "initial_data"},
    "discretization": {"M", "tau", "t_final", "A0"},
    "newton": {"tol_lambda", "tol_residual", "max_iter", "lambda_prime",
               "c_newton", "eps_switch"},
    "study": {"h_list", "reference_M", "t_eval"},
    "output": {"dir", "snapshot_every"},
}


def _parse_domain(cfg: Config):
    raw = cfg.get_str("problem", "domain", "0,1")
    parts = [p.strip() for p in raw.split(",")]
    cv = cfg.sections.get("problem", {}).get("domain")
    if len(parts) != 2:
        cfg._fail(cv, "problem", "domain", f"expected 'left,right', got {raw!r}")
    try:
        left, right = parse_number(parts[0]), parse_number(parts[1])
    except ValueError:
        cfg._fail(cv, "problem", "domain", f"expected two numbers, got {raw!r}")
    if not right > left:
        cfg._fail(cv, "problem", "domain", "right end must exceed left end")
    return left, right


def _parse_m_values(cfg: Config) -> list[float]:
    values = cfg.get_number_list("problem", "m")
    for v in values:
        if not v > 1.0:
            cv = cfg.sections["problem"]["m"]
            cfg._fail(cv, "problem", "m", f"exponent must exceed 1, got {v!r}")
    return values


def _build_params(cfg: Config, tau: float) -> SolverParams:
    lam_prime = cfg.get_number("newton", "lambda_prime", 0.9)
    if not (LAMBDA_STAR <= lam_prime < 1.0):
        cv = cfg.sections.get("newton", {}).get("lambda_prime")
        cfg._fail(cv, "newton", "lambda_prime",
                  f"must lie in [{LAMBDA_STAR:.6f}, 1), got {lam_prime!r}")
    max_iter = cfg.get_int("newton", "max_iter", 100)
    if max_iter < 1:
        cv = cfg.sections.get("newton", {}).get("max_iter")
        cfg._fail(cv, "newton", "max_iter", "must be at least 1")
    return SolverParams(
        tau=tau,
        a0=cfg.get_number("discretization", "A0", 1.0),
        eps_switch=cfg.get_number("newton", "eps_switch", 1e-8),
        newton_tol_lambda=cfg.get_number("newton", "tol_lambda", 1e-9),
        newton_tol_residual=cfg.get_number("newton", "tol_residual", 1e-12),
        newton_max_iter=max_iter,
        lambda_prime=lam_prime,
        c_newton=cfg.get_number("newton", "c_newton", 1.0),
    )


def _output_dir(cfg: Config) -> Path:
    env = os.environ.get("PME_OUTPUT_DIR")
    if env:
        return Path(env)
    return Path(cfg.get_str("output", "dir", "pmetraj-out"))


def cmd_solve(args) -> int:
    cfg = Config.load(args.config)
    cfg.reject_unknown(_SCHEMA)
    m_values = _parse_m_values(cfg)
    if len(m_values) != 1:
        cv = cfg.sections["problem"]["m"]
        cfg._fail(cv, "problem", "m", "solve expects a single exponent")
    left, right = _parse_domain(cfg)
    M = cfg.get_int("discretization", "M")
    if M < 2:
        cfg._fail(cfg.sections["discretization"]["M"], "discretization", "M",
                  "need at least 2 cells")
    tau = cfg.get_number("discretization", "tau")
    cfg.require_positive(tau, "discretization", "tau")
    t_final = cfg.get_number("discretization", "t_final")
    if t_final < 0.0:
        cfg._fail(cfg.sections["discretization"]["t_final"], "discretization",
                  "t_final", "must be nonnegative")

    grid = Grid(left, right, M)
    f0 = initial_data_from_key(cfg.get_str("problem", "initial_data"))
    spec = make_problem(m_values[0], grid, f0)
    params = _build_params(cfg, tau)
    out_dir = _output_dir(cfg)
    config = stepper.RunConfig(
        spec=spec, params=params, t_final=t_final,
        snapshot_every=cfg.get_int("output", "snapshot_every", 0),
        output_dir=out_dir,
    )
    result = stepper.run(config)
    total_newton = sum(r.iterations for r in result.newton_reports)
    e_start = result.energy_trace[0][2]
    e_end = result.energy_trace[-1][2]
    print(
        f"solve: {len(result.newton_reports)} steps, {total_newton} Newton iterations, "
        f"E_h drop {e_start - e_end:.6e}, outputs in {out_dir}"
    )
    return 0


def cmd_convergence(args) -> int:
    cfg = Config.load(args.config)
    cfg.reject_unknown(_SCHEMA)
    if "study" not in cfg.sections:
        raise ConfigurationError(f"{cfg.path}: convergence needs a [study] section")
    m_values = _parse_m_values(cfg)
    left, right = _parse_domain(cfg)
    h_list = cfg.get_number_list("study", "h_list")
    reference_M = cfg.get_int("study", "reference_M")
    t_eval = cfg.get_number("study", "t_eval")
    cfg.require_positive(t_eval, "study", "t_eval")
    initial_key = cfg.get_str("problem", "initial_data")
    params = _build_params(cfg, tau=1.0)
    out_dir = _output_dir(cfg)

    for m in m_values:
        study = analysis.convergence_study(
            m, h_list, reference_M, t_eval, initial_key,
            domain=(left, right), params_base=params, jobs=args.jobs,
        )
        tag = f"{m:g}"
        write_csv_atomic(out_dir / f"convergence_{tag}.csv",
                         analysis.CSV_HEADER, analysis.report_rows(study.report))
        table = analysis.format_table(study.report)
        write_text_atomic(out_dir / f"convergence_{tag}.txt", table)
        print(table, end="")
    return 0


def cmd_check(args) -> int:
    from . import checks

    results = checks.run_all(args.seed)
    failed = [r for r in results if not r.ok]
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        suffix = f": {r.detail}" if (r.detail and not r.ok) else ""
        print(f"{status}  {r.name}{suffix}")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pmetraj",
        description="Second-order Lagrangian trajectory solver for the porous "
                    "medium equation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configured solve")
    p_solve.add_argument("--config", required=True, help="path to a config file")

    p_conv = sub.add_parser("convergence", help="run a grid-refinement study")
    p_conv.add_argument("--config", required=True, help="path to a config file")
    p_conv.add_argument("--jobs", type=int, default=1,
                        help="worker processes for coarse cases (default 1)")

    p_check = sub.add_parser("check", help="run the property sweeps")
    p_check.add_argument("--seed", type=int, default=0, help="sweep RNG seed")

    args = parser.parse_args(argv)
    handler = {"solve": cmd_solve, "convergence": cmd_convergence,
               "check": cmd_check}[args.command]
    try:
        return handler(args)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
