"""Property sweeps behind the `check` command.

Each check returns (name, ok, detail); the sweep oracles here are independent
of the assembly path they audit: finite differences for gradients and
Hessians, analytic signs for the secant building blocks, and direct summation
for the discrete identities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import functional
from .functional import SolverParams
from .grid import Grid, d_centered_to_nodes, d_forward, d_wide
from .problem import make_problem, quadratic_bump


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""


def random_admissible(rng: np.random.Generator, grid: Grid, scale: float = 0.3) -> np.ndarray:
    """Strictly increasing nodes with pinned endpoints, jittered cell widths."""
    gaps = 1.0 + scale * rng.uniform(-1.0, 1.0, grid.M)
    x = np.concatenate(([0.0], np.cumsum(gaps)))
    x /= x[-1]
    return grid.x_left + (grid.x_right - grid.x_left) * x


def _random_setup(rng, M=24):
    grid = Grid(0.0, 1.0, M)
    m = rng.uniform(1.3, 3.0)
    spec = make_problem(m, grid, quadratic_bump)
    params = SolverParams(
        tau=10.0 ** rng.uniform(-3.0, -1.0),
        a0=float(rng.uniform(0.0, 2.0)),
    )
    x_curr = random_admissible(rng, grid)
    x_prev = random_admissible(rng, grid)
    coeffs = functional.build_coefficients(x_curr, x_prev, spec, params)
    return spec, params, x_curr, coeffs


# ---------------------------------------------------------------------------
# analytic sign sweeps
# ---------------------------------------------------------------------------

def check_q1_signs(rng, samples=1000) -> CheckResult:
    for _ in range(samples):
        x = rng.uniform(1e-3, 10.0)
        x0 = rng.uniform(1e-3, 10.0)
        _, d1, d2 = functional.q1_oracle(x, x0)
        if not (d1 > 0.0 and d2 <= 0.0):
            return CheckResult(
                "q1 monotone increasing and concave", False,
                f"counterexample x={x!r}, x0={x0!r}: q1'={d1!r}, q1''={d2!r}",
            )
    return CheckResult("q1 monotone increasing and concave", True)


def check_w_nonpositive(rng, samples=1000) -> CheckResult:
    for _ in range(samples):
        y = rng.uniform(1e-3, 10.0)
        y0 = rng.uniform(1e-3, 10.0)
        w = functional.slope_derivative_W(y, y0)
        if not w <= 0.0:
            return CheckResult(
                "secant slope derivative W <= 0", False,
                f"counterexample y={y!r}, y0={y0!r}: W={w!r}",
            )
    return CheckResult("secant slope derivative W <= 0", True)


def check_g_second_nonnegative(rng, samples=1000) -> CheckResult:
    for _ in range(samples):
        y = rng.uniform(1e-3, 10.0)
        y0 = rng.uniform(1e-3, 10.0)
        gpp = functional.g_convex_second(y - 1.0, y0)
        w = functional.slope_derivative_W(y, y0)
        if not gpp >= 0.0:
            return CheckResult(
                "convex-part curvature G'' >= 0", False,
                f"counterexample x={y - 1.0!r}, x0={y0!r}: G''={gpp!r}",
            )
        if abs(gpp + w) > 1e-12 * max(1.0, abs(gpp)):
            return CheckResult(
                "convex-part curvature G'' >= 0", False,
                f"G'' and -W disagree at y={y!r}, y0={y0!r}",
            )
    return CheckResult("convex-part curvature G'' >= 0", True)


def check_branch_continuity(eps_switch: float = 1e-8) -> CheckResult:
    """Both evaluation branches sit within 1e-6 of the equal-slope limit values
    at the switching threshold, for base slopes across [0.1, 10]."""
    for y0 in np.geomspace(0.1, 10.0, 61):
        for rel in (0.9 * eps_switch, 1.1 * eps_switch):  # just inside / outside
            y = y0 * (1.0 + rel)
            r = functional.secant_ratio_R(y, y0, eps_switch)
            w = functional.slope_derivative_W(y, y0, eps_switch)
            dr = abs(r - 1.0 / y0)
            dw = abs(w + 0.5 / y0 ** 2)
            if dr > 1e-6 or dw > 1e-6:
                return CheckResult(
                    "R/W branch continuity at the switch", False,
                    f"counterexample y0={y0!r}, offset={rel!r}: |dR|={dr:.3e}, |dW|={dw:.3e}",
                )
    return CheckResult("R/W branch continuity at the switch", True)


# ---------------------------------------------------------------------------
# calculus oracles
# ---------------------------------------------------------------------------

def gradient_vs_fd(spec, params, x_curr, coeffs, x_new, rel_tol=1e-6, step=5e-4):
    """Max relative mismatch between h*residual and a fourth-order central
    difference of the functional."""
    grid = spec.grid
    X = grid.nodes()
    x_hat = x_new - X
    g = functional.residual(x_new, x_curr, coeffs, spec, params)
    grad = grid.h * g[1:-1]

    fd = np.empty_like(grad)
    for i in range(1, grid.M):
        probes = []
        for k in (-2.0, -1.0, 1.0, 2.0):
            xp = x_hat.copy()
            xp[i] += k * step
            probes.append(functional.eval_F(xp, x_curr, coeffs, spec, params))
        fd[i - 1] = (probes[0] - 8.0 * probes[1] + 8.0 * probes[2] - probes[3]) / (12.0 * step)
    scale = float(np.max(np.abs(grad)))
    err = float(np.max(np.abs(fd - grad))) / scale
    return err, err <= rel_tol


def hessian_vs_fd(spec, params, x_curr, coeffs, x_new, rel_tol=1e-6, step=1e-6):
    """Max relative mismatch between the assembled tridiagonal and central
    differences of the residual."""
    grid = spec.grid
    n = grid.M - 1
    diag, off = functional.hessian_coefficients(x_new, coeffs, spec, params)
    dense = np.diag(diag)
    dense += np.diag(off, 1) + np.diag(off, -1)

    fd = np.empty((n, n))
    for j in range(n):
        xp = x_new.copy()
        xp[j + 1] += step
        xm = x_new.copy()
        xm[j + 1] -= step
        gp = functional.residual(xp, x_curr, coeffs, spec, params)[1:-1]
        gm = functional.residual(xm, x_curr, coeffs, spec, params)[1:-1]
        fd[:, j] = (gp - gm) / (2.0 * step)
    scale = float(np.max(np.abs(dense)))
    err = float(np.max(np.abs(fd - dense))) / scale
    return err, err <= rel_tol


def check_gradient_fd(rng, states=20) -> CheckResult:
    worst = 0.0
    for _ in range(states):
        spec, params, x_curr, coeffs = _random_setup(rng, M=16)
        x_new = random_admissible(rng, spec.grid)
        err, ok = gradient_vs_fd(spec, params, x_curr, coeffs, x_new)
        worst = max(worst, err)
        if not ok:
            return CheckResult(
                "residual matches finite differences of the functional", False,
                f"relative error {err:.3e} at m={spec.m!r}, tau={params.tau!r}",
            )
    return CheckResult(
        "residual matches finite differences of the functional", True,
        f"worst relative error {worst:.3e}",
    )


def check_hessian_fd(rng, states=20) -> CheckResult:
    worst = 0.0
    for _ in range(states):
        spec, params, x_curr, coeffs = _random_setup(rng, M=24)
        x_new = random_admissible(rng, spec.grid)
        err, ok = hessian_vs_fd(spec, params, x_curr, coeffs, x_new)
        worst = max(worst, err)
        if not ok:
            return CheckResult(
                "tridiagonal matches finite differences of the residual", False,
                f"relative error {err:.3e} at m={spec.m!r}, tau={params.tau!r}",
            )
    return CheckResult(
        "tridiagonal matches finite differences of the residual", True,
        f"worst relative error {worst:.3e}",
    )


# ---------------------------------------------------------------------------
# discrete identities
# ---------------------------------------------------------------------------

def check_summation_by_parts(rng, trials=50) -> CheckResult:
    for _ in range(trials):
        M = int(rng.integers(4, 129))
        grid = Grid(0.0, 1.0, M)
        u = rng.standard_normal(M + 1)
        u[0] = u[-1] = 0.0
        c = rng.uniform(0.5, 2.0, M)
        du = d_forward(u, grid)
        lhs = grid.h * float(np.sum(d_centered_to_nodes(c * du, grid)[1:-1] * u[1:-1]))
        rhs = -grid.h * float(np.sum(c * du * du))
        scale = max(abs(lhs), abs(rhs), 1e-300)
        if abs(lhs - rhs) > 1e-12 * scale:
            return CheckResult(
                "summation by parts", False,
                f"mismatch {abs(lhs - rhs):.3e} at M={M}",
            )
    return CheckResult("summation by parts", True)


def check_wide_slope_norm(rng, trials=100) -> CheckResult:
    for _ in range(trials):
        M = int(rng.integers(4, 129))
        grid = Grid(0.0, 1.0, M)
        f = rng.standard_normal(M + 1)
        f[0] = f[-1] = 0.0
        # interior nodes: the centered stencil range (end stencils are one-sided
        # extrapolations and can exceed the cell norm on spiky fields)
        wide = math.sqrt(grid.h * float(np.sum(d_wide(f, grid)[1:-1] ** 2)))
        forward = math.sqrt(grid.h * float(np.sum(d_forward(f, grid) ** 2)))
        if wide > forward * (1.0 + 1e-12):
            return CheckResult(
                "wide-slope norm bounded by forward-slope norm", False,
                f"||wide||={wide!r} > ||forward||={forward!r} at M={M}",
            )
    return CheckResult("wide-slope norm bounded by forward-slope norm", True)


def run_all(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [
        check_q1_signs(rng),
        check_w_nonpositive(rng),
        check_g_second_nonnegative(rng),
        check_branch_continuity(),
        check_gradient_fd(rng),
        check_hessian_fd(rng),
        check_summation_by_parts(rng),
        check_wide_slope_norm(rng),
    ]
