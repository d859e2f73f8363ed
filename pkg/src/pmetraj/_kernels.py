"""Hot per-iteration kernels: residual assembly, Hessian assembly, tridiagonal solve.

Each kernel has a numba @njit build and a pure-numpy twin.  The active set is
picked once at import from the PMETRAJ_BACKEND environment variable:
"numba", "numpy", or "auto" (default: numba when importable).

Numerical note shared by both lanes: the slope increment d = D_h x_new - D_h x_curr
is formed once and reused inside log1p(d/y0)/d and the linear terms, so the
near-cancellation when the trajectory barely moves propagates only through the
smooth derivative of the secant ratio instead of blowing up the assembled
residual at fine meshes.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay runnable
    njit = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy lane
# ---------------------------------------------------------------------------

def secant_ratio_numpy(y, y0, eps_switch):
    """Elementwise (ln y - ln y0)/(y - y0) with the near-equal midpoint branch."""
    y = np.asarray(y, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    d = y - y0
    near = np.abs(d) <= eps_switch * np.maximum(y, y0)
    d_safe = np.where(near, 1.0, d)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = np.log1p(d_safe / y0) / d_safe
    return np.where(near, 2.0 / (y + y0), exact)


def slope_derivative_numpy(y, y0, eps_switch):
    """Elementwise [(1 - y0/y) + ln(y0/y)]/(y - y0)^2, equal branch -1/(2y^2)."""
    y = np.asarray(y, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    d = y - y0
    near = np.abs(d) <= eps_switch * np.maximum(y, y0)
    d_safe = np.where(near, 1.0, d)
    z = d_safe / y0
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (z / (1.0 + z) - np.log1p(z)) / (d_safe * d_safe)
    return np.where(near, -0.5 / (y * y), exact)


def residual_interior_numpy(x_new, x_curr, slope_curr, mass, f0_cells,
                            h, tau, a0, eps_switch, damped_start=False):
    """Scheme residual g on nodes (Dirichlet end slots 0).

    g_i = mass_i (x_new_i - x_curr_i)/tau
          + d_h[ f0 R - a0 tau (y - y0) - tau^2 (y - y0)/(y y0) ]_i
    with y = D_h x_new, y0 = D_h x_curr.  With damped_start the secant average
    R is replaced by the fully implicit 1/y and the tau^2 difference is
    dropped (first-order L-stable step used once at startup).
    """
    y = np.diff(x_new) / h
    y0 = slope_curr
    d = y - y0
    if damped_start:
        flux = f0_cells / y - (a0 * tau) * d
    else:
        near = np.abs(d) <= eps_switch * np.maximum(y, y0)
        d_safe = np.where(near, 1.0, d)
        with np.errstate(divide="ignore", invalid="ignore"):
            r_exact = np.log1p(d_safe / y0) / d_safe
        r = np.where(near, 2.0 / (y + y0), r_exact)
        flux = f0_cells * r - (a0 * tau) * d - (tau * tau) * d / (y * y0)
    g = np.zeros_like(x_new)
    g[1:-1] = mass[1:-1] * (x_new[1:-1] - x_curr[1:-1]) / tau + np.diff(flux) / h
    return g


def hessian_tridiag_numpy(x_new, slope_curr, mass, f0_cells, h, tau, a0,
                          eps_switch, damped_start=False):
    """Tridiagonal of the interior linearized system (diag M-1, offdiag M-2).

    Cell coefficient c = -f0 W + a0 tau + tau^2/y^2, all addends nonnegative
    (damped_start: c = f0/y^2 + a0 tau, the exact derivative of the implicit
    flux).
    """
    y = np.diff(x_new) / h
    if damped_start:
        c = f0_cells / (y * y) + a0 * tau
    else:
        w = slope_derivative_numpy(y, slope_curr, eps_switch)
        c = -f0_cells * w + a0 * tau + (tau * tau) / (y * y)
    inv_h2 = 1.0 / (h * h)
    diag = mass[1:-1] / tau + (c[:-1] + c[1:]) * inv_h2
    off = -c[1:-1] * inv_h2
    return diag, off


def thomas_spd_numpy(diag, off, rhs):
    """Thomas elimination for a symmetric tridiagonal system (loop lane).

    Stable without pivoting for the SPD systems assembled here; nonpositive
    pivots indicate a broken system and raise.
    """
    n = diag.shape[0]
    cp = np.empty(n)
    x = np.empty(n)
    piv = diag[0]
    if piv <= 0.0:
        raise ValueError("nonpositive pivot in tridiagonal elimination")
    x[0] = rhs[0] / piv
    for i in range(1, n):
        cp[i - 1] = off[i - 1] / piv
        piv = diag[i] - off[i - 1] * cp[i - 1]
        if piv <= 0.0:
            raise ValueError("nonpositive pivot in tridiagonal elimination")
        x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return x


# ---------------------------------------------------------------------------
# numba lane
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def residual_interior_numba(x_new, x_curr, slope_curr, mass, f0_cells,
                                h, tau, a0, eps_switch, damped_start=False):
        M = x_new.shape[0] - 1
        t2 = tau * tau
        flux = np.empty(M)
        for j in range(M):
            y0 = slope_curr[j]
            y = (x_new[j + 1] - x_new[j]) / h
            d = y - y0
            if damped_start:
                flux[j] = f0_cells[j] / y - (a0 * tau) * d
            else:
                if abs(d) <= eps_switch * max(y, y0):
                    r = 2.0 / (y + y0)
                else:
                    r = math.log1p(d / y0) / d
                flux[j] = f0_cells[j] * r - (a0 * tau) * d - t2 * d / (y * y0)
        g = np.zeros(M + 1)
        for i in range(1, M):
            g[i] = mass[i] * (x_new[i] - x_curr[i]) / tau + (flux[i] - flux[i - 1]) / h
        return g

    @njit(cache=True)
    def hessian_tridiag_numba(x_new, slope_curr, mass, f0_cells,
                              h, tau, a0, eps_switch, damped_start=False):
        M = x_new.shape[0] - 1
        t2 = tau * tau
        c = np.empty(M)
        for j in range(M):
            y0 = slope_curr[j]
            y = (x_new[j + 1] - x_new[j]) / h
            d = y - y0
            if damped_start:
                c[j] = f0_cells[j] / (y * y) + a0 * tau
            else:
                if abs(d) <= eps_switch * max(y, y0):
                    w = -0.5 / (y * y)
                else:
                    z = d / y0
                    w = (z / (1.0 + z) - math.log1p(z)) / (d * d)
                c[j] = -f0_cells[j] * w + a0 * tau + t2 / (y * y)
        inv_h2 = 1.0 / (h * h)
        diag = np.empty(M - 1)
        for i in range(1, M):
            diag[i - 1] = mass[i] / tau + (c[i - 1] + c[i]) * inv_h2
        off = np.empty(M - 2)
        for i in range(1, M - 1):
            off[i - 1] = -c[i] * inv_h2
        return diag, off

    @njit(cache=True)
    def thomas_spd_numba(diag, off, rhs):
        n = diag.shape[0]
        cp = np.empty(n)
        x = np.empty(n)
        piv = diag[0]
        if piv <= 0.0:
            raise ValueError("nonpositive pivot in tridiagonal elimination")
        x[0] = rhs[0] / piv
        for i in range(1, n):
            cp[i - 1] = off[i - 1] / piv
            piv = diag[i] - off[i - 1] * cp[i - 1]
            if piv <= 0.0:
                raise ValueError("nonpositive pivot in tridiagonal elimination")
            x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / piv
        for i in range(n - 2, -1, -1):
            x[i] -= cp[i] * x[i + 1]
        return x

else:  # pragma: no cover
    residual_interior_numba = None
    hessian_tridiag_numba = None
    thomas_spd_numba = None


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

_ENV_VAR = "PMETRAJ_BACKEND"


def _select_backend() -> str:
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError(f"{_ENV_VAR}=numba requested but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise RuntimeError(f"{_ENV_VAR}={choice!r} not understood (use numba, numpy, or auto)")


BACKEND = _select_backend()

if BACKEND == "numba":
    residual_interior = residual_interior_numba
    hessian_tridiag = hessian_tridiag_numba
    thomas_spd = thomas_spd_numba
else:
    residual_interior = residual_interior_numpy
    hessian_tridiag = hessian_tridiag_numpy
    thomas_spd = thomas_spd_numpy


def backend_name() -> str:
    return BACKEND
