"""Uniform reference grid and the three finite-difference operators.

Node fields live on the M+1 integer points X_i, cell fields on the M
half-integer points X_{i-1/2}; the half-integer value at i-1/2 is stored
at array slot i-1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [x_left, x_right] with M cells."""

    x_left: float
    x_right: float
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"grid needs at least one cell, got M={self.M}")
        if not self.x_right > self.x_left:
            raise ValueError("grid requires x_right > x_left")

    @property
    def h(self) -> float:
        return (self.x_right - self.x_left) / self.M

    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_left, self.x_right, self.M + 1)

    def cell_centers(self) -> np.ndarray:
        x = self.nodes()
        return 0.5 * (x[:-1] + x[1:])


def _require_node_field(l: np.ndarray, grid: Grid, name: str = "field") -> np.ndarray:
    l = np.asarray(l, dtype=float)
    if l.shape != (grid.M + 1,):
        raise ValueError(
            f"{name} has length {l.shape}, expected {grid.M + 1} node values"
        )
    return l


def _require_cell_field(phi: np.ndarray, grid: Grid, name: str = "field") -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (grid.M,):
        raise ValueError(
            f"{name} has length {phi.shape}, expected {grid.M} cell values"
        )
    return phi


def d_forward(l: np.ndarray, grid: Grid) -> np.ndarray:
    """Forward difference node -> cell: (l_i - l_{i-1})/h at i-1/2."""
    l = _require_node_field(l, grid)
    return np.diff(l) / grid.h


def d_centered_to_nodes(phi: np.ndarray, grid: Grid) -> np.ndarray:
    """Centered difference cell -> node: (phi_{i+1/2} - phi_{i-1/2})/h.

    Defined on interior nodes only; the Dirichlet end slots are set to 0
    and must never enter norms or assembly.
    """
    phi = _require_cell_field(phi, grid)
    out = np.zeros(grid.M + 1)
    out[1:-1] = np.diff(phi) / grid.h
    return out


def d_wide(l: np.ndarray, grid: Grid) -> np.ndarray:
    """Wide (two-cell) difference node -> node, one-sided at both ends.

    Interior: (l_{i+1} - l_{i-1})/2h.  Ends use the second-order
    one-sided stencils (4l_1 - l_2 - 3l_0)/2h and (l_{M-2} - 4l_{M-1} + 3l_M)/2h,
    exact for quadratics at every node.
    """
    l = _require_node_field(l, grid)
    if grid.M < 2:
        raise ValueError("d_wide needs M >= 2")
    two_h = 2.0 * grid.h
    out = np.empty(grid.M + 1)
    out[1:-1] = (l[2:] - l[:-2]) / two_h
    out[0] = (4.0 * l[1] - l[2] - 3.0 * l[0]) / two_h
    out[-1] = (l[-3] - 4.0 * l[-2] + 3.0 * l[-1]) / two_h
    return out
