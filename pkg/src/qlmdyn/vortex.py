"""Zero detection in sampled complex fields by plaquette phase winding.

Each unit cell of the grid is traversed counter-clockwise in (x, y) index
order; the wrapped phase increments along its four edges sum to 2*pi times an
integer, the cell's winding. Windings are +1 around a simple zero of an
analytic-like field ``(x - x0) + i (y - y0)`` and -1 around its conjugate.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .grid import ScanGrid


def wrap_angle(delta):
    """Map radians into (-pi, pi]; ``-pi`` goes to ``+pi``."""
    arr = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("wrap_angle requires finite input")
    out = kernels.wrap_angles(arr)
    return float(out) if np.ndim(delta) == 0 else out


@dataclass(frozen=True)
class VortexList:
    """Nonzero plaquette windings plus cells whose corners contain exact zeros."""

    cells: np.ndarray          # (n, 2) int: lower-left corner (i, j)
    windings: np.ndarray       # (n,) int
    indeterminate: np.ndarray  # (m, 2) int
    x: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.windings)

    @property
    def centers(self):
        i, j = self.cells[:, 0], self.cells[:, 1]
        return np.column_stack([(self.x[i] + self.x[i + 1]) / 2, (self.y[j] + self.y[j + 1]) / 2])

    @property
    def n_plus(self):
        return int(np.sum(self.windings > 0))

    @property
    def n_minus(self):
        return int(np.sum(self.windings < 0))

    def to_csv(self, path, labels=("x", "y")):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([labels[0], labels[1], "winding"])
            for (cx, cy), nu in zip(self.centers, self.windings):
                w.writerow([repr(float(cx)), repr(float(cy)), int(nu)])

    def summary(self, boundary=None):
        out = {"n_plus": self.n_plus, "n_minus": self.n_minus, "boundary": boundary,
               "n_indeterminate": int(len(self.indeterminate))}
        return out

    def dump_summary(self, path, boundary=None):
        with open(path, "w") as fh:
            json.dump(self.summary(boundary), fh, indent=1)


def _as_array(grid):
    if isinstance(grid, ScanGrid):
        return grid.samples, grid.x, grid.y
    vals = np.asarray(grid, dtype=complex)
    return vals, np.arange(vals.shape[0], dtype=float), np.arange(vals.shape[1], dtype=float)


def _check(vals):
    if vals.ndim != 2 or vals.shape[0] < 2 or vals.shape[1] < 2:
        raise ValueError(f"need a grid of at least 2x2 samples, got shape {vals.shape}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("grid contains non-finite samples")


def winding_field(grid):
    """Integer winding of every plaquette, shape (nx-1, ny-1), and the mask of
    plaquettes touching an exactly zero sample."""
    vals, _, _ = _as_array(grid)
    _check(vals)
    raw = kernels.plaquette_sums(np.angle(vals))
    nu = np.rint(raw).astype(np.int64)
    zero = vals == 0
    bad = zero[:-1, :-1] | zero[1:, :-1] | zero[:-1, 1:] | zero[1:, 1:]
    return nu, bad


def plaquette_windings(grid) -> VortexList:
    """All plaquettes with nonzero winding, in row-major cell order.

    Cells with an exact-zero corner are listed as indeterminate instead.
    """
    vals, x, y = _as_array(grid)
    nu, bad = winding_field(grid)
    keep = (nu != 0) & ~bad
    cells = np.argwhere(keep)
    wind = nu[keep]
    if np.any(np.abs(wind) > 1):
        warnings.warn("plaquette winding |nu| > 1: the grid may under-resolve nearby zeros; "
                      "consider refining it", RuntimeWarning, stacklevel=2)
    return VortexList(cells, wind, np.argwhere(bad), x, y)


def boundary_winding(grid) -> int:
    """Winding of the outer boundary loop, traversed counter-clockwise."""
    vals, _, _ = _as_array(grid)
    _check(vals)
    if np.any(vals[[0, -1], :] == 0) or np.any(vals[:, [0, -1]] == 0):
        raise ValueError("boundary contains an exact zero; winding is indeterminate")
    ph = np.angle(vals)
    loop = np.concatenate([ph[:, 0], ph[-1, 1:], ph[-2::-1, -1], ph[0, -2::-1]])
    total = np.sum(kernels.wrap_angles(np.diff(loop)))
    return int(round(total / (2 * math.pi)))
