"""Rectangular complex samples over two labeled, strictly monotone axes."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .lattice import ConfigurationError


@dataclass(frozen=True)
class ScanGrid:
    """``samples[i, j]`` is the value at ``(x[i], y[j])``."""

    x: np.ndarray
    y: np.ndarray
    samples: np.ndarray
    x_label: str = "x"
    y_label: str = "y"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        s = np.asarray(self.samples, dtype=complex)
        if x.ndim != 1 or y.ndim != 1 or s.shape != (len(x), len(y)):
            raise ConfigurationError(f"samples shape {s.shape} does not match axes ({len(x)}, {len(y)})")
        for name, ax in (("x", x), ("y", y)):
            if len(ax) > 1 and not (np.all(np.diff(ax) > 0) or np.all(np.diff(ax) < 0)):
                raise ConfigurationError(f"axis {name} must be strictly monotone")
        for arr in (x, y, s):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "samples", s)

    @property
    def shape(self):
        return self.samples.shape

    def to_csv(self, path, columns=None, extra=None):
        """Write one row per sample, x-major. ``extra`` maps column name to a
        function of the complex sample array returning same-shape values."""
        columns = columns or (self.x_label, self.y_label, "re", "im")
        extra = extra or {}
        cols = [np.repeat(self.x, len(self.y)), np.tile(self.y, len(self.x)),
                self.samples.real.ravel(), self.samples.imag.ravel()]
        cols += [np.asarray(fn(self.samples)).ravel() for fn in extra.values()]
        header = list(columns) + list(extra)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in zip(*cols):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        """Read a grid written by :meth:`to_csv` (first four columns x, y, re, im)."""
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 2 or len(rows[0]) < 4:
            raise ConfigurationError(f"{path}: expected header plus rows with at least 4 columns")
        header = rows[0]
        try:
            data = np.array([[float(v) for v in r[:4]] for r in rows[1:]])
        except ValueError as exc:
            raise ConfigurationError(f"{path}: {exc}") from None
        xs = np.unique(data[:, 0])
        ys = np.unique(data[:, 1])
        if len(xs) * len(ys) != len(data):
            raise ConfigurationError(f"{path}: samples do not form a rectangular grid")
        order = np.lexsort((data[:, 1], data[:, 0]))
        vals = (data[order, 2] + 1j * data[order, 3]).reshape(len(xs), len(ys))
        return cls(xs, ys, vals, header[0], header[1])
