"""Dispersive readout of the three-spin module through resonators on the matter modes.

A resonator on matter spin ``p`` sees a qubit whose transition frequency is
conditioned on the z-eigenvalues of the other two spins through the ZZ and
ZZZ couplings. Each of the eight product states therefore shifts the
resonator by its own amount. Comparing the shifts seen by resonators on both
matter spins can separate all eight states.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from .circuit import SpinModelParams, mhz

# z-eigenvalues (z0, zg, z1) in Fock order: bit 0 means sigma^z = +1
STATES = np.array([[1 - 2 * a, 1 - 2 * b, 1 - 2 * c] for a in (0, 1) for b in (0, 1) for c in (0, 1)])
PAIRS = list(itertools.combinations(range(8), 2))
FULL_MASK = (1 << len(PAIRS)) - 1


def state_label(z):
    return "".join("u" if v > 0 else "d" for v in z)


LABELS = [state_label(z) for z in STATES]


@dataclass(frozen=True)
class ReadoutConfig:
    """Resonator coupled to matter spin ``probe``.

    ``detunings`` is the bare detuning grid Omega_probe - omega_r in rad/ns.
    """

    spin: SpinModelParams
    g_r: float
    probe: int
    detunings: np.ndarray
    delta: float = mhz(1.0)
    chi_max: float | None = None

    def __post_init__(self):
        if not self.g_r > 0:
            raise ValueError(f"g_r must be positive, got {self.g_r}")
        if self.probe not in (0, 1):
            raise ValueError(f"probe must be 0 or 1, got {self.probe}")
        d = np.asarray(self.detunings, dtype=float)
        if d.ndim != 1 or d.size < 1 or not np.all(np.isfinite(d)):
            raise ValueError("detunings must be a finite 1-D array")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        object.__setattr__(self, "detunings", d)

    @property
    def chi_limit(self):
        """Dispersive-validity bound on |chi|; g_r / 5 unless set."""
        return self.g_r / 5 if self.chi_max is None else self.chi_max


def qubit_frequencies(sp: SpinModelParams, probe: int):
    """Conditioned transition frequency of the probe spin for each of the 8 states."""
    if probe == 1:
        sp = sp.swapped()
        z = STATES[:, ::-1]
    else:
        z = STATES
    zg, zo = z[:, 1], z[:, 2]
    return sp.Omega0 - 2 * (sp.Jz_0g * zg + sp.Jz_01 * zo + sp.Jz_0g1 * zg * zo), z[:, 0]


@dataclass(frozen=True)
class ShiftTable:
    detunings: np.ndarray   # bare detunings (n,)
    chi: np.ndarray         # (8, n), nan at poles
    valid: np.ndarray       # (n,) all states finite and |chi| <= limit
    poles: np.ndarray       # bare detunings where some state diverges
    labels: tuple

    def write_csv(self, path):
        unit = mhz(1.0)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["Delta_2piMHz", *[f"chi_{s}_2piMHz" for s in self.labels], "valid"])
            for n, d in enumerate(self.detunings):
                w.writerow([repr(float(d / unit)), *[repr(float(c / unit)) for c in self.chi[:, n]],
                            int(self.valid[n])])


def dispersive_shifts(cfg: ReadoutConfig, pole_tol=1e-12) -> ShiftTable:
    """chi = -g^2/(D + a) - (g^2/D - g^2/(D + a)) sigma^z_probe for every state.

    D is the state-conditioned qubit-resonator detuning. Points within
    ``pole_tol`` (relative to g_r) of D = 0 or D = -alpha are returned as nan
    and marked invalid.
    """
    wq, zp = qubit_frequencies(cfg.spin, cfg.probe)
    omega_p = cfg.spin.Omega0 if cfg.probe == 0 else cfg.spin.Omega1
    alpha = cfg.spin.alpha0 if cfg.probe == 0 else cfg.spin.alpha1
    g2 = cfg.g_r**2
    D = cfg.detunings[None, :] + (wq - omega_p)[:, None]
    Da = D + alpha
    at_pole = (np.abs(D) <= pole_tol * cfg.g_r) | (np.abs(Da) <= pole_tol * cfg.g_r)
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = -g2 / Da - (g2 / D - g2 / Da) * zp[:, None]
    chi = np.where(at_pole, np.nan, chi)
    valid = np.all(np.isfinite(chi), axis=0) & np.all(np.abs(np.nan_to_num(chi, nan=np.inf)) <= cfg.chi_limit, axis=0)
    poles = np.sort(np.unique(np.concatenate([omega_p - wq, omega_p - wq - alpha])))
    return ShiftTable(cfg.detunings, chi, valid, poles, tuple(LABELS))


def separation_bits(table: ShiftTable, delta: float):
    """Per detuning, a bitmask over the 28 state pairs separated by at least delta."""
    chi = np.nan_to_num(table.chi, nan=np.inf)
    bits = np.zeros(chi.shape[1], dtype=np.int64)
    for b, (i, j) in enumerate(PAIRS):
        with np.errstate(invalid="ignore"):
            sep = np.abs(chi[i] - chi[j]) >= delta
        bits |= sep.astype(np.int64) << b
    return bits


def _rectangles(mask, x, y):
    """Exact cover of a boolean grid by rectangles: row runs merged down columns."""
    rects = []
    open_runs = {}
    for i in range(mask.shape[0] + 1):
        runs = set()
        if i < mask.shape[0]:
            row = np.concatenate([[False], mask[i], [False]])
            edges = np.flatnonzero(np.diff(row.astype(np.int8)))
            runs = {(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])}
        for run in list(open_runs):
            if run not in runs:
                i0 = open_runs.pop(run)
                rects.append(((float(x[i0]), float(x[i - 1])), (float(y[run[0]]), float(y[run[1]]))))
        for run in runs:
            open_runs.setdefault(run, i)
    return sorted(rects)


@dataclass(frozen=True)
class Windows:
    mask: np.ndarray        # (n0, n1) joint distinguishability
    single0: np.ndarray     # (n0,) probe 0 alone separates all states
    single1: np.ndarray     # (n1,) probe 1 alone
    rectangles: list        # [((d0_lo, d0_hi), (d1_lo, d1_hi)), ...] in rad/ns
    valid: np.ndarray       # (n0, n1) dispersive on both probes

    @property
    def n_joint(self):
        return int(self.mask.sum())

    @property
    def n_single(self):
        """Grid points of the product grid covered by either single-probe criterion (within validity)."""
        return int(self.single_mask.sum())

    @property
    def single_mask(self):
        return self.valid & (self.single0[:, None] | self.single1[None, :])

    def summary(self):
        unit = mhz(1.0)
        return {
            "joint_points": self.n_joint,
            "single_probe_points": self.n_single,
            "rectangles_2piMHz": [[[a / unit, b / unit], [c / unit, d / unit]]
                                  for (a, b), (c, d) in self.rectangles],
        }


def distinguishability_windows(cfg0: ReadoutConfig, cfg1: ReadoutConfig) -> Windows:
    """Detuning rectangles where the two probes jointly separate all 8 states.

    A grid point (D0, D1) qualifies when every state is dispersive on both
    probes (|chi| within the validity limit) and each of the 28 state pairs
    differs by at least ``delta`` in the probe-0 or the probe-1 shift.
    """
    if cfg0.spin != cfg1.spin:
        raise ValueError("both probe configurations must share spin parameters")
    if cfg0.probe == cfg1.probe:
        raise ValueError("need one configuration per matter spin")
    if cfg0.probe == 1:
        cfg0, cfg1 = cfg1, cfg0
    if cfg0.delta != cfg1.delta:
        raise ValueError("both probe configurations must share delta")
    delta = cfg0.delta
    t0, t1 = dispersive_shifts(cfg0), dispersive_shifts(cfg1)
    b0, b1 = separation_bits(t0, delta), separation_bits(t1, delta)
    valid = t0.valid[:, None] & t1.valid[None, :]
    mask = valid & ((b0[:, None] | b1[None, :]) == FULL_MASK)
    return Windows(mask, (b0 == FULL_MASK) & t0.valid, (b1 == FULL_MASK) & t1.valid,
                   _rectangles(mask, t0.detunings, t1.detunings), valid)


def default_detunings(span_mhz=1500.0, step_mhz=2.0):
    n = int(round(2 * span_mhz / step_mhz)) + 1
    return mhz(1.0) * np.linspace(-span_mhz, span_mhz, n)
