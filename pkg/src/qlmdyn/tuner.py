"""Multi-start simplex tuning of circuit elements to a target (delta_eff, j_eff).

Free parameters are C, C0, C1 (F) and E0, E1, Ec (rad/ns); K and Es stay
fixed. The simplex works on log-parameters. Penalties are quadratic hinges
with weight 1e3 in the same (2*pi*MHz) units as the fit terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize

from .circuit import CAP_TO_NS, CircuitParams, bare_detuning, ghz, hierarchy_ratios, mhz, spin_params
from .circuit_dynamics import EffectiveParams, FitError, extract_effective_params

FREE = ("C", "C0", "C1", "E0", "E1", "Ec")
# t*m = 2 at t = 49.5 ns
DEFAULT_MASS = -2.0 / 49.5
PENALTY = 1e3
# objectives closer than this to the minimum are ties, resolved by start index
TIE_TOL = 1e-6


@dataclass(frozen=True)
class TuneSpec:
    target_ratio: float = -2.0
    target_mass: float = DEFAULT_MASS
    K: float = 1e-15
    Es: float = ghz(0.5)
    bounds: dict = field(default_factory=lambda: {
        "C": (5e-15, 100e-15),
        "C0": (0.5e-15, 100e-15),
        "C1": (0.5e-15, 100e-15),
        "E0": (ghz(1.0), ghz(2000.0)),
        "E1": (ghz(1.0), ghz(2000.0)),
        "Ec": (ghz(1.0), ghz(2000.0)),
    })
    alpha_min: float = mhz(100.0)
    hierarchy_max: float = 0.15
    n_starts: int = 8
    max_evals: int = 400
    seed: int = 0
    n_levels: int = 4
    # centre of the seed capacitances (C, C0, C1) before per-start jitter
    seed_caps: tuple = (8e-15, 10e-15, 10e-15)

    def __post_init__(self):
        if not 0 < abs(self.target_ratio) <= 10:
            raise ValueError(f"|target_ratio| must be in (0, 10], got {self.target_ratio}")
        if self.target_mass == 0:
            raise ValueError("target_mass must be nonzero")
        for k in FREE:
            lo, hi = self.bounds[k]
            if not 0 < lo < hi:
                raise ValueError(f"bounds for {k} must satisfy 0 < lo < hi, got {(lo, hi)}")
        if self.n_starts < 1 or self.max_evals < 1:
            raise ValueError("n_starts and max_evals must be >= 1")

    @property
    def delta_target(self):
        return 2.0 * self.target_mass

    @property
    def j_target(self):
        return self.target_ratio * self.target_mass / 2.0

    def params(self, values):
        return CircuitParams(K=self.K, Es=self.Es, **dict(zip(FREE, values)))

    def in_bounds(self, values):
        return all(self.bounds[k][0] <= v <= self.bounds[k][1] for k, v in zip(FREE, values))


def _bound_violation(spec, values):
    out = 0.0
    for k, v in zip(FREE, values):
        lo, hi = spec.bounds[k]
        if v < lo:
            out += math.log(lo / v) ** 2
        elif v > hi:
            out += math.log(v / hi) ** 2
    return out


def constraint_penalty(spec: TuneSpec, p: CircuitParams):
    """Hinge penalties for weak anharmonicity and broken hierarchy (unweighted)."""
    sp = spin_params(p)
    unit = mhz(1.0)
    pen = sum(max(0.0, spec.alpha_min - abs(a)) ** 2 for a in sp.alphas) / unit**2
    rz, rx = hierarchy_ratios(sp)
    pen += max(0.0, rz - spec.hierarchy_max) ** 2 + max(0.0, rx - spec.hierarchy_max) ** 2
    return pen


def objective(spec: TuneSpec, values):
    """Pure map from free parameter values to the scalar objective."""
    values = np.asarray(values, dtype=float)
    unit = mhz(1.0)
    base = PENALTY * 1e6 * _bound_violation(spec, values)
    try:
        p = spec.params(values)
        eff = extract_effective_params(p, spec.n_levels)
    except (ValueError, FitError, np.linalg.LinAlgError):
        return 1e12 + base
    fit = ((eff.delta_eff - spec.delta_target) / unit) ** 2 + ((eff.j_eff - abs(spec.j_target)) / unit) ** 2
    return fit + PENALTY * constraint_penalty(spec, p) + base


def _clip(spec, values):
    return np.array([min(max(v, spec.bounds[k][0]), spec.bounds[k][1]) for k, v in zip(FREE, values)])


def bare_seed(spec: TuneSpec, index=0, rng=None, shifts=(0.0, 0.0), caps=None):
    """Circuit values whose bare spin model hits the target detuning and coupling.

    Capacitances and the Omega_0 / Omega_g ratio are jittered per start index;
    E0, E1, Ec are then solved from bare_detuning = delta* - shifts[0] and
    |Jx| = |j*| - shifts[1] with a least-squares root search in log space.
    ``shifts`` carries the effective-minus-bare renormalisation when the seed
    is refined.
    """
    rng = rng if rng is not None else np.random.default_rng([spec.seed, index])
    jit = 0.0 if index == 0 else 1.0
    C, C0, C1 = spec.seed_caps if caps is None else caps
    C *= math.exp(jit * rng.uniform(-0.3, 0.3))
    C0 *= math.exp(jit * rng.uniform(-0.5, 0.5))
    C1 *= math.exp(jit * rng.uniform(-0.5, 0.5))
    ratio = math.exp(jit * rng.uniform(-0.15, 0.15))
    caps = _clip(spec, [C, C0, C1, 1, 1, 1])[:3]

    cg = (4 * caps[0] + spec.K) * CAP_TO_NS
    cs0 = (2 * caps[0] + 2 * caps[1] + spec.K) * CAP_TO_NS
    cs1 = (2 * caps[0] + 2 * caps[2] + spec.K) * CAP_TO_NS
    # harmonic estimates: r^2 = 1 / (2 Cs Omega), Ec = Omega_g^2 (4C + K) / 4
    pref = math.sqrt(2) * spec.Es * math.exp(-0.04)
    prod = 1.0 / (2 * cs0) / cg / (2 * cs1)
    og = ((pref / abs(spec.j_target)) ** 2 * prod / (ratio * (ratio + 1))) ** (1 / 3)
    o0 = ratio * og
    o1 = o0 + og
    Ec = og * og * cg / 4
    E0 = max(cs0 * o0 * o0 / 2 - Ec, 1.0)
    E1 = max(cs1 * o1 * o1 / 2 - Ec, 1.0)
    unit = mhz(1.0)

    def resid(logs):
        e0, e1, ec = np.exp(logs)
        try:
            sp = spin_params(spec.params([*caps, e0, e1, ec]))
        except ValueError:
            return [1e6, 1e6, 1e6]
        return [(bare_detuning(sp) - spec.delta_target + shifts[0]) / unit,
                (abs(sp.Jx_0g1) - abs(spec.j_target) + shifts[1]) / unit,
                10 * math.log(sp.Omega0 / (ratio * sp.Omegag))]

    sol = least_squares(resid, np.log([E0, E1, Ec]), xtol=1e-14, ftol=1e-14)
    values = np.concatenate([caps, np.exp(sol.x)])
    return spec.params(_clip(spec, values))


@dataclass
class TuneReport:
    starts: list
    best_index: int
    objective: float
    params: CircuitParams
    effective: EffectiveParams
    feasible: bool
    diagnostics: dict

    def to_dict(self):
        return {
            "starts": self.starts,
            "best_index": self.best_index,
            "objective": self.objective,
            "params": self.params.to_dict(),
            "verification": {
                **self.effective.to_dict(),
                "feasible": self.feasible,
                **self.diagnostics,
            },
        }


def _values(p):
    return np.array([getattr(p, k) for k in FREE])


def refined_seed(spec: TuneSpec, index=0, rounds=6, caps=None):
    """Bare seed re-solved with the measured effective renormalisation folded in."""
    shifts = (0.0, 0.0)
    p = bare_seed(spec, index, shifts=shifts, caps=caps)
    for _ in range(rounds):
        try:
            eff = extract_effective_params(p, spec.n_levels)
        except FitError:
            break
        shifts = (shifts[0] + eff.delta_eff - spec.delta_target,
                  shifts[1] + eff.j_eff - abs(spec.j_target))
        p = bare_seed(spec, index, shifts=shifts, caps=caps)
    return p


def tune(spec: TuneSpec = TuneSpec()):
    """Multi-start Nelder-Mead from bare seeds; returns (params, effective, report)."""
    rng = np.random.default_rng(spec.seed)
    starts = []
    finals = []
    for i in range(spec.n_starts):
        seed = refined_seed(spec, i)
        x0 = np.log(_values(seed))
        f0 = objective(spec, np.exp(x0))
        trace = [f0]

        def fun(x):
            val = objective(spec, np.exp(x))
            trace.append(val)
            return val

        simplex = [x0]
        for j in range(len(x0)):
            step = np.zeros_like(x0)
            step[j] = 2e-3 * (1 if rng.uniform() < 0.5 else -1)
            simplex.append(x0 + step)
        res = minimize(fun, x0, method="Nelder-Mead",
                       options={"maxfev": spec.max_evals, "initial_simplex": np.array(simplex),
                                "xatol": 1e-7, "fatol": 1e-6})
        x = res.x if res.fun <= f0 else x0
        fx = min(res.fun, f0)
        starts.append({"index": i, "seed": spec.params(np.exp(x0)).to_dict(), "seed_objective": f0,
                       "final_objective": fx, "evaluations": int(res.nfev),
                       "objective_trace": [float(v) for v in trace]})
        finals.append((fx, i, x))
    lowest = min(f for f, _, _ in finals)
    fx, i, x = next(t for t in finals if t[0] <= lowest + TIE_TOL)
    p = spec.params(np.exp(x))
    eff = extract_effective_params(p, spec.n_levels)
    sp = spin_params(p)
    rz, rx = hierarchy_ratios(sp)
    pen = constraint_penalty(spec, p)
    diag = {
        "alphas_2piMHz": [a / mhz(1) for a in sp.alphas],
        "hierarchy_jz_over_omega": rz,
        "hierarchy_jx_over_alpha": rx,
        "constraint_penalty": pen,
        "in_bounds": spec.in_bounds(_values(p)),
    }
    feasible = pen == 0 and spec.in_bounds(_values(p))
    report = TuneReport(starts, i, float(fx), p, eff, feasible, diag)
    return p, eff, report
