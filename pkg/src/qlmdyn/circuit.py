"""Three-mode circuit: mode scales, exact truncation and spin-model parameters.

Units
-----
Energies and frequencies are angular frequencies in rad/ns (numerically
2*pi*GHz). Capacitances are given in farads and converted to ns via
``C * hbar / (2e)^2`` so that the charging term ``p^2 / (2 C)`` is in rad/ns.

Modes are ordered ``(0, g, 1)``: two matter modes around the gauge mode.
Fock states are indexed ``n0 * L**2 + ng * L + n1``. In the two-level
truncation Fock ``|0>`` is sigma^z = +1 (the ground state of ``-Omega/2 sigma^z``).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy import constants
from scipy.special import eval_genlaguerre, gammaln

# farads -> ns in the Cooper-pair-number convention
CAP_TO_NS = constants.hbar / (2 * constants.e) ** 2 * 1e9
TWO_PI = 2.0 * math.pi
MODES = ("0", "g", "1")
_CAPACITANCES = ("C", "C0", "C1", "K")


def ghz(f):
    """2*pi*f for f in GHz, i.e. rad/ns."""
    return TWO_PI * f


def mhz(f):
    return TWO_PI * f * 1e-3


@dataclass(frozen=True)
class CircuitParams:
    """Element values; capacitances in F, energies in rad/ns."""

    C: float
    C0: float
    C1: float
    K: float
    E0: float
    E1: float
    Ec: float
    Es: float
    EL: float = 0.0
    EL0: float = 0.0
    EL1: float = 0.0

    def __post_init__(self):
        for name in ("C", "C0", "C1", "K"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"capacitance {name} must be > 0, got {v}")
        if not self.Ec > 0:
            raise ValueError(f"Ec must be > 0, got {self.Ec}")
        if not self.Es >= 0:
            raise ValueError(f"Es must be >= 0, got {self.Es}")
        for name in ("E0", "E1", "EL", "EL0", "EL1"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def with_(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        """Capacitances in farads, energies in units of 2*pi*GHz."""
        d = {}
        for k, v in asdict(self).items():
            if k in _CAPACITANCES:
                d[k + "_F"] = v
            else:
                d[k + "_2piGHz"] = v / TWO_PI
        return d

    @classmethod
    def from_dict(cls, d):
        kw = {}
        for key, v in d.items():
            name, _, unit = key.rpartition("_")
            if unit == "F":
                kw[name] = float(v)
            elif unit == "2piGHz":
                kw[name] = ghz(float(v))
            else:
                raise ValueError(f"unknown circuit parameter key {key!r}")
        return cls(**kw)

    def dump_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class ModeScales:
    r0: float
    rg: float
    r1: float
    kinv00: float
    kinvgg: float
    kinv11: float

    @property
    def r(self):
        return (self.r0, self.rg, self.r1)

    @property
    def kinv(self):
        return (self.kinv00, self.kinvgg, self.kinv11)

    @property
    def transmon_regime(self):
        """Advisory: all r_j / sqrt(2) < 0.5."""
        return all(r / math.sqrt(2) < 0.5 for r in self.r)


@dataclass(frozen=True)
class SpinModelParams:
    """Two-level spin Hamiltonian coefficients and bare anharmonicities (rad/ns)."""

    Omega0: float
    Omegag: float
    Omega1: float
    Jz_0g: float
    Jz_01: float
    Jz_g1: float
    Jz_0g1: float
    Jx_0g1: float
    alpha0: float
    alphag: float
    alpha1: float

    @property
    def alphas(self):
        return (self.alpha0, self.alphag, self.alpha1)

    def swapped(self):
        """Relabel matter modes 0 <-> 1."""
        return SpinModelParams(self.Omega1, self.Omegag, self.Omega0, self.Jz_g1, self.Jz_01,
                               self.Jz_0g, self.Jz_0g1, self.Jx_0g1, self.alpha1, self.alphag,
                               self.alpha0)

    def to_dict(self):
        """Values in units of 2*pi*GHz."""
        return {k + "_2piGHz": v / TWO_PI for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k[: -len("_2piGHz")]: ghz(v) for k, v in d.items()})


def mode_scales(p: CircuitParams) -> ModeScales:
    C, C0, C1, K = (x * CAP_TO_NS for x in (p.C, p.C0, p.C1, p.K))
    rads = (
        8 * (2 * C + 2 * C0 + K) * (2 * p.EL0 + 2 * p.EL + p.E0 + p.Ec),
        4 * (4 * C + K) * (2 * p.EL + p.Ec),
        8 * (2 * C + 2 * C1 + K) * (2 * p.EL1 + 2 * p.EL + p.E1 + p.Ec),
    )
    for name, v in zip(MODES, rads):
        if not v > 0:
            raise ValueError(f"mode {name}: nonpositive radicand {v:.3e} in r_{name}")
    r0, rg, r1 = (v ** -0.25 for v in rads)
    return ModeScales(r0, rg, r1, 1 / (4 * C + 4 * C0 + 2 * K), 1 / (4 * C + K), 1 / (4 * C + 4 * C1 + 2 * K))


def spin_params(p: CircuitParams) -> SpinModelParams:
    """Exact two-level spin parameters of the truncated circuit Hamiltonian."""
    ms = mode_scales(p)
    r0, rg, r1 = ms.r
    s0, sg, s1 = r0 * r0, rg * rg, r1 * r1
    ex = math.exp(-(s0 + sg + s1) / 4)
    Ec, Es = p.Ec, p.Es
    om0 = (2 * (p.E0 + 4 * p.EL0 + 4 * p.EL + Ec) * s0 + 2 * p.E0 * s0 * math.exp(-s0)
           + Ec * s0 / 2 * (2 - sg / 2) * (2 - s1 / 2) * ex)
    omg = 2 * (4 * p.EL + Ec) * sg + Ec * sg / 2 * (2 - s0 / 2) * (2 - s1 / 2) * ex
    om1 = (2 * (p.E1 + 4 * p.EL1 + 4 * p.EL + Ec) * s1 + 2 * p.E1 * s1 * math.exp(-s1)
           + Ec * s1 / 2 * (2 - s0 / 2) * (2 - sg / 2) * ex)
    jz0g = -Ec * s0 * sg / 8 * (2 - s1 / 2) * ex
    jz01 = -Ec * s0 * s1 / 8 * (2 - sg / 2) * ex
    jzg1 = -Ec * sg * s1 / 8 * (2 - s0 / 2) * ex
    jz0g1 = -Ec * s0 * sg * s1 / 16 * ex
    jx = -math.sqrt(2) * Es * r0 * rg * r1 * ex
    a0 = -2 * p.E0 * s0 * s0 * math.exp(-s0) - Ec * s0 * s0 / 2 * (1 - sg / 4) * (1 - s1 / 4) * ex
    ag = -Ec * sg * sg / 2 * (1 - s0 / 4) * (1 - s1 / 4) * ex
    a1 = -2 * p.E1 * s1 * s1 * math.exp(-s1) - Ec * s1 * s1 / 2 * (1 - s0 / 4) * (1 - sg / 4) * ex
    return SpinModelParams(om0, omg, om1, jz0g, jz01, jzg1, jz0g1, jx, a0, ag, a1)


def displacement_block(k, n_levels):
    """<m| exp(ik(a^dag + a)) |n> for m, n < n_levels, from the Laguerre closed form.

    With alpha = ik, <m|D(alpha)|n> = sqrt(n!/m!) alpha^(m-n) e^{-k^2/2}
    L_n^(m-n)(k^2) for m >= n; the matrix is symmetric.
    """
    if n_levels < 2 or int(n_levels) != n_levels:
        raise ValueError(f"n_levels must be an integer >= 2, got {n_levels}")
    if not abs(k) < 5:
        raise ValueError(f"|k| must be < 5 for accurate matrix elements, got {k}")
    n_levels = int(n_levels)
    x = k * k
    out = np.zeros((n_levels, n_levels), dtype=complex)
    for m in range(n_levels):
        for n in range(m + 1):
            d = m - n
            mag = math.exp(0.5 * (gammaln(n + 1) - gammaln(m + 1)) - x / 2)
            val = mag * (1j * k) ** d * eval_genlaguerre(n, d, x)
            out[m, n] = out[n, m] = val
    return out


def _ladder(n_levels):
    return np.diag(np.sqrt(np.arange(1, n_levels)), 1)


def mode_operators(p: CircuitParams, n_levels, ms: ModeScales | None = None):
    """Single-mode blocks: kinetic energy, harmonic terms, cos, sin, cos(2 psi)."""
    ms = ms or mode_scales(p)
    # square on one extra level, then truncate: exact matrix elements
    a = _ladder(n_levels + 1)
    ad = a.T
    minus2 = ((ad - a) @ (ad - a))[:n_levels, :n_levels]
    plus2 = ((ad + a) @ (ad + a))[:n_levels, :n_levels]
    el = (p.EL0 + p.EL, p.EL, p.EL1 + p.EL)
    ops = []
    for r, kinv, eind in zip(ms.r, ms.kinv, el):
        kin = -(kinv / 2) * minus2 / (2 * r * r)
        harm = 4 * eind * (r * r / 2) * plus2
        dp = displacement_block(r / math.sqrt(2), n_levels)
        dm = displacement_block(-r / math.sqrt(2), n_levels)
        d2p = displacement_block(math.sqrt(2) * r, n_levels)
        d2m = displacement_block(-math.sqrt(2) * r, n_levels)
        ops.append({
            "kinetic": kin,
            "harmonic": harm,
            "cos": (dp + dm) / 2,
            "sin": (dp - dm) / 2j,
            "cos2": (d2p + d2m) / 2,
        })
    return ops


def _kron3(a, b, c):
    return np.kron(np.kron(a, b), c)


def build_multilevel_hamiltonian(p: CircuitParams, n_levels=4, include_es=True):
    """Dense circuit Hamiltonian on the n_levels^3 Fock product space."""
    if not 2 <= n_levels <= 8:
        raise ValueError(f"n_levels must be in 2..8, got {n_levels}")
    ops = mode_operators(p, n_levels)
    eye = np.eye(n_levels)
    H = np.zeros((n_levels ** 3,) * 2, dtype=complex)
    ejs = (p.E0, 0.0, p.E1)
    for j, op in enumerate(ops):
        single = op["kinetic"] + op["harmonic"] - ejs[j] * op["cos2"]
        facs = [eye, eye, eye]
        facs[j] = single
        H += _kron3(*facs)
    H -= 4 * p.Ec * _kron3(ops[0]["cos"], ops[1]["cos"], ops[2]["cos"])
    if include_es and p.Es:
        H -= 4 * p.Es * _kron3(ops[0]["sin"], ops[1]["sin"], ops[2]["sin"])
    return 0.5 * (H + H.conj().T)


def spin_hamiltonian(sp: SpinModelParams, include_x=True):
    """8x8 spin Hamiltonian with sigma^z = diag(+1, -1) on Fock (0, 1)."""
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    eye = np.eye(2)
    z0, zg, z1 = _kron3(sz, eye, eye), _kron3(eye, sz, eye), _kron3(eye, eye, sz)
    H = (-0.5 * sp.Omega0 * z0 - 0.5 * sp.Omegag * zg - 0.5 * sp.Omega1 * z1
         + sp.Jz_0g * z0 @ zg + sp.Jz_01 * z0 @ z1 + sp.Jz_g1 * zg @ z1
         + sp.Jz_0g1 * z0 @ zg @ z1)
    if include_x:
        H = H + sp.Jx_0g1 * _kron3(sx, sx, sx)
    return H.astype(complex)


def spin_energy(sp: SpinModelParams, z, mass=0.0):
    """Diagonal energy of the z-configuration (z0, zg, z1) under H_0 + m/2 (s0 - s1)."""
    z0, zg, z1 = z
    return (-0.5 * (sp.Omega0 - mass) * z0 - 0.5 * sp.Omegag * zg - 0.5 * (sp.Omega1 + mass) * z1
            + sp.Jz_0g * z0 * zg + sp.Jz_01 * z0 * z1 + sp.Jz_g1 * zg * z1
            + sp.Jz_0g1 * z0 * zg * z1)


def omega_prs(sp: SpinModelParams, mass, p, r, s):
    """Rotating-frame frequency of sigma_0^p sigma_g^r sigma_1^s.

    ``p, r, s`` are +1 or -1. The operator maps the configuration with
    z = (-p, -r, -s) to (p, r, s); its frequency is the energy difference
    p(Omega0 - m) + r Omega_g + s(Omega1 + m) - 2 prs Jz_0g1.
    """
    return (p * (sp.Omega0 - mass) + r * sp.Omegag + s * (sp.Omega1 + mass)
            - 2 * p * r * s * sp.Jz_0g1)


def bare_detuning(sp: SpinModelParams):
    """E(|1_0 1_g 0_1>) - E(|0_0 0_g 1_1>) of the bare spin model."""
    return spin_energy(sp, (-1, -1, 1)) - spin_energy(sp, (1, 1, -1))


def fock_index(n0, ng, n1, n_levels):
    return (n0 * n_levels + ng) * n_levels + n1


def spin_subspace_indices(n_levels):
    """Product-space indices of the 8 states with every mode in Fock 0 or 1,
    ordered like the 2x2x2 spin basis."""
    return np.array([fock_index(a, b, c, n_levels) for a in (0, 1) for b in (0, 1) for c in (0, 1)])


def hierarchy_ratios(sp: SpinModelParams):
    """max |Jz| / min |Omega_j| and |Jx| / min |alpha_j|."""
    jz = max(abs(sp.Jz_0g), abs(sp.Jz_01), abs(sp.Jz_g1), abs(sp.Jz_0g1))
    om = min(abs(sp.Omega0), abs(sp.Omegag), abs(sp.Omega1))
    al = min(abs(a) for a in sp.alphas)
    return jz / om, abs(sp.Jx_0g1) / al if al > 0 else math.inf
