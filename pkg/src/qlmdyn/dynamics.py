"""Ground states, real-time evolution and Loschmidt quantities for the mass quench."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import ScanGrid
from .lattice import (
    ConfigurationError,
    LatticeConfig,
    build_hamiltonian,
    enumerate_gauge_basis,
    hopping_operator,
)

SPECTRAL_MAX_DIM = 2500
# above this size sparse inputs get their ground state from Lanczos (eigsh)
DENSE_GROUND_MAX_DIM = 400
DEGENERACY_TOL = 1e-9


class NumericalError(RuntimeError):
    """A numerical routine could not meet its contract."""


class DegenerateGroundStateError(NumericalError):
    pass


def _dense(H):
    return H.toarray() if sp.issparse(H) else np.asarray(H)


def _check_hermitian(H, tol=1e-12):
    if sp.issparse(H):
        diff = abs(H - H.conj().T).max()
        scale = abs(H).max()
    else:
        diff = np.max(np.abs(H - H.conj().T)) if H.size else 0.0
        scale = np.max(np.abs(H)) if H.size else 0.0
    if diff > tol * max(scale, 1.0):
        raise ValueError(f"operator is not Hermitian (max |H - H^dag| = {diff:.3e})")


def _fix_phase(vec):
    k = np.argmax(np.abs(vec))
    out = vec * (np.abs(vec[k]) / vec[k])
    out[k] = np.abs(vec[k])  # exactly real, free of rounding in the imaginary part
    return out


def ground_state(H):
    """Smallest eigenpair of a Hermitian ``H``.

    The phase is fixed so the largest-magnitude component is real positive.
    Raises :class:`DegenerateGroundStateError` if the gap to the next level
    is below ``1e-9 * ||H||``.
    """
    _check_hermitian(H)
    dim = H.shape[0]
    if dim <= DENSE_GROUND_MAX_DIM or not sp.issparse(H):
        w, v = np.linalg.eigh(_dense(H))
        norm = max(abs(w[0]), abs(w[-1]))
        e0, e1, vec = w[0], (w[1] if dim > 1 else np.inf), v[:, 0]
    else:
        # fixed start vector keeps the result bit-reproducible
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
        w, v = spla.eigsh(H, k=2, which="SA", tol=1e-14, v0=v0)
        order = np.argsort(w)
        e0, e1, vec = w[order[0]], w[order[1]], v[:, order[0]]
        norm = spla.norm(H, 1)  # upper bound on the spectral norm
    if e1 - e0 <= DEGENERACY_TOL * max(norm, 1e-300):
        raise DegenerateGroundStateError(
            f"ground state degenerate within tolerance (gap {e1 - e0:.3e}, |H| {norm:.3e})"
        )
    vec = _fix_phase(vec / np.linalg.norm(vec))
    if np.isrealobj(H) or not np.iscomplexobj(vec):
        vec = vec.real if np.allclose(vec.imag, 0) else vec
    return float(e0), vec


class SpectralPropagator:
    """exp(-iHt) from a full eigendecomposition."""

    def __init__(self, H):
        _check_hermitian(H)
        self.energies, self.vectors = sla.eigh(_dense(H), driver="evd")

    def coefficients(self, psi0):
        return self.vectors.conj().T @ psi0

    def evolve(self, psi0, times):
        c = self.coefficients(np.asarray(psi0, dtype=complex))
        phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), self.energies))
        return (phases * c) @ self.vectors.T

    def amplitude(self, psi0, times):
        """<psi0| exp(-iHt) |psi0> without forming the states."""
        w = np.abs(self.coefficients(psi0)) ** 2
        return np.exp(-1j * np.outer(np.asarray(times, dtype=float), self.energies)) @ w


class KrylovPropagator:
    """Lanczos short-time stepping with adaptive step size.

    Each step builds an orthonormal Krylov basis of dimension ``m`` (full
    reorthogonalisation), exponentiates the tridiagonal projection and halves
    the step until the standard a-posteriori error bound is below ``tol``.
    """

    def __init__(self, H, m=30, tol=1e-12):
        _check_hermitian(H)
        self.H = H.tocsr() if sp.issparse(H) else np.asarray(H)
        self.m = m
        self.tol = tol
        self._h = None

    def _lanczos(self, v):
        dim = v.shape[0]
        m = min(self.m, dim)
        V = np.zeros((m + 1, dim), dtype=complex)
        alpha = np.zeros(m)
        beta = np.zeros(m)
        nv = np.linalg.norm(v)
        V[0] = v / nv
        k = m
        exact = False
        for j in range(m):
            w = self.H @ V[j]
            alpha[j] = np.vdot(V[j], w).real
            w = w - alpha[j] * V[j] - (beta[j - 1] * V[j - 1] if j else 0)
            w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
            beta[j] = np.linalg.norm(w)
            if beta[j] < 1e-14 * max(1.0, abs(alpha[j])):
                k = j + 1
                exact = True
                break
            V[j + 1] = w / beta[j]
        # invariant subspace reached (or whole space spanned): no truncation error
        exact = exact or m == dim
        return V, alpha[:k], beta[:k], nv, k, exact

    def _step(self, v, dt):
        V, alpha, beta, nv, k, exact = self._lanczos(v)
        if k == 1:
            theta, S = alpha, np.ones((1, 1))
        else:
            theta, S = sla.eigh_tridiagonal(alpha, beta[: k - 1])
        while True:
            y = S @ (np.exp(-1j * theta * dt) * S[0].conj())
            err = 0.0 if exact else nv * beta[k - 1] * abs(y[-1]) * dt
            if err <= self.tol or dt < 1e-12:
                return nv * (y @ V[:k]), dt
            dt *= 0.5

    def advance(self, v, t):
        done = 0.0
        while t - done > 1e-15 * max(1.0, t):
            h = t - done if self._h is None else min(2.0 * self._h, t - done)
            v, used = self._step(v, h)
            if used < h or self._h is None:
                self._h = used
            done += used
        return v

    def evolve(self, psi0, times):
        times = np.asarray(times, dtype=float)
        out = np.empty((len(times), len(psi0)), dtype=complex)
        v = np.asarray(psi0, dtype=complex)
        last = 0.0
        for i, t in enumerate(times):
            if t > last:
                v = self.advance(v, t - last)
                last = t
            out[i] = v
        return out


def make_propagator(H, method="auto"):
    if method == "auto":
        method = "spectral" if H.shape[0] <= SPECTRAL_MAX_DIM else "krylov"
    if method == "spectral":
        return SpectralPropagator(H)
    if method == "krylov":
        return KrylovPropagator(H)
    raise ValueError(f"unknown propagation method {method!r}")


def _check_times(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ConfigurationError("times must be a nonempty 1D sequence")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ConfigurationError("times must be nonnegative and ascending")
    return times


def evolve(H_post, psi0, times, method="auto"):
    """States exp(-i H_post t) psi0 as rows, one per time."""
    times = _check_times(times)
    if H_post.shape[0] != len(psi0):
        raise ValueError(f"dimension mismatch: H is {H_post.shape}, state has {len(psi0)}")
    return make_propagator(H_post, method).evolve(psi0, times)


@dataclass(frozen=True)
class QuenchResult:
    """Loschmidt data of the m -> -m quench; ``times`` are in units of t*m."""

    config: LatticeConfig
    times: np.ndarray
    amplitude: np.ndarray
    sigma0_z: np.ndarray

    @property
    def echo(self):
        return np.clip(np.abs(self.amplitude) ** 2, 0.0, 1.0)

    @property
    def rate(self):
        with np.errstate(divide="ignore"):
            return np.maximum(-np.log(self.echo) / self.config.n_sites, 0.0)


def _prepare(config, basis=None, hopping=None):
    basis = basis or enumerate_gauge_basis(config.n_sites)
    hopping = hopping if hopping is not None else hopping_operator(basis)
    H0 = build_hamiltonian(config, basis, hopping)
    H1 = build_hamiltonian(config.quenched(), basis, hopping)
    return basis, H0, H1


def quench_states(config, times, basis=None, method="auto"):
    """Initial ground state and evolved states; ``times`` in units of t*m."""
    times = _check_times(times)
    basis, H0, H1 = _prepare(config, basis)
    _, psi0 = ground_state(H0)
    states = make_propagator(H1, method).evolve(psi0, times / abs(config.mass))
    return basis, psi0, states


def loschmidt_trace(config: LatticeConfig, times, basis=None, method="auto") -> QuenchResult:
    """G(t) = <psi(0)|psi(t)> after the sign quench of the mass.

    ``times`` are dimensionless t*|m|.
    """
    basis, psi0, states = quench_states(config, times, basis, method)
    amp = states @ psi0.conj()
    sig0 = (np.abs(states) ** 2) @ basis.matter_z[:, 0].astype(float)
    return QuenchResult(config, np.asarray(times, dtype=float), amp, sig0)


def observables_trace(states, basis):
    """Per-time expectation values of the local spin operators.

    Returns a dict with ``sigma_z``, ``link_z``, ``sigma_x``, ``sigma_y`` of
    shape (n_times, N). Transverse matter components are evaluated on the
    unrestricted product space: each basis state is lifted to its full
    (links, matter) configuration, flipped, and matched back against the
    sector; only surviving overlaps contribute.
    """
    states = np.atleast_2d(states)
    prob = np.abs(states) ** 2
    n = basis.n_sites
    matter = basis.matter_z
    out = {
        "sigma_z": prob @ matter.astype(float),
        "link_z": prob @ basis.link_z.astype(float),
    }
    mbits = ((matter > 0).astype(np.int64) << np.arange(n, dtype=np.int64)).sum(axis=1)
    full = basis.codes | (mbits << n)
    lookup = {int(c): i for i, c in enumerate(full)}
    sx = np.zeros((len(states), n))
    sy = np.zeros((len(states), n))
    for site in range(n):
        flipped = full ^ (1 << (n + site))
        for src, code in enumerate(flipped):
            dst = lookup.get(int(code))
            if dst is None:
                continue
            # <dst| sigma^x |src> = 1; sigma^y carries +-i by the source spin
            prod = states[:, dst].conj() * states[:, src]
            sx[:, site] += prod.real
            sy[:, site] += (1j * matter[src, site] * prod).real
    out["sigma_x"] = sx
    out["sigma_y"] = sy
    return out


def _scan_column(x, times, basis, hopping, mass):
    cfg = LatticeConfig(basis.n_sites, mass, x * mass)
    _, H0, H1 = _prepare(cfg, basis, hopping)
    _, psi0 = ground_state(H0)
    if H1.shape[0] <= SPECTRAL_MAX_DIM:
        return SpectralPropagator(H1).amplitude(psi0, times / mass)
    states = KrylovPropagator(H1).evolve(psi0, times / mass)
    return states @ psi0.conj()


def loschmidt_scan(n_sites, j_over_m, times, workers=1, basis=None) -> ScanGrid:
    """Complex G over the (J/m, t*m) grid, one independent quench per column."""
    j_over_m = np.asarray(j_over_m, dtype=float)
    times = _check_times(times)
    if len(j_over_m) == 0:
        raise ConfigurationError("J/m grid must be nonempty")
    basis = basis or enumerate_gauge_basis(n_sites)
    hopping = hopping_operator(basis)

    def job(x):
        return _scan_column(x, times, basis, hopping, 1.0)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            cols = list(pool.map(job, j_over_m))
    else:
        cols = [job(x) for x in j_over_m]
    return ScanGrid(j_over_m, times, np.array(cols), "J_over_m", "t_m")


def rate_from_amplitude(amp, n_sites):
    echo = np.clip(np.abs(amp) ** 2, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        return echo, np.maximum(-np.log(echo) / n_sites, 0.0)


def write_loschmidt_csv(grid: ScanGrid, n_sites, path):
    """Columns J_over_m, t_m, re_G, im_G, L, lambda; J-major row order."""
    grid.to_csv(
        path,
        ("J_over_m", "t_m", "re_G", "im_G"),
        {
            "L": lambda s: rate_from_amplitude(s, n_sites)[0],
            "lambda": lambda s: rate_from_amplitude(s, n_sites)[1],
        },
    )


def default_axes():
    """Default scan window: J/m in [0.1, 5.0] step 0.025, t*m in [0, 10] step 0.0125."""
    return np.round(np.arange(0.1, 5.0 + 1e-9, 0.025), 10), np.round(np.arange(0, 10 + 1e-9, 0.0125), 10)
