"""Gauge-invariant basis, QLM Hamiltonian and symmetry operators.

Conventions
-----------
* Matter spins ``sigma_n`` sit on sites ``n = 0..N-1``; link ``(n, n+1)`` is
  indexed by ``n`` (periodic).
* All z-eigenvalues are +-1, for links as well as matter, inside the Gauss law
  ``S_{n-1,n} - S_{n,n+1} + sigma_n - (-1)^n = 0``.
* ``sigma^+`` raises z from -1 to +1. For even sites z = +1 is the bare vacuum.
* A basis state is stored as its packed link configuration (bit ``n`` set iff
  ``S_{n,n+1} = +1``); matter values are derived, never stored.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import kernels

MAX_SITES = 24


class ConfigurationError(ValueError):
    """Invalid lattice or grid configuration."""


@dataclass(frozen=True)
class LatticeConfig:
    n_sites: int
    mass: float
    coupling: float

    def __post_init__(self):
        check_n_sites(self.n_sites)
        if not self.coupling > 0:
            raise ConfigurationError(f"coupling J must be > 0, got {self.coupling}")

    @property
    def j_over_m(self):
        return self.coupling / self.mass

    def quenched(self):
        """Post-quench configuration m -> -m."""
        return LatticeConfig(self.n_sites, -self.mass, self.coupling)


def check_n_sites(n_sites):
    if int(n_sites) != n_sites or n_sites < 2 or n_sites % 2:
        raise ConfigurationError(f"n_sites must be an even integer >= 2, got {n_sites!r}")
    if n_sites > MAX_SITES:
        raise ConfigurationError(f"n_sites={n_sites} exceeds the enumeration limit {MAX_SITES}")


@dataclass(frozen=True, eq=False)
class GaugeBasis:
    """Ordered physical states of the zero-background-charge sector."""

    n_sites: int
    codes: np.ndarray
    _index: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        self.codes.setflags(write=False)
        object.__setattr__(self, "_index", {int(c): i for i, c in enumerate(self.codes)})

    def __len__(self):
        return len(self.codes)

    @property
    def dim(self):
        return len(self.codes)

    def index(self, code):
        return self._index[int(code)]

    def find(self, code):
        """Position of ``code`` or ``None`` when it lies outside the sector."""
        return self._index.get(int(code))

    @property
    def link_z(self):
        return kernels.link_z(self.codes, self.n_sites)

    @property
    def matter_z(self):
        return kernels.matter_z(self.codes, self.n_sites).astype(np.int8)

    def code_of(self, links):
        """Pack a sequence of link z-values into the integer encoding."""
        return sum(1 << n for n, s in enumerate(links) if s > 0)

    def to_records(self):
        return [
            {"encoding": int(c), "link_z": [int(v) for v in lz], "matter_z": [int(v) for v in mz]}
            for c, lz, mz in zip(self.codes, self.link_z, self.matter_z)
        ]

    def dump_json(self, fp=None):
        text = json.dumps(self.to_records(), indent=1)
        if fp is not None:
            fp.write(text)
        return text


def enumerate_gauge_basis(n_sites) -> GaugeBasis:
    check_n_sites(n_sites)
    codes = np.asarray(kernels.enumerate_sector(int(n_sites)), dtype=np.int64)
    return GaugeBasis(int(n_sites), codes)


def transfer_matrix_count(n_sites):
    """Sector dimension from the 2x2 link-constraint transfer matrices.

    Rows/columns are ordered (+1, -1) for (S_{n-1,n}, S_{n,n+1}); even sites
    forbid (-1, +1), odd sites forbid (+1, -1).
    """
    even = np.array([[1, 1], [0, 1]], dtype=object)
    odd = np.array([[1, 0], [1, 1]], dtype=object)
    step = even.dot(odd)
    acc = np.identity(2, dtype=object)
    for _ in range(n_sites // 2):
        acc = acc.dot(step)
    return int(acc[0, 0] + acc[1, 1])


def _check_basis(config, basis):
    if config.n_sites != basis.n_sites:
        raise ConfigurationError(
            f"basis built for N={basis.n_sites} but config has N={config.n_sites}"
        )


def mass_diagonal(basis, mass):
    """Diagonal of -sum_n (-1)^n (m/2) sigma^z_n."""
    stagger = np.where(np.arange(basis.n_sites) % 2 == 0, 1.0, -1.0)
    return -0.5 * mass * (basis.matter_z @ stagger)


def hopping_operator(basis):
    """Sparse sum_n (sigma_n^+ S_n^+ sigma_{n+1}^- + H.c.), real symmetric."""
    src, dst = kernels.hopping_moves(basis.codes, basis.n_sites)
    dim = basis.dim
    ones = np.ones(len(src))
    fwd = sp.coo_matrix((ones, (dst, src)), shape=(dim, dim))
    return (fwd + fwd.T).tocsr()


def build_hamiltonian(config: LatticeConfig, basis: GaugeBasis, hopping=None):
    """Sparse real-symmetric H(m, J) in the gauge basis.

    ``hopping`` may carry a precomputed :func:`hopping_operator` to avoid
    rebuilding it when only the parameters change.
    """
    _check_basis(config, basis)
    if hopping is None:
        hopping = hopping_operator(basis)
    diag = sp.diags(mass_diagonal(basis, config.mass))
    return (diag + 0.5 * config.coupling * hopping).tocsr()


def gauge_generator(n, basis):
    """Diagonal G_n = S_{n-1,n} - S_{n,n+1} + sigma_n - (-1)^n in the gauge basis."""
    if not 0 <= n < basis.n_sites:
        raise IndexError(f"site {n} out of range for N={basis.n_sites}")
    links = basis.link_z.astype(float)
    vals = links[:, n - 1] - links[:, n] + basis.matter_z[:, n] - (1.0 if n % 2 == 0 else -1.0)
    return sp.diags(vals).tocsr()


def full_space_gauge_generator(n, n_sites):
    """G_n on the unrestricted 2^(2N) product space, as a diagonal array.

    Product states are indexed by ``links + (matter << N)`` with the same
    bit convention for matter spins (bit set iff z = +1).
    """
    total = 1 << (2 * n_sites)
    idx = np.arange(total, dtype=np.int64)
    links = kernels.link_z(idx & ((1 << n_sites) - 1), n_sites).astype(int)
    matter = kernels.link_z(idx >> n_sites, n_sites).astype(int)
    return links[:, n - 1] - links[:, n] + matter[:, n] - (1 if n % 2 == 0 else -1)


def _permutation_matrix(basis, mapper):
    links = basis.link_z
    dim = basis.dim
    dst = np.empty(dim, dtype=np.int64)
    for i, lz in enumerate(links):
        dst[i] = basis.index(basis.code_of(mapper(lz)))
    return sp.coo_matrix((np.ones(dim), (dst, np.arange(dim))), shape=(dim, dim)).tocsr()


def symmetry_operator(kind, basis):
    """Parity or charge conjugation as a basis permutation.

    parity:      sigma_n -> sigma_{-n},  S_{n,n+1} -> -S_{-n-1,-n}
    conjugation: sigma_n -> -sigma_{n+1}, S_{n,n+1} -> -S_{n+1,n+2}
    """
    n_sites = basis.n_sites
    if kind == "parity":
        src = (-np.arange(n_sites) - 1) % n_sites
        return _permutation_matrix(basis, lambda lz: -lz[src])
    if kind == "conjugation":
        return _permutation_matrix(basis, lambda lz: -np.roll(lz, 1))
    raise ValueError(f"unknown symmetry {kind!r}; expected 'parity' or 'conjugation'")
