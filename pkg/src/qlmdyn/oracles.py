"""Closed-form eigensystems of the N=2 and N=4 periodic chains.

State labels follow the usual drawings of the two sectors: for N=2,
``1`` and ``3`` are the two vacua and ``2`` the particle-antiparticle pair;
for N=4, ``1``/``7`` are the vacua, ``4`` the doubly excited state and
``2, 3`` (``5, 6``) the single pairs adjacent to ``1`` (``7``).
:func:`n2_labels` and :func:`n4_labels` map those labels onto basis indices.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .lattice import GaugeBasis, enumerate_gauge_basis, hopping_operator, mass_diagonal, symmetry_operator


@dataclass(frozen=True)
class N2Solution:
    mass: float
    coupling: float
    p: tuple
    a: tuple
    b: tuple
    energies: dict

    @property
    def x(self):
        return self.coupling / self.mass

    @property
    def y(self):
        return self.mass / self.coupling

    def vectors(self):
        """Eigenvectors in label order (1, 2, 3), keyed like ``energies``."""
        s = 1.0 / math.sqrt(2.0)
        out = {"minus": np.array([s, 0.0, -s])}
        for i, key in enumerate(("1", "2")):
            out[key] = np.array([self.a[i], self.b[i], self.a[i]])
        return out

    def quench_map(self):
        """Post-quench (m -> -m) coefficients expressed through the pre-quench ones."""
        return {"a": (self.a[1], self.a[0]), "b": (-self.b[1], -self.b[0])}


def n2_solution(mass, coupling) -> N2Solution:
    if not coupling > 0:
        raise ValueError("coupling must be > 0")
    y = mass / coupling
    root = math.sqrt(4 * y * y + 2)
    p = (2 * y + root, 2 * y - root)
    # normalisation 2a^2 + b^2 = 1 with b = p a
    a = tuple(1.0 / math.sqrt(2.0 + pi * pi) for pi in p)
    b = tuple(pi * ai for pi, ai in zip(p, a))
    e = coupling * math.sqrt(y * y + 0.5)
    return N2Solution(mass, coupling, p, a, b, {"minus": -mass, "1": e, "2": -e})


def n2_loschmidt_amplitude(mass, coupling, times):
    """G(t) for the sign quench, assembled from the closed-form eigensystem."""
    pre = n2_solution(mass, coupling)
    post = n2_solution(-mass, coupling)
    psi0 = pre.vectors()["2"]
    times = np.asarray(times, dtype=float)
    amp = np.zeros(times.shape, dtype=complex)
    for key in ("1", "2"):
        vec = post.vectors()[key]
        amp += np.dot(vec, psi0) ** 2 * np.exp(-1j * post.energies[key] * times)
    return amp


def n2_loschmidt_zeros(mass, n_max=4, first=1):
    """Loschmidt zeros (J/m, t) of the N=2 quench.

    Zeros exist only at J/m = sqrt(2), at t_n = (2n+1) pi / (sqrt(8) m).
    ``first=1`` keeps the customary numbering; ``first=0`` also returns the
    earliest zero, which the same condition admits.
    """
    if not mass > 0:
        raise ValueError("mass must be > 0")
    x = math.sqrt(2.0)
    return [(x, n2_zero_time(mass, x * mass, n)) for n in range(first, n_max + 1)]


def n2_zero_time(mass, coupling, n):
    """General t_n = (2n+1) pi / sqrt(4 m^2 + 2 J^2)."""
    return (2 * n + 1) * math.pi / math.sqrt(4 * mass**2 + 2 * coupling**2)


def n2_order_zeros(mass, coupling, t_max):
    """Order-parameter zeros (k_c, t_n, family) with 0 < t_n <= t_max.

    At t_n = n pi / sqrt(4m^2 + 2J^2) the evolved state is +-psi(0) for even
    n, so the zero sits where <psi0|g(k)|psi0> vanishes: that is family
    ``'+'``. Odd n give family ``'-'``. A family is empty when its cos k_c
    falls outside [-1, 1]. (The ``'+'`` zero also sits on t = 0, which is
    excluded here.)
    """
    if not coupling > 0:
        raise ValueError("coupling must be > 0")
    x = coupling / abs(mass)
    omega = math.sqrt(4 * mass**2 + 2 * coupling**2)
    out = []
    for family, sign in (("+", 1.0), ("-", -1.0)):
        cosk = (x * x + sign * 2.0) / (x * math.sqrt(4.0 + 2.0 * x * x))
        if abs(cosk) > 1.0:
            continue
        kc = math.acos(cosk)
        n = 2 if family == "+" else 1
        while n * math.pi / omega <= t_max:
            out.append((kc, n * math.pi / omega, family))
            n += 2
    return sorted(out, key=lambda z: z[1])


def order_family_threshold(family):
    """Smallest J/m for which the given family of order-parameter zeros exists."""
    return math.sqrt(2.0) if family == "+" else math.sqrt(2.0 * math.sqrt(5.0) - 4.0)


@dataclass(frozen=True)
class N4Solution:
    mass: float
    coupling: float
    Q: float
    R: float
    D: float
    S: complex
    p: tuple
    a: tuple
    b: tuple
    c: tuple
    p_odd: tuple
    a_odd: tuple
    b_odd: tuple
    energies: dict

    def vectors(self):
        """Eigenvectors in label order 1..7, keyed like ``energies``."""
        out = {}
        for i in range(3):
            a, b, c = self.a[i], self.b[i], self.c[i]
            out[f"psi{i + 1}"] = np.array([a, b, b, c, b, b, a])
        for j in range(2):
            a, b = self.a_odd[j], self.b_odd[j]
            out[f"psi'{j + 1}"] = np.array([a, b, b, 0.0, -b, -b, -a])
        out["psi+"] = 0.5 * np.array([0, 1, -1, 0, 1, -1, 0], dtype=float)
        out["psi-"] = 0.5 * np.array([0, 1, -1, 0, -1, 1, 0], dtype=float)
        return out


def n4_discriminant(y):
    return -64.0 / 27.0 * y**6 - 8.0 / 3.0 * y**4 - 0.75 * y**2 - 0.125


def n4_solution(mass, coupling) -> N4Solution:
    if not coupling > 0:
        raise ValueError("coupling must be > 0")
    y = mass / coupling
    Q = -4.0 / 3.0 * y * y - 0.5
    R = 0.5 * y
    D = Q**3 + R**2
    S = (R + cmath.sqrt(D)) ** (1.0 / 3.0)
    p = (
        2 * y + 2 * S.real,
        2 * y - S.real - math.sqrt(3.0) * S.imag,
        2 * y - S.real + math.sqrt(3.0) * S.imag,
    )
    a, b, c = [], [], []
    for pi in p:
        norm = 4 * pi**4 - 16 * y * pi**3 + 16 * y * y * pi**2 + 8 * y * pi + 3
        ai = 1.0 / math.sqrt(norm)
        a.append(ai)
        b.append(pi * ai)
        c.append((2 * pi * pi - 4 * y * pi - 1) * ai)
    root = math.sqrt(y * y + 0.5)
    p_odd = (y + root, y - root)
    a_odd = tuple(1.0 / math.sqrt(4 * q * q + 2) for q in p_odd)
    b_odd = tuple(q * aq for q, aq in zip(p_odd, a_odd))
    energies = {f"psi{i + 1}": coupling * (p[i] - 2 * y) for i in range(3)}
    energies.update({f"psi'{j + 1}": coupling * (p_odd[j] - 2 * y) for j in range(2)})
    energies.update({"psi+": 0.0, "psi-": 0.0})
    return N4Solution(mass, coupling, Q, R, D, S, p, tuple(a), tuple(b), tuple(c),
                      p_odd, a_odd, b_odd, energies)


def n2_labels(basis: GaugeBasis | None = None):
    """Basis indices of the N=2 labels 1, 2, 3 (vacuum with all links +1 is label 1)."""
    basis = basis or enumerate_gauge_basis(2)
    return [basis.index(basis.code_of(lz)) for lz in ((1, 1), (-1, 1), (-1, -1))]


def n4_labels(basis: GaugeBasis | None = None):
    """Basis indices of the N=4 labels 1..7, derived from the hopping graph."""
    basis = basis or enumerate_gauge_basis(4)
    hop = hopping_operator(basis).toarray()
    par = symmetry_operator("parity", basis).toarray()
    diag = mass_diagonal(basis, 1.0)
    vacua = sorted(np.nonzero(np.isclose(diag, -2.0))[0], key=lambda i: -basis.codes[i])
    one = vacua[0]
    seven = int(np.argmax(par[:, one]))
    two, three = sorted(np.nonzero(hop[:, one])[0], key=lambda i: basis.codes[i])
    four = int(np.nonzero(np.isclose(diag, 2.0))[0][0])
    five = int(np.argmax(par[:, two]))
    six = int(np.argmax(par[:, three]))
    return [one, two, three, four, five, six, seven]


def embed(vec_by_label, labels, dim):
    out = np.zeros(dim, dtype=vec_by_label.dtype)
    out[labels] = vec_by_label
    return out
