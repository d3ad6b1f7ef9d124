import csv
import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from qlmdyn import oracles
from qlmdyn.dynamics import (
    DegenerateGroundStateError,
    KrylovPropagator,
    SpectralPropagator,
    default_axes,
    evolve,
    ground_state,
    loschmidt_scan,
    loschmidt_trace,
    observables_trace,
    quench_states,
    write_loschmidt_csv,
)
from qlmdyn.lattice import LatticeConfig, build_hamiltonian, enumerate_gauge_basis
from qlmdyn.vortex import plaquette_windings


def dense(H):
    return H.toarray()


@given(st.floats(0.1, 4.0), st.floats(0.1, 4.0))
def test_n2_ground_state(m, J):
    basis = enumerate_gauge_basis(2)
    e0, psi = ground_state(build_hamiltonian(LatticeConfig(2, m, J), basis))
    assert e0 == pytest.approx(-math.sqrt(m * m + J * J / 2), abs=1e-12)
    sol = oracles.n2_solution(m, J)
    lab = oracles.n2_labels(basis)
    ref = sol.vectors()["2"]
    got = psi[lab]
    got = got * np.sign(got @ ref)
    np.testing.assert_allclose(got, ref, atol=1e-12)
    assert sol.b[1] == pytest.approx(sol.p[1] * sol.a[1])


def test_ground_state_phase_convention():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    _, v = ground_state(A + A.conj().T)
    k = np.argmax(np.abs(v))
    assert v[k].imag == 0 and v[k].real > 0
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-14)


def test_small_coupling_limit():
    basis = enumerate_gauge_basis(2)
    _, psi = ground_state(build_hamiltonian(LatticeConfig(2, 1.0, 1e-4), basis))
    lab = oracles.n2_labels(basis)
    np.testing.assert_allclose(np.abs(psi[lab]), [2**-0.5, 0, 2**-0.5], atol=1e-4)


def test_degenerate_ground_state_rejected():
    with pytest.raises(DegenerateGroundStateError):
        ground_state(np.diag([0.0, 0.0, 1.0]))


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        evolve(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([1.0, 0.0]), [0.0, 1.0])


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        evolve(np.eye(3), np.ones(2), [0.0])


def test_evolve_identity_at_zero():
    H = build_hamiltonian(LatticeConfig(6, 1.0, 1.3), enumerate_gauge_basis(6))
    psi = np.random.default_rng(0).normal(size=H.shape[0]).astype(complex)
    psi /= np.linalg.norm(psi)
    np.testing.assert_allclose(evolve(H, psi, [0.0])[0], psi, atol=1e-14)


@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(0.0, 20.0))
def test_n2_closed_form_propagator(m, J, t):
    basis = enumerate_gauge_basis(2)
    lab = oracles.n2_labels(basis)
    sol = oracles.n2_solution(m, J)
    vecs = sol.vectors()
    U = sum(np.exp(-1j * sol.energies[k] * t) * np.outer(vecs[k], vecs[k]) for k in vecs)
    psi0 = np.array([0.3, 0.5 + 0.2j, -0.4])
    psi0 /= np.linalg.norm(psi0)
    full = np.zeros(3, complex)
    full[lab] = psi0
    got = evolve(build_hamiltonian(LatticeConfig(2, m, J), basis), full, [t])[0][lab]
    np.testing.assert_allclose(got, U @ psi0, atol=1e-11)


def test_spectral_and_krylov_agree():
    basis = enumerate_gauge_basis(8)
    H = build_hamiltonian(LatticeConfig(8, -1.0, 1.7), basis)
    rng = np.random.default_rng(3)
    psi = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    psi /= np.linalg.norm(psi)
    times = np.sort(rng.uniform(0, 12, 15))
    a = SpectralPropagator(H).evolve(psi, times)
    b = KrylovPropagator(H).evolve(psi, times)
    assert np.max(np.abs(a - b)) < 1e-8


def test_krylov_matches_expm():
    basis = enumerate_gauge_basis(6)
    H = build_hamiltonian(LatticeConfig(6, 0.7, 2.1), basis)
    psi = np.zeros(basis.dim, complex)
    psi[0] = 1
    for t in (0.3, 2.0, 7.5):
        ref = sla.expm(-1j * dense(H) * t) @ psi
        np.testing.assert_allclose(evolve(H, psi, [t], method="krylov")[0], ref, atol=1e-10)


@pytest.mark.parametrize("method", ["spectral", "krylov"])
def test_norm_and_energy_conserved(method):
    basis = enumerate_gauge_basis(8)
    H = build_hamiltonian(LatticeConfig(8, -1.0, 1.2), basis)
    rng = np.random.default_rng(7)
    psi = rng.normal(size=basis.dim) + 0j
    psi /= np.linalg.norm(psi)
    states = evolve(H, psi, np.linspace(0, 10, 41), method=method)
    Hd = dense(H)
    e = np.einsum("ti,ij,tj->t", states.conj(), Hd, states).real
    np.testing.assert_allclose(np.linalg.norm(states, axis=1), 1.0, atol=1e-10)
    np.testing.assert_allclose(e, e[0], atol=1e-10)


def test_trace_basics():
    res = loschmidt_trace(LatticeConfig(6, 1.0, 1.5), np.linspace(0, 10, 201))
    assert res.amplitude[0] == pytest.approx(1.0, abs=1e-12)
    assert res.rate[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all((res.echo >= 0) & (res.echo <= 1))
    assert np.all(res.rate >= 0)
    np.testing.assert_allclose(np.exp(-6 * res.rate), res.echo, rtol=1e-12, atol=1e-300)


def test_n2_loschmidt_zeros_numeric():
    m = 1.0
    zeros = oracles.n2_loschmidt_zeros(m, 4)
    times = [t for _, t in zeros]
    res = loschmidt_trace(LatticeConfig(2, m, math.sqrt(2)), times)
    assert np.max(np.abs(res.amplitude)) < 1e-10
    closed = oracles.n2_loschmidt_amplitude(m, math.sqrt(2), times)
    assert np.max(np.abs(closed)) < 1e-10


def test_n2_trace_matches_closed_form():
    t = np.linspace(0, 10, 301)
    for x in (0.5, 1.0, 2.0, 3.5):
        res = loschmidt_trace(LatticeConfig(2, 1.0, x), t)
        ref = oracles.n2_loschmidt_amplitude(1.0, x, t)
        np.testing.assert_allclose(res.amplitude, ref, atol=1e-12)


def test_n4_trace_matches_closed_form():
    m, J = 1.0, 1.7
    basis = enumerate_gauge_basis(4)
    lab = oracles.n4_labels(basis)
    pre, post = oracles.n4_solution(m, J), oracles.n4_solution(-m, J)
    ground = min(pre.energies, key=pre.energies.get)
    psi0 = pre.vectors()[ground]
    t = np.linspace(0, 10, 201)
    ref = sum(abs(np.dot(v, psi0)) ** 2 * np.exp(-1j * post.energies[k] * t)
              for k, v in post.vectors().items())
    res = loschmidt_trace(LatticeConfig(4, m, J), t, basis)
    np.testing.assert_allclose(res.amplitude, ref, atol=1e-10)


@pytest.mark.parametrize("n_sites", [4, 6, 8])
def test_regression_relations(n_sites):
    cfg = LatticeConfig(n_sites, 1.0, 1.3)
    basis, psi0, states = quench_states(cfg, np.linspace(0, 10, 51))
    obs = observables_trace(states, basis)
    sign = (-1.0) ** np.arange(n_sites)
    s0 = obs["sigma_z"][:, :1]
    np.testing.assert_allclose(obs["sigma_z"], sign * s0, atol=1e-10)
    np.testing.assert_allclose(obs["link_z"], sign * (s0 - 1) / 2, atol=1e-10)
    np.testing.assert_allclose(obs["sigma_z"].sum(axis=1), 0, atol=1e-10)
    assert np.max(np.abs(obs["sigma_x"])) < 1e-10
    assert np.max(np.abs(obs["sigma_y"])) < 1e-10
    g = observables_trace(psi0, basis)
    np.testing.assert_allclose(g["sigma_z"][0], sign * g["sigma_z"][0, 0], atol=1e-12)


def test_transverse_expectations_nonzero_off_sector():
    """Sanity of the transverse bookkeeping: a lone spin flip never stays in-sector."""
    basis = enumerate_gauge_basis(2)
    psi = np.ones(3) / math.sqrt(3)
    obs = observables_trace(psi, basis)
    assert np.all(obs["sigma_x"] == 0)


def test_rate_converges_with_size():
    t = np.array([0.6])
    lam = [loschmidt_trace(LatticeConfig(n, 1.0, 1.0), t).rate[0] for n in (4, 8, 12)]
    assert abs(lam[2] - lam[1]) < abs(lam[1] - lam[0])


def test_scan_bounded_and_n2_zeros():
    js = np.linspace(1.0, 2.0, 81)
    ts = np.linspace(0, 10, 161)
    g = loschmidt_scan(2, js, ts)
    assert np.all(np.abs(g.samples) <= 1 + 1e-12)
    v = plaquette_windings(g)
    dx = js[1] - js[0]
    assert np.all(np.abs(v.centers[:, 0] - math.sqrt(2)) <= dx)


def test_n4_zeros_confined():
    js = np.linspace(0.1, 5.0, 99)
    ts = np.linspace(0, 10, 401)
    v = plaquette_windings(loschmidt_scan(4, js, ts))
    assert len(v) > 0
    x = v.centers[:, 0]
    assert 0.5 < x.min() and x.max() < 3.5


def test_scan_parallel_is_identical():
    js = np.linspace(0.5, 3.0, 12)
    ts = np.linspace(0, 5, 40)
    a = loschmidt_scan(6, js, ts, workers=1)
    b = loschmidt_scan(6, js, ts, workers=3)
    assert np.array_equal(a.samples, b.samples)


def test_csv_layout(tmp_path):
    js = np.array([1.0, 2.0])
    ts = np.array([0.0, 0.5, 1.0])
    g = loschmidt_scan(2, js, ts)
    path = tmp_path / "g.csv"
    write_loschmidt_csv(g, 2, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["J_over_m", "t_m", "re_G", "im_G", "L", "lambda"]
    assert [(float(r[0]), float(r[1])) for r in rows[1:]] == [(j, t) for j in js for t in ts]


def test_default_axes():
    js, ts = default_axes()
    assert js[0] == 0.1 and js[-1] == 5.0 and len(js) == 197
    assert ts[0] == 0.0 and ts[-1] == 10.0 and len(ts) == 801
