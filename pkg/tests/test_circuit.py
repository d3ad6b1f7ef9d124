import itertools
import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from qlmdyn.circuit import (
    CAP_TO_NS,
    CircuitParams,
    SpinModelParams,
    bare_detuning,
    build_multilevel_hamiltonian,
    displacement_block,
    fock_index,
    ghz,
    hierarchy_ratios,
    mhz,
    mode_scales,
    omega_prs,
    spin_energy,
    spin_hamiltonian,
    spin_params,
    spin_subspace_indices,
)

FF = 1e-15


def sample_params(**kw):
    base = dict(C=20 * FF, C0=10 * FF, C1=12 * FF, K=1 * FF, E0=ghz(60), E1=ghz(90), Ec=ghz(30), Es=ghz(0.5))
    base.update(kw)
    return CircuitParams(**base)


params_strategy = st.builds(
    lambda C, C0, C1, E0, E1, Ec, Es: sample_params(C=C * FF, C0=C0 * FF, C1=C1 * FF, E0=ghz(E0),
                                                    E1=ghz(E1), Ec=ghz(Ec), Es=ghz(Es)),
    st.floats(5, 60), st.floats(1, 60), st.floats(1, 60), st.floats(5, 300), st.floats(5, 300),
    st.floats(5, 300), st.floats(0, 2),
)


def fock_displacement(k, n_big=60):
    a = np.diag(np.sqrt(np.arange(1, n_big)), 1)
    return sla.expm(1j * k * (a + a.T))


def test_cap_conversion_independent():
    hbar, e = 6.62607015e-34 / (2 * math.pi), 1.602176634e-19
    assert CAP_TO_NS == pytest.approx(hbar / (4 * e * e) * 1e9, rel=1e-12)


def test_rg_spot_value():
    # C = 50 fF, K = 1 fF, Ec = 10 x 2pi GHz, EL = 0, arithmetic from SI constants
    hbar, e = 6.62607015e-34 / (2 * math.pi), 1.602176634e-19
    c_sec = (4 * 50e-15 + 1e-15) * hbar / (2 * e) ** 2
    ec_per_sec = 2 * math.pi * 10e9
    expect = (4 * c_sec * ec_per_sec) ** -0.25
    ms = mode_scales(sample_params(C=50 * FF, K=1 * FF, Ec=ghz(10)))
    assert ms.rg == pytest.approx(expect, rel=1e-12)


def test_mode_scales_symmetry_and_diagonals():
    p = sample_params(C0=15 * FF, C1=15 * FF, E0=ghz(70), E1=ghz(70))
    ms = mode_scales(p)
    assert ms.r0 == pytest.approx(ms.r1, rel=1e-15)
    C, C0, K = (x * CAP_TO_NS for x in (p.C, p.C0, p.K))
    assert ms.kinv00 == pytest.approx(1 / (4 * C + 4 * C0 + 2 * K))
    assert ms.kinvgg == pytest.approx(1 / (4 * C + K))
    q = sample_params(K=1e-30)
    assert mode_scales(q).kinvgg == pytest.approx(1 / (4 * q.C * CAP_TO_NS), rel=1e-12)


def test_mode_scales_reject_nonpositive():
    with pytest.raises(ValueError):
        mode_scales(sample_params(E0=-ghz(500)))


@pytest.mark.parametrize("bad", [dict(C=0.0), dict(K=-1e-15), dict(Ec=0.0), dict(Es=-1.0)])
def test_param_validation(bad):
    with pytest.raises(ValueError):
        sample_params(**bad)


def test_params_json_round_trip(tmp_path):
    p = sample_params()
    path = tmp_path / "p.json"
    p.dump_json(path)
    q = CircuitParams.load_json(path)
    for name in ("C", "C0", "C1", "K"):
        assert getattr(q, name) == getattr(p, name)
    for name in ("E0", "E1", "Ec", "Es"):
        assert getattr(q, name) == pytest.approx(getattr(p, name), rel=1e-15)
    sp = spin_params(p)
    back = SpinModelParams.from_dict(sp.to_dict())
    for a, b in zip(np.array(list(vars(back).values())), np.array(list(vars(sp).values()))):
        assert a == pytest.approx(b, rel=1e-14)


def test_displacement_two_level():
    k = 0.43
    g = math.exp(-k * k / 2)
    expect = np.array([[g, 1j * k * g], [1j * k * g, (1 - k * k) * g]])
    np.testing.assert_allclose(displacement_block(k, 2), expect, atol=1e-15)
    np.testing.assert_allclose(displacement_block(0.0, 5), np.eye(5), atol=1e-15)


@pytest.mark.parametrize("k", [-0.7, -0.3, 0.1, 0.45, 0.7, 1.6])
@pytest.mark.parametrize("n", [4, 6, 8])
def test_displacement_matches_big_fock_space(k, n):
    ref = fock_displacement(k)[:n, :n]
    got = displacement_block(k, n)
    np.testing.assert_allclose(got, ref, atol=1e-10)
    np.testing.assert_allclose(got, got.T, atol=1e-15)


def test_displacement_row_deficit():
    for k in np.linspace(0, 0.7, 8):
        D = displacement_block(k, 8)
        deficit = 1 - np.sum(np.abs(D) ** 2, axis=1)
        assert np.max(deficit[:1]) < 1e-3
    d4 = 1 - np.sum(np.abs(displacement_block(0.7, 4)[0]) ** 2)
    d8 = 1 - np.sum(np.abs(displacement_block(0.7, 8)[0]) ** 2)
    assert d8 < d4


@pytest.mark.parametrize("bad", [(0.2, 1), (5.0, 4), (-6.0, 4)])
def test_displacement_guards(bad):
    with pytest.raises(ValueError):
        displacement_block(*bad)


@given(params_strategy)
def test_two_level_circuit_equals_spin_model(p):
    H2 = build_multilevel_hamiltonian(p, 2)
    Hs = spin_hamiltonian(spin_params(p))
    diff = H2 - Hs
    const = np.trace(diff).real / 8
    scale = max(1.0, np.max(np.abs(Hs)))
    assert np.max(np.abs(diff - const * np.eye(8))) <= 1e-12 * scale


def test_two_level_equality_entrywise_at_moderate_scale():
    p = sample_params()
    H2 = build_multilevel_hamiltonian(p, 2)
    Hs = spin_hamiltonian(spin_params(p))
    diff = H2 - Hs
    const = np.trace(diff).real / 8
    assert np.max(np.abs(diff - const * np.eye(8))) < 1e-12 * np.max(np.abs(Hs))


def test_squared_operators_exact_after_truncation():
    """Spin block of the 4-level build equals the 2-level build (exact truncation)."""
    p = sample_params()
    H4 = build_multilevel_hamiltonian(p, 4)
    H2 = build_multilevel_hamiltonian(p, 2)
    idx = spin_subspace_indices(4)
    np.testing.assert_allclose(H4[np.ix_(idx, idx)], H2, atol=1e-9)


def test_es_only_enters_jx():
    p = sample_params()
    a, b = spin_params(p), spin_params(p.with_(Es=0.0))
    assert b.Jx_0g1 == 0
    for name in ("Omega0", "Omegag", "Omega1", "Jz_0g", "Jz_01", "Jz_g1", "Jz_0g1", "alpha0", "alphag", "alpha1"):
        assert getattr(a, name) == getattr(b, name)
    r0, rg, r1 = mode_scales(p).r
    ex = math.exp(-(r0**2 + rg**2 + r1**2) / 4)
    assert a.Jx_0g1 == pytest.approx(-math.sqrt(2) * p.Es * r0 * rg * r1 * ex)
    assert a.Jz_0g1 == pytest.approx(-p.Ec * (r0 * rg * r1) ** 2 / 16 * ex)


def test_gauge_mode_anharmonicity_vanishes_with_ec():
    # keep the gauge mode harmonic scale finite through EL while Ec -> 0
    vals = [spin_params(sample_params(Ec=ghz(ec), EL=ghz(20))).alphag for ec in (1e-3, 1e-6)]
    assert abs(vals[1]) < abs(vals[0]) < mhz(1)
    assert spin_params(sample_params()).alphag < 0


def single_mode_energies(p, mode, n_levels=8):
    """Second difference of one mode's ladder with the others in their ground state."""
    H = build_multilevel_hamiltonian(p.with_(Es=0.0), n_levels)
    idx = [fock_index(*[n if j == mode else 0 for j in range(3)], n_levels) for n in range(3)]
    return np.real(np.diag(H)[idx])


@pytest.mark.parametrize("mode", [0, 1, 2])
def test_anharmonicity_first_order_dual_route(mode):
    p = sample_params()
    sp = spin_params(p)
    e = single_mode_energies(p, mode)
    alpha_diag = e[2] - 2 * e[1] + e[0]
    alpha = sp.alphas[mode]
    # leading order agreement; the closed form neglects mode mixing
    assert alpha_diag == pytest.approx(alpha, rel=0.05)


@given(params_strategy)
def test_hermitian(p):
    H = build_multilevel_hamiltonian(p, 3)
    assert np.max(np.abs(H - H.conj().T)) <= 1e-12 * np.max(np.abs(H))


def test_es_term_is_odd_per_mode():
    p = sample_params(Es=ghz(1.0))
    n = 4
    H = build_multilevel_hamiltonian(p, n)
    H0 = build_multilevel_hamiltonian(p, n, include_es=False)
    Hs = H - H0
    par = np.diag((-1.0) ** np.arange(n))
    eye = np.eye(n)
    for j in range(3):
        facs = [eye, eye, eye]
        facs[j] = par
        P = np.kron(np.kron(facs[0], facs[1]), facs[2])
        np.testing.assert_allclose(P @ Hs @ P, -Hs, atol=1e-9)
        np.testing.assert_allclose(P @ H0 @ P, H0, atol=1e-9)


def test_level_guard():
    with pytest.raises(ValueError):
        build_multilevel_hamiltonian(sample_params(), 9)


@pytest.mark.parametrize("prs", list(itertools.product((1, -1), repeat=3)))
def test_omega_prs_is_energy_difference(prs):
    sp = spin_params(sample_params())
    m = mhz(6.4)
    p, r, s = prs
    expect = spin_energy(sp, (-p, -r, -s), m) - spin_energy(sp, (p, r, s), m)
    assert omega_prs(sp, m, p, r, s) == pytest.approx(expect, rel=1e-12, abs=1e-9)


def test_bare_detuning_is_resonant_pair_energy():
    sp = spin_params(sample_params())
    assert bare_detuning(sp) == pytest.approx(omega_prs(sp, 0.0, 1, 1, -1), rel=1e-12)


def test_swapped_relabels_matter_modes():
    sp = spin_params(sample_params())
    q = spin_params(sample_params(C0=12 * FF, C1=10 * FF, E0=ghz(90), E1=ghz(60)))
    sw = sp.swapped()
    for name in vars(sw):
        assert getattr(sw, name) == pytest.approx(getattr(q, name), rel=1e-12)


def test_hierarchy_ratios():
    sp = spin_params(sample_params())
    rz, rx = hierarchy_ratios(sp)
    assert 0 < rz < 0.15 and 0 < rx < 0.15
