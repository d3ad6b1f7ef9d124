import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlmdyn import oracles
from qlmdyn.lattice import LatticeConfig, build_hamiltonian, enumerate_gauge_basis

RATIOS = [0.25, 1.0, math.sqrt(2), 2.0, 5.0]


def numeric(n_sites, m, J):
    H = build_hamiltonian(LatticeConfig(n_sites, m, J), enumerate_gauge_basis(n_sites)).toarray()
    return H, np.linalg.eigvalsh(H)


@pytest.mark.parametrize("x", RATIOS)
@pytest.mark.parametrize("m", [1.0, -0.7])
def test_n2_matches_numerics(x, m):
    J = abs(m) * x
    sol = oracles.n2_solution(m, J)
    H, w = numeric(2, m, J)
    np.testing.assert_allclose(sorted(sol.energies.values()), w, atol=1e-10)
    lab = oracles.n2_labels()
    for key, v in sol.vectors().items():
        full = np.zeros(3)
        full[lab] = v
        np.testing.assert_allclose(H @ full, sol.energies[key] * full, atol=1e-10)


@given(st.floats(0.05, 10.0), st.floats(0.05, 10.0))
def test_n2_normalisation_and_orthogonality(m, J):
    sol = oracles.n2_solution(m, J)
    for a, b in zip(sol.a, sol.b):
        assert 2 * a * a + b * b == pytest.approx(1.0, abs=1e-12)
    V = np.array(list(sol.vectors().values()))
    np.testing.assert_allclose(V @ V.T, np.eye(3), atol=1e-12)


@given(st.floats(0.05, 10.0), st.floats(0.05, 10.0))
def test_n2_quench_map(m, J):
    pre, post = oracles.n2_solution(m, J), oracles.n2_solution(-m, J)
    qm = pre.quench_map()
    np.testing.assert_allclose(qm["a"], post.a, atol=1e-12)
    np.testing.assert_allclose(qm["b"], post.b, atol=1e-12)


def test_n2_large_y_limit():
    sol = oracles.n2_solution(1.0, 1e-3)
    assert -1e-3 < sol.p[1] < 0
    np.testing.assert_allclose(np.abs(sol.vectors()["2"]), [2**-0.5, 0, 2**-0.5], atol=1e-3)


def test_n2_loschmidt_zeros():
    zeros = oracles.n2_loschmidt_zeros(1.0, 4)
    assert zeros[0][0] == pytest.approx(math.sqrt(2))
    assert zeros[0][1] == pytest.approx(3 * math.pi / math.sqrt(8))
    assert zeros[0][1] == pytest.approx(3.3322, abs=1e-4)
    assert [t for _, t in zeros] == pytest.approx([(2 * n + 1) * math.pi / math.sqrt(8) for n in (1, 2, 3, 4)])
    amp = oracles.n2_loschmidt_amplitude(1.0, math.sqrt(2), [t for _, t in zeros])
    assert np.max(np.abs(amp)) < 1e-10
    assert oracles.n2_zero_time(1.0, math.sqrt(2), 1) == pytest.approx(zeros[0][1])


def test_n2_no_zeros_off_resonance():
    t = np.linspace(0, 30, 30001)
    assert np.min(np.abs(oracles.n2_loschmidt_amplitude(1.0, 1.0, t))) > 1e-2


def test_order_zero_families():
    assert oracles.order_family_threshold("-") == pytest.approx(0.6871, abs=1e-4)
    fams = {f for _, _, f in oracles.n2_order_zeros(1.0, 1.0, 20.0)}
    assert fams == {"-"}
    assert oracles.n2_order_zeros(1.0, 0.6, 20.0) == []
    kc = [k for k, _, f in oracles.n2_order_zeros(1.0, math.sqrt(2) + 1e-12, 20.0) if f == "+"]
    assert kc and kc[0] == pytest.approx(0.0, abs=1e-5)


@given(st.floats(0.7, 6.0))
def test_order_zero_formula(x):
    omega = math.sqrt(4 + 2 * x * x)
    for kc, t, fam in oracles.n2_order_zeros(1.0, x, 15.0):
        sign = 1 if fam == "+" else -1
        assert math.cos(kc) == pytest.approx((x * x + sign * 2) / (x * math.sqrt(4 + 2 * x * x)))
        n = round(t * omega / math.pi)
        assert t == pytest.approx(n * math.pi / omega)
        assert n % 2 == (0 if fam == "+" else 1)


@given(st.floats(-20, 20))
def test_n4_discriminant_negative(y):
    assert oracles.n4_discriminant(y) < 0
    Q, R = -4 / 3 * y * y - 0.5, 0.5 * y
    assert Q**3 + R**2 == pytest.approx(oracles.n4_discriminant(y), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("x", RATIOS)
@pytest.mark.parametrize("m", [1.0, -1.3])
def test_n4_matches_numerics(x, m):
    J = abs(m) * x
    sol = oracles.n4_solution(m, J)
    H, w = numeric(4, m, J)
    np.testing.assert_allclose(sorted(sol.energies.values()), w, atol=1e-10)
    lab = oracles.n4_labels()
    V = []
    for key, v in sol.vectors().items():
        full = np.zeros(7)
        full[lab] = v
        np.testing.assert_allclose(H @ full, sol.energies[key] * full, atol=1e-10)
        V.append(v)
    V = np.array(V)
    np.testing.assert_allclose(V @ V.T, np.eye(7), atol=1e-10)
    assert sol.energies["psi+"] == 0 and sol.energies["psi-"] == 0


def test_n4_cubic_roots():
    sol = oracles.n4_solution(1.0, 2.0)
    y = 0.5
    for p in sol.p:
        assert p**3 - 6 * y * p * p + (8 * y * y - 1.5) * p + 2 * y == pytest.approx(0, abs=1e-12)
    assert len(set(np.round(sol.p, 10))) == 3
