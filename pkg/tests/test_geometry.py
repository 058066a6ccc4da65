import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metrosearch.exceptions import StateError
from metrosearch.geometry import (QfiMethod, bures_angle, convex_roof_upper_bound, fidelity, qfi_fidelity_fd,
                                  qfi_pure, qfi_sld, qfi_unitary_generator)
from metrosearch.states import (HamiltonianSpec, basis_state, haar_random_state, plus_state,
                                random_density_matrix, uniform_superposition)


def _fidelity_oracle(a, b):
    # textbook route through an eigen square root, no support tricks
    w, v = np.linalg.eigh(a)
    s = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    return float(np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(s @ b @ s), 0, None))))


def test_fidelity_matches_oracle_on_mixed_states():
    rng = np.random.default_rng(0)
    for _ in range(40):
        dim = int(rng.integers(2, 7))
        a, b = random_density_matrix(dim, rng), random_density_matrix(dim, rng)
        assert fidelity(a, b) == pytest.approx(_fidelity_oracle(a.data, b.data), abs=1e-10)
        assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-12)


def test_fidelity_pure_shortcuts():
    rng = np.random.default_rng(1)
    psi, phi = haar_random_state(4, rng), haar_random_state(4, rng)
    sigma = random_density_matrix(4, rng)
    assert fidelity(psi, phi) == pytest.approx(abs(np.vdot(psi.amplitudes, phi.amplitudes)))
    want = math.sqrt(np.vdot(psi.amplitudes, sigma.data @ psi.amplitudes).real)
    assert fidelity(psi, sigma) == pytest.approx(want, abs=1e-14)
    assert fidelity(psi.density(), sigma) == pytest.approx(want, abs=1e-12)


def test_bures_angle_extremes():
    assert bures_angle(basis_state(3, 1), basis_state(3, 2)) == pytest.approx(math.pi / 2)
    u = uniform_superposition(8).density()
    assert bures_angle(u, u) == pytest.approx(0.0, abs=1e-15)


def test_bures_angle_small_separation_is_accurate():
    # two nearby pure states: angle must resolve far below sqrt(machine eps)
    theta = 1e-9
    a = np.array([1.0, 0.0])
    b = np.array([math.cos(theta), math.sin(theta)])
    assert bures_angle(np.outer(a, a), np.outer(b, b)) == pytest.approx(theta, rel=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_bures_triangle_inequality(dim, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density_matrix(dim, rng) for _ in range(3))
    assert bures_angle(a, c) <= bures_angle(a, b) + bures_angle(b, c) + 1e-9


def test_qfi_pure_equals_sld_on_pure_state():
    rng = np.random.default_rng(2)
    for _ in range(10):
        psi = haar_random_state(4, rng)
        g = HamiltonianSpec.projector(4, 3)
        pure = qfi_pure(psi, g, scale=0.8)
        sld = qfi_unitary_generator(psi.density(), g, scale=0.8)
        assert pure.method is QfiMethod.PURE_VARIANCE and sld.method is QfiMethod.SLD_EIGEN
        assert sld.value == pytest.approx(pure.value, rel=1e-9)


def test_qfi_plus_state_closed_form():
    assert qfi_pure(plus_state(1), HamiltonianSpec.excitation_number(1)).value == pytest.approx(1.0)


def test_convex_roof_bounds_sld():
    rng = np.random.default_rng(3)
    for _ in range(20):
        rho = random_density_matrix(5, rng)
        g = HamiltonianSpec.projector(5, 1)
        assert qfi_unitary_generator(rho, g).value <= convex_roof_upper_bound(rho, g) + 1e-10


def test_fidelity_finite_difference_crosscheck():
    rng = np.random.default_rng(4)
    rho = random_density_matrix(3, rng).data
    g = np.diag([0.0, 1.0, 2.5])

    def family(t):
        u = np.diag(np.exp(-1j * t * np.diag(g)))
        return u @ rho @ u.conj().T

    assert qfi_fidelity_fd(family, 0.0).value == pytest.approx(qfi_unitary_generator(rho, g).value, rel=1e-4)


def test_sld_rejects_bad_derivative():
    rho = uniform_superposition(2).density()
    with pytest.raises(StateError):
        qfi_sld(rho, np.eye(2))
    with pytest.raises(StateError):
        qfi_sld(rho, np.array([[0, 1], [0, 0]]))
