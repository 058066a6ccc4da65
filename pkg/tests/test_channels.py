import numpy as np
import pytest

from metrosearch.channels import (DephasingChannel, KrausChannel, OracleUnitary, apply_oracle,
                                  random_kraus_channel, step_with_derivative)
from metrosearch.exceptions import ChannelError, DimensionError
from metrosearch.geometry import bures_angle
from metrosearch.protocol import SchemeConfig, VSequence
from metrosearch.states import random_density_matrix, uniform_superposition


def test_dephasing_keeps_populations_and_damps_coherences():
    rho = uniform_superposition(3).density()
    ch = DephasingChannel(3, gamma=0.4, tau=0.5)
    out = ch.apply(rho).data
    assert np.allclose(np.diag(out), np.diag(rho.data))
    assert out[0, 1] == pytest.approx(rho.data[0, 1] * np.exp(-0.2))


def test_dephasing_mask_matches_kraus_form():
    rng = np.random.default_rng(0)
    for dims, acts in (((3,), 0), ((2, 3), 0), ((2, 2, 2), [0, 2])):
        dim = int(np.prod(dims))
        ch = DephasingChannel(dim, 0.7, 0.3, acts_on=acts, dims=dims)
        rho = random_density_matrix(dim, rng)
        assert np.allclose(ch.apply(rho).data, ch.to_kraus().apply(rho).data, atol=1e-12)


def test_channel_validation():
    with pytest.raises(ChannelError):
        DephasingChannel(2, -1.0, 1.0)
    with pytest.raises(DimensionError):
        DephasingChannel(4, 1.0, 1.0, dims=(3,))
    with pytest.raises(ChannelError):
        KrausChannel([np.eye(2), np.eye(2)])
    with pytest.raises(DimensionError):
        OracleUnitary(3, 4, 1.0, 1.0)


def test_oracle_at_pi_is_sign_flip():
    u = OracleUnitary(4, 2, np.pi, 1.0)
    assert np.allclose(u.phases(), [1, -1, 1, 1])


def test_oracle_on_sensing_factor_only():
    u = OracleUnitary(2, 2, 0.3, 1.0, dims=(2, 3))
    assert np.allclose(u.matrix(), np.kron(np.diag([1, np.exp(-0.3j)]), np.eye(3)))


def test_kraus_extend_and_random_channel():
    rng = np.random.default_rng(4)
    ch = random_kraus_channel(3, 2, rng)
    big = ch.extend(2)
    assert big.dim_in == 6
    rho = random_density_matrix(6, rng)
    assert np.trace(big.apply(rho).data).real == pytest.approx(1.0)


def test_data_processing_inequality():
    rng = np.random.default_rng(5)
    for _ in range(30):
        dim = int(rng.integers(2, 6))
        a, b = random_density_matrix(dim, rng), random_density_matrix(dim, rng)
        ch = random_kraus_channel(dim, int(rng.integers(1, 4)), rng)
        assert bures_angle(ch.apply(a), ch.apply(b)) <= bures_angle(a, b) + 1e-9


def test_step_derivative_matches_finite_difference():
    base = SchemeConfig(N=3, M=1, tau=0.7, omega=0.9, gamma=0.2, v_sequence=VSequence.GROVER_DIFFUSION)
    rng = np.random.default_rng(6)
    rho = random_density_matrix(3, rng)
    drho = np.zeros((3, 3), dtype=complex)
    _, d = step_with_derivative(2, base, rho, drho)
    h = 1e-6
    plus, _ = step_with_derivative(2, base.with_(omega=0.9 + h), rho, drho)
    minus, _ = step_with_derivative(2, base.with_(omega=0.9 - h), rho, drho)
    assert np.allclose(d, (plus.data - minus.data) / (2 * h), atol=1e-8)


def test_apply_oracle_checks_dimension():
    with pytest.raises(DimensionError):
        apply_oracle(OracleUnitary(2, 1, 1.0, 1.0), uniform_superposition(3).density())
