import math

import numpy as np
import pytest

from metrosearch.exceptions import ConfigError, SizeLimitError
from metrosearch.protocol import (SchemeConfig, VSequence, audit_run, average_distance, cyclic_shift,
                                  discrete_grover, grover_diffusion, pairwise_distances, run_all_labels,
                                  run_scheme, stepwise_inequality_audit, success_probability)
from metrosearch.states import basis_state, haar_random_state, uniform_superposition


def _grover_statevector(N, x, queries):
    # independent oracle: plain amplitude vector, sign flip then reflection
    psi = np.full(N, N**-0.5)
    for _ in range(queries):
        psi[x - 1] *= -1
        psi = 2 * psi.mean() - psi
    return abs(psi[x - 1]) ** 2


@pytest.mark.parametrize("N", [2, 3, 4, 8, 16])
def test_discrete_grover_matches_statevector(N):
    for q in range(0, 6):
        assert discrete_grover(N, q) == pytest.approx(_grover_statevector(N, 1, q), abs=1e-12)


def test_grover_closed_form():
    theta = math.asin(1 / math.sqrt(16))
    for q in range(5):
        assert discrete_grover(16, q) == pytest.approx(math.sin((2 * q + 1) * theta) ** 2, abs=1e-12)


def test_config_validation_names_fields():
    with pytest.raises(ConfigError, match="tau"):
        SchemeConfig(N=4, M=1, tau=0.0, omega=1.0)
    with pytest.raises(ConfigError, match="gamma"):
        SchemeConfig(N=4, M=1, tau=1.0, omega=1.0, gamma=-0.1)
    with pytest.raises(ConfigError, match="ancilla_dim"):
        SchemeConfig(N=4, M=1, tau=1.0, omega=1.0, ancilla_dim=2)
    with pytest.raises(ConfigError, match="custom_unitaries"):
        SchemeConfig(N=2, M=1, tau=1.0, omega=1.0, v_sequence="Custom", custom_unitaries=[np.ones((2, 2))])
    with pytest.raises(SizeLimitError):
        SchemeConfig(N=2, M=7, tau=1.0, omega=1.0, v_sequence="SwapParallel")


def test_derived_quantities():
    cfg = SchemeConfig(N=3, M=4, tau=0.25, omega=1.0, ancilla_dim=2, v_sequence="Identity")
    assert cfg.T == 1.0 and cfg.dims == (3, 2) and cfg.dim == 6
    par = SchemeConfig(N=2, M=3, tau=1.0, omega=1.0, v_sequence="SwapParallel")
    assert par.dims == (2, 2, 2)


def test_cyclic_shift_moves_slots():
    p = cyclic_shift(3, 3)
    src = np.zeros(27)
    src[0 * 9 + 1 * 3 + 2] = 1
    out = p @ src
    assert out[1 * 9 + 2 * 3 + 0] == 1


def test_grover_diffusion_is_reflection():
    d = grover_diffusion(5)
    assert np.allclose(d @ d, np.eye(5))


def test_reference_run_is_omega_zero_run():
    cfg = SchemeConfig(N=3, M=3, tau=0.5, omega=1.1, gamma=0.2)
    probe = haar_random_state(3, np.random.default_rng(0))
    tr = run_scheme(cfg, probe, 2)
    ref = run_scheme(cfg.with_(omega=0.0), probe, 2)
    for a, b in zip(tr.states_reference, ref.states_with_oracle):
        assert np.allclose(a.data, b.data, atol=1e-13)


def test_derivative_matches_finite_difference():
    cfg = SchemeConfig(N=3, M=4, tau=0.6, omega=0.8, gamma=0.3)
    probe = uniform_superposition(3)
    h = 1e-6
    d = run_scheme(cfg, probe, 1).final_derivative
    p = run_scheme(cfg.with_(omega=0.8 + h), probe, 1).final_state.data
    m = run_scheme(cfg.with_(omega=0.8 - h), probe, 1).final_state.data
    assert np.allclose(d, (p - m) / (2 * h), atol=1e-8)


def test_average_distance_rejects_mixed_inputs():
    a = run_all_labels(SchemeConfig(N=2, M=1, tau=1.0, omega=1.0), uniform_superposition(2))
    b = run_all_labels(SchemeConfig(N=2, M=1, tau=1.0, omega=2.0), uniform_superposition(2))
    with pytest.raises(ConfigError):
        average_distance([a[0], b[1]])
    with pytest.raises(ConfigError):
        average_distance(a[:1])


def test_stepwise_margins_trivial_cases():
    tr = run_scheme(SchemeConfig(N=3, M=3, tau=1.0, omega=0.0, v_sequence="Identity"), uniform_superposition(3), 1)
    assert all(abs(m) < 1e-12 for m in stepwise_inequality_audit(tr))
    # strong dephasing pins the state to the diagonal after the first query
    tr = run_scheme(SchemeConfig(N=3, M=3, tau=1.0, omega=1.0, gamma=60.0), uniform_superposition(3), 1)
    margins = stepwise_inequality_audit(tr)
    assert margins[0] > 0 and all(abs(m) < 1e-12 for m in margins[1:])


def test_perfect_grover_audit():
    a = audit_run(SchemeConfig(N=4, M=1, tau=1.0, omega=math.pi))
    assert a.perfectly_distinguishable and a.all_satisfied
    names = {r.bound_name for r in a.reports}
    assert {"distance_lower_bound", "noiseless_query_bound", "time_way_distance_bound"} <= names
    assert np.allclose(pairwise_distances(run_all_labels(a.config, uniform_superposition(4))) +
                       np.eye(4) * math.pi / 2, math.pi / 2)


def test_success_probability_uses_sensing_marginal():
    cfg = SchemeConfig(N=2, M=0, tau=1.0, omega=1.0, ancilla_dim=3, v_sequence="Identity")
    rho = np.kron(basis_state(2, 2).density().data, np.eye(3) / 3)
    assert success_probability(rho, cfg, 2) == pytest.approx(1.0)


def test_audit_needs_probe_for_parallel_layout():
    with pytest.raises(ConfigError):
        audit_run(SchemeConfig(N=2, M=2, tau=1.0, omega=1.0, v_sequence=VSequence.SWAP_PARALLEL))
