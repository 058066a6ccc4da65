"""Stepped simulation of the interrogation scheme.

A run applies M queries to a probe.  Each query is the oracle phase on the
sensing subsystem followed by dephasing, and every query is followed by an
intertwining unitary V_k.  Every run also records the reference evolution
at omega = 0 (same V sequence) and the exact derivative with respect to
omega.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property

import numpy as np

from . import bounds
from .channels import OracleUnitary, step_with_derivative
from .exceptions import ConfigError, DimensionError, SizeLimitError
from .geometry import bures_angle
from .states import DEFAULT_DIM_CAP, DensityMatrix, PureState, as_matrix, partial_trace, uniform_superposition

__all__ = [
    "VSequence",
    "SchemeConfig",
    "Trajectory",
    "AuditResult",
    "run_scheme",
    "run_all_labels",
    "average_distance",
    "success_probability",
    "discrete_grover",
    "grover_diffusion",
    "continuous_diffusion",
    "cyclic_shift",
    "stepwise_inequality_audit",
    "pairwise_distances",
    "audit_run",
]


class VSequence(str, Enum):
    GROVER_DIFFUSION = "GroverDiffusion"
    SWAP_PARALLEL = "SwapParallel"
    IDENTITY = "Identity"
    CUSTOM = "Custom"


def grover_diffusion(N):
    """Reflection 2|psi_0><psi_0| - 1 about the uniform superposition."""
    return np.full((N, N), 2.0 / N, dtype=complex) - np.eye(N)


def continuous_diffusion(N, omega, tau):
    """exp(-i omega tau |psi_0><psi_0|): one Trotter step of the analog search driver."""
    p = np.full((N, N), 1.0 / N, dtype=complex)
    return np.eye(N) + (np.exp(-1j * omega * tau) - 1) * p


def cyclic_shift(N, slots, extra=1):
    """Permutation moving slot i+1 into slot i (cyclically) for ``slots`` N-level systems.

    ``extra`` is the dimension of an untouched trailing ancilla.
    """
    dim = N**slots
    idx = np.arange(dim).reshape((N,) * slots)
    # new amplitude at (a_0..a_{s-1}) is the old one at (a_{s-1}, a_0, ..., a_{s-2})
    src = np.moveaxis(idx, 0, -1).reshape(-1)
    perm = np.zeros((dim, dim))
    perm[np.arange(dim), src] = 1.0
    return np.kron(perm, np.eye(extra))


def _is_int(v):
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


@dataclass(frozen=True, eq=False)
class SchemeConfig:
    """Parameters of the interrogation scheme; total time ``T = M * tau`` is derived."""

    N: int
    M: int
    tau: float
    omega: float
    gamma: float = 0.0
    ancilla_dim: int = 0
    v_sequence: VSequence = VSequence.GROVER_DIFFUSION
    custom_unitaries: tuple = ()
    dim_cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        object.__setattr__(self, "v_sequence", VSequence(self.v_sequence))
        if not _is_int(self.N) or self.N < 1:
            raise ConfigError(f"must be a positive integer, got {self.N!r}", "N")
        if not _is_int(self.M) or self.M < 0:
            raise ConfigError(f"must be a nonnegative integer, got {self.M!r}", "M")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ConfigError(f"must be a finite positive number, got {self.tau!r}", "tau")
        if not math.isfinite(self.omega):
            raise ConfigError(f"must be finite, got {self.omega!r}", "omega")
        if not self.gamma >= 0:
            raise ConfigError(f"must be nonnegative, got {self.gamma!r}", "gamma")
        if not _is_int(self.ancilla_dim) or self.ancilla_dim < 0:
            raise ConfigError(f"must be a nonnegative integer, got {self.ancilla_dim!r}", "ancilla_dim")
        if self.v_sequence is VSequence.GROVER_DIFFUSION and self.ancilla_dim:
            raise ConfigError("GroverDiffusion acts on the sensing system alone; ancilla_dim must be 0",
                              "ancilla_dim")
        if self.dim > self.dim_cap:
            raise SizeLimitError(f"scheme dimension {self.dim} exceeds cap {self.dim_cap}")
        if self.v_sequence is VSequence.CUSTOM:
            us = tuple(np.asarray(u, dtype=complex) for u in self.custom_unitaries)
            if len(us) != self.M:
                raise ConfigError(f"need {self.M} custom unitaries, got {len(us)}", "custom_unitaries")
            for k, u in enumerate(us):
                if u.shape != (self.dim, self.dim):
                    raise ConfigError(f"unitary {k} has shape {u.shape}, expected {(self.dim, self.dim)}",
                                      "custom_unitaries")
                if np.max(np.abs(u.conj().T @ u - np.eye(self.dim))) > 1e-10:
                    raise ConfigError(f"matrix {k} is not unitary", "custom_unitaries")
            object.__setattr__(self, "custom_unitaries", us)
        elif self.custom_unitaries:
            raise ConfigError("only allowed with v_sequence Custom", "custom_unitaries")

    @property
    def T(self):
        return self.M * self.tau

    @property
    def slots(self):
        return max(self.M, 1) if self.v_sequence is VSequence.SWAP_PARALLEL else 1

    @property
    def dims(self):
        dims = (self.N,) * self.slots
        return dims + ((self.ancilla_dim,) if self.ancilla_dim else ())

    @property
    def dim(self):
        return int(np.prod(self.dims))

    @cached_property
    def _shared_v(self):
        if self.v_sequence is VSequence.GROVER_DIFFUSION:
            return grover_diffusion(self.N)
        if self.v_sequence is VSequence.SWAP_PARALLEL:
            return cyclic_shift(self.N, self.slots, max(self.ancilla_dim, 1))
        return None

    def intertwiner(self, step):
        """Unitary applied after query ``step`` (1-based), or None for identity."""
        if not 1 <= step <= self.M:
            raise ConfigError(f"step {step} outside 1..{self.M}", "M")
        if self.v_sequence is VSequence.CUSTOM:
            return self.custom_unitaries[step - 1]
        if self.v_sequence is VSequence.SWAP_PARALLEL and self.slots == 1:
            return None
        return self._shared_v

    def with_(self, **changes):
        return replace(self, **changes)

    def signature(self):
        """Hashable summary used to compare configurations."""
        custom = tuple(u.tobytes() for u in self.custom_unitaries)
        return (self.N, self.M, float(self.tau), float(self.omega), float(self.gamma),
                self.ancilla_dim, self.v_sequence.value, custom, self.dim_cap)

    def to_dict(self):
        return {"N": self.N, "M": self.M, "tau": float(self.tau), "omega": float(self.omega),
                "gamma": float(self.gamma), "ancilla_dim": self.ancilla_dim,
                "v_sequence": self.v_sequence.value, "T": float(self.T)}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States after each query (index 0 is the probe), with and without the oracle."""

    x: int
    config: SchemeConfig
    times: tuple
    states_with_oracle: tuple
    states_reference: tuple
    derivatives: tuple

    @property
    def final_state(self):
        return self.states_with_oracle[-1]

    @property
    def final_reference(self):
        return self.states_reference[-1]

    @property
    def final_derivative(self):
        return self.derivatives[-1]


def _as_probe(probe, cfg):
    if isinstance(probe, PureState):
        rho = probe.density()
    elif isinstance(probe, DensityMatrix):
        rho = probe
    elif np.ndim(probe) == 1:
        rho = PureState(probe).density()
    else:
        rho = DensityMatrix(probe)
    if rho.dim != cfg.dim:
        raise DimensionError(f"probe dim {rho.dim} vs scheme dim {cfg.dim} (dims {cfg.dims})")
    return rho


def _reference_run(cfg, rho0):
    ref_cfg = cfg.with_(omega=0.0)
    zero = np.zeros((cfg.dim, cfg.dim), dtype=complex)
    refs = [rho0]
    rho = rho0
    for k in range(1, cfg.M + 1):
        rho, _ = step_with_derivative(1, ref_cfg, rho, zero, k)
        refs.append(rho)
    return tuple(refs)


def _oracle_run(cfg, rho0, x, refs):
    if not _is_int(x) or not 1 <= x <= cfg.N:
        raise ConfigError(f"label {x!r} outside 1..{cfg.N}", "x")
    states, ders = [rho0], [np.zeros((cfg.dim, cfg.dim), dtype=complex)]
    rho, d = rho0, ders[0]
    for k in range(1, cfg.M + 1):
        rho, d = step_with_derivative(x, cfg, rho, d, k)
        states.append(rho)
        ders.append(d)
    times = tuple(k * cfg.tau for k in range(cfg.M + 1))
    return Trajectory(x, cfg, times, tuple(states), refs, tuple(ders))


def run_scheme(cfg, probe, x):
    """Simulate all M queries for label ``x`` (1-based)."""
    rho0 = _as_probe(probe, cfg)
    return _oracle_run(cfg, rho0, x, _reference_run(cfg, rho0))


def run_all_labels(cfg, probe, workers=1):
    """One trajectory per label x = 1..N, sharing a single reference run."""
    rho0 = _as_probe(probe, cfg)
    refs = _reference_run(cfg, rho0)
    labels = range(1, cfg.N + 1)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda x: _oracle_run(cfg, rho0, x, refs), labels))
    return [_oracle_run(cfg, rho0, x, refs) for x in labels]


def average_distance(trajectories):
    """Summed Bures distance between oracle and reference states at each recorded time.

    Returns a list of ``(t, D_bar_t)``.
    """
    trajectories = list(trajectories)
    if not trajectories:
        raise ConfigError("need at least one trajectory", "trajectories")
    sig = trajectories[0].config.signature()
    if any(tr.config.signature() != sig for tr in trajectories):
        raise ConfigError("trajectories come from different configurations", "trajectories")
    cfg = trajectories[0].config
    labels = sorted(tr.x for tr in trajectories)
    if labels != list(range(1, cfg.N + 1)):
        raise ConfigError(f"expected one trajectory per label 1..{cfg.N}, got {labels}", "trajectories")
    out = []
    for k, t in enumerate(trajectories[0].times):
        total = sum(bures_angle(tr.states_with_oracle[k], tr.states_reference[k]) for tr in trajectories)
        out.append((t, float(total)))
    return out


def success_probability(rho, cfg, x):
    """Population of |x> in the sensing marginal."""
    m = as_matrix(rho)
    if len(cfg.dims) > 1:
        m = partial_trace(m, [0], cfg.dims)
    return float(m[x - 1, x - 1].real)


def discrete_grover(N, queries, omega=math.pi, workers=1):
    """Success probability of noiseless Grover search after ``queries`` oracle calls.

    Runs the continuous scheme with tau = pi / omega, which makes each query a
    sign flip on |x>.  The result is checked to be the same for every label.
    """
    cfg = SchemeConfig(N=N, M=queries, tau=math.pi / omega, omega=omega, gamma=0.0,
                       v_sequence=VSequence.GROVER_DIFFUSION)
    probs = [success_probability(tr.final_state, cfg, tr.x)
             for tr in run_all_labels(cfg, uniform_superposition(N), workers)]
    if max(probs) - min(probs) > 1e-10:
        raise RuntimeError(f"success probability depends on the label: {probs}")
    return probs[0]


def stepwise_inequality_audit(trajectory):
    """Margins of the per-query distance-increment inequality.

    For each query k the increment D(rho^x_{k+1}, rho_{k+1}) - D(rho^x_k, rho_k)
    must not exceed D(rho_k, U^dag rho_k U).  Returns rhs - lhs per query.
    """
    cfg = trajectory.config
    u = OracleUnitary(cfg.N, trajectory.x, cfg.omega, cfg.tau, dims=cfg.dims)
    ph = u.phases().conj()
    margins = []
    prev = bures_angle(trajectory.states_with_oracle[0], trajectory.states_reference[0])
    for k in range(cfg.M):
        ref = trajectory.states_reference[k].data
        back = ph[:, None] * ref * ph.conj()[None, :]
        rhs = bures_angle(ref, back)
        cur = bures_angle(trajectory.states_with_oracle[k + 1], trajectory.states_reference[k + 1])
        margins.append(float(rhs - (cur - prev)))
        prev = cur
    return margins


def pairwise_distances(trajectories):
    """Bures distances between final oracle states of distinct labels."""
    finals = [tr.final_state for tr in trajectories]
    n = len(finals)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = bures_angle(finals[i], finals[j])
    return out


@dataclass(frozen=True, eq=False)
class AuditResult:
    config: SchemeConfig
    distances: list
    success_probabilities: list
    perfectly_distinguishable: bool
    step_margins: dict
    reports: list

    @property
    def all_satisfied(self):
        return all(r.satisfied for r in self.reports if r.satisfied is not None)


def audit_run(cfg, probe=None, workers=1, orthogonality_atol=1e-9):
    """Simulate every label and check the distance bounds along the run.

    Checks the summed-distance time-way cap at every step, the per-query
    increment inequality, the frequency-way caps at the final time when
    gamma > 0, and the discrimination lower bounds when the final states are
    pairwise orthogonal.
    """
    if probe is None:
        if cfg.dim != cfg.N:
            raise ConfigError("default probe is the uniform superposition; supply a probe "
                              "for parallel or ancilla-assisted layouts", "probe")
        probe = uniform_superposition(cfg.N)
    trajs = run_all_labels(cfg, probe, workers)
    dist = average_distance(trajs)
    params = cfg.to_dict()
    reports = []

    worst = min(dist, key=lambda td: bounds.time_way_distance_bound(td[0], cfg.N, cfg.omega) - td[1])
    reports.append(bounds.BoundReport.check(
        "time_way_distance_bound", params,
        bounds.time_way_distance_bound(worst[0], cfg.N, cfg.omega), worst[1], "upper", at_time=worst[0]))

    margins = {tr.x: stepwise_inequality_audit(tr) for tr in trajs}
    flat = [m for ms in margins.values() for m in ms]
    if flat:
        reports.append(bounds.BoundReport.check(
            "step_increment_inequality", params, 0.0, -min(flat), "upper"))

    if cfg.gamma > 0 and cfg.M > 0:
        per_label = max(bures_angle(tr.final_state, tr.final_reference) for tr in trajs)
        reports.append(bounds.BoundReport.check(
            "frequency_way_distance_bound", params,
            bounds.frequency_way_distance_bound(cfg.T, cfg.omega, cfg.gamma), per_label, "upper",
            per_label=True))
        reports.append(bounds.BoundReport.check(
            "frequency_way_distance_bound_summed", params,
            bounds.frequency_way_distance_bound(cfg.T, cfg.omega, cfg.gamma, per_label=False, N=cfg.N),
            dist[-1][1], "upper", per_label=False))

    probs = [success_probability(tr.final_state, cfg, tr.x) for tr in trajs]
    perfect = False
    if cfg.N >= 2:
        pd = pairwise_distances(trajs)
        off = pd[~np.eye(cfg.N, dtype=bool)]
        perfect = bool(np.all(np.abs(off - math.pi / 2) <= orthogonality_atol))
        if perfect:
            reports.append(bounds.BoundReport.check(
                "distance_lower_bound", params, bounds.distance_lower_bound(cfg.N), dist[-1][1], "lower"))
            if cfg.omega != 0:
                reports.append(bounds.BoundReport.check(
                    "noiseless_query_bound", params,
                    bounds.noiseless_query_bound(cfg.N, abs(cfg.omega)), cfg.T, "lower"))
    return AuditResult(cfg, dist, probs, perfect, margins, reports)
