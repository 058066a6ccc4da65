"""Dephasing, oracle phase and composed interrogation channels.

The N-level dephasing map multiplies every coherence of the sensing
subsystem by ``eta = exp(-gamma * tau)`` and leaves populations untouched,
which is the convex mixture ``eta * rho + (1 - eta) * diag(rho)``.  The
oracle ``exp(-i omega tau |x><x|)`` is diagonal in the same basis, so both
act as element-wise multiplications on the full density matrix.

Scheme configurations are duck-typed here: anything with ``N``, ``tau``,
``omega``, ``gamma``, ``dims`` and ``intertwiner(step)`` works.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ChannelError, DimensionError
from .states import DensityMatrix, as_matrix, embed

__all__ = [
    "DephasingChannel",
    "OracleUnitary",
    "KrausChannel",
    "dephasing_mask",
    "apply_dephasing",
    "apply_oracle",
    "interrogation_step",
    "step_with_derivative",
    "random_kraus_channel",
]


def _digits(dims, index):
    """Value of subsystem ``index`` for every flat basis index."""
    dims = list(dims)
    stride = int(np.prod(dims[index + 1:], dtype=int))
    return (np.arange(int(np.prod(dims))) // stride) % dims[index]


def dephasing_mask(dims, acts_on, eta):
    """Element-wise multiplier implementing independent dephasing on ``acts_on``."""
    dim = int(np.prod(dims))
    mask = np.ones((dim, dim))
    for s in np.atleast_1d(acts_on):
        d = _digits(dims, int(s))
        mask = mask * np.where(d[:, None] != d[None, :], eta, 1.0)
    return mask


@dataclass(frozen=True)
class DephasingChannel:
    """Uniform dephasing of one or more subsystems in the computational basis."""

    dim: int
    gamma: float
    tau: float
    acts_on: object = 0
    dims: tuple = None

    def __post_init__(self):
        dims = (self.dim,) if self.dims is None else tuple(int(d) for d in self.dims)
        if int(np.prod(dims)) != self.dim:
            raise DimensionError(f"dims {dims} inconsistent with dim {self.dim}")
        for s in np.atleast_1d(self.acts_on):
            if not 0 <= int(s) < len(dims):
                raise DimensionError(f"subsystem {s} outside 0..{len(dims) - 1}")
        if not self.gamma >= 0:
            raise ChannelError(f"dephasing rate must be nonnegative, got {self.gamma!r}")
        if not self.tau > 0:
            raise ChannelError(f"step time must be positive, got {self.tau!r}")
        object.__setattr__(self, "dims", dims)

    @property
    def eta(self):
        return float(np.exp(-self.gamma * self.tau))

    def mask(self):
        return dephasing_mask(self.dims, self.acts_on, self.eta)

    def apply(self, rho):
        return apply_dephasing(self, rho)

    def to_kraus(self):
        """Kraus form sqrt(eta) I, sqrt(1-eta) P_k for each dephased subsystem."""
        ops = [np.eye(self.dim, dtype=complex)]
        for s in np.atleast_1d(self.acts_on):
            s = int(s)
            local = [np.sqrt(self.eta) * np.eye(self.dims[s])]
            for k in range(self.dims[s]):
                p = np.zeros((self.dims[s], self.dims[s]))
                p[k, k] = np.sqrt(1 - self.eta)
                local.append(p)
            ops = [embed(l, self.dims, s) @ o for l in local for o in ops]
        return KrausChannel(ops)


@dataclass(frozen=True)
class OracleUnitary:
    """Phase oracle exp(-i omega tau |x><x|) on the sensing subsystem."""

    N: int
    x: int
    omega: float
    tau: float
    dims: tuple = None
    acts_on: int = 0

    def __post_init__(self):
        dims = (self.N,) if self.dims is None else tuple(int(d) for d in self.dims)
        if dims[self.acts_on] != self.N:
            raise DimensionError(f"sensing subsystem has dim {dims[self.acts_on]}, expected {self.N}")
        if not 1 <= self.x <= self.N:
            raise DimensionError(f"label {self.x} outside 1..{self.N}")
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self):
        return int(np.prod(self.dims))

    def phases(self):
        """Diagonal of the full-space unitary."""
        hit = _digits(self.dims, self.acts_on) == self.x - 1
        return np.where(hit, np.exp(-1j * self.omega * self.tau), 1.0 + 0j)

    def generator_diagonal(self):
        """Diagonal of |x><x| lifted to the full space."""
        return (_digits(self.dims, self.acts_on) == self.x - 1).astype(float)

    def matrix(self):
        return np.diag(self.phases())


class KrausChannel:
    """CPTP map given by Kraus operators; completeness is checked to 1e-10."""

    def __init__(self, operators, atol=1e-10):
        ops = [np.asarray(k, dtype=complex) for k in operators]
        if not ops:
            raise ChannelError("need at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops):
            raise ChannelError("Kraus operators have different shapes")
        s = sum(k.conj().T @ k for k in ops)
        err = np.max(np.abs(s - np.eye(shape[1])))
        if err > atol:
            raise ChannelError(f"Kraus completeness violated by {err:.3g}")
        self.operators = tuple(ops)

    @property
    def dim_in(self):
        return self.operators[0].shape[1]

    @property
    def dim_out(self):
        return self.operators[0].shape[0]

    def apply(self, rho):
        m = as_matrix(rho)
        if m.shape[0] != self.dim_in:
            raise DimensionError(f"state dim {m.shape[0]} vs channel input dim {self.dim_in}")
        out = sum(k @ m @ k.conj().T for k in self.operators)
        return DensityMatrix._trusted(0.5 * (out + out.conj().T))

    def extend(self, dim_aux):
        """This channel tensored with the identity on a dim_aux ancilla."""
        eye = np.eye(dim_aux)
        return KrausChannel([np.kron(k, eye) for k in self.operators])


def random_kraus_channel(dim, n_ops, rng, dim_out=None):
    """Random CPTP map from an isometry drawn with Gaussian entries."""
    dim_out = dim if dim_out is None else dim_out
    g = rng.standard_normal((n_ops * dim_out, dim)) + 1j * rng.standard_normal((n_ops * dim_out, dim))
    q, _ = np.linalg.qr(g)
    return KrausChannel([q[i * dim_out:(i + 1) * dim_out] for i in range(n_ops)])


def _conj_diag(m, d):
    # d m d^dagger for diagonal d given as a vector
    return d[:, None] * m * d.conj()[None, :]


def apply_dephasing(ch, rho):
    m = as_matrix(rho)
    if m.shape[0] != ch.dim:
        raise DimensionError(f"state dim {m.shape[0]} vs channel dim {ch.dim}")
    return DensityMatrix._trusted(m * ch.mask())


def apply_oracle(u, rho):
    m = as_matrix(rho)
    if m.shape[0] != u.dim:
        raise DimensionError(f"state dim {m.shape[0]} vs oracle dim {u.dim}")
    return DensityMatrix._trusted(_conj_diag(m, u.phases()))


def _parts(x, cfg, omega=None):
    dims = tuple(cfg.dims)
    omega = cfg.omega if omega is None else omega
    u = OracleUnitary(cfg.N, x, omega, cfg.tau, dims=dims)
    ch = DephasingChannel(int(np.prod(dims)), cfg.gamma, cfg.tau, acts_on=0, dims=dims)
    return u, ch


def interrogation_step(x, cfg, rho):
    """One query: oracle phase on the sensing subsystem, then dephasing."""
    u, ch = _parts(x, cfg)
    m = as_matrix(rho)
    if m.shape[0] != u.dim:
        raise DimensionError(f"state dim {m.shape[0]} vs scheme dim {u.dim}")
    return DensityMatrix._trusted(_conj_diag(m, u.phases()) * ch.mask())


def step_with_derivative(x, cfg, rho, drho, step=1):
    """Advance (rho, d rho / d omega) through query ``step`` and its intertwiner.

    Uses d(U rho U^dag) = -i tau [H_x, U rho U^dag] + U (d rho) U^dag; the
    dephasing map and the intertwiner are linear and omega-independent.
    """
    u, ch = _parts(x, cfg)
    m = as_matrix(rho)
    dm = np.asarray(drho, dtype=complex)
    if m.shape[0] != u.dim or dm.shape != m.shape:
        raise DimensionError(f"state/derivative shapes {m.shape}/{dm.shape} vs scheme dim {u.dim}")
    ph = u.phases()
    h = u.generator_diagonal()
    mask = ch.mask()
    rotated = _conj_diag(m, ph)
    d_rot = -1j * cfg.tau * (h[:, None] - h[None, :]) * rotated + _conj_diag(dm, ph)
    new = rotated * mask
    dnew = d_rot * mask
    v = cfg.intertwiner(step)
    if v is not None:
        new = v @ new @ v.conj().T
        dnew = v @ dnew @ v.conj().T
    return DensityMatrix._trusted(0.5 * (new + new.conj().T)), 0.5 * (dnew + dnew.conj().T)
