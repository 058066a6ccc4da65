"""Dense quantum-state primitives.

Density matrices and pure states are thin immutable wrappers around complex
numpy arrays.  Basis labels exposed to users run from 1 to N; array indices
stay 0-based internally.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .exceptions import DimensionError, SizeLimitError, StateError

__all__ = [
    "DEFAULT_DIM_CAP",
    "DensityMatrix",
    "PureState",
    "HamiltonianSpec",
    "EigenDecomposition",
    "as_matrix",
    "eigendecomposition",
    "tensor",
    "partial_trace",
    "embed",
    "expectation",
    "variance",
    "basis_state",
    "uniform_superposition",
    "plus_state",
    "ghz_state",
    "haar_random_state",
    "random_density_matrix",
    "random_unitary",
]

DEFAULT_DIM_CAP = 64

HERMITIAN_ATOL = 1e-10
PSD_ATOL = 1e-10
TRACE_ATOL = 1e-10
NORM_ATOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero and the matrix is
    renormalized; anything more negative is rejected.
    """

    __slots__ = ("_data",)

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise StateError(f"density matrix must be square and nonempty, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_ATOL:
            raise StateError("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_ATOL:
            raise StateError(f"density matrix trace is {tr!r}, expected 1")
        w, v = np.linalg.eigh(m)
        if w[0] < -PSD_ATOL:
            raise StateError(f"density matrix has negative eigenvalue {w[0]!r}")
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            m = (v * w) @ v.conj().T
            m = m / np.trace(m).real
        self._data = _frozen(m)

    @classmethod
    def _trusted(cls, matrix):
        # Skips validation; for outputs of CPTP maps applied to valid inputs.
        obj = cls.__new__(cls)
        obj._data = _frozen(matrix)
        return obj

    @property
    def data(self):
        return self._data

    @property
    def dim(self):
        return self._data.shape[0]

    def purity(self):
        return float(np.real(np.vdot(self._data, self._data)))

    def eig(self):
        return eigendecomposition(self)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._data, dtype=dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, purity={self.purity():.6g})"


class PureState:
    """Unit-norm state vector."""

    __slots__ = ("_amps",)

    def __init__(self, amplitudes):
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if v.size == 0:
            raise StateError("state vector is empty")
        norm2 = float(np.vdot(v, v).real)
        if abs(norm2 - 1.0) > NORM_ATOL:
            raise StateError(f"state vector has squared norm {norm2!r}, expected 1")
        self._amps = _frozen(v)

    @classmethod
    def from_unnormalized(cls, vector):
        v = np.asarray(vector, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise StateError("cannot normalize the zero vector")
        return cls(v / n)

    @property
    def amplitudes(self):
        return self._amps

    @property
    def dim(self):
        return self._amps.shape[0]

    def density(self):
        return DensityMatrix._trusted(np.outer(self._amps, self._amps.conj()))

    def overlap(self, other):
        return complex(np.vdot(self._amps, other.amplitudes))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._amps, dtype=dtype)

    def __repr__(self):
        return f"PureState(dim={self.dim})"


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """Generator of a unitary sensing evolution.

    ``kind`` is one of ``"projector"`` (|x><x|, label x in 1..dim),
    ``"excitation"`` (total excitation number of M qubits, dim = 2**M) or
    ``"custom"`` (explicit Hermitian matrix).
    """

    kind: str
    dim: int
    label: int = None
    M: int = None
    custom: np.ndarray = None

    @classmethod
    def projector(cls, N, x):
        if not 1 <= x <= N:
            raise DimensionError(f"label {x} outside 1..{N}")
        return cls("projector", N, label=x)

    @classmethod
    def excitation_number(cls, M):
        if M < 1:
            raise DimensionError("excitation number needs at least one qubit")
        return cls("excitation", 2**M, M=M)

    @classmethod
    def from_matrix(cls, H):
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionError(f"generator must be square, got {H.shape}")
        if np.max(np.abs(H - H.conj().T)) > HERMITIAN_ATOL:
            raise StateError("generator is not Hermitian")
        return cls("custom", H.shape[0], custom=_frozen(H))

    def diagonal(self):
        """Diagonal of the generator in the computational basis, or None."""
        if self.kind == "projector":
            d = np.zeros(self.dim)
            d[self.label - 1] = 1.0
            return d
        if self.kind == "excitation":
            idx = np.arange(self.dim)
            return np.array([bin(i).count("1") for i in idx], dtype=float)
        return None

    def matrix(self):
        d = self.diagonal()
        if d is not None:
            return np.diag(d).astype(complex)
        return np.array(self.custom)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Spectral decomposition with eigenvalues sorted in descending order."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self):
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_matrix(state):
    """Return the density-matrix array for a state-like object."""
    if isinstance(state, DensityMatrix):
        return state.data
    if isinstance(state, PureState):
        a = state.amplitudes
        return np.outer(a, a.conj())
    return np.asarray(state, dtype=complex)


def _generator_matrix(H):
    return H.matrix() if isinstance(H, HamiltonianSpec) else np.asarray(H, dtype=complex)


def eigendecomposition(rho):
    """Eigendecomposition of a Hermitian matrix, descending eigenvalues."""
    m = as_matrix(rho)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return EigenDecomposition(values=w[::-1].copy(), vectors=v[:, ::-1].copy())


def tensor(a, b, cap=DEFAULT_DIM_CAP):
    """Kronecker product of two density matrices, rejecting dims above ``cap``."""
    ma, mb = as_matrix(a), as_matrix(b)
    dim = ma.shape[0] * mb.shape[0]
    if dim > cap:
        raise SizeLimitError(f"tensor dimension {dim} exceeds cap {cap}")
    return DensityMatrix._trusted(np.kron(ma, mb))


def _check_dims(total, dims):
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != total:
        raise DimensionError(f"subsystem dims {dims} inconsistent with dimension {total}")
    return dims


def partial_trace(rho, keep, dims):
    """Reduced state on the subsystems listed in ``keep`` (0-based, any order kept sorted)."""
    m = as_matrix(rho)
    dims = _check_dims(m.shape[0], dims)
    n = len(dims)
    keep = sorted({int(k) for k in np.atleast_1d(keep)})
    if any(not 0 <= k < n for k in keep):
        raise DimensionError(f"keep indices {keep} outside 0..{n - 1}")
    t = m.reshape(dims + dims)
    # Trace out from the highest index so remaining axis positions stay valid.
    nleft = n
    for k in reversed(range(n)):
        if k in keep:
            continue
        t = np.trace(t, axis1=k, axis2=k + nleft)
        nleft -= 1
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    out = t.reshape(dk, dk)
    if isinstance(rho, (DensityMatrix, PureState)):
        return DensityMatrix._trusted(out)
    return out


def embed(op, dims, index):
    """Lift an operator on subsystem ``index`` to the full space ``dims``."""
    op = np.asarray(op, dtype=complex)
    dims = [int(d) for d in dims]
    if op.shape != (dims[index], dims[index]):
        raise DimensionError(f"operator shape {op.shape} does not match subsystem dim {dims[index]}")
    factors = [np.eye(d) for d in dims]
    factors[index] = op
    return reduce(np.kron, factors)


def expectation(rho, H):
    """Tr(rho H) for Hermitian H; imaginary round-off is discarded."""
    m = as_matrix(rho)
    h = _generator_matrix(H)
    if h.shape != m.shape:
        raise DimensionError(f"generator shape {h.shape} vs state shape {m.shape}")
    val = np.trace(m @ h)
    if abs(val.imag) > 1e-10:
        raise StateError(f"expectation has imaginary part {val.imag!r}")
    return float(val.real)


def variance(psi, H):
    """<H^2> - <H>^2 in a pure state, clamped at zero."""
    v = np.asarray(psi.amplitudes if isinstance(psi, PureState) else psi, dtype=complex)
    d = H.diagonal() if isinstance(H, HamiltonianSpec) else None
    if isinstance(H, HamiltonianSpec) and H.dim != v.shape[0]:
        raise DimensionError(f"generator dim {H.dim} vs state dim {v.shape[0]}")
    if d is not None:
        p = np.abs(v) ** 2
        mean = float(p @ d)
        second = float(p @ d**2)
    else:
        h = _generator_matrix(H)
        if h.shape[0] != v.shape[0]:
            raise DimensionError(f"generator dim {h.shape[0]} vs state dim {v.shape[0]}")
        hv = h @ v
        mean = float(np.vdot(v, hv).real)
        second = float(np.vdot(hv, hv).real)
    var = second - mean**2
    if var < -1e-12:
        raise StateError(f"negative variance {var!r}; state not normalized?")
    return max(var, 0.0)


def basis_state(N, x):
    """Computational basis vector |x>, with x in 1..N."""
    if not 1 <= x <= N:
        raise DimensionError(f"label {x} outside 1..{N}")
    v = np.zeros(N, dtype=complex)
    v[x - 1] = 1.0
    return PureState(v)


def uniform_superposition(N):
    return PureState(np.full(N, 1 / np.sqrt(N), dtype=complex))


def plus_state(M=1):
    """|+>^{(x) M} on M qubits."""
    return PureState(np.full(2**M, 2 ** (-M / 2), dtype=complex))


def ghz_state(M):
    v = np.zeros(2**M, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return PureState(v)


def haar_random_state(dim, rng):
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState.from_unnormalized(z)


def random_density_matrix(dim, rng, rank=None):
    """Random state from the induced (Hilbert-Schmidt for full rank) measure."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_unitary(dim, rng):
    """Haar-random unitary via QR with phase correction."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
