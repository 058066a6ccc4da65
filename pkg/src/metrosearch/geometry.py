"""Fidelity, angular Bures distance and quantum Fisher information."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DimensionError, StateError
from .states import HamiltonianSpec, PureState, as_matrix, eigendecomposition, variance

__all__ = [
    "QfiMethod",
    "QfiResult",
    "SLD_CUTOFF",
    "fidelity",
    "bures_angle",
    "qfi_pure",
    "qfi_sld",
    "qfi_unitary_generator",
    "convex_roof_upper_bound",
    "qfi_fidelity_fd",
    "qfi_bures_consistency",
]

SLD_CUTOFF = 1e-12
EIG_CLAMP = 1e-10
SUPPORT_TOL = 1e-14


class QfiMethod(str, Enum):
    PURE_VARIANCE = "PureVariance"
    SLD_EIGEN = "SldEigen"
    FINITE_DIFFERENCE_FIDELITY = "FiniteDifferenceFidelity"


@dataclass(frozen=True)
class QfiResult:
    value: float
    method: QfiMethod
    spectrum_cutoff_used: float = 0.0

    def __float__(self):
        return self.value


def fidelity(rho, sigma):
    """Root fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)), clamped to [0, 1].

    Pure inputs short-circuit to |<psi|phi>| or sqrt(<psi|sigma|psi>).
    """
    if isinstance(rho, PureState) and isinstance(sigma, PureState):
        if rho.dim != sigma.dim:
            raise DimensionError(f"dims {rho.dim} and {sigma.dim} differ")
        return float(min(1.0, abs(np.vdot(rho.amplitudes, sigma.amplitudes))))
    if isinstance(sigma, PureState):
        rho, sigma = sigma, rho
    if isinstance(rho, PureState):
        s = as_matrix(sigma)
        if s.shape[0] != rho.dim:
            raise DimensionError(f"dims {rho.dim} and {s.shape[0]} differ")
        a = rho.amplitudes
        return float(np.sqrt(np.clip(np.vdot(a, s @ a).real, 0.0, 1.0)))
    a, b = as_matrix(rho), as_matrix(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"shapes {a.shape} and {b.shape} differ")
    # Work on the support of the lower-rank argument: square roots of
    # round-off eigenvalues (~1e-17) would otherwise add ~1e-8 to F.
    (wa, va), (wb, vb) = _support(a), _support(b)
    if len(wb) < len(wa):
        (wa, va), b = (wb, vb), a
    half = va * np.sqrt(wa)
    w = np.linalg.eigvalsh(half.conj().T @ b @ half)
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))))
    return min(max(f, 0.0), 1.0)


def _support(m):
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if w[0] < -EIG_CLAMP:
        raise StateError(f"matrix has negative eigenvalue {w[0]!r}")
    keep = w > SUPPORT_TOL * w[-1]
    return w[keep], v[:, keep]


def bures_angle(rho, sigma):
    """Angular Bures distance arccos F, in [0, pi/2].

    arccos loses half the digits near F = 1.  Pure inputs use atan2 of the
    overlap against the weight on the orthogonal complement; mixed pairs use
    the Bures norm min_U ||sqrt(rho) - sqrt(sigma) U||, whose entries stay
    accurate for nearly equal states.
    """
    a = rho.density().data if isinstance(rho, PureState) else as_matrix(rho)
    b = sigma.density().data if isinstance(sigma, PureState) else as_matrix(sigma)
    if a.shape != b.shape:
        raise DimensionError(f"shapes {a.shape} and {b.shape} differ")
    (wa, va), (wb, vb) = (np.linalg.eigh(0.5 * (m + m.conj().T)) for m in (a, b))
    pure_a, pure_b = (np.sum(w > SUPPORT_TOL * w[-1]) == 1 for w in (wa, wb))
    if pure_a and pure_b:
        psi, phi = va[:, -1], vb[:, -1]
        c = np.vdot(psi, phi)
        return float(np.arctan2(np.linalg.norm(phi - c * psi), abs(c)))
    if pure_a or pure_b:
        v, q = (va, b) if pure_a else (vb, a)
        weights = np.einsum("ik,ij,jk->k", v.conj(), q, v).real
        return float(np.arctan2(np.sqrt(max(weights[:-1].sum(), 0.0)), np.sqrt(max(weights[-1], 0.0))))
    # mixed pair: 2 (1 - F) = min_U ||sqrt(rho) - sqrt(sigma) U||^2, formed entry-wise
    ra, rb = _root(wa, va), _root(wb, vb)
    w, _, vh = np.linalg.svd(ra.conj().T @ rb)
    d = np.linalg.norm(ra - rb @ (vh.conj().T @ w.conj().T))
    return float(2.0 * np.arcsin(min(d / 2.0, 1.0)))


def _root(w, v):
    w = np.where(w > SUPPORT_TOL * w[-1], w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def qfi_pure(psi, G, scale=1.0):
    """4 scale^2 Var(G) for a pure state."""
    if not isinstance(psi, PureState):
        psi = PureState(psi)
    return QfiResult(4.0 * scale**2 * variance(psi, G), QfiMethod.PURE_VARIANCE)


def qfi_sld(rho, drho, cutoff=SLD_CUTOFF):
    """Mixed-state QFI from the spectral form of the SLD.

    F = 2 sum_{ij} |<e_i| drho |e_j>|^2 / (l_i + l_j), skipping pairs with
    l_i + l_j <= cutoff.
    """
    m = as_matrix(rho)
    dm = np.asarray(drho, dtype=complex)
    if dm.shape != m.shape:
        raise DimensionError(f"derivative shape {dm.shape} vs state shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(dm))))
    if np.max(np.abs(dm - dm.conj().T)) > 1e-9 * scale:
        raise StateError("state derivative is not Hermitian")
    if abs(np.trace(dm)) > 1e-9 * scale:
        raise StateError("state derivative is not traceless")
    ed = eigendecomposition(m)
    lam, vec = ed.values, ed.vectors
    d = vec.conj().T @ dm @ vec
    denom = lam[:, None] + lam[None, :]
    keep = denom > cutoff
    f = 2.0 * np.sum(np.abs(d[keep]) ** 2 / denom[keep])
    return QfiResult(float(max(f, 0.0)), QfiMethod.SLD_EIGEN, cutoff)


def qfi_unitary_generator(rho, G, scale=1.0):
    """QFI of rho under exp(-i theta scale G), via drho = -i scale [G, rho]."""
    m = as_matrix(rho)
    g = G.matrix() if isinstance(G, HamiltonianSpec) else np.asarray(G, dtype=complex)
    if g.shape != m.shape:
        raise DimensionError(f"generator shape {g.shape} vs state shape {m.shape}")
    drho = -1j * scale * (g @ m - m @ g)
    return qfi_sld(m, drho)


def convex_roof_upper_bound(rho, G, scale=1.0):
    """Eigen-ensemble average of pure-state QFIs; upper-bounds the mixed QFI."""
    ed = eigendecomposition(rho)
    if isinstance(G, HamiltonianSpec) and G.dim != ed.vectors.shape[0]:
        raise DimensionError(f"generator dim {G.dim} vs state dim {ed.vectors.shape[0]}")
    total = 0.0
    for lam, vec in zip(ed.values, ed.vectors.T):
        if lam <= 0:
            continue
        total += lam * 4.0 * scale**2 * variance(vec, G)
    return float(total)


def qfi_fidelity_fd(family, at, eps=1e-3):
    """Cross-check QFI 8 (1 - F(rho_t, rho_{t+eps})) / eps^2, Richardson-extrapolated.

    Loses roughly half the available digits; not meant for production use.
    """
    r0 = family(at)

    def est(h):
        return 8.0 * (1.0 - fidelity(r0, family(at + h))) / h**2

    val = (4.0 * est(eps / 2) - est(eps)) / 3.0
    return QfiResult(float(max(val, 0.0)), QfiMethod.FINITE_DIFFERENCE_FIDELITY)


def qfi_bures_consistency(family, at, eps=1e-4, derivative=None):
    """Relative mismatch between 2 D(rho_t, rho_{t+eps}) / eps and sqrt(F).

    ``family`` maps a parameter value to a state.  The QFI side uses
    ``derivative(at)`` when given, otherwise a central difference of the
    family with step ``eps``.  A constant family returns 0.
    """
    r0 = as_matrix(family(at))
    if derivative is not None:
        d = np.asarray(derivative(at), dtype=complex)
    else:
        d = (as_matrix(family(at + eps)) - as_matrix(family(at - eps))) / (2 * eps)
    sqrt_f = np.sqrt(qfi_sld(r0, d).value)
    slope = 2.0 * bures_angle(r0, as_matrix(family(at + eps))) / eps
    if sqrt_f < 1e-12:
        return 0.0 if slope < 1e-6 else float("inf")
    return float(abs(slope - sqrt_f) / sqrt_f)
