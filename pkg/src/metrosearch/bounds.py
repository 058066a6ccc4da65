"""Closed-form precision and query-complexity bounds.

Every function here is a pure formula with argument validation.  Dephasing
formulas reject ``gamma == 0`` instead of returning infinities.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import BoundDomainError

__all__ = [
    "BOUND_SLACK",
    "BoundReport",
    "cramer_rao",
    "dephasing_qfi_bound",
    "fundamental_dephasing_bound",
    "fundamental_bound_convergence",
    "heisenberg_qfi_bound",
    "noiseless_query_bound",
    "dephasing_query_bound",
    "temme_bound",
    "distance_lower_bound",
    "time_way_distance_bound",
    "linear_qfi_distance_bound",
    "frequency_way_distance_bound",
    "conjecture_envelope",
    "crossover_scan",
    "CrossoverTable",
]

BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class BoundReport:
    """A bound value, optionally compared against a measured quantity.

    ``direction`` is ``"upper"`` when the measured value must not exceed the
    bound and ``"lower"`` when it must not fall below it.  ``margin`` is
    positive when the bound is respected.
    """

    bound_name: str
    parameters: dict
    bound_value: float
    measured_value: float = None
    direction: str = "upper"
    satisfied: bool = None
    margin: float = None
    notes: dict = field(default_factory=dict)

    @classmethod
    def check(cls, bound_name, parameters, bound_value, measured, direction="upper",
              slack=BOUND_SLACK, **notes):
        if direction not in ("upper", "lower"):
            raise ValueError(f"direction must be 'upper' or 'lower', got {direction!r}")
        bound_value = float(bound_value)
        measured = float(measured)
        margin = bound_value - measured if direction == "upper" else measured - bound_value
        return cls(bound_name, dict(parameters), bound_value, measured, direction,
                   bool(margin >= -slack), float(margin), dict(notes))

    def to_dict(self):
        return {
            "bound_name": self.bound_name,
            "parameters": dict(self.parameters),
            "bound_value": self.bound_value,
            "measured_value": self.measured_value,
            "direction": self.direction,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "notes": dict(self.notes),
        }


def _positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value) and value > 0):
        raise BoundDomainError(f"{name} must be a finite positive number, got {value!r}")
    return float(value)


def _nonnegative(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value) and value >= 0):
        raise BoundDomainError(f"{name} must be a finite nonnegative number, got {value!r}")
    return float(value)


def _rate(gamma):
    if gamma == 0:
        raise BoundDomainError("gamma = 0 makes the dephasing bound diverge; use the noiseless formulas")
    return _positive("gamma", gamma)


def _count(name, value, minimum):
    if int(value) != value or value < minimum:
        raise BoundDomainError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def cramer_rao(F):
    """Smallest achievable frequency uncertainty 1/sqrt(F)."""
    if not F > 0:
        raise BoundDomainError(f"Cramer-Rao bound undefined for F = {F!r}")
    return 1.0 / math.sqrt(F)


def dephasing_qfi_bound(M, tau, gamma):
    """QFI cap tau^2 e^{-2 gamma tau} / (1 - e^{-2 gamma tau}) M for M dephased steps."""
    M = _count("M", M, 0)
    tau = _positive("tau", tau)
    gamma = _rate(gamma)
    # expm1 keeps the denominator accurate for small gamma * tau
    x = 2 * gamma * tau
    if x > 700:
        return 0.0 if M == 0 else tau**2 * M * math.exp(-x)
    return tau**2 * M / math.expm1(x)


def fundamental_dephasing_bound(T, gamma):
    """Limit T / (2 gamma) of the dephasing QFI cap as tau -> 0 at fixed T."""
    return _positive("T", T) / (2 * _rate(gamma))


def heisenberg_qfi_bound(T):
    """Noiseless QFI cap T^2 for a generator with unit spectral width."""
    return _nonnegative("T", T) ** 2


def fundamental_bound_convergence(T, gamma, tau0, halvings=10):
    """Step-model cap at fixed T while tau is halved, next to the T/(2 gamma) limit.

    Rows are ``(tau, M, cap)``; tau0 must divide T into an integer M.
    """
    T, tau0 = _positive("T", T), _positive("tau0", tau0)
    M0 = T / tau0
    if abs(M0 - round(M0)) > 1e-9 * M0:
        raise BoundDomainError(f"tau0 = {tau0!r} does not divide T = {T!r}")
    rows = []
    for k in range(halvings + 1):
        M = int(round(M0)) * 2**k
        tau = T / M
        rows.append((tau, M, dephasing_qfi_bound(M, tau, gamma)))
    return rows, fundamental_dephasing_bound(T, gamma)


def noiseless_query_bound(N, omega):
    """Minimal total time (pi / 4 omega) sqrt(N) for noiseless search."""
    return math.pi / (4 * _positive("omega", omega)) * math.sqrt(_count("N", N, 1))


def dephasing_query_bound(N, omega, gamma):
    """Minimal total time N (pi^2 / 8) gamma / omega^2 under dephasing."""
    return _count("N", N, 1) * (math.pi**2 / 8) * _rate(gamma) / _positive("omega", omega) ** 2


def temme_bound(N, omega, gamma):
    """Sequential no-ancilla dephased search bound N 2 gamma / (gamma^2 + 4 omega^2)."""
    gamma = _rate(gamma)
    omega = _positive("omega", omega)
    return _count("N", N, 1) * 2 * gamma / (gamma**2 + 4 * omega**2)


def distance_lower_bound(N):
    """Summed Bures distance N pi / 4 required for perfect discrimination."""
    return _count("N", N, 2) * math.pi / 4


def time_way_distance_bound(t, N, omega):
    """Summed distance cap t sqrt(N) |omega| from integrating over time."""
    return _nonnegative("t", t) * math.sqrt(_count("N", N, 1)) * abs(float(omega))


def linear_qfi_distance_bound(T, omega, qfi_rate):
    """Per-label distance cap for any noise with QFI <= qfi_rate * T.

    Integrating half the square-root QFI over frequency gives
    (|omega| / 2) sqrt(qfi_rate * T).  The rate is taken on trust.
    """
    return 0.5 * abs(float(omega)) * math.sqrt(_positive("qfi_rate", qfi_rate) * _nonnegative("T", T))


def frequency_way_distance_bound(T, omega, gamma, per_label=True, N=None):
    """Dephasing distance cap omega sqrt(T) / (2 sqrt(2 gamma)), times N if not per label."""
    value = linear_qfi_distance_bound(T, omega, 1.0 / (2 * _rate(gamma)))
    if per_label:
        return value
    if N is None:
        raise BoundDomainError("N is required when per_label is False")
    return _count("N", N, 1) * value


def conjecture_envelope(T, N, const):
    """Conjectured summed-distance cap const sqrt(T) sqrt(N)."""
    return float(const) * math.sqrt(_nonnegative("T", T)) * math.sqrt(_count("N", N, 1))


@dataclass(frozen=True)
class CrossoverTable:
    rows: list
    columns: tuple = ("N", "noiseless", "dephasing", "temme")
    crossover_N: int = None
    monotone: dict = field(default_factory=dict)


def crossover_scan(N_values, omega, gamma):
    """Tabulate the three query bounds over N and locate where dephasing dominates.

    ``crossover_N`` is the first scanned N with dephasing >= noiseless, or
    None if that never happens on the grid.
    """
    Ns = sorted({_count("N", n, 1) for n in N_values})
    rows = [(n, noiseless_query_bound(n, omega), dephasing_query_bound(n, omega, gamma),
             temme_bound(n, omega, gamma)) for n in Ns]
    crossover = next((r[0] for r in rows if r[2] >= r[1]), None)
    monotone = {}
    for j, name in enumerate(("noiseless", "dephasing", "temme"), start=1):
        col = [r[j] for r in rows]
        monotone[name] = all(b >= a for a, b in zip(col, col[1:]))
    return CrossoverTable(rows=rows, crossover_N=crossover, monotone=monotone)
