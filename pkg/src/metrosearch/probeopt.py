"""Probe-state optimization of summed square-root QFIs.

The objective for a pure probe is sum_x sqrt(F_x), where F_x is the QFI with
respect to omega of the final state of a fixed, non-adaptive (parallel or
single-step) scheme with label x.  Optimization is multistart projected
gradient ascent on the unit sphere with central-difference gradients and
backtracking step control.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import dephasing_mask
from .exceptions import ConfigError, SizeLimitError, UnsupportedConfigurationError
from .geometry import SLD_CUTOFF, qfi_sld
from .protocol import VSequence, average_distance, run_all_labels
from .states import PureState, haar_random_state, uniform_superposition
from . import bounds

__all__ = [
    "THREADS_ENV",
    "OptimizationResult",
    "ConjectureCheck",
    "ScalingScan",
    "check_restricted",
    "sum_sqrt_qfi",
    "sum_sqrt_qfi_cap",
    "label_qfis",
    "batch_objective",
    "optimize_sum_sqrt_qfi",
    "conjecture_check",
    "conjecture_scaling_scan",
    "fit_power_law",
]

THREADS_ENV = "METROSEARCH_THREADS"

SMOOTH_FLOOR = 1e-8
_SQRT_FLOOR = math.sqrt(SMOOTH_FLOOR)


def default_workers():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def check_restricted(cfg):
    """Reject layouts with intertwiners that could adapt the probe."""
    if cfg.v_sequence is VSequence.CUSTOM:
        raise UnsupportedConfigurationError("custom intertwiners are not part of the restricted scheme")
    if cfg.v_sequence is not VSequence.SWAP_PARALLEL and cfg.M > 1:
        raise UnsupportedConfigurationError(
            f"restricted parallel scheme needs SwapParallel or M <= 1, got {cfg.v_sequence.value} with M={cfg.M}")


def sum_sqrt_qfi_cap(cfg):
    """2 T sqrt(N): the omega-parameterized form of sum_x sqrt(F_x) <= 2 omega sqrt(N)."""
    return 2.0 * cfg.T * math.sqrt(cfg.N)


def label_qfis(probe, cfg):
    """QFI with respect to omega of the final state for every label, via full trajectories."""
    check_restricted(cfg)
    return [qfi_sld(tr.final_state, tr.final_derivative).value for tr in run_all_labels(cfg, probe)]


def sum_sqrt_qfi(probe, cfg):
    return float(sum(math.sqrt(f) for f in label_qfis(probe, cfg)))


def _batched_final(cfg, psis, x):
    dims = cfg.dims
    digit0 = (np.arange(cfg.dim) // int(np.prod(dims[1:], dtype=int))) % cfg.N
    h = (digit0 == x - 1).astype(float)
    ph = np.exp(-1j * cfg.omega * cfg.tau * h)
    gap = h[:, None] - h[None, :]
    phase = ph[:, None] * ph.conj()[None, :]
    mask = dephasing_mask(dims, 0, math.exp(-cfg.gamma * cfg.tau))
    rho = psis[:, :, None] * psis.conj()[:, None, :]
    d = np.zeros_like(rho)
    for k in range(1, cfg.M + 1):
        rot = rho * phase
        d = (-1j * cfg.tau * gap * rot + d * phase) * mask
        rho = rot * mask
        v = cfg.intertwiner(k)
        if v is not None:
            vh = v.conj().T
            rho = v @ rho @ vh
            d = v @ d @ vh
    return rho, d


def _batched_qfi(rho, d, cutoff=SLD_CUTOFF):
    w, vec = np.linalg.eigh(rho)
    dd = np.swapaxes(vec.conj(), -1, -2) @ d @ vec
    denom = w[:, :, None] + w[:, None, :]
    keep = denom > cutoff
    terms = np.where(keep, np.abs(dd) ** 2 / np.where(keep, denom, 1.0), 0.0)
    return 2.0 * terms.sum(axis=(1, 2))


def _root(F, smooth):
    F = np.clip(F, 0.0, None)
    if not smooth:
        return np.sqrt(F)
    # tangent-line continuation below the floor keeps the gradient finite
    return np.where(F >= SMOOTH_FLOOR, np.sqrt(np.maximum(F, SMOOTH_FLOOR)),
                    F / (2 * _SQRT_FLOOR) + 0.5 * _SQRT_FLOOR)


def batch_objective(psis, cfg, labels=None, smooth=False):
    """sum over ``labels`` of sqrt(F_x) for each row of ``psis`` (unit vectors)."""
    psis = np.atleast_2d(np.asarray(psis, dtype=complex))
    labels = range(1, cfg.N + 1) if labels is None else labels
    total = np.zeros(psis.shape[0])
    for x in labels:
        total += _root(_batched_qfi(*_batched_final(cfg, psis, x)), smooth)
    return total


def _normalize(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _gradient(f, psi, h):
    d = psi.shape[0]
    eye = np.eye(d)
    shifts = np.concatenate([h * eye, -h * eye, 1j * h * eye, -1j * h * eye])
    vals = f(_normalize(psi[None, :] + shifts))
    g_re = (vals[:d] - vals[d:2 * d]) / (2 * h)
    g_im = (vals[2 * d:3 * d] - vals[3 * d:]) / (2 * h)
    return g_re + 1j * g_im


def _ascend(f, psi, tol, max_iter, h=1e-6):
    value = f(psi[None, :])[0]
    step = 0.1
    for it in range(1, max_iter + 1):
        g = _gradient(f, psi, h)
        g = g - np.real(np.vdot(psi, g)) * psi
        gn2 = float(np.real(np.vdot(g, g)))
        if gn2 < 1e-20:
            return psi, value, it, True
        while True:
            cand = _normalize(psi + step * g)
            cval = f(cand[None, :])[0]
            if cval >= value + 1e-4 * step * gn2:
                break
            step *= 0.5
            if step < 1e-14:
                return psi, value, it, True
        gain = cval - value
        psi, value = cand, cval
        step = min(step * 2.0, 10.0)
        if gain < tol:
            return psi, value, it, True
    return psi, value, max_iter, False


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    best_value: float
    best_probe: PureState
    restarts: int
    converged_fraction: float
    iterations_used: list
    seed: int
    labels: tuple = ()
    restart_values: list = field(default_factory=list)

    def to_dict(self):
        return {
            "best_value": self.best_value,
            "restarts": self.restarts,
            "converged_fraction": self.converged_fraction,
            "iterations_used": list(self.iterations_used),
            "seed": self.seed,
            "labels": list(self.labels),
            "restart_values": list(self.restart_values),
        }


def optimize_sum_sqrt_qfi(cfg, restarts=50, seed=0, labels=None, tol=1e-8, max_iter=5000, workers=None):
    """Best summed square-root QFI over pure probes, from Haar-random restarts.

    Restart r draws its start from ``default_rng([seed, r])``, so results do
    not depend on ``workers``.  ``labels`` restricts the sum (default 1..N).
    """
    check_restricted(cfg)
    if cfg.dim > cfg.dim_cap:
        raise SizeLimitError(f"scheme dimension {cfg.dim} exceeds cap {cfg.dim_cap}")
    if restarts < 1:
        raise ConfigError("need at least one restart", "restarts")
    labels = tuple(range(1, cfg.N + 1)) if labels is None else tuple(labels)
    workers = default_workers() if workers is None else workers

    def f(psis):
        return batch_objective(psis, cfg, labels, smooth=True)

    def one(r):
        psi0 = haar_random_state(cfg.dim, np.random.default_rng([seed, r])).amplitudes
        psi, _, its, ok = _ascend(f, np.array(psi0), tol, max_iter)
        exact = float(batch_objective(psi[None, :], cfg, labels)[0])
        return psi, exact, its, ok

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, range(restarts)))
    else:
        runs = [one(r) for r in range(restarts)]
    values = [r[1] for r in runs]
    best = int(np.argmax(values))
    return OptimizationResult(
        best_value=values[best],
        best_probe=PureState(runs[best][0]),
        restarts=restarts,
        converged_fraction=sum(r[3] for r in runs) / restarts,
        iterations_used=[r[2] for r in runs],
        seed=seed,
        labels=labels,
        restart_values=values,
    )


@dataclass(frozen=True, eq=False)
class ConjectureCheck:
    """Optimized summed and single-label square-root QFIs.

    ``rhs = 2 sqrt(N) max sqrt(F_1)`` so the conjectured inequality reads
    ``ratio <= 1``; ``single_ratio = lhs / max sqrt(F_1)`` is the same
    comparison against ``2 sqrt(N)``.
    """

    lhs: float
    rhs: float
    ratio: float
    single_best: float
    single_ratio: float
    counterexample_candidate: bool
    summed: OptimizationResult
    single: OptimizationResult

    def to_dict(self):
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "single_best": self.single_best,
            "single_ratio": self.single_ratio,
            "counterexample_candidate": self.counterexample_candidate,
            "summed": self.summed.to_dict(),
            "single": self.single.to_dict(),
        }


def _ratio(a, b):
    if b == 0:
        return 0.0 if a == 0 else math.inf
    return a / b


def conjecture_check(cfg, restarts=50, seed=0, workers=None, rel_tol=1e-6, **opts):
    """Compare max sum_x sqrt(F_x) with 2 sqrt(N) max sqrt(F_1) at equal optimizer budget."""
    summed = optimize_sum_sqrt_qfi(cfg, restarts, seed, workers=workers, **opts)
    single = optimize_sum_sqrt_qfi(cfg, restarts, seed, labels=(1,), workers=workers, **opts)
    lhs = summed.best_value
    rhs = 2.0 * math.sqrt(cfg.N) * single.best_value
    ratio = _ratio(lhs, rhs)
    return ConjectureCheck(lhs, rhs, ratio, single.best_value, _ratio(lhs, single.best_value),
                           bool(ratio > 1.0 + rel_tol), summed, single)


def fit_power_law(xs, ys):
    """Least-squares exponent of y ~ x^p on positive data; None if underdetermined."""
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len({p[0] for p in pts}) < 2:
        return None
    a = np.array([[p[0], 1.0] for p in pts])
    b = np.array([p[1] for p in pts])
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    return float(sol[0])


@dataclass(frozen=True, eq=False)
class ScalingScan:
    rows: list
    alpha: float
    beta: float
    beta_by_N: dict
    alpha_by_T: dict

    @property
    def within_envelope(self):
        return all(r["within_envelope"] for r in self.rows)


def conjecture_scaling_scan(N_values, T_values, template, probe=None):
    """Tabulate D_bar_T / (sqrt(T) sqrt(N)) over a grid of N and T.

    For each N one run of ``max(T) / tau`` queries is simulated and read off
    at every requested T.  Exponents of D_bar in N and T come from
    least-squares fits on log scales; they are reported, not asserted.
    ``within_envelope`` compares each row with the summed frequency-way cap
    (dephased runs) or the time-way cap (noiseless runs).
    """
    if template.v_sequence is VSequence.SWAP_PARALLEL:
        raise UnsupportedConfigurationError("scaling scan needs a fixed-dimension layout")
    steps = []
    for T in T_values:
        m = T / template.tau
        if T < 0 or abs(m - round(m)) > 1e-9 * max(1.0, m):
            raise ConfigError(f"T = {T!r} is not a multiple of tau = {template.tau!r}", "T_values")
        steps.append(int(round(m)))
    rows = []
    for n in N_values:
        cfg = template.with_(N=int(n), M=max(steps))
        p = uniform_superposition(cfg.N) if probe is None else probe(cfg)
        dist = average_distance(run_all_labels(cfg, p))
        for T, m in zip(T_values, steps):
            t, dbar = dist[m]
            ratio = dbar / math.sqrt(t * cfg.N) if t > 0 else 0.0
            if cfg.gamma > 0:
                env = bounds.frequency_way_distance_bound(t, cfg.omega, cfg.gamma, per_label=False, N=cfg.N) \
                    if t > 0 else 0.0
            else:
                env = bounds.time_way_distance_bound(t, cfg.N, cfg.omega)
            rows.append({"N": cfg.N, "T": float(t), "M": m, "D_bar": dbar, "ratio": ratio,
                         "envelope": env, "within_envelope": bool(dbar <= env + bounds.BOUND_SLACK)})
    pos = [r for r in rows if r["T"] > 0 and r["D_bar"] > 0]
    alpha = beta = None
    if len({r["N"] for r in pos}) >= 2 or len({r["T"] for r in pos}) >= 2:
        a = np.array([[math.log(r["N"]) if len({q["N"] for q in pos}) > 1 else 0.0,
                       math.log(r["T"]) if len({q["T"] for q in pos}) > 1 else 0.0, 1.0] for r in pos])
        b = np.array([math.log(r["D_bar"]) for r in pos])
        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
        alpha = float(sol[0]) if len({q["N"] for q in pos}) > 1 else None
        beta = float(sol[1]) if len({q["T"] for q in pos}) > 1 else None
    beta_by_N = {n: fit_power_law([r["T"] for r in rows if r["N"] == n], [r["D_bar"] for r in rows if r["N"] == n])
                 for n in sorted({r["N"] for r in rows})}
    alpha_by_T = {t: fit_power_law([r["N"] for r in rows if r["T"] == t], [r["D_bar"] for r in rows if r["T"] == t])
                  for t in sorted({r["T"] for r in rows})}
    return ScalingScan(rows, alpha, beta, beta_by_N, alpha_by_T)
