"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""

import json
import math
import time

import numpy as np
import pytest

from metrosearch import bounds
from metrosearch.channels import dephasing_mask
from metrosearch.experiment import resolve_config, run_experiment
from metrosearch.geometry import qfi_bures_consistency, qfi_pure, qfi_sld, qfi_unitary_generator
from metrosearch.probeopt import conjecture_check, conjecture_scaling_scan
from metrosearch.protocol import SchemeConfig, VSequence, audit_run, discrete_grover, run_scheme
from metrosearch.states import (HamiltonianSpec, ghz_state, haar_random_state, plus_state,
                                random_density_matrix, random_unitary)

LINES = []


def record(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} ({detail})"
    LINES.append(line)
    print(line)
    return ok


# 1 -----------------------------------------------------------------------------

def test_pure_state_qfi_identities():
    t0 = time.perf_counter()
    worst = 0.0
    for M in range(1, 6):
        n_hat = HamiltonianSpec.excitation_number(M)
        for tau in (0.5, 1.0, 2.0):
            for psi, want in ((plus_state(M), tau**2 * M), (ghz_state(M), tau**2 * M**2)):
                got = qfi_pure(psi, n_hat, scale=tau).value
                worst = max(worst, abs(got - want) / want)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 1.0
    assert record(1, "pure-state QFI of product and GHZ probes", ok, f"max rel err {worst:.2e}, {dt:.2f}s")


# 2 -----------------------------------------------------------------------------

def _direct_dephased_qfi(psi, M, tau, gamma):
    """QFI of M independently dephased qubits under exp(-i omega tau n_hat), built by hand."""
    n = HamiltonianSpec.excitation_number(M).diagonal()
    rho = np.outer(psi, psi.conj())
    drho = -1j * tau * (n[:, None] - n[None, :]) * rho
    mask = dephasing_mask((2,) * M, list(range(M)), math.exp(-gamma * tau))
    return qfi_sld(rho * mask, drho * mask).value


def test_dephasing_qfi_cap():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    tau = 1.0
    worst = -math.inf
    for M in (1, 2, 3):
        for gt in (0.1, 0.5, 1.0):
            cap = bounds.dephasing_qfi_bound(M, tau, gt / tau)
            cfg = SchemeConfig(N=2, M=M, tau=tau, omega=0.7, gamma=gt / tau,
                               v_sequence=VSequence.SWAP_PARALLEL)
            for _ in range(200):
                psi = haar_random_state(2**M, rng)
                tr = run_scheme(cfg, psi, 2)
                f_sim = qfi_sld(tr.final_state, tr.final_derivative).value
                f_dir = _direct_dephased_qfi(psi.amplitudes, M, tau, gt / tau)
                worst = max(worst, f_sim - cap, f_dir - cap)
    dt = time.perf_counter() - t0
    ok = worst <= 1e-9 and dt < 30
    assert record(2, "dephased QFI below the independent-dephasing cap", ok,
                  f"max excess {worst:.3e}, {dt:.1f}s")


# 3 -----------------------------------------------------------------------------

def test_qfi_bures_consistency():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(50):
        dim = int(rng.integers(2, 9))
        rho0 = random_density_matrix(dim, rng).data
        sigma = random_density_matrix(dim, rng).data
        h = random_unitary(dim, rng)
        gen = 0.5 * (h + h.conj().T)
        w, v = np.linalg.eigh(gen)
        mix = 0.3 * rng.random() if k % 2 else 0.0

        def family(theta):
            u = (v * np.exp(-1j * theta * w)) @ v.conj().T
            r = (1 - mix * theta) * rho0 + mix * theta * sigma
            return u @ r @ u.conj().T

        worst = max(worst, qfi_bures_consistency(family, 0.2, eps=1e-4))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-3 and dt < 10
    assert record(3, "Bures slope matches sqrt QFI", ok, f"max rel err {worst:.2e}, {dt:.2f}s")


# 4 -----------------------------------------------------------------------------

def test_generator_sum_properties():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    omega = 1.3
    worst_sum, worst_root = -math.inf, -math.inf
    for N in range(2, 9):
        for i in range(200):
            rho = haar_random_state(N, rng).density() if i % 2 else random_density_matrix(N, rng)
            fs = [qfi_unitary_generator(rho, HamiltonianSpec.projector(N, x), scale=omega).value
                  for x in range(1, N + 1)]
            worst_sum = max(worst_sum, sum(fs) - 4 * omega**2)
            worst_root = max(worst_root, sum(math.sqrt(f) for f in fs) - 2 * omega * math.sqrt(N))
    dt = time.perf_counter() - t0
    ok = worst_sum <= 1e-9 and worst_root <= 1e-9 and dt < 10
    assert record(4, "summed label QFIs within 4 w^2 and 2 w sqrt(N)", ok,
                  f"excess {worst_sum:.2e} / {worst_root:.2e}, {dt:.2f}s")


# 5 -----------------------------------------------------------------------------

def test_noiseless_grover():
    t0 = time.perf_counter()
    p4 = discrete_grover(4, 1)
    ok = abs(p4 - 1.0) <= 1e-10
    parts = [f"N=4 q=1 p={p4:.12f}"]
    for N in (4, 16, 64):
        limit = math.ceil(math.pi / 4 * math.sqrt(N))
        q = next((q for q in range(1, limit + 1) if discrete_grover(N, q) >= 0.9), None)
        # total time q * tau with tau = 1 may not undercut the noiseless bound at omega = pi
        ok &= q is not None and q >= bounds.noiseless_query_bound(N, math.pi) - 1e-12
        parts.append(f"N={N} q={q}/{limit}")
    dt = time.perf_counter() - t0
    ok &= dt < 5
    assert record(5, "Grover success within the query budget", ok, ", ".join(parts) + f", {dt:.2f}s")


# 6 and 7 -------------------------------------------------------------------------

@pytest.fixture(scope="module")
def audit_grid():
    t0 = time.perf_counter()
    audits = []
    for gamma in (0.0, 0.1, 0.5):
        for N in range(2, 9):
            for M in range(1, 21):
                audits.append(audit_run(SchemeConfig(N=N, M=M, tau=1.0, omega=math.pi, gamma=gamma)))
    perfect = [
        audit_run(SchemeConfig(N=4, M=1, tau=1.0, omega=math.pi)),
        audit_run(SchemeConfig(N=2, M=1, tau=1.0, omega=math.pi / 2, v_sequence=VSequence.IDENTITY)),
    ]
    return audits, perfect, time.perf_counter() - t0


def test_distance_bounds_along_trajectories(audit_grid):
    audits, perfect, dt = audit_grid
    names = {"time_way_distance_bound", "frequency_way_distance_bound",
             "frequency_way_distance_bound_summed", "distance_lower_bound", "noiseless_query_bound"}
    reps = [r for a in audits + perfect for r in a.reports if r.bound_name in names]
    worst = min(r.margin for r in reps)
    lower = [r for a in perfect for r in a.reports if r.bound_name == "distance_lower_bound"]
    dephased = sum(1 for r in reps if r.bound_name.startswith("frequency_way"))
    ok = worst >= -1e-9 and len(lower) == 2 and all(r.satisfied for r in lower) and dephased > 0 and dt < 60
    assert record(6, "distance bounds along every audited run", ok,
                  f"{len(audits)} runs, {len(reps)} checks, min margin {worst:.2e}, {dt:.1f}s")


def test_step_inequality_chain(audit_grid):
    audits, perfect, _ = audit_grid
    margins = [m for a in audits + perfect for ms in a.step_margins.values() for m in ms]
    worst = min(margins)
    assert record(7, "per-query distance increments", worst >= -1e-9,
                  f"{len(margins)} steps, min margin {worst:.2e}")


# 8 -----------------------------------------------------------------------------

def test_bound_comparison():
    t0 = time.perf_counter()
    grid = np.logspace(-3, 3, 25)
    worst = math.inf
    for N in (1, 8, 1000):
        for g in grid:
            for w in grid:
                d = bounds.dephasing_query_bound(N, w, g)
                worst = min(worst, (d - bounds.temme_bound(N, w, g)) / d)
    dq = bounds.dephasing_query_bound(8, math.pi, 1.0)
    tb = bounds.temme_bound(8, math.pi, 1.0)
    dt = time.perf_counter() - t0
    ok = worst >= -1e-12 and abs(dq - 1.0) < 1e-12 and abs(tb - 0.3952723685) < 1e-9 and dt < 1
    assert record(8, "dephasing query bound dominates the sequential one", ok,
                  f"min rel gap {worst:.3f}, N=8 ref {dq:.6f} vs {tb:.10f}, {dt:.2f}s")


# 9 -----------------------------------------------------------------------------

def test_conjecture_optimizer():
    t0 = time.perf_counter()
    ok = True
    parts = []
    for N in (2, 3, 4):
        for gamma in (0.0, 0.3):
            cfg = SchemeConfig(N=N, M=1, tau=1.0, omega=1.0, gamma=gamma, v_sequence=VSequence.IDENTITY)
            chk = conjecture_check(cfg, restarts=50, seed=0)
            ok &= chk.single_ratio <= 2 * math.sqrt(N) * (1 + 1e-6) and chk.ratio <= 1 + 1e-6
            parts.append(f"N={N} g={gamma} r={chk.ratio:.4f}")
            if N == 2 and gamma == 0.0:
                anchor = chk.lhs
                ok &= abs(anchor - 2.0) <= 1e-6
    dt = time.perf_counter() - t0
    ok &= dt < 300
    assert record(9, "optimized summed sqrt QFI within 2 sqrt(N) of single label", ok,
                  f"anchor lhs {anchor:.9f}; " + ", ".join(parts) + f"; {dt:.1f}s")


# 10 ----------------------------------------------------------------------------

def test_conjecture_scaling():
    t0 = time.perf_counter()
    betas = []
    for omega, tau in ((math.pi, 1.0), (0.2, 0.5)):
        scan = conjecture_scaling_scan([16, 64], [1.0, 2.0, 3.0], SchemeConfig(N=2, M=0, tau=tau, omega=omega))
        betas.append(scan.beta)
    dephased = conjecture_scaling_scan([2, 4, 8, 16], [0.5, 1.0, 2.0, 4.0, 8.0],
                                       SchemeConfig(N=2, M=0, tau=0.5, omega=1.0, gamma=0.5))
    dt = time.perf_counter() - t0
    ok = all(abs(b - 1) <= 0.1 for b in betas) and dephased.within_envelope and dt < 300
    assert record(10, "distance growth: linear noiseless, capped dephased", ok,
                  f"beta {', '.join(f'{b:.4f}' for b in betas)}, "
                  f"{len(dephased.rows)} dephased rows in envelope={dephased.within_envelope}, {dt:.1f}s")


# 11 ----------------------------------------------------------------------------

def test_byte_identical_reports(tmp_path):
    raws = {
        "grover": {"scheme.N": 4, "scheme.M": 1, "scheme.omega": math.pi},
        "bounds": {"scheme.N": 8, "scheme.omega": math.pi, "scheme.gamma": 1.0},
        "qfi": {"scheme.N": 2, "scheme.M": 2, "scheme.tau": 1.0, "scheme.omega": 1.0, "scheme.gamma": 0.2,
                "qfi.probe": "haar"},
        "conjecture": {"scheme.N": 3, "scheme.gamma": 0.3, "conjecture.restarts": 5},
        "scan": {"scan.N_values": [4, 8], "scan.T_values": [1, 2], "scheme.omega": 1.0, "scheme.gamma": 0.5},
        "audit": {"audit.N_values": [2, 3], "audit.M_values": [1, 4], "audit.gamma_values": [0.0, 0.5]},
    }
    same = []
    for cmd, raw in raws.items():
        blobs = []
        for run in ("a", "b"):
            cfg = resolve_config(cmd, raw, tmp_path / run / cmd, seed=42, fmt="both")
            res = run_experiment(cfg)
            blobs.append((tmp_path / run / cmd / f"{cmd}_report.json").read_bytes()
                         + b"".join(open(p, "rb").read() for p in sorted(res.files) if p.endswith(".csv")))
        json.loads(blobs[0].split(b"\n}\n")[0] + b"\n}")
        same.append(blobs[0] == blobs[1])
    assert record(11, "byte-identical reports for equal config and seed", all(same),
                  f"{sum(same)}/{len(same)} commands identical")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
