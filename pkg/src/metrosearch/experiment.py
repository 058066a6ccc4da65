"""Batch experiments: config resolution, dispatch, deterministic reports.

A config file is a JSON object.  Nested objects are flattened into dotted
key paths, so ``{"scheme": {"N": 4}}`` and ``{"scheme.N": 4}`` are the same
setting.  Every experiment writes ``<command>_report.json`` and/or one CSV
per plot series (plus a ``.schema.json`` describing its columns).
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__, bounds
from .exceptions import ConfigError, MetroSearchError
from .geometry import qfi_sld
from .probeopt import conjecture_check, conjecture_scaling_scan, sum_sqrt_qfi_cap
from .protocol import SchemeConfig, VSequence, audit_run, run_all_labels
from .states import (basis_state, ghz_state, haar_random_state, plus_state, tensor,
                     uniform_superposition)

__all__ = [
    "COMMANDS",
    "FORMATS",
    "ExperimentConfig",
    "ExperimentResult",
    "PlotSeries",
    "load_config",
    "flatten",
    "resolve_config",
    "run_experiment",
    "emit_plot_data",
    "render_report",
]

COMMANDS = ("grover", "bounds", "qfi", "conjecture", "scan", "audit")
FORMATS = ("json", "csv", "both")

_REQUIRED = object()


def _int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _int_list(v):
    return isinstance(v, list) and len(v) > 0 and all(_int(x) for x in v)


def _num_list(v):
    return isinstance(v, list) and len(v) > 0 and all(_num(x) for x in v)


def _str(v):
    return isinstance(v, str)


_TYPE_NAMES = {_int: "an integer", _num: "a finite number", _int_list: "a nonempty list of integers",
               _num_list: "a nonempty list of numbers", _str: "a string"}

# key -> (type check, default); defaults may be callables of the partial settings
_SCHEMAS = {
    "grover": {
        "scheme.N": (_int, _REQUIRED),
        "scheme.M": (_int, _REQUIRED),
        "scheme.omega": (_num, _REQUIRED),
        "scheme.tau": (_num, lambda s: math.pi / s["scheme.omega"] if s["scheme.omega"] else 1.0),
        "scheme.gamma": (_num, 0.0),
        "scheme.v_sequence": (_str, "GroverDiffusion"),
        "grover.threshold": (_num, 0.5),
    },
    "bounds": {
        "scheme.N": (_int, _REQUIRED),
        "scheme.omega": (_num, _REQUIRED),
        "scheme.gamma": (_num, _REQUIRED),
        "scheme.M": (_int, 1),
        "scheme.tau": (_num, 1.0),
        "bounds.N_values": (_int_list, [2**k for k in range(13)]),
    },
    "qfi": {
        "scheme.N": (_int, _REQUIRED),
        "scheme.M": (_int, _REQUIRED),
        "scheme.tau": (_num, _REQUIRED),
        "scheme.omega": (_num, _REQUIRED),
        "scheme.gamma": (_num, 0.0),
        "scheme.ancilla_dim": (_int, 0),
        "scheme.v_sequence": (_str, "SwapParallel"),
        "qfi.probe": (_str, "uniform"),
        "qfi.label": (_int, 1),
    },
    "conjecture": {
        "scheme.N": (_int, _REQUIRED),
        "scheme.M": (_int, 1),
        "scheme.tau": (_num, 1.0),
        "scheme.omega": (_num, 1.0),
        "scheme.gamma": (_num, 0.0),
        "scheme.ancilla_dim": (_int, 0),
        "scheme.v_sequence": (_str, "Identity"),
        "conjecture.restarts": (_int, 50),
        "conjecture.max_iter": (_int, 5000),
        "conjecture.tol": (_num, 1e-8),
    },
    "scan": {
        "scan.N_values": (_int_list, _REQUIRED),
        "scan.T_values": (_num_list, _REQUIRED),
        "scheme.omega": (_num, _REQUIRED),
        "scheme.tau": (_num, 1.0),
        "scheme.gamma": (_num, 0.0),
        "scheme.v_sequence": (_str, "GroverDiffusion"),
    },
    "audit": {
        "audit.N_values": (_int_list, [2, 3, 4, 5, 6, 7, 8]),
        "audit.M_values": (_int_list, list(range(1, 21))),
        "audit.gamma_values": (_num_list, [0.0, 0.1, 0.5]),
        "scheme.omega": (_num, math.pi),
        "scheme.tau": (_num, 1.0),
        "scheme.v_sequence": (_str, "GroverDiffusion"),
    },
}

_PROBES = ("uniform", "plus", "ghz", "basis", "haar")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    settings: dict
    output_dir: str
    seed: int = 0
    format: str = "both"

    def echo(self):
        return {"command": self.command, "settings": dict(self.settings), "seed": self.seed,
                "format": self.format}


@dataclass
class PlotSeries:
    """One CSV table: ``columns`` header names and numeric ``rows``."""

    name: str
    columns: list
    rows: list
    descriptions: dict = field(default_factory=dict)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    results: dict
    reports: list
    series: list
    files: list = field(default_factory=list)

    @property
    def all_satisfied(self):
        return all(r.satisfied for r in self.reports if r.satisfied is not None)

    @property
    def exit_code(self):
        return 0 if self.all_satisfied else 2


def flatten(mapping, prefix=""):
    flat = {}
    for k, v in mapping.items():
        if not isinstance(k, str) or not k:
            raise ConfigError("keys must be nonempty strings", prefix or "<root>")
        key = f"{prefix}.{k}" if prefix else k
        if isinstance(v, dict):
            flat.update(flatten(v, key))
        else:
            if key in flat:
                raise ConfigError("given twice", key)
            flat[key] = v
    return flat


def load_config(path):
    """Read a JSON config file into a flat dotted-key mapping."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}", str(path)) from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object", str(path))
    return flatten(data)


def resolve_config(command, raw, output_dir=None, seed=None, fmt=None):
    """Validate ``raw`` settings for ``command`` and fill in defaults.

    CLI-level values (output_dir, seed, format) override the file's
    ``output_dir``, ``seed`` and ``format`` keys.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}", "command")
    raw = dict(raw)
    file_cmd = raw.pop("command", command)
    if file_cmd != command:
        raise ConfigError(f"config is for {file_cmd!r} but {command!r} was requested", "command")
    file_seed = raw.pop("seed", 0)
    file_out = raw.pop("output_dir", None)
    file_fmt = raw.pop("format", "both")
    seed = file_seed if seed is None else seed
    if not _int(seed) or seed < 0 or seed >= 2**64:
        raise ConfigError(f"must be an unsigned 64-bit integer, got {seed!r}", "seed")
    fmt = file_fmt if fmt is None else fmt
    if fmt not in FORMATS:
        raise ConfigError(f"must be one of {', '.join(FORMATS)}, got {fmt!r}", "format")
    output_dir = file_out if output_dir is None else output_dir
    if output_dir is None:
        raise ConfigError("no output directory; pass --out or set output_dir", "output_dir")

    schema = _SCHEMAS[command]
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key for command {command!r}", unknown[0])
    settings = {}
    for key, (check, default) in schema.items():
        if key in raw:
            value = raw[key]
            if not check(value):
                raise ConfigError(f"must be {_TYPE_NAMES[check]}, got {value!r}", key)
            settings[key] = float(value) if check is _num else value
        elif default is _REQUIRED:
            raise ConfigError("missing required field", key)
        else:
            settings[key] = default(settings) if callable(default) else default
    _validate(command, settings)
    return ExperimentConfig(command, settings, str(output_dir), int(seed), fmt)


def _scheme(settings, **overrides):
    kw = {k.split(".", 1)[1]: v for k, v in settings.items() if k.startswith("scheme.")}
    kw.update(overrides)
    return SchemeConfig(**kw)


def _validate(command, s):
    def positive(key):
        if not s[key] > 0:
            raise ConfigError(f"must be positive, got {s[key]!r}", key)

    if "scheme.v_sequence" in s:
        valid = [v.value for v in VSequence if v is not VSequence.CUSTOM]
        if s["scheme.v_sequence"] not in valid:
            raise ConfigError(f"must be one of {', '.join(valid)}", "scheme.v_sequence")
    if "scheme.gamma" in s and s["scheme.gamma"] < 0:
        raise ConfigError("must be nonnegative (protocol rule: dephasing rate >= 0)", "scheme.gamma")
    if command == "bounds":
        for key in ("scheme.omega", "scheme.gamma", "scheme.tau"):
            positive(key)
        if s["scheme.N"] < 2:
            raise ConfigError("must be >= 2 (bounds rule: discrimination needs two labels)", "scheme.N")
        if min(s["bounds.N_values"]) < 1:
            raise ConfigError("entries must be >= 1", "bounds.N_values")
        return
    if command == "scan":
        if min(s["scan.N_values"]) < 1:
            raise ConfigError("entries must be >= 1", "scan.N_values")
        if min(s["scan.T_values"]) < 0:
            raise ConfigError("entries must be >= 0", "scan.T_values")
        positive("scheme.tau")
        try:
            _scheme(s, N=max(s["scan.N_values"]), M=0)
        except ConfigError as exc:
            raise ConfigError(str(exc).split(": ", 1)[-1], f"scheme.{exc.field}") from exc
        return
    if command == "audit":
        if min(s["audit.N_values"]) < 2:
            raise ConfigError("entries must be >= 2", "audit.N_values")
        if min(s["audit.M_values"]) < 0:
            raise ConfigError("entries must be >= 0", "audit.M_values")
        if min(s["audit.gamma_values"]) < 0:
            raise ConfigError("entries must be >= 0", "audit.gamma_values")
        positive("scheme.tau")
        return
    if command == "qfi" and s["qfi.probe"] not in _PROBES:
        raise ConfigError(f"must be one of {', '.join(_PROBES)}", "qfi.probe")
    if command == "conjecture":
        for key in ("conjecture.restarts", "conjecture.max_iter", "conjecture.tol"):
            positive(key)
    try:
        _scheme(s)
    except ConfigError as exc:
        msg = str(exc).split(": ", 1)[-1] if exc.field else str(exc)
        raise ConfigError(msg, f"scheme.{exc.field}" if exc.field else "scheme") from exc
    except MetroSearchError as exc:
        raise ConfigError(str(exc), "scheme") from exc


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


def render_report(result):
    """Serialized JSON report; identical inputs give identical bytes."""
    body = {
        "tool": "metrosearch",
        "version": __version__,
        "command": result.config.command,
        "seed": result.config.seed,
        "config": result.config.echo(),
        "results": result.results,
        "bound_reports": [r.to_dict() for r in result.reports],
        "all_bounds_satisfied": result.all_satisfied,
    }
    return json.dumps(_clean(body), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return repr(float(v))


def emit_plot_data(series, out_dir):
    """Write each series to ``<name>.csv`` with a ``<name>.schema.json`` beside it.

    All series are validated before anything is written.
    """
    series = list(series)
    if not series:
        raise ValueError("no plot series to write")
    for s in series:
        if not s.rows:
            raise ValueError(f"series {s.name!r} is empty")
        if any(len(r) != len(s.columns) for r in s.rows):
            raise ValueError(f"series {s.name!r} has rows that do not match its columns")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for s in series:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(s.columns)
        for r in s.rows:
            w.writerow([_cell(v) for v in r])
        path = os.path.join(out_dir, f"{s.name}.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
        schema = {"file": f"{s.name}.csv", "columns": [
            {"name": c, "description": s.descriptions.get(c, "")} for c in s.columns]}
        spath = os.path.join(out_dir, f"{s.name}.schema.json")
        with open(spath, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(schema, indent=2, sort_keys=True) + "\n")
        paths += [path, spath]
    return paths


# -- commands -----------------------------------------------------------------

def _distance_series(name, dist, cfg):
    rows = [(t, d, bounds.time_way_distance_bound(t, cfg.N, cfg.omega)) for t, d in dist]
    return PlotSeries(name, ["t", "D_bar", "time_way_bound"], rows, {
        "t": "elapsed interrogation time k * tau",
        "D_bar": "summed Bures angle between oracle and reference states",
        "time_way_bound": "t * sqrt(N) * omega",
    })


def _run_grover(cfg):
    s = cfg.settings
    scheme = _scheme(s, v_sequence=s["scheme.v_sequence"])
    audit = audit_run(scheme)
    probs = audit.success_probabilities
    threshold = s["grover.threshold"]
    results = {
        "scheme": scheme.to_dict(),
        "success_probabilities": probs,
        "success_probability": probs[0],
        "success": bool(min(probs) >= threshold),
        "threshold": threshold,
        "perfectly_distinguishable": audit.perfectly_distinguishable,
        "average_distance": [[t, d] for t, d in audit.distances],
    }
    return results, audit.reports, [_distance_series("grover_distance", audit.distances, scheme)]


def _run_bounds(cfg):
    s = cfg.settings
    N, omega, gamma = s["scheme.N"], s["scheme.omega"], s["scheme.gamma"]
    tau, M = s["scheme.tau"], s["scheme.M"]
    T = M * tau
    params = {"N": N, "omega": omega, "gamma": gamma, "tau": tau, "M": M, "T": T}
    values = {
        "noiseless_query_bound": bounds.noiseless_query_bound(N, omega),
        "dephasing_query_bound": bounds.dephasing_query_bound(N, omega, gamma),
        "temme_bound": bounds.temme_bound(N, omega, gamma),
        "distance_lower_bound": bounds.distance_lower_bound(N),
        "dephasing_qfi_bound": bounds.dephasing_qfi_bound(M, tau, gamma),
        "fundamental_dephasing_bound": bounds.fundamental_dephasing_bound(T, gamma) if T > 0 else 0.0,
        "time_way_distance_bound": bounds.time_way_distance_bound(T, N, omega),
        "frequency_way_distance_bound": bounds.frequency_way_distance_bound(T, omega, gamma),
        "frequency_way_distance_bound_summed": bounds.frequency_way_distance_bound(
            T, omega, gamma, per_label=False, N=N),
    }
    reports = [bounds.BoundReport(name, params, v) for name, v in sorted(values.items())]
    reports.append(bounds.BoundReport.check(
        "dephasing_vs_temme", params, values["temme_bound"], values["dephasing_query_bound"], "lower"))
    if T > 0:
        reports.append(bounds.BoundReport.check(
            "dephasing_qfi_vs_fundamental", params, values["fundamental_dephasing_bound"],
            values["dephasing_qfi_bound"], "upper"))
    table = bounds.crossover_scan(s["bounds.N_values"], omega, gamma)
    results = {"bounds": values, "crossover_N": table.crossover_N, "monotone": table.monotone,
               "crossover_rows": [list(r) for r in table.rows]}
    series = [PlotSeries("bounds_crossover", list(table.columns), table.rows, {
        "N": "database size",
        "noiseless": "(pi / 4 omega) sqrt(N)",
        "dephasing": "N (pi^2 / 8) gamma / omega^2",
        "temme": "N 2 gamma / (gamma^2 + 4 omega^2)",
    })]
    return results, reports, series


def _probe(cfg, scheme):
    s = cfg.settings
    kind = s["qfi.probe"]
    dim = scheme.dim
    if kind == "haar":
        return haar_random_state(dim, np.random.default_rng(cfg.seed))
    if kind == "basis":
        if not 1 <= s["qfi.label"] <= dim:
            raise ConfigError(f"must lie in 1..{dim}", "qfi.label")
        return basis_state(dim, s["qfi.label"])
    if kind == "uniform":
        return uniform_superposition(dim)
    if scheme.N != 2 or scheme.ancilla_dim or scheme.v_sequence is not VSequence.SWAP_PARALLEL:
        raise ConfigError(f"probe {kind!r} needs N = 2, SwapParallel and no ancilla", "qfi.probe")
    return plus_state(scheme.slots) if kind == "plus" else ghz_state(scheme.slots)


def _run_qfi(cfg):
    s = cfg.settings
    scheme = _scheme(s)
    probe = _probe(cfg, scheme)
    qfis = [qfi_sld(tr.final_state, tr.final_derivative).value for tr in run_all_labels(scheme, probe)]
    params = scheme.to_dict()
    T = scheme.T
    total = float(sum(math.sqrt(f) for f in qfis))
    reports = [bounds.BoundReport.check("sum_sqrt_qfi_cap", params, sum_sqrt_qfi_cap(scheme), total, "upper")]
    reports += [bounds.BoundReport.check("heisenberg_qfi_bound", params, bounds.heisenberg_qfi_bound(T), f,
                                         "upper", label=x) for x, f in enumerate(qfis, start=1)]
    if scheme.N == 2 and scheme.gamma > 0 and scheme.M > 0 and not scheme.ancilla_dim \
            and scheme.v_sequence is VSequence.SWAP_PARALLEL:
        # two-level atoms in parallel: the excited level is label 2
        reports.append(bounds.BoundReport.check(
            "dephasing_qfi_bound", params, bounds.dephasing_qfi_bound(scheme.M, scheme.tau, scheme.gamma),
            qfis[1], "upper", label=2))
        reports.append(bounds.BoundReport.check(
            "fundamental_dephasing_bound", params, bounds.fundamental_dephasing_bound(T, scheme.gamma),
            qfis[1], "upper", label=2))
    results = {"scheme": params, "probe": s["qfi.probe"], "qfi_per_label": qfis, "sum_sqrt_qfi": total}
    if qfis[0] > 0 or any(qfis):
        results["cramer_rao_per_label"] = [bounds.cramer_rao(f) if f > 0 else math.inf for f in qfis]
    series = [PlotSeries("qfi_per_label", ["x", "qfi"], [(x, f) for x, f in enumerate(qfis, start=1)],
                         {"x": "oracle label", "qfi": "QFI with respect to omega of the final state"})]
    return results, reports, series


def _run_conjecture(cfg):
    s = cfg.settings
    scheme = _scheme(s)
    chk = conjecture_check(scheme, restarts=s["conjecture.restarts"], seed=cfg.seed,
                           max_iter=s["conjecture.max_iter"], tol=s["conjecture.tol"])
    params = scheme.to_dict()
    reports = [
        bounds.BoundReport.check("conjecture_ratio", params, 1.0, chk.ratio, "upper", slack=1e-6),
        bounds.BoundReport.check("sum_sqrt_qfi_cap", params, sum_sqrt_qfi_cap(scheme), chk.lhs, "upper",
                                 slack=1e-8),
    ]
    results = {"scheme": params, **chk.to_dict(),
               "best_probe": [[float(a.real), float(a.imag)] for a in chk.summed.best_probe.amplitudes]}
    rows = [(r, a, b) for r, (a, b) in enumerate(zip(chk.summed.restart_values, chk.single.restart_values))]
    series = [PlotSeries("conjecture_restarts", ["restart", "sum_sqrt_qfi", "single_sqrt_qfi"], rows, {
        "restart": "restart index (start drawn from seed and index)",
        "sum_sqrt_qfi": "optimized sum over labels of sqrt(F_x)",
        "single_sqrt_qfi": "optimized sqrt(F_1)",
    })]
    return results, reports, series


def _run_scan(cfg):
    s = cfg.settings
    template = _scheme(s, N=max(s["scan.N_values"]), M=0)
    scan = conjecture_scaling_scan(s["scan.N_values"], s["scan.T_values"], template)
    params = template.to_dict()
    reports = []
    for r in scan.rows:
        if r["T"] > 0:
            name = "frequency_way_distance_bound_summed" if template.gamma > 0 else "time_way_distance_bound"
            reports.append(bounds.BoundReport.check(name, {**params, "N": r["N"], "T": r["T"]},
                                                    r["envelope"], r["D_bar"], "upper"))
    results = {"template": params, "rows": scan.rows, "alpha": scan.alpha, "beta": scan.beta,
               "beta_by_N": scan.beta_by_N, "alpha_by_T": scan.alpha_by_T}
    series = [PlotSeries("scan_conjecture", ["N", "T", "D_bar", "ratio", "envelope"],
                         [(r["N"], r["T"], r["D_bar"], r["ratio"], r["envelope"]) for r in scan.rows], {
                             "N": "database size",
                             "T": "total interrogation time",
                             "D_bar": "summed Bures angle at time T",
                             "ratio": "D_bar / (sqrt(T) sqrt(N))",
                             "envelope": "frequency-way cap (gamma > 0) or time-way cap (gamma = 0)",
                         })]
    if template.gamma > 0 and template.omega > 0:
        table = bounds.crossover_scan(s["scan.N_values"], template.omega, template.gamma)
        results["crossover_N"] = table.crossover_N
        series.append(PlotSeries("scan_crossover", list(table.columns), table.rows))
    return results, reports, series


def _run_audit(cfg):
    s = cfg.settings
    reports, runs, dist_rows = [], [], []
    for gamma in s["audit.gamma_values"]:
        for N in s["audit.N_values"]:
            for M in s["audit.M_values"]:
                scheme = SchemeConfig(N=N, M=M, tau=s["scheme.tau"], omega=s["scheme.omega"], gamma=gamma,
                                      v_sequence=s["scheme.v_sequence"])
                a = audit_run(scheme)
                reports += a.reports
                runs.append({"N": N, "M": M, "gamma": gamma, "all_satisfied": a.all_satisfied,
                             "perfectly_distinguishable": a.perfectly_distinguishable,
                             "min_step_margin": min((m for ms in a.step_margins.values() for m in ms),
                                                    default=0.0)})
                t, d = a.distances[-1]
                dist_rows.append((N, M, gamma, t, d, bounds.time_way_distance_bound(t, N, scheme.omega)))
    results = {"runs": runs, "failed": sum(not r["all_satisfied"] for r in runs)}
    series = [PlotSeries("audit_final_distance", ["N", "M", "gamma", "T", "D_bar", "time_way_bound"],
                         dist_rows, {"D_bar": "summed Bures angle at the final time"})]
    return results, reports, series


_RUNNERS = {"grover": _run_grover, "bounds": _run_bounds, "qfi": _run_qfi,
            "conjecture": _run_conjecture, "scan": _run_scan, "audit": _run_audit}


def run_experiment(cfg):
    """Run the experiment and write its outputs; returns an ExperimentResult."""
    results, reports, series = _RUNNERS[cfg.command](cfg)
    res = ExperimentResult(cfg, results, reports, series)
    os.makedirs(cfg.output_dir, exist_ok=True)
    if cfg.format in ("json", "both"):
        path = os.path.join(cfg.output_dir, f"{cfg.command}_report.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render_report(res))
        res.files.append(path)
    if cfg.format in ("csv", "both"):
        res.files += emit_plot_data(series, cfg.output_dir)
    return res
