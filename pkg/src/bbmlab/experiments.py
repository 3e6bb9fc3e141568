"""Experiment configs, run manifests and report files.

A config is one JSON document::

    {"experiment": "simulate", "seed": 0,
     "grid": {"num_points": 8192, "domain_length": 256.0},
     "data": {"kind": "gaussian", "eta_amplitude": 0.1, "v_amplitude": 0.1, "width": 1.0},
     "solver": {"dt": 0.5, "t_end": 10.0}}

Sections not used by an experiment are ignored; missing keys take the
defaults in ``DEFAULTS``.  A manifest written by a previous run is accepted in
place of a config and reproduces that run.

Every run writes ``manifest.json`` and ``report.json``.  Time series go to
``trajectory.csv`` and sweeps to ``table.csv``.  The wall-clock duration is
written to ``timing.json`` so that the other files are byte-identical across
reruns.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .decay import (band_limited_decay_data, decay_experiment, gaussian_decay_data, wraparound_limit)
from .diagnostics import (DEFAULT_IDENTITY_CADENCE, IDENTITY_NAMES, energy_identity_residuals,
                          hamiltonian_bound_holds, invariant_drift)
from .errors import BBMLabError, ConfigInvalid
from .illposedness import MIN_BAND_MODES, ProbeConfig, band_modes, norm_explosion_sweep
from .nonlinear import QuadratureRule, bilinear_constant_scan
from .picard import SolverConfig, existence_time_estimate, integrate
from .spectral_core import GridSpec, WaveState, gaussian_state, pair_norm, random_state

EXPERIMENTS = ("simulate", "illposedness", "decay", "invariants", "bilinear-scan", "existence-time")
CSV_FORMAT_VERSION = 1
OUT_ENV = "BBMLAB_OUT"
# Scanned s = 0, eps = 1 bilinear constant on the default scan grid; used by
# validate_config when the config gives no C_hat of its own.
REFERENCE_C_HAT = 0.03

DEFAULTS = {
    "seed": 0,
    "grid": {"num_points": 8192, "domain_length": 256.0},
    "data": {"kind": "gaussian", "eta_amplitude": 0.1, "v_amplitude": 0.1, "width": 1.0,
             "amplitude": 0.1, "envelope_power": 2.0},
    "solver": {},
    "probe": {"N_values": [64, 128, 256, 512], "s": -0.5, "s_prime": 0.0, "t_eval": 1.0,
              "num_points": 65536, "domain_length": 32.0 * math.pi, "quad_order": 8,
              "t_samples": 16, "xi_samples": 1024},
    "decay": {"data": "gaussian", "num_points": 1048576, "domain_length": 4096.0,
              "times": [0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0],
              "fit_window": [1.0, 10.0], "C": None, "center": 3.0, "half_width": 1.0, "amplitude": 1.0},
    "scan": {"s": 0.0, "epsilon": 1.0, "sample_count": 50, "family": "random",
             "num_points": 4096, "domain_length": 256.0},
    "existence": {"s": 0.0, "epsilons": [1.0, 1e-2, 1e-4], "C_hat": None, "sample_count": 50},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def load_config(path) -> dict:
    """Read a config or a manifest (whose ``config`` member is used)."""
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigInvalid("<root>", "config must be a JSON object")
    if "manifest_version" in doc:
        doc = doc["config"]
    return doc


def resolve_config(doc: dict, experiment: str | None = None, seed: int | None = None) -> dict:
    """Fill defaults and apply command-line overrides."""
    cfg = _merge(DEFAULTS, doc)
    if experiment is not None:
        if doc.get("experiment") not in (None, experiment):
            raise ConfigInvalid("experiment", f"config is for {doc['experiment']!r}, not {experiment!r}")
        cfg["experiment"] = experiment
    if seed is not None:
        cfg["seed"] = int(seed)
    if cfg.get("experiment") not in EXPERIMENTS:
        raise ConfigInvalid("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    if cfg["experiment"] == "invariants" and isinstance(cfg["solver"], dict):
        cfg["solver"].setdefault("dt", DEFAULT_IDENTITY_CADENCE)
    return cfg


# -- validation ---------------------------------------------------------------

def _diag(level, field_, message):
    return {"level": level, "field": field_, "message": message}


def _grid(section: dict, prefix: str, diags: list):
    try:
        return GridSpec(section["num_points"], section["domain_length"])
    except (ValueError, TypeError, KeyError) as exc:
        diags.append(_diag("error", f"{prefix}.num_points", str(exc)))
        return None


def _solver_config(cfg):
    return SolverConfig(**cfg["solver"])


def build_initial_state(cfg: dict, grid: GridSpec) -> WaveState:
    d = cfg["data"]
    kind = d.get("kind", "gaussian")
    if kind == "zero":
        return WaveState.zeros(grid)
    if kind == "gaussian":
        return gaussian_state(grid, d["eta_amplitude"], d["v_amplitude"], d["width"])
    if kind == "random":
        rng = np.random.default_rng(cfg["seed"])
        return random_state(grid, rng, d["amplitude"], d["envelope_power"])
    raise ConfigInvalid("data.kind", f"unknown data kind {kind!r} (zero, gaussian, random)")


def _validate(cfg: dict) -> list:
    diags = []
    kind = cfg["experiment"]
    if kind in ("simulate", "invariants", "existence-time"):
        grid = _grid(cfg["grid"], "grid", diags)
        try:
            scfg = _solver_config(cfg)
        except (TypeError, ValueError) as exc:
            diags.append(_diag("error", "solver", str(exc)))
            scfg = None
        if cfg["data"].get("kind", "gaussian") not in ("zero", "gaussian", "random"):
            diags.append(_diag("error", "data.kind", f"unknown data kind {cfg['data'].get('kind')!r}"))
        elif grid is not None and scfg is not None and kind != "existence-time":
            u0 = build_initial_state(cfg, grid)
            c_hat = cfg["solver"].get("C_hat", REFERENCE_C_HAT)
            s = scfg.s_track[0] if scfg.s_track else 0.0
            window = existence_time_estimate(u0, s, scfg.epsilon, c_hat)
            if scfg.dt > window:
                diags.append(_diag("warning", "solver.dt",
                                   f"dt = {scfg.dt:g} exceeds the existence-time window estimate "
                                   f"1/(4 sqrt(eps) C ||u0||_s) = {window:.6g} (C = {c_hat:g})"))
    if kind == "existence-time":
        eps = cfg["existence"]["epsilons"]
        if len(eps) < 2 or min(eps) <= 0:
            diags.append(_diag("error", "existence.epsilons", "need at least two positive values"))
    if kind == "illposedness":
        p = cfg["probe"]
        grid = _grid(p, "probe", diags)
        Ns = p["N_values"]
        if len(Ns) < 3:
            diags.append(_diag("error", "probe.N_values", "the sweep needs at least three values of N"))
        for N in Ns:
            if N < 16:
                diags.append(_diag("error", "probe.N_values",
                                   f"N = {N:g} violates the multiplier lower-bound hypothesis N >= 16"))
            elif grid is not None:
                k = band_modes(grid, N)
                if k.size < MIN_BAND_MODES:
                    diags.append(_diag("error", "probe.domain_length",
                                       f"band around N = {N:g} holds {k.size} modes; need {MIN_BAND_MODES}"))
                if 2 * N + 1 > grid.max_resolved_frequency:
                    diags.append(_diag("error", "probe.num_points",
                                       f"2N + 1 = {2 * N + 1:g} exceeds the dealiased range "
                                       f"{grid.max_resolved_frequency:.6g}"))
        if p["s"] > 0:
            diags.append(_diag("error", "probe.s", "s must be <= 0"))
        if not 0 < p["t_eval"] <= 1:
            diags.append(_diag("error", "probe.t_eval", "t_eval must lie in (0, 1]"))
    if kind == "decay":
        d = cfg["decay"]
        grid = _grid(d, "decay", diags)
        if d["data"] not in ("gaussian", "band"):
            diags.append(_diag("error", "decay.data", "must be 'gaussian' or 'band'"))
        if grid is not None and d["times"]:
            limit = grid.domain_length / 2.0
            if max(d["times"]) > limit:
                diags.append(_diag("error", "decay.times",
                                   f"t = {max(d['times']):g} is past the wraparound window L/2 = {limit:g}"))
    if kind == "bilinear-scan":
        sc = cfg["scan"]
        _grid(sc, "scan", diags)
        if sc["sample_count"] < 1:
            diags.append(_diag("error", "scan.sample_count", "must be >= 1"))
        if sc["family"] not in ("random", "localized"):
            diags.append(_diag("error", "scan.family", "must be 'random' or 'localized'"))
    return diags


def validate_config(config_path, experiment: str | None = None) -> list:
    """Static checks of a config file; returns a list of diagnostics (never raises)."""
    try:
        cfg = resolve_config(load_config(config_path), experiment)
    except ConfigInvalid as exc:
        return [_diag("error", exc.field, exc.message)]
    except (OSError, ValueError) as exc:
        return [_diag("error", "<file>", str(exc))]
    return _validate(cfg)


# -- serialization --------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)  # "inf" / "nan" as strings keep the document strict JSON
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, header: list, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    Path(path).write_text(buf.getvalue())


def read_csv(path):
    with open(path) as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    return header, rows


@dataclass
class RunManifest:
    experiment: str
    config: dict
    seed: int
    grid: dict
    code_version: str = __version__
    status: str = "ok"
    abort_reason: str | None = None
    error: dict | None = None
    outputs: list = field(default_factory=list)
    csv_format_version: int = CSV_FORMAT_VERSION
    manifest_version: int = 1
    wall_clock_s: float | None = None

    def to_json(self) -> str:
        d = asdict(self)
        d.pop("wall_clock_s")
        return dumps(d)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


# -- experiments ----------------------------------------------------------------

TRAJECTORY_FIXED = ["t[time]", "hamiltonian[energy]", "mass_eta[length]", "mass_v[length]",
                    "cross_invariant[energy]", "norm_X1[H1]", "min_vx[1/time]", "min_eta[height]",
                    "max_abs_v[velocity]"]


def _trajectory_table(traj, s_values):
    header = TRAJECTORY_FIXED + [f"norm_s{s:g}[Hs]" for s in s_values]
    rows = []
    for r in traj.records:
        rows.append([r.t, r.hamiltonian, r.mass_eta, r.mass_v, r.cross_invariant, r.norm_X1, r.min_vx,
                     r.min_eta, r.max_abs_v] + [r.norms[float(s)] for s in s_values])
    return header, rows


def _run_simulate(cfg, jobs, identities=False):
    grid = GridSpec(**cfg["grid"])
    scfg = _solver_config(cfg)
    u0 = build_initial_state(cfg, grid)
    traj = integrate(u0, scfg, on_noncontraction="record")
    report = {"abort_reason": traj.abort_reason, "abort_time": traj.abort_time,
              "final_time": traj.times[-1], "saved_states": len(traj.times),
              "fp_iterations_mean": float(np.mean(traj.fp_iterations)) if traj.fp_iterations else 0.0,
              "invariant_drift": invariant_drift(traj.records), "solver": scfg.to_dict()}
    if identities:
        if len(traj.states) >= 3:
            report["identity_residuals"] = energy_identity_residuals(traj)
        else:
            report["identity_residuals"] = {name: None for name in IDENTITY_NAMES}
        M = max(0.0, -min(r.min_eta for r in traj.records))
        report["hamiltonian_bound"] = {
            "M": M, "holds_at_all_saved_times": all(hamiltonian_bound_holds(u0, u, M) for u in traj.states)}
    header, rows = _trajectory_table(traj, scfg.s_track)
    return report, {"trajectory.csv": (header, rows)}, traj.abort_reason


def _run_illposedness(cfg, jobs):
    p = cfg["probe"]
    pc = ProbeConfig(N_values=p["N_values"], s=p["s"], s_prime=p["s_prime"], t_eval=p["t_eval"],
                     grid=GridSpec(p["num_points"], p["domain_length"]),
                     quadrature=QuadratureRule(p["quad_order"]), t_samples=p["t_samples"],
                     xi_samples=p["xi_samples"])
    rep = norm_explosion_sweep(pc, jobs=jobs)
    header = ["N[frequency]", "data_norm_s[Hs]", "low_freq_A2_norm[Hs']", "low_freq_A2_sup[Hs']",
              "full_A2_norm[Hs']", "multiplier_min[1]"]
    rows = list(zip(rep.N_values, rep.data_norm_s, rep.low_freq_A2_norm, rep.low_freq_A2_sup,
                    rep.full_A2_norm, rep.multiplier_min))
    return asdict(rep), {"table.csv": (header, rows)}, None


def _run_decay(cfg, jobs):
    d = cfg["decay"]
    grid = GridSpec(d["num_points"], d["domain_length"])
    if d["data"] == "gaussian":
        u0 = gaussian_decay_data(grid, d["amplitude"])
    else:
        u0 = band_limited_decay_data(grid, d["center"], d["half_width"], d["amplitude"])
    rep = decay_experiment(u0, d["times"], C=d["C"], fit_window=tuple(d["fit_window"]))
    header = ["t[time]", "sup_norm[height]", "bound[height]"]
    rows = list(zip(rep.times, rep.sup_norms, rep.bound_values))
    out = asdict(rep)
    out["wraparound_limit"] = wraparound_limit(u0)
    return out, {"trajectory.csv": (header, rows)}, None


def _run_scan(cfg, jobs):
    sc = cfg["scan"]
    rep = bilinear_constant_scan(sc["s"], sc["epsilon"], sc["sample_count"], cfg["seed"],
                                 grid=GridSpec(sc["num_points"], sc["domain_length"]),
                                 family=sc["family"], jobs=jobs)
    header = ["sample[index]", "ratio[1]"]
    rows = [[i, r] for i, r in enumerate(rep.ratios)]
    return asdict(rep), {"table.csv": (header, rows)}, None


def _run_existence(cfg, jobs):
    e = cfg["existence"]
    grid = GridSpec(**cfg["grid"])
    u0 = build_initial_state(cfg, grid)
    c_hat = e["C_hat"]
    if c_hat is None:
        sc = cfg["scan"]
        c_hat = bilinear_constant_scan(e["s"], 1.0, e["sample_count"], cfg["seed"],
                                       grid=GridSpec(sc["num_points"], sc["domain_length"]),
                                       family=sc["family"], jobs=jobs).max_ratio
    eps = [float(x) for x in e["epsilons"]]
    times = [existence_time_estimate(u0, e["s"], x, c_hat) for x in eps]
    finite = [(x, t) for x, t in zip(eps, times) if math.isfinite(t)]
    slope = float(np.polyfit(np.log([x for x, _ in finite]), np.log([t for _, t in finite]), 1)[0]) \
        if len(finite) >= 2 else float("nan")
    report = {"s": e["s"], "C_hat": c_hat, "data_norm": pair_norm(u0, e["s"]), "epsilons": eps,
              "existence_times": times, "loglog_slope": slope}
    header = ["epsilon[1]", "existence_time[time]"]
    return report, {"table.csv": (header, list(zip(eps, times)))}, None


_RUNNERS = {
    "simulate": _run_simulate,
    "invariants": lambda cfg, jobs: _run_simulate(cfg, jobs, identities=True),
    "illposedness": _run_illposedness,
    "decay": _run_decay,
    "bilinear-scan": _run_scan,
    "existence-time": _run_existence,
}


def default_out_dir(experiment: str) -> Path:
    return Path(os.environ.get(OUT_ENV, "bbmlab_runs")) / experiment


def _grid_echo(cfg):
    kind = cfg["experiment"]
    src = {"illposedness": cfg["probe"], "decay": cfg["decay"], "bilinear-scan": cfg["scan"]}.get(kind, cfg["grid"])
    return {"num_points": src["num_points"], "domain_length": src["domain_length"]}


def run_config(cfg: dict, out_dir, jobs: int = 1) -> int:
    """Run a resolved config, write the outputs and return the exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(experiment=cfg["experiment"], config=cfg, seed=int(cfg["seed"]), grid=_grid_echo(cfg))
    t0 = time.perf_counter()
    status = 0
    try:
        errors = [d for d in _validate(cfg) if d["level"] == "error"]
        if errors:
            raise ConfigInvalid(errors[0]["field"], errors[0]["message"])
        report, tables, abort = _RUNNERS[cfg["experiment"]](cfg, jobs)
        manifest.abort_reason = abort
        (out / "report.json").write_text(dumps(report))
        manifest.outputs.append("report.json")
        for name, (header, rows) in tables.items():
            write_csv(out / name, header, rows)
            manifest.outputs.append(name)
    except ConfigInvalid as exc:
        manifest.status, status = "error", 2
        manifest.error = {"type": "ConfigInvalid", "field": exc.field, "message": exc.message}
    except (BBMLabError, ValueError) as exc:
        manifest.status, status = "error", 3
        manifest.error = {"type": type(exc).__name__, "message": str(exc)}
    except Exception as exc:  # noqa: BLE001  recorded, not swallowed: exit status 1
        manifest.status, status = "error", 1
        manifest.error = {"type": type(exc).__name__, "message": str(exc)}
    manifest.wall_clock_s = time.perf_counter() - t0
    (out / "manifest.json").write_text(manifest.to_json())
    (out / "timing.json").write_text(dumps({"wall_clock_s": manifest.wall_clock_s}))
    return status


def run_experiment(config_path, out_dir=None, experiment: str | None = None, seed: int | None = None,
                   jobs: int = 1) -> int:
    """Load, validate and run one experiment; 0 on success, nonzero with an error record otherwise."""
    try:
        cfg = resolve_config(load_config(config_path) if config_path else {}, experiment, seed)
    except ConfigInvalid as exc:
        out = Path(out_dir or default_out_dir(experiment or "invalid"))
        out.mkdir(parents=True, exist_ok=True)
        record = {"status": "error", "error": {"type": "ConfigInvalid", "field": exc.field, "message": exc.message}}
        (out / "manifest.json").write_text(dumps(record))
        return 2
    return run_config(cfg, out_dir or default_out_dir(cfg["experiment"]), jobs)
