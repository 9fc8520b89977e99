"""Command pipelines: config in, CSV files plus a JSON manifest out."""
from __future__ import annotations

import json
import logging
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from app import __version__
from app.core.errors import ConfigInvalid, NotBracketed
from app.lab import asymptotics, closed_form, nsp, particles, picard, thresholds
from app.lab.emit import COLUMNS, emit_csv, write_json
from app.lab.profiles import (
    Cosine,
    InitialData,
    Interval,
    Linear,
    Tabulated,
    Uniform,
    Zero,
    build_initial_data,
    normalize_mass,
    with_mass,
)
from app.models.experiment_models import COMMANDS, ExperimentConfig, OutputFile, RunManifest

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


# ---------------------------
# Config ingestion
# ---------------------------

def parse_config(raw: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigInvalid(str(exc)) from exc


def load_config(path: Optional[Path]) -> ExperimentConfig:
    """TOML or JSON by suffix; no path means the built-in defaults."""
    if path is None:
        return ExperimentConfig()
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            raw = tomllib.loads(text.decode("utf-8"))
        elif suffix == ".json":
            raw = json.loads(text)
        else:
            raise ConfigInvalid(f"config must be .toml or .json, got {path.name}")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigInvalid(f"cannot parse {path.name}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigInvalid("config root must be a table / object")
    return parse_config(raw)


def build_data(config: ExperimentConfig, slope: Optional[float] = None, m0: Optional[float] = None) -> InitialData:
    """InitialData for the config, optionally overriding the velocity slope or the mass."""
    p, u = config.profile, config.velocity
    domain = Interval(p.a0, p.b0)
    target = config.m0 if m0 is None else m0

    if p.kind == "cosine":
        shape = Cosine(gamma_norm=1.0)
    elif p.kind == "uniform":
        shape = Uniform(height=1.0)
    else:
        shape = Tabulated(tuple(p.grid), tuple(p.values))
    rho = normalize_mass(shape, target, domain)

    if slope is not None:
        vel = Linear(u.intercept, slope)
    elif u.kind == "linear":
        vel = Linear(u.intercept, u.slope)
    elif u.kind == "zero":
        vel = Zero()
    else:
        vel = Tabulated(tuple(u.grid), tuple(u.values))
    return build_initial_data(domain, rho, vel, p.quadrature_n)


# ---------------------------
# Pipelines
# ---------------------------

@dataclass
class Table:
    name: str
    rows: List[Tuple[Any, ...]]


@dataclass
class PipelineResult:
    tables: List[Table] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)


def _verdict_summary(verdict: thresholds.Verdict) -> Dict[str, Any]:
    if isinstance(verdict, thresholds.BlowUp):
        return {
            "verdict": verdict.name,
            "x_star": verdict.x_star,
            "t_first_zero": verdict.t_first_zero,
            "t_star_min": verdict.t_star_min,
            "case_tag": verdict.witness.case_tag,
        }
    return {"verdict": verdict.name}


def run_classify(config: ExperimentConfig, threads: int = 1) -> PipelineResult:
    data = build_data(config)
    points = thresholds.scan(data, config.classify.scan_n)
    verdict = thresholds.classify(data, config.classify.scan_n, points=points)
    rows = [(p.x, p.case_tag, p.triggers_blowup, p.min_etax, p.t_min) for p in points]
    summary = _verdict_summary(verdict)
    summary["regime"] = closed_form.regime(data.m0).variant
    summary["boundary_zeros"] = list(data.boundary_zeros)
    return PipelineResult([Table("classify", rows)], summary)


def run_evaluate(config: ExperimentConfig, threads: int = 1) -> PipelineResult:
    data = build_data(config)
    xs = np.linspace(data.domain.a0, data.domain.b0, config.evaluate.nx)
    grid = closed_form.evaluate_grid(data, config.evaluate.times, xs)
    rows = []
    for i, t in enumerate(grid.t):
        for j, x in enumerate(grid.x):
            f = float(grid.f[i, j])
            rows.append((
                float(t), float(x), float(grid.v[i, j]), float(grid.vx[i, j]),
                float(grid.eta[i, j]), float(grid.etax[i, j]), None if np.isnan(f) else f,
            ))
    summary = {
        "regime": closed_form.regime(data.m0).variant,
        "m0": data.m0,
        "m1": data.m1,
        "min_etax": float(np.min(grid.etax)),
    }
    return PipelineResult([Table("evaluate", rows)], summary)


def run_simulate(config: ExperimentConfig, threads: int = 1) -> PipelineResult:
    s = config.solver
    data = build_data(config)
    system = particles.discretize(data, s.n)
    outcome = particles.run(
        system,
        particles.SimConfig(
            dt=s.dt, t_end=s.t_end, scheme=s.scheme,
            crossing_tol=s.crossing_tol, record_every=s.record_every,
        ),
    )
    traj = []
    for snap in outcome.trajectory:
        densities = particles.density_left_cell(snap, system.masses)
        for i in range(snap.positions.size):
            traj.append((snap.t, i, float(snap.positions[i]), float(snap.velocities[i]), densities[i]))
    obs = [(o.t, o.momentum, o.left, o.right, o.l1_to_limit, o.min_spacing) for o in outcome.observables]
    summary: Dict[str, Any] = {
        "status": outcome.status,
        "n": s.n,
        "final_time": outcome.final.time,
        "t_cross": outcome.t_cross,
        "index": outcome.index,
    }
    return PipelineResult([Table("trajectory", traj), Table("observables", obs)], summary)


def _family(config: ExperimentConfig) -> Callable[[float], InitialData]:
    if config.sweep.family == "slope":
        return lambda c: build_data(config, slope=-c)
    base = build_data(config)
    return lambda m: with_mass(base, m)


def run_sweep(config: ExperimentConfig, threads: int = 1) -> PipelineResult:
    sw = config.sweep
    family = _family(config)
    params = [float(p) for p in np.linspace(sw.lo, sw.hi, sw.grid_n)]

    def point(param: float) -> Tuple[float, str, Optional[float]]:
        verdict = thresholds.classify(family(param), sw.scan_n)
        t_zero = verdict.t_first_zero if isinstance(verdict, thresholds.BlowUp) else None
        return param, verdict.name, t_zero

    # map() yields in submission order, so rows stay in parameter order
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(point, params))

    summary: Dict[str, Any] = {"family": sw.family, "lo": sw.lo, "hi": sw.hi}
    try:
        report = thresholds.sweep_critical(family, sw.lo, sw.hi, sw.tol, sw.scan_n)
        summary.update(
            bracketed=True, critical=report.param,
            lo_verdict=report.lo_verdict, hi_verdict=report.hi_verdict,
        )
    except NotBracketed as exc:
        logger.info("sweep: %s", exc)
        summary.update(bracketed=False, critical=None, reason=str(exc))
    if sw.family == "slope":
        summary["critical_slope_theory"] = thresholds.critical_slope(config.m0)
    return PipelineResult([Table("sweep", rows)], summary)


def run_asymptotics(config: ExperimentConfig, threads: int = 1) -> PipelineResult:
    a = config.asymptotics
    data = build_data(config)
    times = np.linspace(a.t_start, a.t_stop, a.samples)
    series = asymptotics.l1_series(data, times, a.scan_n)
    rows = [(r.t, r.to_tilde, r.tilde_to_inf, r.total_bound) for r in series]
    profile = asymptotics.limit_profile(data)
    summary: Dict[str, Any] = {
        "gamma_cap": profile.gamma_cap,
        "omega_inf": [profile.omega_inf.a0, profile.omega_inf.b0],
        "height": profile.height,
        "lambda_theory": asymptotics.decay_rate(data.m0),
        "bound_kind": "triangle-inequality upper bound",
    }
    try:
        rate = asymptotics.fit_rate([r.t for r in series], [r.total_bound for r in series], a.fit_window, data.m0)
        summary.update(lambda_fit=rate.lambda_fit, fit_window=list(rate.fit_window), residual=rate.residual)
    except (ValueError, ArithmeticError) as exc:
        logger.warning("asymptotics: rate fit skipped: %s", exc)
        summary.update(lambda_fit=None, fit_window=list(a.fit_window), residual=None)
    return PipelineResult([Table("asymptotics", rows)], summary)


def run_picard(config: ExperimentConfig, threads: int = 1) -> PipelineResult:
    pc = config.picard
    data = build_data(config)
    result = picard.solve(data, pc.T0, pc.nt, pc.nx, pc.tol, pc.max_iter)
    ratios = [None] + picard.contraction_ratios(result.reports)
    rows = [
        (r.n, r.sup_delta, r.l2_delta, ratios[k] if k < len(ratios) else None)
        for k, r in enumerate(result.reports)
    ]
    exact = closed_form.evaluate_grid(data, result.v.t_grid, result.v.x_grid)
    summary = {
        "iterations": len(result.reports),
        "final_sup_delta": result.reports[-1].sup_delta,
        "max_v_error": float(np.max(np.abs(result.v.values - exact.v))),
        "max_eta_error": float(np.max(np.abs(result.eta.values - exact.eta))),
        "min_etax": picard.flow_positivity(result.eta),
    }
    return PipelineResult([Table("picard", rows)], summary)


def run_nsp(config: ExperimentConfig, threads: int = 1) -> PipelineResult:
    ns = config.nsp
    setup = nsp.make_setup(config.m0, ns.gamma_adiabatic, ns.alpha_viscosity)
    reports = [nsp.blowup_bound(setup, d0, ns.dt, ns.blow_threshold) for d0 in ns.d0]
    rows = [(r.d0, r.bound, r.exact_blowup, r.numeric_blowup) for r in reports]
    summary = {
        "d_plus": setup.d_plus,
        "d_minus": setup.d_minus,
        "bound_holds": all(r.exact_blowup <= r.bound for r in reports),
        "boundary_vacuum": list(nsp.boundary_vacuum(build_data(config))),
    }
    return PipelineResult([Table("nsp", rows)], summary)


PIPELINES: Dict[str, Callable[[ExperimentConfig, int], PipelineResult]] = {
    "classify": run_classify,
    "evaluate": run_evaluate,
    "simulate": run_simulate,
    "sweep": run_sweep,
    "asymptotics": run_asymptotics,
    "picard": run_picard,
    "nsp": run_nsp,
}


# ---------------------------
# Orchestration
# ---------------------------

def run_experiment(config: ExperimentConfig, command: str, out_dir: Path, threads: int = 1) -> RunManifest:
    if command not in COMMANDS:
        raise ConfigInvalid(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    started = time.perf_counter()
    logger.info("running %s into %s", command, out_dir)
    result = PIPELINES[command](config, threads)

    files: List[OutputFile] = []
    for table in result.tables:
        path = out_dir / f"{table.name}.csv"
        count = emit_csv(table.rows, path, COLUMNS[table.name])
        files.append(OutputFile(path=path.name, rows=count))

    manifest = RunManifest(
        command=command,
        artifact_version=__version__,
        wall_clock_s=time.perf_counter() - started,
        config=config.model_dump(mode="json"),
        summary=_jsonable(result.summary),
        files=files,
    )
    write_json(manifest.model_dump(mode="json"), out_dir / MANIFEST_NAME)
    logger.info("%s done: %s", command, ", ".join(f"{f.path} ({f.rows} rows)" for f in files))
    return manifest


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def summary_line(manifest: RunManifest) -> str:
    keys: Sequence[str] = ("verdict", "t_first_zero", "status", "t_cross", "critical", "lambda_fit", "iterations")
    parts = [f"{k}={manifest.summary[k]}" for k in keys if manifest.summary.get(k) is not None]
    return f"{manifest.command}: " + (", ".join(parts) if parts else "ok")
