"""End-to-end runs behind the command-line front end."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import monte_carlo_scale, nearest_index, plateau_mask
from .config import PRESET_NOTES, ConfigError, ExperimentConfig, parse_number, write_manifest
from .detector import DetectionResult, default_grid, detect
from .spectral_core import add_white_noise, analytic_coefficients
from .tables import (Table, coefficients_table, detection_table, edges_table, factor_table,
                     fmt, montecarlo_table)

SWEEP_PARAMS = ("eta", "N", "beta", "k0")


@dataclass
class DetectRun:
    config: ExperimentConfig
    result: DetectionResult
    plateau_rms: float
    plateau_max: float
    amplitude_error: float
    outdir: Path | None = None


def _manifest_extra(cfg: ExperimentConfig, factor, **more) -> dict:
    extra = {"version": __version__, "beta_resolved": factor.beta if factor.beta else "none",
             "norm_constant": factor.norm_constant, "input_noise_eta": cfg.input_noise}
    if cfg.preset:
        extra["preset_note"] = PRESET_NOTES[cfg.preset]
    extra.update(more)
    return extra


def run_detect(cfg: ExperimentConfig, outdir=None) -> DetectRun:
    """Coefficients -> noise -> factor -> conjugate sum -> edges, with artifacts."""
    signal = cfg.signal_spec()
    factor = cfg.build_factor()
    data = analytic_coefficients(signal, cfg.N)
    data = add_white_noise(data, cfg.input_noise, cfg.seed)
    grid = default_grid(cfg.N, cfg.grid_size)
    result = detect(data, factor, grid, cfg.policy())

    eps = result.epsilon_predicted
    far = plateau_mask(grid, signal.locations, 10 * eps)
    plateau = np.abs(result.samples[far])
    errors = [abs(result.samples[nearest_index(grid, z)] - a) for z, a in signal.jumps]
    run = DetectRun(cfg, result,
                    plateau_rms=float(np.sqrt(np.mean(plateau ** 2))) if plateau.size else 0.0,
                    plateau_max=float(plateau.max()) if plateau.size else 0.0,
                    amplitude_error=float(max(errors)) if errors else 0.0)
    if outdir is not None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        coefficients_table(data).write(out / "coefficients.csv")
        factor_table(factor).write(out / "factor.csv")
        detection_table(result).write(out / "samples.csv")
        edges_table(result).write(out / "edges.csv")
        write_manifest(out / "manifest.ini", cfg, _manifest_extra(
            cfg, factor, epsilon_predicted=eps, threshold_used=result.threshold_used,
            edges=len(result.edges), plateau_rms=run.plateau_rms,
            plateau_max=run.plateau_max, amplitude_error=run.amplitude_error))
        run.outdir = out
    return run


def _with(cfg: ExperimentConfig, param: str, value) -> ExperimentConfig:
    if param == "N":
        value = int(value)
    elif param == "beta":
        value = repr(float(value))
    new = dataclasses.replace(cfg, **{param: value})
    new.validate()
    return new


def parse_sweep_values(param: str, text) -> list:
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {list(SWEEP_PARAMS)}, got {param!r}")
    items = [t for t in (text.split(",") if isinstance(text, str) else text)
             if str(t).strip()]
    if not items:
        raise ConfigError("sweep needs at least one value")
    values = [parse_number(t) for t in items]
    if param == "N":
        values = [int(v) for v in values]
    return values


def run_sweep(cfg: ExperimentConfig, param: str, values, outdir=None, jobs: int = 1) -> Table:
    """One detect run per value plus a summary table."""
    values = parse_sweep_values(param, values)
    configs = [_with(cfg, param, v) for v in values]
    out = Path(outdir) if outdir is not None else None
    dirs = [None if out is None else out / f"{param}={fmt(v)}" for v in values]
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        runs = list(pool.map(run_detect, configs, dirs))
    rows = [[v, r.plateau_rms, r.plateau_max, r.amplitude_error, r.result.epsilon_predicted,
             len(r.result.edges)] for v, r in zip(values, runs)]
    table = Table({"parameter": param, "preset": cfg.preset or "none"}).add(
        "data", ["value", "plateau_rms", "plateau_max", "amplitude_error", "epsilon",
                 "edges"], rows)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        table.write(out / "summary.csv")
        write_manifest(out / "manifest.ini", cfg, {
            "version": __version__, "sweep_parameter": param,
            "sweep_values": ",".join(fmt(v) for v in values)})
    return table


def run_montecarlo(cfg: ExperimentConfig, outdir=None) -> Table:
    factor = cfg.build_factor()
    summary = monte_carlo_scale(cfg.signal_spec(), cfg.input_noise, factor, cfg.trials,
                                cfg.seed, grid=default_grid(cfg.N, cfg.grid_size),
                                policy=cfg.policy())
    table = montecarlo_table(summary)
    if outdir is not None:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        table.write(out / "montecarlo.csv")
        write_manifest(out / "manifest.ini", cfg, _manifest_extra(
            cfg, factor, epsilon_predicted=summary.epsilon,
            detection_rate=summary.detection_rate, plateau_rms=summary.plateau_rms))
    return table


def run_factors(cfg: ExperimentConfig) -> Table:
    return factor_table(cfg.build_factor())
