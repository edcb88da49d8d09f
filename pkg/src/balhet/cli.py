"""Experiment runner: reproduces the noise-spectrum panels, runs the
Monte-Carlo verification, dumps correlation tables, and simulates the
phase lock, all from a declarative INI configuration.

Exit codes: 0 success, 2 configuration error, 3 numerical/physicality
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .correlation import lambda_prime, lambda_prime_quadrature_form, time_average_reduce
from .errors import BalhetError, ConfigInvalid
from .field import HeterodyneConfig, OpoParams, coherent_state, opo_field_state, opo_spectra
from .locking import LockConfig, closed_loop_simulate
from .montecarlo import WelchConfig, monte_carlo_heterodyne, monte_carlo_homodyne
from .serialize import config_hash, write_json, write_spectral_csv, write_table_csv
from .spectral import (SpectralDensity, frequency_grid, heterodyne_spectrum,
                       homodyne_spectrum, opo_heterodyne_closed_form)
from .svgplot import Panel, write_svg

MODES = ("spectrum", "montecarlo", "correlation", "lock", "figure3")

FIGURE3_RATIOS = {"a": 0.05, "b": 0.5, "c": 5.0}

DEFAULTS = {
    "run": {"mode": "spectrum", "seed": "12345", "out": "out"},
    "opo": {"gamma": "1.0", "epsilon": "0.5", "eta": "1.0"},
    "heterodyne": {"omega": "0.05", "phi1": "0.0", "phi2": "0.0",
                   "beta": "0.0", "amplitude": "1.0", "omega0": "0.0"},
    "grid": {"omega_max": "3.0", "points": "1001"},
    "montecarlo": {"sample_rate": "10.0", "segment_length": "8192",
                   "overlap": "0.5", "window": "hann",
                   "n_segments_min": "16", "segments": "400",
                   "overlay_seeds": "0"},
    "correlation": {"iota_max": "10.0", "points": "201",
                    "averaging_periods": "40"},
    "lock": {"omega": str(2.0 * math.pi * 1280.0),
             "omega_prime": str(2.0 * math.pi * 1152.0),
             "amplitude": "0.1", "theta": "0.2", "demod_phase": "0.0",
             "lowpass_cutoff": "", "kp": "0.0", "ki": "1000.0",
             "dt": str(2.0 ** -15), "duration": "0.5",
             "phibar0": "0.3", "mean_real": "1.0", "mean_imag": "0.0",
             "disturbance_amplitude": "0.0", "disturbance_omega": "0.0",
             "lock_tolerance": "1e-3"},
}


@dataclass
class ExperimentConfig:
    """Validated experiment settings with the raw key/value snapshot."""

    mode: str
    seed: int
    out: str
    opo: OpoParams
    heterodyne: HeterodyneConfig
    grid_omega_max: float
    grid_points: int
    welch: WelchConfig
    mc_sample_rate: float
    mc_segments: int
    overlay_seeds: int
    correlation_iota_max: float
    correlation_points: int
    correlation_periods: float
    lock: LockConfig
    lock_heterodyne: HeterodyneConfig
    lock_mean: complex
    snapshot: dict

    @property
    def hash(self) -> str:
        return config_hash(self.snapshot)


def _parser_with_defaults(path: str | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.read_dict(DEFAULTS)
    if path is not None:
        read = parser.read(path)
        if not read:
            raise ConfigInvalid(f"config file not found: {path}")
    for section in parser.sections():
        if section not in DEFAULTS:
            raise ConfigInvalid(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in DEFAULTS[section]:
                raise ConfigInvalid(f"unknown key '{key}' in section [{section}]")
    return parser


def _get(parser, section, key, conv, errors):
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except ValueError:
        errors.append(f"[{section}] {key}: cannot parse {raw!r}")
        return None


def load_config(path: str | None = None, *, mode: str | None = None,
                seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    """Parse and validate an INI config, applying CLI overrides."""
    parser = _parser_with_defaults(path)
    errors: list[str] = []
    f = lambda s, k: _get(parser, s, k, float, errors)
    i = lambda s, k: _get(parser, s, k, int, errors)

    eff_mode = mode or parser.get("run", "mode")
    if eff_mode not in MODES:
        errors.append(f"[run] mode must be one of {MODES}, got {eff_mode!r}")
    eff_seed = seed if seed is not None else i("run", "seed")
    eff_out = out or parser.get("run", "out")

    try:
        opo = OpoParams(gamma=f("opo", "gamma"), epsilon=f("opo", "epsilon"),
                        eta=f("opo", "eta"))
    except (TypeError, ValueError) as exc:
        errors.append(f"[opo] {exc}")
        opo = None
    try:
        het = HeterodyneConfig(Omega=f("heterodyne", "omega"),
                               phi1=f("heterodyne", "phi1"),
                               phi2=f("heterodyne", "phi2"),
                               beta=f("heterodyne", "beta"),
                               amplitude=f("heterodyne", "amplitude"),
                               omega0=f("heterodyne", "omega0"))
    except (TypeError, ValueError) as exc:
        errors.append(f"[heterodyne] {exc}")
        het = None
    try:
        welch = WelchConfig(segment_length=i("montecarlo", "segment_length"),
                            overlap=f("montecarlo", "overlap"),
                            window=parser.get("montecarlo", "window"),
                            n_segments_min=i("montecarlo", "n_segments_min"))
    except (TypeError, ValueError) as exc:
        errors.append(f"[montecarlo] {exc}")
        welch = None

    cutoff_raw = parser.get("lock", "lowpass_cutoff").strip()
    phibar0 = f("lock", "phibar0")
    dist_amp = f("lock", "disturbance_amplitude")
    dist_omega = f("lock", "disturbance_omega")
    disturbance = None
    if dist_amp and dist_omega:
        disturbance = _sine_disturbance(dist_amp, dist_omega)
    try:
        lock = LockConfig(Omega_prime=f("lock", "omega_prime"),
                          theta=f("lock", "theta"),
                          demod_phase=f("lock", "demod_phase"),
                          lowpass_cutoff=float(cutoff_raw) if cutoff_raw else None,
                          kp=f("lock", "kp"), ki=f("lock", "ki"),
                          dt=f("lock", "dt"), duration=f("lock", "duration"),
                          disturbance=disturbance,
                          lock_tolerance=f("lock", "lock_tolerance"))
        lock_het = HeterodyneConfig(Omega=f("lock", "omega"),
                                    phi1=phibar0, phi2=phibar0, beta=0.0,
                                    amplitude=f("lock", "amplitude"))
    except (TypeError, ValueError) as exc:
        errors.append(f"[lock] {exc}")
        lock = lock_het = None

    if errors:
        raise ConfigInvalid("; ".join(errors))

    snapshot = {s: dict(parser[s]) for s in parser.sections()}
    snapshot["run"]["mode"] = eff_mode
    snapshot["run"]["seed"] = str(eff_seed)

    return ExperimentConfig(
        mode=eff_mode, seed=eff_seed, out=eff_out, opo=opo, heterodyne=het,
        grid_omega_max=f("grid", "omega_max"), grid_points=i("grid", "points"),
        welch=welch, mc_sample_rate=f("montecarlo", "sample_rate"),
        mc_segments=i("montecarlo", "segments"),
        overlay_seeds=i("montecarlo", "overlay_seeds"),
        correlation_iota_max=f("correlation", "iota_max"),
        correlation_points=i("correlation", "points"),
        correlation_periods=f("correlation", "averaging_periods"),
        lock=lock, lock_heterodyne=lock_het,
        lock_mean=complex(f("lock", "mean_real"), f("lock", "mean_imag")),
        snapshot=snapshot,
    )


def _sine_disturbance(amplitude: float, omega: float):
    def disturbance(t):
        return amplitude * np.sin(omega * np.asarray(t, dtype=float))
    return disturbance


def _out(cfg: ExperimentConfig, name: str) -> str:
    import os
    return os.path.join(cfg.out, name)


def _spectrum_panel(title, curves, points=None):
    panel = Panel(title=title, xlabel="omega (rad/s)", ylabel="normalized noise power")
    for x, y, label in curves:
        panel.add_line(x, y, label)
    for x, y, label in points or []:
        panel.add_points(x, y, label)
    return panel


def run_spectrum(cfg: ExperimentConfig, svg: bool = False) -> list[str]:
    spectra = opo_spectra(cfg.opo)
    grid = frequency_grid(cfg.grid_omega_max, cfg.grid_points,
                          include=(cfg.heterodyne.Omega,))
    het = heterodyne_spectrum(spectra, cfg.heterodyne, cfg.opo.eta, grid)
    hom = homodyne_spectrum(spectra, cfg.heterodyne.phibar, cfg.opo.eta, grid)
    meta = {"config_hash": cfg.hash}
    paths = [_out(cfg, "spectrum_heterodyne.csv"), _out(cfg, "spectrum_homodyne.csv")]
    write_spectral_csv(paths[0], het, meta)
    write_spectral_csv(paths[1], hom, meta)
    if svg:
        panel = _spectrum_panel("heterodyne vs homodyne",
                                [(het.omega_grid, het.chi_normalized, "het"),
                                 (hom.omega_grid, hom.chi_normalized, "hom")])
        paths.append(_out(cfg, "spectrum.svg"))
        write_svg(paths[-1], [panel], columns=1)
    return paths


def run_montecarlo(cfg: ExperimentConfig, svg: bool = False) -> list[str]:
    mc = monte_carlo_heterodyne(cfg.opo, cfg.heterodyne, cfg.mc_sample_rate,
                                cfg.mc_segments, cfg.welch, cfg.seed)
    analytic = heterodyne_spectrum(opo_spectra(cfg.opo), cfg.heterodyne,
                                   cfg.opo.eta, mc.omega_grid)
    meta = {"config_hash": cfg.hash, "seed": cfg.seed}
    paths = [_out(cfg, "montecarlo.csv"), _out(cfg, "montecarlo_analytic.csv"),
             _out(cfg, "montecarlo_manifest.json")]
    write_spectral_csv(paths[0], mc, meta)
    write_spectral_csv(paths[1], analytic, meta)
    write_json(paths[2], {"seed": cfg.seed, "config_hash": cfg.hash,
                          "tool_version": __version__,
                          "n_segments": mc.config_snapshot["n_segments"],
                          "config": cfg.snapshot})
    if svg:
        stride = max(1, len(mc.omega_grid) // 200)
        panel = _spectrum_panel(
            "Monte-Carlo vs analytic",
            [(analytic.omega_grid, analytic.chi_normalized, "analytic")],
            [(mc.omega_grid[::stride], mc.chi_normalized[::stride], "mc")])
        paths.append(_out(cfg, "montecarlo.svg"))
        write_svg(paths[-1], [panel], columns=1)
    return paths


def run_correlation(cfg: ExperimentConfig, svg: bool = False) -> list[str]:
    state = opo_field_state(cfg.opo, beta=cfg.heterodyne.beta)
    het = cfg.heterodyne
    tau = np.linspace(-cfg.correlation_iota_max, cfg.correlation_iota_max,
                      cfg.correlation_points)
    closed = lambda_prime(state, het, tau)
    quad_form = lambda_prime_quadrature_form(state, het, tau)
    T = cfg.correlation_periods * math.pi / het.Omega
    averaged = np.array([time_average_reduce(state, het, x, T).numeric for x in tau])
    meta = {"config_hash": cfg.hash, "averaging_time": T}
    paths = [_out(cfg, "correlation.csv")]
    write_table_csv(paths[0], {"tau": tau, "lambda_prime": closed,
                               "lambda_prime_quadrature": quad_form,
                               "time_average": averaged}, meta)
    if svg:
        panel = Panel(title="time-averaged intensity correlation",
                      xlabel="lag (s)", ylabel="lambda'")
        panel.add_line(tau, closed)
        panel.add_points(tau[::5], averaged[::5])
        paths.append(_out(cfg, "correlation.svg"))
        write_svg(paths[-1], [panel], columns=1)
    return paths


def run_lock(cfg: ExperimentConfig, svg: bool = False) -> list[str]:
    from .field import flat_detector
    state = coherent_state(cfg.lock_mean)
    trajectory = closed_loop_simulate(state, cfg.lock_heterodyne, cfg.lock,
                                      flat_detector(), eta=cfg.opo.eta)
    stride = max(1, len(trajectory.time) // 4000)
    meta = {"config_hash": cfg.hash}
    paths = [_out(cfg, "lock_trajectory.csv"), _out(cfg, "lock_summary.json")]
    write_table_csv(paths[0], {"t": trajectory.time[::stride],
                               "phibar": trajectory.phibar[::stride],
                               "error": trajectory.error_signal[::stride]}, meta)
    write_json(paths[1], {"locked": trajectory.locked,
                          "lock_time": trajectory.lock_time,
                          "lock_point": trajectory.lock_point,
                          "residual_rms": trajectory.residual_rms,
                          "config_hash": cfg.hash,
                          "tool_version": __version__})
    if svg:
        phase = Panel(title="phase trajectory", xlabel="t (s)", ylabel="phibar (rad)")
        phase.add_line(trajectory.time[::stride], trajectory.phibar[::stride])
        err = Panel(title="error signal", xlabel="t (s)", ylabel="error")
        err.add_line(trajectory.time[::stride], trajectory.error_signal[::stride])
        paths.append(_out(cfg, "lock.svg"))
        write_svg(paths[-1], [phase, err], columns=2)
    return paths


def run_figure3(cfg: ExperimentConfig, svg: bool = True) -> list[str]:
    """Reproduce the four noise-reduction panels.

    Panels a-c: heterodyne with offset/damping ratios 0.05, 0.5, 5 via the
    closed-form split Lorentzians; panel d: homodyne with the same source.
    Monte-Carlo points overlay the curves when overlay_seeds > 0.
    """
    gamma = cfg.opo.gamma
    meta = {"config_hash": cfg.hash}
    paths = []
    panels = []
    for label, ratio in FIGURE3_RATIOS.items():
        Om = ratio * gamma
        grid = frequency_grid(3.0 * gamma + Om, cfg.grid_points, include=(Om,))
        sd = opo_heterodyne_closed_form(cfg.opo, Om, grid)
        path = _out(cfg, f"figure3_{label}.csv")
        write_spectral_csv(path, sd, meta)
        paths.append(path)
        points = []
        if cfg.overlay_seeds > 0:
            mc = _overlay_average(
                lambda s: monte_carlo_heterodyne(
                    cfg.opo, HeterodyneConfig(Omega=Om, amplitude=cfg.heterodyne.amplitude),
                    cfg.mc_sample_rate, cfg.mc_segments, cfg.welch, s),
                cfg.seed, cfg.overlay_seeds)
            keep = np.abs(mc.omega_grid) <= grid[-1]
            stride = max(1, int(np.sum(keep)) // 60)
            points = [(mc.omega_grid[keep][::stride],
                       mc.chi_normalized[keep][::stride], "mc")]
        panels.append(_spectrum_panel(
            f"({label}) heterodyne, offset/damping = {ratio}",
            [(sd.omega_grid, sd.chi_normalized, "analytic")], points))

    grid = frequency_grid(3.0 * gamma, cfg.grid_points)
    hom = homodyne_spectrum(opo_spectra(cfg.opo), 0.0, cfg.opo.eta, grid)
    path = _out(cfg, "figure3_d.csv")
    write_spectral_csv(path, hom, meta)
    paths.append(path)
    points = []
    if cfg.overlay_seeds > 0:
        mc = _overlay_average(
            lambda s: monte_carlo_homodyne(cfg.opo, 0.0, cfg.mc_sample_rate,
                                           cfg.mc_segments, cfg.welch, s),
            cfg.seed, cfg.overlay_seeds)
        keep = np.abs(mc.omega_grid) <= grid[-1]
        stride = max(1, int(np.sum(keep)) // 60)
        points = [(mc.omega_grid[keep][::stride],
                   mc.chi_normalized[keep][::stride], "mc")]
    panels.append(_spectrum_panel("(d) homodyne",
                                  [(hom.omega_grid, hom.chi_normalized, "analytic")],
                                  points))

    paths.append(_out(cfg, "figure3.svg"))
    write_svg(paths[-1], panels, columns=2)
    return paths


def _overlay_average(factory, seed: int, count: int) -> SpectralDensity:
    sds = [factory(seed + k) for k in range(count)]
    chi = np.mean([sd.chi_normalized for sd in sds], axis=0)
    first = sds[0]
    sigma = first.sigma / math.sqrt(count) if first.sigma is not None else None
    return SpectralDensity(first.omega_grid, chi, first.normalization,
                           first.config_snapshot, sigma=sigma)


RUNNERS = {"spectrum": run_spectrum, "montecarlo": run_montecarlo,
           "correlation": run_correlation, "lock": run_lock,
           "figure3": run_figure3}


def run_mode(cfg: ExperimentConfig, svg: bool = False) -> list[str]:
    """Dispatch to the runner for the configured mode."""
    if cfg.mode == "figure3":
        return run_figure3(cfg)
    return RUNNERS[cfg.mode](cfg, svg=svg)


def build_argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balhet",
        description="Balanced-heterodyne squeezing detection simulator")
    parser.add_argument("--version", action="version",
                        version=f"balhet {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run the {mode} pipeline")
        p.add_argument("--config", default=None, help="INI configuration file")
        p.add_argument("--seed", type=int, default=None, help="RNG seed override")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--svg", action="store_true", help="emit SVG plots")
    return parser


def main(argv=None) -> int:
    args = build_argument_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, mode=args.mode, seed=args.seed,
                          out=args.out)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        paths = run_mode(cfg, svg=args.svg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BalhetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
