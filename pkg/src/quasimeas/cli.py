"""Command-line front end: scenario runners, sweeps, sampling, and plotting.

Subcommands: simulate | sweep | sample | sg | param-space | plot.
Exit codes: 0 success, 2 configuration/input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import sterngerlach
from .config import Scenario, dumps_toml, load_scenario, scenario_to_dict
from .csvio import fmt, read_csv, write_table_csv, write_trajectory_csv
from .dynamics import integrate_bloch
from .errors import ConfigError, DomainError, IntegrationError, NoCrossingError
from .geometry import is_admissible, outcome_region
from .analytic import bloch_parallel
from .measurement import make_rng, sample_outcome
from .potentials import GammaAccumulator, InvertedMorse, morse_crossing_times
from .states import born_probability
from .svgplot import LinePlot, RefLine, save

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def resolve_config(name_or_path: str) -> Path:
    """A filesystem path, or the name of a bundled scenario."""
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = resources.files("quasimeas.scenarios").joinpath(
        name_or_path if name_or_path.endswith(".toml") else name_or_path + ".toml"
    )
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"no such config file or bundled scenario: {name_or_path}")


def _resolve_branch(sc: Scenario, seed=None) -> int:
    if sc.lam == "sample":
        rng = make_rng(sc.seed if seed is None else seed)
        return sample_outcome(sc.n0, sc.observable, rng)
    return int(sc.lam)


def _traj_meta(sc: Scenario, lam: int, abscissa: str = "t_s") -> dict:
    return {
        "scenario": sc.name,
        "abscissa_unit": "s" if abscissa == "t_s" else "m",
        "n_unit": "dimensionless",
        "rate_unit": "rad/s",
        "omega_rate_per_s": fmt(sc.observable.omega_rate),
        "omega_dir": sc.observable.direction,
        "lambda": lam,
        "seed": sc.seed,
    }


def _report(sc: Scenario, lam: int, traj, wall: float) -> dict:
    ref = lam * sc.observable.direction
    rep = {
        "final_n": [float(x) for x in traj.final_n],
        "deviation_from_projection": float(np.linalg.norm(traj.final_n - ref)),
        "born_probability": born_probability(sc.n0, sc.observable, lam),
        "wall_clock_s": wall,
        "lambda": lam,
        "steps": int(traj.diagnostics.get("steps", -1)),
        "scenario": scenario_to_dict(sc),
    }
    profile = sc.device.profile if sc.device is not None else None
    if isinstance(profile, InvertedMorse):
        try:
            t_minus, t_plus = morse_crossing_times(
                profile.g0_rate, profile.kappa, sc.observable.omega_rate
            )
            rep["c1_zero_crossings_s"] = [float(t_minus), float(t_plus)]
        except NoCrossingError:
            pass
    return rep


def cmd_simulate(config_path, out_dir, seed=None) -> int:
    sc = load_scenario(resolve_config(config_path))
    if seed is not None:
        sc.seed = seed
    if sc.device is None:
        raise ConfigError("simulate requires a [device] section")
    lam = _resolve_branch(sc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    traj = integrate_bloch(sc.n0, sc.observable, sc.device, lam, sc.integrator)
    wall = time.perf_counter() - t0
    write_trajectory_csv(out / "trajectory.csv", traj, _traj_meta(sc, lam))
    with open(out / "report.toml", "w") as fh:
        fh.write(dumps_toml(_report(sc, lam, traj, wall)))
    return EXIT_OK


def _sweep_variant(sc: Scenario, value):
    """A (label, n0, device, lam) run derived from the sweep variable."""
    var = sc.sweep.variable
    n0, device, lam = sc.n0, sc.device, sc.lam if sc.lam != "sample" else 1
    geom = device.geometry
    if var == "Theta":
        geom = replace(geom, Theta=float(value))
    elif var == "theta":
        geom = replace(geom, theta=float(value))
    elif var in ("g0", "kappa"):
        if not isinstance(device.profile, InvertedMorse):
            raise ConfigError(f"sweep over {var} needs an inverted_morse potential")
        key = "g0_rate" if var == "g0" else "kappa"
        device = replace(device, profile=replace(device.profile, **{key: float(value)}))
    elif var == "lambda":
        lam = int(value)
    elif var == "n0":
        from .states import as_bloch

        n0 = as_bloch(np.asarray(value, dtype=float))
    if var in ("Theta", "theta"):
        if not is_admissible(sc.observable.alpha, geom.theta, geom.Theta):
            raise ConfigError(f"sweep point {var}={value} is outside the admissible region")
        device = replace(device, geometry=geom)
    if isinstance(value, (tuple, list, np.ndarray)):
        label = "[" + " ".join(fmt(v) for v in value) + "]"
    else:
        label = fmt(value)
    return label, n0, device, lam


def cmd_sweep(config_path, out_dir, seed=None) -> int:
    sc = load_scenario(resolve_config(config_path))
    if sc.sweep is None:
        raise ConfigError("sweep requires a [sweep] section")
    if sc.device is None:
        raise ConfigError("sweep requires a [device] section")
    variants = [_sweep_variant(sc, v) for v in sc.sweep.values]

    def run(variant):
        label, n0, device, lam = variant
        traj = integrate_bloch(n0, sc.observable, device, lam, sc.integrator)
        ref = lam * sc.observable.direction
        return [
            label,
            fmt(lam),
            fmt(traj.final_n[0]),
            fmt(traj.final_n[1]),
            fmt(traj.final_n[2]),
            fmt(float(sc.observable.direction @ traj.final_n)),
            fmt(float(np.linalg.norm(traj.final_n - ref))),
        ]

    with ThreadPoolExecutor() as pool:
        rows = list(pool.map(run, variants))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "scenario": sc.name,
        "sweep_variable": sc.sweep.variable,
        "sweep_grid": " ".join(v[0] for v in variants),
        "omega_dir": sc.observable.direction,
    }
    write_table_csv(
        out / "sweep.csv",
        [sc.sweep.variable, "lambda", "n1_final", "n2_final", "n3_final", "axis_component", "deviation"],
        rows,
        meta,
    )
    return EXIT_OK


def cmd_sample(config_path, n_runs, out_dir, seed=None) -> int:
    sc = load_scenario(resolve_config(config_path))
    if sc.lam != "sample":
        raise ConfigError('sample requires lambda = "sample" in the scenario')
    if n_runs is None or n_runs < 1:
        raise ConfigError("sample requires --runs >= 1")
    if seed is not None:
        sc.seed = seed
    p_plus = born_probability(sc.n0, sc.observable, 1)
    u = make_rng(sc.seed).uniform(size=n_runs)
    outcomes = np.where(u < p_plus, 1, -1)
    count_plus = int(np.count_nonzero(outcomes == 1))
    empirical = count_plus / n_runs
    if p_plus in (0.0, 1.0):
        z = 0.0 if empirical == p_plus else float("inf")
    else:
        z = (empirical - p_plus) / np.sqrt(p_plus * (1.0 - p_plus) / n_runs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {"scenario": sc.name, "seed": sc.seed, "omega_dir": sc.observable.direction}
    write_table_csv(
        out / "ensemble.csv",
        ["n_runs", "count_plus", "count_minus", "empirical_p_plus", "born_p_plus", "z_score"],
        [[fmt(n_runs), fmt(count_plus), fmt(n_runs - count_plus), fmt(empirical), fmt(p_plus), fmt(z)]],
        meta,
    )
    write_table_csv(
        out / "outcomes.csv",
        ["run", "outcome"],
        [[fmt(i), fmt(o)] for i, o in enumerate(outcomes)],
        meta,
    )
    return EXIT_OK


def cmd_sg(config_path, out_dir, seed=None) -> int:
    sc = load_scenario(resolve_config(config_path))
    if sc.sg is None:
        raise ConfigError("sg requires an [sg] section")
    lam = _resolve_branch(sc, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    traj = sterngerlach.integrate_bloch_L(sc.n0, sc.sg, lam, sc.integrator)
    wall = time.perf_counter() - t0
    scen = sterngerlach.parallel_scenario_L(sc.sg, lam)
    gammas = GammaAccumulator(sc.sg.distance_profile()).on_grid(traj.t)
    analytic = np.empty_like(traj.n)
    for i, L in enumerate(traj.t):
        analytic[i] = bloch_parallel(float(L), sc.n0, scen, gamma_fn=lambda _t, g=gammas[i]: g)
    gap = float(np.max(np.linalg.norm(traj.n - analytic, axis=1)))
    write_trajectory_csv(
        out / "trajectory.csv", traj, _traj_meta(sc, lam, "L_m"), abscissa="L_m"
    )
    write_table_csv(
        out / "analytic.csv",
        ["L_m", "n1", "n2", "n3"],
        [[fmt(L), fmt(v[0]), fmt(v[1]), fmt(v[2])] for L, v in zip(traj.t, analytic)],
        {"scenario": sc.name, "lambda": lam},
    )
    rep = {
        "lambda": lam,
        "final_n": [float(x) for x in traj.final_n],
        "transition_length_m": sterngerlach.transition_length(traj),
        "numeric_vs_analytic_max_gap": gap,
        "min_norm": float(np.min(traj.norm)),
        "gamma_final": float(gammas[-1]),
        "wall_clock_s": wall,
        "scenario": scenario_to_dict(sc),
    }
    with open(out / "report.toml", "w") as fh:
        fh.write(dumps_toml(rep))
    return EXIT_OK


def cmd_param_space(alpha, resolution, out_dir, emit_svg=True) -> int:
    if alpha is None or not (0.0 <= alpha <= np.pi):
        raise ConfigError("param-space requires --alpha in [0, pi]")
    if resolution is None or resolution < 2:
        raise ConfigError("param-space requires --resolution >= 2")
    thetas = np.linspace(0.0, np.pi, resolution)
    Thetas = np.linspace(0.0, np.pi, resolution)
    rows = []
    for th in thetas:
        for T in Thetas:
            adm = is_admissible(alpha, float(th), float(T))
            rows.append([fmt(th), fmt(T), "1" if adm else "0", outcome_region(float(T))])
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_table_csv(
        out / "cross_section.csv",
        ["theta", "Theta", "admissible", "region"],
        rows,
        {"alpha": fmt(alpha), "resolution": resolution},
    )
    if emit_svg:
        th = np.linspace(0.0, np.pi, 400)
        lower = np.abs(alpha - th)
        upper = np.pi - np.abs(np.pi - (alpha + th))
        plot = LinePlot(
            title=f"admissible region boundary, alpha = {alpha:.6g}",
            x_label="theta",
            y_label="Theta",
        )
        plot.add("lower bound |alpha - theta|", th, lower)
        plot.add("upper bound", th, upper)
        plot.ref_lines.append(RefLine(np.pi / 2, "#2980b9", "critical"))
        save(plot, out / "cross_section.svg")
    return EXIT_OK


def cmd_plot(csv_path, out_svg, log_axis=False) -> int:
    meta, header, cols = read_csv(csv_path)
    if header[0] not in ("t_s", "L_m") or not {"n1", "n2", "n3"} <= set(header):
        raise ConfigError(f"{csv_path}: unrecognized CSV schema {header}")
    x = cols[header[0]]
    plot = LinePlot(
        title=meta.get("scenario", Path(str(csv_path)).stem),
        x_label=header[0],
        y_label="n",
        log_x=log_axis,
    )
    plot.add("n1", x, cols["n1"], color="#c0392b")
    plot.add("n2", x, cols["n2"], color="#27ae60")
    plot.add("n3", x, cols["n3"], color="#2980b9")
    if "norm" in cols:
        plot.add("|n|", x, cols["norm"], color="#000000", dashed=True)
    if "omega_dir" in meta and "lambda" in meta:
        lam = float(meta["lambda"])
        direction = np.array(meta["omega_dir"].split(), dtype=float)
        for comp, color in zip(lam * direction, ("#c0392b", "#27ae60", "#2980b9")):
            plot.ref_lines.append(RefLine(float(comp), color))
    save(plot, out_svg)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quasimeas", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="scenario file or bundled name")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--seed", type=int, default=None)

    common(sub.add_parser("simulate", help="run one scenario, emit trajectory CSV + report"))
    common(sub.add_parser("sweep", help="run a scenario sweep, emit results table"))
    sp = sub.add_parser("sample", help="sample measurement outcomes, emit ensemble stats")
    common(sp)
    sp.add_argument("--runs", type=int, default=None)
    common(sub.add_parser("sg", help="Stern-Gerlach run, numeric + analytic n(L)"))
    sp = sub.add_parser("param-space", help="admissibility cross-section at fixed alpha")
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--resolution", type=int, default=None)
    sp.add_argument("--out", required=True)
    sp = sub.add_parser("plot", help="render a trajectory CSV as SVG")
    sp.add_argument("csv", help="input CSV path")
    sp.add_argument("--out", required=True, help="output SVG path")
    sp.add_argument("--log-axis", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return cmd_simulate(args.config, args.out, args.seed)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.out, args.seed)
        if args.command == "sample":
            return cmd_sample(args.config, args.runs, args.out, args.seed)
        if args.command == "sg":
            return cmd_sg(args.config, args.out, args.seed)
        if args.command == "param-space":
            return cmd_param_space(args.alpha, args.resolution, args.out)
        if args.command == "plot":
            return cmd_plot(args.csv, args.out, args.log_axis)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
