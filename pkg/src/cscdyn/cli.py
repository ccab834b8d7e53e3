"""Command-line front end: one subcommand per experiment mode.

Every run writes a `manifest.json` with the fully resolved configuration
(defaults materialized) next to its CSV/JSON artifacts.  CSV files carry a
header row, '.' decimal separator, and 17 significant digits, so identical
configurations reproduce bit-identical output.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import MODES, ExperimentConfig, parse_config
from .diagnostics import energy_functional, paradox_check_pde
from .errors import ConfigError, IntegrationError
from .grids import Grid, build_grid, integrate_field
from .model import FieldState, MeanState, ModelParams
from .ode import (
    classify_ode_equilibrium,
    equilibria,
    integrate_ode,
    manifold_state,
    paradox_check_ode,
    slow_manifold_curve,
)
from .pde import constant_field, integrate_pde, on_manifold_field, pde_rhs
from .stability import classify_pde_equilibrium, manifold_distance_scaling

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def _write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _mean_init(cfg: ExperimentConfig, params: ModelParams) -> MeanState:
    if cfg.init_kind == "constant":
        return MeanState(cfg.init_u, cfg.init_v)
    return manifold_state(params, cfg.init_p_bar)


def _field_init(cfg: ExperimentConfig, params: ModelParams, grid: Grid) -> FieldState:
    if cfg.init_kind == "constant":
        return constant_field(grid, cfg.init_u, cfg.init_v)
    amplitude = cfg.amplitude if cfg.init_kind == "perturbed" else 0.0
    return on_manifold_field(params, grid, cfg.init_p_bar,
                             amplitude=amplitude, wavenumber=cfg.wavenumber)


def _run_ode(cfg, out, workers):
    params = cfg.params()
    init = _mean_init(cfg, params)
    traj = integrate_ode(params, init, (0.0, cfg.horizon),
                         rtol=cfg.rtol, atol=cfg.atol, n_snapshots=cfg.snapshots)
    rows = np.column_stack([traj.times, traj.states, traj.masses])
    return [_write_csv(out / "trajectory.csv", ["t", "u_bar", "v_bar", "p_bar"], rows)]


def _run_pde(cfg, out, workers):
    params = cfg.params()
    grid = build_grid(cfg.domain)
    init = _field_init(cfg, params, grid)
    times = np.linspace(0.0, cfg.horizon, cfg.snapshots)
    traj = integrate_pde(params, grid, init, (0.0, cfg.horizon),
                         output_times=times, safety=cfg.safety)
    rows = []
    for i, t in enumerate(traj.times):
        state = FieldState(traj.states[i, 0], traj.states[i, 1])
        energy = energy_functional(grid, state, pde_rhs(params, grid, state))
        rows.append((t, integrate_field(grid, state.u), integrate_field(grid, state.v),
                     traj.masses[i], energy))
    return [_write_csv(out / "trajectory.csv",
                       ["t", "u_bar", "v_bar", "p_bar", "energy"], rows)]


def _run_slow_manifold(cfg, out, workers):
    alphas = cfg.alphas if cfg.alphas is not None else (cfg.alpha,)
    u_grid = np.linspace(0.0, 1.0, cfg.curve_points)

    def one(alpha):
        curve = slow_manifold_curve(cfg.params(alpha=alpha), u_grid)
        sub = out / f"alpha={alpha:g}"
        sub.mkdir(parents=True, exist_ok=True)
        return _write_csv(sub / "curve.csv", ["u", "v"],
                          np.column_stack([curve.u, curve.v]))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        return list(pool.map(one, alphas))


def _run_stability(cfg, out, workers):
    params = cfg.params()
    rows = []
    report = {}
    for e in equilibria(params):
        if not e.exists:
            report[e.label] = {"exists": False,
                               "note": f"absent: alpha = {params.alpha} exceeds k(0) = 1"}
            continue
        rep = classify_pde_equilibrium(params, e, cfg.domain, j_max=cfg.j_max)
        report[e.label] = {
            "exists": True,
            "point": [e.point.u_bar, e.point.v_bar],
            "classification": rep.classification,
            "ode_classification": classify_ode_equilibrium(params, e),
            "conditions": rep.conditions,
        }
        for j, mu_j, lam1, lam2 in rep.modes:
            rows.append((e.label, j, mu_j, lam1, lam2))
    files = [_write_json(out / "report.json", report)]
    files.append(_write_csv(out / "stability.csv",
                            ["equilibrium", "j", "mu_j", "lambda1", "lambda2"], rows))
    return files


def _write_paradox_outputs(out, report, grid=None):
    files = [_write_json(out / "paradox.json", report.as_dict())]
    for idx, traj in enumerate(report.trajectories, start=1):
        if traj.states.ndim == 3:
            u_bar = traj.states[:, 0, :] @ grid.weights
            v_bar = traj.states[:, 1, :] @ grid.weights
        else:
            u_bar = traj.states[:, 0]
            v_bar = traj.states[:, 1]
        rows = np.column_stack([traj.times, u_bar, v_bar, traj.masses])
        files.append(_write_csv(out / f"trajectory_{idx}.csv",
                                ["t", "u_bar", "v_bar", "p_bar"], rows))
    return files


def _run_paradox_ode(cfg, out, workers):
    params_1 = cfg.params(alpha=cfg.alpha_1)
    params_2 = cfg.params(alpha=cfg.alpha_2)
    init = _mean_init(cfg, params_1)
    report = paradox_check_ode(params_1, params_2, init, cfg.horizon,
                               theta_grid=cfg.theta_samples,
                               rtol=cfg.rtol, atol=cfg.atol)
    print(f"paradox-ode verdict: {report.verdict}")
    return _write_paradox_outputs(out, report)


def _run_paradox_pde(cfg, out, workers):
    params_1 = cfg.params(alpha=cfg.alpha_1)
    params_2 = cfg.params(alpha=cfg.alpha_2)
    grid = build_grid(cfg.domain)
    init = _field_init(cfg, params_1, grid)
    report = paradox_check_pde(params_1, params_2, grid, init, cfg.horizon,
                               theta_grid=cfg.theta_samples,
                               n_snapshots=cfg.snapshots, safety=cfg.safety,
                               workers=workers)
    print(f"paradox-pde verdict: {report.verdict}")
    return _write_paradox_outputs(out, report, grid=grid)


def _run_fenichel(cfg, out, workers):
    params = cfg.params()
    grid = build_grid(cfg.domain)
    init = _field_init(cfg, params, grid)
    distances = manifold_distance_scaling(params, cfg.deltas, grid, init,
                                          cfg.settle_time, cfg.horizon,
                                          n_snapshots=cfg.snapshots,
                                          safety=cfg.safety, workers=workers)
    rows = np.column_stack([cfg.deltas, distances])
    return [_write_csv(out / "scaling.csv", ["delta", "sup_distance"], rows)]


_RUNNERS = {
    "ode": _run_ode,
    "pde": _run_pde,
    "slow-manifold": _run_slow_manifold,
    "stability": _run_stability,
    "paradox-ode": _run_paradox_ode,
    "paradox-pde": _run_paradox_pde,
    "fenichel": _run_fenichel,
}


def run_experiment(cfg: ExperimentConfig, out_dir=None, workers: int = 2) -> list[Path]:
    """Execute a validated configuration; returns the files written."""
    target = out_dir or cfg.out
    if target is None:
        raise ConfigError("experiment.out: no output directory (set it or pass --out)")
    out = Path(target)
    out.mkdir(parents=True, exist_ok=True)

    manifest = cfg.resolved()
    manifest["experiment"]["out"] = str(out)
    manifest["workers"] = workers
    files = [_write_json(out / "manifest.json", manifest)]

    try:
        runner = _RUNNERS[cfg.mode]
    except KeyError:
        raise ConfigError(f"experiment.mode: unknown mode {cfg.mode!r}")
    try:
        files.extend(runner(cfg, out, workers))
    except ConfigError:
        raise
    except ValueError as exc:
        # bad derived inputs (e.g. a mass off the manifold) are config-class
        raise ConfigError(str(exc)) from exc
    return files


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cscdyn",
        description="Cancer stem-cell dynamics: simulations, stability analysis, "
                    "and tumor-growth-paradox detection.")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode, help=f"run a {mode} experiment")
        sp.add_argument("--config", required=True, help="path to the INI config")
        sp.add_argument("--out", default=None, help="output directory (overrides config)")
        sp.add_argument("--workers", type=int, default=2,
                        help="concurrent runs for sweeps and paired integrations")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed recorded in the manifest (reserved for random inits)")
    args = parser.parse_args(argv)

    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        cfg = parse_config(text, mode=args.mode)
        if args.seed is not None:
            cfg.seed = args.seed
        files = run_experiment(cfg, out_dir=args.out, workers=args.workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, FloatingPointError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    for path in files:
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
