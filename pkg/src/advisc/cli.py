"""Command-line harness: run simulations, train closures, analyze outputs,
and reproduce the reference experiments.

Exit codes: 0 success, 1 analysis check failure, 2 divergence,
3 configuration error, 4 I/O error, 5 optimizer non-convergence.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    config_to_dict,
    load_config,
)
from .diagnostics import entropy_report, error_field, mse, mu_stats, total_variation
from .grid import (
    CellField,
    ExactProvider,
    FaceViscosity,
    SpaceTimeViscosity,
    exact_solution,
    hat_provider,
    sine_provider,
    sine_solution,
)
from .optimizer import TrainingReport, train_global, train_per_step
from .presets import PRESET_NAMES, nonneg_variant, preset_config
from .runio import (
    MANIFEST_NAME,
    read_json,
    read_manifest,
    read_matrix_csv,
    read_series_csv,
    write_columns_csv,
    write_json,
    write_manifest,
    write_matrix_csv,
    write_series_csv,
)
from .schemes import DivergenceError, SchemeConfig, Trajectory, ftcs_step, simulate

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_DIVERGENCE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_NO_CONVERGENCE = 5

ANALYSIS_NAME = "analysis.json"


def _build_problem(cfg: ExperimentConfig) -> tuple[SchemeConfig, CellField, ExactProvider]:
    scheme_cfg = cfg.scheme_config()
    grid = scheme_cfg.grid
    if cfg.ic.kind == "hat":
        profile = cfg.ic.hat_profile()
        provider = hat_provider(profile, grid, cfg.c)
        u0 = exact_solution(profile, grid, cfg.c, 0.0)
    else:
        provider = sine_provider(grid, cfg.c, cfg.ic.wavenumber, cfg.ic.amplitude)
        u0 = sine_solution(grid, cfg.c, 0.0, cfg.ic.wavenumber, cfg.ic.amplitude)
    return scheme_cfg, u0, provider


def _trajectory_stats(cfg: ExperimentConfig, traj: Trajectory, provider: ExactProvider) -> dict:
    grid = traj.config.grid
    final = traj.states[-1]
    report = entropy_report(traj, include_dissipation=False)
    stats = {
        "mse_final": mse(final, provider(traj.n_steps * traj.config.dt)),
        "entropy_initial": float(report.total_entropy[0]),
        "entropy_final": float(report.total_entropy[-1]),
        "max_per_step_entropy_increase": float(np.max(report.per_step_delta, initial=0.0)),
        "total_variation_final": total_variation(final),
        "mass_initial": float(np.sum(traj.states[0].values)) * grid.dx,
        "mass_final": float(np.sum(final.values)) * grid.dx,
        "max_abs_final": float(np.max(np.abs(final.values))),
    }
    return stats


def _mu_summary(cfg: ExperimentConfig, mu_st: SpaceTimeViscosity, traj: Trajectory) -> dict:
    values = mu_st.values
    out = {
        "mu_min": float(np.min(values)),
        "mu_max": float(np.max(values)),
        "fraction_negative": float(np.mean(values < 0)),
    }
    if cfg.ic.kind == "hat":
        stats = mu_stats(mu_st, traj, cfg.ic.hat_profile(), radius=0.05)
        out["negative_mass_near_discontinuity"] = stats.negative_mass_near_discontinuity
    return out


def _write_run_files(
    cfg: ExperimentConfig,
    out_dir: Path,
    traj: Trajectory,
    provider: ExactProvider,
    report: TrainingReport | None = None,
) -> list[dict]:
    grid = traj.config.grid
    times = traj.times
    files: list[dict] = []

    def record(name: str, role: str) -> None:
        files.append({"name": name, "role": role})

    if cfg.output.write_solution:
        write_matrix_csv(out_dir / "solution.csv", times, traj.array)
        record("solution.csv", "solution")
    final = traj.states[-1]
    exact_final = provider(times[-1])
    write_columns_csv(
        out_dir / "final_state.csv",
        ["x", "u", "exact", "error"],
        [grid.cell_centers, final.values, exact_final.values,
         final.values - exact_final.values],
    )
    record("final_state.csv", "final_state")
    if cfg.output.write_error:
        write_matrix_csv(out_dir / "error.csv", times, error_field(traj, provider))
        record("error.csv", "error_field")
    if cfg.output.write_entropy:
        entropy = entropy_report(traj, include_dissipation=False)
        write_series_csv(out_dir / "entropy.csv", "t", "entropy", times, entropy.total_entropy)
        record("entropy.csv", "entropy_series")

    if report is not None:
        if cfg.output.write_mu:
            write_matrix_csv(out_dir / "mu.csv", times[:-1], report.final_mu.values)
            record("mu.csv", "mu_spacetime")
        mu_last = report.final_mu.values[-1]
        scale = float(np.max(np.abs(mu_last)))
        normalized = mu_last / scale if scale > 0 else np.zeros_like(mu_last)
        write_columns_csv(
            out_dir / "mu_final.csv",
            ["x_face", "mu_raw", "mu_normalized"],
            [grid.face_positions, mu_last, normalized],
        )
        record("mu_final.csv", "mu_snapshot")
        write_series_csv(
            out_dir / "loss_history.csv", "iter", "loss",
            np.arange(len(report.loss_history)), np.array(report.loss_history),
        )
        record("loss_history.csv", "loss_history")
    return files


def _finish_manifest(
    cfg: ExperimentConfig,
    out_dir: Path,
    files: list[dict],
    seed: int,
    t_start: float,
    status: str,
    extra: dict | None = None,
) -> None:
    files = files + [
        {"name": "summary.json", "role": "summary"},
        {"name": MANIFEST_NAME, "role": "manifest"},
    ]
    payload = {
        "config": config_to_dict(cfg),
        "version": __version__,
        "seed": seed,
        "wall_clock_seconds": time.time() - t_start,
        "status": status,
        "files": files,
    }
    if extra:
        payload.update(extra)
    write_manifest(out_dir, payload)


def cmd_run(cfg: ExperimentConfig, seed: int = 0) -> int:
    """Simulate the configured scheme and write solution/error/entropy artifacts."""
    t_start = time.time()
    out_dir = Path(cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    scheme_cfg, u0, provider = _build_problem(cfg)

    mu = None
    if cfg.scheme == "ftcs_mu":
        if cfg.mu is None:
            raise ConfigError("scheme 'ftcs_mu' requires the 'mu' key for plain runs")
        mu = FaceViscosity(np.full(cfg.n_cells, cfg.mu), scheme_cfg.grid)

    status = "ok"
    extra: dict = {}
    try:
        traj = simulate(u0, cfg.n_steps, scheme_cfg, scheme=cfg.scheme, mu=mu)
    except DivergenceError as err:
        status = "divergence"
        extra = {"diverged_at_step": err.step}
        traj = err.trajectory
        if traj is None or traj.n_steps == 0:
            traj = Trajectory(states=(u0,), config=scheme_cfg)

    files = _write_run_files(cfg, out_dir, traj, provider)
    if status == "divergence":
        for entry in files:
            entry["partial"] = True
    summary = {"stats": _trajectory_stats(cfg, traj, provider), "status": status}
    write_json(out_dir / "summary.json", summary)
    _finish_manifest(cfg, out_dir, files, seed, t_start, status, extra)
    return EXIT_OK if status == "ok" else EXIT_DIVERGENCE


def cmd_train(cfg: ExperimentConfig, seed: int | None = None) -> int:
    """Train the viscosity closure per the config and write all artifacts."""
    t_start = time.time()
    if cfg.training is None:
        raise ConfigError("training requires a [training] section")
    if cfg.scheme != "ftcs_mu":
        raise ConfigError("training requires scheme = ftcs_mu")
    if seed is not None:
        cfg = cfg.with_seed(seed)
    opt = cfg.training.optimizer

    out_dir = Path(cfg.output.directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    scheme_cfg, u0, provider = _build_problem(cfg)
    if cfg.n_steps < 1:
        raise ConfigError("training requires t_final >= dt (at least one step)")

    if cfg.training.mode == "per_step":
        report = train_per_step(u0, cfg.n_steps, scheme_cfg, opt, provider)
    else:
        report = train_global(u0, cfg.n_steps, scheme_cfg, opt, provider)

    if report.converged:
        status = "ok"
    elif cfg.training.mode == "per_step":
        status = "divergence"
    else:
        status = "no_convergence"

    files = _write_run_files(cfg, out_dir, report.trajectory, provider, report)
    if status != "ok":
        for entry in files:
            entry["partial"] = True
    entropy = entropy_report(report.trajectory, include_dissipation=False)
    s0 = entropy.total_entropy[0]
    summary = {
        "stats": _trajectory_stats(cfg, report.trajectory, provider),
        "mu": _mu_summary(cfg, report.final_mu, report.trajectory),
        "training": {
            "mode": cfg.training.mode,
            "converged": report.converged,
            "divergence_events": report.divergence_events,
            "loss_first": report.loss_history[0],
            "loss_last": report.loss_history[-1],
            "loss_best": min(report.loss_history),
            "n_recorded_losses": len(report.loss_history),
        },
        "verdicts": {
            "entropy_nonincreasing_global": bool(
                entropy.total_entropy[-1] <= entropy.total_entropy[0]
            ),
            "entropy_step_increase_warning": bool(
                np.max(entropy.per_step_delta, initial=0.0) > 1e-6 * s0
            ),
        },
        "status": status,
    }
    write_json(out_dir / "summary.json", summary)
    extra = {"diverged_at_step": report.trajectory.n_steps} if status == "divergence" else {}
    _finish_manifest(cfg, out_dir, files, opt.seed, t_start, status, extra)
    if status == "ok":
        return EXIT_OK
    return EXIT_DIVERGENCE if status == "divergence" else EXIT_NO_CONVERGENCE


def _equivalence_check(cfg: ExperimentConfig, times: np.ndarray, states: np.ndarray) -> tuple[str, float] | None:
    """Replay stored states with the twin stepper; returns (description, max error)."""
    scheme_cfg = cfg.scheme_config()
    grid = scheme_cfg.grid
    if cfg.scheme == "upwind":
        mu_value = abs(cfg.c) * grid.dx / 2.0
        label = f"upwind == ftcs_mu at mu={mu_value:g}"
    elif cfg.scheme == "lax_wendroff":
        mu_value = cfg.c**2 * cfg.dt / 2.0
        label = f"lax_wendroff == ftcs_mu at mu={mu_value:g}"
    elif cfg.scheme == "ftcs_mu":
        mu_value = cfg.mu
        if mu_value is None:
            return None
        label = f"stored states reproduce ftcs_mu at mu={mu_value:g}"
    else:
        return None
    mu = FaceViscosity(np.full(grid.n_cells, mu_value), grid)
    worst = 0.0
    for n in range(len(states) - 1):
        stepped = ftcs_step(CellField(states[n], grid), mu, scheme_cfg).values
        scale = max(float(np.max(np.abs(states[n + 1]))), 1.0)
        worst = max(worst, float(np.max(np.abs(stepped - states[n + 1]))) / scale)
    return label, worst


def cmd_analyze(directory: str | Path) -> int:
    """Recompute diagnostics from stored CSVs and verify them against the summary."""
    out_dir = Path(directory)
    manifest = read_manifest(out_dir)
    cfg = config_from_dict(manifest["config"])
    summary = read_json(out_dir / "summary.json")
    listed = {entry["name"] for entry in manifest["files"]}

    checks: list[dict] = []

    def check(name: str, passed: bool, detail: str) -> None:
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    missing = sorted(name for name in listed if not (out_dir / name).is_file())
    unlisted = sorted(
        p.name for p in out_dir.iterdir()
        if p.is_file() and p.name not in listed and p.name != ANALYSIS_NAME
    )
    check("manifest_complete", not missing and not unlisted,
          f"missing={missing} unlisted={unlisted}")

    scheme_cfg, _, provider = _build_problem(cfg)
    grid = scheme_cfg.grid
    tolerance = 1e-12

    if "solution.csv" in listed:
        times, states = read_matrix_csv(out_dir / "solution.csv")
        recomputed = {
            "mse_final": float(np.mean((states[-1] - provider(times[-1]).values) ** 2)),
            "entropy_initial": 0.5 * float(np.sum(states[0] ** 2)) * grid.dx,
            "entropy_final": 0.5 * float(np.sum(states[-1] ** 2)) * grid.dx,
            "total_variation_final": float(np.sum(np.abs(np.roll(states[-1], -1) - states[-1]))),
            "mass_initial": float(np.sum(states[0])) * grid.dx,
            "mass_final": float(np.sum(states[-1])) * grid.dx,
            "max_abs_final": float(np.max(np.abs(states[-1]))),
        }
        entropy_series = 0.5 * np.sum(states * states, axis=1) * grid.dx
        recomputed["max_per_step_entropy_increase"] = float(
            np.max(np.diff(entropy_series), initial=0.0)
        )
        stored_stats = summary.get("stats", {})
        for key, value in recomputed.items():
            stored = stored_stats.get(key)
            if stored is None:
                continue
            ok = abs(stored - value) <= tolerance * max(1.0, abs(stored))
            check(f"stat:{key}", ok, f"stored={stored!r} recomputed={value!r}")

        if "entropy.csv" in listed:
            _, stored_entropy = read_series_csv(out_dir / "entropy.csv")
            ok = np.allclose(stored_entropy, entropy_series, rtol=0, atol=tolerance)
            check("entropy_series_consistent", ok,
                  f"max diff {np.max(np.abs(stored_entropy - entropy_series)):.3e}")

        equivalence = _equivalence_check(cfg, times, states)
        if equivalence is not None:
            label, worst = equivalence
            check("scheme_equivalence", worst < 1e-13, f"{label}: max rel err {worst:.3e}")

        if "mu.csv" in listed and cfg.scheme == "ftcs_mu":
            _, mu_values = read_matrix_csv(out_dir / "mu.csv")
            worst = 0.0
            for n in range(len(mu_values)):
                stepped = ftcs_step(
                    CellField(states[n], grid), FaceViscosity(mu_values[n], grid), scheme_cfg
                ).values
                scale = max(float(np.max(np.abs(states[n + 1]))), 1.0)
                worst = max(worst, float(np.max(np.abs(stepped - states[n + 1]))) / scale)
            check("stored_steps_consistent", worst < 1e-13, f"max rel err {worst:.3e}")
            stored_mu = summary.get("mu", {})
            recomputed_mu = {
                "mu_min": float(np.min(mu_values)),
                "mu_max": float(np.max(mu_values)),
                "fraction_negative": float(np.mean(mu_values < 0)),
            }
            for key, value in recomputed_mu.items():
                stored = stored_mu.get(key)
                if stored is None:
                    continue
                ok = abs(stored - value) <= tolerance * max(1.0, abs(stored))
                check(f"mu:{key}", ok, f"stored={stored!r} recomputed={value!r}")

    check("run_status_ok", manifest.get("status") == "ok",
          f"status={manifest.get('status')!r}")

    all_passed = all(entry["passed"] for entry in checks)
    write_json(out_dir / ANALYSIS_NAME, {"checks": checks, "all_passed": all_passed})
    width = max(len(entry["name"]) for entry in checks)
    for entry in checks:
        flag = "PASS" if entry["passed"] else "FAIL"
        print(f"{entry['name']:<{width}}  {flag}  {entry['detail']}")
    return EXIT_OK if all_passed else EXIT_CHECK_FAILED


def _oracle_mses(cfg: ExperimentConfig) -> dict:
    """Final-time MSE of the classical baselines on the same problem."""
    scheme_cfg, u0, provider = _build_problem(cfg)
    exact_final = provider(cfg.n_steps * cfg.dt)
    out = {}
    for scheme in ("upwind", "lax_wendroff"):
        traj = simulate(u0, cfg.n_steps, scheme_cfg, scheme=scheme)
        out[f"mse_{scheme}"] = mse(traj.states[-1], exact_final)
    return out


def cmd_reproduce(preset: str, out_root: str | Path, seed: int | None = None) -> int:
    """Run a named preset end to end and write a comparison summary."""
    if preset not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {preset!r}; choose one of {PRESET_NAMES}")
    t_start = time.time()
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)

    base = preset_config(preset)
    if seed is not None:
        base = base.with_seed(seed)

    def train_into(config: ExperimentConfig, subdir: str) -> dict:
        config = config.with_output_dir(str(out_root / subdir))
        code = cmd_train(config)
        if code != EXIT_OK:
            raise DivergenceError(f"preset training run '{subdir}' failed with exit {code}")
        return read_json(out_root / subdir / "summary.json")

    comparison: dict = {"preset": preset, "oracles": _oracle_mses(base)}
    subruns: list[str] = []

    if preset == "paper-hat":
        summary = train_into(base, "learned")
        subruns = ["learned"]
        comparison["learned"] = summary
        comparison["claims"] = {
            "mse_learned_below_upwind": summary["stats"]["mse_final"]
            < comparison["oracles"]["mse_upwind"],
            "min_mu_negative": summary["mu"]["mu_min"] < 0,
            "entropy_nonincreasing_global": summary["verdicts"]["entropy_nonincreasing_global"],
        }
    elif preset == "paper-hat-nonneg":
        signed_cfg = preset_config("paper-hat")
        if seed is not None:
            signed_cfg = signed_cfg.with_seed(seed)
        nonneg = train_into(base, "learned-nonneg")
        signed = train_into(signed_cfg, "learned-signed")
        subruns = ["learned-nonneg", "learned-signed"]
        comparison["learned_nonneg"] = nonneg
        comparison["learned_signed"] = signed
        comparison["claims"] = {
            "nonneg_amplitude_not_above_signed": nonneg["stats"]["max_abs_final"]
            <= signed["stats"]["max_abs_final"],
            "nonneg_mu_min_nonnegative": nonneg["mu"]["mu_min"] >= 0.0,
        }
    else:  # sine-smooth
        signed = train_into(base, "signed")
        nonneg = train_into(nonneg_variant(base), "nonneg")
        subruns = ["signed", "nonneg"]
        comparison["signed"] = signed
        comparison["nonneg"] = nonneg
        comparison["claims"] = {
            "constrained_amplitude_below_signed": nonneg["stats"]["max_abs_final"]
            < signed["stats"]["max_abs_final"],
            "signed_mu_min_negative": signed["mu"]["mu_min"] < 0,
        }

    write_json(out_root / "comparison.json", comparison)
    payload = {
        "preset": preset,
        "version": __version__,
        "seed": seed if seed is not None else base.training.optimizer.seed,
        "wall_clock_seconds": time.time() - t_start,
        "status": "ok",
        "files": [
            {"name": "comparison.json", "role": "comparison"},
            {"name": MANIFEST_NAME, "role": "manifest"},
        ],
        "subruns": subruns,
    }
    write_manifest(out_root, payload)
    for name, passed in comparison["claims"].items():
        print(f"{name}: {'PASS' if passed else 'FAIL'}")
    return EXIT_OK


def _load_for(args: argparse.Namespace) -> ExperimentConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("provide exactly one of --config PATH or --preset NAME")
    if args.config:
        cfg = load_config(args.config)
    else:
        if args.preset not in PRESET_NAMES:
            raise ConfigError(f"unknown preset {args.preset!r}; choose one of {PRESET_NAMES}")
        cfg = preset_config(args.preset)
    out_override = args.out or os.environ.get("ADVISC_OUT")
    if out_override:
        cfg = cfg.with_output_dir(out_override)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="advisc",
        description="Learned artificial-viscosity closures for 1D linear advection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (
        ("run", "simulate a scheme and write CSV artifacts"),
        ("train", "train a viscosity closure and write CSV artifacts"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="path to an experiment config file")
        p.add_argument("--preset", help="named preset instead of a config file")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--seed", type=int, default=None, help="seed override")

    p = sub.add_parser("analyze", help="verify a finished run directory")
    p.add_argument("directory", help="run directory containing a manifest")

    p = sub.add_parser("reproduce", help="run a named preset end to end")
    p.add_argument("--preset", required=True, help=f"one of {', '.join(PRESET_NAMES)}")
    p.add_argument("--out", default=None, help="output directory (default: preset name)")
    p.add_argument("--seed", type=int, default=None, help="seed override")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = _load_for(args)
            if args.seed is not None:
                cfg = cfg.with_seed(args.seed)
            return cmd_run(cfg, seed=args.seed or 0)
        if args.command == "train":
            cfg = _load_for(args)
            return cmd_train(cfg, seed=args.seed)
        if args.command == "analyze":
            return cmd_analyze(args.directory)
        out = args.out or os.environ.get("ADVISC_OUT") or args.preset
        return cmd_reproduce(args.preset, out, seed=args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as err:
        print(f"divergence: {err}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (OSError, FileNotFoundError, ValueError) as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
