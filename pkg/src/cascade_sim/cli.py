"""Command-line front end writing deterministic CSV/JSON.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, analytic, lindblad, ode, trajectories
from .figures import FIGURE_PARAMS, FIGURES
from .io import digest, fmt, read_series, write_csv, write_json
from .model import ConfigError, load_params
from .observables import (DetectorConfig, DivergenceError, GridMismatchError, NOISE_FLOOR,
                          UndefinedModeError, detection_probability, p_rad_infty,
                          reconstruct_concurrence, single_cavity_detection)

EVOLVE_HEADER = ["t", "re_alpha", "im_alpha", "re_beta", "im_beta", "re_gamma", "im_gamma",
                 "re_delta", "im_delta", "prob_a", "prob_b", "prob_c", "prob_d", "prob_e"]
RECONSTRUCT_HEADER = ["t", "beta_abs", "delta_abs", "concurrence_est", "flag"]

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _grid(t_max: float, steps: int) -> np.ndarray:
    if not t_max > 0:
        raise UsageError("--t-max must be positive")
    if steps < 2:
        raise UsageError("--steps must be at least 2")
    return np.linspace(0.0, t_max, steps)


def _cfg(args) -> ode.IntegratorConfig:
    try:
        return ode.IntegratorConfig(args.rel_tol, args.abs_tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _manifest(out: Path, engine: str, params, grid: dict, seed, outputs: list[Path]) -> None:
    doc = {
        "config_digest": digest(params.to_dict()) if params is not None else None,
        "engine": engine,
        "grid": grid,
        "seed": seed,
        "version": __version__,
        "outputs": [p.name for p in outputs],
    }
    write_json(out, doc)


def cmd_evolve(args) -> int:
    p = load_params(args.config)
    grid = _grid(args.t_max, args.steps)
    cfg = _cfg(args)
    if args.engine == "analytic":
        psi = analytic.amplitudes(p, grid).vector()
    elif args.engine == "ode":
        psi = ode.integrate_array(p, grid, cfg=cfg)
    else:
        rho = lindblad.evolve_master(p, grid, cfg=cfg)
        # phases of the amplitudes are not recoverable from rho; only populations are
        pops = np.einsum("tii->ti", rho).real[:, :4]
        psi = None
    if psi is not None:
        pops = np.abs(psi) ** 2
    rows = []
    for i, t in enumerate(grid):
        amps = ([np.nan] * 8 if psi is None
                else [x for z in psi[i] for x in (z.real, z.imag)])
        prob = list(pops[i])
        rows.append([t, *amps, *prob, 1.0 - sum(prob)])
    out = Path(args.out)
    write_csv(out, EVOLVE_HEADER, rows)
    _manifest(Path(f"{out}.manifest.json"), args.engine, p,
              {"t_max": args.t_max, "steps": args.steps}, None, [out])
    return 0


def cmd_figure(args) -> int:
    p = load_params(args.config) if args.config else FIGURE_PARAMS
    grid = _grid(args.t_max, args.steps)
    curves = FIGURES[args.which](grid, p)
    rows = [[t, v, name] for name, values in curves.items() for t, v in zip(grid, values)]
    out = Path(args.out)
    write_csv(out, ["t", "value", "variant"], rows)
    _manifest(Path(f"{out}.manifest.json"), f"figure:{args.which}", p,
              {"t_max": args.t_max, "steps": args.steps}, None, [out])
    return 0


def cmd_trajectories(args) -> int:
    p = load_params(args.config)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    if not args.horizon > 0:
        raise UsageError("--horizon must be positive")
    grid = _grid(args.horizon, args.steps)
    summary = trajectories.run_ensemble(p, args.horizon, args.n, args.seed, grid,
                                        bins=args.bins, cfg=_cfg(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    hist_path, pop_path, summary_path = out / "histogram.csv", out / "populations.csv", out / "summary.json"
    edges = summary.bin_edges
    write_csv(hist_path, ["t_lo", "t_hi", "count"],
              [[edges[i], edges[i + 1], int(c)] for i, c in enumerate(summary.click_histogram)])
    write_csv(pop_path, ["t", "prob_a", "prob_b", "prob_c", "prob_d", "prob_e"],
              [[t, *row] for t, row in zip(grid, summary.population_series)])
    counts = summary.channel_counts
    write_json(summary_path, {
        "n_traj": summary.n_traj,
        "horizon": summary.horizon,
        "seed": args.seed,
        "channel_counts": {"no_jump": int(counts[0]),
                           **{str(i): int(counts[i]) for i in range(1, 6)}},
        "p_rad_estimate": float(summary.p_rad_estimate),
        "p_rad_stderr": summary.p_rad_stderr,
    })
    _manifest(out / "manifest.json", "trajectories", p,
              {"horizon": args.horizon, "steps": args.steps, "bins": args.bins, "n": args.n},
              args.seed, [summary_path, hist_path, pop_path])
    return 0


def cmd_detect(args) -> int:
    p = load_params(args.config)
    grid = _grid(args.t_max, args.steps)
    try:
        det = DetectorConfig(args.eta, args.t_bin)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.single_cavity:
        values = single_cavity_detection(p, grid, det)
    else:
        values = detection_probability(p, grid, det)
    out = Path(args.out)
    write_csv(out, ["t", "p_d"], zip(grid, values))
    return 0


def cmd_reconstruct(args) -> int:
    try:
        det = DetectorConfig(args.eta, args.t_bin)
        t, pd, _ = read_series(args.pd)
        t1, pd1, _ = read_series(args.pd_prime)
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None
    if t.shape != t1.shape or not np.array_equal(t, t1):
        raise GridMismatchError("--pd and --pd-prime have different t columns")
    rec = reconstruct_concurrence(pd, pd1, det, args.kappa, t=t, noise_floor=args.noise_floor)
    rows = zip(rec.t, rec.beta_abs, rec.delta_abs, rec.concurrence, rec.flags)
    write_csv(Path(args.out), RECONSTRUCT_HEADER, rows)
    return 0


def cmd_prad(args) -> int:
    p = load_params(args.config)
    print(fmt(p_rad_infty(p, _cfg(args))))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascade-sim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def tolerances(sp):
        sp.add_argument("--rel-tol", type=float, default=1e-10)
        sp.add_argument("--abs-tol", type=float, default=1e-12)

    sp = sub.add_parser("evolve", help="no-jump amplitudes and populations on a time grid")
    sp.add_argument("config")
    sp.add_argument("--engine", choices=("analytic", "ode", "lindblad"), default="analytic")
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--steps", type=int, default=1001)
    sp.add_argument("--out", required=True)
    tolerances(sp)
    sp.set_defaults(func=cmd_evolve)

    sp = sub.add_parser("figure", help="curve data of the interference / mode figures")
    sp.add_argument("--which", choices=sorted(FIGURES), required=True)
    sp.add_argument("--config", help="override the built-in figure parameters")
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--steps", type=int, default=1001)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_figure)

    sp = sub.add_parser("trajectories", help="quantum-jump Monte Carlo ensemble")
    sp.add_argument("config")
    sp.add_argument("--n", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--horizon", type=float, default=trajectories.DEFAULT_HORIZON)
    sp.add_argument("--bins", type=int, default=trajectories.DEFAULT_BINS)
    sp.add_argument("--steps", type=int, default=201, help="population grid points")
    sp.add_argument("--out", required=True, help="output directory")
    tolerances(sp)
    sp.set_defaults(func=cmd_trajectories)

    sp = sub.add_parser("detect", help="detector click probability series")
    sp.add_argument("config")
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--t-bin", type=float, default=0.01)
    sp.add_argument("--t-max", type=float, default=10.0)
    sp.add_argument("--steps", type=int, default=1001)
    sp.add_argument("--single-cavity", action="store_true",
                    help="only cavity A present (the reference measurement)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("reconstruct", help="concurrence from two click-probability series")
    sp.add_argument("--pd", required=True, help="CSV of the two-cavity measurement")
    sp.add_argument("--pd-prime", required=True, help="CSV of the cavity-A-only measurement")
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--t-bin", type=float, required=True)
    sp.add_argument("--kappa", type=float, required=True)
    sp.add_argument("--noise-floor", type=float, default=NOISE_FLOOR)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_reconstruct)

    sp = sub.add_parser("prad", help="print the total detected-emission probability")
    sp.add_argument("config")
    tolerances(sp)
    sp.set_defaults(func=cmd_prad)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError, GridMismatchError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ode.IntegrationError, DivergenceError, UndefinedModeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

