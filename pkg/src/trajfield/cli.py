"""Command-line driver for the experiment lifecycle.

Subcommands: generate, targets, train, rollout, eval, mpc, verify.
Exit codes: 0 success, 2 usage/configuration problems, 3 numerical
failures (divergence, instability, lost constraints).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import io as tio
from . import learning, mpc, presets, verify
from .derivatives import accel_targets
from .errors import (ConfigError, DivergenceError, KinematicLockError,
                     ParseError, ProjectionError, SingularConfigurationError)
from .integrators import Trajectory
from .systems import slider_crank_reconstruct

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _out_dir(args) -> Path:
    out = args.out if getattr(args, "out", None) else None
    if out is None:
        out = os.environ.get("TRAJFIELD_OUT", ".")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _writable(path) -> Path:
    """Output file path with its parent directory created if needed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _load_config(args) -> presets.RunConfig:
    cfg = tio.parse_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _fmt(x: float) -> str:
    return "%.17g" % x


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    full = presets.generate_ground_truth(cfg)
    train, test = presets.split_trajectory(full, cfg.train_steps)
    stem = cfg.benchmark
    tio.write_trajectory(full, out / f"{stem}_full.csv")
    tio.write_trajectory(train, out / f"{stem}_train.csv")
    tio.write_trajectory(test, out / f"{stem}_test.csv")
    written = [f"{stem}_full.csv", f"{stem}_train.csv", f"{stem}_test.csv"]
    if cfg.control == "multisine":
        for i, seg in enumerate(presets.generate_excitation(cfg)):
            name = f"{stem}_excite_{i:02d}.csv"
            tio.write_trajectory(seg, out / name)
            written.append(name)
    print(f"wrote {', '.join(written)} to {out}")
    return EXIT_OK


def cmd_targets(args) -> int:
    cfg = tio.parse_config(args.config) if args.config else None
    diff = cfg.diff if cfg else None
    traj = tio.read_trajectory(args.data)
    traj.accels = accel_targets(traj, diff)
    tio.write_trajectory(traj, _writable(args.out))
    print(f"wrote targets for {traj.states.shape[0]} samples to {args.out}")
    return EXIT_OK


def _prepare_datasets(cfg, paths):
    datasets = []
    for path in paths:
        traj = tio.read_trajectory(path)
        if cfg.benchmark == "slider_crank" and cfg.coords == "minimal":
            traj = learning.select_coordinates(traj, [2])
        datasets.append(learning.build_dataset(traj, cfg.diff))
    return learning.merge_datasets(datasets)


def cmd_train(args) -> int:
    cfg = _load_config(args)
    dataset = _prepare_datasets(cfg, args.data)
    train_cfg = dataclasses.replace(cfg.train, seed=cfg.seed)
    model, history = learning.train(dataset, train_cfg)
    learning.save_checkpoint(model, _writable(args.out))
    msgs = [f"model -> {args.out}"]
    if args.loss_out:
        with open(_writable(args.loss_out), "w") as fh:
            fh.write("epoch,loss\n")
            for i, loss in enumerate(history):
                fh.write(f"{i},{_fmt(loss)}\n")
        msgs.append(f"loss history -> {args.loss_out}")
        if args.figures:
            from . import figures

            png = Path(args.loss_out).with_suffix(".png")
            figures.save_loss_curve(history, png)
            msgs.append(f"figure -> {png}")
    print(f"trained {dataset.inputs.shape[0]} samples for "
          f"{train_cfg.epochs} epochs, final loss {history[-1]:.6e}; "
          + ", ".join(msgs))
    return EXIT_OK


def _initial_state(args, cfg) -> np.ndarray:
    if args.init is not None:
        return np.array([float(tok) for tok in args.init.split()])
    if args.from_file is not None:
        return tio.read_trajectory(args.from_file).states[0]
    return cfg.init_state


def cmd_rollout(args) -> int:
    cfg = _load_config(args)
    model = learning.load_checkpoint(args.checkpoint)
    integ = cfg.make_integrator()
    n_steps = args.steps if args.steps is not None else cfg.total_steps
    z0 = _initial_state(args, cfg)

    minimal = (cfg.benchmark == "slider_crank"
               and model.net.dims[0] == 2 * model.n_out == 2)
    if minimal and z0.shape[0] == 18:
        z0 = z0[[2, 11]]  # crank angle and rate from a full state
    expected = 2 * model.n_out
    if z0.shape[0] != expected:
        raise ConfigError(f"initial state has {z0.shape[0]} values but the "
                          f"checkpoint expects {expected}")
    controls = None
    if model.n_inputs > 0:
        controls = np.zeros((n_steps, model.n_inputs))
    pred = learning.rollout_learned(model, z0, integ, n_steps,
                                    controls=controls, t0=cfg.t0)
    if minimal:
        rows = np.empty((pred.states.shape[0], 18))
        for i, (th1, w1) in enumerate(pred.states):
            q, qd = slider_crank_reconstruct(th1, w1, cfg.params)
            rows[i] = np.concatenate((q, qd))
        pred = Trajectory(t0=pred.t0, dt=pred.dt, states=rows)
    tio.write_trajectory(pred, _writable(args.out))
    print(f"rolled out {n_steps} steps -> {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    pred = tio.read_trajectory(args.pred)
    truth = tio.read_trajectory(args.truth)
    if args.train_steps is not None:
        split = args.train_steps
    elif args.config:
        split = tio.parse_config(args.config).train_steps
    else:
        raise ConfigError("eval needs --train-steps or --config to place "
                          "the train/test window split")
    total, train_w, test_w = learning.windowed_mse(pred, truth, split)
    print(f"{'window':<8} {'rows':>12} {'mse':>14}")
    n = truth.states.shape[0]
    print(f"{'total':<8} {f'0..{n - 1}':>12} {total:>14.6e}")
    print(f"{'train':<8} {f'0..{split - 1}':>12} {train_w:>14.6e}")
    print(f"{'test':<8} {f'{split}..{n - 1}':>12} {test_w:>14.6e}")
    print("mse_total,mse_train_window,mse_test_window")
    line = f"{_fmt(total)},{_fmt(train_w)},{_fmt(test_w)}"
    print(line)
    if args.out:
        with open(_writable(args.out), "w") as fh:
            fh.write("mse_total,mse_train_window,mse_test_window\n")
            fh.write(line + "\n")
    if args.figures:
        from . import figures

        stem = Path(args.pred).stem
        fig_dir = Path(args.figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        figures.save_state_comparison(truth, pred,
                                      fig_dir / f"{stem}_states.png")
        figures.save_phase_portrait(truth, pred,
                                    fig_dir / f"{stem}_phase.png")
        print(f"figures -> {fig_dir}")
    return EXIT_OK


def cmd_mpc(args) -> int:
    cfg = _load_config(args)
    if cfg.benchmark != "cartpole":
        raise ConfigError("the mpc command drives the cartpole benchmark")
    mpc_cfg = mpc.MpcConfig(horizon=cfg.mpc_horizon, q_diag=cfg.mpc_q,
                            r=cfg.mpc_r, dt=cfg.dt, u_max=cfg.mpc_u_max)
    if args.checkpoint:
        controller = learning.load_checkpoint(args.checkpoint)
        label = "learned"
    else:
        controller = mpc.linearize_analytic(cfg.params)
        label = "analytic"
    traj = mpc.closed_loop(cfg.params, controller, mpc_cfg, cfg.mpc_init,
                           cfg.mpc_steps)
    tio.write_trajectory(traj, _writable(args.out))
    final = traj.states[-1]
    print(f"{label} controller: {cfg.mpc_steps} steps, final "
          f"theta={final[0]:.4f} x={final[1]:.4f} -> {args.out}")
    if args.figures:
        from . import figures

        png = Path(args.out).with_suffix(".png")
        figures.save_control_panels({label: traj}, png)
        print(f"figure -> {png}")
    return EXIT_OK


def cmd_verify(args) -> int:
    ok = verify.run_suites(args.suite or None)
    return EXIT_OK if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trajfield",
        description="Learn acceleration fields of mechanical systems from "
                    "trajectory data and evaluate them by rollout.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("generate", cmd_generate,
            "write ground-truth train/test trajectories for a benchmark")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (default $TRAJFIELD_OUT "
                                 "or '.')")
    p.add_argument("--seed", type=int)

    p = add("targets", cmd_targets,
            "differentiate a trajectory file and write it back with "
            "acceleration columns")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--seed", type=int)

    p = add("train", cmd_train, "fit the acceleration field of a benchmark")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True, nargs="+")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--loss-out", help="write per-epoch loss CSV here")
    p.add_argument("--figures", action="store_true",
                   help="render the loss curve next to --loss-out")
    p.add_argument("--seed", type=int)

    p = add("rollout", cmd_rollout, "integrate a trained field")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--init", help="space-separated initial state")
    p.add_argument("--from-file", help="take the initial state from this "
                                       "trajectory file")
    p.add_argument("--seed", type=int)

    p = add("eval", cmd_eval, "report rollout error against a reference")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--train-steps", type=int)
    p.add_argument("--config")
    p.add_argument("--out", help="also write the CSV metrics line here")
    p.add_argument("--figures", help="directory for comparison figures")
    p.add_argument("--seed", type=int)

    p = add("mpc", cmd_mpc, "closed-loop cart-pole stabilization")
    p.add_argument("--config", required=True)
    p.add_argument("--checkpoint", help="learned model; omit for the "
                                        "analytic linearization")
    p.add_argument("--out", required=True)
    p.add_argument("--figures", action="store_true")
    p.add_argument("--seed", type=int)

    p = add("verify", cmd_verify, "run numerical self-check suites")
    p.add_argument("--suite", action="append",
                   help=f"suite name (repeatable); available: "
                        f"{', '.join(verify.SUITES)}")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParseError, KinematicLockError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, ProjectionError,
            SingularConfigurationError) as exc:
        step = getattr(exc, "step", None)
        where = f" (step {step})" if step is not None else ""
        print(f"numerical failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
