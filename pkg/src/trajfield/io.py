"""Trajectory files and run configuration files.

Trajectories are comma-separated text with header
`t,q0..q{n-1},v0..v{n-1}[,a0..a{n-1}][,u0..u{m-1}]` and one row per
sample, written with 17 significant digits so values round-trip
exactly.  Run configurations are flat `key = value` text; `#` starts a
comment, unknown and duplicate keys are rejected.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .derivatives import METHODS, DiffConfig
from .errors import ConfigError, ParseError
from .integrators import SCHEMES, Trajectory
from .learning import TrainConfig
from .mlp import ACTIVATIONS, INIT_SCHEMES
from .presets import BENCHMARKS, RunConfig, default_config, param_keys, validate_config

_FMT = "%.17g"


def _fmt(x: float) -> str:
    return _FMT % x


def write_trajectory(traj: Trajectory, path) -> None:
    n = traj.n_coords
    names = ["t"]
    names += [f"q{i}" for i in range(n)]
    names += [f"v{i}" for i in range(n)]
    blocks = [traj.states]
    if traj.accels is not None:
        names += [f"a{i}" for i in range(n)]
        blocks.append(traj.accels)
    if traj.inputs is not None:
        names += [f"u{i}" for i in range(traj.inputs.shape[1])]
        blocks.append(traj.inputs)
    data = np.hstack(blocks)
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for i, row in enumerate(data):
            t = traj.t0 + i * traj.dt
            fh.write(",".join([_fmt(t)] + [_fmt(v) for v in row]) + "\n")


def _parse_header(header: str) -> tuple[int, int, int]:
    """Returns (n_coords, n_accels, n_inputs) from the column names."""
    names = [c.strip() for c in header.split(",")]
    if not names or names[0] != "t":
        raise ParseError("first column must be 't'", line=1)
    idx = 1

    def run(prefix):
        nonlocal idx
        count = 0
        while idx < len(names) and names[idx] == f"{prefix}{count}":
            idx += 1
            count += 1
        return count

    nq = run("q")
    nv = run("v")
    na = run("a")
    nu = run("u")
    if idx != len(names):
        raise ParseError(f"unexpected column {names[idx]!r}", line=1)
    if nq == 0 or nv != nq or na not in (0, nq):
        raise ParseError(f"bad column layout: {nq} positions, {nv} "
                         f"velocities, {na} accelerations", line=1)
    return nq, na, nu


def read_trajectory(path) -> Trajectory:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError(f"{path}: no header (empty file)", line=1)
    nq, na, nu = _parse_header(lines[0])
    width = 1 + 2 * nq + na + nu
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise ParseError(f"{path}: expected {width} columns, got "
                             f"{len(parts)}", line=lineno)
        try:
            row = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}", line=lineno) from exc
        if not all(math.isfinite(v) for v in row):
            raise ParseError(f"{path}: non-finite value", line=lineno)
        rows.append(row)
    if len(rows) < 2:
        raise ParseError(f"{path}: need at least two data rows",
                         line=len(lines))
    data = np.array(rows)
    t = data[:, 0]
    dt = t[1] - t[0]
    if not dt > 0.0:
        raise ParseError(f"{path}: time must increase", line=3)
    expected = t[0] + dt * np.arange(len(rows))
    bad = np.nonzero(np.abs(t - expected) > 1e-9 * max(1.0, abs(t[-1])))[0]
    if bad.size:
        raise ParseError(f"{path}: non-uniform time step at row "
                         f"{bad[0]}", line=int(bad[0]) + 2)
    states = data[:, 1:1 + 2 * nq]
    accels = data[:, 1 + 2 * nq:1 + 2 * nq + na] if na else None
    inputs = data[:, 1 + 2 * nq + na:] if nu else None
    return Trajectory(t0=float(t[0]), dt=float(dt), states=states,
                      accels=accels, inputs=inputs)


# ---------------------------------------------------------------------------
# run configuration files


def _to_int(key, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key} expects an integer, got {value!r}",
                          key=key) from None


def _to_float(key, value):
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"{key} expects a number, got {value!r}",
                          key=key) from None
    if not math.isfinite(out):
        raise ConfigError(f"{key} must be finite", key=key)
    return out


def _to_floats(key, value, count=None):
    out = np.array([_to_float(key, tok) for tok in value.split()])
    if count is not None and out.shape[0] != count:
        raise ConfigError(f"{key} expects {count} values, got "
                          f"{out.shape[0]}", key=key)
    return out


def _to_choice(key, value, choices):
    if value not in choices:
        raise ConfigError(f"{key} must be one of {choices}, got {value!r}",
                          key=key)
    return value


def _apply_key(cfg: RunConfig, key: str, value: str) -> None:
    pkeys = param_keys(cfg)
    if key in pkeys:
        try:
            cfg.params = dataclasses.replace(cfg.params,
                                             **{key: _to_float(key, value)})
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", key=key) from None
        return
    if key == "seed":
        cfg.seed = _to_int(key, value)
    elif key == "dt":
        cfg.dt = _to_float(key, value)
        if not cfg.dt > 0.0:
            raise ConfigError(f"dt must be positive, got {cfg.dt}", key=key)
    elif key == "t0":
        cfg.t0 = _to_float(key, value)
    elif key == "integrator":
        cfg.integrator = _to_choice(key, value, SCHEMES)
    elif key == "train_steps":
        cfg.train_steps = _to_int(key, value)
    elif key == "test_steps":
        cfg.test_steps = _to_int(key, value)
    elif key == "init_state":
        cfg.init_state = _to_floats(key, value)
    elif key == "coords":
        cfg.coords = _to_choice(key, value, ("full", "minimal"))
    elif key == "control":
        cfg.control = _to_choice(key, value, ("none", "multisine"))
    elif key == "excite_segments":
        cfg.excite_segments = _to_int(key, value)
    elif key == "excite_steps":
        cfg.excite_steps = _to_int(key, value)
    elif key == "excite_u_amp":
        cfg.excite_u_amp = _to_float(key, value)
    elif key == "excite_dt":
        cfg.excite_dt = None if value == "auto" else _to_float(key, value)
    elif key == "diff_method":
        cfg.diff = dataclasses.replace(cfg.diff,
                                       method=_to_choice(key, value, METHODS))
    elif key == "diff_alpha":
        cfg.diff = dataclasses.replace(cfg.diff, alpha=_to_float(key, value))
    elif key == "diff_sigma":
        sigma = None if value == "auto" else _to_float(key, value)
        cfg.diff = dataclasses.replace(cfg.diff, sigma=sigma)
    elif key == "diff_mirror_len":
        m = None if value == "auto" else _to_int(key, value)
        cfg.diff = dataclasses.replace(cfg.diff, mirror_len=m)
    elif key == "diff_margin":
        m = None if value == "auto" else _to_int(key, value)
        cfg.diff = dataclasses.replace(cfg.diff, boundary_margin=m)
    elif key == "epochs":
        cfg.train = dataclasses.replace(cfg.train, epochs=_to_int(key, value))
    elif key == "lr":
        cfg.train = dataclasses.replace(cfg.train, lr=_to_float(key, value))
    elif key == "lr_decay":
        cfg.train = dataclasses.replace(cfg.train,
                                        lr_decay=_to_float(key, value))
    elif key == "width":
        cfg.train = dataclasses.replace(cfg.train, width=_to_int(key, value))
    elif key == "depth":
        cfg.train = dataclasses.replace(cfg.train, depth=_to_int(key, value))
    elif key == "activation":
        cfg.train = dataclasses.replace(
            cfg.train, activation=_to_choice(key, value, ACTIVATIONS))
    elif key == "init_scheme":
        cfg.train = dataclasses.replace(
            cfg.train, init_scheme=_to_choice(key, value, INIT_SCHEMES))
    elif key == "batch_size":
        size = None if value == "full" else _to_int(key, value)
        cfg.train = dataclasses.replace(cfg.train, batch_size=size)
    elif key == "mpc_horizon":
        cfg.mpc_horizon = _to_int(key, value)
    elif key == "mpc_steps":
        cfg.mpc_steps = _to_int(key, value)
    elif key == "mpc_q":
        cfg.mpc_q = _to_floats(key, value, count=4)
    elif key == "mpc_r":
        cfg.mpc_r = _to_float(key, value)
    elif key == "mpc_u_max":
        cfg.mpc_u_max = None if value == "none" else _to_float(key, value)
    elif key == "mpc_init":
        cfg.mpc_init = _to_floats(key, value, count=4)
    else:
        raise ConfigError(f"unknown key {key!r} for benchmark "
                          f"{cfg.benchmark}", key=key)


def parse_config(path) -> RunConfig:
    """Parse a flat key = value run configuration file."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    pairs: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ParseError(f"{path}:{lineno}: expected 'key = value'",
                             line=lineno)
        key, _, value = text.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ParseError(f"{path}:{lineno}: empty key or value",
                             line=lineno)
        if key in pairs:
            raise ParseError(f"{path}:{lineno}: duplicate key {key!r}",
                             line=lineno)
        pairs[key] = (value, lineno)

    if "benchmark" not in pairs:
        raise ConfigError("config must set 'benchmark'", key="benchmark")
    bench = pairs.pop("benchmark")[0]
    if bench not in BENCHMARKS:
        raise ConfigError(f"unknown benchmark {bench!r}; expected one of "
                          f"{BENCHMARKS}", key="benchmark")
    cfg = default_config(bench)
    for key, (value, lineno) in pairs.items():
        try:
            _apply_key(cfg, key, value)
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}", key=key) from None
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {key}: {exc}",
                              key=key) from None
    try:
        validate_config(cfg)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return cfg
