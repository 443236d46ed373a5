"""Learning an acceleration field from trajectory data.

The model is a plain MLP mapping the augmented state Z = (q, qdot)
(plus any control input) directly to the acceleration qddot.  Targets
come from numerical differentiation of the recorded velocities, so
training never calls an ODE solver; integration happens only when the
trained field is rolled out.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import mlp as nets
from .derivatives import DiffConfig, accel_targets
from .errors import DivergenceError
from .integrators import Integrator, Trajectory, rollout, step, wrap_second_order

STD_FLOOR = 1e-12


@dataclass
class Standardization:
    """Per-dimension affine maps for network inputs and targets."""

    in_mean: np.ndarray
    in_std: np.ndarray
    out_mean: np.ndarray
    out_std: np.ndarray

    @classmethod
    def fit(cls, inputs: np.ndarray, targets: np.ndarray) -> "Standardization":
        def stats(a):
            mean = a.mean(axis=0)
            std = a.std(axis=0)
            std[std < STD_FLOOR] = 1.0  # constant columns pass through
            return mean, std

        im, istd = stats(inputs)
        om, ostd = stats(targets)
        return cls(in_mean=im, in_std=istd, out_mean=om, out_std=ostd)

    def apply_in(self, x: np.ndarray) -> np.ndarray:
        return (x - self.in_mean) / self.in_std

    def apply_out(self, y: np.ndarray) -> np.ndarray:
        return (y - self.out_mean) / self.out_std

    def invert_out(self, y: np.ndarray) -> np.ndarray:
        return y * self.out_std + self.out_mean


@dataclass
class AccelDataset:
    """Input rows (Z or Z+u) paired with acceleration targets."""

    inputs: np.ndarray
    targets: np.ndarray
    stats: Standardization

    def __post_init__(self):
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError("inputs and targets row counts differ")


def build_dataset(traj: Trajectory,
                  config: DiffConfig | None = None) -> AccelDataset:
    """Differentiate the velocity columns to obtain targets; inputs are
    the states, with control columns appended when the trajectory has
    them."""
    targets = accel_targets(traj, config)
    inputs = traj.states
    if traj.inputs is not None:
        inputs = np.hstack((inputs, traj.inputs))
    return AccelDataset(inputs=inputs.copy(), targets=targets,
                        stats=Standardization.fit(inputs, targets))


def merge_datasets(datasets) -> AccelDataset:
    """Concatenate per-trajectory datasets and refit the standardization."""
    datasets = list(datasets)
    if not datasets:
        raise ValueError("no datasets to merge")
    inputs = np.vstack([d.inputs for d in datasets])
    targets = np.vstack([d.targets for d in datasets])
    return AccelDataset(inputs=inputs, targets=targets,
                        stats=Standardization.fit(inputs, targets))


def select_coordinates(traj: Trajectory, coords) -> Trajectory:
    """Trajectory restricted to a subset of coordinates (e.g. the
    driving crank angle of the slider-crank)."""
    coords = list(coords)
    n = traj.n_coords
    cols = coords + [n + c for c in coords]
    return Trajectory(t0=traj.t0, dt=traj.dt, states=traj.states[:, cols],
                      inputs=traj.inputs, params=traj.params)


@dataclass
class TrainConfig:
    epochs: int = 500
    lr: float = 1e-3
    lr_decay: float = 0.98
    width: int = 256
    depth: int = 2
    activation: str = "tanh"
    init_scheme: str = "xavier"
    batch_size: int | None = None  # None = full batch
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if not self.lr > 0.0:
            raise ValueError("lr must be positive")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError("lr_decay must be in (0, 1]")
        if self.width < 1 or self.depth < 1:
            raise ValueError("width and depth must be at least 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


@dataclass
class TrainedModel:
    """MLP plus the standardization it was trained under."""

    net: nets.Mlp
    stats: Standardization

    @property
    def n_out(self) -> int:
        return self.net.dims[-1]

    @property
    def n_inputs(self) -> int:
        """Number of control inputs expected alongside the state."""
        return self.net.dims[0] - 2 * self.n_out

    def predict(self, z: np.ndarray, u=None) -> np.ndarray:
        """Acceleration prediction for an augmented state (optionally
        with control input); accepts a single state or a batch."""
        z = np.asarray(z, dtype=float)
        if u is not None:
            u = np.atleast_1d(np.asarray(u, dtype=float))
            z = np.concatenate((z, u), axis=-1)
        if z.shape[-1] != self.net.dims[0]:
            raise ValueError(f"model expects input width "
                             f"{self.net.dims[0]}, got {z.shape[-1]}")
        out = nets.forward(self.net, self.stats.apply_in(z))
        return self.stats.invert_out(out)


def train(dataset: AccelDataset, config: TrainConfig | None = None):
    """Train an MLP on standardized (input, acceleration) pairs.

    Returns (TrainedModel, loss_history) where the history holds the
    mean standardized training loss of each epoch.  Raises
    DivergenceError if the loss goes non-finite.
    """
    config = config or TrainConfig()
    X = dataset.stats.apply_in(dataset.inputs)
    Y = dataset.stats.apply_out(dataset.targets)
    n = X.shape[0]
    dims = (X.shape[1],) + (config.width,) * config.depth + (Y.shape[1],)
    net = nets.init_mlp(dims, activation=config.activation,
                        init_scheme=config.init_scheme, seed=config.seed)
    state = nets.AdamState.for_net(net, base_lr=config.lr,
                                   decay=config.lr_decay)
    batch = config.batch_size or n
    rng = np.random.default_rng(config.seed + 1)
    history = []
    for epoch in range(config.epochs):
        lr = nets.decay_lr(state, epoch)
        order = rng.permutation(n) if batch < n else np.arange(n)
        losses = []
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            loss, grads = nets.loss_and_grad(net, X[idx], Y[idx])
            nets.adam_step(net, grads, state, lr)
            losses.append(loss)
        epoch_loss = float(np.mean(losses))
        if not np.isfinite(epoch_loss):
            raise DivergenceError(f"training loss diverged at epoch {epoch}",
                                  step=epoch)
        history.append(epoch_loss)
    return TrainedModel(net=net, stats=dataset.stats), history


def train_minimal(dataset: AccelDataset, config: TrainConfig | None = None):
    """Training entry point for minimal-coordinate datasets; identical
    code path to `train`."""
    return train(dataset, config)


# ---------------------------------------------------------------------------
# rollout and evaluation


def _as_predictor(model):
    if isinstance(model, TrainedModel):
        return model.predict
    return model


def rollout_learned(model, z0: np.ndarray, integ: Integrator, n_steps: int,
                    controls: np.ndarray | None = None,
                    t0: float = 0.0) -> Trajectory:
    """Integrate a learned (or substituted) acceleration field.

    `model` is a TrainedModel or any callable mapping Z (with control
    appended when `controls` is given) to the acceleration vector.
    Controls are zero-order held over each step.
    """
    predict = _as_predictor(model)
    z0 = np.asarray(z0, dtype=float)
    n = z0.shape[0] // 2
    if controls is None:
        field = wrap_second_order(
            lambda q, qd: predict(np.concatenate((q, qd))))
        traj = rollout(field, z0, integ, n_steps, t0)
        accels = np.vstack([predict(z) for z in traj.states])
        traj.accels = accels
        return traj

    controls = np.atleast_2d(np.asarray(controls, dtype=float))
    if controls.shape[0] == 1 and n_steps > 1:
        controls = controls.T
    if controls.shape[0] != n_steps:
        raise ValueError(f"need {n_steps} control rows, got "
                         f"{controls.shape[0]}")
    states = np.empty((n_steps + 1, 2 * n))
    accels = np.empty((n_steps + 1, n))
    inputs = np.empty((n_steps + 1, controls.shape[1]))
    states[0] = z0
    z = z0
    for k in range(n_steps):
        u_k = controls[k]
        field = wrap_second_order(
            lambda q, qd: predict(np.concatenate((q, qd)), u_k))
        accels[k] = predict(z, u_k)
        inputs[k] = u_k
        try:
            z = step(field, z, t0 + k * integ.dt, integ)
        except DivergenceError as exc:
            raise DivergenceError(f"divergence at step {k}", step=k) from exc
        states[k + 1] = z
    inputs[n_steps] = controls[-1]
    accels[n_steps] = predict(z, controls[-1])
    return Trajectory(t0=t0, dt=integ.dt, states=states, accels=accels,
                      inputs=inputs)


def evaluate_mse(pred: Trajectory, truth: Trajectory) -> float:
    """Mean squared state error over all rows and components."""
    if pred.states.shape != truth.states.shape:
        raise ValueError(f"trajectory shapes differ: {pred.states.shape} "
                         f"vs {truth.states.shape}")
    return float(np.mean((pred.states - truth.states) ** 2))


def windowed_mse(pred: Trajectory, truth: Trajectory, train_steps: int):
    """(mse_total, mse_train_window, mse_test_window) split at the
    given row index."""
    if pred.states.shape != truth.states.shape:
        raise ValueError("trajectory shapes differ")
    err = (pred.states - truth.states) ** 2
    if not 0 < train_steps < err.shape[0]:
        raise ValueError(f"train_steps must split the {err.shape[0]} rows")
    return (float(err.mean()), float(err[:train_steps].mean()),
            float(err[train_steps:].mean()))


@dataclass
class ErrorGrowthReport:
    errors: np.ndarray    # per-row state error
    max_norm: np.ndarray  # max-abs error per row
    rms: np.ndarray       # root-mean-square error per row


def error_growth(pred: Trajectory, truth: Trajectory) -> ErrorGrowthReport:
    if pred.states.shape != truth.states.shape:
        raise ValueError("trajectory shapes differ")
    errors = pred.states - truth.states
    return ErrorGrowthReport(
        errors=errors,
        max_norm=np.max(np.abs(errors), axis=1),
        rms=np.sqrt(np.mean(errors ** 2, axis=1)),
    )


# ---------------------------------------------------------------------------
# checkpoint files

CHECKPOINT_MAGIC = "trajfield-checkpoint"
CHECKPOINT_VERSION = 1


def _fmt_row(values) -> str:
    return " ".join(f"{v:.17g}" for v in np.asarray(values).ravel())


def save_checkpoint(model: TrainedModel, path) -> None:
    """Plain-text checkpoint: header, per-layer weight rows and bias
    row, then the four standardization vectors."""
    net, stats = model.net, model.stats
    lines = [
        f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}",
        "dims " + " ".join(str(d) for d in net.dims),
        f"activation {net.activation}",
        f"init {net.init_scheme}",
    ]
    for W, b in zip(net.weights, net.biases):
        for row in W:
            lines.append(_fmt_row(row))
        lines.append(_fmt_row(b))
    lines.append("standardization")
    for vec in (stats.in_mean, stats.in_std, stats.out_mean, stats.out_std):
        lines.append(_fmt_row(vec))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path) -> TrainedModel:
    from .errors import ParseError

    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith(CHECKPOINT_MAGIC):
        raise ParseError(f"{path}: not a checkpoint file", line=1)
    version = lines[0].split()[-1]
    if version != str(CHECKPOINT_VERSION):
        raise ParseError(f"{path}: unsupported checkpoint version "
                         f"{version}", line=1)
    cursor = 1
    try:
        dims = tuple(int(tk) for tk in lines[1].split()[1:])
        activation = lines[2].split()[1]
        init_scheme = lines[3].split()[1]
        cursor = 4
        weights, biases = [], []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            W = np.array([[float(tk) for tk in lines[cursor + r].split()]
                          for r in range(fan_out)])
            cursor += fan_out
            b = np.array([float(tk) for tk in lines[cursor].split()])
            cursor += 1
            if W.shape != (fan_out, fan_in) or b.shape != (fan_out,):
                raise ValueError("layer block has wrong shape")
            weights.append(W)
            biases.append(b)
        if lines[cursor] != "standardization":
            raise ValueError("missing standardization block")
        vecs = [np.array([float(tk) for tk in lines[cursor + 1 + i].split()])
                for i in range(4)]
    except (IndexError, ValueError) as exc:
        raise ParseError(f"{path}: malformed checkpoint ({exc})",
                         line=cursor + 1) from exc
    net = nets.Mlp(dims=dims, weights=weights, biases=biases,
                   activation=activation, init_scheme=init_scheme)
    stats = Standardization(in_mean=vecs[0], in_std=vecs[1],
                            out_mean=vecs[2], out_std=vecs[3])
    if stats.in_mean.shape != (dims[0],) or stats.out_mean.shape != (dims[-1],):
        raise ParseError(f"{path}: standardization width does not match "
                         f"dims", line=cursor + 2)
    return TrainedModel(net=net, stats=stats)
