"""Learning acceleration fields of multibody systems from trajectory data.

The package pairs five benchmark simulators with a training pipeline
that regresses accelerations directly from differentiated trajectory
data (no ODE solves during training) and integrates the learned field
only at rollout time.
"""

from .derivatives import (DiffConfig, accel_targets, fd_derivative,
                          hybrid_derivative, spectral_derivative)
from .integrators import (Integrator, Trajectory, field_eval_count,
                          reset_field_eval_count, rollout,
                          rollout_constrained, rollout_second_order, step,
                          wrap_second_order)
from .learning import (AccelDataset, Standardization, TrainConfig,
                       TrainedModel, build_dataset, error_growth,
                       evaluate_mse, load_checkpoint, rollout_learned,
                       save_checkpoint, select_coordinates, train,
                       train_minimal, windowed_mse)
from .mpc import (LinearModel, MpcConfig, closed_loop, discretize,
                  linearize_analytic, linearize_model, solve_horizon)
from .presets import (RunConfig, default_config, generate_excitation,
                      generate_ground_truth, split_trajectory)
from .io import parse_config, read_trajectory, write_trajectory

__version__ = "0.1.0"

__all__ = [
    "AccelDataset", "DiffConfig", "Integrator", "LinearModel", "MpcConfig",
    "RunConfig", "Standardization", "TrainConfig", "TrainedModel",
    "Trajectory", "accel_targets", "build_dataset", "closed_loop",
    "default_config", "discretize", "error_growth", "evaluate_mse",
    "fd_derivative", "field_eval_count", "generate_excitation",
    "generate_ground_truth", "hybrid_derivative", "linearize_analytic",
    "linearize_model", "load_checkpoint", "parse_config", "read_trajectory",
    "reset_field_eval_count", "rollout", "rollout_constrained",
    "rollout_learned", "rollout_second_order", "save_checkpoint",
    "select_coordinates", "solve_horizon", "spectral_derivative", "step",
    "split_trajectory", "train", "train_minimal", "windowed_mse",
    "wrap_second_order", "write_trajectory",
]
