"""Linear receding-horizon control of the cart-pole.

The controller linearizes a plant model around the upright equilibrium
(analytic matrices, or the Jacobian of a learned acceleration field at
the current state), discretizes by forward Euler, solves the
finite-horizon problem by backward Riccati recursion, applies the
first input and repeats.  State ordering: (theta, x, omega, v).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import mlp as nets
from .errors import InstabilityError
from .integrators import Integrator, Trajectory, step, wrap_second_order
from .learning import TrainedModel
from .systems import CartPoleParams, cartpole_accel


@dataclass
class LinearModel:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.asarray(self.B, dtype=float)
        if self.B.ndim == 1:
            self.B = self.B[:, None]
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.B.shape[0] != n:
            raise ValueError("inconsistent A/B shapes")


def linearize_analytic(p: CartPoleParams) -> LinearModel:
    """Exact linearization of the cart-pole about the upright fixed
    point (theta = 0, any x, zero rates, u = 0)."""
    M, m, l, g = p.m_cart, p.m_pole, p.l, p.g
    A = np.zeros((4, 4))
    A[0, 2] = 1.0
    A[1, 3] = 1.0
    A[2, 0] = g * (m + M) / (M * l)
    A[3, 0] = -m * g / M
    B = np.array([0.0, 0.0, -1.0 / (M * l), 1.0 / M])
    return LinearModel(A=A, B=B)


def linearize_model(model: TrainedModel, z_op: np.ndarray,
                    u_op: float = 0.0) -> LinearModel:
    """Tangent linear model of a learned cart-pole field at (z_op, u_op).

    The acceleration Jacobian comes from backpropagation through the
    network (standardization folded in by the chain rule); the
    kinematic rows are identity by construction.
    """
    z_op = np.asarray(z_op, dtype=float)
    if model.n_out != 2 or model.n_inputs != 1:
        raise ValueError("expected a cart-pole model with one control input")
    x = np.concatenate((z_op, [u_op]))
    x_std = model.stats.apply_in(x)
    J_net = nets.jacobian(model.net, x_std)
    J = (model.stats.out_std[:, None] * J_net) / model.stats.in_std[None, :]
    A = np.zeros((4, 4))
    A[0, 2] = 1.0
    A[1, 3] = 1.0
    A[2:, :4] = J[:, :4]
    B = np.zeros((4, 1))
    B[2:, 0] = J[:, 4]
    return LinearModel(A=A, B=B)


def discretize(model: LinearModel, dt: float) -> LinearModel:
    """Forward-Euler discretization: A_d = I + A dt, B_d = B dt."""
    if dt < 0.0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    n = model.A.shape[0]
    return LinearModel(A=np.eye(n) + model.A * dt, B=model.B * dt)


@dataclass
class MpcConfig:
    horizon: int = 50
    q_diag: np.ndarray = field(
        default_factory=lambda: np.array([10.0, 1.0, 1.0, 1.0]))
    r: float = 0.1
    dt: float = 0.01
    u_max: float | None = None

    def __post_init__(self):
        self.q_diag = np.asarray(self.q_diag, dtype=float)
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if np.any(self.q_diag < 0.0):
            raise ValueError("state weights must be non-negative")
        if not self.r > 0.0:
            raise ValueError("input weight must be positive")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")


def solve_horizon(Ad: np.ndarray, Bd: np.ndarray, z0: np.ndarray,
                  horizon: int, Q: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Open-loop input sequence minimizing
    sum_{k=0}^{N-1} (z_k' Q z_k + u_k' R u_k) + z_N' Q z_N
    subject to z_{k+1} = Ad z_k + Bd u_k, by backward Riccati recursion.

    Returns the (horizon, n_u) input sequence.
    """
    Ad = np.atleast_2d(np.asarray(Ad, dtype=float))
    Bd = np.asarray(Bd, dtype=float)
    if Bd.ndim == 1:
        Bd = Bd[:, None]
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    z0 = np.asarray(z0, dtype=float)
    gains = []
    P = Q.copy()
    for _ in range(horizon):
        BtP = Bd.T @ P
        K = np.linalg.solve(R + BtP @ Bd, BtP @ Ad)
        P = Q + Ad.T @ P @ (Ad - Bd @ K)
        gains.append(K)
    gains.reverse()
    us = np.empty((horizon, Bd.shape[1]))
    z = z0
    for k, K in enumerate(gains):
        u = -K @ z
        us[k] = u
        z = Ad @ z + Bd @ u
    return us


def _clip(u: float, u_max: float | None) -> float:
    if u_max is None:
        return u
    return float(np.clip(u, -u_max, u_max))


def closed_loop(plant: CartPoleParams, controller, cfg: MpcConfig,
                z0: np.ndarray, n_steps: int,
                integ: Integrator | None = None) -> Trajectory:
    """Receding-horizon loop against the nonlinear cart-pole plant.

    `controller` is either a LinearModel or a TrainedModel; a trained
    model is linearized about the regulation target (upright, zero
    input) and that tangent model is used for every horizon solve, the
    same operating point the analytic controller uses — comparing the
    two loops then isolates the quality of the learned Jacobian.  The
    applied input is recorded alongside the closed-loop states.
    Raises InstabilityError when |theta| exceeds pi/2.
    """
    integ = integ or Integrator(scheme="midpoint", dt=cfg.dt)
    z0 = np.asarray(z0, dtype=float)
    Q = np.diag(cfg.q_diag)
    R = np.array([[cfg.r]])
    if isinstance(controller, LinearModel):
        fixed = discretize(controller, cfg.dt)
    else:
        fixed = discretize(linearize_model(controller, np.zeros(4), 0.0),
                           cfg.dt)

    states = np.empty((n_steps + 1, 4))
    inputs = np.empty((n_steps + 1, 1))
    states[0] = z0
    z = z0
    for k in range(n_steps):
        if abs(z[0]) > np.pi / 2:
            raise InstabilityError(f"pole fell over at step {k}", step=k)
        us = solve_horizon(fixed.A, fixed.B, z, cfg.horizon, Q, R)
        u = _clip(float(us[0, 0]), cfg.u_max)
        inputs[k, 0] = u
        f = wrap_second_order(lambda q, qd: cartpole_accel(
            np.concatenate((q, qd)), u, plant))
        z = step(f, z, k * integ.dt, integ)
        states[k + 1] = z
    inputs[n_steps, 0] = inputs[n_steps - 1, 0] if n_steps else 0.0
    return Trajectory(t0=0.0, dt=integ.dt, states=states, inputs=inputs)
