"""Fixed-step explicit integrators and trajectory containers.

`step` advances a first-order field dz/dt = f(t, z) by one step of
forward Euler, explicit midpoint, or classic RK4.  A module-level
counter tracks field evaluations so callers can assert how many solver
calls a code path performed (training must perform none).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, ProjectionError
from .systems import (SliderCrankParams, slider_crank_phi,
                      slider_crank_phi_q, slider_crank_rhs)

SCHEMES = ("euler", "midpoint", "rk4")

_STAGES = {"euler": 1, "midpoint": 2, "rk4": 4}

_eval_count = 0


def field_eval_count() -> int:
    """Number of vector-field evaluations performed by `step` so far."""
    return _eval_count


def reset_field_eval_count() -> None:
    global _eval_count
    _eval_count = 0


@dataclass
class Integrator:
    scheme: str = "rk4"
    dt: float = 0.01

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; "
                             f"expected one of {SCHEMES}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def stages(self) -> int:
        return _STAGES[self.scheme]


def step(f, z: np.ndarray, t: float, integ: Integrator) -> np.ndarray:
    """One explicit step from (t, z); raises DivergenceError on non-finite
    results."""
    global _eval_count
    z = np.asarray(z, dtype=float)
    dt = integ.dt
    if integ.scheme == "euler":
        _eval_count += 1
        z_next = z + dt * f(t, z)
    elif integ.scheme == "midpoint":
        _eval_count += 2
        k1 = f(t, z)
        z_next = z + dt * f(t + 0.5 * dt, z + 0.5 * dt * k1)
    else:
        _eval_count += 4
        k1 = f(t, z)
        k2 = f(t + 0.5 * dt, z + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, z + 0.5 * dt * k2)
        k4 = f(t + dt, z + dt * k3)
        z_next = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(z_next)):
        raise DivergenceError("integration step produced non-finite state")
    return z_next


def wrap_second_order(accel_fn):
    """Lift qddot = a(q, qdot) to the first-order field over Z = (q, qdot)."""

    def field(t, z):
        n = z.shape[0] // 2
        q, qd = z[:n], z[n:]
        a = np.asarray(accel_fn(q, qd), dtype=float)
        if a.shape != qd.shape:
            raise ValueError(
                f"acceleration has shape {a.shape}, expected {qd.shape}")
        return np.concatenate((qd, a))

    return field


@dataclass
class Trajectory:
    """Uniformly sampled states Z_i = (q_i, qdot_i) at t_i = t0 + i*dt.

    `accels` and `inputs` are optional row-aligned extras (ground-truth
    accelerations, applied control inputs).
    """

    t0: float
    dt: float
    states: np.ndarray
    accels: np.ndarray | None = None
    inputs: np.ndarray | None = None
    params: object | None = field(default=None, compare=False)

    def __post_init__(self):
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.states.shape[0] < 1:
            raise ValueError("trajectory must contain at least one state")
        if self.states.shape[1] % 2 != 0:
            raise ValueError("state width must be even (positions then "
                             "velocities)")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory contains non-finite states")
        for name in ("accels", "inputs"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.atleast_2d(np.asarray(arr, dtype=float))
                if arr.shape[0] != self.states.shape[0]:
                    raise ValueError(f"{name} rows do not match states")
                setattr(self, name, arr)

    @property
    def n_steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def n_coords(self) -> int:
        return self.states.shape[1] // 2

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.states.shape[0])

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, :self.n_coords]

    @property
    def velocities(self) -> np.ndarray:
        return self.states[:, self.n_coords:]


def rollout(f, z0: np.ndarray, integ: Integrator, n_steps: int,
            t0: float = 0.0) -> Trajectory:
    """Integrate the field for n_steps fixed steps from z0."""
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    z0 = np.asarray(z0, dtype=float)
    states = np.empty((n_steps + 1, z0.shape[0]))
    states[0] = z0
    z = z0
    for k in range(n_steps):
        try:
            z = step(f, z, t0 + k * integ.dt, integ)
        except DivergenceError as exc:
            raise DivergenceError(f"divergence at step {k}", step=k) from exc
        states[k + 1] = z
    return Trajectory(t0=t0, dt=integ.dt, states=states)


def rollout_second_order(accel_fn, z0: np.ndarray, integ: Integrator,
                         n_steps: int, t0: float = 0.0) -> Trajectory:
    """Rollout of qddot = a(q, qdot) recording accelerations row by row."""
    traj = rollout(wrap_second_order(accel_fn), z0, integ, n_steps, t0)
    n = traj.n_coords
    accels = np.empty((traj.states.shape[0], n))
    for i, z in enumerate(traj.states):
        accels[i] = accel_fn(z[:n], z[n:])
    traj.accels = accels
    return traj


# ---------------------------------------------------------------------------
# constrained rollout (slider-crank)

PROJECTION_TOL = 1e-8
PROJECTION_MAX_ITER = 20


def project_to_manifold(q: np.ndarray, qdot: np.ndarray,
                        p: SliderCrankParams,
                        tol: float = PROJECTION_TOL,
                        max_iter: int = PROJECTION_MAX_ITER):
    """Project (q, qdot) back onto the constraint manifold.

    Positions: Gauss-Newton iterations q <- q - J^T (J J^T)^{-1} Phi(q)
    until the residual max-norm is within tol.  Velocities: one exact
    least-squares correction onto the null space of Phi_q.
    """
    q = np.array(q, dtype=float)
    for _ in range(max_iter):
        phi = slider_crank_phi(q, p)
        if np.max(np.abs(phi)) <= tol:
            break
        J = slider_crank_phi_q(q, p)
        q -= J.T @ np.linalg.solve(J @ J.T, phi)
    else:
        raise ProjectionError(
            f"position projection did not reach {tol} in {max_iter} "
            f"iterations")
    J = slider_crank_phi_q(q, p)
    qdot = qdot - J.T @ np.linalg.solve(J @ J.T, J @ qdot)
    return q, qdot


def rollout_constrained(q0: np.ndarray, qdot0: np.ndarray,
                        p: SliderCrankParams, integ: Integrator,
                        n_steps: int, t0: float = 0.0) -> Trajectory:
    """Integrate the constrained equations with per-step projection.

    Records the constrained accelerations from the saddle-point solve
    at every stored state.
    """
    q0, qdot0 = project_to_manifold(np.asarray(q0, float),
                                    np.asarray(qdot0, float), p)
    f = wrap_second_order(lambda q, qd: slider_crank_rhs(q, qd, p).qddot)
    states = np.empty((n_steps + 1, 18))
    accels = np.empty((n_steps + 1, 9))
    z = np.concatenate((q0, qdot0))
    states[0] = z
    accels[0] = slider_crank_rhs(q0, qdot0, p).qddot
    for k in range(n_steps):
        try:
            z = step(f, z, t0 + k * integ.dt, integ)
            q, qd = project_to_manifold(z[:9], z[9:], p)
        except DivergenceError as exc:
            raise DivergenceError(f"divergence at step {k}", step=k) from exc
        except ProjectionError as exc:
            raise ProjectionError(f"projection failed at step {k}: {exc}",
                                  step=k) from exc
        z = np.concatenate((q, qd))
        states[k + 1] = z
        accels[k + 1] = slider_crank_rhs(q, qd, p).qddot
    return Trajectory(t0=t0, dt=integ.dt, states=states, accels=accels)
