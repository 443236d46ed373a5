"""Benchmark mechanical systems.

Five systems with closed-form equations of motion:

* single mass-spring-damper (1 DOF)
* triple mass-spring-damper chain (3 DOF)
* planar double pendulum, simulated in Hamiltonian form (2 DOF)
* planar slider-crank in redundant coordinates with 8 constraints (1 DOF)
* cart-pole with a force input on the cart (2 DOF)

State conventions: unconstrained systems use (q, qdot); the double
pendulum is integrated in (theta1, theta2, p1, p2) and converted to
angular rates for data generation; the slider-crank uses the 9
absolute coordinates q = (x1, y1, theta1, x2, y2, theta2, x3, y3,
theta3) of the three bodies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import KinematicLockError, SingularConfigurationError


def _require_finite(*values) -> None:
    for v in values:
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite value in dynamics input")


def _require_positive(**named) -> None:
    for name, v in named.items():
        if not v > 0.0:
            raise ValueError(f"{name} must be positive, got {v}")


def _require_non_negative(**named) -> None:
    for name, v in named.items():
        if v < 0.0:
            raise ValueError(f"{name} must be non-negative, got {v}")


# ---------------------------------------------------------------------------
# single mass-spring-damper


@dataclass
class SmsdParams:
    m: float = 10.0
    k: float = 50.0
    d: float = 2.0

    def __post_init__(self):
        _require_positive(m=self.m, k=self.k)
        _require_non_negative(d=self.d)


def smsd_accel(x: float, v: float, p: SmsdParams) -> float:
    """Acceleration of the damped oscillator: -(k*x + d*v)/m."""
    _require_finite(x, v)
    return -(p.k * x + p.d * v) / p.m


def smsd_energy(x: float, v: float, p: SmsdParams) -> float:
    return 0.5 * p.m * v * v + 0.5 * p.k * x * x


def smsd_accel_fn(p: SmsdParams):
    """Acceleration field (q, qdot) -> qddot for the integrator."""

    def accel(q, qd):
        return np.array([smsd_accel(q[0], qd[0], p)])

    return accel


# ---------------------------------------------------------------------------
# triple mass-spring-damper chain


@dataclass
class TmsdParams:
    m1: float = 100.0
    m2: float = 10.0
    m3: float = 1.0
    k1: float = 50.0
    k2: float = 50.0
    k3: float = 50.0
    d1: float = 2.0
    d2: float = 2.0
    d3: float = 2.0

    def __post_init__(self):
        _require_positive(m1=self.m1, m2=self.m2, m3=self.m3)
        _require_non_negative(k1=self.k1, k2=self.k2, k3=self.k3,
                              d1=self.d1, d2=self.d2, d3=self.d3)


def tmsd_accel(x: np.ndarray, v: np.ndarray, p: TmsdParams) -> np.ndarray:
    """Accelerations of the three-mass chain.

    Mass 1 is anchored to ground by (k1, d1); the d1 damper acts on the
    relative rate of masses 1 and 2, matching the model this benchmark
    reproduces.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != (3,) or v.shape != (3,):
        raise ValueError("tmsd state must have three coordinates")
    _require_finite(x, v)
    x1, x2, x3 = x
    v1, v2, v3 = v
    a1 = (-p.k1 * x1 - p.d1 * (v1 - v2) + p.k2 * (x2 - x1)
          + p.d2 * (v2 - v1)) / p.m1
    a2 = (-p.k2 * (x2 - x1) - p.d2 * (v2 - v1) + p.k3 * (x3 - x2)
          + p.d3 * (v3 - v2)) / p.m2
    a3 = (-p.k3 * (x3 - x2) - p.d3 * (v3 - v2)) / p.m3
    return np.array([a1, a2, a3])


def tmsd_energy(x: np.ndarray, v: np.ndarray, p: TmsdParams) -> float:
    kinetic = 0.5 * (p.m1 * v[0] ** 2 + p.m2 * v[1] ** 2 + p.m3 * v[2] ** 2)
    elastic = 0.5 * (p.k1 * x[0] ** 2 + p.k2 * (x[1] - x[0]) ** 2
                     + p.k3 * (x[2] - x[1]) ** 2)
    return kinetic + elastic


def tmsd_accel_fn(p: TmsdParams):
    def accel(q, qd):
        return tmsd_accel(q, qd, p)

    return accel


# ---------------------------------------------------------------------------
# double pendulum (Hamiltonian form)


@dataclass
class DoublePendulumParams:
    m1: float = 1.0
    m2: float = 1.0
    l1: float = 1.0
    l2: float = 1.0
    g: float = 9.81

    def __post_init__(self):
        _require_positive(m1=self.m1, m2=self.m2, l1=self.l1, l2=self.l2,
                          g=self.g)


def _dp_mass_matrix(theta1: float, theta2: float,
                    p: DoublePendulumParams) -> np.ndarray:
    c = math.cos(theta1 - theta2)
    return np.array([
        [(p.m1 + p.m2) * p.l1 ** 2, p.m2 * p.l1 * p.l2 * c],
        [p.m2 * p.l1 * p.l2 * c, p.m2 * p.l2 ** 2],
    ])


def dp_momenta_from_velocities(theta1, theta2, omega1, omega2,
                               p: DoublePendulumParams) -> np.ndarray:
    """Generalized momenta conjugate to (theta1, theta2)."""
    _require_finite(theta1, theta2, omega1, omega2)
    return _dp_mass_matrix(theta1, theta2, p) @ np.array([omega1, omega2])


def dp_velocities_from_momenta(theta1, theta2, p1, p2,
                               p: DoublePendulumParams) -> np.ndarray:
    """Angular rates recovered from the momenta (inverse of the 2x2 map)."""
    _require_finite(theta1, theta2, p1, p2)
    return np.linalg.solve(_dp_mass_matrix(theta1, theta2, p),
                           np.array([p1, p2]))


def double_pendulum_rhs(state: np.ndarray,
                        p: DoublePendulumParams) -> np.ndarray:
    """Hamiltonian right-hand side for state (theta1, theta2, p1, p2)."""
    state = np.asarray(state, dtype=float)
    if state.shape != (4,):
        raise ValueError("double pendulum state must have four components")
    _require_finite(state)
    th1, th2, p1, p2 = state
    m1, m2, l1, l2, g = p.m1, p.m2, p.l1, p.l2, p.g
    delta = th1 - th2
    s, c = math.sin(delta), math.cos(delta)
    den = m1 + m2 * s * s

    th1dot = (l2 * p1 - l1 * p2 * c) / (l1 ** 2 * l2 * den)
    th2dot = (-m2 * l2 * p1 * c + (m1 + m2) * l1 * p2) / (m2 * l1 * l2 ** 2 * den)

    h1 = p1 * p2 * s / (l1 * l2 * den)
    h2 = (m2 * l2 ** 2 * p1 ** 2 + (m1 + m2) * l1 ** 2 * p2 ** 2
          - 2.0 * m2 * l1 * l2 * p1 * p2 * c) / (2.0 * l1 ** 2 * l2 ** 2 * den ** 2)
    p1dot = -(m1 + m2) * g * l1 * math.sin(th1) - h1 + h2 * math.sin(2.0 * delta)
    p2dot = -m2 * g * l2 * math.sin(th2) + h1 - h2 * math.sin(2.0 * delta)
    return np.array([th1dot, th2dot, p1dot, p2dot])


def dp_energy(theta1, theta2, p1, p2, p: DoublePendulumParams) -> float:
    """Total energy H = T + V evaluated at a Hamiltonian state."""
    om1, om2 = dp_velocities_from_momenta(theta1, theta2, p1, p2, p)
    c = math.cos(theta1 - theta2)
    kinetic = (0.5 * (p.m1 + p.m2) * p.l1 ** 2 * om1 ** 2
               + 0.5 * p.m2 * p.l2 ** 2 * om2 ** 2
               + p.m2 * p.l1 * p.l2 * om1 * om2 * c)
    potential = (-(p.m1 + p.m2) * p.g * p.l1 * math.cos(theta1)
                 - p.m2 * p.g * p.l2 * math.cos(theta2))
    return kinetic + potential


def dp_field(p: DoublePendulumParams):
    """First-order field over (theta1, theta2, p1, p2) for the integrator."""

    def field(t, y):
        return double_pendulum_rhs(y, p)

    return field


# ---------------------------------------------------------------------------
# cart-pole


@dataclass
class CartPoleParams:
    m_cart: float = 1.0
    m_pole: float = 1.0
    l: float = 1.0
    g: float = 9.81

    def __post_init__(self):
        _require_positive(m_cart=self.m_cart, m_pole=self.m_pole, l=self.l,
                          g=self.g)


def cartpole_accel(state: np.ndarray, u: float,
                   p: CartPoleParams) -> np.ndarray:
    """(thetaddot, xddot) for state (theta, x, omega, v) and cart force u.

    theta is measured from the upright position. The 2x2 mass matrix
    [[m l^2, m l cos], [m l cos, M + m]] has determinant
    m l^2 (M + m sin^2) > 0 for all configurations.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (4,):
        raise ValueError("cart-pole state must have four components")
    _require_finite(state, u)
    th, _, om, _ = state
    M, m, l, g = p.m_cart, p.m_pole, p.l, p.g
    s, c = math.sin(th), math.cos(th)
    det = m * l * l * (M + m * s * s)
    assert det > 0.0
    b1 = m * g * l * s
    b2 = u + m * l * om * om * s
    thddot = ((M + m) * b1 - m * l * c * b2) / det
    xddot = (m * l * l * b2 - m * l * c * b1) / det
    return np.array([thddot, xddot])


def cartpole_accel_fn(p: CartPoleParams, u: float = 0.0):
    def accel(q, qd):
        return cartpole_accel(np.concatenate((q, qd)), u, p)

    return accel


# ---------------------------------------------------------------------------
# planar slider-crank in redundant coordinates
#
# Body 1: crank, half-length r, pinned to ground at the origin.
# Body 2: connecting rod, half-length l.
# Body 3: slider, constrained to the x axis with fixed orientation.


@dataclass
class SliderCrankParams:
    m1: float = 3.0
    m2: float = 6.0
    m3: float = 1.0
    i1: float = 4.0
    i2: float = 32.0
    i3: float = 1.0
    r: float = 1.0
    l: float = 2.0
    k: float = 1.0
    tau: float = 1.0
    c01: float = 0.1
    c12: float = 0.1
    c23: float = 0.1
    c: float = 0.1
    f: float = 0.0
    x3_ref: float = 6.0

    def __post_init__(self):
        _require_positive(m1=self.m1, m2=self.m2, m3=self.m3, i1=self.i1,
                          i2=self.i2, i3=self.i3, r=self.r, l=self.l)
        _require_non_negative(k=self.k, c01=self.c01, c12=self.c12,
                              c23=self.c23, c=self.c, f=self.f)


@dataclass
class KktSolution:
    qddot: np.ndarray
    lam: np.ndarray


def slider_crank_mass_matrix(p: SliderCrankParams) -> np.ndarray:
    return np.diag([p.m1, p.m1, p.i1, p.m2, p.m2, p.i2, p.m3, p.m3, p.i3])


def slider_crank_phi(q: np.ndarray, p: SliderCrankParams) -> np.ndarray:
    """Constraint residuals: ground pin, crank-rod pin, rod-slider pin,
    slider on the x axis, slider orientation locked."""
    x1, y1, th1, x2, y2, th2, x3, y3, th3 = q
    r, l = p.r, p.l
    return np.array([
        x1 - r * math.cos(th1),
        y1 - r * math.sin(th1),
        x1 + r * math.cos(th1) - x2 + l * math.cos(th2),
        y1 + r * math.sin(th1) - y2 + l * math.sin(th2),
        x2 + l * math.cos(th2) - x3,
        y2 + l * math.sin(th2) - y3,
        y3,
        th3,
    ])


def slider_crank_phi_q(q: np.ndarray, p: SliderCrankParams) -> np.ndarray:
    th1, th2 = q[2], q[5]
    r, l = p.r, p.l
    s1, c1 = math.sin(th1), math.cos(th1)
    s2, c2 = math.sin(th2), math.cos(th2)
    J = np.zeros((8, 9))
    J[0, 0] = 1.0
    J[0, 2] = r * s1
    J[1, 1] = 1.0
    J[1, 2] = -r * c1
    J[2, 0] = 1.0
    J[2, 2] = -r * s1
    J[2, 3] = -1.0
    J[2, 5] = -l * s2
    J[3, 1] = 1.0
    J[3, 2] = r * c1
    J[3, 4] = -1.0
    J[3, 5] = l * c2
    J[4, 3] = 1.0
    J[4, 5] = -l * s2
    J[4, 6] = -1.0
    J[5, 4] = 1.0
    J[5, 5] = l * c2
    J[5, 7] = -1.0
    J[6, 7] = 1.0
    J[7, 8] = 1.0
    return J


def slider_crank_gamma(q: np.ndarray, qdot: np.ndarray,
                       p: SliderCrankParams) -> np.ndarray:
    """Right-hand side of the acceleration-level constraints,
    gamma = -(d/dt Phi_q) qdot."""
    th1, th2 = q[2], q[5]
    w1, w2 = qdot[2], qdot[5]
    r, l = p.r, p.l
    s1, c1 = math.sin(th1), math.cos(th1)
    s2, c2 = math.sin(th2), math.cos(th2)
    return np.array([
        -r * w1 * w1 * c1,
        -r * w1 * w1 * s1,
        r * w1 * w1 * c1 + l * w2 * w2 * c2,
        r * w1 * w1 * s1 + l * w2 * w2 * s2,
        l * w2 * w2 * c2,
        l * w2 * w2 * s2,
        0.0,
        0.0,
    ])


def slider_crank_forces(q: np.ndarray, qdot: np.ndarray,
                        p: SliderCrankParams) -> np.ndarray:
    """Applied forces: drive torque and joint damping on the crank,
    joint damping on the rod, spring/damper/friction on the slider.

    Coulomb friction is smoothed as f*tanh(xdot3/0.01) to keep the
    field differentiable near zero slip speed.
    """
    w1, w2, w3 = qdot[2], qdot[5], qdot[8]
    x3, x3dot = q[6], qdot[6]
    F = np.zeros(9)
    F[2] = p.tau - p.c01 * w1
    F[4] = -p.c12 * (w1 - w2)
    F[6] = (-p.k * (x3 - p.x3_ref) - p.f * math.tanh(x3dot / 0.01)
            - p.c23 * w3 - p.c * x3dot)
    return F


def slider_crank_rhs(q: np.ndarray, qdot: np.ndarray,
                     p: SliderCrankParams) -> KktSolution:
    """Solve the 17x17 saddle-point system for (qddot, lambda).

    [[M, Phi_q^T], [Phi_q, 0]] [qddot; lam] = [F; gamma]
    """
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    if q.shape != (9,) or qdot.shape != (9,):
        raise ValueError("slider-crank state must have nine coordinates")
    _require_finite(q, qdot)
    M = slider_crank_mass_matrix(p)
    J = slider_crank_phi_q(q, p)
    K = np.zeros((17, 17))
    K[:9, :9] = M
    K[:9, 9:] = J.T
    K[9:, :9] = J
    rhs = np.concatenate((slider_crank_forces(q, qdot, p),
                          slider_crank_gamma(q, qdot, p)))
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularConfigurationError(
            f"saddle-point system singular: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise SingularConfigurationError("saddle-point solve produced "
                                         "non-finite values")
    return KktSolution(qddot=sol[:9], lam=sol[9:])


def slider_crank_accel_fn(p: SliderCrankParams):
    def accel(q, qd):
        return slider_crank_rhs(q, qd, p).qddot

    return accel


def slider_crank_reconstruct(theta1: float, theta1dot: float,
                             p: SliderCrankParams) -> tuple[np.ndarray, np.ndarray]:
    """Full (q, qdot) from the minimal coordinate pair (theta1, theta1dot).

    Uses the assembly branch with the rod angle in (-pi/2, pi/2).
    Raises KinematicLockError when |r sin(theta1)| > l or at the lock
    configuration where the rod is vertical.
    """
    _require_finite(theta1, theta1dot)
    r, l = p.r, p.l
    s1, c1 = math.sin(theta1), math.cos(theta1)
    sin2 = -r * s1 / l
    if abs(sin2) > 1.0:
        raise KinematicLockError(
            f"cannot assemble mechanism at theta1={theta1!r}: "
            f"|r sin(theta1)| exceeds rod length")
    cos2 = math.sqrt(1.0 - sin2 * sin2)
    if cos2 < 1e-12:
        raise KinematicLockError(
            f"mechanism locks at theta1={theta1!r}: rod is vertical")
    theta2 = math.asin(sin2)
    w2 = -r * c1 * theta1dot / (l * cos2)
    q = np.array([
        r * c1,
        r * s1,
        theta1,
        2.0 * r * c1 + l * cos2,
        2.0 * r * s1 + l * sin2,
        theta2,
        2.0 * r * c1 + 2.0 * l * cos2,
        0.0,
        0.0,
    ])
    qdot = np.array([
        -r * s1 * theta1dot,
        r * c1 * theta1dot,
        theta1dot,
        -2.0 * r * s1 * theta1dot - l * sin2 * w2,
        2.0 * r * c1 * theta1dot + l * cos2 * w2,
        w2,
        -2.0 * r * s1 * theta1dot - 2.0 * l * sin2 * w2,
        0.0,
        0.0,
    ])
    return q, qdot
