"""Linearization, discretization, horizon solves, and the closed loop."""

import numpy as np
import pytest
from scipy.linalg import expm

from trajfield.errors import InstabilityError
from trajfield.learning import Standardization, TrainedModel
from trajfield.mlp import Mlp, init_mlp
from trajfield.mpc import (LinearModel, MpcConfig, closed_loop, discretize,
                           linearize_analytic, linearize_model, solve_horizon)
from trajfield.systems import CartPoleParams

from helpers import stacked_qp_solution


def _identity_stats(n_in, n_out):
    return Standardization(in_mean=np.zeros(n_in), in_std=np.ones(n_in),
                           out_mean=np.zeros(n_out), out_std=np.ones(n_out))


def test_linearize_analytic_default_parameters():
    lin = linearize_analytic(CartPoleParams())
    A, B = lin.A, lin.B
    # kinematic rows
    np.testing.assert_array_equal(A[0], [0.0, 0.0, 1.0, 0.0])
    np.testing.assert_array_equal(A[1], [0.0, 0.0, 0.0, 1.0])
    # dynamic rows for unit masses and length
    assert A[2, 0] == pytest.approx(19.62)
    assert A[3, 0] == pytest.approx(-9.81)
    assert np.all(A[2:, 1:] == 0.0)
    np.testing.assert_allclose(B.ravel(), [0.0, 0.0, -1.0, 1.0])


def test_linearize_model_recovers_affine_net_exactly():
    # single affine layer: predictions are W z, so the Jacobian is W
    W = np.arange(10.0).reshape(2, 5) / 10.0
    net = Mlp(dims=(5, 2), weights=[W], biases=[np.zeros(2)])
    model = TrainedModel(net=net, stats=_identity_stats(5, 2))
    lin = linearize_model(model, np.zeros(4), 0.0)
    np.testing.assert_allclose(lin.A[2:, :], W[:, :4], atol=1e-14)
    np.testing.assert_allclose(lin.B[2:, 0], W[:, 4], atol=1e-14)
    np.testing.assert_array_equal(lin.A[0], [0.0, 0.0, 1.0, 0.0])
    np.testing.assert_array_equal(lin.A[1], [0.0, 0.0, 0.0, 1.0])
    assert lin.B[0, 0] == 0.0 and lin.B[1, 0] == 0.0


def test_linearize_model_matches_finite_differences():
    rng = np.random.default_rng(5)
    net = init_mlp((5, 16, 2), seed=5)
    stats = Standardization(in_mean=rng.normal(size=5),
                            in_std=rng.uniform(0.5, 2.0, size=5),
                            out_mean=rng.normal(size=2),
                            out_std=rng.uniform(0.5, 2.0, size=2))
    model = TrainedModel(net=net, stats=stats)
    z_op = np.array([0.1, -0.2, 0.05, 0.3])
    u_op = 0.4
    lin = linearize_model(model, z_op, u_op)
    eps = 1e-6
    for j in range(4):
        dz = np.zeros(4)
        dz[j] = eps
        col = (model.predict(z_op + dz, u_op)
               - model.predict(z_op - dz, u_op)) / (2 * eps)
        np.testing.assert_allclose(lin.A[2:, j], col, atol=1e-5)
    du = (model.predict(z_op, u_op + eps)
          - model.predict(z_op, u_op - eps)) / (2 * eps)
    np.testing.assert_allclose(lin.B[2:, 0], du, atol=1e-5)


def test_linearize_model_rejects_wrong_shapes():
    model = TrainedModel(net=init_mlp((4, 8, 2), seed=0),
                         stats=_identity_stats(4, 2))  # no control column
    with pytest.raises(ValueError):
        linearize_model(model, np.zeros(4))


def test_discretize_euler():
    lin = LinearModel(A=np.array([[0.0, 1.0], [-4.0, -0.5]]),
                      B=np.array([0.0, 2.0]))
    d = discretize(lin, 0.1)
    np.testing.assert_allclose(d.A, np.eye(2) + 0.1 * lin.A)
    np.testing.assert_allclose(d.B, 0.1 * lin.B)
    # dt = 0 collapses to the identity map
    d0 = discretize(lin, 0.0)
    np.testing.assert_array_equal(d0.A, np.eye(2))
    np.testing.assert_array_equal(d0.B, np.zeros((2, 1)))
    with pytest.raises(ValueError):
        discretize(lin, -0.1)


def test_discretize_first_order_in_dt():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(4, 4))
    lin = LinearModel(A=A, B=np.zeros(4))
    dt = 0.01
    gap = np.linalg.norm(expm(A * dt) - discretize(lin, dt).A, 2)
    assert gap <= 0.6 * np.linalg.norm(A * dt, 2) ** 2


def test_solve_horizon_zero_state_zero_input():
    lin = discretize(linearize_analytic(CartPoleParams()), 0.01)
    us = solve_horizon(lin.A, lin.B, np.zeros(4), 30,
                       np.eye(4), np.array([[1.0]]))
    assert us.shape == (30, 1)
    assert np.max(np.abs(us)) == 0.0


def test_solve_horizon_scalar_hand_value():
    # minimize u^2 + (1 + u)^2  ->  u = -1/2
    us = solve_horizon(np.array([[1.0]]), np.array([[1.0]]),
                       np.array([1.0]), 1, np.array([[1.0]]),
                       np.array([[1.0]]))
    assert us[0, 0] == pytest.approx(-0.5, abs=1e-12)


def test_solve_horizon_matches_stacked_qp():
    rng = np.random.default_rng(11)
    for trial in range(6):
        n, m = rng.integers(2, 5), rng.integers(1, 3)
        N = int(rng.integers(1, 6))
        Ad = rng.normal(scale=0.5, size=(n, n))
        Bd = rng.normal(scale=0.5, size=(n, m))
        Q = np.diag(rng.uniform(0.1, 2.0, size=n))
        R = np.diag(rng.uniform(0.1, 2.0, size=m))
        z0 = rng.normal(size=n)
        us = solve_horizon(Ad, Bd, z0, N, Q, R)
        ref = stacked_qp_solution(Ad, Bd, z0, N, Q, R)
        np.testing.assert_allclose(us, ref, atol=1e-8)


def test_solve_horizon_weight_scaling_invariance():
    lin = discretize(linearize_analytic(CartPoleParams()), 0.01)
    z0 = np.array([0.2, -0.1, 0.0, 0.3])
    Q = np.diag([10.0, 1.0, 1.0, 1.0])
    R = np.array([[0.1]])
    a = solve_horizon(lin.A, lin.B, z0, 40, Q, R)
    b = solve_horizon(lin.A, lin.B, z0, 40, 7.0 * Q, 7.0 * R)
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_mpc_config_validation():
    with pytest.raises(ValueError):
        MpcConfig(horizon=0)
    with pytest.raises(ValueError):
        MpcConfig(r=0.0)
    with pytest.raises(ValueError):
        MpcConfig(dt=-0.01)
    with pytest.raises(ValueError):
        MpcConfig(q_diag=np.array([1.0, -1.0, 1.0, 1.0]))


def test_closed_loop_at_equilibrium_stays_put():
    p = CartPoleParams()
    traj = closed_loop(p, linearize_analytic(p), MpcConfig(), np.zeros(4), 20)
    assert traj.states.shape == (21, 4)
    assert np.max(np.abs(traj.states)) == 0.0
    assert np.max(np.abs(traj.inputs)) == 0.0


def test_closed_loop_shrinks_small_tilt():
    p = CartPoleParams()
    cfg = MpcConfig(horizon=200, q_diag=np.array([10.0, 10.0, 1.0, 1.0]))
    z0 = np.array([0.05, 0.0, 0.0, 0.0])
    traj = closed_loop(p, linearize_analytic(p), cfg, z0, 200)
    assert abs(traj.states[-1, 0]) < abs(z0[0]) / 2


def test_closed_loop_instability_reports_step():
    p = CartPoleParams()
    cfg = MpcConfig(u_max=0.0)  # actuator pinned: free fall
    with pytest.raises(InstabilityError) as err:
        closed_loop(p, linearize_analytic(p), cfg,
                    np.array([np.pi / 6, 0.0, 0.0, 0.0]), 500)
    assert err.value.step > 0


def test_closed_loop_deterministic():
    p = CartPoleParams()
    cfg = MpcConfig(horizon=60)
    z0 = np.array([np.pi / 12, 0.0, 0.0, 0.0])
    a = closed_loop(p, linearize_analytic(p), cfg, z0, 50)
    b = closed_loop(p, linearize_analytic(p), cfg, z0, 50)
    np.testing.assert_array_equal(a.states, b.states)
    np.testing.assert_array_equal(a.inputs, b.inputs)
