"""Independent reference implementations used as test oracles."""

import numpy as np


def stacked_qp_solution(Ad, Bd, z0, horizon, Q, R):
    """Finite-horizon quadratic regulator solved as one dense least-
    squares problem over the stacked input sequence (normal equations),
    entirely independent of the Riccati recursion under test.

    Cost: sum_{k=0}^{N} z_k' Q z_k + sum_{k=0}^{N-1} u_k' R u_k with
    z_{k+1} = Ad z_k + Bd u_k.
    """
    Ad = np.atleast_2d(np.asarray(Ad, dtype=float))
    Bd = np.atleast_2d(np.asarray(Bd, dtype=float))
    z0 = np.atleast_1d(np.asarray(z0, dtype=float))
    n, m = Bd.shape
    N = horizon
    # z_k = Phi[k] z0 + Gamma[k] u  for k = 1..N
    Phi = np.zeros((N * n, n))
    Gamma = np.zeros((N * n, N * m))
    Ak = np.eye(n)
    for k in range(N):
        Ak = Ad @ Ak
        Phi[k * n:(k + 1) * n] = Ak
        for j in range(k + 1):
            Gamma[k * n:(k + 1) * n, j * m:(j + 1) * m] = (
                np.linalg.matrix_power(Ad, k - j) @ Bd)
    Qbar = np.kron(np.eye(N), Q)
    Rbar = np.kron(np.eye(N), R)
    H = Gamma.T @ Qbar @ Gamma + Rbar
    f = Gamma.T @ Qbar @ Phi @ z0
    u = np.linalg.solve(H, -f)
    return u.reshape(N, m)


def smsd_closed_form(t, x0, v0, p):
    """Analytic underdamped mass-spring-damper solution."""
    wn = np.sqrt(p.k / p.m)
    zeta = p.d / (2.0 * np.sqrt(p.k * p.m))
    assert zeta < 1.0
    wd = wn * np.sqrt(1.0 - zeta * zeta)
    c2 = (v0 + zeta * wn * x0) / wd
    x = np.exp(-zeta * wn * t) * (x0 * np.cos(wd * t) + c2 * np.sin(wd * t))
    v = np.exp(-zeta * wn * t) * (
        (c2 * wd - zeta * wn * x0) * np.cos(wd * t)
        - (x0 * wd + zeta * wn * c2) * np.sin(wd * t))
    return x, v
