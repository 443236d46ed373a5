"""Network forward/backward pass and the Adam optimizer."""

import numpy as np
import pytest

import trajfield.mlp as nets


def _fd_gradient(net, X, Y, h=1e-5):
    """Central finite differences over every parameter."""
    grads = []
    for l in range(len(net.weights)):
        layer = []
        for arr in (net.weights[l], net.biases[l]):
            g = np.zeros_like(arr)
            flat = arr.ravel()
            gflat = g.ravel()
            for i in range(flat.size):
                keep = flat[i]
                flat[i] = keep + h
                lp = nets.loss_and_grad(net, X, Y)[0]
                flat[i] = keep - h
                lm = nets.loss_and_grad(net, X, Y)[0]
                flat[i] = keep
                gflat[i] = (lp - lm) / (2.0 * h)
            layer.append(g)
        grads.append(tuple(layer))
    return grads


def _max_rel_err(analytic, numeric):
    worst = 0.0
    for (gW, gb), (nW, nb) in zip(analytic, numeric):
        for a, b in ((gW, nW), (gb, nb)):
            den = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)
            worst = max(worst, np.max(np.abs(a - b) / den))
    return worst


def _min_hidden_preactivation(net, X):
    """Smallest |pre-activation| over the hidden relu layers, i.e. the
    distance of the probe batch to the nearest kink."""
    a = X
    gap = np.inf
    for l in range(len(net.weights) - 1):
        pre = a @ net.weights[l].T + net.biases[l]
        gap = min(gap, np.min(np.abs(pre)))
        a = np.maximum(pre, 0.0)
    return gap


def test_init_deterministic_and_zero_biases():
    a = nets.init_mlp((2, 16, 1), seed=9)
    b = nets.init_mlp((2, 16, 1), seed=9)
    for wa, wb in zip(a.weights, b.weights):
        np.testing.assert_array_equal(wa, wb)
    assert all(np.all(bias == 0.0) for bias in a.biases)


def test_xavier_variance_scale():
    net = nets.init_mlp((64, 64, 1), seed=0)
    want = 6.0 / (64 + 64) / 3.0  # variance of uniform(-a, a) with a^2 = 6/(fan_in+fan_out)
    assert abs(np.var(net.weights[0]) - want) / want < 0.2


def test_init_rejects_bad_dims():
    with pytest.raises(ValueError):
        nets.init_mlp(())
    with pytest.raises(ValueError):
        nets.init_mlp((3, 0, 1))


def test_forward_zero_and_identity_nets():
    net = nets.init_mlp((3, 4, 2), seed=0)
    for w in net.weights:
        w[:] = 0.0
    np.testing.assert_array_equal(
        nets.forward(net, np.ones((5, 3))), np.zeros((5, 2)))
    linear = nets.Mlp(dims=(3, 3), weights=[np.eye(3)],
                      biases=[np.zeros(3)], activation="tanh",
                      init_scheme="xavier")
    x = np.array([[0.1, -2.0, 0.7]])
    np.testing.assert_array_equal(nets.forward(linear, x), x)


def test_forward_tiny_net_hand_value():
    net = nets.Mlp(dims=(1, 2, 1),
                   weights=[np.array([[1.0], [-2.0]]),
                            np.array([[0.5, 0.25]])],
                   biases=[np.array([0.1, -0.1]), np.array([0.2])],
                   activation="tanh", init_scheme="xavier")
    x = 0.3
    hidden = np.tanh(np.array([1.0 * x + 0.1, -2.0 * x - 0.1]))
    want = 0.5 * hidden[0] + 0.25 * hidden[1] + 0.2
    out = nets.forward(net, np.array([[x]]))
    assert out[0, 0] == pytest.approx(want, rel=1e-14)


def test_loss_zero_when_targets_match():
    net = nets.init_mlp((2, 8, 2), seed=1)
    X = np.random.default_rng(0).normal(size=(6, 2))
    Y = nets.forward(net, X)
    loss, grads = nets.loss_and_grad(net, X, Y)
    assert loss == 0.0
    assert all(np.max(np.abs(g)) == 0.0 for gw, gb in grads for g in (gw, gb))


def test_loss_batch_permutation_invariant():
    net = nets.init_mlp((2, 8, 1), seed=1)
    rng = np.random.default_rng(5)
    X = rng.normal(size=(10, 2))
    Y = rng.normal(size=(10, 1))
    perm = rng.permutation(10)
    a = nets.loss_and_grad(net, X, Y)[0]
    b = nets.loss_and_grad(net, X[perm], Y[perm])[0]
    assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("dims", [(2, 16, 2), (2, 16, 16, 1), (3, 8, 8, 8, 2)])
@pytest.mark.parametrize("activation", ["tanh", "relu"])
def test_backprop_matches_finite_differences(dims, activation):
    net = nets.init_mlp(dims, activation=activation, seed=3)
    rng = np.random.default_rng(7)
    X = rng.normal(size=(8, dims[0]))
    if activation == "relu":
        # central differences are a valid oracle only away from the relu
        # kinks; redraw the probe batch until every hidden pre-activation
        # clears the parameter step by a wide margin
        for _ in range(200):
            if _min_hidden_preactivation(net, X) > 3e-3:
                break
            X = rng.normal(size=(8, dims[0]))
        assert _min_hidden_preactivation(net, X) > 3e-3
    Y = rng.normal(size=(8, dims[-1]))
    _, analytic = nets.loss_and_grad(net, X, Y)
    numeric = _fd_gradient(net, X, Y)
    assert _max_rel_err(analytic, numeric) < 1e-5


def test_adam_first_step_closed_form():
    net = nets.Mlp(dims=(1, 1), weights=[np.array([[0.0]])],
                   biases=[np.array([0.0])], activation="tanh",
                   init_scheme="xavier")
    state = nets.AdamState.for_net(net, base_lr=1e-3)
    stepped, _ = nets.adam_step(net, [(np.array([[1.0]]), np.zeros(1))],
                                state)
    # bias-corrected moments are both 1 at t=1
    assert stepped.weights[0][0, 0] == pytest.approx(-1e-3 / (1.0 + 1e-8),
                                                     rel=1e-12)


def test_adam_zero_gradient_is_identity():
    net = nets.init_mlp((2, 4, 1), seed=0)
    state = nets.AdamState.for_net(net)
    zero = [(np.zeros_like(w), np.zeros_like(b))
            for w, b in zip(net.weights, net.biases)]
    stepped, _ = nets.adam_step(net, zero, state)
    for w0, w1 in zip(net.weights, stepped.weights):
        np.testing.assert_array_equal(w0, w1)


def test_adam_minimizes_scalar_quadratic():
    net = nets.Mlp(dims=(1, 1), weights=[np.array([[1.0]])],
                   biases=[np.array([0.0])], activation="tanh",
                   init_scheme="xavier")
    state = nets.AdamState.for_net(net, base_lr=0.1)
    for _ in range(200):
        grad = [(2.0 * net.weights[0], np.zeros(1))]
        net, state = nets.adam_step(net, grad, state)
    assert abs(net.weights[0][0, 0]) < 1e-2


def test_lr_decay_schedule():
    net = nets.init_mlp((1, 2, 1), seed=0)
    state = nets.AdamState.for_net(net, base_lr=1e-3, decay=0.98)
    assert nets.decay_lr(state, 0) == pytest.approx(1e-3)
    assert nets.decay_lr(state, 1) == pytest.approx(9.8e-4)
    assert nets.decay_lr(state, 100) == pytest.approx(1e-3 * 0.98 ** 100)
    assert nets.decay_lr(state, 100) == pytest.approx(1e-3 * 0.1326, rel=1e-3)


def test_jacobian_linear_net_and_fd_check():
    W = np.array([[1.0, -2.0, 0.5], [0.0, 3.0, 1.5]])
    linear = nets.Mlp(dims=(3, 2), weights=[W], biases=[np.zeros(2)],
                      activation="tanh", init_scheme="xavier")
    np.testing.assert_array_equal(nets.jacobian(linear, np.ones(3)), W)

    net = nets.init_mlp((5, 16, 2), seed=2)
    x = np.random.default_rng(1).normal(size=5)
    J = nets.jacobian(net, x)
    h = 1e-5
    for j in range(5):
        e = np.zeros(5)
        e[j] = h
        col = (nets.forward(net, (x + e)[None, :])
               - nets.forward(net, (x - e)[None, :]))[0] / (2.0 * h)
        den = np.maximum(np.abs(col), 1e-6)
        assert np.max(np.abs(J[:, j] - col) / den) < 1e-4
