"""Fully-connected network with explicit backpropagation and Adam.

Parameters live in plain NumPy arrays: weights[l] has shape
(dims[l+1], dims[l]) (one row per output unit) and biases[l] has shape
(dims[l+1],).  Batches are row-major, X of shape (B, dims[0]).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("tanh", "relu")
INIT_SCHEMES = ("xavier", "kaiming")


@dataclass
class Mlp:
    dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "tanh"
    init_scheme: str = "xavier"

    @property
    def n_layers(self) -> int:
        return len(self.weights)


def init_mlp(dims, activation: str = "tanh", init_scheme: str = "xavier",
             seed: int = 0) -> Mlp:
    """Random network: Xavier-uniform or Kaiming-normal weights, zero
    biases."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ValueError(f"bad layer dims {dims}")
    if activation not in ACTIVATIONS:
        raise ValueError(f"unknown activation {activation!r}")
    if init_scheme not in INIT_SCHEMES:
        raise ValueError(f"unknown init scheme {init_scheme!r}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        if init_scheme == "xavier":
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            W = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        else:
            W = rng.normal(0.0, np.sqrt(2.0 / fan_in),
                           size=(fan_out, fan_in))
        weights.append(W)
        biases.append(np.zeros(fan_out))
    return Mlp(dims=dims, weights=weights, biases=biases,
               activation=activation, init_scheme=init_scheme)


def _act(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return np.tanh(x)
    return np.maximum(x, 0.0)


def _act_deriv(pre: np.ndarray, post: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        return 1.0 - post * post
    return (pre > 0.0).astype(float)


def _forward_cache(net: Mlp, X: np.ndarray):
    """Forward pass keeping pre/post activations of every layer."""
    a = X
    pres, posts = [], [X]
    last = net.n_layers - 1
    for l, (W, b) in enumerate(zip(net.weights, net.biases)):
        pre = a @ W.T + b
        a = pre if l == last else _act(pre, net.activation)
        pres.append(pre)
        posts.append(a)
    return pres, posts


def forward(net: Mlp, X: np.ndarray) -> np.ndarray:
    """Network output; hidden layers use the configured activation, the
    output layer is linear."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != net.dims[0]:
        raise ValueError(f"input width {X.shape[1]} does not match "
                         f"network input width {net.dims[0]}")
    out = _forward_cache(net, X)[1][-1]
    return out[0] if single else out


def _backward(net: Mlp, pres, posts, delta: np.ndarray):
    """Backpropagate output-space delta; returns (param grads, input grad)."""
    grads_w = [None] * net.n_layers
    grads_b = [None] * net.n_layers
    for l in range(net.n_layers - 1, -1, -1):
        grads_w[l] = delta.T @ posts[l]
        grads_b[l] = delta.sum(axis=0)
        delta = delta @ net.weights[l]
        if l > 0:
            delta = delta * _act_deriv(pres[l - 1], posts[l],
                                       net.activation)
    return grads_w, grads_b, delta


def loss_and_grad(net: Mlp, X: np.ndarray, Y: np.ndarray):
    """Mean squared error (mean over the batch of the squared residual
    norm) and its gradient with respect to every weight and bias."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape[0] != Y.shape[0]:
        raise ValueError("X and Y batch sizes differ")
    if Y.shape[1] != net.dims[-1]:
        raise ValueError(f"target width {Y.shape[1]} does not match "
                         f"network output width {net.dims[-1]}")
    pres, posts = _forward_cache(net, X)
    resid = posts[-1] - Y
    loss = float(np.mean(np.sum(resid * resid, axis=1)))
    delta = 2.0 * resid / X.shape[0]
    grads_w, grads_b, _ = _backward(net, pres, posts, delta)
    return loss, list(zip(grads_w, grads_b))


def jacobian(net: Mlp, x: np.ndarray) -> np.ndarray:
    """d output / d input at a single point, shape (dims[-1], dims[0]),
    assembled from one backward pass per output component."""
    x = np.asarray(x, dtype=float)
    if x.shape != (net.dims[0],):
        raise ValueError(f"expected input of shape ({net.dims[0]},)")
    pres, posts = _forward_cache(net, x[None, :])
    rows = []
    for j in range(net.dims[-1]):
        seed = np.zeros((1, net.dims[-1]))
        seed[0, j] = 1.0
        rows.append(_backward(net, pres, posts, seed)[2][0])
    return np.vstack(rows)


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    base_lr: float = 1e-3
    decay: float = 1.0

    @classmethod
    def for_net(cls, net: Mlp, base_lr: float = 1e-3,
                decay: float = 1.0) -> "AdamState":
        shapes = [(W, b) for W, b in zip(net.weights, net.biases)]
        m = [np.zeros_like(a) for Wb in shapes for a in Wb]
        v = [np.zeros_like(a) for Wb in shapes for a in Wb]
        return cls(m=m, v=v, base_lr=base_lr, decay=decay)


def decay_lr(state: AdamState, epoch: int) -> float:
    """Exponentially decayed learning rate base_lr * decay**epoch."""
    return state.base_lr * state.decay ** epoch


def adam_step(net: Mlp, grads, state: AdamState, lr: float | None = None):
    """One Adam update of every parameter in place; returns (net, state)."""
    if lr is None:
        lr = state.base_lr
    state.t += 1
    b1, b2, eps = state.beta1, state.beta2, state.eps
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    params = [a for W, b in zip(net.weights, net.biases) for a in (W, b)]
    flat_grads = [g for gw, gb in grads for g in (gw, gb)]
    for p, g, m, v in zip(params, flat_grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return net, state
