"""Feed-forward ReLU network with softmax output and mean cross-entropy loss."""

from __future__ import annotations

import numpy as np

from .base import counter_rng, softmax_rows


def init_layers(sizes, rng) -> list[tuple[np.ndarray, np.ndarray]]:
    """Glorot-uniform weights, zero biases."""
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        layers.append((rng.uniform(-bound, bound, size=(fan_in, fan_out)), np.zeros(fan_out)))
    return layers


def forward(layers, X):
    acts = [X]
    h = X
    for i, (W, b) in enumerate(layers):
        z = h @ W + b
        h = softmax_rows(z) if i == len(layers) - 1 else np.maximum(z, 0.0)
        acts.append(h)
    return acts


def loss_and_grads(layers, X, Y):
    """Mean cross-entropy against one-hot (or soft) targets ``Y`` and its gradients."""
    acts = forward(layers, X)
    P = acts[-1]
    n = X.shape[0]
    loss = float(-(Y * np.log(np.clip(P, 1e-300, None))).sum() / n)
    grads = [None] * len(layers)
    delta = (P - Y) / n
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        grads[i] = (acts[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ W.T) * (acts[i] > 0.0)
    return loss, grads


def fit_mlp(X, y, n_classes, hp, seed) -> dict:
    rng = counter_rng(seed, 0)
    layers = init_layers([X.shape[1], hp.mlp_hidden, n_classes], rng)
    Y = np.zeros((X.shape[0], n_classes))
    Y[np.arange(X.shape[0]), y] = 1.0
    lr = hp.mlp_learning_rate
    losses = []
    for _ in range(hp.mlp_epochs):
        loss, grads = loss_and_grads(layers, X, Y)
        losses.append(loss)
        layers = [(W - lr * gW, b - lr * gb) for (W, b), (gW, gb) in zip(layers, grads)]
    params = {"losses": np.array(losses)}
    for i, (W, b) in enumerate(layers):
        params[f"W{i}"] = W
        params[f"b{i}"] = b
    return params


def _layers_from_params(params):
    out = []
    i = 0
    while f"W{i}" in params:
        out.append((params[f"W{i}"], params[f"b{i}"]))
        i += 1
    return out


def proba_mlp(params, X):
    return forward(_layers_from_params(params), X)[-1]


def mlp_gradient_check(layer_sizes, seed: int, n_samples: int = 6, step: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or min(sizes) < 1:
        raise ValueError("need at least an input and an output layer, all sizes >= 1")
    rng = counter_rng(seed, 1)
    layers = [(rng.normal(0.0, 0.5, W.shape), rng.normal(0.0, 0.5, b.shape)) for W, b in init_layers(sizes, rng)]
    X = rng.normal(size=(n_samples, sizes[0]))
    Y = np.zeros((n_samples, sizes[-1]))
    Y[np.arange(n_samples), rng.integers(0, sizes[-1], size=n_samples)] = 1.0
    _, grads = loss_and_grads(layers, X, Y)

    worst = 0.0
    for li, (W, b) in enumerate(layers):
        for arr, g in ((W, grads[li][0]), (b, grads[li][1])):
            flat, gflat = arr.reshape(-1), g.reshape(-1)
            for j in range(flat.shape[0]):
                orig = flat[j]
                flat[j] = orig + step
                up, _ = loss_and_grads(layers, X, Y)
                flat[j] = orig - step
                down, _ = loss_and_grads(layers, X, Y)
                flat[j] = orig
                numeric = (up - down) / (2.0 * step)
                analytic = gflat[j]
                denom = max(abs(numeric) + abs(analytic), 1e-8)
                worst = max(worst, abs(numeric - analytic) / denom)
    return worst
