"""Linear-softmax and one-hidden-layer MLP classifiers with analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..bte import encode_edges

ARCHITECTURES = ("linear", "mlp")
VARIANTS = ("I", "I_hat", "S", "IS", "IS_sob", "I_hat_S", "IS_x2", "I_hat_plus_BTE")
IMAGE_VARIANTS = ("I", "I_hat", "IS", "IS_sob", "I_hat_S", "IS_x2", "I_hat_plus_BTE")
SHAPE_VARIANTS = ("S", "IS", "IS_sob", "I_hat_S", "IS_x2")
EXTRA_AUG_VARIANTS = ("I_hat", "I_hat_S", "I_hat_plus_BTE")


class ShapeError(ValueError):
    pass


@dataclass
class Model:
    architecture: str
    input_shape: tuple[int, ...]
    class_count: int
    params: list[np.ndarray] = field(repr=False)

    @property
    def input_dim(self) -> int:
        return int(np.prod(self.input_shape))

    def copy(self) -> "Model":
        return Model(self.architecture, self.input_shape, self.class_count, [p.copy() for p in self.params])


def init_model(input_shape, class_count: int, architecture: str = "linear", hidden: int = 32, rng=None) -> Model:
    """Linear models start at zero; MLPs get scaled Gaussian weights from ``rng``."""
    input_shape = tuple(int(s) for s in input_shape)
    d = int(np.prod(input_shape))
    if architecture == "linear":
        params = [np.zeros((d, class_count)), np.zeros(class_count)]
    elif architecture == "mlp":
        if rng is None:
            rng = np.random.default_rng(0)
        params = [
            rng.standard_normal((d, hidden)) / np.sqrt(d),
            np.zeros(hidden),
            rng.standard_normal((hidden, class_count)) / np.sqrt(hidden),
            np.zeros(class_count),
        ]
    else:
        raise ValueError(f"unknown architecture {architecture!r}; expected {ARCHITECTURES}")
    return Model(architecture, input_shape, class_count, params)


def as_input(model: Model, x) -> np.ndarray:
    """One image or edge map as a flat feature vector of the model's input size."""
    arr = np.asarray(x)
    if arr.dtype == bool or (arr.ndim == 2 and len(model.input_shape) == 3):
        arr = encode_edges(arr, model.input_shape[2] if len(model.input_shape) == 3 else 1)
    arr = np.asarray(arr, dtype=np.float64)
    if arr.shape != model.input_shape:
        raise ShapeError(f"input shape {arr.shape} does not match model input {model.input_shape}")
    return arr.ravel()


def stack_inputs(model: Model, xs) -> np.ndarray:
    if len(xs) == 0:
        return np.zeros((0, model.input_dim))
    return np.stack([as_input(model, x) for x in xs])


def logits(model: Model, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(X)
    if X.shape[1] != model.input_dim:
        raise ShapeError(f"feature width {X.shape[1]} does not match model input {model.input_dim}")
    if model.architecture == "linear":
        W, b = model.params
        return X @ W + b
    W1, b1, W2, b2 = model.params
    return np.tanh(X @ W1 + b1) @ W2 + b2


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def predict_proba(model: Model, X: np.ndarray) -> np.ndarray:
    return softmax(logits(model, X))


def forward(model: Model, x) -> np.ndarray:
    """Class probabilities for a single image or edge map."""
    return predict_proba(model, as_input(model, x)[None, :])[0]


def cross_entropy(probs: np.ndarray, labels) -> float:
    """Mean cross-entropy of ``probs`` (n x C) against integer labels."""
    probs = np.atleast_2d(probs)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= probs.shape[1]):
        raise ValueError(f"labels must be in [0, {probs.shape[1]})")
    if labels.size == 0:
        return 0.0
    p = probs[np.arange(labels.size), labels]
    return float(-np.mean(np.log(np.maximum(p, 1e-300))))


def loss_and_grad(model: Model, X: np.ndarray, y) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy over the batch and its gradient w.r.t. every parameter."""
    y = np.asarray(y, dtype=np.int64)
    n = X.shape[0]
    if n == 0:
        return 0.0, [np.zeros_like(p) for p in model.params]
    if y.min() < 0 or y.max() >= model.class_count:
        raise ValueError(f"labels must be in [0, {model.class_count})")
    if model.architecture == "linear":
        W, b = model.params
        z = X @ W + b
        h = X
    else:
        W1, b1, W2, b2 = model.params
        a = X @ W1 + b1
        h = np.tanh(a)
        z = h @ W2 + b2
    z = z - z.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(logsum - z[np.arange(n), y]))
    dz = np.exp(z - logsum[:, None])
    dz[np.arange(n), y] -= 1.0
    dz /= n
    if model.architecture == "linear":
        return loss, [X.T @ dz, dz.sum(axis=0)]
    da = (dz @ W2.T) * (1.0 - h**2)
    return loss, [X.T @ da, da.sum(axis=0), h.T @ dz, dz.sum(axis=0)]


def combined_loss(p_images, p_btes, labels_images, labels_btes, lam: float, variant: str = "IS") -> tuple[float, float, float]:
    """(total, l_I, l_S) with total = l_I + lam * l_S.

    Image-only variants have l_S = 0; variant S has l_I = 0 and total = l_S.
    """
    l_i = cross_entropy(p_images, labels_images) if variant != "S" and len(labels_images) else 0.0
    l_s = cross_entropy(p_btes, labels_btes) if variant in SHAPE_VARIANTS and len(labels_btes) else 0.0
    if variant == "S":
        return l_s, 0.0, l_s
    return l_i + lam * l_s, l_i, l_s


def gradient_check(model: Model, X: np.ndarray, y, step: float = 1e-5, X_s=None, y_s=None, lam: float = 1.0, max_coords: int | None = None, rng=None) -> float:
    """Max relative error between analytic and central-difference gradients of
    l_I + lam * l_S (the shape term is skipped when ``X_s`` is None)."""

    def total(m: Model) -> float:
        v = loss_and_grad(m, X, y)[0]
        if X_s is not None:
            v += lam * loss_and_grad(m, X_s, y_s)[0]
        return v

    _, grads = loss_and_grad(model, X, y)
    if X_s is not None:
        grads = [g + lam * gs for g, gs in zip(grads, loss_and_grad(model, X_s, y_s)[1])]
    probe = model.copy()
    worst = 0.0
    for p_idx, p in enumerate(probe.params):
        flat = p.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            coords = (rng or np.random.default_rng(0)).choice(flat.size, max_coords, replace=False)
        for i in coords:
            old = flat[i]
            flat[i] = old + step
            up = total(probe)
            flat[i] = old - step
            down = total(probe)
            flat[i] = old
            num = (up - down) / (2 * step)
            ana = grads[p_idx].reshape(-1)[i]
            denom = max(abs(num), abs(ana), 1e-7)
            worst = max(worst, abs(num - ana) / denom)
    return worst

