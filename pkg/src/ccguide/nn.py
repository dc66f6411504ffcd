"""Fully connected networks with hand-written backpropagation.

Inputs are ``(in_dim, batch)`` arrays. Each :class:`Network` keeps all of
its weights in one flat vector; the per-layer ``w``/``b`` arrays are views
into it, so optimisers can update the flat vector in place.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

ACTIVATIONS = ("identity", "relu", "tanh", "sigmoid")


def _act(name, a):
    if name == "identity":
        return a
    if name == "relu":
        return np.maximum(a, 0.0)
    if name == "tanh":
        return np.tanh(a)
    if name == "sigmoid":
        return 0.5 * (1.0 + np.tanh(0.5 * a))
    raise InvalidInputError(f"unknown activation {name!r}")


def _act_grad(name, a, out):
    # derivative expressed through the pre-activation ``a`` and output ``out``
    if name == "identity":
        return np.ones_like(a)
    if name == "relu":
        return (a > 0).astype(np.float64)
    if name == "tanh":
        return 1.0 - out * out
    if name == "sigmoid":
        return out * (1.0 - out)
    raise InvalidInputError(f"unknown activation {name!r}")


@dataclass
class DenseLayer:
    w: np.ndarray
    b: np.ndarray
    activation: str = "identity"

    @property
    def in_dim(self):
        return self.w.shape[1]

    @property
    def out_dim(self):
        return self.w.shape[0]


class Network:
    """A stack of dense layers sharing one flat parameter vector."""

    def __init__(self, dims, activations):
        dims = [int(d) for d in dims]
        if len(dims) < 2 or min(dims) < 1:
            raise InvalidInputError(f"invalid layer widths {dims}")
        if len(activations) != len(dims) - 1:
            raise InvalidInputError("need one activation per layer")
        for a in activations:
            if a not in ACTIVATIONS:
                raise InvalidInputError(f"unknown activation {a!r}")
        self.dims = dims
        self.activations = list(activations)
        size = sum(o * i + o for i, o in zip(dims[:-1], dims[1:]))
        self.params = np.zeros(size)
        self.layers = []
        offset = 0
        for (i, o), act in zip(zip(dims[:-1], dims[1:]), self.activations):
            w = self.params[offset:offset + o * i].reshape(o, i)
            offset += o * i
            b = self.params[offset:offset + o]
            offset += o
            self.layers.append(DenseLayer(w, b, act))

    @classmethod
    def create(cls, dims, activations, rng):
        """Glorot-uniform weights, zero biases."""
        net = cls(dims, activations)
        for layer in net.layers:
            bound = np.sqrt(6.0 / (layer.in_dim + layer.out_dim))
            layer.w[...] = rng.uniform(-bound, bound, size=layer.w.shape)
        return net

    @property
    def in_dim(self):
        return self.dims[0]

    @property
    def out_dim(self):
        return self.dims[-1]

    @property
    def parameter_count(self):
        return self.params.size

    def get_params(self):
        return self.params.copy()

    def set_params(self, flat):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != self.params.shape:
            raise InvalidInputError(
                f"expected {self.params.size} parameters, got {flat.size}"
            )
        self.params[...] = flat

    def copy(self):
        net = Network(self.dims, self.activations)
        net.params[...] = self.params
        return net

    def spec(self):
        return {"dims": list(self.dims), "activations": list(self.activations)}

    def __repr__(self):
        return f"Network(dims={self.dims}, activations={self.activations})"


class Tape:
    """Activations recorded by :func:`forward` for :func:`backward`."""

    def __init__(self, net):
        self.net_id = id(net)
        self.inputs = []
        self.outputs = []
        self.pre = []


def forward(net, x):
    """Evaluate ``net`` on a ``(in_dim, batch)`` array. Returns ``(y, tape)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != net.in_dim:
        raise InvalidInputError(
            f"network expects {net.in_dim} input rows, got shape {x.shape}"
        )
    tape = Tape(net)
    h = x
    for layer in net.layers:
        a = layer.w @ h + layer.b[:, None]
        out = _act(layer.activation, a)
        tape.inputs.append(h)
        tape.pre.append(a)
        tape.outputs.append(out)
        h = out
    return h, tape


def backward(net, tape, grad_y):
    """Backpropagate ``grad_y`` (same shape as the forward output).

    Returns the flat parameter gradient (layer order, ``w`` then ``b``) and
    the gradient with respect to the input.
    """
    if tape.net_id != id(net) or len(tape.pre) != len(net.layers):
        raise InvalidInputError("tape was not recorded by this network")
    g = np.asarray(grad_y, dtype=np.float64)
    if g.shape != tape.outputs[-1].shape:
        raise InvalidInputError(
            f"grad_y shape {g.shape} does not match output {tape.outputs[-1].shape}"
        )
    grad = np.zeros_like(net.params)
    offset = net.params.size
    for layer, h, a, out in zip(
        reversed(net.layers), reversed(tape.inputs), reversed(tape.pre), reversed(tape.outputs)
    ):
        ga = g * _act_grad(layer.activation, a, out)
        nw, nb = layer.w.size, layer.b.size
        offset -= nw + nb
        grad[offset:offset + nw] = (ga @ h.T).ravel()
        grad[offset + nw:offset + nw + nb] = ga.sum(axis=1)
        g = layer.w.T @ ga
    return grad, g


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 256
    learning_rate: float = 1e-3
    seed: int = 0
    momentum: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidInputError("learning_rate must be positive")
        if self.batch_size < 1:
            raise InvalidInputError("batch_size must be at least 1")
        if self.epochs < 0:
            raise InvalidInputError("epochs must be non-negative")
        if not 0 <= self.momentum < 1:
            raise InvalidInputError("momentum must lie in [0, 1)")


def sgd_step(net, grad_params, cfg, velocity=None):
    """One SGD/momentum update, in place.

    ``v <- momentum * v + grad``; ``theta <- theta - lr * v``. Returns the
    new velocity (pass ``None`` on the first step).
    """
    grad_params = np.asarray(grad_params, dtype=np.float64)
    if grad_params.shape != net.params.shape:
        raise InvalidInputError(
            f"gradient has {grad_params.size} entries, network has {net.parameter_count}"
        )
    if velocity is None:
        velocity = np.zeros_like(net.params)
    velocity = cfg.momentum * velocity + grad_params
    net.params -= cfg.learning_rate * velocity
    return velocity


def softmax(logits):
    z = logits - logits.max(axis=0, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=0, keepdims=True)


def softmax_cross_entropy(logits, onehot):
    """Mean cross-entropy of softmax(logits) against one-hot columns.

    Returns ``(loss, grad_logits)``.
    """
    logits = np.asarray(logits, dtype=np.float64)
    onehot = np.asarray(onehot, dtype=np.float64)
    if logits.shape != onehot.shape:
        raise InvalidInputError(f"logits {logits.shape} vs targets {onehot.shape}")
    batch = logits.shape[1]
    z = logits - logits.max(axis=0, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=0, keepdims=True))
    log_p = z - log_norm
    loss = -float(np.sum(onehot * log_p)) / batch
    grad = (np.exp(log_p) - onehot) / batch
    return loss, grad
