"""Small dense network for per-orbital latent vectors, with hand-rolled
reverse-mode gradients and an Adam optimizer on a cosine learning-rate
schedule.

This is the only trainable-parameter machinery in the package: a fixed-depth
multilayer perceptron mapping ``one_hot(orbital) ++ [scaled geometry]`` to a
latent vector, SiLU hidden activations, linear output.  Everything is plain
float64 numpy; no autodiff framework is involved, so the backward pass is
spelled out layer by layer and checked against finite differences in the
tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

__all__ = [
    "OrbitalNet",
    "AdamState",
    "adam_step",
    "cosine_lr",
    "silu",
    "silu_prime",
    "save_net",
    "load_net",
    "save_kernel",
    "load_kernel",
    "CHECKPOINT_VERSION",
]

CHECKPOINT_VERSION = 1


def silu(x: np.ndarray) -> np.ndarray:
    """SiLU activation ``x * sigmoid(x)``."""
    return x * expit(x)


def silu_prime(x: np.ndarray) -> np.ndarray:
    """Derivative of SiLU: ``sigmoid(x) * (1 + x * (1 - sigmoid(x)))``."""
    s = expit(x)
    return s * (1.0 + x * (1.0 - s))


class OrbitalNet:
    """MLP from ``(one-hot orbital, scaled geometry)`` to a latent vector.

    Parameters
    ----------
    n_orb : int
        Number of orbitals; the input dimension is ``n_orb + 1``.
    output_dim : int
        Latent dimension of the output vector.
    hidden : sequence of int
        Hidden layer widths.
    seed : int
        Seed for the uniform +-sqrt(6/(fan_in+fan_out)) weight init.
        Biases start at zero.
    """

    def __init__(self, n_orb: int, output_dim: int, hidden=(200, 200, 200), seed: int = 0):
        if n_orb < 1 or output_dim < 1 or any(h < 1 for h in hidden):
            raise ValueError("network dimensions must be positive")
        self.n_orb = int(n_orb)
        self.output_dim = int(output_dim)
        self.sizes = [self.n_orb + 1, *map(int, hidden), self.output_dim]
        self.seed = int(seed)
        rng = np.random.default_rng(self.seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    # -- parameter plumbing ---------------------------------------------------

    @property
    def params(self) -> list[np.ndarray]:
        """Flat list of parameter arrays, alternating weight/bias per layer."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "OrbitalNet":
        other = OrbitalNet.__new__(OrbitalNet)
        other.n_orb = self.n_orb
        other.output_dim = self.output_dim
        other.sizes = list(self.sizes)
        other.seed = self.seed
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other

    # -- evaluation -----------------------------------------------------------

    def embed(self, orbitals, r_norm) -> np.ndarray:
        """Input rows ``one_hot(orbital) ++ [r_norm]`` for aligned arrays."""
        orbitals = np.atleast_1d(np.asarray(orbitals, dtype=np.intp))
        r_norm = np.broadcast_to(np.asarray(r_norm, dtype=np.float64), orbitals.shape)
        if orbitals.min(initial=0) < 0 or orbitals.max(initial=0) >= self.n_orb:
            raise ValueError("orbital index out of range")
        x = np.zeros((orbitals.size, self.n_orb + 1))
        x[np.arange(orbitals.size), orbitals] = 1.0
        x[:, -1] = r_norm
        return x

    def forward(self, x: np.ndarray, with_cache: bool = False):
        """Batched forward pass.

        ``x`` has shape ``(batch, n_orb + 1)``.  With ``with_cache=True``
        returns ``(y, cache)`` where the cache holds what :meth:`backward`
        needs.
        """
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.sizes[0]:
            raise ValueError(f"input shape {x.shape} incompatible with {self.sizes[0]} features")
        activations = [x]
        pre = []
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            if i < last:
                pre.append(z)
                a = silu(z)
                activations.append(a)
            else:
                a = z
        if with_cache:
            return a, (activations, pre)
        return a

    def predict(self, orbital: int, r_norm: float) -> np.ndarray:
        """Latent vector of a single orbital at a single scaled geometry."""
        return self.forward(self.embed([orbital], [r_norm]))[0]

    def backward(self, cache, grad_out: np.ndarray):
        """Gradients of ``sum(grad_out * forward(x))`` w.r.t. parameters.

        Returns ``(grads, grad_x)`` with ``grads`` ordered like
        :attr:`params`.
        """
        activations, pre = cache
        grads: list[np.ndarray] = [None] * (2 * len(self.weights))
        delta = np.asarray(grad_out, dtype=np.float64)
        for i in range(len(self.weights) - 1, -1, -1):
            a_prev = activations[i]
            grads[2 * i] = a_prev.T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * silu_prime(pre[i - 1])
            else:
                delta = delta @ self.weights[i].T
        return grads, delta


# ----------------------------------------------------------------------------
# Adam with a cosine learning-rate schedule
# ----------------------------------------------------------------------------


def cosine_lr(base_lr: float, t: int, total_steps: int) -> float:
    """Learning rate at step ``t`` (1-based): ``base_lr/2 (1 + cos(pi t/T))``."""
    if total_steps < 1:
        raise ValueError("total_steps must be positive")
    return base_lr * 0.5 * (1.0 + math.cos(math.pi * min(t, total_steps) / total_steps))


@dataclass
class AdamState:
    """First/second moment accumulators plus the schedule bookkeeping."""

    base_lr: float
    total_steps: int
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def for_params(cls, params, base_lr: float, total_steps: int, **kw) -> "AdamState":
        state = cls(base_lr=base_lr, total_steps=total_steps, **kw)
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
        return state


def adam_step(params, grads, state: AdamState) -> float:
    """One in-place Adam update; returns the learning rate that was applied.

    Raises ``FloatingPointError`` on non-finite gradients, leaving the
    parameters untouched.
    """
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("params/grads/state length mismatch")
    for g in grads:
        if not np.isfinite(g).all():
            raise FloatingPointError("non-finite gradient in adam_step")
    state.t += 1
    lr = cosine_lr(state.base_lr, state.t, state.total_steps)
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.t
    bc2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * np.square(g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return lr


# ----------------------------------------------------------------------------
# Checkpoints
# ----------------------------------------------------------------------------


def save_net(path, net: OrbitalNet, step: int = 0) -> None:
    """Write a network checkpoint; round-trips parameters bit for bit."""
    payload = {
        "version": np.int64(CHECKPOINT_VERSION),
        "layout": np.str_("orbital-net"),
        "sizes": np.asarray(net.sizes, dtype=np.int64),
        "seed": np.int64(net.seed),
        "step": np.int64(step),
    }
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        payload[f"w{i}"] = w
        payload[f"b{i}"] = b
    np.savez(path, **payload)


def _check_header(data, layout: str, path) -> None:
    if int(data["version"]) != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: checkpoint version {int(data['version'])} != {CHECKPOINT_VERSION}")
    if str(data["layout"]) != layout:
        raise ValueError(f"{path}: checkpoint layout {data['layout']!r}, expected {layout!r}")


def load_net(path) -> tuple[OrbitalNet, int]:
    """Read a checkpoint written by :func:`save_net`."""
    with np.load(path) as data:
        _check_header(data, "orbital-net", path)
        sizes = data["sizes"].tolist()
        net = OrbitalNet(sizes[0] - 1, sizes[-1], hidden=sizes[1:-1], seed=int(data["seed"]))
        for i in range(len(net.weights)):
            net.weights[i] = data[f"w{i}"].copy()
            net.biases[i] = data[f"b{i}"].copy()
        return net, int(data["step"])


def save_kernel(path, matrix, step: int = 0) -> None:
    """Write a symmetric kernel matrix in the shared checkpoint container.

    ``matrix`` may be a plain array or any wrapper exposing ``.matrix``.
    """
    matrix = np.asarray(getattr(matrix, "matrix", matrix), dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"kernel must be square, got shape {matrix.shape}")
    np.savez(
        path,
        version=np.int64(CHECKPOINT_VERSION),
        layout=np.str_("symmetric-matrix"),
        step=np.int64(step),
        matrix=matrix,
    )


def load_kernel(path) -> tuple[np.ndarray, int]:
    with np.load(path) as data:
        _check_header(data, "symmetric-matrix", path)
        return data["matrix"].copy(), int(data["step"])
