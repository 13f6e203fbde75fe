"""Dense, LSTM and embedding layers with explicit backprop.

Small enough to audit, big enough for the path-generation architectures:
every layer owns its parameters, caches one forward pass, and accumulates
gradients into ``Param.grad`` on backward. Shapes are batch-first; the
LSTM takes time-major sequences (T, B, input).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Param",
    "DenseLayer",
    "LstmLayer",
    "EmbeddingLayer",
    "softmax",
    "cross_entropy",
    "clamp_events",
    "reset_clamp_events",
    "record_clamp_events",
]

ACTIVATIONS = ("identity", "tanh", "relu", "softmax")

# Count of cross-entropy evaluations that hit the 1e-12 probability clamp.
_CLAMP_EVENTS = 0


def clamp_events() -> int:
    return _CLAMP_EVENTS


def reset_clamp_events() -> None:
    global _CLAMP_EVENTS
    _CLAMP_EVENTS = 0


def record_clamp_events(n: int) -> None:
    """Fold clamp hits from batched losses into the shared counter."""
    global _CLAMP_EVENTS
    _CLAMP_EVENTS += int(n)


class Param:
    """A learnable array and its gradient accumulator."""

    __slots__ = ("name", "value", "grad")

    def __init__(self, name: str, value: np.ndarray):
        self.name = name
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def __repr__(self) -> str:
        return f"Param({self.name}, shape={self.value.shape})"


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape: tuple[int, ...]) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def cross_entropy(dist: np.ndarray, target: int) -> tuple[float, np.ndarray]:
    """Negative log-likelihood of ``target`` plus the gradient w.r.t. logits.

    For a softmax output the logit gradient is simply p - one_hot(target).
    Zero probabilities are clamped at 1e-12 and counted in clamp_events().
    """
    global _CLAMP_EVENTS
    p = np.asarray(dist, dtype=np.float64)
    pt = p[target]
    if pt < 1e-12:
        pt = 1e-12
        _CLAMP_EVENTS += 1
    loss = -float(np.log(pt))
    grad = p.copy()
    grad[target] -= 1.0
    return loss, grad


class DenseLayer:
    """Affine map plus one of identity/tanh/relu/softmax."""

    def __init__(self, in_dim: int, out_dim: int, activation: str = "identity", *, rng: np.random.Generator):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.activation = activation
        self.W = Param("W", glorot(rng, in_dim, out_dim, (in_dim, out_dim)))
        self.b = Param("b", np.zeros(out_dim))
        self._x: np.ndarray | None = None
        self._out: np.ndarray | None = None

    def params(self) -> list[Param]:
        return [self.W, self.b]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Inference-only forward with no cached state.

        Generation calls this so concurrent requests never race on the
        training caches.
        """
        if x.shape[-1] != self.in_dim:
            raise ValueError(f"dense layer expects input dim {self.in_dim}, got {x.shape[-1]}")
        z = x @ self.W.value + self.b.value
        if self.activation == "tanh":
            return np.tanh(z)
        if self.activation == "relu":
            return np.maximum(z, 0.0)
        if self.activation == "softmax":
            return softmax(z)
        return z

    def forward(self, x: np.ndarray) -> np.ndarray:
        out = self.apply(x)
        self._x = x
        self._out = out
        return out

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        """Gradient w.r.t. the input, given gradient w.r.t. the output."""
        out = self._out
        if self.activation == "tanh":
            grad_z = grad_out * (1.0 - out * out)
        elif self.activation == "relu":
            grad_z = grad_out * (out > 0.0)
        elif self.activation == "softmax":
            inner = (grad_out * out).sum(axis=-1, keepdims=True)
            grad_z = out * (grad_out - inner)
        else:
            grad_z = grad_out
        return self.backward_from_preactivation(grad_z)

    def backward_from_preactivation(self, grad_z: np.ndarray) -> np.ndarray:
        """Backward pass given the gradient w.r.t. the pre-activation.

        This is the fast path for softmax + cross-entropy, whose combined
        logit gradient (p - one_hot) skips the softmax Jacobian.
        """
        x = self._x
        x2 = x.reshape(-1, self.in_dim)
        g2 = grad_z.reshape(-1, self.out_dim)
        self.W.grad += x2.T @ g2
        self.b.grad += g2.sum(axis=0)
        return grad_z @ self.W.value.T


class LstmLayer:
    """Single LSTM layer over a time-major sequence.

    Standard gate equations (sigmoid input/forget/output gates, tanh
    candidate); the forget-gate bias starts at +1. Gradients also flow to
    the initial states, which the path generator's encoder produces.
    """

    def __init__(self, in_dim: int, hidden: int, *, rng: np.random.Generator):
        self.in_dim = in_dim
        self.hidden = hidden
        H = hidden
        self.Wx = Param("Wx", glorot(rng, in_dim, 4 * H, (in_dim, 4 * H)))
        self.Wh = Param("Wh", glorot(rng, H, 4 * H, (H, 4 * H)))
        b = np.zeros(4 * H)
        b[H : 2 * H] = 1.0
        self.b = Param("b", b)
        self._cache: list[tuple] = []
        self._h0: np.ndarray | None = None

    def params(self) -> list[Param]:
        return [self.Wx, self.Wh, self.b]

    @staticmethod
    def _sigmoid(z: np.ndarray) -> np.ndarray:
        return 1.0 / (1.0 + np.exp(-z))

    def step(self, x: np.ndarray, h: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One inference step without caching."""
        H = self.hidden
        z = x @ self.Wx.value + h @ self.Wh.value + self.b.value
        i = self._sigmoid(z[..., :H])
        f = self._sigmoid(z[..., H : 2 * H])
        g = np.tanh(z[..., 2 * H : 3 * H])
        o = self._sigmoid(z[..., 3 * H :])
        c_new = f * c + i * g
        h_new = o * np.tanh(c_new)
        return h_new, c_new

    def forward(self, xs: np.ndarray, h0: np.ndarray, c0: np.ndarray) -> np.ndarray:
        """Run the full sequence; returns hidden states (T, B, H)."""
        if xs.ndim != 3 or xs.shape[-1] != self.in_dim:
            raise ValueError(f"lstm expects (T, B, {self.in_dim}) inputs, got {xs.shape}")
        T, B, _ = xs.shape
        H = self.hidden
        self._cache = []
        self._h0 = h0
        h, c = h0, c0
        hs = np.empty((T, B, H))
        for t in range(T):
            x = xs[t]
            z = x @ self.Wx.value + h @ self.Wh.value + self.b.value
            i = self._sigmoid(z[:, :H])
            f = self._sigmoid(z[:, H : 2 * H])
            g = np.tanh(z[:, 2 * H : 3 * H])
            o = self._sigmoid(z[:, 3 * H :])
            c_new = f * c + i * g
            tc = np.tanh(c_new)
            h_new = o * tc
            self._cache.append((x, h, c, i, f, g, o, tc))
            h, c = h_new, c_new
            hs[t] = h
        return hs

    def backward(self, grad_hs: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Backprop through time.

        ``grad_hs`` holds the loss gradient w.r.t. every emitted hidden
        state. Returns gradients w.r.t. the inputs and the initial states.
        """
        T = len(self._cache)
        H = self.hidden
        B = grad_hs.shape[1]
        grad_xs = np.empty((T, B, self.in_dim))
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t in range(T - 1, -1, -1):
            x, h_prev, c_prev, i, f, g, o, tc = self._cache[t]
            dh = grad_hs[t] + dh_next
            do = dh * tc
            dc = dc_next + dh * o * (1.0 - tc * tc)
            df = dc * c_prev
            di = dc * g
            dg = dc * i
            dz = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g * g),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            self.Wx.grad += x.T @ dz
            self.Wh.grad += h_prev.T @ dz
            self.b.grad += dz.sum(axis=0)
            grad_xs[t] = dz @ self.Wx.value.T
            dh_next = dz @ self.Wh.value.T
            dc_next = dc * f
        return grad_xs, dh_next, dc_next


class EmbeddingLayer:
    """Token-id lookup table with sparse gradient accumulation."""

    def __init__(self, vocab_size: int, dim: int, *, rng: np.random.Generator):
        self.vocab_size = vocab_size
        self.dim = dim
        self.E = Param("E", glorot(rng, vocab_size, dim, (vocab_size, dim)))
        self._idx: np.ndarray | None = None

    def params(self) -> list[Param]:
        return [self.E]

    def forward(self, idx: np.ndarray) -> np.ndarray:
        self._idx = idx
        return self.E.value[idx]

    def backward(self, grad_out: np.ndarray) -> None:
        np.add.at(self.E.grad, self._idx, grad_out)
