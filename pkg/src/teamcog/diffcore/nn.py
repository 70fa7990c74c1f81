"""Neural building blocks on top of the autodiff tensors.

Layers hold named parameter tensors; ``params()`` returns an ordered
name -> Tensor dict used by the optimizer, target sync and checkpoints.
Weights init uniform in +-1/sqrt(fan_in), biases at zero.
"""

import numpy as np

from . import tensor as T
from .tensor import Tensor

DELTA_FLOOR = 1e-3  # lower bound for Gaussian std heads


def uniform_init(rng, shape, fan_in, dtype=np.float32):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


ACTIVATIONS = {
    None: lambda x: x,
    "linear": lambda x: x,
    "tanh": T.tanh,
    "sigmoid": T.sigmoid,
    "relu": T.relu,
    "elu": T.elu,
}


class Dense:
    """Affine map plus optional nonlinearity: act(x @ w + b)."""

    def __init__(self, n_in, n_out, rng, activation=None, dtype=np.float32):
        self.n_in = n_in
        self.n_out = n_out
        self.activation = activation
        self.w = Tensor(uniform_init(rng, (n_in, n_out), n_in, dtype), requires_grad=True)
        self.b = Tensor(np.zeros(n_out, dtype=dtype), requires_grad=True)
        self._act = ACTIVATIONS[activation]

    def __call__(self, x):
        if x.shape[-1] != self.n_in:
            raise ValueError(f"dense layer expects input dim {self.n_in}, got {x.shape[-1]}")
        return self._act(T.add(T.matmul(x, self.w), self.b))

    def params(self):
        return {"w": self.w, "b": self.b}


class MLP:
    """Two-layer perceptron: dense(act) -> dense(linear)."""

    def __init__(self, n_in, n_hidden, n_out, rng, activation="elu", dtype=np.float32):
        self.fc1 = Dense(n_in, n_hidden, rng, activation=activation, dtype=dtype)
        self.fc2 = Dense(n_hidden, n_out, rng, activation=None, dtype=dtype)

    def __call__(self, x):
        return self.fc2(self.fc1(x))

    def params(self):
        out = {}
        out.update({f"fc1.{k}": v for k, v in self.fc1.params().items()})
        out.update({f"fc2.{k}": v for k, v in self.fc2.params().items()})
        return out


class GRUCell:
    """Standard GRU step.

    r = sig(x Wxr + h Whr + br), z = sig(x Wxz + h Whz + bz)
    n = tanh(x Wxn + r * (h Whn + bhn) + bn)
    h' = (1 - z) * n + z * h        (z = 1 carries the previous state)
    """

    def __init__(self, n_in, n_hidden, rng, dtype=np.float32):
        self.n_in = n_in
        self.n_hidden = n_hidden
        H = n_hidden
        self.wx = Tensor(uniform_init(rng, (n_in, 3 * H), n_in, dtype), requires_grad=True)
        self.wh = Tensor(uniform_init(rng, (H, 3 * H), H, dtype), requires_grad=True)
        self.bx = Tensor(np.zeros(3 * H, dtype=dtype), requires_grad=True)
        self.bh = Tensor(np.zeros(3 * H, dtype=dtype), requires_grad=True)

    def initial_state(self, batch, dtype=None):
        return Tensor(np.zeros((batch, self.n_hidden), dtype=dtype or self.wx.data.dtype))

    def __call__(self, x, h):
        if x.shape[-1] != self.n_in:
            raise ValueError(f"gru expects input dim {self.n_in}, got {x.shape[-1]}")
        if h.shape[-1] != self.n_hidden:
            raise ValueError(f"gru expects hidden dim {self.n_hidden}, got {h.shape[-1]}")
        H = self.n_hidden
        gx = T.add(T.matmul(x, self.wx), self.bx)
        gh = T.add(T.matmul(h, self.wh), self.bh)
        # split into reset / update / candidate lanes
        xr, xz, xn = (T.slice_lastdim(gx, i * H, (i + 1) * H) for i in range(3))
        hr, hz, hn = (T.slice_lastdim(gh, i * H, (i + 1) * H) for i in range(3))
        r = T.sigmoid(T.add(xr, hr))
        z = T.sigmoid(T.add(xz, hz))
        n = T.tanh(T.add(xn, T.mul(r, hn)))
        one_minus_z = T.sub(1.0, z)
        return T.add(T.mul(one_minus_z, n), T.mul(z, h))

    def params(self):
        return {"wx": self.wx, "wh": self.wh, "bx": self.bx, "bh": self.bh}


class GaussianHead:
    """Produces (mu, delta) with delta = softplus(raw) + DELTA_FLOOR > 0."""

    def __init__(self, n_in, n_latent, rng, dtype=np.float32):
        self.mu = Dense(n_in, n_latent, rng, dtype=dtype)
        self.raw_delta = Dense(n_in, n_latent, rng, dtype=dtype)

    def __call__(self, x):
        mu = self.mu(x)
        delta = T.add(T.softplus(self.raw_delta(x)), DELTA_FLOOR)
        return mu, delta

    def params(self):
        out = {}
        out.update({f"mu.{k}": v for k, v in self.mu.params().items()})
        out.update({f"delta.{k}": v for k, v in self.raw_delta.params().items()})
        return out


def gaussian_sample(mu, delta, noise):
    """Reparameterized draw mu + delta * noise; no gradient into noise."""
    if np.any(delta.data <= 0):
        raise ValueError("gaussian_sample requires strictly positive delta")
    eps = noise.detach() if isinstance(noise, Tensor) else Tensor(np.asarray(noise, dtype=mu.data.dtype))
    return T.add(mu, T.mul(delta, eps))


def kl_diag_gaussians(mu1, delta1, mu2, delta2):
    """Closed-form KL(N(mu1, delta1^2) || N(mu2, delta2^2)), summed over the last axis."""
    for d in (delta1, delta2):
        arr = d.data if isinstance(d, Tensor) else np.asarray(d)
        if np.any(arr <= 0):
            raise ValueError("kl_diag_gaussians requires strictly positive deltas")
    mu1, delta1 = _as_tensor(mu1), _as_tensor(delta1)
    mu2, delta2 = _as_tensor(mu2), _as_tensor(delta2)
    log_ratio = T.sub(T.log(delta2), T.log(delta1))
    var_term = T.div(T.add(T.square(delta1), T.square(T.sub(mu1, mu2))), T.mul(2.0, T.square(delta2)))
    per_dim = T.sub(T.add(log_ratio, var_term), 0.5)
    return T.tsum(per_dim, axis=-1)


def scaled_dot_attention(query, keys, values, d_key):
    """Dot-product attention over a small candidate set.

    query (..., d), keys (..., k, d), values (..., k, dv) ->
    fused (..., dv) and weights (..., k).
    """
    if keys.shape[-2] < 1:
        raise ValueError("attention requires at least one key")
    if d_key <= 0:
        raise ValueError("d_key must be positive")
    q = T.reshape(query, query.shape[:-1] + (1, query.shape[-1]))
    scores = T.mul(T.tsum(T.mul(q, keys), axis=-1), 1.0 / np.sqrt(d_key))
    weights = T.softmax(scores, axis=-1)
    w = T.reshape(weights, weights.shape + (1,))
    fused = T.tsum(T.mul(w, values), axis=-2)
    return fused, weights


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64 if np.asarray(x).dtype == np.float64 else np.float32))


def masked_mean(values, mask=None):
    """Mean of ``values`` over entries where mask == 1; 0 (with zero grads) if empty."""
    if mask is None:
        return T.tmean(values)
    m = np.asarray(mask, dtype=values.data.dtype)
    total = float(m.sum())
    if total == 0.0:
        return T.mul(T.tsum(T.mul(values, m)), 0.0)
    return T.mul(T.tsum(T.mul(values, m)), 1.0 / total)
