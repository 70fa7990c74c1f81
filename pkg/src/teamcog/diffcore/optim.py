"""Optimizers and gradient clipping for parameter dicts (name -> Tensor)."""

import numpy as np


def clip_grad_norm(params, max_norm):
    """Rescale gradients in place so their global L2 norm is <= max_norm."""
    total_sq = 0.0
    for p in params.values():
        if p.grad is not None:
            total_sq += float((p.grad.astype(np.float64) ** 2).sum())
    total = np.sqrt(total_sq)
    if total > max_norm and total > 0:
        scale = max_norm / total
        for p in params.values():
            if p.grad is not None:
                p.grad *= scale
    return total


class RMSProp:
    """Elementwise adaptive step: v <- alpha v + (1-alpha) g^2, p -= lr g / (sqrt(v) + eps)."""

    def __init__(self, params, lr=5e-4, alpha=0.99, eps=1e-5):
        self.params = params
        self.lr = lr
        self.alpha = alpha
        self.eps = eps
        self.v = {name: np.zeros_like(p.data) for name, p in params.items()}

    def step(self):
        for name, p in self.params.items():
            if p.grad is None:
                continue
            v = self.v[name]
            v *= self.alpha
            v += (1.0 - self.alpha) * p.grad * p.grad
            p.data -= self.lr * p.grad / (np.sqrt(v) + self.eps)

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()


class SGD:
    """Plain gradient descent; the parameter change is exactly lr * grad."""

    def __init__(self, params, lr=5e-4):
        self.params = params
        self.lr = lr

    def step(self):
        for p in self.params.values():
            if p.grad is None:
                continue
            p.data -= self.lr * p.grad

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()


def make_optimizer(kind, params, lr):
    if kind == "rmsprop":
        return RMSProp(params, lr=lr)
    if kind == "sgd":
        return SGD(params, lr=lr)
    raise ValueError(f"unknown optimizer '{kind}'")
