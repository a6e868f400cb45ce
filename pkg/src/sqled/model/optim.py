"""AdamW with decoupled weight decay and a linear warmup/decay schedule."""

from __future__ import annotations

import math

import numpy as np

from ..errors import NumericalError


def linear_schedule(step: int, total_steps: int, warmup_fraction: float) -> float:
    """Multiplier for 1-based ``step``: ramps to 1 over the warmup, then decays to 0."""
    warmup = max(1, math.ceil(warmup_fraction * total_steps))
    if step <= warmup:
        return step / warmup
    return max(0.0, (total_steps - step) / max(1, total_steps - warmup))


class AdamW:
    def __init__(self, params: dict, lr: float, beta1=0.9, beta2=0.999, eps=1e-8, weight_decay=0.01):
        self.lr, self.beta1, self.beta2, self.eps, self.wd = lr, beta1, beta2, eps, weight_decay
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict, lr_scale: float = 1.0) -> None:
        self.t += 1
        lr = self.lr * lr_scale
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for k, p in params.items():
            g = grads[k]
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= lr * self.wd * p
            p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
            if not np.all(np.isfinite(p)):
                raise NumericalError(f"parameter {k} became non-finite")

    def state(self) -> dict:
        return {"t": self.t, "m": self.m, "v": self.v}
