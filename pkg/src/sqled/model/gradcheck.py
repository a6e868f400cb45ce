"""Central finite differences against the analytic backward pass.

LeakyReLU is not differentiable at 0 and ELU has no second derivative
there.  When a perturbation of +-eps moves any of their inputs across 0 the
central difference is not a valid estimate, so such coordinates are skipped
and counted (``kinks``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


def relative_error(num: np.ndarray, ana: np.ndarray, floor: float = 1e-6) -> float:
    """||num - ana|| / max(||num||, ||ana||, floor).  The floor keeps groups whose
    gradient is zero up to round-off from reporting pure noise."""
    num, ana = np.ravel(num), np.ravel(ana)
    return float(np.linalg.norm(num - ana) / max(np.linalg.norm(num), np.linalg.norm(ana), floor))


@dataclass
class GradCheckReport:
    errors: dict[str, float] = field(default_factory=dict)
    checked: int = 0
    kinks: int = 0

    @property
    def worst(self) -> float:
        return max(self.errors.values()) if self.errors else 0.0


def check_function(f: Callable[[dict], float | tuple], params: dict, grads: dict, eps: float = 1e-4,
                   samples: int = 30, seed: int = 0, rows: dict | None = None) -> GradCheckReport:
    """Relative error per parameter group over up to ``samples`` sampled entries.

    ``f`` returns the loss, or ``(loss, signature)`` where the signature is a
    boolean array of kink sides; coordinates whose signature changes under
    the perturbation are excluded.  ``rows`` restricts a group to some
    first-axis rows (embedding tables only get gradient on looked-up rows).
    """
    def call(p):
        r = f(p)
        return r if isinstance(r, tuple) else (r, None)

    _, base_sig = call(params)
    rng = np.random.default_rng(seed)
    report = GradCheckReport()
    for name in sorted(params):
        p = params[name]
        if rows and name in rows:
            width = int(np.prod(p.shape[1:]))
            candidates = np.array([r * width + c for r in rows[name] for c in range(width)], dtype=np.int64)
        else:
            candidates = np.arange(p.size)
        if candidates.size == 0:
            continue
        pick = candidates if candidates.size <= samples else rng.choice(candidates, samples, replace=False)
        flat = p.reshape(-1)
        num, ana = [], []
        for idx in pick:
            old = flat[idx]
            flat[idx] = old + eps
            up, sig_up = call(params)
            flat[idx] = old - eps
            down, sig_down = call(params)
            flat[idx] = old
            if base_sig is not None and not (np.array_equal(sig_up, base_sig) and np.array_equal(sig_down, base_sig)):
                report.kinks += 1
                continue
            num.append((up - down) / (2 * eps))
            ana.append(grads[name].reshape(-1)[idx])
        report.checked += len(num)
        if num:
            report.errors[name] = relative_error(np.array(num), np.array(ana))
    return report


def grad_check(pairs, labels, params: dict, cfg, eps: float = 1e-4, samples: int = 30, seed: int = 0,
               corrupt: str | None = None, corrupt_factor: float = 1.1) -> GradCheckReport:
    """Finite-difference check of every parameter group on a small batch of pairs.

    Dropout is not applied.  ``corrupt`` scales one group's analytic gradient,
    as a negative control.
    """
    from . import layers
    from .features import make_batch
    from .network import backward, forward

    batch = make_batch(pairs)
    logits, cache = forward(params, cfg, batch)
    _, dlogits = layers.bce_with_logits(logits, labels)
    grads = backward(params, cfg, cache, dlogits)
    if corrupt is not None:
        grads[corrupt] = grads[corrupt] * corrupt_factor
    rows = {}
    for name, ids in (("tok_emb", [batch.questions.tok, batch.sqls.tok]),
                      ("lab_emb", [batch.questions.lab, batch.sqls.lab])):
        used = np.unique(np.concatenate(ids))
        rows[name] = used[used >= 0].tolist()

    def f(p):
        logits, cache = forward(p, cfg, batch)
        loss, _ = layers.bce_with_logits(logits, labels)
        # LeakyReLU inputs (z) and ELU inputs (pre) of every layer
        sig = np.concatenate([np.concatenate([c[6].ravel(), c[10].ravel()]) > 0
                              for enc in (cache[1], cache[2]) for c in enc[1]])
        return loss, sig

    return check_function(f, params, grads, eps=eps, samples=samples, seed=seed, rows=rows)
