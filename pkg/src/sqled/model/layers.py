"""Forward and backward passes for the encoder layer, the FFN head and the loss.

All functions work on float64 arrays.  Edge arrays come from
``features.Segments``: edges sorted by destination, every node owning at
least one incoming (self-loop) edge, so ``np.*.reduceat`` gives segment
reductions with a fixed summation order.
"""

from __future__ import annotations

import numpy as np

from ..errors import LengthMismatch, NumericalError

_S_LO = np.finfo(np.float64).tiny
_S_HI = 1.0 - 2.0 ** -53


def sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def segment_softmax(e: np.ndarray, dst: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Softmax of edge logits ``e`` (E, heads) over the incoming edges of each node."""
    mx = np.maximum.reduceat(e, starts, axis=0)
    z = np.exp(e - mx[dst])
    return z / np.add.reduceat(z, starts, axis=0)[dst]


def gat_forward(H, seg, p: dict, heads: int, slope: float, mask=None):
    """One attention layer.  ``p`` holds Ws, Wt (d, d), a (heads, d/heads), b (edge types,).

    score(i <- j) = a . LeakyReLU(Ws h_i + Wt h_j) + b[type], softmax over the
    in-neighbours j of i, message Wt h_j, then ELU(h_i + concat of heads).
    ``mask`` is an optional inverted-dropout multiplier on the aggregated messages.
    """
    n, d = H.shape
    dh = d // heads
    E = len(seg.src)
    S = H @ p["Ws"]
    T = H @ p["Wt"]
    z = S[seg.dst] + T[seg.src]
    u = np.where(z > 0, z, slope * z)
    e = np.einsum("ekc,kc->ek", u.reshape(E, heads, dh), p["a"]) + p["b"][seg.etype][:, None]
    alpha = segment_softmax(e, seg.dst, seg.dst_starts)
    Tsrc = T[seg.src].reshape(E, heads, dh)
    msg = (alpha[:, :, None] * Tsrc).reshape(E, d)
    M = np.add.reduceat(msg, seg.dst_starts, axis=0)
    Md = M if mask is None else M * mask
    pre = H + Md
    out = np.where(pre > 0, pre, np.expm1(np.minimum(pre, 0.0)))
    if not np.all(np.isfinite(out)):
        raise NumericalError("non-finite activations in attention layer")
    cache = (H, seg, p, heads, slope, mask, z, u, alpha, Tsrc, pre, out)
    return out, cache


def gat_backward(dout, cache):
    H, seg, p, heads, slope, mask, z, u, alpha, Tsrc, pre, out = cache
    n, d = H.shape
    dh = d // heads
    E = len(seg.src)
    dpre = dout * np.where(pre > 0, 1.0, out + 1.0)
    dH = dpre.copy()
    dM = dpre if mask is None else dpre * mask
    dmsg = dM[seg.dst].reshape(E, heads, dh)
    dalpha = np.einsum("ekc,ekc->ek", dmsg, Tsrc)
    dTsrc = (alpha[:, :, None] * dmsg).reshape(E, d)
    s = np.add.reduceat(alpha * dalpha, seg.dst_starts, axis=0)
    de = alpha * (dalpha - s[seg.dst])
    da = np.einsum("ek,ekc->kc", de, u.reshape(E, heads, dh))
    db = np.bincount(seg.etype, weights=de.sum(axis=1), minlength=len(p["b"]))
    du = (de[:, :, None] * p["a"][None]).reshape(E, d)
    dz = du * np.where(z > 0, 1.0, slope)
    dS = np.add.reduceat(dz, seg.dst_starts, axis=0)
    dT = np.add.reduceat((dz + dTsrc)[seg.src_perm], seg.src_starts, axis=0)
    grads = {"Ws": H.T @ dS, "Wt": H.T @ dT, "a": da, "b": db}
    dH += dS @ p["Ws"].T + dT @ p["Wt"].T
    return dH, grads


def attention_weights(H, seg, p: dict, heads: int, slope: float) -> np.ndarray:
    """Attention coefficients (E, heads) of one layer, for inspection and tests."""
    _, cache = gat_forward(H, seg, p, heads, slope)
    return cache[8]


def mean_pool(H, starts, sizes):
    return np.add.reduceat(H, starts, axis=0) / sizes[:, None]


def mean_pool_backward(dP, n, starts, sizes):
    owner = np.repeat(np.arange(len(sizes)), sizes)
    return (dP / sizes[:, None])[owner]


def ffn_forward(h, p: dict):
    z1 = h @ p["W1"] + p["b1"]
    t = np.tanh(z1)
    logit = t @ p["w2"] + p["b2"][0]
    return logit, (h, t, p)


def ffn_backward(dlogit, cache):
    h, t, p = cache
    dt = np.outer(dlogit, p["w2"])
    dz1 = dt * (1.0 - t * t)
    grads = {"W1": h.T @ dz1, "b1": dz1.sum(axis=0), "w2": t.T @ dlogit, "b2": np.array([dlogit.sum()])}
    return dz1 @ p["W1"].T, grads


def bce_with_logits(logits, labels):
    """Mean binary cross-entropy from logits and its gradient w.r.t. the logits."""
    logits = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if logits.shape != y.shape:
        raise LengthMismatch(f"{logits.shape[0]} logits vs {y.shape[0]} labels")
    n = len(y)
    loss = float(np.mean(np.logaddexp(0.0, logits) - y * logits))
    return loss, (sigmoid(logits) - y) / n


def bce_loss(scores, labels, clamp: float = 1e-12):
    """Mean binary cross-entropy of probabilities (logs clamped) and dL/ds."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if s.shape != y.shape:
        raise LengthMismatch(f"{len(s)} scores vs {len(y)} labels")
    if s.size == 0:
        raise LengthMismatch("no scores")
    sc = np.clip(s, clamp, 1.0 - clamp)
    n = len(y)
    loss = float(np.mean(-(y * np.log(sc) + (1 - y) * np.log1p(-sc))))
    grad = (-y / sc + (1 - y) / (1 - sc)) / n
    return loss, grad


def probability(logits) -> np.ndarray:
    """Sigmoid kept strictly inside (0, 1) for every finite logit."""
    return np.clip(sigmoid(logits), _S_LO, _S_HI)
