"""Parameters, full forward/backward pass and inference for the pair scorer."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import DimensionError
from . import layers
from .config import ModelConfig
from .features import Batch, GraphInput, Segments, make_batch, union

ENCODERS = ("q", "s")


def _glorot(rng, fan_in, fan_out, shape=None):
    std = np.sqrt(2.0 / (fan_in + fan_out))
    return rng.normal(0.0, std, size=shape or (fan_in, fan_out))


def init_params(cfg: ModelConfig) -> dict[str, np.ndarray]:
    """Seeded initialization; the draw order is fixed so equal configs give equal tensors."""
    rng = np.random.default_rng(cfg.seed)
    d, k = cfg.hidden_dim, cfg.attention_heads
    p = {
        "tok_emb": rng.normal(0.0, cfg.embed_std, size=(cfg.token_vocab_size, d)),
        "lab_emb": rng.normal(0.0, cfg.embed_std, size=(cfg.label_vocab_size, d)),
    }
    if cfg.external_dim:
        p["ext_proj"] = _glorot(rng, cfg.external_dim, d)
    for enc in ENCODERS:
        for layer in range(cfg.gat_layers):
            pre = f"{enc}.{layer}."
            p[pre + "Ws"] = _glorot(rng, d, d)
            p[pre + "Wt"] = _glorot(rng, d, d)
            p[pre + "a"] = _glorot(rng, cfg.head_dim, 1, shape=(k, cfg.head_dim))
            p[pre + "b"] = np.zeros(cfg.edge_types)
    f = cfg.ffn_width
    p["W1"] = _glorot(rng, 2 * d, f)
    p["b1"] = np.zeros(f)
    p["w2"] = _glorot(rng, f, 1, shape=(f,))
    p["b2"] = np.zeros(1)
    return p


def layer_params(params: dict, enc: str, layer: int) -> dict:
    pre = f"{enc}.{layer}."
    return {k: params[pre + k] for k in ("Ws", "Wt", "a", "b")}


def embed_nodes(seg: Segments, params: dict, cfg: ModelConfig) -> np.ndarray:
    """Initial node features: token rows for leaves, label rows for internals,
    external vectors (projected when ``ext_proj`` exists) where supplied."""
    d = cfg.hidden_dim
    H = np.empty((seg.n, d))
    leaf = (seg.tok >= 0) & ~seg.ext_mask
    inner = seg.lab >= 0
    H[leaf] = params["tok_emb"][seg.tok[leaf]]
    H[inner] = params["lab_emb"][seg.lab[inner]]
    if seg.ext_mask.any():
        rows = seg.ext_rows[seg.ext_mask]
        if "ext_proj" in params:
            if rows.shape[1] != params["ext_proj"].shape[0]:
                raise DimensionError(f"external width {rows.shape[1]} != {params['ext_proj'].shape[0]}")
            H[seg.ext_mask] = rows @ params["ext_proj"]
        elif rows.shape[1] != d:
            raise DimensionError(f"external width {rows.shape[1]} != hidden_dim {d} and no projection")
        else:
            H[seg.ext_mask] = rows
    return H


def _embed_backward(dH, seg: Segments, params: dict, grads: dict) -> None:
    leaf = (seg.tok >= 0) & ~seg.ext_mask
    inner = seg.lab >= 0
    np.add.at(grads["tok_emb"], seg.tok[leaf], dH[leaf])
    np.add.at(grads["lab_emb"], seg.lab[inner], dH[inner])
    if "ext_proj" in params and seg.ext_mask.any():
        grads["ext_proj"] += seg.ext_rows[seg.ext_mask].T @ dH[seg.ext_mask]


def _encode(enc: str, seg: Segments, params: dict, cfg: ModelConfig, rng=None):
    H = embed_nodes(seg, params, cfg)
    caches = []
    for layer in range(cfg.gat_layers):
        mask = None
        if rng is not None and cfg.dropout_rate > 0:
            keep = 1.0 - cfg.dropout_rate
            mask = (rng.random(H.shape) < keep) / keep
        H, c = layers.gat_forward(H, seg, layer_params(params, enc, layer), cfg.attention_heads,
                                  cfg.leaky_relu_slope, mask)
        caches.append(c)
    return layers.mean_pool(H, seg.graph_starts, seg.graph_sizes), (seg, caches)


def _encode_backward(enc: str, dpooled, cache, params: dict, cfg: ModelConfig, grads: dict) -> None:
    seg, caches = cache
    dH = layers.mean_pool_backward(dpooled, seg.n, seg.graph_starts, seg.graph_sizes)
    for layer in reversed(range(cfg.gat_layers)):
        dH, g = layers.gat_backward(dH, caches[layer])
        pre = f"{enc}.{layer}."
        for k, v in g.items():
            grads[pre + k] += v
    _embed_backward(dH, seg, params, grads)


def forward(params: dict, cfg: ModelConfig, batch: Batch, rng=None):
    """Logits for every pair in ``batch``.  ``rng`` enables dropout (training)."""
    pq, cq = _encode("q", batch.questions, params, cfg, rng)
    ps, cs = _encode("s", batch.sqls, params, cfg, rng)
    h = np.concatenate([pq[batch.q_index], ps], axis=1)
    logits, cf = layers.ffn_forward(h, params)
    return logits, (batch, cq, cs, cf, len(pq))


def backward(params: dict, cfg: ModelConfig, cache, dlogits) -> dict[str, np.ndarray]:
    batch, cq, cs, cf, nq = cache
    grads = {k: np.zeros_like(v) for k, v in params.items()}
    dh, g = layers.ffn_backward(dlogits, cf)
    for k, v in g.items():
        grads[k] += v
    d = cfg.hidden_dim
    dpq = np.zeros((nq, d))
    np.add.at(dpq, batch.q_index, dh[:, :d])
    _encode_backward("q", dpq, cq, params, cfg, grads)
    _encode_backward("s", dh[:, d:], cs, params, cfg, grads)
    return grads


def loss_and_grads(params: dict, cfg: ModelConfig, batch: Batch, labels, rng=None):
    logits, cache = forward(params, cfg, batch, rng)
    loss, dlogits = layers.bce_with_logits(logits, labels)
    return loss, backward(params, cfg, cache, dlogits)


def encode_pair(q: GraphInput, s: GraphInput, params: dict, cfg: ModelConfig) -> np.ndarray:
    """Global representation [mean question node ; mean SQL node], width 2 * hidden_dim."""
    pq, _ = _encode("q", union([q]), params, cfg)
    ps, _ = _encode("s", union([s]), params, cfg)
    return np.concatenate([pq[0], ps[0]])


def score(h_global: np.ndarray, params: dict) -> float:
    logit, _ = layers.ffn_forward(np.asarray(h_global, dtype=np.float64)[None, :], params)
    return float(layers.probability(logit)[0])


def predict(params: dict, cfg: ModelConfig, pairs: Sequence[tuple[GraphInput, GraphInput]],
            batch_pairs: int = 256) -> np.ndarray:
    """Scores in (0, 1), one per pair; evaluated in chunks without dropout."""
    out = []
    for i in range(0, len(pairs), batch_pairs):
        logits, _ = forward(params, cfg, make_batch(pairs[i:i + batch_pairs]))
        out.append(layers.probability(logits))
    return np.concatenate(out) if out else np.zeros(0)
