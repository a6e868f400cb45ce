"""Checkpoint and external-embedding files (numpy ``.npz`` containers)."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataError, DimensionError, FormatError
from .config import ModelConfig
from .vocab import Vocab

FORMAT = "sqled-checkpoint"
VERSION = 1
_HEADER = "__header__"


def save_checkpoint(path: str | Path, params: dict, cfg: ModelConfig, tok_vocab: Vocab, lab_vocab: Vocab,
                    extra: dict | None = None) -> None:
    """``extra`` holds JSON-serializable run metadata such as graph flags."""
    header = {"format": FORMAT, "version": VERSION, "model": cfg.to_dict(),
              "tokens": tok_vocab.to_list(), "labels": lab_vocab.to_list(), "extra": extra or {}}
    blob = np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **{_HEADER: blob}, **{f"p/{k}": v for k, v in params.items()})


def load_checkpoint(path: str | Path) -> tuple[dict, ModelConfig, Vocab, Vocab, dict]:
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise DataError(f"{path}: not a checkpoint ({exc})") from None
    with data:
        if _HEADER not in data.files:
            raise DataError(f"{path}: missing header")
        header = json.loads(data[_HEADER].tobytes().decode())
        if header.get("format") != FORMAT:
            raise DataError(f"{path}: unknown format {header.get('format')!r}")
        if header.get("version") != VERSION:
            raise DataError(f"{path}: unsupported checkpoint version {header.get('version')}")
        params = {k[2:]: data[k].astype(np.float64) for k in data.files if k.startswith("p/")}
    cfg = ModelConfig.from_dict(header["model"])
    return params, cfg, Vocab(header["tokens"]), Vocab(header["labels"]), header.get("extra", {})


class ExternalEmbeddings:
    """Precomputed leaf vectors keyed by ``q:<qid>`` and ``s:<qid>:<rank>``.

    Each key holds a (subwords x dim) float32 matrix.  An optional
    ``<key>:align`` integer vector maps every subword row to its token
    index; token vectors are the mean of their subword rows.  Without an
    alignment the rows are already per token.
    """

    def __init__(self, arrays: dict[str, np.ndarray]):
        self._a = arrays
        dims = {v.shape[1] for k, v in arrays.items() if not k.endswith(":align") and v.ndim == 2}
        if len(dims) > 1:
            raise DimensionError(f"inconsistent embedding widths {sorted(dims)}")
        self.dim = dims.pop() if dims else 0

    @classmethod
    def load(cls, path: str | Path) -> "ExternalEmbeddings":
        try:
            with np.load(path, allow_pickle=False) as data:
                return cls({k: data[k] for k in data.files})
        except (OSError, ValueError) as exc:
            raise DataError(f"{path}: unreadable embedding file ({exc})") from None

    def _tokens(self, key: str, n_tokens: int) -> np.ndarray:
        if key not in self._a:
            raise FormatError(0, f"no embedding for {key}")
        rows = np.asarray(self._a[key], dtype=np.float64)
        align = self._a.get(key + ":align")
        if align is None:
            if rows.shape[0] != n_tokens:
                raise DimensionError(f"{key}: {rows.shape[0]} rows for {n_tokens} tokens")
            return rows
        align = np.asarray(align, dtype=np.int64)
        if align.shape != (rows.shape[0],) or (align.size and (align.min() < 0 or align.max() >= n_tokens)):
            raise DimensionError(f"{key}: alignment does not fit {n_tokens} tokens")
        counts = np.bincount(align, minlength=n_tokens)
        if (counts == 0).any():
            raise DimensionError(f"{key}: tokens without subwords {np.flatnonzero(counts == 0).tolist()}")
        out = np.zeros((n_tokens, rows.shape[1]))
        np.add.at(out, align, rows)
        return out / counts[:, None]

    def question(self, qid: str, n_tokens: int) -> np.ndarray:
        return self._tokens(f"q:{qid}", n_tokens)

    def sql(self, qid: str, rank: int, n_tokens: int) -> np.ndarray:
        return self._tokens(f"s:{qid}:{rank}", n_tokens)
