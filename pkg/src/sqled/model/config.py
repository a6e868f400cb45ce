"""Model and training hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from ..errors import ConfigError


@dataclass(frozen=True)
class ModelConfig:
    hidden_dim: int = 256
    attention_heads: int = 4
    gat_layers: int = 3
    leaky_relu_slope: float = 0.2
    dropout_rate: float = 0.1
    token_vocab_size: int = 1
    label_vocab_size: int = 1
    edge_types: int = 4
    ffn_dim: int = 0  # 0 -> hidden_dim
    external_dim: int = 0  # width of external leaf vectors; 0 disables projection
    embed_std: float = 1.0
    seed: int = 0
    layer_ablation: bool = False  # permits gat_layers != 3

    def __post_init__(self):
        if self.hidden_dim <= 0 or self.attention_heads <= 0:
            raise ConfigError("hidden_dim and attention_heads must be positive")
        if self.hidden_dim % self.attention_heads:
            raise ConfigError(f"hidden_dim {self.hidden_dim} not divisible by {self.attention_heads} heads")
        if self.gat_layers != 3 and not self.layer_ablation:
            raise ConfigError("gat_layers other than 3 requires layer_ablation")
        if self.gat_layers < 1:
            raise ConfigError("gat_layers must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError("dropout_rate must be in [0, 1)")
        if self.token_vocab_size < 1 or self.label_vocab_size < 1:
            raise ConfigError("vocabularies need at least the UNK row")

    @property
    def head_dim(self) -> int:
        return self.hidden_dim // self.attention_heads

    @property
    def ffn_width(self) -> int:
        return self.ffn_dim or self.hidden_dim

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass(frozen=True)
class TrainConfig:
    batch_beams: int = 16
    epochs: int = 20
    learning_rate: float = 3e-5
    warmup_fraction: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.warmup_fraction < 1.0:
            raise ConfigError("warmup_fraction must be in (0, 1)")
        if self.batch_beams < 1 or self.epochs < 1:
            raise ConfigError("batch_beams and epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})
