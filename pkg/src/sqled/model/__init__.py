from .config import ModelConfig, TrainConfig
from .features import Batch, GraphInput, featurize, graph_words, make_batch
from .gradcheck import grad_check
from .io import ExternalEmbeddings, load_checkpoint, save_checkpoint
from .layers import attention_weights, bce_loss, gat_backward, gat_forward
from .network import embed_nodes, encode_pair, forward, init_params, predict, score
from .vocab import Vocab

__all__ = [
    "Batch", "ExternalEmbeddings", "GraphInput", "ModelConfig", "TrainConfig", "Vocab", "attention_weights", "bce_loss",
    "embed_nodes", "encode_pair", "featurize", "forward", "gat_backward", "gat_forward", "grad_check",
    "graph_words", "init_params", "load_checkpoint", "make_batch", "predict", "save_checkpoint", "score",
]
