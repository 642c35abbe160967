from . import tensor
from .gradcheck import grad_check
from .layers import (
    CausalSelfAttention,
    LayerNorm,
    Linear,
    Module,
    Transformer,
    TransformerBlock,
)
from .optim import Adam
from .tensor import Parameter, Tensor

__all__ = [
    "tensor",
    "grad_check",
    "Adam",
    "Parameter",
    "Tensor",
    "Module",
    "Linear",
    "LayerNorm",
    "CausalSelfAttention",
    "TransformerBlock",
    "Transformer",
]
