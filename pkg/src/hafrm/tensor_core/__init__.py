from .tensor import Tensor, Tape, TapeNode, Function, backward, no_grad, is_grad_enabled, as_tensor
from .ops import (
    matmul,
    log_sigmoid,
    log_softmax,
    layer_norm,
    gelu,
    masked_softmax,
    embedding,
    linear,
)
from .gradcheck import GradCheckReport, grad_check, grad_check_params

__all__ = [
    "Tensor",
    "Tape",
    "TapeNode",
    "Function",
    "backward",
    "no_grad",
    "is_grad_enabled",
    "as_tensor",
    "matmul",
    "log_sigmoid",
    "log_softmax",
    "layer_norm",
    "gelu",
    "masked_softmax",
    "embedding",
    "linear",
    "GradCheckReport",
    "grad_check",
    "grad_check_params",
]
