"""AdamW with decoupled weight decay, and global-norm gradient clipping"""

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from ..tensor_core import Tensor
from ..utils.exceptions import ContractError, NumericError


@dataclass
class OptimState:
    """First/second moments per parameter name and the number of steps taken."""

    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "step": self.step,
            "m": {k: a.copy() for k, a in self.m.items()},
            "v": {k: a.copy() for k, a in self.v.items()},
        }

    @classmethod
    def from_dict(cls, blob: Mapping[str, Any]) -> "OptimState":
        return cls(
            step=int(blob["step"]),
            m={k: np.array(a, dtype=np.float64) for k, a in blob["m"].items()},
            v={k: np.array(a, dtype=np.float64) for k, a in blob["v"].items()},
        )


class AdamW:
    """Bias-corrected Adam; weight decay is applied to the parameter, not the gradient.

    Per step t, for each parameter p with gradient g::

        p <- p - lr * wd * p
        m <- b1 * m + (1 - b1) * g
        v <- b2 * v + (1 - b2) * g^2
        p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
    """

    def __init__(
        self,
        params: Mapping[str, Tensor],
        lr: float,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-5,
        weight_decay: float = 0.0,
        state: Optional[OptimState] = None,
    ):
        self.params = dict(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.state = state or OptimState(
            m={k: np.zeros_like(p.data) for k, p in self.params.items()},
            v={k: np.zeros_like(p.data) for k, p in self.params.items()},
        )
        for name, p in self.params.items():
            if name not in self.state.m or self.state.m[name].shape != p.shape or self.state.v[name].shape != p.shape:
                raise ContractError(f"optimizer state does not match parameter {name} {p.shape}")

    def step(self) -> None:
        self.state.step += 1
        t = self.state.step
        bias1 = 1.0 - self.beta1 ** t
        bias2 = 1.0 - self.beta2 ** t
        for name, p in self.params.items():
            if p.grad is None:
                continue
            g = p.grad
            m = self.state.m[name]
            v = self.state.v[name]
            if self.weight_decay:
                p.data -= self.lr * self.weight_decay * p.data
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p.data -= self.lr * (m / bias1) / (np.sqrt(v / bias2) + self.eps)


def global_grad_norm(params: Mapping[str, Tensor]) -> float:
    total = 0.0
    for p in params.values():
        if p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    return float(np.sqrt(total))


def clip_grad_norm(params: Mapping[str, Tensor], max_norm: Optional[float]) -> Tuple[float, float]:
    """Scale all gradients by ``max_norm / norm`` when ``norm > max_norm``.

    Returns (norm before clipping, norm after). Gradients are untouched when
    the norm is within bounds or ``max_norm`` is None.
    """
    norm = global_grad_norm(params)
    if not np.isfinite(norm):
        raise NumericError(f"gradient norm is not finite: {norm}", {"grad_norm": str(norm)})
    if max_norm is None or norm <= max_norm:
        return norm, norm
    scale = max_norm / norm
    for p in params.values():
        if p.grad is not None:
            p.grad *= scale
    return norm, global_grad_norm(params)
