from dataclasses import dataclass

import torch

from jetssm.errors import ShapeError


@dataclass(frozen=True)
class AdamState:
    step: int
    exp_avg: dict
    exp_avg_sq: dict

    @classmethod
    def zeros(cls, params: dict) -> "AdamState":
        return cls(
            0,
            {k: torch.zeros_like(p, memory_format=torch.preserve_format) for k, p in params.items()},
            {k: torch.zeros_like(p, memory_format=torch.preserve_format) for k, p in params.items()},
        )


@torch.no_grad()
def adam_step(params: dict, grads: dict, state: AdamState, config) -> tuple[dict, AdamState]:
    """Bias-corrected Adam; returns new parameter and state dicts, inputs are left untouched.

    ``config`` needs ``learning_rate``, ``adam_betas`` and ``adam_eps``.
    """
    beta1, beta2 = config.adam_betas
    lr, eps = config.learning_rate, config.adam_eps
    step = state.step + 1
    bias_correction1 = 1 - beta1**step
    bias_correction2 = 1 - beta2**step
    new_params, exp_avg, exp_avg_sq = {}, {}, {}
    for name, p in params.items():
        if name not in grads:
            raise ShapeError(f"no gradient for parameter {name!r}")
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeError(f"gradient for {name!r} has shape {tuple(g.shape)}, parameter {tuple(p.shape)}")
        m = state.exp_avg[name] * beta1 + g * (1 - beta1)
        v = state.exp_avg_sq[name] * beta2 + g * g * (1 - beta2)
        denom = v.sqrt() / bias_correction2**0.5 + eps
        new_params[name] = p - (lr / bias_correction1) * m / denom
        exp_avg[name] = m
        exp_avg_sq[name] = v
    return new_params, AdamState(step, exp_avg, exp_avg_sq)
