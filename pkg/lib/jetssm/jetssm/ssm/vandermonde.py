"""Chunked Vandermonde products for diagonal SSM kernels.

The kernel ``k_l = scale * Re(sum_n w_n * a_n**l)`` is evaluated chunk by chunk over
the ``l`` axis, so at most ``N x chunk`` powers exist at any time. The backward pass
recomputes the powers instead of saving them, which keeps training memory at
``O(N + L)`` per channel as well.
"""

import torch


def _power_chunks(a_bar: torch.Tensor, length: int, chunk: int):
    """Yield ``(start, powers)`` with ``powers[..., n, j] = a_bar[..., n] ** (start + j)``."""
    carry = torch.ones_like(a_bar)
    for start in range(0, length, chunk):
        count = min(chunk, length - start)
        steps = a_bar.unsqueeze(-1).expand(*a_bar.shape, count)
        ramp = torch.cat([torch.ones_like(steps[..., :1]), steps[..., : count - 1]], dim=-1)
        powers = carry.unsqueeze(-1) * torch.cumprod(ramp, dim=-1)
        yield start, powers
        carry = powers[..., -1] * a_bar


def contract(weights: torch.Tensor, a_bar: torch.Tensor, length: int, chunk: int) -> torch.Tensor:
    """``sum_n weights[..., n] * a_bar[..., n] ** l`` for ``l < length``, complex ``[..., length]``."""
    out = torch.empty(*a_bar.shape[:-1], length, dtype=a_bar.dtype, device=a_bar.device)
    for start, powers in _power_chunks(a_bar, length, chunk):
        out[..., start : start + powers.shape[-1]] = torch.einsum("...n,...nl->...l", weights, powers)
    return out


def power_sum(a_bar: torch.Tensor, h: torch.Tensor, chunk: int) -> torch.Tensor:
    """``sum_l h[..., l] * a_bar[..., n] ** l`` for real ``h``, complex ``[..., N]``."""
    acc = torch.zeros_like(a_bar)
    h = h.to(a_bar.dtype)
    for start, powers in _power_chunks(a_bar, h.shape[-1], chunk):
        acc = acc + torch.einsum("...nl,...l->...n", powers, h[..., start : start + powers.shape[-1]])
    return acc


class VandermondeKernel(torch.autograd.Function):
    @staticmethod
    def forward(ctx, a_bar, weights, length, chunk, scale):
        ctx.save_for_backward(a_bar, weights)
        ctx.chunk = chunk
        ctx.scale = scale
        return scale * contract(weights, a_bar, length, chunk).real

    @staticmethod
    def backward(ctx, grad):
        # torch's complex convention: for a real loss the gradient is dL/dRe + i dL/dIm,
        # i.e. conj(f'(z)) * g for a holomorphic contribution f.
        a_bar, weights = ctx.saved_tensors
        grad_a = grad_w = None
        if ctx.needs_input_grad[1]:
            grad_w = ctx.scale * power_sum(a_bar, grad, ctx.chunk).conj()
        if ctx.needs_input_grad[0]:
            length = grad.shape[-1]
            ell = torch.arange(1, length, dtype=grad.dtype, device=grad.device)
            shifted = torch.zeros_like(grad)
            shifted[..., :-1] = grad[..., 1:] * ell
            grad_a = ctx.scale * (weights * power_sum(a_bar, shifted, ctx.chunk)).conj()
        return grad_a, grad_w, None, None, None


def vandermonde(a_bar, weights, length, chunk, scale):
    a_bar, weights = torch.broadcast_tensors(a_bar, weights)
    return VandermondeKernel.apply(a_bar, weights, length, chunk, scale)
